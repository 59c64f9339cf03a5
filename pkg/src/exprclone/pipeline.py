"""End-to-end expression cloning: global warp, local re-shape, elastic blend,
ratio selection, ratio-image details with muscle weighting."""

from __future__ import annotations

import contextlib
import logging
import os
import re
from dataclasses import dataclass, field

import numpy as np

from . import db_metric
from .eigenface import EigenBasis, load_basis, train_from_dir
from .elastic import SolveReport, solve_all
from .errors import ExprCloneError, InputError, StageError
from .face_model import FeaturePointSet, check_schemas, read_feature_points, write_feature_points
from .global_warp import GlobalWarpResult, render_global, transfer_displacements
from .illumination import (
    apply_md,
    box_filter3,
    build_mask,
    compose_final,
    compute_eri,
    read_muscle_config,
)
from .local_reshape import reshape_all
from .mesh_warp import TriangleMesh, delaunay_triangulate, piecewise_affine_warp
from .raster import as_image, dump_field, image_size, read_image, write_image

log = logging.getLogger(__name__)

FALLBACK_LAMBDA = 1.0


@contextlib.contextmanager
def stage(name):
    try:
        yield
    except StageError:
        raise
    except (ExprCloneError, ValueError, KeyError, OSError) as exc:
        raise StageError(name, exc) from exc


@dataclass
class StageOutputs:
    mesh: TriangleMesh
    global_result: GlobalWarpResult
    local_pts: FeaturePointSet
    reshape_records: list
    fi_pts: FeaturePointSet
    solve_report: SolveReport
    fi_img: np.ndarray
    lam: float
    score_table: list | None
    eri: np.ndarray
    mask: np.ndarray
    detail: np.ndarray
    final: np.ndarray

    @property
    def global_pts(self):
        return self.global_result.positions

    @property
    def gi(self):
        return self.global_result.image

    def local_image(self, tgt_img):
        """LI: the target neutral image warped onto the re-shaped landmarks.
        Only produced for inspection."""
        return piecewise_affine_warp(tgt_img, self.mesh, self.mesh.with_vertices(self.local_pts))


def render_fi(tgt_img, mesh: TriangleMesh, fi_pts: FeaturePointSet):
    return piecewise_affine_warp(tgt_img, mesh, mesh.with_vertices(fi_pts))


def clone(src_neutral_img, src_neutral_pts, src_exp_img, src_exp_pts, tgt_img, tgt_pts,
          areas=(), *, lam=None, basis: EigenBasis | None = None,
          grid=db_metric.DEFAULT_GRID, omega=db_metric.DEFAULT_OMEGA) -> StageOutputs:
    """Run every stage on in-memory inputs.

    ``lam`` fixes the elasticity ratio.  Otherwise it is chosen over ``grid``
    with the DB metric when a ``basis`` is given, and falls back to 1.
    """
    with stage("input"):
        src_neutral_img = as_image(src_neutral_img)
        src_exp_img = as_image(src_exp_img)
        tgt_img = as_image(tgt_img)
        check_schemas(tgt_pts, src_neutral_pts, src_exp_pts)
        if tgt_pts.image_size != image_size(tgt_img):
            raise InputError("target points and image disagree on the image size")

    with stage("triangulate"):
        mesh = delaunay_triangulate(tgt_pts)

    with stage("global-warp"):
        global_pts = transfer_displacements(src_neutral_pts, src_exp_pts, tgt_pts)
        gi = render_global(tgt_img, mesh, global_pts)

    with stage("local-reshape"):
        local_pts, records = reshape_all(src_exp_pts, global_pts, with_records=True)

    solved = {}

    def evaluate(value):
        if value not in solved:
            pts, report = solve_all(global_pts, local_pts, mesh, value)
            solved[value] = (pts, report, render_fi(tgt_img, mesh, pts))
        return solved[value][2]

    table = None
    with stage("elastic"):
        if lam is None and basis is not None:
            scorer = db_metric.DbScorer(basis, src_exp_img, gi, omega)
            lam, table = db_metric.select_lambda(grid, evaluate, scorer)
        elif lam is None:
            log.warning("no eigenface basis: elasticity ratio fixed at %s", FALLBACK_LAMBDA)
            lam = FALLBACK_LAMBDA
        lam = float(lam)
        evaluate(lam)
        fi_pts, report, fi_img = solved[lam]

    with stage("illumination"):
        eri = compute_eri(src_neutral_img, src_exp_img, src_neutral_pts, src_exp_pts, fi_pts, mesh)
        resolved = [a.resolve(fi_pts) for a in areas]
        width, height = fi_pts.image_size
        mask = build_mask(resolved, width, height)
        detail = apply_md(box_filter3(eri), mask)
        final = compose_final(fi_img, detail)

    return StageOutputs(mesh, GlobalWarpResult(global_pts, gi), local_pts, records, fi_pts,
                        report, fi_img, lam, table, eri, mask, detail, final)


@dataclass
class CloneJob:
    src_neutral: str
    src_neutral_pts: str
    src_exp: str
    src_exp_pts: str
    tgt_neutral: str
    tgt_neutral_pts: str
    output: str
    muscles: str | None = None
    train_dir: str | None = None
    basis_file: str | None = None
    lam: float | None = None
    lambda_grid: tuple = db_metric.DEFAULT_GRID
    db_report: str | None = None
    dump_stages: str | None = None


def load_image_and_points(img_path, pts_path):
    img = read_image(img_path)
    pts = read_feature_points(pts_path, image_size(img))
    return img, pts


def load_basis_for(job: CloneJob) -> EigenBasis | None:
    """Basis from the cache file when present, else trained from the
    directory (and cached if a cache path was given)."""
    with stage("eigenface"):
        if job.basis_file and os.path.exists(job.basis_file):
            return load_basis(job.basis_file)
        if not job.train_dir:
            return None
        from .eigenface import save_basis

        basis = train_from_dir(job.train_dir)
        if job.basis_file:
            save_basis(job.basis_file, basis)
        return basis


def run_clone(job: CloneJob, basis: EigenBasis | None = None, lam=None, *,
              load_basis_files=True) -> StageOutputs:
    """Load the job's files, clone, and write the output (plus stage dumps)."""
    with stage("input"):
        sn_img, sn_pts = load_image_and_points(job.src_neutral, job.src_neutral_pts)
        se_img, se_pts = load_image_and_points(job.src_exp, job.src_exp_pts)
        tn_img, tn_pts = load_image_and_points(job.tgt_neutral, job.tgt_neutral_pts)
        areas = read_muscle_config(job.muscles) if job.muscles else []
    if basis is None and load_basis_files:
        basis = load_basis_for(job)
    if lam is None:
        lam = job.lam
    out = clone(sn_img, sn_pts, se_img, se_pts, tn_img, tn_pts, areas,
                lam=lam, basis=basis, grid=job.lambda_grid)
    with stage("output"):
        write_image(job.output, out.final)
        if job.db_report and out.score_table is not None:
            with open(job.db_report, "w", encoding="utf-8") as fh:
                fh.write(db_metric.format_report(out.score_table))
        if job.dump_stages:
            dump_stages(job.dump_stages, out, tn_img)
    return out


def dump_stages(directory, out: StageOutputs, tgt_img):
    os.makedirs(directory, exist_ok=True)
    ext = ".ppm" if np.ndim(tgt_img) == 3 else ".pgm"
    j = lambda name: os.path.join(directory, name)  # noqa: E731
    write_image(j("gi" + ext), out.gi)
    write_image(j("li" + ext), out.local_image(tgt_img))
    write_image(j("fi" + ext), out.fi_img)
    write_image(j("final" + ext), out.final)
    write_feature_points(j("global.pts"), out.global_pts)
    write_feature_points(j("local.pts"), out.local_pts)
    write_feature_points(j("fi.pts"), out.fi_pts, [f"lambda {out.lam!r}"])
    with open(j("reshape.txt"), "w", encoding="utf-8") as fh:
        fh.writelines(r.describe() + "\n" for r in out.reshape_records)
    with open(j("solve.txt"), "w", encoding="utf-8") as fh:
        fh.write(f"# lambda {out.lam!r}\n")
        fh.writelines(line + "\n" for line in out.solve_report.lines())
    mappings = []
    for name, fieldv in (("eri", out.eri), ("mask", out.mask), ("detail", out.detail)):
        lo, hi = dump_field(j(name + ".pgm"), fieldv)
        mappings.append(f"{name}.pgm: pixel = 255 * (value - {lo!r}) / ({hi!r} - {lo!r})")
    with open(j("fields.txt"), "w", encoding="utf-8") as fh:
        fh.writelines(m + "\n" for m in mappings)
    for m in mappings:
        log.info(m)
    if out.score_table is not None:
        with open(j("db_report.txt"), "w", encoding="utf-8") as fh:
            fh.write(db_metric.format_report(out.score_table))


_PRINTF = re.compile(r"%(0?\d*)d")


def expand_pattern(pattern, index):
    return pattern % index


def check_pattern(pattern):
    if len(_PRINTF.findall(os.path.basename(pattern))) != 1 or pattern.count("%") != 1:
        raise InputError(f"pattern {pattern!r} needs exactly one %d field in the file name")


def discover_indices(pattern):
    """Frame indices for which a file matching the printf pattern exists."""
    check_pattern(pattern)
    directory, base = os.path.split(pattern)
    directory = directory or "."
    pieces = _PRINTF.split(base)
    regex = re.compile(re.escape(pieces[0]) + r"(\d+)" + re.escape(pieces[2]) + "$")
    if not os.path.isdir(directory):
        return set()
    found = set()
    for name in os.listdir(directory):
        m = regex.match(name)
        if m and expand_pattern(base, int(m.group(1))) == name:
            found.add(int(m.group(1)))
    return found


@dataclass
class BatchResult:
    outputs: dict = field(default_factory=dict)   # index -> output path
    skipped: list = field(default_factory=list)   # (index, reason)
    lam: float | None = None

    @property
    def partial(self):
        return bool(self.skipped)


def run_batch(base: CloneJob, frames_pattern, pts_pattern, output_pattern, indices=None) -> BatchResult:
    """Clone every frame of a source expression sequence onto one target.

    ``base`` provides the source neutral, target neutral, muscles and basis
    settings; its ``src_exp``/``src_exp_pts``/``output`` are ignored.  The
    elasticity ratio is picked on the first frame that clones successfully
    and reused for the rest.
    """
    for p in (frames_pattern, pts_pattern, output_pattern):
        check_pattern(p)
    if indices is None:
        indices = sorted(discover_indices(frames_pattern) | discover_indices(pts_pattern))
    result = BatchResult()
    basis = load_basis_for(base)
    lam = base.lam
    for idx in indices:
        img_path = expand_pattern(frames_pattern, idx)
        pts_path = expand_pattern(pts_pattern, idx)
        missing = [p for p in (img_path, pts_path) if not os.path.exists(p)]
        if missing:
            log.warning("frame %d skipped: missing %s", idx, ", ".join(missing))
            result.skipped.append((idx, "missing " + ", ".join(missing)))
            continue
        job = CloneJob(
            base.src_neutral, base.src_neutral_pts, img_path, pts_path,
            base.tgt_neutral, base.tgt_neutral_pts, expand_pattern(output_pattern, idx),
            muscles=base.muscles, lam=lam, lambda_grid=base.lambda_grid,
            db_report=base.db_report if lam is None else None,
            dump_stages=(os.path.join(base.dump_stages, f"{idx:06d}") if base.dump_stages else None),
        )
        try:
            out = run_clone(job, basis=basis, lam=lam, load_basis_files=False)
        except StageError as exc:
            log.warning("frame %d failed: %s", idx, exc)
            result.skipped.append((idx, str(exc)))
            continue
        if lam is None:
            lam = out.lam
        result.outputs[idx] = job.output
    result.lam = lam
    return result
