"""Expression ratio image and muscle-distribution weighting of its details.

Ratio fields are plain ``(height, width)`` float arrays clamped to
``[RATIO_MIN, RATIO_MAX]``.

Muscle config format, one area per line (``#`` starts a comment)::

    brow_center center=22,27 ref=30,33 radius_scale=0.6 h=0.8
    left_mouth  center=51     ref=51,57 radius_scale=0.3

``center`` is one landmark id or several (their centroid); the radius is
``radius_scale`` times the distance between the two ``ref`` landmarks;
``h`` is the boost strength and defaults to 0.5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParseError, SchemaError
from .face_model import FeaturePointSet, check_schemas
from .mesh_warp import TriangleMesh, bilinear_sample, map_pixels
from .raster import luminance

RATIO_MIN = 0.2
RATIO_MAX = 5.0
EPSILON = 1.0
DEFAULT_STRENGTH = 0.5
CUTOFF_SIGMAS = 4.0
SIGMA_PER_RADIUS = 1.0 / math.sqrt(math.log(2.0))


@dataclass(frozen=True)
class MuscleArea:
    """A key muscle area as configured, in landmark terms."""

    name: str
    center_ids: tuple
    ref_ids: tuple
    radius_scale: float
    h: float = DEFAULT_STRENGTH

    def resolve(self, pts: FeaturePointSet) -> "ResolvedArea":
        n = len(pts)
        for i in self.center_ids + self.ref_ids:
            if not 0 <= i < n:
                raise SchemaError(f"muscle area {self.name}: unknown landmark id {i}")
        xy = pts.xy
        u0, v0 = xy[list(self.center_ids)].mean(axis=0)
        a, b = xy[self.ref_ids[0]], xy[self.ref_ids[1]]
        r = self.radius_scale * float(np.hypot(*(a - b)))
        return ResolvedArea(self.name, float(u0), float(v0), r, self.h, pts.image_size)


@dataclass(frozen=True)
class ResolvedArea:
    name: str
    u0: float
    v0: float
    r: float
    h: float
    image_size: tuple | None = None

    def __post_init__(self):
        if not self.r > 0:
            raise SchemaError(f"muscle area {self.name}: radius must be > 0, got {self.r}")
        if not self.h >= 0:
            raise SchemaError(f"muscle area {self.name}: strength must be >= 0, got {self.h}")
        if self.image_size is not None:
            w, h = self.image_size
            if not (0 <= self.u0 <= w - 1 and 0 <= self.v0 <= h - 1):
                raise SchemaError(f"muscle area {self.name}: centre outside the image")

    @property
    def sigma(self):
        return SIGMA_PER_RADIUS * self.r


def _ids(text, name):
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise ParseError(f"muscle area {name}: bad id list {text!r}") from None


def parse_muscle_config(text) -> list[MuscleArea]:
    areas = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, *fields = line.split()
        opts = {}
        for f in fields:
            key, sep, val = f.partition("=")
            if not sep or key in opts:
                raise ParseError(f"line {lineno}: bad field {f!r}")
            opts[key] = val
        unknown = set(opts) - {"center", "ref", "radius_scale", "h"}
        missing = {"center", "ref", "radius_scale"} - set(opts)
        if unknown or missing:
            raise ParseError(f"line {lineno}: unknown keys {sorted(unknown)}, missing {sorted(missing)}")
        center = _ids(opts["center"], name)
        ref = _ids(opts["ref"], name)
        if len(ref) != 2:
            raise ParseError(f"line {lineno}: ref needs exactly two ids")
        try:
            scale = float(opts["radius_scale"])
            h = float(opts.get("h", DEFAULT_STRENGTH))
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric radius_scale or h") from None
        if not (scale > 0 and math.isfinite(scale)):
            raise ParseError(f"line {lineno}: radius_scale must be > 0")
        if not (h >= 0 and math.isfinite(h)):
            raise ParseError(f"line {lineno}: h must be >= 0")
        areas.append(MuscleArea(name, center, ref, scale, h))
    return areas


def read_muscle_config(path) -> list[MuscleArea]:
    with open(path, encoding="utf-8") as fh:
        return parse_muscle_config(fh.read())


def compute_eri(src_neutral_img, src_exp_img, src_neutral_pts: FeaturePointSet,
                src_exp_pts: FeaturePointSet, fi_pts: FeaturePointSet, mesh: TriangleMesh):
    """Ratio of expression to neutral source luminance, both warped into the
    FI geometry.  Pixels outside the FI mesh get ratio 1.

    Both numerator and denominator are floored at EPSILON, so identical
    inputs give exactly 1 even on black pixels.
    """
    check_schemas(src_neutral_pts, src_exp_pts, fi_pts)
    width, height = fi_pts.image_size
    fi_mesh = mesh.with_vertices(fi_pts)
    warped = []
    for img, pts in ((src_neutral_img, src_neutral_pts), (src_exp_img, src_exp_pts)):
        mesh.with_vertices(pts)  # validates the source triangles
        labels, sx, sy = map_pixels(pts.xy, fi_mesh, width, height)
        warped.append(bilinear_sample(luminance(img), sx, sy))
    neutral, expression = warped
    eri = np.maximum(expression, EPSILON) / np.maximum(neutral, EPSILON)
    eri = np.clip(eri, RATIO_MIN, RATIO_MAX)
    eri[labels < 0] = 1.0
    return eri


def box_filter3(field):
    """3x3 mean with edge replication; neighbours summed in row-major order."""
    f = np.asarray(field, dtype=np.float64)
    p = np.pad(f, 1, mode="edge")
    h, w = f.shape
    acc = np.zeros_like(f)
    for dy in range(3):
        for dx in range(3):
            acc = acc + p[dy:dy + h, dx:dx + w]
    return acc / 9.0


def build_mask(areas, width, height):
    """M = 1 + sum of Gaussian boosts, each zero beyond 4 sigma."""
    v, u = np.mgrid[0:height, 0:width].astype(np.float64)
    mask = np.ones((height, width))
    for a in areas:
        sigma = a.sigma
        d2 = (u - a.u0) ** 2 + (v - a.v0) ** 2
        boost = a.h * np.exp(-d2 / (2.0 * sigma * sigma))
        boost[d2 > (CUTOFF_SIGMAS * sigma) ** 2] = 0.0
        mask = mask + boost
    return mask


def apply_md(eri, mask):
    """1 + M * (ERI - 1), clamped.

    Evaluated as ERI + (M - 1) * (ERI - 1) so that M == 1 returns ERI
    bit for bit."""
    eri = np.asarray(eri, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    if eri.shape != mask.shape:
        raise DimensionError(f"ratio image {eri.shape} and mask {mask.shape} differ")
    return np.clip(eri + (mask - 1.0) * (eri - 1.0), RATIO_MIN, RATIO_MAX)


def compose_final(fi_img, detail):
    """Multiply every channel of FI by the luminance detail field."""
    fi = np.asarray(fi_img, dtype=np.float64)
    detail = np.asarray(detail, dtype=np.float64)
    if fi.shape[:2] != detail.shape:
        raise DimensionError(f"image {fi.shape[:2]} and detail field {detail.shape} differ")
    factor = detail[..., None] if fi.ndim == 3 else detail
    return np.clip(fi * factor, 0.0, 255.0)
