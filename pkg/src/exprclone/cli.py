"""Command-line interface: ``exprclone clone|batch|train|demo``.

Exit codes: 0 success, 2 input/parse error, 3 numeric/stage error,
4 partial batch failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import shutil
import sys

from . import db_metric, default_muscle_config_path
from .errors import ExprCloneError, InputError, StageError
from .pipeline import CloneJob, run_batch, run_clone

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_STAGE = 3
EXIT_PARTIAL = 4

log = logging.getLogger("exprclone")


def _grid(text):
    try:
        return db_metric.LambdaGrid.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _lambda(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v >= 0:
        raise argparse.ArgumentTypeError("lambda must be >= 0")
    return v


def _add_common(p, with_exp=True):
    p.add_argument("--src-neutral", required=True, help="source neutral image (PGM/PPM/PNG)")
    p.add_argument("--src-neutral-pts", required=True)
    if with_exp:
        p.add_argument("--src-exp", required=True, help="source expression image")
        p.add_argument("--src-exp-pts", required=True)
    p.add_argument("--tgt-neutral", required=True, help="target neutral image")
    p.add_argument("--tgt-neutral-pts", required=True)
    p.add_argument("--muscles", required=True, help="muscle area config (may be empty)")
    p.add_argument("--train-dir", help="directory of eigenface training images")
    p.add_argument("--basis", help="eigenbasis cache file, read if present, else written")
    p.add_argument("--lambda", dest="lam", type=_lambda, help="fix the elasticity ratio")
    p.add_argument("--lambda-grid", type=_grid, default=db_metric.LambdaGrid(),
                   help="comma-separated candidate ratios (default %(default)s)")
    p.add_argument("--db-report", help="write the per-ratio score table here")
    p.add_argument("--dump-stages", metavar="DIR", help="write every intermediate result")
    p.add_argument("-o", "--output", required=True)


def build_parser():
    parser = argparse.ArgumentParser(prog="exprclone", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("clone", help="clone one expression")
    _add_common(p)

    p = sub.add_parser("batch", help="clone a numbered sequence of source expressions")
    _add_common(p, with_exp=False)
    p.add_argument("--frames", required=True, help="printf pattern, e.g. frames/f_%%03d.ppm")
    p.add_argument("--frame-pts", required=True, help="printf pattern for per-frame points")
    p.epilog = "-o is also a printf pattern, e.g. out/f_%%03d.ppm"

    p = sub.add_parser("train", help="train and cache an eigenbasis")
    p.add_argument("--train-dir", required=True)
    p.add_argument("-k", type=int, default=None, help="component count (default: images - 1)")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("demo", help="write a synthetic example job to a directory")
    p.add_argument("directory")
    p.add_argument("--frames", type=int, default=4, help="frames in the example sequence")
    return parser


def _job(args, src_exp=None, src_exp_pts=None, output=None):
    return CloneJob(
        src_neutral=args.src_neutral,
        src_neutral_pts=args.src_neutral_pts,
        src_exp=src_exp or getattr(args, "src_exp", None),
        src_exp_pts=src_exp_pts or getattr(args, "src_exp_pts", None),
        tgt_neutral=args.tgt_neutral,
        tgt_neutral_pts=args.tgt_neutral_pts,
        output=output or args.output,
        muscles=args.muscles,
        train_dir=args.train_dir,
        basis_file=args.basis,
        lam=args.lam,
        lambda_grid=args.lambda_grid,
        db_report=args.db_report,
        dump_stages=args.dump_stages,
    )


def cmd_clone(args):
    out = run_clone(_job(args))
    if out.score_table is not None:
        for lam, score in out.score_table:
            log.info("lambda %-6g log(DB) %.6f", lam, score.log_total)
    print(f"wrote {args.output} (lambda={out.lam:g})")
    return EXIT_OK


def cmd_batch(args):
    res = run_batch(_job(args, output=args.output), args.frames, args.frame_pts, args.output)
    for idx in sorted(res.outputs):
        print(f"frame {idx}: {res.outputs[idx]}")
    for idx, reason in res.skipped:
        print(f"frame {idx}: skipped ({reason})", file=sys.stderr)
    if not res.outputs and not res.skipped:
        print("no frames found", file=sys.stderr)
        return EXIT_INPUT
    if res.partial:
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_train(args):
    from .eigenface import save_basis, train_from_dir

    basis = train_from_dir(args.train_dir, args.k)
    save_basis(args.output, basis)
    print(f"wrote {args.output}: {basis.k} components, {basis.size[0]}x{basis.size[1]}")
    return EXIT_OK


def cmd_demo(args):
    from . import synthetic as syn
    from .face_model import write_feature_points
    from .raster import write_image

    d = args.directory
    os.makedirs(os.path.join(d, "train"), exist_ok=True)
    os.makedirs(os.path.join(d, "frames"), exist_ok=True)
    faces = {
        "src_neutral": syn.SOURCE,
        "src_exp": syn.smile(syn.SOURCE),
        "tgt_neutral": syn.TARGET,
    }
    for name, params in faces.items():
        write_image(os.path.join(d, name + ".ppm"), syn.render(params))
        write_feature_points(os.path.join(d, name + ".pts"), syn.make_points(params))
    for i, img in enumerate(syn.training_set(syn.TARGET)):
        write_image(os.path.join(d, "train", f"t{i:02d}.ppm"), img)
    for i in range(args.frames):
        params = syn.smile(syn.SOURCE, (i + 1) / args.frames)
        write_image(os.path.join(d, "frames", f"src_{i:03d}.ppm"), syn.render(params))
        write_feature_points(os.path.join(d, "frames", f"src_{i:03d}.pts"), syn.make_points(params))
    shutil.copyfile(default_muscle_config_path(), os.path.join(d, "muscles.txt"))
    print(f"example job written to {d}; try:\n"
          f"  exprclone clone --src-neutral {d}/src_neutral.ppm --src-neutral-pts {d}/src_neutral.pts \\\n"
          f"    --src-exp {d}/src_exp.ppm --src-exp-pts {d}/src_exp.pts \\\n"
          f"    --tgt-neutral {d}/tgt_neutral.ppm --tgt-neutral-pts {d}/tgt_neutral.pts \\\n"
          f"    --muscles {d}/muscles.txt --train-dir {d}/train --db-report {d}/db.txt -o {d}/out.ppm")
    return EXIT_OK


COMMANDS = {"clone": cmd_clone, "batch": cmd_batch, "train": cmd_train, "demo": cmd_demo}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT if exc.is_input_error else EXIT_STAGE
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ExprCloneError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
