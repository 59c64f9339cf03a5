"""Global warping: move the target landmarks by the source's neutral-to-
expression displacements, rescaled by the face-size ratio, then warp the
target neutral image onto the moved landmarks."""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateOrganError
from .face_model import FeaturePointSet, bounding_box, check_schemas
from .mesh_warp import TriangleMesh, piecewise_affine_warp


@dataclass(frozen=True)
class GlobalWarpResult:
    positions: FeaturePointSet
    image: np.ndarray


def face_scale(src_neutral: FeaturePointSet, tgt_neutral: FeaturePointSet):
    """Per-axis (sx, sy) ratio of the target to the source face box."""
    src = bounding_box(src_neutral.xy)
    tgt = bounding_box(tgt_neutral.xy)
    if src.w <= 0 or src.h <= 0:
        raise DegenerateOrganError("face", f"source face box is {src.w} x {src.h}")
    return tgt.w / src.w, tgt.h / src.h


def transfer_displacements(src_neutral: FeaturePointSet, src_exp: FeaturePointSet,
                           tgt_neutral: FeaturePointSet) -> FeaturePointSet:
    check_schemas(src_neutral, src_exp, tgt_neutral)
    sx, sy = face_scale(src_neutral, tgt_neutral)
    delta = src_exp.xy - src_neutral.xy
    moved = tgt_neutral.xy + delta * np.array([sx, sy])
    return tgt_neutral.with_positions(moved)


def render_global(tgt_neutral_img, tgt_mesh: TriangleMesh, global_pts: FeaturePointSet):
    """GI: the target neutral image warped onto the global positions.

    ``tgt_mesh`` is the reference triangulation over the target neutral
    landmarks; its connectivity is reused for the global positions.
    """
    dst = tgt_mesh.with_vertices(global_pts)
    return piecewise_affine_warp(tgt_neutral_img, tgt_mesh, dst)


def global_warp(src_neutral, src_exp, tgt_neutral, tgt_neutral_img, tgt_mesh) -> GlobalWarpResult:
    positions = transfer_displacements(src_neutral, src_exp, tgt_neutral)
    return GlobalWarpResult(positions, render_global(tgt_neutral_img, tgt_mesh, positions))
