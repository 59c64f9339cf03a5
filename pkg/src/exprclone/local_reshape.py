"""Per-organ re-shaping of the globally warped landmarks.

Each organ's vertical offsets from its box mid-line are the source
expression's offsets times ``W_t / W_s``; horizontal offsets are then scaled
by ``H_t' / H_s`` where ``H_t'`` is the height after that first step, which
is again ``W_t / W_s``.  The net effect is a uniform scaling of the source
organ about the target box centre: the result has exactly the source
height-to-width ratio and keeps the globally warped width.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateOrganError
from .face_model import (
    RESHAPED_ORGANS,
    FeaturePointSet,
    Organ,
    OrganBox,
    check_schemas,
    organ_bounding_box,
)


@dataclass(frozen=True)
class ReshapeRecord:
    organ: Organ
    src_box: OrganBox
    tgt_box: OrganBox
    scale: float

    def describe(self):
        s, t = self.src_box, self.tgt_box
        return (
            f"{self.organ.value} scale={self.scale!r} "
            f"src(w={s.w!r} h={s.h!r} cx={s.cx!r} cy={s.cy!r}) "
            f"tgt(w={t.w!r} h={t.h!r} cx={t.cx!r} cy={t.cy!r})"
        )


def reshape_organ(src_exp_pts: FeaturePointSet, global_pts: FeaturePointSet, organ):
    """Return ``(ids, new_xy, record)`` for one organ."""
    organ = Organ(organ)
    src_box = organ_bounding_box(src_exp_pts, organ)
    tgt_box = organ_bounding_box(global_pts, organ)
    if src_box.w <= 0 or src_box.h <= 0:
        raise DegenerateOrganError(
            organ.value, f"source box is {src_box.w} x {src_box.h}, need positive width and height"
        )
    if tgt_box.w <= 0:
        raise DegenerateOrganError(organ.value, "globally warped box has zero width")
    ids = global_pts.organ_ids(organ)
    scale = tgt_box.w / src_box.w
    # vertical pass (width ratio), then horizontal pass with the updated
    # height: H_t' / H_s == scale
    d_s1 = src_exp_pts.xy[ids, 1] - src_box.cy
    d_s2 = src_exp_pts.xy[ids, 0] - src_box.cx
    new = np.column_stack([tgt_box.cx + d_s2 * scale, tgt_box.cy + d_s1 * scale])
    return ids, new, ReshapeRecord(organ, src_box, tgt_box, scale)


def reshape_all(src_exp_pts: FeaturePointSet, global_pts: FeaturePointSet, with_records=False):
    """A': every non-contour organ present in the schema re-shaped
    independently; contour points are copied from ``global_pts``."""
    check_schemas(src_exp_pts, global_pts)
    xy = global_pts.xy.copy()
    records = []
    present = set(global_pts.organs)
    for organ in RESHAPED_ORGANS:
        if organ not in present:
            continue
        ids, new, rec = reshape_organ(src_exp_pts, global_pts, organ)
        xy[ids] = new
        records.append(rec)
    out = global_pts.with_positions(xy)
    return (out, records) if with_records else out
