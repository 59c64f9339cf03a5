"""Parametric cartoon faces with landmarks in the bundled 63-point schema.

Used for tests, the acceptance suite and ``exprclone demo``.  Ids:

    0-19 contour, 20-24 left_brow, 25-29 right_brow, 30-35 left_eye,
    36-41 right_eye, 42-50 nose, 51-62 mouth (51 left corner, 55 right
    corner, 59-62 inner lip)

"left" means image left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .face_model import FeaturePoint, FeaturePointSet, Organ


@dataclass(frozen=True)
class FaceParams:
    width: int = 256
    height: int = 256
    cx: float = 128.0
    cy: float = 130.0
    rx: float = 80.0
    ry: float = 100.0
    eye_dx: float = 34.0
    eye_y: float = 112.0
    eye_w: float = 26.0
    eye_h: float = 11.0
    brow_y: float = 92.0
    brow_w: float = 34.0
    brow_arch: float = 5.0
    nose_top: float = 116.0
    nose_tip: float = 156.0
    nose_w: float = 26.0
    mouth_y: float = 186.0
    mouth_w: float = 56.0
    mouth_h: float = 16.0
    mouth_open: float = 2.0
    smile: float = 0.0  # corner lift in px
    skin: tuple = (205.0, 170.0, 150.0)
    background: float = 70.0
    wrinkle: float = 0.0  # 0..1 strength of expression folds


def smile(p: FaceParams, amount=1.0) -> FaceParams:
    """Smiling variant: wider, lifted, opened mouth, narrowed eyes, folds."""
    return replace(
        p,
        mouth_w=p.mouth_w * (1 + 0.25 * amount),
        mouth_open=p.mouth_open + 8 * amount,
        mouth_h=p.mouth_h + 4 * amount,
        smile=p.smile + 7 * amount,
        eye_h=p.eye_h * (1 - 0.3 * amount),
        brow_y=p.brow_y - 2 * amount,
        wrinkle=min(1.0, p.wrinkle + amount),
    )


def surprise(p: FaceParams, amount=1.0) -> FaceParams:
    return replace(
        p,
        brow_y=p.brow_y - 8 * amount,
        brow_arch=p.brow_arch + 3 * amount,
        eye_h=p.eye_h * (1 + 0.35 * amount),
        mouth_w=p.mouth_w * (1 - 0.2 * amount),
        mouth_open=p.mouth_open + 14 * amount,
        mouth_h=p.mouth_h + 10 * amount,
        wrinkle=min(1.0, p.wrinkle + 0.5 * amount),
    )


def landmarks(p: FaceParams) -> np.ndarray:
    pts = []
    for k in range(20):
        t = 2 * math.pi * k / 20 - math.pi / 2
        pts.append((p.cx + p.rx * math.cos(t), p.cy + p.ry * math.sin(t)))
    for side in (-1, 1):
        bx = p.cx + side * p.eye_dx
        for t in np.linspace(-1, 1, 5):
            pts.append((bx + t * p.brow_w / 2, p.brow_y - p.brow_arch * (1 - t * t)))
    for side in (-1, 1):
        ex = p.cx + side * p.eye_dx
        for k in range(6):
            t = math.pi * k / 3
            pts.append((ex - p.eye_w / 2 * math.cos(t), p.eye_y - p.eye_h / 2 * math.sin(t)))
    nw, top, tip = p.nose_w, p.nose_top, p.nose_tip
    mid = (top + tip) / 2
    pts += [
        (p.cx, top), (p.cx, mid),
        (p.cx - nw * 0.3, mid + 6), (p.cx + nw * 0.3, mid + 6),
        (p.cx - nw / 2, tip - 3), (p.cx + nw / 2, tip - 3),
        (p.cx - nw / 4, tip + 2), (p.cx, tip), (p.cx + nw / 4, tip + 2),
    ]
    mw, my, mh, lift = p.mouth_w / 2, p.mouth_y, p.mouth_h / 2, p.smile
    half_open = p.mouth_open / 2
    # outer lip, clockwise on screen starting at the left corner
    pts += [
        (p.cx - mw, my - lift),
        (p.cx - mw * 0.5, my - mh - half_open - lift * 0.4),
        (p.cx, my - mh * 0.8 - half_open),
        (p.cx + mw * 0.5, my - mh - half_open - lift * 0.4),
        (p.cx + mw, my - lift),
        (p.cx + mw * 0.5, my + mh + half_open - lift * 0.3),
        (p.cx, my + mh * 1.1 + half_open),
        (p.cx - mw * 0.5, my + mh + half_open - lift * 0.3),
    ]
    pts += [
        (p.cx - mw * 0.7, my - lift * 0.8),
        (p.cx, my - half_open - 1),
        (p.cx + mw * 0.7, my - lift * 0.8),
        (p.cx, my + half_open + 1),
    ]
    return np.array(pts)


ORGAN_LAYOUT = (
    [Organ.CONTOUR] * 20 + [Organ.LEFT_BROW] * 5 + [Organ.RIGHT_BROW] * 5
    + [Organ.LEFT_EYE] * 6 + [Organ.RIGHT_EYE] * 6 + [Organ.NOSE] * 9 + [Organ.MOUTH] * 12
)


def make_points(p: FaceParams) -> FeaturePointSet:
    xy = landmarks(p)
    return FeaturePointSet(
        (FeaturePoint(i, o, x, y) for i, (o, (x, y)) in enumerate(zip(ORGAN_LAYOUT, xy))),
        (p.width, p.height),
    )


def _polygon_mask(poly, h, w):
    """Even-odd fill of a polygon sampled at pixel centres."""
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    inside = np.zeros((h, w), dtype=bool)
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if y1 == y2:
            continue
        cond = (y1 > yy) != (y2 > yy)
        xcross = x1 + (yy - y1) * (x2 - x1) / (y2 - y1)
        inside ^= cond & (xx < xcross)
    return inside


def _segment_distance(xx, yy, a, b):
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    t = np.clip(((xx - ax) * dx + (yy - ay) * dy) / (dx * dx + dy * dy), 0, 1)
    return np.hypot(xx - (ax + t * dx), yy - (ay + t * dy))


def render(p: FaceParams, color=True) -> np.ndarray:
    h, w = p.height, p.width
    xy = landmarks(p)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    shade = np.full((h, w), p.background) + 0.15 * xx

    r = ((xx - p.cx) / p.rx) ** 2 + ((yy - p.cy) / p.ry) ** 2
    face = r <= 1.0
    light = 1.0 - 0.25 * np.clip(r, 0, 1) + 0.05 * np.sin(xx / 9.0) * np.cos(yy / 11.0)
    tone = np.where(face, light, 0.0)

    skin_gray = 0.299 * p.skin[0] + 0.587 * p.skin[1] + 0.114 * p.skin[2]
    gray = np.where(face, skin_gray * tone, shade)

    for sl in (slice(20, 25), slice(25, 30)):
        brow = xy[sl]
        d = np.min([_segment_distance(xx, yy, brow[i], brow[i + 1]) for i in range(4)], axis=0)
        gray = np.where(d <= 2.5, 60.0, gray)
    for sl in (slice(30, 36), slice(36, 42)):
        eye = _polygon_mask(xy[sl], h, w)
        gray = np.where(eye, 235.0, gray)
        c = xy[sl].mean(axis=0)
        iris = np.hypot(xx - c[0], yy - c[1]) <= min(4.5, np.ptp(xy[sl][:, 1]) / 2 + 0.5)
        gray = np.where(iris & eye, 40.0, gray)
    nose = xy[42:51]
    for a, b in ((0, 1), (1, 2), (1, 3), (2, 4), (3, 5), (4, 6), (6, 7), (7, 8), (8, 5)):
        d = _segment_distance(xx, yy, nose[a], nose[b])
        gray = gray - 30.0 * np.exp(-(d / 1.5) ** 2)
    mouth = xy[51:63]
    lips = _polygon_mask(mouth[:8], h, w)
    inner = _polygon_mask(mouth[[8, 9, 10, 11]], h, w) & lips
    gray = np.where(lips, 140.0, gray)
    gray = np.where(inner, 35.0, gray)

    if p.wrinkle > 0:
        # nasolabial folds and crow's feet
        for side in (-1, 1):
            a = (p.cx + side * p.nose_w * 0.6, p.nose_tip - 4)
            b = (p.cx + side * (p.mouth_w / 2 + 6), p.mouth_y - p.smile + 4)
            d = _segment_distance(xx, yy, a, b)
            gray = gray - 45.0 * p.wrinkle * np.exp(-(d / 2.0) ** 2)
            ex = p.cx + side * (p.eye_dx + p.eye_w / 2 + 4)
            for dy in (-5, 0, 5):
                d = _segment_distance(xx, yy, (ex, p.eye_y + dy / 2), (ex + side * 9, p.eye_y + dy))
                gray = gray - 25.0 * p.wrinkle * np.exp(-(d / 1.2) ** 2)
        d = _segment_distance(xx, yy, (p.cx - 4, p.brow_y - 8), (p.cx - 3, p.brow_y + 6))
        gray = gray - 20.0 * p.wrinkle * np.exp(-(d / 1.5) ** 2)

    gray = np.clip(gray, 0, 255)
    if not color:
        return np.floor(gray + 0.5)
    tint = np.array(p.skin) / skin_gray
    rgb = np.where(face[..., None], gray[..., None] * tint, gray[..., None])
    return np.floor(np.clip(rgb, 0, 255) + 0.5)


TARGET = FaceParams(
    cx=126.0, cy=128.0, rx=74.0, ry=104.0, eye_dx=31.0, eye_w=22.0, eye_h=12.0,
    nose_w=22.0, nose_tip=160.0, mouth_y=190.0, mouth_w=64.0, mouth_h=14.0,
    skin=(180.0, 140.0, 110.0), background=50.0,
)
SOURCE = FaceParams()


def training_set(p: FaceParams, count=12, color=True):
    """Images of one face under a spread of expressions."""
    variants = []
    for i in range(count):
        t = i / max(count - 1, 1)
        if i % 3 == 0:
            q = smile(p, t)
        elif i % 3 == 1:
            q = surprise(p, t)
        else:
            q = surprise(smile(p, t * 0.7), t * 0.3)
        variants.append(render(q, color))
    return variants
