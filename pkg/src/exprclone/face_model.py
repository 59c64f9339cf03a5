"""Landmark data model and the plain-text points file format.

A points file holds one landmark per line::

    # optional comments
    size 256 256
    0 contour 128.0 20.5
    1 contour 140.25 22.0
    ...

Columns are ``<id> <organ> <x> <y>``; x grows to the right and y downwards,
both in pixels.  The ``size`` line is optional; without it the caller must
supply the size of the paired image.
"""

from __future__ import annotations

import enum
import math
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import DegenerateOrganError, ParseError, SchemaError


class Organ(str, enum.Enum):
    LEFT_EYE = "left_eye"
    RIGHT_EYE = "right_eye"
    LEFT_BROW = "left_brow"
    RIGHT_BROW = "right_brow"
    NOSE = "nose"
    MOUTH = "mouth"
    CONTOUR = "contour"

    def __str__(self):
        return self.value


# contour takes part in warping and triangulation but is never re-shaped
RESHAPED_ORGANS = tuple(o for o in Organ if o is not Organ.CONTOUR)


class FeaturePoint(NamedTuple):
    id: int
    organ: Organ
    x: float
    y: float


class OrganBox(NamedTuple):
    w: float
    h: float
    cx: float
    cy: float


class FeaturePointSet:
    """Immutable, validated set of landmarks with ids ``0..n-1``.

    ``image_size`` is ``(width, height)``; every point must satisfy
    ``0 <= x <= width - 1`` and ``0 <= y <= height - 1``.
    """

    __slots__ = ("points", "image_size", "_xy")

    def __init__(self, points: Iterable[FeaturePoint], image_size: tuple[int, int]):
        pts = sorted(
            (FeaturePoint(int(p[0]), Organ(p[1]), float(p[2]), float(p[3])) for p in points),
            key=lambda p: p.id,
        )
        width, height = int(image_size[0]), int(image_size[1])
        if width < 1 or height < 1:
            raise SchemaError(f"invalid image size {width}x{height}")
        seen = set()
        for p in pts:
            if p.id in seen:
                raise SchemaError(f"duplicate id {p.id}")
            seen.add(p.id)
        if len(pts) < 3:
            raise SchemaError(f"need at least 3 points, got {len(pts)}")
        if [p.id for p in pts] != list(range(len(pts))):
            raise SchemaError("ids must be exactly 0..n-1")
        for p in pts:
            if not (math.isfinite(p.x) and math.isfinite(p.y)):
                raise SchemaError(f"point {p.id} has a non-finite coordinate")
            if not (0.0 <= p.x <= width - 1 and 0.0 <= p.y <= height - 1):
                raise SchemaError(
                    f"point {p.id} at ({p.x}, {p.y}) is outside the {width}x{height} image"
                )
        xy = np.array([[p.x, p.y] for p in pts], dtype=np.float64)
        xy.setflags(write=False)
        object.__setattr__(self, "points", tuple(pts))
        object.__setattr__(self, "image_size", (width, height))
        object.__setattr__(self, "_xy", xy)

    def __setattr__(self, name, value):
        raise AttributeError("FeaturePointSet is immutable")

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def __eq__(self, other):
        if not isinstance(other, FeaturePointSet):
            return NotImplemented
        return self.image_size == other.image_size and self.points == other.points

    def __hash__(self):
        return hash((self.image_size, self.points))

    def __repr__(self):
        return f"FeaturePointSet(n={len(self)}, image_size={self.image_size})"

    @property
    def xy(self) -> np.ndarray:
        """(n, 2) read-only array of positions, row i is point id i."""
        return self._xy

    @property
    def organs(self) -> tuple[Organ, ...]:
        return tuple(p.organ for p in self.points)

    def organ_ids(self, organ) -> list[int]:
        organ = Organ(organ)
        return [p.id for p in self.points if p.organ is organ]

    def with_positions(self, xy, image_size=None) -> "FeaturePointSet":
        """Same ids and organs, new positions."""
        xy = np.asarray(xy, dtype=np.float64)
        if xy.shape != (len(self), 2):
            raise SchemaError(f"expected positions of shape {(len(self), 2)}, got {xy.shape}")
        size = self.image_size if image_size is None else image_size
        return FeaturePointSet(
            (FeaturePoint(p.id, p.organ, x, y) for p, (x, y) in zip(self.points, xy.tolist())),
            size,
        )

    def same_schema(self, other: "FeaturePointSet") -> bool:
        return self.organs == other.organs


def check_schemas(*sets: FeaturePointSet):
    """Raise SchemaError unless all sets share point count and id -> organ mapping."""
    first = sets[0]
    for other in sets[1:]:
        if len(other) != len(first):
            raise SchemaError(f"point count mismatch: {len(first)} vs {len(other)}")
        if not first.same_schema(other):
            bad = next(i for i, (a, b) in enumerate(zip(first.organs, other.organs)) if a != b)
            raise SchemaError(
                f"organ mismatch at id {bad}: {first.organs[bad]} vs {other.organs[bad]}"
            )


def parse_feature_points(text, image_size=None) -> FeaturePointSet:
    """Parse a points file.

    ``text`` may be a string or an iterable of lines.  A ``size`` line in the
    file takes precedence over ``image_size``.
    """
    lines = text.splitlines() if isinstance(text, str) else list(text)
    size = None
    records = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if fields[0] == "size":
            if records or size is not None:
                raise ParseError(f"line {lineno}: 'size' must be the first record")
            if len(fields) != 3:
                raise ParseError(f"line {lineno}: expected 'size <width> <height>'")
            try:
                size = (int(fields[1]), int(fields[2]))
            except ValueError:
                raise ParseError(f"line {lineno}: non-integer image size") from None
            continue
        if len(fields) != 4:
            raise ParseError(f"line {lineno}: expected '<id> <organ> <x> <y>', got {line!r}")
        try:
            pid = int(fields[0])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer id {fields[0]!r}") from None
        try:
            organ = Organ(fields[1])
        except ValueError:
            raise ParseError(f"line {lineno}: unknown organ label {fields[1]!r}") from None
        try:
            x, y = float(fields[2]), float(fields[3])
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric coordinate in {line!r}") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ParseError(f"line {lineno}: non-finite coordinate")
        records.append(FeaturePoint(pid, organ, x, y))

    if size is None:
        size = image_size
    if size is None:
        raise ParseError("no 'size' line and no paired image size given")
    ids = [r.id for r in records]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise ParseError(f"duplicate id {dupes[0]}")
    try:
        return FeaturePointSet(records, size)
    except SchemaError as exc:
        raise ParseError(str(exc)) from None


def serialize_feature_points(pts: FeaturePointSet, header: Sequence[str] = ()) -> str:
    out = [f"# {h}" for h in header]
    out.append(f"size {pts.image_size[0]} {pts.image_size[1]}")
    # repr round-trips floats exactly
    out.extend(f"{p.id} {p.organ.value} {p.x!r} {p.y!r}" for p in pts)
    return "\n".join(out) + "\n"


def read_feature_points(path, image_size=None) -> FeaturePointSet:
    with open(path, encoding="utf-8") as fh:
        return parse_feature_points(fh.read(), image_size)


def write_feature_points(path, pts: FeaturePointSet, header: Sequence[str] = ()):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_feature_points(pts, header))


def bounding_box(xy) -> OrganBox:
    xy = np.asarray(xy, dtype=np.float64)
    lo = xy.min(axis=0)
    hi = xy.max(axis=0)
    return OrganBox(
        float(hi[0] - lo[0]),
        float(hi[1] - lo[1]),
        float((lo[0] + hi[0]) / 2),
        float((lo[1] + hi[1]) / 2),
    )


def organ_bounding_box(pts: FeaturePointSet, organ) -> OrganBox:
    """Minimum axis-aligned box around one organ's points.

    ``cx``/``cy`` are the box mid-lines, not the point centroid.  A box with
    ``h == 0`` (or ``w == 0``) is returned as is; callers decide whether that
    is degenerate for them.
    """
    organ = Organ(organ)
    ids = pts.organ_ids(organ)
    if len(ids) < 2:
        raise DegenerateOrganError(organ.value, f"needs at least 2 points, has {len(ids)}")
    return bounding_box(pts.xy[ids])
