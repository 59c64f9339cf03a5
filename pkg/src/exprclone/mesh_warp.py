"""Delaunay triangulation of landmarks and piecewise-affine image warping.

Orientation convention: a triangle ``(a, b, c)`` is counter-clockwise when
``cross(b - a, c - a) > 0`` in raw ``(x, y)`` pixel coordinates (which looks
clockwise on screen because y points down).

Pixel ``(col, row)`` sits at the point ``(x, y) = (col, row)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateTriangleError, DimensionError, SchemaError, TriangulationError
from .face_model import FeaturePointSet

MIN_TRIANGLE_AREA = 1e-9
_BARY_EPS = 1e-9
_SNAP_EPS = 1e-9


def orient2d(a, b, c):
    """Twice the signed area of (a, b, c) and a rounding-error bound for it."""
    abx, aby = b[0] - a[0], b[1] - a[1]
    acx, acy = c[0] - a[0], c[1] - a[1]
    det = abx * acy - aby * acx
    bound = 1e-12 * (abs(abx * acy) + abs(aby * acx))
    return det, bound


def incircle(a, b, c, d):
    """Positive when d is strictly inside the circumcircle of CCW (a, b, c).

    Returns the raw determinant and a rounding-error bound scaled by its
    permanent.
    """
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = (
        alift * (bdx * cdy - cdx * bdy)
        + blift * (cdx * ady - adx * cdy)
        + clift * (adx * bdy - bdx * ady)
    )
    perm = (
        alift * (abs(bdx * cdy) + abs(cdx * bdy))
        + blift * (abs(cdx * ady) + abs(adx * cdy))
        + clift * (abs(adx * bdy) + abs(bdx * ady))
    )
    return det, 1e-10 * perm


def _sweep_triangulation(xy):
    """Any valid triangulation of the point set, by a lexicographic sweep."""
    n = len(xy)
    order = sorted(range(n), key=lambda i: (xy[i][0], xy[i][1], i))
    for a, b in zip(order, order[1:]):
        if xy[a][0] == xy[b][0] and xy[a][1] == xy[b][1]:
            raise TriangulationError(f"points {min(a, b)} and {max(a, b)} coincide")

    k = 2
    while k < n:
        det, bound = orient2d(xy[order[0]], xy[order[k - 1]], xy[order[k]])
        if abs(det) > bound:
            break
        k += 1
    if k == n:
        raise TriangulationError("all points are collinear")

    chain = order[:k]
    p = order[k]
    det, _ = orient2d(xy[chain[0]], xy[chain[-1]], xy[p])
    if det > 0:
        tris = [[chain[i], chain[i + 1], p] for i in range(k - 1)]
        hull = chain + [p]
    else:
        tris = [[chain[i + 1], chain[i], p] for i in range(k - 1)]
        hull = chain[::-1] + [p]

    for q in order[k + 1:]:
        m = len(hull)
        visible = []
        for i in range(m):
            det, bound = orient2d(xy[hull[i]], xy[hull[(i + 1) % m]], xy[q])
            visible.append(det < -bound)
        start = next(i for i in range(m) if visible[i] and not visible[i - 1])
        hull = hull[start:] + hull[:start]
        visible = visible[start:] + visible[:start]
        nvis = 0
        while nvis < m and visible[nvis]:
            tris.append([hull[nvis + 1 if nvis + 1 < m else 0], hull[nvis], q])
            nvis += 1
        hull = [hull[0], q] + hull[nvis:]
    return tris


def _third(tri, u, v):
    for w in tri:
        if w != u and w != v:
            return w
    raise AssertionError("malformed triangle")


def _legalize(xy, tris):
    """Lawson edge flips until every interior edge is locally Delaunay.

    Cocircular quads keep the diagonal whose sorted id pair is smaller.
    """
    edge_tri = {}
    for t, (a, b, c) in enumerate(tris):
        edge_tri[(a, b)] = t
        edge_tri[(b, c)] = t
        edge_tri[(c, a)] = t

    stack = sorted({(min(u, v), max(u, v)) for (u, v) in edge_tri}, reverse=True)
    budget = 50 * len(xy) ** 2 + 1000
    while stack:
        budget -= 1
        if budget < 0:
            raise TriangulationError("edge flipping did not converge")
        u, v = stack.pop()
        t1 = edge_tri.get((u, v))
        t2 = edge_tri.get((v, u))
        if t1 is None or t2 is None:
            continue
        if edge_tri.get((u, v)) is None:
            continue
        # orient so that t1 = (u, v, c) and t2 = (v, u, d)
        c = _third(tris[t1], u, v)
        d = _third(tris[t2], u, v)
        det, tol = incircle(xy[u], xy[v], xy[c], xy[d])
        if det > tol:
            flip = True
        elif det >= -tol:
            flip = (min(c, d), max(c, d)) < (min(u, v), max(u, v))
        else:
            flip = False
        if not flip:
            continue
        o1, b1 = orient2d(xy[u], xy[d], xy[c])
        o2, b2 = orient2d(xy[d], xy[v], xy[c])
        if o1 <= b1 or o2 <= b2:
            continue  # non-convex quad: flipping would fold the mesh
        for (a, b) in ((u, v), (v, c), (c, u), (v, u), (u, d), (d, v)):
            edge_tri.pop((a, b), None)
        tris[t1] = [u, d, c]
        tris[t2] = [d, v, c]
        for t in (t1, t2):
            a, b, cc = tris[t]
            edge_tri[(a, b)] = t
            edge_tri[(b, cc)] = t
            edge_tri[(cc, a)] = t
        for a, b in ((u, d), (d, v), (v, c), (c, u)):
            stack.append((min(a, b), max(a, b)))
    return tris


def _canonical(tri):
    i = tri.index(min(tri))
    return tuple(int(v) for v in tri[i:] + tri[:i])


def signed_areas(xy, triangles) -> np.ndarray:
    tri = np.asarray(triangles, dtype=np.intp).reshape(-1, 3)
    a, b, c = xy[tri[:, 0]], xy[tri[:, 1]], xy[tri[:, 2]]
    return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))


@dataclass(frozen=True)
class TriangleMesh:
    """Landmarks plus triangle connectivity (vertex-id triples).

    Meshes built by :func:`delaunay_triangulate` are CCW and Delaunay.  Meshes
    derived with :meth:`with_vertices` keep the connectivity and only
    guarantee non-degenerate triangles; warped triangles may flip.
    """

    vertices: FeaturePointSet
    triangles: tuple
    _adjacency: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        n = len(self.vertices)
        for tri in self.triangles:
            if len(tri) != 3 or len(set(tri)) != 3 or not all(0 <= v < n for v in tri):
                raise SchemaError(f"invalid triangle {tri}")
        areas = signed_areas(self.vertices.xy, self.triangles)
        bad = np.flatnonzero(np.abs(areas) <= MIN_TRIANGLE_AREA)
        if bad.size:
            raise DegenerateTriangleError(
                f"triangle {self.triangles[bad[0]]} has area {abs(areas[bad[0]]):.3g} px^2"
            )
        adj = [set() for _ in range(n)]
        for a, b, c in self.triangles:
            adj[a].update((b, c))
            adj[b].update((a, c))
            adj[c].update((a, b))
        object.__setattr__(self, "_adjacency", tuple(frozenset(s) for s in adj))

    def with_vertices(self, pts: FeaturePointSet) -> "TriangleMesh":
        if len(pts) != len(self.vertices):
            raise SchemaError(
                f"connectivity needs {len(self.vertices)} vertices, got {len(pts)}"
            )
        return TriangleMesh(pts, self.triangles)

    def neighbors(self, vid) -> frozenset:
        if not (isinstance(vid, (int, np.integer)) and 0 <= vid < len(self.vertices)):
            raise KeyError(f"unknown vertex id {vid!r}")
        return self._adjacency[vid]


def delaunay_triangulate(pts: FeaturePointSet) -> TriangleMesh:
    xy = [tuple(p) for p in pts.xy.tolist()]
    tris = _legalize(xy, _sweep_triangulation(xy))
    return TriangleMesh(pts, tuple(sorted(_canonical(t) for t in tris)))


def neighbors_of(mesh: TriangleMesh, vid) -> frozenset:
    return mesh.neighbors(vid)


def check_connectivity(src_mesh: TriangleMesh, dst_mesh: TriangleMesh):
    if len(src_mesh.vertices) != len(dst_mesh.vertices) or src_mesh.triangles != dst_mesh.triangles:
        raise SchemaError("source and destination meshes have different connectivity")


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def map_pixels(src_xy, dst_mesh: TriangleMesh, width, height):
    """For every pixel of a width x height canvas, find the covering triangle
    of ``dst_mesh`` and the affinely corresponding source location.

    Returns ``(labels, sx, sy)``; ``labels`` is -1 outside the mesh, where the
    source location is the pixel itself.  When triangles overlap (a folded
    warp) or share an edge, the first triangle in connectivity order wins.
    """
    src_xy = np.asarray(src_xy, dtype=np.float64)
    dst_xy = dst_mesh.vertices.xy
    labels = np.full((height, width), -1, dtype=np.int32)
    sy, sx = np.mgrid[0:height, 0:width].astype(np.float64)

    for t, (i0, i1, i2) in enumerate(dst_mesh.triangles):
        v0, v1, v2 = dst_xy[i0], dst_xy[i1], dst_xy[i2]
        lo = np.floor(np.minimum(np.minimum(v0, v1), v2)).astype(int)
        hi = np.ceil(np.maximum(np.maximum(v0, v1), v2)).astype(int)
        x0, y0 = max(lo[0], 0), max(lo[1], 0)
        x1, y1 = min(hi[0], width - 1), min(hi[1], height - 1)
        if x0 > x1 or y0 > y1:
            continue
        py, px = np.mgrid[y0:y1 + 1, x0:x1 + 1].astype(np.float64)
        e1x, e1y = v1[0] - v0[0], v1[1] - v0[1]
        e2x, e2y = v2[0] - v0[0], v2[1] - v0[1]
        qx, qy = px - v0[0], py - v0[1]
        denom = _cross(e1x, e1y, e2x, e2y)
        # Cramer's rule written so that vertices get exact 0/1 weights
        l1 = _cross(qx, qy, e2x, e2y) / denom
        l2 = _cross(e1x, e1y, qx, qy) / denom
        l0 = 1.0 - l1 - l2
        inside = (l0 >= -_BARY_EPS) & (l1 >= -_BARY_EPS) & (l2 >= -_BARY_EPS)
        inside &= labels[y0:y1 + 1, x0:x1 + 1] < 0
        if not inside.any():
            continue
        s0, s1, s2 = src_xy[i0], src_xy[i1], src_xy[i2]
        w0, w1, w2 = l0[inside], l1[inside], l2[inside]
        rows, cols = py[inside].astype(int), px[inside].astype(int)
        labels[rows, cols] = t
        sx[rows, cols] = w0 * s0[0] + w1 * s1[0] + w2 * s2[0]
        sy[rows, cols] = w0 * s0[1] + w1 * s1[1] + w2 * s2[1]

    for arr in (sx, sy):
        near = np.rint(arr)
        snap = np.abs(arr - near) <= _SNAP_EPS
        arr[snap] = near[snap]
    return labels, sx, sy


def triangle_coverage(mesh: TriangleMesh, width, height) -> np.ndarray:
    """Boolean mask of pixels covered by any triangle."""
    labels, _, _ = map_pixels(mesh.vertices.xy, mesh, width, height)
    return labels >= 0


def bilinear_sample(img, sx, sy) -> np.ndarray:
    """Sample ``img`` at real coordinates, clamping to the image border."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    x = np.clip(sx, 0.0, w - 1)
    y = np.clip(sy, 0.0, h - 1)
    x0 = np.minimum(np.floor(x).astype(np.intp), max(w - 2, 0))
    y0 = np.minimum(np.floor(y).astype(np.intp), max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    if img.ndim == 3:
        fx = fx[..., None]
        fy = fy[..., None]
    top = (1.0 - fx) * img[y0, x0] + fx * img[y0, x1]
    bottom = (1.0 - fx) * img[y1, x0] + fx * img[y1, x1]
    return (1.0 - fy) * top + fy * bottom


def piecewise_affine_warp(src_img, src_mesh: TriangleMesh, dst_mesh: TriangleMesh, out_size=None):
    """Warp ``src_img`` so that ``src_mesh`` lands on ``dst_mesh``.

    Every destination pixel inside a destination triangle is sampled
    bilinearly at the corresponding source location; pixels outside the mesh
    copy the source pixel at the same coordinates.  ``out_size`` is
    ``(width, height)`` and defaults to the source size.
    """
    check_connectivity(src_mesh, dst_mesh)
    src_img = np.asarray(src_img, dtype=np.float64)
    if src_img.ndim not in (2, 3):
        raise DimensionError(f"unsupported image shape {src_img.shape}")
    if out_size is None:
        out_size = (src_img.shape[1], src_img.shape[0])
    _, sx, sy = map_pixels(src_mesh.vertices.xy, dst_mesh, out_size[0], out_size[1])
    return bilinear_sample(src_img, sx, sy)
