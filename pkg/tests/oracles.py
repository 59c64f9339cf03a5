"""Slow, obviously-correct reference computations used only by tests."""

import itertools
import math

import numpy as np


def circumcircle_contains(a, b, c, d, tol=1e-9):
    """Is d strictly inside the circumcircle of triangle abc (any orientation)?"""
    m = np.array([
        [a[0] - d[0], a[1] - d[1], (a[0] - d[0]) ** 2 + (a[1] - d[1]) ** 2],
        [b[0] - d[0], b[1] - d[1], (b[0] - d[0]) ** 2 + (b[1] - d[1]) ** 2],
        [c[0] - d[0], c[1] - d[1], (c[0] - d[0]) ** 2 + (c[1] - d[1]) ** 2],
    ])
    orient = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    det = np.linalg.det(m)
    return det * math.copysign(1.0, orient) > tol


def empty_circumcircle_violations(xy, triangles, tol=1e-9):
    bad = []
    for tri in triangles:
        a, b, c = (xy[v] for v in tri)
        for d in range(len(xy)):
            if d in tri:
                continue
            if circumcircle_contains(a, b, c, xy[d], tol):
                bad.append((tri, d))
    return bad


def brute_force_delaunay(xy, tol=1e-9):
    """All non-degenerate triples whose circumcircle holds no other point.
    Only a triangulation for point sets without four cocircular points."""
    out = []
    for tri in itertools.combinations(range(len(xy)), 3):
        a, b, c = (xy[v] for v in tri)
        area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(area) <= 1e-12:
            continue
        if not any(circumcircle_contains(a, b, c, xy[d], tol) for d in range(len(xy)) if d not in tri):
            out.append(tuple(sorted(tri)))
    return sorted(out)


def hull_size(xy):
    """Number of points on the convex hull boundary (gift wrapping by brute
    force: p is on the hull iff some line through p has every point on one
    side, tested over all candidate edges p-q)."""
    n = len(xy)
    on_hull = set()
    for i, j in itertools.permutations(range(n), 2):
        a, b = xy[i], xy[j]
        sides = [(b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) for p in xy]
        if all(s >= -1e-12 for s in sides):
            on_hull.update((i, j))
            on_hull.update(k for k, s in enumerate(sides) if abs(s) <= 1e-12)
    return len(on_hull)


def spring_force(global_xy, local_xy, neighbors, i, P, k_n, k_l):
    """Straight transcription of Hooke's law, one spring at a time."""
    fx = fy = 0.0
    A = global_xy[i]
    for j in sorted(neighbors[i]):
        B = global_xy[j]
        rest = math.dist(A, B)
        d = math.dist(P, B)
        if d >= 1e-12:
            fx += k_n * (d - rest) * (B[0] - P[0]) / d
            fy += k_n * (d - rest) * (B[1] - P[1]) / d
    L = local_xy[i]
    d = math.dist(P, L)
    if d >= 1e-12:
        fx += k_l * d * (L[0] - P[0]) / d
        fy += k_l * d * (L[1] - P[1]) / d
    return fx, fy
