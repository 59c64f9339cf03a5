"""Spring-equilibrium blend of the global and local landmark positions.

Each landmark P is tied by springs to its mesh neighbours, pinned at their
global positions with the global distances as rest lengths, and by a
zero-rest-length spring to its local position A'.  The final position is the
point of a small search window where the net spring force is smallest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SchemaError
from .face_model import FeaturePointSet, check_schemas
from .mesh_warp import TriangleMesh

GRID_STEP = 0.25
WINDOW_MARGIN = 1.0
_UNIT_EPS = 1e-12


@dataclass(frozen=True)
class SpringSystem:
    global_xy: np.ndarray
    local_xy: np.ndarray
    neighbors: tuple  # per point: sorted tuple of neighbour ids
    rest_lengths: tuple  # per point: array aligned with neighbors
    k_neighbor: float = 1.0
    k_local: float = 1.0
    image_size: tuple | None = None

    def __post_init__(self):
        if self.k_neighbor < 0 or self.k_local < 0:
            raise ValueError("elasticity coefficients must be non-negative")
        if self.k_neighbor == 0 and self.k_local == 0:
            raise ValueError("k_neighbor and k_local cannot both be zero")

    @property
    def ratio(self):
        """k_local / k_neighbor (inf when k_neighbor is 0)."""
        return np.inf if self.k_neighbor == 0 else self.k_local / self.k_neighbor

    @classmethod
    def from_arrays(cls, global_xy, local_xy, neighbors, k_neighbor=1.0, k_local=1.0,
                    image_size=None):
        """Rest lengths are taken from the global layout."""
        A = np.array(global_xy, dtype=np.float64)
        nbs, rest = [], []
        for i in range(len(A)):
            nb = tuple(sorted(neighbors[i]))
            diff = A[list(nb)] - A[i] if nb else np.zeros((0, 2))
            nbs.append(nb)
            rest.append(np.hypot(diff[:, 0], diff[:, 1]))
        return cls(A, np.array(local_xy, dtype=np.float64), tuple(nbs), tuple(rest),
                   float(k_neighbor), float(k_local), image_size)

    @classmethod
    def build(cls, global_pts: FeaturePointSet, local_pts: FeaturePointSet,
              mesh: TriangleMesh, k_neighbor=1.0, k_local=1.0):
        check_schemas(global_pts, local_pts)
        if len(mesh.vertices) != len(global_pts):
            raise SchemaError("mesh and point sets differ in size")
        neighbors = [mesh.neighbors(i) for i in range(len(global_pts))]
        return cls.from_arrays(global_pts.xy, local_pts.xy, neighbors,
                               k_neighbor, k_local, global_pts.image_size)


def _forces(sys: SpringSystem, i, P):
    """Net force at each row of P, shape (m, 2)."""
    P = np.atleast_2d(np.asarray(P, dtype=np.float64))
    fx = np.zeros(len(P))
    fy = np.zeros(len(P))
    B = sys.global_xy
    for j, rest in zip(sys.neighbors[i], sys.rest_lengths[i]):
        dx = B[j, 0] - P[:, 0]
        dy = B[j, 1] - P[:, 1]
        dist = np.hypot(dx, dy)
        ok = dist >= _UNIT_EPS
        mag = np.where(ok, sys.k_neighbor * (dist - rest) / np.where(ok, dist, 1.0), 0.0)
        fx += mag * dx
        fy += mag * dy
    target = sys.local_xy[i]
    dx = target[0] - P[:, 0]
    dy = target[1] - P[:, 1]
    dist = np.hypot(dx, dy)
    ok = dist >= _UNIT_EPS
    mag = np.where(ok, sys.k_local * dist / np.where(ok, dist, 1.0), 0.0)
    fx += mag * dx
    fy += mag * dy
    return np.column_stack([fx, fy])


def net_force(sys: SpringSystem, i, P) -> np.ndarray:
    """Sum of neighbour spring forces and the local-anchor force at P."""
    return _forces(sys, i, P)[0]


def search_window(sys: SpringSystem, i):
    """(xmin, ymin, xmax, ymax): box around A and A' grown by one pixel,
    clipped to the image."""
    A, L = sys.global_xy[i], sys.local_xy[i]
    lo = np.minimum(A, L) - WINDOW_MARGIN
    hi = np.maximum(A, L) + WINDOW_MARGIN
    if sys.image_size is not None:
        lo = np.maximum(lo, 0.0)
        hi = np.minimum(hi, np.array(sys.image_size, dtype=np.float64) - 1)
    return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])


def candidates(sys: SpringSystem, i):
    """Grid points A + step * (a, b) inside the window, plus A' itself."""
    A = sys.global_xy[i]
    x0, y0, x1, y1 = search_window(sys, i)
    ia = np.arange(int(np.ceil((x0 - A[0]) / GRID_STEP - 1e-9)),
                   int(np.floor((x1 - A[0]) / GRID_STEP + 1e-9)) + 1)
    ib = np.arange(int(np.ceil((y0 - A[1]) / GRID_STEP - 1e-9)),
                   int(np.floor((y1 - A[1]) / GRID_STEP + 1e-9)) + 1)
    gy, gx = np.meshgrid(A[1] + GRID_STEP * ib, A[0] + GRID_STEP * ia, indexing="ij")
    grid = np.column_stack([gx.ravel(), gy.ravel()])
    return np.vstack([grid, sys.local_xy[i][None, :]])


def solve_point(sys: SpringSystem, i):
    """Return ``(P_opt, residual)``.

    Ties on the residual go to the candidate closest to A, then to the
    smaller (x, y).
    """
    cand = candidates(sys, i)
    f = _forces(sys, i, cand)
    residual = np.hypot(f[:, 0], f[:, 1])
    A = sys.global_xy[i]
    to_a = np.hypot(cand[:, 0] - A[0], cand[:, 1] - A[1])
    best = np.lexsort((cand[:, 1], cand[:, 0], to_a, residual))[0]
    return cand[best].copy(), float(residual[best])


@dataclass(frozen=True)
class SolveReport:
    positions: np.ndarray
    residuals: np.ndarray
    windows: np.ndarray  # (n, 4) xmin, ymin, xmax, ymax

    def lines(self):
        for i, ((x, y), r, w) in enumerate(zip(self.positions, self.residuals, self.windows)):
            yield f"{i} {x!r} {y!r} residual={r!r} window={tuple(float(v) for v in w)}"


def solve_all(global_pts: FeaturePointSet, local_pts: FeaturePointSet, mesh: TriangleMesh, lam):
    """Solve every landmark independently (neighbours stay at their global
    positions).  ``k_neighbor`` is fixed at 1 and ``k_local = lam``."""
    if not lam >= 0:
        raise ValueError(f"elasticity ratio must be >= 0, got {lam}")
    sys = SpringSystem.build(global_pts, local_pts, mesh, 1.0, float(lam))
    n = len(global_pts)
    pos = np.empty((n, 2))
    res = np.empty(n)
    win = np.empty((n, 4))
    for i in range(n):
        pos[i], res[i] = solve_point(sys, i)
        win[i] = search_window(sys, i)
    return global_pts.with_positions(pos), SolveReport(pos, res, win)
