"""Distance-based score of a candidate result and the elasticity-ratio search.

score = exp(|E_cand - E_src_exp|) + w_db * exp(|E_cand - E_global|)

Feature distances on raw 0-255 images easily run into the hundreds, where
``exp`` overflows a double.  Candidates are therefore ranked by the log of
the score (same argmin, since log is monotone) and the report prints the
exponentials through :mod:`decimal`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Context, Decimal

import numpy as np

from .eigenface import EigenBasis, project

DEFAULT_GRID = (0.0, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0)
DEFAULT_OMEGA = 1.0

_DEC = Context(prec=17)


def _exp_or_inf(x):
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class DbScore:
    d_source: float
    d_global: float
    omega: float = DEFAULT_OMEGA

    @property
    def term_source(self):
        return _exp_or_inf(self.d_source)

    @property
    def term_global(self):
        return _exp_or_inf(self.d_global)

    @property
    def total(self):
        return self.term_source + self.omega * self.term_global

    @property
    def log_total(self):
        if self.omega == 0:
            return self.d_source
        return float(np.logaddexp(self.d_source, math.log(self.omega) + self.d_global))

    def decimal_terms(self):
        ts = _DEC.exp(Decimal(self.d_source))
        tg = _DEC.exp(Decimal(self.d_global))
        return _DEC.add(ts, _DEC.multiply(Decimal(self.omega), tg)), ts, tg


class LambdaGrid(tuple):
    """Strictly increasing, non-empty tuple of non-negative ratios."""

    def __new__(cls, values=DEFAULT_GRID):
        vals = tuple(float(v) for v in values)
        if not vals:
            raise ValueError("lambda grid is empty")
        if any(not (v >= 0 and math.isfinite(v)) for v in vals):
            raise ValueError(f"lambda values must be finite and >= 0: {vals}")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError(f"lambda grid must be strictly increasing: {vals}")
        return super().__new__(cls, vals)

    @classmethod
    def parse(cls, text):
        try:
            return cls(float(t) for t in text.split(",") if t.strip())
        except ValueError as exc:
            raise ValueError(f"bad lambda grid {text!r}: {exc}") from None


def fit_to_shape(img, shape):
    """Centre-crop, then edge-pad, a (h, w[, c]) image to ``shape=(h, w)``."""
    img = np.asarray(img, dtype=np.float64)
    for axis, want in enumerate(shape):
        have = img.shape[axis]
        if have > want:
            start = (have - want) // 2
            img = np.take(img, np.arange(start, start + want), axis=axis)
        elif have < want:
            before = (want - have) // 2
            pad = [(0, 0)] * img.ndim
            pad[axis] = (before, want - have - before)
            img = np.pad(img, pad, mode="edge")
    return img


def features(basis: EigenBasis, img):
    return project(basis, fit_to_shape(img, basis.shape))


def db_score(basis: EigenBasis, candidate_img, source_exp_img, global_img, omega=DEFAULT_OMEGA):
    return DbScorer(basis, source_exp_img, global_img, omega)(candidate_img)


class DbScorer:
    """Scores candidates against fixed source-expression and global images."""

    def __init__(self, basis: EigenBasis, source_exp_img, global_img, omega=DEFAULT_OMEGA):
        if omega < 0:
            raise ValueError("omega must be >= 0")
        self.basis = basis
        self.omega = float(omega)
        self.e_source = features(basis, source_exp_img)
        self.e_global = features(basis, global_img)

    def __call__(self, candidate_img) -> DbScore:
        e = features(self.basis, candidate_img)
        return DbScore(
            float(np.linalg.norm(e - self.e_source)),
            float(np.linalg.norm(e - self.e_global)),
            self.omega,
        )


def argmin_index(values):
    """Index of the smallest value; the earliest one wins ties."""
    best = 0
    for i, v in enumerate(values):
        if v < values[best]:
            best = i
    return best


def select_lambda(grid, evaluate, scorer):
    """Evaluate every ratio in the grid and return ``(lambda_opt, table)``.

    ``evaluate(lam)`` produces the candidate image, ``scorer(image)`` a
    DbScore.  ``table`` lists ``(lam, DbScore)`` in grid order.
    """
    grid = LambdaGrid(grid)
    table = [(lam, scorer(evaluate(lam))) for lam in grid]
    best = argmin_index([s.log_total for _, s in table])
    return table[best][0], table


def format_report(table) -> str:
    lines = ["# lambda total term_source term_global"]
    for lam, s in table:
        total, ts, tg = s.decimal_terms()
        lines.append(f"{lam!r} {total} {ts} {tg}")
    return "\n".join(lines) + "\n"
