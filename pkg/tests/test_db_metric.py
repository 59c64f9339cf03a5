import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from exprclone.db_metric import (
    DEFAULT_GRID,
    DbScore,
    LambdaGrid,
    argmin_index,
    db_score,
    fit_to_shape,
    format_report,
    select_lambda,
)
from exprclone.eigenface import train_basis


@pytest.fixture
def small_basis(rng):
    return train_basis([rng.uniform(0, 255, (6, 6)) for _ in range(5)])


def test_identical_images_score_two(small_basis, rng):
    img = rng.uniform(0, 255, (6, 6))
    s = db_score(small_basis, img, img, img)
    assert s.total == 2.0 and s.log_total == math.log(2.0)


def test_terms_are_exp_of_distances(small_basis, rng):
    a, b, c = (rng.uniform(0, 255, (6, 6)) for _ in range(3))
    s = db_score(small_basis, a, b, c, omega=0.5)
    ea, eb, ec = (small_basis.components @ (x.ravel() - small_basis.mean) for x in (a, b, c))
    assert s.d_source == pytest.approx(np.linalg.norm(ea - eb), rel=1e-12)
    assert s.d_global == pytest.approx(np.linalg.norm(ea - ec), rel=1e-12)


def test_huge_distances_still_rank():
    a = DbScore(800.0, 801.0)
    b = DbScore(800.5, 800.5)
    assert math.isinf(a.total) and math.isinf(b.total)
    assert b.log_total < a.log_total  # e^800 + e^801 > 2 e^800.5
    total, ts, tg = a.decimal_terms()
    assert str(ts).startswith("2.7") and "E+347" in str(ts)


def test_constant_table_picks_smallest_lambda():
    lam, table = select_lambda(DEFAULT_GRID, lambda v: None, lambda img: DbScore(0.0, 0.0))
    assert lam == 0.0 and len(table) == 8


def test_select_lambda_picks_minimum():
    d = {0.0: 3.0, 0.5: 1.0, 1.0: 1.0, 2.0: 2.0}
    lam, _ = select_lambda(tuple(d), lambda v: v, lambda v: DbScore(d[v], d[v]))
    assert lam == 0.5


@given(st.lists(st.integers(0, 5), min_size=1, max_size=20))
def test_argmin_earliest(values):
    i = argmin_index(values)
    assert values[i] == min(values) and i == values.index(min(values))


def test_grid_validation():
    assert LambdaGrid.parse("0, 0.5,2") == (0.0, 0.5, 2.0)
    for bad in ("", "1,0.5", "0,0", "-1,2", "a"):
        with pytest.raises(ValueError):
            LambdaGrid.parse(bad)


def test_fit_to_shape():
    img = np.arange(20, dtype=float).reshape(4, 5)
    assert fit_to_shape(img, (2, 3)).tolist() == [[6, 7, 8], [11, 12, 13]]
    padded = fit_to_shape(img, (6, 5))
    assert padded.shape == (6, 5)
    assert padded[0].tolist() == img[0].tolist() and padded[-1].tolist() == img[-1].tolist()


def test_report_format():
    text = format_report([(0.0, DbScore(0.0, 0.0)), (1.0, DbScore(1.0, 0.0, 2.0))])
    lines = text.splitlines()
    assert lines[0] == "# lambda total term_source term_global"
    assert lines[1] == "0.0 2 1 1"
    assert lines[2].startswith("1.0 4.718281828459045")


def test_candidate_equal_to_global(small_basis, rng):
    g, s = rng.uniform(0, 255, (6, 6)), rng.uniform(0, 255, (6, 6))
    score = db_score(small_basis, g, s, g, omega=1.0)
    d1 = np.linalg.norm(small_basis.components @ (g.ravel() - s.ravel()))
    assert score.d_global == 0.0
    assert score.total == pytest.approx(math.exp(d1) + 1.0, rel=1e-12)


def test_singleton_grid():
    lam, table = select_lambda((2.5,), lambda v: v, lambda v: DbScore(9.0, 9.0))
    assert lam == 2.5 and len(table) == 1


@given(st.lists(st.floats(0, 50), min_size=1, max_size=8))
def test_selected_score_is_minimal(dists):
    grid = tuple(float(i) for i in range(len(dists)))
    lam, table = select_lambda(grid, lambda v: v, lambda v: DbScore(dists[int(v)], 1.0))
    best = dict(table)[lam].log_total
    assert all(best <= s.log_total for _, s in table)
