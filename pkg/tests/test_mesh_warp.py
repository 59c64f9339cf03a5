import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from exprclone.errors import DegenerateTriangleError, SchemaError
from exprclone.mesh_warp import (
    bilinear_sample,
    delaunay_triangulate,
    map_pixels,
    piecewise_affine_warp,
    signed_areas,
    triangle_coverage,
)

from conftest import point_set
from oracles import brute_force_delaunay, empty_circumcircle_violations, hull_size

FIVE = [(10, 10), (60, 12), (58, 70), (8, 64), (30, 35)]
# brute-force oracle output for FIVE, frozen
FIVE_TRIANGLES = [(0, 1, 4), (0, 3, 4), (1, 2, 4), (2, 3, 4)]


def test_five_points_match_frozen_oracle():
    mesh = delaunay_triangulate(point_set(FIVE))
    assert sorted(tuple(sorted(t)) for t in mesh.triangles) == FIVE_TRIANGLES
    assert len(mesh.triangles) == 2 * 5 - 2 - 4


def test_triangles_are_ccw_and_canonical():
    mesh = delaunay_triangulate(point_set(FIVE))
    assert (signed_areas(mesh.vertices.xy, mesh.triangles) > 0).all()
    for t in mesh.triangles:
        assert t[0] == min(t)
    assert list(mesh.triangles) == sorted(mesh.triangles)


def test_cocircular_square_uses_smaller_diagonal():
    mesh = delaunay_triangulate(point_set([(0, 0), (10, 0), (10, 10), (0, 10)]))
    assert mesh.triangles == ((0, 1, 2), (0, 2, 3))


def test_grid_diagonals_are_deterministic():
    xy = [(x * 10, y * 10) for y in range(4) for x in range(4)]
    a = delaunay_triangulate(point_set(xy))
    b = delaunay_triangulate(point_set(xy))
    assert a.triangles == b.triangles
    assert len(a.triangles) == 18
    assert not empty_circumcircle_violations(np.array(xy, float), a.triangles)


def test_neighbors():
    mesh = delaunay_triangulate(point_set(FIVE))
    assert mesh.neighbors(4) == {0, 1, 2, 3}
    assert mesh.neighbors(0) == {1, 3, 4}
    with pytest.raises(KeyError):
        mesh.neighbors(5)


def test_collinear_points_fail():
    with pytest.raises(Exception):
        delaunay_triangulate(point_set([(0, 0), (5, 5), (10, 10), (20, 20)]))


def test_degenerate_triangle_rejected():
    mesh = delaunay_triangulate(point_set(FIVE))
    moved = [list(p) for p in FIVE]
    moved[4] = [35.0, 11.0]  # on the segment 0-1
    with pytest.raises(DegenerateTriangleError):
        mesh.with_vertices(point_set(moved))


def test_with_vertices_size_mismatch():
    mesh = delaunay_triangulate(point_set(FIVE))
    with pytest.raises(SchemaError):
        mesh.with_vertices(point_set(FIVE[:4]))


def test_identity_warp_is_exact(rng):
    img = rng.integers(0, 256, (100, 100, 3)).astype(float)
    mesh = delaunay_triangulate(point_set(FIVE))
    assert np.array_equal(piecewise_affine_warp(img, mesh, mesh), img)


def test_translation_by_integer(rng):
    img = rng.integers(0, 256, (100, 100)).astype(float)
    src = delaunay_triangulate(point_set(FIVE))
    dst = src.with_vertices(point_set([(x + 3, y + 2) for x, y in FIVE]))
    out = piecewise_affine_warp(img, src, dst)
    labels, _, _ = map_pixels(src.vertices.xy, dst, 100, 100)
    yy, xx = np.nonzero(labels >= 0)
    assert np.array_equal(out[yy, xx], img[yy - 2, xx - 3])
    assert np.array_equal(out[labels < 0], img[labels < 0])


def test_affine_map_is_exact_for_linear_image():
    yy, xx = np.mgrid[0:100, 0:100].astype(float)
    img = 0.5 * xx + 0.25 * yy
    src = delaunay_triangulate(point_set(FIVE))
    A = np.array([[0.9, 0.1], [-0.05, 1.1]])
    dst_xy = (np.array(FIVE, float) - 30) @ A.T + 32
    dst = src.with_vertices(point_set(dst_xy))
    labels, sx, sy = map_pixels(src.vertices.xy, dst, 100, 100)
    inside = labels >= 0
    back = np.linalg.solve(A, np.stack([xx - 32, yy - 32]).reshape(2, -1)).reshape(2, 100, 100) + 30
    assert np.allclose(sx[inside], back[0][inside], atol=1e-9)
    assert np.allclose(sy[inside], back[1][inside], atol=1e-9)
    out = piecewise_affine_warp(img, src, dst)
    assert np.allclose(out[inside], (0.5 * back[0] + 0.25 * back[1])[inside], atol=1e-9)


def test_out_size():
    img = np.arange(100 * 100, dtype=float).reshape(100, 100)
    mesh = delaunay_triangulate(point_set(FIVE))
    assert piecewise_affine_warp(img, mesh, mesh, out_size=(70, 80)).shape == (80, 70)


def test_coverage_of_square():
    mesh = delaunay_triangulate(point_set([(0, 0), (9, 0), (9, 9), (0, 9)], size=(20, 20)))
    cov = triangle_coverage(mesh, 20, 20)
    assert cov[:10, :10].all()
    assert cov.sum() == 100


def test_bilinear_sample():
    img = np.array([[0.0, 10.0], [20.0, 30.0]])
    assert bilinear_sample(img, np.array([0.5]), np.array([0.5]))[0] == 15.0
    assert bilinear_sample(img, np.array([1.0]), np.array([1.0]))[0] == 30.0
    assert bilinear_sample(img, np.array([-3.0]), np.array([7.0]))[0] == 20.0


@st.composite
def random_sets(draw, max_n=30):
    n = draw(st.integers(3, max_n))
    xy = draw(st.lists(st.tuples(st.integers(0, 199), st.integers(0, 199)),
                       min_size=n, max_size=n, unique=True))
    return np.array(xy, dtype=float)


@settings(max_examples=60, deadline=None)
@given(random_sets())
def test_delaunay_properties(xy):
    assume(np.linalg.matrix_rank(xy - xy[0]) == 2)
    mesh = delaunay_triangulate(point_set(xy, size=(200, 200)))
    assert not empty_circumcircle_violations(xy, mesh.triangles)
    assert len(mesh.triangles) == 2 * len(xy) - 2 - hull_size(xy)
    assert (signed_areas(xy, mesh.triangles) > 0).all()


@settings(max_examples=25, deadline=None)
@given(random_sets(max_n=9))
def test_general_position_matches_brute_force(xy):
    assume(np.linalg.matrix_rank(xy - xy[0]) == 2)
    mesh = delaunay_triangulate(point_set(xy, size=(200, 200)))
    oracle = brute_force_delaunay(xy)
    assume(len(oracle) == len(mesh.triangles))  # no cocircular quadruples
    assert sorted(tuple(sorted(t)) for t in mesh.triangles) == oracle


@settings(max_examples=30, deadline=None)
@given(random_sets(max_n=15))
def test_permutation_invariant_triangle_set(xy):
    assume(np.linalg.matrix_rank(xy - xy[0]) == 2)
    perm = np.random.default_rng(len(xy)).permutation(len(xy))
    a = delaunay_triangulate(point_set(xy, size=(200, 200)))
    b = delaunay_triangulate(point_set(xy[perm], size=(200, 200)))
    ta = {frozenset(map(tuple, xy[list(t)])) for t in a.triangles}
    tb = {frozenset(map(tuple, xy[perm][list(t)])) for t in b.triangles}
    # equal whenever the triangulation is unique; otherwise both are Delaunay
    if len(brute_force_delaunay(xy)) == len(a.triangles):
        assert ta == tb


def test_single_triangle():
    mesh = delaunay_triangulate(point_set([(0, 0), (10, 0), (0, 10)]))
    assert mesh.triangles == ((0, 1, 2),)
    assert mesh.neighbors(0) == {1, 2}


def test_square_neighbors_and_unknown_vertex():
    mesh = delaunay_triangulate(point_set([(0, 0), (1, 0), (1, 1), (0, 1)]))
    assert not empty_circumcircle_violations(mesh.vertices.xy, mesh.triangles)
    assert mesh.neighbors(0) == {1, 2, 3}
    with pytest.raises(KeyError):
        mesh.neighbors(99)


def test_shift_right_five(rng):
    img = rng.integers(0, 256, (100, 100)).astype(float)
    src = delaunay_triangulate(point_set(FIVE))
    dst = src.with_vertices(point_set([(x + 5, y) for x, y in FIVE]))
    labels, _, _ = map_pixels(src.vertices.xy, dst, 100, 100)
    out = piecewise_affine_warp(img, src, dst)
    yy, xx = np.nonzero(labels >= 0)
    assert np.array_equal(out[yy, xx], img[yy, xx - 5])


def test_vertex_pixels_map_exactly():
    src = delaunay_triangulate(point_set(FIVE))
    moved = [(12.0, 9.0), (61.0, 15.0), (55.0, 72.0), (9.0, 60.0), (33.0, 36.0)]
    dst = src.with_vertices(point_set(moved))
    labels, sx, sy = map_pixels(src.vertices.xy, dst, 100, 100)
    for (dx, dy), (x, y) in zip(moved, FIVE):
        assert labels[int(dy), int(dx)] >= 0
        assert (sx[int(dy), int(dx)], sy[int(dy), int(dx)]) == (x, y)
