import numpy as np
import pytest

from exprclone.errors import SchemaError
from exprclone.global_warp import face_scale, global_warp, transfer_displacements
from exprclone.mesh_warp import delaunay_triangulate

from conftest import point_set

SRC = [(10, 10), (50, 10), (50, 30), (10, 30)]
TGT = [(20, 20), (100, 20), (100, 80), (20, 80)]


def test_face_scale_is_box_ratio():
    assert face_scale(point_set(SRC, (200, 200)), point_set(TGT, (200, 200))) == (2.0, 3.0)


def test_displacements_scaled_per_axis():
    exp = [(11, 10), (50, 12), (50, 30), (10, 30)]
    out = transfer_displacements(point_set(SRC, (200, 200)), point_set(exp, (200, 200)),
                                 point_set(TGT, (200, 200)))
    assert out.xy.tolist() == [[22.0, 20.0], [100.0, 26.0], [100.0, 80.0], [20.0, 80.0]]


def test_zero_displacement_returns_target(faces):
    p = faces["src_neutral_pts"]
    out = transfer_displacements(p, p, faces["tgt_pts"])
    assert np.array_equal(out.xy, faces["tgt_pts"].xy)


def test_identity_global_warp_reproduces_target(faces):
    p, tgt = faces["src_neutral_pts"], faces["tgt_pts"]
    mesh = delaunay_triangulate(tgt)
    res = global_warp(p, p, tgt, faces["tgt_img"], mesh)
    assert np.array_equal(res.image, faces["tgt_img"])


def test_displacement_leaving_image_is_rejected():
    src = point_set(SRC, (200, 200))
    exp = point_set([(10, 0), (50, 10), (50, 30), (10, 30)], (200, 200))
    # the target face is three times taller, so a 10 px lift becomes 30 px
    with pytest.raises(SchemaError, match="outside"):
        transfer_displacements(src, exp, point_set(TGT, (200, 200)))


def test_width_ratio_scales_displacement():
    src = point_set([(0, 0), (20, 0), (20, 30), (0, 30)], (200, 200))
    exp = point_set([(4, 0), (20, 0), (20, 30), (0, 30)], (200, 200))
    tgt = point_set([(50, 50), (80, 50), (80, 80), (50, 80)], (200, 200))
    out = transfer_displacements(src, exp, tgt)
    assert out.xy[0].tolist() == [56.0, 50.0]


def test_unit_ratios_add_vectors():
    src = point_set(SRC, (200, 200))
    exp = point_set([(12, 13), (50, 10), (49, 30), (10, 30)], (200, 200))
    assert face_scale(src, src) == (1.0, 1.0)
    out = transfer_displacements(src, exp, src)
    assert np.array_equal(out.xy, exp.xy)


def test_translation_commutes():
    src = point_set(SRC, (200, 200))
    exp = point_set([(12, 13), (50, 10), (49, 30), (10, 30)], (200, 200))
    tgt = point_set(TGT, (200, 200))
    moved_tgt = point_set(np.array(TGT) + [7, 3], (200, 200))
    a = transfer_displacements(src, exp, tgt)
    b = transfer_displacements(src, exp, moved_tgt)
    assert np.allclose(b.xy - a.xy, [7, 3], atol=1e-12)


def test_translated_face(rng):
    img = rng.integers(0, 256, (200, 200)).astype(float)
    tgt = point_set(TGT, (200, 200))
    mesh = delaunay_triangulate(tgt)
    src = point_set(SRC, (200, 200))
    exp = point_set(np.array(SRC) + [5, 0], (200, 200))
    res = global_warp(src, exp, tgt, img, mesh)
    # the face is twice as wide as the source one, so it moves 10 px
    assert np.array_equal(res.image[30:70, 40:90], img[30:70, 30:80])


def test_fold_after_displacement_is_degenerate():
    from exprclone.errors import DegenerateTriangleError

    src = point_set([(10, 10), (50, 10), (30, 40)], (100, 100))
    exp = point_set([(10, 10), (50, 10), (30, 10)], (100, 100))
    tgt = point_set([(10, 10), (50, 10), (30, 40)], (100, 100))
    with pytest.raises(DegenerateTriangleError):
        global_warp(src, exp, tgt, np.zeros((100, 100)), delaunay_triangulate(tgt))
