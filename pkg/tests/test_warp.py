import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfcascade.lightfield import DisparityMap
from lfcascade.warp import bilinear_sample, sample_map, shift_image, warp_view

finite = st.floats(-6, 6, allow_nan=False, allow_infinity=False)
baseline = st.tuples(st.integers(-4, 4), st.integers(-4, 4))


def linear_image(H, W, a=0.011, b=0.007, c=0.2):
    ys, xs = np.mgrid[0:H, 0:W].astype(np.float64)
    return (a * xs + b * ys + c)[..., np.newaxis]


class TestBilinearSample:
    def test_lattice_point_is_exact(self):
        img = np.random.default_rng(0).random((8, 6, 2))
        value, valid = bilinear_sample(img, 3, 5)
        assert valid
        np.testing.assert_array_equal(value, img[5, 3])

    def test_midpoint_of_ramp(self):
        img = np.array([[0.0, 1.0], [0.0, 1.0]])
        value, valid = bilinear_sample(img, 0.5, 0.5)
        assert valid and value[0] == pytest.approx(0.5)

    @pytest.mark.parametrize("x,y", [(-0.25, 0), (0, -0.25), (3.01, 0), (0, 2.5)])
    def test_out_of_bounds(self, x, y):
        value, valid = bilinear_sample(np.ones((3, 4, 1)), x, y)
        assert not valid
        np.testing.assert_array_equal(value, [0.0])

    def test_far_edge_is_valid(self):
        img = np.arange(12, dtype=np.float64).reshape(3, 4)
        value, valid = bilinear_sample(img, 3, 2)
        assert valid and value[0] == 11.0

    def test_matches_hand_formula(self):
        img = np.array([[1.0, 2.0], [3.0, 5.0]])
        x, y = 0.25, 0.75
        expected = (1 - y) * ((1 - x) * 1 + x * 2) + y * ((1 - x) * 3 + x * 5)
        assert bilinear_sample(img, x, y)[0][0] == pytest.approx(expected)


class TestWarpView:
    def test_rightmost_columns_invalid(self):
        img = np.random.default_rng(1).random((5, 8, 1))
        out = warp_view(img, (4, 0), 1.0)
        assert out.valid[:, :4].all()
        assert not out.valid[:, 4:].any()
        assert np.all(out.image[:, 4:] == 0)

    def test_v_baseline_moves_rows(self):
        img = np.random.default_rng(1).random((8, 5, 1))
        out = warp_view(img, (0, 2), 1.0)
        np.testing.assert_array_equal(out.image[:6], img[2:])
        assert not out.valid[6:].any()

    def test_center_view_identity(self):
        img = np.random.default_rng(2).random((6, 7, 3)).astype(np.float32)
        disp = DisparityMap(np.random.default_rng(3).normal(size=(6, 7)))
        for d in (0.0, 3.7, disp):
            out = warp_view(img, (0, 0), d)
            np.testing.assert_array_equal(out.image, img)
            assert out.image.dtype == img.dtype
            assert out.valid.all()

    def test_2d_view_keeps_shape(self):
        out = warp_view(np.zeros((4, 5)), (1, 1), 0.5)
        assert out.image.shape == (4, 5) and out.valid.shape == (4, 5)

    def test_non_finite_disparity_rejected(self):
        img = np.zeros((4, 4, 1))
        with pytest.raises(ValueError):
            warp_view(img, (1, 0), float("nan"))
        bad = np.zeros((4, 4))
        bad[1, 1] = np.inf
        with pytest.raises(ValueError):
            warp_view(img, (1, 0), bad)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            warp_view(np.zeros((4, 4, 1)), (1, 0), np.zeros((4, 5)))

    def test_planar_scene_warps_to_center(self, ramp_plane):
        lf, d = ramp_plane.lf, 0.75
        center = lf.center_view().astype(np.float64)
        for a in lf.side_views():
            out = warp_view(lf.data[a], lf.baseline(a), d)
            interior = out.valid.copy()
            interior[:, :2] = interior[:, -2:] = interior[:2] = interior[-2:] = False
            assert np.abs(out.image - center)[interior].max() <= 1e-6

    def test_integer_shift_matches_array_roll(self):
        img = np.random.default_rng(4).random((9, 10, 2))
        for d in (-2, -1, 1, 2):
            for du, dv in [(1, 0), (0, -1), (2, 1)]:
                out = warp_view(img, (du, dv), float(d))
                sx, sy = d * du, d * dv
                ys, xs = np.nonzero(out.valid)
                np.testing.assert_array_equal(out.image[ys, xs], img[ys + sy, xs + sx])

    def test_constant_and_per_pixel_paths_agree_bitwise(self):
        img = np.random.default_rng(5).random((12, 11, 3))
        for d in (-1.375, 0.125, 2.5):
            for b in [(1, -2), (-3, 0), (4, 4)]:
                a = warp_view(img, b, d)
                m = warp_view(img, b, np.full((12, 11), d))
                np.testing.assert_array_equal(a.image, m.image)
                np.testing.assert_array_equal(a.valid, m.valid)


@settings(max_examples=60, deadline=None)
@given(d=finite, b=baseline)
def test_identity_property(d, b):
    img = np.random.default_rng(6).random((5, 6, 1))
    out = warp_view(img, (0, 0), d)
    np.testing.assert_array_equal(out.image, img)


@settings(max_examples=80, deadline=None)
@given(d1=st.floats(-2, 2), d2=st.floats(-2, 2), b=baseline)
def test_composition_exact_on_linear_images(d1, d2, b):
    img = linear_image(16, 16)
    first = warp_view(img, b, d1)
    second = warp_view(first.image, b, d2)
    direct = warp_view(img, b, d1 + d2)
    # second-pass taps must land on valid first-pass pixels
    ys, xs = np.mgrid[0:16, 0:16].astype(np.float64)
    taps_ok = sample_map(first.valid[..., np.newaxis].astype(np.float64), xs + d2 * b[0], ys + d2 * b[1])
    joint = second.valid & direct.valid & (taps_ok.image[..., 0] == 1.0)
    np.testing.assert_allclose(second.image[joint], direct.image[joint], atol=1e-12)


@settings(max_examples=80, deadline=None)
@given(d=st.floats(0, 3), extra=st.floats(0, 3), b=baseline)
def test_validity_shrinks_with_larger_disparity(d, extra, b):
    img = np.zeros((10, 12, 1))
    near = warp_view(img, b, d).valid
    far = warp_view(img, b, d + extra).valid
    assert not np.any(far & ~near)


@settings(max_examples=80, deadline=None)
@given(x=st.floats(-1, 6), y=st.floats(-1, 5), seed=st.integers(0, 2**16))
def test_sample_is_convex_combination_of_taps(x, y, seed):
    img = np.random.default_rng(seed).random((5, 6, 1))
    value, valid = bilinear_sample(img, x, y)
    if not valid:
        return
    x0 = min(int(np.floor(x)), 4)
    y0 = min(int(np.floor(y)), 3)
    taps = img[y0 : y0 + 2, x0 : x0 + 2, 0]
    assert taps.min() - 1e-12 <= value[0] <= taps.max() + 1e-12


@settings(max_examples=50, deadline=None)
@given(sx=st.floats(-5, 5), sy=st.floats(-5, 5))
def test_shift_image_matches_sample_map(sx, sy):
    img = np.random.default_rng(7).random((7, 9, 2))
    ys, xs = np.mgrid[0:7, 0:9].astype(np.float64)
    a = shift_image(img, sx, sy)
    m = sample_map(img, xs + sx, ys + sy)
    np.testing.assert_array_equal(a.image, m.image)
    np.testing.assert_array_equal(a.valid, m.valid)
