import numpy as np
import pytest

from lfcascade.lightfield import (
    AngularCoord,
    DisparityMap,
    LightField,
    baselines,
    extract_epi,
    extract_macpi,
    get_view,
)
from lfcascade.synth import Layer, SceneSpec, generate_lf
from lfcascade.warp import warp_view

from conftest import random_lf


class TestLightField:
    def test_uint8_input_is_normalized(self):
        data = np.full((3, 3, 2, 2, 1), 255, dtype=np.uint8)
        lf = LightField(data)
        assert lf.data.dtype == np.float32
        assert np.all(lf.data == 1.0)

    def test_4d_input_gets_channel_axis(self):
        lf = LightField(np.zeros((3, 3, 5, 6), dtype=np.float32))
        assert lf.shape == (3, 3, 5, 6, 1)
        assert lf.spatial_shape == (5, 6)
        assert lf.channels == 1

    @pytest.mark.parametrize("shape", [(2, 3, 4, 4, 1), (3, 4, 4, 4, 1)])
    def test_even_angular_size_rejected(self, shape):
        with pytest.raises(ValueError):
            LightField(np.zeros(shape, dtype=np.float32))

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            LightField(np.full((3, 3, 2, 2, 1), 1.5, dtype=np.float32))

    def test_nan_rejected(self):
        data = np.zeros((3, 3, 2, 2, 1), dtype=np.float32)
        data[0, 0, 0, 0, 0] = np.nan
        with pytest.raises(ValueError):
            LightField(data)

    def test_immutable(self, small_lf):
        with pytest.raises(ValueError):
            small_lf.data[0, 0, 0, 0, 0] = 0.5

    def test_center_and_views(self):
        lf = random_lf((9, 9, 2, 2, 1))
        assert lf.center == AngularCoord(4, 4)
        assert lf.n_views == 81
        views = list(lf.views())
        assert views[0] == (0, 0) and views[1] == (0, 1) and views[-1] == (8, 8)
        assert len(list(lf.side_views())) == 80
        assert lf.center not in list(lf.side_views())
        assert lf.baseline((4, 4)) == (0, 0)
        assert lf.baseline((0, 8)) == (-4, 4)


class TestGetView:
    def test_center_view(self):
        lf = random_lf((9, 9, 4, 5, 3))
        np.testing.assert_array_equal(get_view(lf, (4, 4)), lf.data[4, 4])
        np.testing.assert_array_equal(lf.center_view(), lf.data[4, 4])

    def test_corner_view_shape(self):
        lf = random_lf((9, 9, 4, 5, 3))
        assert get_view(lf, AngularCoord(0, 0)).shape == (4, 5, 3)

    @pytest.mark.parametrize("a", [(9, 0), (0, 9), (-1, 0)])
    def test_out_of_bounds(self, a):
        lf = random_lf((9, 9, 2, 2, 1))
        with pytest.raises(IndexError):
            get_view(lf, a)

    def test_center_pixels_match_tensor_exhaustively(self, small_lf):
        view = get_view(small_lf, small_lf.center)
        H, W = small_lf.spatial_shape
        for y in range(H):
            for x in range(W):
                np.testing.assert_array_equal(view[y, x], small_lf.data[1, 1, y, x, :])


class TestEpiMacpi:
    def test_shapes(self):
        lf = random_lf((9, 9, 16, 16, 1))
        assert extract_epi(lf, v=4, y=3).shape == (9, 16, 1)
        assert extract_epi(lf, u=4, x=3).shape == (9, 16, 1)
        assert extract_macpi(lf, 2, 3).shape == (9, 9, 1)

    def test_epi_and_macpi_match_slicing_brute_force(self, small_lf):
        d = small_lf.data
        for v in range(3):
            for y in range(4):
                np.testing.assert_array_equal(extract_epi(small_lf, v=v, y=y), d[:, v, y, :, :])
        for u in range(3):
            for x in range(4):
                np.testing.assert_array_equal(extract_epi(small_lf, u=u, x=x), d[u, :, :, x, :])
        for y in range(4):
            for x in range(4):
                np.testing.assert_array_equal(extract_macpi(small_lf, x, y), d[:, :, y, x, :])

    def test_bounds(self, small_lf):
        with pytest.raises(IndexError):
            extract_epi(small_lf, v=3, y=0)
        with pytest.raises(IndexError):
            extract_epi(small_lf, u=0, x=4)
        with pytest.raises(IndexError):
            extract_macpi(small_lf, 4, 0)

    def test_epi_needs_exactly_one_pair(self, small_lf):
        with pytest.raises((TypeError, ValueError)):
            extract_epi(small_lf, v=0)

    def test_zero_disparity_epi_rows_identical(self):
        scene = generate_lf(SceneSpec([Layer("noise", 0.0)], angular=(5, 5), size=(16, 16)))
        epi = extract_epi(scene.lf, v=2, y=8)
        for row in epi:
            np.testing.assert_array_equal(row, epi[0])

    def test_epi_rows_are_shifted_texture(self):
        # ramp texture is linear in x, so a shift of d*du is an additive offset
        d = 1.0
        scene = generate_lf(SceneSpec([Layer("ramp", d)], angular=(5, 5), size=(32, 32)))
        epi = extract_epi(scene.lf, v=2, y=16)[..., 0].astype(np.float64)
        center = epi[2]
        for u in range(5):
            du = u - 2
            shift = int(d * du)
            xs = np.arange(4, 28)
            np.testing.assert_allclose(epi[u, xs], center[xs - shift], atol=1e-6)

    def test_refocused_macpi_is_constant(self):
        d = 0.5
        scene = generate_lf(SceneSpec([Layer("ramp", d)], angular=(5, 5), size=(32, 32)))
        lf = scene.lf
        refocused = np.empty_like(lf.data)
        for a in lf.views():
            refocused[a] = warp_view(lf.data[a], lf.baseline(a), d).image
        patch = refocused[:, :, 16, 16, :]
        assert patch.std() < 1e-6

    def test_constant_lf_macpi_constant(self):
        lf = LightField(np.full((5, 5, 6, 6, 1), 0.3, dtype=np.float32))
        assert np.ptp(extract_macpi(lf, 2, 2)) == 0


def test_baselines_sum_to_zero():
    for U, V in [(1, 3), (3, 3), (5, 9), (9, 9)]:
        b = baselines(random_lf((U, V, 1, 1, 1)))
        assert b.shape == (U, V, 2)
        np.testing.assert_array_equal(b.sum(axis=(0, 1)), [0, 0])


class TestDisparityMap:
    def test_valid_defaults_to_finite(self):
        d = DisparityMap(np.array([[0.0, np.nan], [np.inf, 1.0]]))
        np.testing.assert_array_equal(d.valid, [[True, False], [False, True]])

    def test_explicit_mask_anded_with_finite(self):
        d = DisparityMap(np.array([[0.0, np.nan]]), valid=np.array([[False, True]]))
        assert not d.valid.any()

    def test_filled(self):
        d = DisparityMap(np.array([[1.0, 2.0]]), valid=np.array([[True, False]]))
        out = d.filled()
        assert out[0, 0] == 1.0 and np.isnan(out[0, 1])

    def test_constant(self):
        d = DisparityMap.constant(0.25, (3, 4))
        assert d.shape == (3, 4) and np.all(d.values == 0.25) and d.valid.all()
