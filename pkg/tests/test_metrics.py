import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lfcascade.lightfield import DisparityMap
from lfcascade.metrics import (
    EvalResult,
    EvaluationError,
    abs_errors,
    badpix,
    error_map_rgb,
    evaluate,
    mse100,
    parse_record,
    q25,
)

ERRORS = np.array([[0.00, 0.05, 0.08, 0.20]])
ZERO = np.zeros((1, 4))


class TestFixtures:
    def test_badpix(self):
        assert badpix(ERRORS, ZERO, 0.07) == 50.0
        assert badpix(ERRORS, ZERO, 0.03) == 75.0
        assert badpix(ZERO, ZERO, 0.01) == 0.0

    def test_badpix_is_strict(self):
        assert badpix(np.array([[0.5, 0.0]]), np.zeros((1, 2)), 0.5) == 0.0

    def test_mse100(self):
        assert mse100(ZERO, ZERO) == 0.0
        assert mse100(np.full((3, 3), 0.1), np.zeros((3, 3))) == pytest.approx(1.0)
        assert mse100(np.array([[0.1, 0.3]]), np.zeros((1, 2))) == pytest.approx(5.0)

    def test_q25(self):
        assert q25(ZERO, ZERO) == 0.0
        assert q25(np.array([[0.01, 0.02, 0.03, 0.04]]), ZERO) == pytest.approx(1.0)
        assert q25(np.full((2, 4), 0.05), np.zeros((2, 4))) == pytest.approx(5.0)

    def test_q25_nearest_rank(self):
        # n = 5: rank ceil(1.25) = 2 -> second smallest
        assert q25(np.array([[0.5, 0.1, 0.4, 0.2, 0.3]]), np.zeros((1, 5))) == pytest.approx(20.0)

    def test_q25_needs_four_pixels(self):
        with pytest.raises(EvaluationError):
            q25(np.zeros((1, 3)), np.zeros((1, 3)))

    def test_signed_errors(self):
        assert badpix(np.array([[-0.1, 0.1]]), np.zeros((1, 2)), 0.07) == 100.0


class TestRegion:
    def test_invalid_pixels_excluded(self):
        pred = DisparityMap(np.array([[0.0, 9.0]]), valid=np.array([[True, False]]))
        gt = DisparityMap(np.array([[np.nan, 0.0]]))
        with pytest.raises(EvaluationError):
            badpix(pred, gt, 0.07)
        assert abs_errors(pred, DisparityMap(np.zeros((1, 2)))).tolist() == [0.0]

    def test_mask_and_border(self):
        pred = np.ones((6, 6))
        pred[2:4, 2:4] = 0.0
        gt = np.zeros((6, 6))
        assert badpix(pred, gt, 0.07, border=2) == 0.0
        mask = np.zeros((6, 6), bool)
        mask[0, 0] = True
        assert badpix(pred, gt, 0.07, mask=mask) == 100.0

    def test_empty_region(self):
        with pytest.raises(EvaluationError):
            mse100(np.zeros((2, 2)), np.zeros((2, 2)), border=1)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            badpix(np.zeros((2, 2)), np.zeros((2, 3)), 0.07)

    def test_bad_eps(self):
        with pytest.raises(ValueError):
            badpix(ZERO, ZERO, 0.0)


class TestEvaluate:
    def test_identical_maps(self):
        r = evaluate(np.zeros((4, 4)), np.zeros((4, 4)))
        assert r.badpix_001 == r.badpix_003 == r.badpix_007 == r.mse100 == r.q25 == 0.0
        assert r.pixel_count == 16

    def test_fixture(self):
        r = evaluate(ERRORS, ZERO)
        assert r.badpix_007 == 50.0 and r.badpix_003 == 75.0

    def test_extra_thresholds_keep_defaults(self):
        r = evaluate(ERRORS, ZERO, eps=[0.1])
        assert sorted(r.badpix) == [0.01, 0.03, 0.07, 0.1]

    def test_record_round_trip(self):
        r = evaluate(ERRORS, ZERO, scene="demo")
        line = r.to_record()
        assert "\n" not in line
        rec = parse_record(line)
        assert rec["scene"] == "demo"
        assert rec["badpix_0.07"] == "50.000000"
        assert rec["pixel_count"] == "4"
        assert float(rec["mse100"]) == pytest.approx(r.mse100, abs=1e-6)

    def test_record_extra(self):
        r = EvalResult({0.07: 1.0}, 2.0, 3.0, 10, extra={"runtime": 0.5})
        assert "runtime=0.500000" in r.to_record()


def test_error_map_colors():
    pred = DisparityMap(np.array([[0.0, 0.5, 0.0]]), valid=np.array([[True, True, False]]))
    img = error_map_rgb(pred, np.zeros((1, 3)), 0.07)
    assert img.dtype == np.uint8
    assert img[0, 0].tolist() == [255, 255, 255]
    assert img[0, 1].tolist() == [255, 0, 0]
    assert img[0, 2].tolist() == [0, 0, 0]


maps = arrays(np.float64, (5, 6), elements=st.floats(-2, 2))


@settings(max_examples=200, deadline=None)
@given(pred=maps, gt=maps, e1=st.floats(1e-4, 1), e2=st.floats(1e-4, 1))
def test_badpix_monotone_in_eps(pred, gt, e1, e2):
    lo, hi = sorted((e1, e2))
    assert badpix(pred, gt, lo) >= badpix(pred, gt, hi)


@settings(max_examples=100, deadline=None)
@given(pred=maps, gt=maps, seed=st.integers(0, 2**16))
def test_permutation_invariance(pred, gt, seed):
    perm = np.random.default_rng(seed).permutation(pred.size)
    p2 = pred.ravel()[perm].reshape(pred.shape)
    g2 = gt.ravel()[perm].reshape(gt.shape)
    a, b = evaluate(pred, gt), evaluate(p2, g2)
    assert a.badpix == b.badpix and a.q25 == b.q25
    assert a.mse100 == pytest.approx(b.mse100, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(pred=maps, gt=maps)
def test_q25_bounds(pred, gt):
    err = np.abs(pred - gt)
    q = q25(pred, gt)
    assert 0 <= q <= 100 * err.max()
    assert (q == 0) == (np.count_nonzero(err == 0) >= err.size / 4)
