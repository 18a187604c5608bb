"""Disparity error metrics: BadPix, MSE x 100 and Q25, plus error-map rendering."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lightfield import DisparityMap

DEFAULT_THRESHOLDS = (0.01, 0.03, 0.07)


class EvaluationError(ValueError):
    """The evaluation region is empty or too small."""


def _as_map(disp) -> DisparityMap:
    return disp if isinstance(disp, DisparityMap) else DisparityMap(np.asarray(disp, dtype=np.float64))


def abs_errors(pred, gt, mask=None, border: int = 0) -> np.ndarray:
    """Flat array of ``|pred - gt|`` over pixels valid in both maps and inside ``mask``."""
    pred, gt = _as_map(pred), _as_map(gt)
    if pred.shape != gt.shape:
        raise ValueError(f"prediction {pred.shape} and ground truth {gt.shape} differ in shape")
    region = pred.valid & gt.valid
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != gt.shape:
            raise ValueError("evaluation mask does not match the disparity shape")
        region &= mask
    if border:
        H, W = gt.shape
        crop = np.zeros_like(region)
        crop[border : H - border, border : W - border] = True
        region &= crop
    return np.abs(pred.values - gt.values)[region]


def _nonempty(err: np.ndarray) -> np.ndarray:
    if err.size == 0:
        raise EvaluationError("no pixels to evaluate")
    return err


def badpix(pred, gt, eps: float, mask=None, border: int = 0) -> float:
    """Percentage of pixels whose absolute error strictly exceeds ``eps``."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    err = _nonempty(abs_errors(pred, gt, mask, border))
    return 100.0 * np.count_nonzero(err > eps) / err.size


def mse100(pred, gt, mask=None, border: int = 0) -> float:
    err = _nonempty(abs_errors(pred, gt, mask, border))
    return 100.0 * float(np.mean(err**2))


def q25(pred, gt, mask=None, border: int = 0) -> float:
    """100 x the 25th percentile of absolute errors, nearest-rank convention."""
    err = abs_errors(pred, gt, mask, border)
    if err.size < 4:
        raise EvaluationError(f"Q25 needs at least 4 pixels, got {err.size}")
    rank = math.ceil(0.25 * err.size)
    return 100.0 * float(np.partition(err, rank - 1)[rank - 1])


@dataclass
class EvalResult:
    badpix: dict[float, float]
    mse100: float
    q25: float
    pixel_count: int
    scene: str = ""
    extra: dict[str, float] = field(default_factory=dict)

    @property
    def badpix_001(self) -> float:
        return self.badpix[0.01]

    @property
    def badpix_003(self) -> float:
        return self.badpix[0.03]

    @property
    def badpix_007(self) -> float:
        return self.badpix[0.07]

    def to_record(self) -> str:
        """One ``key=value`` line; numbers use fixed 6-decimal formatting."""
        fields = []
        if self.scene:
            fields.append(f"scene={self.scene}")
        for eps in sorted(self.badpix):
            fields.append(f"badpix_{eps:g}={self.badpix[eps]:.6f}")
        fields.append(f"mse100={self.mse100:.6f}")
        fields.append(f"q25={self.q25:.6f}")
        for key, value in self.extra.items():
            fields.append(f"{key}={value:.6f}")
        fields.append(f"pixel_count={self.pixel_count}")
        return " ".join(fields)


def parse_record(line: str) -> dict[str, str]:
    """Inverse of :meth:`EvalResult.to_record` (values stay strings)."""
    return dict(item.split("=", 1) for item in line.split())


def evaluate(pred, gt, eps=DEFAULT_THRESHOLDS, mask=None, border: int = 0, scene: str = "") -> EvalResult:
    """All metrics at once. The three standard thresholds are always included."""
    thresholds = sorted(set(float(e) for e in eps) | set(DEFAULT_THRESHOLDS))
    err = _nonempty(abs_errors(pred, gt, mask, border))
    return EvalResult(
        badpix={e: badpix(pred, gt, e, mask, border) for e in thresholds},
        mse100=mse100(pred, gt, mask, border),
        q25=q25(pred, gt, mask, border),
        pixel_count=int(err.size),
        scene=scene,
    )


def error_map_rgb(pred, gt, eps: float = 0.07) -> np.ndarray:
    """uint8 RGB image: red where ``|err| > eps``, white elsewhere, black where invalid."""
    pred, gt = _as_map(pred), _as_map(gt)
    if pred.shape != gt.shape:
        raise ValueError(f"prediction {pred.shape} and ground truth {gt.shape} differ in shape")
    valid = pred.valid & gt.valid
    bad = valid & (np.abs(pred.values - gt.values) > eps)
    img = np.zeros(gt.shape + (3,), dtype=np.uint8)
    img[valid] = 255
    img[bad] = (255, 0, 0)
    return img
