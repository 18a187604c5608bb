"""Sub-pixel bilinear warping of side views toward the center view.

A pixel ``(x, y)`` of the warped view samples the source view at
``(x + d * du, y + d * dv)``. A sample is valid only when that position lies
inside ``[0, W-1] x [0, H-1]``; invalid pixels hold 0 and must be excluded by
callers. Edge clamping is deliberately not offered.
"""

from __future__ import annotations

import math
import numbers
from typing import NamedTuple

import numpy as np

from .lightfield import DisparityMap


class WarpedView(NamedTuple):
    image: np.ndarray
    valid: np.ndarray


def _taps(coord: np.ndarray, size: int):
    # Lower tap is clamped to size-2 so that coord == size-1 still interpolates
    # with weight exactly 1 on the last pixel.
    lo = np.clip(np.floor(coord), 0, max(size - 2, 0)).astype(np.intp)
    hi = np.minimum(lo + 1, size - 1)
    frac = coord - lo
    valid = (coord >= 0) & (coord <= size - 1)
    return lo, hi, frac, valid


def _blend(a, b, frac):
    return a * (1.0 - frac) + b * frac


def bilinear_sample(img: np.ndarray, x: float, y: float):
    """Sample ``img`` (H x W x C) at a real position.

    Returns ``(value, valid)`` where ``value`` is a length-C vector. Out-of-range
    positions return zeros with ``valid=False``.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        img = img[..., np.newaxis]
    H, W = img.shape[:2]
    x0, x1, fx, vx = _taps(np.asarray(float(x)), W)
    y0, y1, fy, vy = _taps(np.asarray(float(y)), H)
    if not (vx and vy):
        return np.zeros(img.shape[2]), False
    top = _blend(img[y0, x0], img[y0, x1], fx)
    bottom = _blend(img[y1, x0], img[y1, x1], fx)
    return _blend(top, bottom, fy), True


def sample_map(img: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> WarpedView:
    """Bilinearly sample ``img`` at per-pixel positions ``xs``, ``ys`` (same shape)."""
    H, W = img.shape[:2]
    x0, x1, fx, vx = _taps(xs, W)
    y0, y1, fy, vy = _taps(ys, H)
    fx = fx[..., np.newaxis]
    fy = fy[..., np.newaxis]
    top = _blend(img[y0, x0], img[y0, x1], fx)
    bottom = _blend(img[y1, x0], img[y1, x1], fx)
    out = _blend(top, bottom, fy)
    valid = vx & vy
    out[~valid] = 0.0
    return WarpedView(out, valid)


def shift_image(img: np.ndarray, sx: float, sy: float) -> WarpedView:
    """Warp by a constant offset: output ``(x, y)`` samples ``img`` at ``(x + sx, y + sy)``.

    Separable equivalent of :func:`sample_map` with a constant offset field; the
    per-pixel arithmetic is identical, so both routes agree bit for bit.
    """
    H, W = img.shape[:2]
    x0, x1, fx, vx = _taps(np.arange(W) + sx, W)
    y0, y1, fy, vy = _taps(np.arange(H) + sy, H)
    rows0 = img[y0]
    rows1 = img[y1]
    fx = fx[np.newaxis, :, np.newaxis]
    fy = fy[:, np.newaxis, np.newaxis]
    top = _blend(rows0[:, x0], rows0[:, x1], fx)
    bottom = _blend(rows1[:, x0], rows1[:, x1], fx)
    out = _blend(top, bottom, fy)
    valid = vy[:, np.newaxis] & vx[np.newaxis, :]
    out[~valid] = 0.0
    return WarpedView(out, valid)


def warp_view(view: np.ndarray, baseline, disp) -> WarpedView:
    """Warp a side view toward the center view.

    Parameters
    ----------
    view : ndarray of shape (H, W) or (H, W, C)
        Source sub-aperture image (or feature map).
    baseline : Baseline or (du, dv)
        Offset of the source view from the center view.
    disp : float or DisparityMap or ndarray of shape (H, W)
        Constant or per-pixel disparity.

    Returns
    -------
    WarpedView
        ``image`` has the same shape as ``view``; ``valid`` is ``(H, W)``.
    """
    view = np.asarray(view)
    squeeze = view.ndim == 2
    img = view[..., np.newaxis] if squeeze else view
    H, W = img.shape[:2]
    du, dv = (float(b) for b in baseline)

    if isinstance(disp, numbers.Real):
        if not math.isfinite(disp):
            raise ValueError(f"disparity must be finite, got {disp}")
        const = float(disp)
    else:
        values = disp.values if isinstance(disp, DisparityMap) else np.asarray(disp, dtype=np.float64)
        if values.shape != (H, W):
            raise ValueError(f"disparity map shape {values.shape} does not match view {(H, W)}")
        if not np.all(np.isfinite(values)):
            raise ValueError("disparity map contains non-finite values")
        const = None

    if du == 0.0 and dv == 0.0:
        return WarpedView(np.array(view, copy=True), np.ones((H, W), dtype=bool))

    img = img.astype(np.float64, copy=False)
    if const is not None:
        warped = shift_image(img, const * du, const * dv)
    else:
        ys, xs = np.mgrid[0:H, 0:W].astype(np.float64)
        warped = sample_map(img, xs + values * du, ys + values * dv)
    if squeeze:
        return WarpedView(warped.image[..., 0], warped.valid)
    return warped
