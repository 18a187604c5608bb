"""Input validation helpers shared by the estimator API and the functional API."""

from __future__ import annotations

import numbers

import numpy as np

from .lightfield import DisparityMap, LightField


class ConfigError(ValueError):
    """Invalid pipeline configuration."""


def check_light_field(X) -> LightField:
    """Coerce ``X`` to a :class:`LightField`.

    Accepts an existing light field or an array-like of shape
    ``(U, V, H, W)`` / ``(U, V, H, W, C)``; uint8 input is scaled by 1/255.
    """
    if isinstance(X, LightField):
        return X
    return LightField(np.asarray(X))


def check_disparity(disp, shape=None) -> DisparityMap:
    """Coerce ``disp`` to a :class:`DisparityMap`, optionally checking its shape."""
    if not isinstance(disp, DisparityMap):
        disp = DisparityMap(np.asarray(disp, dtype=np.float64))
    if shape is not None and tuple(disp.shape) != tuple(shape):
        raise ValueError(f"disparity map shape {disp.shape} does not match {tuple(shape)}")
    return disp


def check_positive(value, name: str) -> float:
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ConfigError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_odd_window(window, name: str = "window") -> int:
    if isinstance(window, bool) or not isinstance(window, numbers.Integral):
        raise ValueError(f"{name} must be an odd integer >= 1, got {window!r}")
    if window < 1 or window % 2 == 0:
        raise ValueError(f"{name} must be an odd integer >= 1, got {window}")
    return int(window)


def check_decay(value, name: str) -> float:
    if not isinstance(value, numbers.Real) or not (0.0 < float(value) < 1.0):
        raise ConfigError(f"{name} must lie strictly between 0 and 1, got {value!r}")
    return float(value)
