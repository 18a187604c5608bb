"""Light-field data model and the canonical 2D slices (SAI, EPI, MacPI).

Tensors are stored in ``(u, v, y, x, c)`` order. Angular index ``u`` pairs with
the spatial ``x`` axis and ``v`` pairs with ``y``: a scene point at disparity
``d`` seen at ``(x, y)`` in the center view appears at
``(x + d * du, y + d * dv)`` in the view with baseline ``(du, dv)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np


class AngularCoord(NamedTuple):
    u: int
    v: int


class Baseline(NamedTuple):
    du: float
    dv: float


@dataclass(frozen=True, eq=False)
class LightField:
    """Immutable 4D light field with ``data`` of shape ``(U, V, H, W, C)``.

    Intensities are float32 in ``[0, 1]`` and both angular dimensions are odd
    so that a unique center view exists. The array is marked read-only.
    """

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim == 4:
            data = data[..., np.newaxis]
        if data.ndim != 5:
            raise ValueError(
                f"light field must have shape (U, V, H, W[, C]), got {data.shape}"
            )
        if np.issubdtype(data.dtype, np.integer):
            if data.dtype != np.uint8:
                raise ValueError(f"integer light fields must be uint8, got {data.dtype}")
            data = data.astype(np.float32) / np.float32(255.0)
        data = np.array(data, dtype=np.float32, copy=True)
        U, V, H, W, C = data.shape
        if U % 2 == 0 or V % 2 == 0:
            raise ValueError(f"angular resolution must be odd, got {U}x{V}")
        if min(H, W, C) < 1:
            raise ValueError(f"empty light field of shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("light field contains non-finite intensities")
        if data.min() < 0.0 or data.max() > 1.0:
            raise ValueError("intensities must be normalized to [0, 1]")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def angular_shape(self) -> tuple[int, int]:
        return self.data.shape[0], self.data.shape[1]

    @property
    def spatial_shape(self) -> tuple[int, int]:
        return self.data.shape[2], self.data.shape[3]

    @property
    def channels(self) -> int:
        return self.data.shape[4]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def center(self) -> AngularCoord:
        U, V = self.angular_shape
        return AngularCoord((U - 1) // 2, (V - 1) // 2)

    @property
    def n_views(self) -> int:
        U, V = self.angular_shape
        return U * V

    def baseline(self, a) -> Baseline:
        u, v = _check_coord(self, a)
        uc, vc = self.center
        return Baseline(float(u - uc), float(v - vc))

    def views(self) -> Iterator[AngularCoord]:
        """Iterate angular coordinates in row-major order (``u`` slow)."""
        U, V = self.angular_shape
        for u in range(U):
            for v in range(V):
                yield AngularCoord(u, v)

    def side_views(self) -> Iterator[AngularCoord]:
        c = self.center
        return (a for a in self.views() if a != c)

    def center_view(self) -> np.ndarray:
        return get_view(self, self.center)


def _check_coord(lf: LightField, a) -> AngularCoord:
    u, v = (int(i) for i in a)
    U, V = lf.angular_shape
    if not (0 <= u < U and 0 <= v < V):
        raise IndexError(f"angular index ({u}, {v}) out of bounds for {U}x{V} light field")
    return AngularCoord(u, v)


def get_view(lf: LightField, a) -> np.ndarray:
    """Return the sub-aperture image at angular coordinate ``a`` (H x W x C view)."""
    u, v = _check_coord(lf, a)
    return lf.data[u, v]


def extract_epi(lf: LightField, *, v=None, y=None, u=None, x=None) -> np.ndarray:
    """Extract an epipolar plane image.

    Fixing ``(v, y)`` gives the horizontal EPI of shape ``U x W x C``; fixing
    ``(u, x)`` gives the vertical EPI of shape ``V x H x C``.
    """
    U, V, H, W, _ = lf.shape
    if v is not None and y is not None and u is None and x is None:
        if not (0 <= v < V and 0 <= y < H):
            raise IndexError(f"EPI index (v={v}, y={y}) out of bounds")
        return lf.data[:, v, y, :, :]
    if u is not None and x is not None and v is None and y is None:
        if not (0 <= u < U and 0 <= x < W):
            raise IndexError(f"EPI index (u={u}, x={x}) out of bounds")
        return lf.data[u, :, :, x, :]
    raise ValueError("fix exactly one of the pairs (v, y) or (u, x)")


def extract_macpi(lf: LightField, x: int, y: int) -> np.ndarray:
    """Return the ``U x V x C`` angular patch (macro-pixel) at spatial ``(x, y)``."""
    H, W = lf.spatial_shape
    if not (0 <= x < W and 0 <= y < H):
        raise IndexError(f"spatial index ({x}, {y}) out of bounds for {W}x{H} views")
    return lf.data[:, :, y, x, :]


def baselines(lf: LightField) -> np.ndarray:
    """Array of shape ``(U, V, 2)`` holding ``(du, dv)`` for every view."""
    U, V = lf.angular_shape
    uc, vc = lf.center
    du, dv = np.meshgrid(np.arange(U) - uc, np.arange(V) - vc, indexing="ij")
    return np.stack([du, dv], axis=-1).astype(np.float64)


@dataclass(frozen=True, eq=False)
class DisparityMap:
    """Per-pixel disparity (pixels per unit angular baseline) with a validity mask."""

    values: np.ndarray
    valid: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError(f"disparity map must be 2D, got shape {values.shape}")
        if self.valid is None:
            valid = np.isfinite(values)
        else:
            valid = np.asarray(self.valid, dtype=bool)
            if valid.shape != values.shape:
                raise ValueError("validity mask shape does not match disparity values")
            valid = valid & np.isfinite(values)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid", valid)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @classmethod
    def constant(cls, value: float, shape) -> "DisparityMap":
        return cls(np.full(shape, float(value)))

    def filled(self, fill: float = np.nan) -> np.ndarray:
        """Values with invalid pixels replaced by ``fill``."""
        return np.where(self.valid, self.values, fill)
