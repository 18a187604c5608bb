"""Plane-sweep cost volumes built by shift-and-compare over all side views.

The matching cost of a candidate disparity at a pixel is the mean absolute
difference between the center-view features and the warped side-view
features, averaged over channels and over the views whose warp stayed inside
the frame. The refined volume additionally scales each view's cost by its
occlusion weight.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.ndimage import uniform_filter

from .lightfield import LightField
from .occlusion import OcclusionSet
from .validation import ConfigError, check_disparity, check_odd_window
from .warp import sample_map, shift_image

#: Cost assigned to cells that no side view could observe.
COST_SENTINEL = 1.0
#: Support assigned to such cells; keeps support strictly positive.
MIN_SUPPORT = 1e-6


@dataclass(frozen=True)
class SamplingGrid:
    """Evenly spaced candidate disparities ``d_min + k * interval``."""

    d_min: float
    d_max: float
    interval: float

    def __post_init__(self):
        for name in ("d_min", "d_max", "interval"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ConfigError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, float(value))
        if self.interval <= 0:
            raise ConfigError(f"interval must be positive, got {self.interval}")
        if self.d_max < self.d_min:
            raise ConfigError(f"empty disparity range [{self.d_min}, {self.d_max}]")
        steps = (self.d_max - self.d_min) / self.interval
        if abs(steps - round(steps)) * self.interval > 1e-9:
            raise ConfigError(
                f"range [{self.d_min:g}, {self.d_max:g}] is not a multiple of interval {self.interval:g}"
            )

    @classmethod
    def symmetric(cls, half_extent: float, interval: float) -> "SamplingGrid":
        return cls(-half_extent, half_extent, interval)

    @property
    def count(self) -> int:
        return int(math.floor((self.d_max - self.d_min) / self.interval + 0.5)) + 1

    @cached_property
    def samples(self) -> np.ndarray:
        samples = self.d_min + np.arange(self.count) * self.interval
        samples.setflags(write=False)
        return samples

    def __len__(self) -> int:
        return self.count


@dataclass(frozen=True, eq=False)
class CostVolume:
    """Matching costs ``(D, H, W)`` with the fraction of views backing each cell."""

    costs: np.ndarray
    grid: SamplingGrid
    support: np.ndarray

    def __post_init__(self):
        if self.costs.ndim != 3 or self.costs.shape[0] != self.grid.count:
            raise ValueError(
                f"cost array {self.costs.shape} does not match {self.grid.count} grid samples"
            )
        if self.support.shape != self.costs.shape:
            raise ValueError("support shape does not match costs")

    @property
    def depth(self) -> int:
        return self.costs.shape[0]

    @property
    def spatial_shape(self) -> tuple[int, int]:
        return self.costs.shape[1:]


def extract_features(lf: LightField, gradients: bool = True) -> np.ndarray:
    """Per-view feature maps of shape ``(U, V, H, W, F)``.

    Features are the intensity channels followed, when ``gradients`` is set, by
    central-difference ``d/dx`` and ``d/dy`` of every channel (one-sided at the
    image border).
    """
    data = lf.data.astype(np.float64)
    if not gradients:
        return data
    H, W = lf.spatial_shape
    gx = np.gradient(data, axis=3) if W > 1 else np.zeros_like(data)
    gy = np.gradient(data, axis=2) if H > 1 else np.zeros_like(data)
    return np.concatenate([data, gx, gy], axis=-1)


def _check_features(feat) -> np.ndarray:
    feat = np.asarray(feat, dtype=np.float64)
    if feat.ndim != 5:
        raise ValueError(f"features must have shape (U, V, H, W, F), got {feat.shape}")
    U, V = feat.shape[:2]
    if U % 2 == 0 or V % 2 == 0:
        raise ValueError(f"angular resolution must be odd, got {U}x{V}")
    if U * V < 2:
        raise ValueError("at least one side view is required to build a cost volume")
    return feat


def _side_views(U: int, V: int):
    uc, vc = (U - 1) // 2, (V - 1) // 2
    return [
        ((u, v), float(u - uc), float(v - vc))
        for u in range(U)
        for v in range(V)
        if (u, v) != (uc, vc)
    ]


def _finish_slice(acc, norm, n_side, n_channels):
    cost = np.full(acc.shape, COST_SENTINEL)
    observed = norm > 0
    cost[observed] = acc[observed] / (norm[observed] * n_channels)
    support = np.where(observed, norm / n_side, MIN_SUPPORT)
    return cost, support


def _run_slices(fn, count, n_jobs):
    if n_jobs is None or n_jobs == 1 or count < 2:
        return [fn(k) for k in range(count)]
    workers = count if n_jobs == -1 else min(int(n_jobs), count)
    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        return list(pool.map(fn, range(count)))


def build_coarse_volume(feat, grid: SamplingGrid, n_jobs=None) -> CostVolume:
    """Sweep every grid disparity as a constant shift of all side views."""
    feat = _check_features(feat)
    if grid.count < 1:
        raise ValueError("sampling grid is empty")
    U, V, H, W, F = feat.shape
    views = _side_views(U, V)
    center = feat[(U - 1) // 2, (V - 1) // 2]

    def slice_k(k):
        d = grid.samples[k]
        acc = np.zeros((H, W))
        count = np.zeros((H, W))
        for a, du, dv in views:
            warped = shift_image(feat[a], d * du, d * dv)
            ad = np.abs(center - warped.image).sum(axis=-1)
            acc += np.where(warped.valid, ad, 0.0)
            count += warped.valid
        return _finish_slice(acc, count, len(views), F)

    slices = _run_slices(slice_k, grid.count, n_jobs)
    costs = np.stack([c for c, _ in slices])
    support = np.stack([s for _, s in slices])
    return CostVolume(costs, grid, support)


def build_refined_volume(
    feat, coarse_disp, residual_grid: SamplingGrid, occ: OcclusionSet | None = None, n_jobs=None
) -> CostVolume:
    """Sweep residual disparities around a per-pixel coarse estimate.

    Each side view is warped by ``coarse + r`` for every residual ``r`` and its
    absolute-difference cost is multiplied by the view's occlusion weight before
    accumulation; costs are normalized by the summed weights of the views that
    stayed in frame. ``occ=None`` is equivalent to all weights equal to one.
    """
    feat = _check_features(feat)
    U, V, H, W, F = feat.shape
    coarse = check_disparity(coarse_disp, (H, W))
    if occ is None:
        occ = OcclusionSet.unweighted((U, V), (H, W))
    if occ.maps.shape != (U, V, H, W):
        raise ValueError(f"occlusion set {occ.maps.shape} does not match features {(U, V, H, W)}")
    base = np.where(coarse.valid, coarse.values, 0.0)
    views = _side_views(U, V)
    center = feat[(U - 1) // 2, (V - 1) // 2]
    ys, xs = np.mgrid[0:H, 0:W].astype(np.float64)

    def slice_k(k):
        disp = base + residual_grid.samples[k]
        acc = np.zeros((H, W))
        norm = np.zeros((H, W))
        for a, du, dv in views:
            warped = sample_map(feat[a], xs + disp * du, ys + disp * dv)
            ad = np.abs(center - warped.image).sum(axis=-1)
            w = np.where(warped.valid, occ.weights[a], 0.0)
            acc += w * ad
            norm += w
        return _finish_slice(acc, norm, len(views), F)

    slices = _run_slices(slice_k, residual_grid.count, n_jobs)
    costs = np.stack([c for c, _ in slices])
    support = np.stack([s for _, s in slices])
    return CostVolume(costs, residual_grid, support)


def aggregate(vol: CostVolume, window: int) -> CostVolume:
    """Support-weighted box filtering of every disparity slice.

    ``window=1`` returns ``vol`` itself.
    """
    window = check_odd_window(window)
    if window == 1:
        return vol
    size = (1, window, window)
    weighted = uniform_filter(vol.costs * vol.support, size=size, mode="constant", cval=0.0)
    support = uniform_filter(vol.support, size=size, mode="constant", cval=0.0)
    costs = weighted / support
    return CostVolume(costs, vol.grid, support)


def dump_volume(vol: CostVolume, path) -> None:
    """Write costs as ``LFCV <D> <H> <W>\\n`` followed by little-endian float32, slice-major."""
    D, H, W = vol.costs.shape
    with open(path, "wb") as fh:
        fh.write(f"LFCV {D} {H} {W}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(vol.costs, dtype="<f4").tobytes())


def load_volume(path) -> np.ndarray:
    """Read a raw volume dump back into a ``(D, H, W)`` float32 array."""
    with open(path, "rb") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 4 or parts[0] != b"LFCV":
            raise ValueError(f"{path}: not a cost-volume dump (header {header[:32]!r})")
        D, H, W = (int(p) for p in parts[1:])
        payload = fh.read()
    expected = D * H * W * 4
    if len(payload) != expected:
        raise ValueError(
            f"{path}: payload at byte {len(header)} has {len(payload)} bytes, expected {expected}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(D, H, W).copy()
