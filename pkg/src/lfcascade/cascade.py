"""Two-stage coarse-to-fine disparity estimation.

The coarse stage sweeps the full disparity range at a large interval and
regresses a disparity per pixel with a softmax over negated costs. The refined
stage sweeps a narrow residual grid centered per pixel on the coarse result,
with side views down-weighted by their photo-consistency occlusion maps, and
adds the regressed residual back onto the coarse disparity.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .costvolume import (
    MIN_SUPPORT,
    CostVolume,
    SamplingGrid,
    aggregate,
    build_coarse_volume,
    build_refined_volume,
    extract_features,
)
from .lightfield import DisparityMap, LightField
from .occlusion import OcclusionSet, build_occlusion_set
from .validation import (
    ConfigError,
    check_decay,
    check_disparity,
    check_light_field,
    check_odd_window,
    check_positive,
)

COST_NORMALIZATIONS = ("range", "none")


@dataclass(frozen=True)
class CascadeConfig:
    """Hyperparameters of the two-stage cascade.

    ``refined_grid``, when given, overrides the grid derived from the decay
    factors. ``cost_normalization="range"`` rescales each pixel's costs to
    ``[0, 1]`` before the softmax so that ``temperature`` does not depend on
    texture contrast.
    """

    coarse_grid: SamplingGrid = field(default_factory=lambda: SamplingGrid(-4.0, 4.0, 0.25))
    range_decay: float = 1.0 / 8.0
    interval_decay: float = 1.0 / 2.0
    refined_grid: SamplingGrid | None = None
    temperature: float = 0.1
    aggregation_window: int = 9
    occlusion_enabled: bool = True
    gradient_features: bool = True
    cost_normalization: str = "range"

    def __post_init__(self):
        check_decay(self.range_decay, "range_decay")
        check_decay(self.interval_decay, "interval_decay")
        check_positive(self.temperature, "temperature")
        try:
            check_odd_window(self.aggregation_window, "aggregation_window")
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.cost_normalization not in COST_NORMALIZATIONS:
            raise ConfigError(
                f"cost_normalization must be one of {COST_NORMALIZATIONS}, got {self.cost_normalization!r}"
            )

    def with_options(self, **changes) -> "CascadeConfig":
        return replace(self, **changes)


def derive_refined_grid(cfg: CascadeConfig) -> SamplingGrid:
    """Residual grid for the refined stage.

    Range and interval shrink by the decay factors; the half-extent is snapped
    to a whole number of refined intervals (at least one).
    """
    if cfg.refined_grid is not None:
        return cfg.refined_grid
    check_decay(cfg.range_decay, "range_decay")
    check_decay(cfg.interval_decay, "interval_decay")
    coarse = cfg.coarse_grid
    interval = coarse.interval * cfg.interval_decay
    half_extent = (coarse.d_max - coarse.d_min) * cfg.range_decay / 2.0
    steps = max(1, int(round(half_extent / interval)))
    return SamplingGrid.symmetric(steps * interval, interval)


def slice_counts(cfg: CascadeConfig) -> tuple[int, int]:
    """Number of sweep slices of the coarse and refined stages."""
    return cfg.coarse_grid.count, derive_refined_grid(cfg).count


def softmax_weights(costs: np.ndarray, temperature: float, normalize: bool = True) -> np.ndarray:
    """Softmax of negated costs along axis 0."""
    costs = np.asarray(costs, dtype=np.float64)
    if normalize:
        lo = costs.min(axis=0)
        span = costs.max(axis=0) - lo
        costs = (costs - lo) / np.where(span > 0, span, 1.0)
    logits = -costs / temperature
    logits -= logits.max(axis=0)
    p = np.exp(logits)
    p /= p.sum(axis=0)
    return p


def regress_disparity(vol: CostVolume, temperature: float, normalize: bool = True) -> DisparityMap:
    """Expected disparity under ``softmax(-cost / temperature)`` per pixel.

    Pixels with no supported candidate are flagged invalid.
    """
    temperature = check_positive(temperature, "temperature")
    if not np.all(np.isfinite(vol.costs)):
        raise ValueError("cost volume contains non-finite values")
    samples = vol.grid.samples
    p = softmax_weights(vol.costs, temperature, normalize)
    values = np.tensordot(samples, p, axes=(0, 0))
    values = np.clip(values, samples[0], samples[-1])
    valid = (vol.support > MIN_SUPPORT).any(axis=0)
    return DisparityMap(values, valid)


def regress_residual(
    vol: CostVolume, coarse, temperature: float, normalize: bool = True
) -> DisparityMap:
    """Coarse disparity plus the residual regressed from a refined volume."""
    coarse = check_disparity(coarse)
    if tuple(coarse.shape) != tuple(vol.spatial_shape):
        raise ValueError(f"coarse map {coarse.shape} does not match volume {vol.spatial_shape}")
    residual = regress_disparity(vol, temperature, normalize)
    return DisparityMap(coarse.values + residual.values, coarse.valid & residual.valid)


class CascadeResult(NamedTuple):
    coarse: DisparityMap
    refined: DisparityMap
    occlusion: OcclusionSet


def estimate_coarse(lf: LightField, cfg: CascadeConfig, feat=None, n_jobs=None) -> DisparityMap:
    """Run the coarse stage only."""
    if feat is None:
        feat = extract_features(lf, cfg.gradient_features)
    vol = build_coarse_volume(feat, cfg.coarse_grid, n_jobs=n_jobs)
    vol = aggregate(vol, cfg.aggregation_window)
    return regress_disparity(vol, cfg.temperature, cfg.cost_normalization == "range")


def run_pipeline(
    lf,
    cfg: CascadeConfig | None = None,
    *,
    occlusion_disparity=None,
    n_jobs=None,
    timings: dict | None = None,
) -> CascadeResult:
    """Full coarse -> occlusion -> refined estimation.

    Parameters
    ----------
    lf : LightField or array-like
    cfg : CascadeConfig, optional
    occlusion_disparity : DisparityMap, optional
        Disparity used to build the occlusion maps instead of the coarse
        estimate (e.g. ground truth, for an upper-bound run).
    n_jobs : int, optional
        Worker threads per sweep; results do not depend on it.
    timings : dict, optional
        Filled with wall-clock seconds per stage.
    """
    lf = check_light_field(lf)
    cfg = CascadeConfig() if cfg is None else cfg
    normalize = cfg.cost_normalization == "range"
    refined_grid = derive_refined_grid(cfg)
    clock = {} if timings is None else timings

    t0 = time.perf_counter()
    feat = extract_features(lf, cfg.gradient_features)
    t1 = time.perf_counter()
    clock["features"] = t1 - t0

    coarse = estimate_coarse(lf, cfg, feat=feat, n_jobs=n_jobs)
    t2 = time.perf_counter()
    clock["coarse"] = t2 - t1

    if cfg.occlusion_enabled:
        source = coarse if occlusion_disparity is None else check_disparity(
            occlusion_disparity, lf.spatial_shape
        )
        occ = build_occlusion_set(lf, source)
    else:
        occ = OcclusionSet.unweighted(lf.angular_shape, lf.spatial_shape)
    t3 = time.perf_counter()
    clock["occlusion"] = t3 - t2

    vol = build_refined_volume(feat, coarse, refined_grid, occ, n_jobs=n_jobs)
    vol = aggregate(vol, cfg.aggregation_window)
    refined = regress_residual(vol, coarse, cfg.temperature, normalize)
    clock["refined"] = time.perf_counter() - t3
    return CascadeResult(coarse, refined, occ)
