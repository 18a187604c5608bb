"""scikit-learn style wrappers around the functional pipeline."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .cascade import CascadeConfig, CascadeResult, derive_refined_grid, run_pipeline
from .costvolume import SamplingGrid, extract_features
from .metrics import mse100
from .validation import ConfigError, check_disparity, check_light_field

__all__ = ["CascadeDisparityEstimator", "SubApertureFeatures"]


class SubApertureFeatures(TransformerMixin, BaseEstimator):
    """Per-view matching features: intensities plus optional x/y gradients.

    Parameters
    ----------
    gradients : bool, default=True
        Append central-difference gradient channels.
    """

    def __init__(self, gradients=True):
        self.gradients = gradients

    def fit(self, X, y=None):
        lf = check_light_field(X)
        self.n_channels_in_ = lf.channels
        self.n_features_out_ = lf.channels * (3 if self.gradients else 1)
        return self

    def transform(self, X):
        """Return features of shape ``(U, V, H, W, F)``."""
        check_is_fitted(self, "n_features_out_")
        lf = check_light_field(X)
        if lf.channels != self.n_channels_in_:
            raise ValueError(
                f"X has {lf.channels} channels, but the transformer was fitted on {self.n_channels_in_}"
            )
        return extract_features(lf, self.gradients)


class CascadeDisparityEstimator(BaseEstimator):
    """Occlusion-aware two-stage disparity estimator for light fields.

    ``fit`` validates the hyperparameters against a light field and fixes the
    sampling grids; ``predict`` runs the coarse sweep, builds occlusion maps
    from the coarse result and regresses the refined disparity.

    Parameters
    ----------
    coarse_range : tuple of float, default=(-4.0, 4.0)
    coarse_interval : float, default=0.25
    range_decay : float, default=0.125
        Refined range as a fraction of the coarse range.
    interval_decay : float, default=0.5
        Refined interval as a fraction of the coarse interval.
    refined_range, refined_interval : optional
        Explicit residual grid, overriding the decay factors.
    temperature : float, default=0.1
    aggregation_window : int, default=9
    occlusion : bool, default=True
    gradient_features : bool, default=True
    cost_normalization : {"range", "none"}, default="range"
    n_jobs : int, optional
        Threads per sweep. Results do not depend on it.

    Attributes
    ----------
    config_ : CascadeConfig
    coarse_grid_, refined_grid_ : SamplingGrid
    n_slices_ : tuple of int
        Coarse and refined sweep slice counts.
    angular_shape_, spatial_shape_ : tuple of int
    """

    def __init__(
        self,
        coarse_range=(-4.0, 4.0),
        coarse_interval=0.25,
        range_decay=0.125,
        interval_decay=0.5,
        refined_range=None,
        refined_interval=None,
        temperature=0.1,
        aggregation_window=9,
        occlusion=True,
        gradient_features=True,
        cost_normalization="range",
        n_jobs=None,
    ):
        self.coarse_range = coarse_range
        self.coarse_interval = coarse_interval
        self.range_decay = range_decay
        self.interval_decay = interval_decay
        self.refined_range = refined_range
        self.refined_interval = refined_interval
        self.temperature = temperature
        self.aggregation_window = aggregation_window
        self.occlusion = occlusion
        self.gradient_features = gradient_features
        self.cost_normalization = cost_normalization
        self.n_jobs = n_jobs

    @classmethod
    def from_config(cls, cfg: CascadeConfig, **kwargs) -> "CascadeDisparityEstimator":
        refined = cfg.refined_grid
        return cls(
            coarse_range=(cfg.coarse_grid.d_min, cfg.coarse_grid.d_max),
            coarse_interval=cfg.coarse_grid.interval,
            range_decay=cfg.range_decay,
            interval_decay=cfg.interval_decay,
            refined_range=None if refined is None else (refined.d_min, refined.d_max),
            refined_interval=None if refined is None else refined.interval,
            temperature=cfg.temperature,
            aggregation_window=cfg.aggregation_window,
            occlusion=cfg.occlusion_enabled,
            gradient_features=cfg.gradient_features,
            cost_normalization=cfg.cost_normalization,
            **kwargs,
        )

    def _make_config(self) -> CascadeConfig:
        lo, hi = self.coarse_range
        refined = None
        if (self.refined_range is None) != (self.refined_interval is None):
            raise ConfigError("refined_range and refined_interval must be given together")
        if self.refined_range is not None:
            refined = SamplingGrid(*self.refined_range, self.refined_interval)
        return CascadeConfig(
            coarse_grid=SamplingGrid(lo, hi, self.coarse_interval),
            range_decay=self.range_decay,
            interval_decay=self.interval_decay,
            refined_grid=refined,
            temperature=self.temperature,
            aggregation_window=self.aggregation_window,
            occlusion_enabled=bool(self.occlusion),
            gradient_features=bool(self.gradient_features),
            cost_normalization=self.cost_normalization,
        )

    def fit(self, X, y=None):
        """Validate parameters against light field ``X``.

        Parameters
        ----------
        X : LightField or array-like of shape (U, V, H, W[, C])
        y : ignored

        Returns
        -------
        self
        """
        lf = check_light_field(X)
        if lf.n_views < 2:
            raise ValueError("a light field with at least one side view is required")
        self.config_ = self._make_config()
        self.coarse_grid_ = self.config_.coarse_grid
        self.refined_grid_ = derive_refined_grid(self.config_)
        self.n_slices_ = (self.coarse_grid_.count, self.refined_grid_.count)
        self.angular_shape_ = lf.angular_shape
        self.spatial_shape_ = lf.spatial_shape
        return self

    def estimate(self, X, occlusion_disparity=None, timings=None) -> CascadeResult:
        """Run the full cascade and return coarse, refined and occlusion results."""
        check_is_fitted(self, "config_")
        lf = check_light_field(X)
        if lf.angular_shape != self.angular_shape_:
            raise ValueError(
                f"X has angular shape {lf.angular_shape}, fitted on {self.angular_shape_}"
            )
        return run_pipeline(
            lf, self.config_, occlusion_disparity=occlusion_disparity, n_jobs=self.n_jobs, timings=timings
        )

    def predict(self, X):
        """Refined disparity of the center view, ``(H, W)``; NaN where invalid."""
        return self.estimate(X).refined.filled(np.nan)

    def fit_predict(self, X, y=None):
        return self.fit(X).predict(X)

    def score(self, X, y):
        """Negative MSE x 100 of the refined disparity against ground truth ``y``."""
        pred = self.estimate(X).refined
        gt = check_disparity(y, pred.shape)
        return -mse100(pred, gt)
