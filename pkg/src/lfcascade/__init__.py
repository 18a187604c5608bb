"""Coarse-to-fine light field disparity estimation with occlusion-aware refinement."""

from .cascade import (
    CascadeConfig,
    CascadeResult,
    derive_refined_grid,
    estimate_coarse,
    regress_disparity,
    regress_residual,
    run_pipeline,
    slice_counts,
    softmax_weights,
)
from .costvolume import (
    CostVolume,
    SamplingGrid,
    aggregate,
    build_coarse_volume,
    build_refined_volume,
    extract_features,
)
from .estimator import CascadeDisparityEstimator, SubApertureFeatures
from .lightfield import DisparityMap, LightField, extract_epi, extract_macpi, get_view
from .metrics import EvalResult, badpix, evaluate, mse100, q25
from .occlusion import OcclusionSet, build_occlusion_set, occlusion_map, occlusion_weights
from .validation import ConfigError
from .warp import warp_view

__version__ = "0.1.0"

__all__ = [
    "CascadeConfig",
    "CascadeDisparityEstimator",
    "CascadeResult",
    "ConfigError",
    "CostVolume",
    "DisparityMap",
    "EvalResult",
    "LightField",
    "OcclusionSet",
    "SamplingGrid",
    "SubApertureFeatures",
    "aggregate",
    "badpix",
    "build_coarse_volume",
    "build_occlusion_set",
    "build_refined_volume",
    "derive_refined_grid",
    "estimate_coarse",
    "evaluate",
    "extract_epi",
    "extract_features",
    "extract_macpi",
    "get_view",
    "mse100",
    "occlusion_map",
    "occlusion_weights",
    "q25",
    "regress_disparity",
    "regress_residual",
    "run_pipeline",
    "slice_counts",
    "softmax_weights",
    "warp_view",
]
