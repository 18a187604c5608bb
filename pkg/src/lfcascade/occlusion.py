"""Photo-consistency occlusion maps and the per-view weights derived from them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lightfield import LightField, get_view
from .validation import check_disparity
from .warp import WarpedView, warp_view


@dataclass(frozen=True, eq=False)
class OcclusionSet:
    """Occlusion maps, weights and warp validity for every view, each ``(U, V, H, W)``."""

    maps: np.ndarray
    weights: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        for name in ("maps", "weights", "valid"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    @property
    def angular_shape(self) -> tuple[int, int]:
        return self.maps.shape[:2]

    @classmethod
    def unweighted(cls, angular_shape, spatial_shape) -> "OcclusionSet":
        """All-zero maps: every view contributes with weight one."""
        shape = tuple(angular_shape) + tuple(spatial_shape)
        return cls(np.zeros(shape), np.ones(shape), np.ones(shape, dtype=bool))


def _as_hwc(img) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    return img[..., np.newaxis] if img.ndim == 2 else img


def occlusion_map(center, warped: WarpedView) -> np.ndarray:
    """Clipped channel-mean absolute difference between center and warped view.

    Pixels where the warp left the frame are marked fully occluded (1.0).
    """
    center = _as_hwc(center)
    image = _as_hwc(warped.image)
    if center.shape != image.shape:
        raise ValueError(f"center view {center.shape} and warped view {image.shape} differ")
    if warped.valid.shape != center.shape[:2]:
        raise ValueError("validity mask does not match the view shape")
    residual = np.abs(center - image).mean(axis=-1)
    return np.where(warped.valid, np.clip(residual, 0.0, 1.0), 1.0)


def occlusion_weights(maps, valid=None) -> np.ndarray:
    """Per-view matching weights ``1 - M``; zero wherever the warp was invalid.

    ``maps`` is either an :class:`OcclusionSet` or a raw array of maps in [0, 1].
    """
    if isinstance(maps, OcclusionSet):
        maps, valid = maps.maps, maps.valid
    maps = np.asarray(maps, dtype=np.float64)
    weights = 1.0 - maps
    if valid is not None:
        weights = np.where(valid, weights, 0.0)
    return weights


def build_occlusion_set(lf: LightField, disp) -> OcclusionSet:
    """Warp every side view by ``disp`` and score its photo-consistency with the center.

    The center view always gets ``M = 0`` and ``w = 1``.
    """
    disp = check_disparity(disp, lf.spatial_shape)
    # Pixels without a usable disparity cannot be checked; warp them at zero
    # and let their weights fall back to the raw residual.
    values = np.where(disp.valid, disp.values, 0.0)
    U, V = lf.angular_shape
    H, W = lf.spatial_shape
    center = lf.center_view()
    maps = np.zeros((U, V, H, W))
    valid = np.ones((U, V, H, W), dtype=bool)
    for a in lf.side_views():
        warped = warp_view(get_view(lf, a), lf.baseline(a), values)
        maps[a] = occlusion_map(center, warped)
        valid[a] = warped.valid
    weights = occlusion_weights(maps, valid)
    return OcclusionSet(maps, weights, valid)
