"""Procedural layered light fields with exact ground truth.

Each layer is a textured plane (constant or planar disparity) with an optional
alpha mask, all expressed in center-view coordinates. A view is rendered
back-to-front by mapping every output pixel to the layer point that projects
onto it and sampling the layer texture there. Textures are continuous
functions, so views never resample another view.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from scipy.ndimage import map_coordinates

from .costvolume import SamplingGrid
from .lightfield import DisparityMap, LightField

PATTERNS = ("noise", "ramp", "flat")


@dataclass
class Layer:
    """One scene layer.

    ``texture`` is a pattern id (``"noise"``, ``"ramp"``, ``"flat"``) or an
    ``H x W x C`` array in ``[0, 1]``. ``disparity`` is a constant or a tuple
    ``(a, b, c)`` meaning ``a * x + b * y + c``. ``alpha`` is an ``H x W``
    boolean coverage mask (``None`` covers everything).
    """

    texture: str | np.ndarray = "noise"
    disparity: float | tuple[float, float, float] = 0.0
    alpha: np.ndarray | None = None
    level: float = 0.5

    @property
    def plane(self) -> tuple[float, float, float]:
        if isinstance(self.disparity, (tuple, list, np.ndarray)):
            a, b, c = (float(t) for t in self.disparity)
            return a, b, c
        return 0.0, 0.0, float(self.disparity)

    def disparity_at(self, x, y) -> np.ndarray:
        a, b, c = self.plane
        return a * np.asarray(x, dtype=np.float64) + b * np.asarray(y, dtype=np.float64) + c


@dataclass
class SceneSpec:
    """Layers listed front to back, plus angular/spatial resolution and RNG seed."""

    layers: Sequence[Layer]
    angular: tuple[int, int] = (9, 9)
    size: tuple[int, int] = (128, 128)
    channels: int = 1
    seed: int = 0

    def validate(self) -> None:
        if not self.layers:
            raise ValueError("scene needs at least one layer")
        U, V = self.angular
        if U % 2 == 0 or V % 2 == 0 or U < 1 or V < 1:
            raise ValueError(f"angular resolution must be odd, got {U}x{V}")
        H, W = self.size
        if H < 2 or W < 2:
            raise ValueError(f"spatial size too small: {self.size}")
        if self.channels not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {self.channels}")
        max_du, max_dv = (U - 1) / 2, (V - 1) / 2
        for i, layer in enumerate(self.layers):
            a, b, c = layer.plane
            if not all(math.isfinite(t) for t in (a, b, c)):
                raise ValueError(f"layer {i} has non-finite disparity")
            # The view mapping must stay one-to-one for every baseline.
            if 1.0 - abs(a) * max_du - abs(b) * max_dv <= 0:
                raise ValueError(f"layer {i} disparity slope folds over at the outer views")
            if isinstance(layer.texture, str):
                if layer.texture not in PATTERNS:
                    raise ValueError(f"layer {i}: unknown texture pattern {layer.texture!r}")
            else:
                tex = np.asarray(layer.texture)
                if tex.shape[:2] != (H, W):
                    raise ValueError(f"layer {i}: texture shape {tex.shape} != {(H, W)}")
            if layer.alpha is not None and np.asarray(layer.alpha).shape != (H, W):
                raise ValueError(f"layer {i}: alpha shape does not match scene size")


class GeneratedScene(NamedTuple):
    lf: LightField
    gt_disp: DisparityMap
    gt_occ: np.ndarray


def _margin(spec: SceneSpec) -> int:
    H, W = spec.size
    U, V = spec.angular
    reach = max((U - 1) / 2, (V - 1) / 2)
    corners = [(0, 0), (W - 1, 0), (0, H - 1), (W - 1, H - 1)]
    dmax = max(abs(float(layer.disparity_at(x, y))) for layer in spec.layers for x, y in corners)
    return int(math.ceil(dmax * reach * 1.5)) + 4


def _value_noise(rng, H, W, margin, channels):
    """Multi-octave lattice noise, equalized to a uniform marginal on [0, 1]."""
    octaves = [(4.0, 0.5), (8.0, 0.3), (16.0, 0.2)]
    lattices = []
    for cell, weight in octaves:
        ny = int(math.ceil((H + 2 * margin) / cell)) + 3
        nx = int(math.ceil((W + 2 * margin) / cell)) + 3
        lattices.append((cell, weight, rng.random((channels, ny, nx))))

    def raw(x, y):
        out = np.zeros((channels,) + np.shape(x))
        for cell, weight, grid in lattices:
            gx = (np.asarray(x) + margin) / cell + 1.0
            gy = (np.asarray(y) + margin) / cell + 1.0
            for c in range(channels):
                out[c] += weight * map_coordinates(grid[c], [gy, gx], order=1, mode="nearest")
        return out

    ys, xs = np.mgrid[-margin : H + margin, -margin : W + margin].astype(np.float64)
    reference = raw(xs, ys)
    levels = np.linspace(0.0, 1.0, 257)
    quantiles = [np.quantile(reference[c], levels) for c in range(channels)]

    def sample(x, y):
        values = raw(x, y)
        out = np.stack([np.interp(values[c], quantiles[c], levels) for c in range(channels)], axis=-1)
        return out

    return sample


def _ramp(H, W, margin, channels):
    span_x = W + 2.0 * margin
    span_y = H + 2.0 * margin

    def sample(x, y):
        value = 0.05 + 0.45 * ((np.asarray(x) + margin) / span_x + (np.asarray(y) + margin) / span_y)
        return np.repeat(value[..., np.newaxis], channels, axis=-1)

    return sample


def _flat(level, channels):
    def sample(x, y):
        return np.full(np.shape(x) + (channels,), float(level))

    return sample


def _image_texture(tex, channels):
    tex = np.asarray(tex, dtype=np.float64)
    if tex.ndim == 2:
        tex = tex[..., np.newaxis]
    if tex.shape[2] != channels:
        tex = np.repeat(tex.mean(axis=2, keepdims=True), channels, axis=2)

    def sample(x, y):
        return np.stack(
            [map_coordinates(tex[..., c], [y, x], order=1, mode="nearest") for c in range(channels)],
            axis=-1,
        )

    return sample


def _sampler(spec: SceneSpec, index: int, margin: int):
    layer = spec.layers[index]
    H, W = spec.size
    if isinstance(layer.texture, str):
        if layer.texture == "noise":
            rng = np.random.default_rng([spec.seed, index])
            return _value_noise(rng, H, W, margin, spec.channels)
        if layer.texture == "ramp":
            return _ramp(H, W, margin, spec.channels)
        return _flat(layer.level, spec.channels)
    return _image_texture(layer.texture, spec.channels)


def _coverage(layer: Layer, x, y) -> np.ndarray:
    if layer.alpha is None:
        return np.ones(np.shape(x), dtype=bool)
    alpha = np.asarray(layer.alpha, dtype=np.float64)
    return map_coordinates(alpha, [y, x], order=1, mode="constant", cval=0.0) > 0.5


def _to_layer(layer: Layer, X, Y, du, dv):
    """Center-view coordinates of the layer point seen at view pixel ``(X, Y)``."""
    a, b, c = layer.plane
    rx = X - c * du
    ry = Y - c * dv
    det = 1.0 + a * du + b * dv
    x = ((1.0 + b * dv) * rx - b * du * ry) / det
    y = ((1.0 + a * du) * ry - a * dv * rx) / det
    return x, y


def generate_lf(spec: SceneSpec) -> GeneratedScene:
    """Render a scene; returns the light field, GT disparity and GT occlusion masks.

    ``gt_occ[u, v]`` marks center-view pixels whose visible surface point is
    hidden behind a nearer layer in view ``(u, v)``.
    """
    spec.validate()
    U, V = spec.angular
    H, W = spec.size
    uc, vc = (U - 1) // 2, (V - 1) // 2
    margin = _margin(spec)
    samplers = [_sampler(spec, i, margin) for i in range(len(spec.layers))]
    Y, X = np.mgrid[0:H, 0:W].astype(np.float64)

    data = np.zeros((U, V, H, W, spec.channels), dtype=np.float32)
    for u in range(U):
        for v in range(V):
            du, dv = float(u - uc), float(v - vc)
            img = np.zeros((H, W, spec.channels))
            for layer, sample in zip(reversed(spec.layers), reversed(samplers)):
                x, y = _to_layer(layer, X, Y, du, dv)
                cover = _coverage(layer, x, y)
                if cover.any():
                    img[cover] = sample(x[cover], y[cover])
            data[u, v] = np.clip(img, 0.0, 1.0)

    front = np.full((H, W), -1)
    disp = np.full((H, W), np.nan)
    for k in reversed(range(len(spec.layers))):
        cover = _coverage(spec.layers[k], X, Y)
        front[cover] = k
        disp[cover] = spec.layers[k].disparity_at(X, Y)[cover]

    occ = np.zeros((U, V, H, W), dtype=bool)
    for u in range(U):
        for v in range(V):
            du, dv = float(u - uc), float(v - vc)
            if du == 0 and dv == 0:
                continue
            px = X + np.nan_to_num(disp) * du
            py = Y + np.nan_to_num(disp) * dv
            for j in range(len(spec.layers) - 1):
                x, y = _to_layer(spec.layers[j], px, py, du, dv)
                occ[u, v] |= _coverage(spec.layers[j], x, y) & (front > j)

    gt = DisparityMap(disp, front >= 0)
    return GeneratedScene(LightField(data), gt, occ)


def interior_mask(shape, margin: int) -> np.ndarray:
    """Boolean mask that excludes a ``margin``-pixel border."""
    H, W = shape
    mask = np.zeros((H, W), dtype=bool)
    if 2 * margin < H and 2 * margin < W:
        mask[margin : H - margin, margin : W - margin] = True
    return mask


def square_mask(size, side: int) -> np.ndarray:
    """Centered square alpha mask of the given side length."""
    H, W = size
    mask = np.zeros((H, W), dtype=bool)
    y0, x0 = (H - side) // 2, (W - side) // 2
    mask[y0 : y0 + side, x0 : x0 + side] = True
    return mask


# ---------------------------------------------------------------------------
# standard suite

COARSE_GRID = SamplingGrid(-4.0, 4.0, 0.25)
OFFGRID_RAMP_DISPARITY = 3.0 + 1.0 / 8.0
OFFGRID_NOISE_DISPARITY = 0.25 + 1.0 / 8.0
OCCLUDER_DISPARITY = 2.0
BACKGROUND_DISPARITY = 0.0


@dataclass
class SuiteScene:
    family: str
    name: str
    spec: SceneSpec

    @cached_property
    def rendered(self) -> GeneratedScene:
        return generate_lf(self.spec)

    @property
    def lf(self) -> LightField:
        return self.rendered.lf

    @property
    def gt_disp(self) -> DisparityMap:
        return self.rendered.gt_disp

    @property
    def gt_occ(self) -> np.ndarray:
        return self.rendered.gt_occ


@dataclass
class SceneFamily:
    name: str
    scenes: list[SuiteScene] = field(default_factory=list)


def standard_suite(seed: int = 0, size: int = 128, angular: tuple[int, int] = (9, 9)) -> list[SceneFamily]:
    """The five oracle scene families; rendering is deferred until first access.

    * ``plane``: noise-textured planes at every coarse-grid disparity
    * ``offgrid``: a linear-ramp plane and a noise plane, each halfway
      between two coarse samples
    * ``occlusion``: noise square at disparity 2 in front of a noise plane at 0
    * ``slope``: noise texture on a disparity ramp from -1.5 to 1.5 along x
    * ``flat``: constant-color plane (matching is ill-posed)
    """
    shape = (size, size)

    def scene(family, name, layers):
        return SuiteScene(family, name, SceneSpec(layers, angular=angular, size=shape, seed=seed))

    planes = SceneFamily(
        "plane",
        [scene("plane", f"plane_{d:+.2f}", [Layer("noise", float(d))]) for d in COARSE_GRID.samples],
    )
    offgrid = SceneFamily(
        "offgrid",
        [
            scene("offgrid", "offgrid_ramp", [Layer("ramp", OFFGRID_RAMP_DISPARITY)]),
            scene("offgrid", "offgrid_noise", [Layer("noise", OFFGRID_NOISE_DISPARITY)]),
        ],
    )
    occlusion = SceneFamily(
        "occlusion",
        [
            scene(
                "occlusion",
                "two_layer",
                [
                    Layer("noise", OCCLUDER_DISPARITY, alpha=square_mask(shape, size // 2)),
                    Layer("noise", BACKGROUND_DISPARITY),
                ],
            )
        ],
    )
    slope = SceneFamily(
        "slope", [scene("slope", "slope", [Layer("noise", (3.0 / (size - 1), 0.0, -1.5))])]
    )
    flat = SceneFamily("flat", [scene("flat", "flat", [Layer("flat", 0.0, level=0.5)])])
    return [planes, offgrid, occlusion, slope, flat]


def find_scene(suite: list[SceneFamily], name: str) -> SuiteScene:
    for family in suite:
        for s in family.scenes:
            if s.name == name:
                return s
    raise KeyError(name)
