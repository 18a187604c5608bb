"""Dataset I/O: PFM disparity maps, HCI-style PNG view grids and visualizations."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .lightfield import DisparityMap, LightField

LUMA_601 = np.array([0.299, 0.587, 0.114])
DISPARITY_COLORMAP = "viridis"


class FormatError(ValueError):
    """Malformed or unsupported file content."""


# ---------------------------------------------------------------------------
# PFM


def _header_tokens(buf: bytes, count: int):
    pos = 0
    tokens = []
    for _ in range(count):
        while pos < len(buf) and buf[pos : pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(buf) and not buf[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"truncated PFM header at byte {start}")
        tokens.append((buf[start:pos], start))
    if pos >= len(buf):
        raise FormatError(f"truncated PFM header at byte {pos}")
    # Exactly one whitespace byte separates the header from the payload.
    return tokens, pos + 1


def read_pfm(path) -> tuple[np.ndarray, float]:
    """Read a grayscale PFM file.

    Returns the ``H x W`` float32 map (top row first) and the signed scale
    from the header. Negative scale means little-endian payload.
    """
    buf = Path(path).read_bytes()
    tokens, offset = _header_tokens(buf, 4)
    (magic, _), (w_tok, w_at), (h_tok, h_at), (s_tok, s_at) = tokens
    if magic == b"PF":
        raise FormatError("color PFM (PF) is not supported; expected grayscale 'Pf' at byte 0")
    if magic != b"Pf":
        raise FormatError(f"bad PFM magic {magic[:8]!r} at byte 0")
    try:
        width, height = int(w_tok), int(h_tok)
    except ValueError:
        raise FormatError(f"bad PFM dimensions at byte {w_at}") from None
    if width <= 0 or height <= 0:
        raise FormatError(f"non-positive PFM dimensions at byte {w_at if width <= 0 else h_at}")
    try:
        scale = float(s_tok)
    except ValueError:
        raise FormatError(f"bad PFM scale at byte {s_at}") from None
    if scale == 0.0:
        raise FormatError(f"zero PFM scale at byte {s_at}")
    dtype = "<f4" if scale < 0 else ">f4"
    expected = width * height * 4
    payload = buf[offset : offset + expected]
    if len(payload) < expected:
        raise FormatError(
            f"truncated PFM payload at byte {offset + len(payload)}: expected {expected} bytes from byte {offset}"
        )
    data = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return np.flipud(data).astype(np.float32), scale


def write_pfm(path, data, scale: float = 1.0) -> None:
    """Write a grayscale PFM, always little-endian (negative scale), rows bottom-to-top."""
    data = np.asarray(data, dtype=np.float32)
    if data.ndim != 2:
        raise ValueError(f"PFM writer expects a 2D map, got shape {data.shape}")
    if scale == 0 or not np.isfinite(scale):
        raise ValueError(f"invalid PFM scale {scale}")
    height, width = data.shape
    header = f"Pf\n{width} {height}\n{-abs(scale):g}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(np.flipud(data), dtype="<f4").tobytes())


def read_disparity(path) -> DisparityMap:
    data, _ = read_pfm(path)
    return DisparityMap(data.astype(np.float64))


def write_disparity(path, disp) -> None:
    """Write a disparity map as PFM; invalid pixels are stored as NaN."""
    if isinstance(disp, DisparityMap):
        disp = disp.filled(np.nan)
    write_pfm(path, disp)


# ---------------------------------------------------------------------------
# scene layout


@dataclass
class SceneLayout:
    """Where the views of one scene live on disk.

    View ``index`` maps to ``(u, v) = divmod(index, V)`` (``u`` slow) unless
    ``u_major`` is False, in which case ``(v, u) = divmod(index, U)``.
    """

    directory: Path
    pattern: str = "input_Cam{index:03}.png"
    gt_name: str | None = "gt_disp_lowres.pfm"
    angular: tuple[int, int] = (9, 9)
    u_major: bool = True
    grayscale: bool = False

    def __post_init__(self):
        self.directory = Path(self.directory)

    def coord(self, index: int) -> tuple[int, int]:
        U, V = self.angular
        if not 0 <= index < U * V:
            raise IndexError(f"view index {index} out of range for {U}x{V}")
        if self.u_major:
            return divmod(index, V)
        v, u = divmod(index, U)
        return u, v

    def index(self, u: int, v: int) -> int:
        U, V = self.angular
        if not (0 <= u < U and 0 <= v < V):
            raise IndexError(f"angular index ({u}, {v}) out of range for {U}x{V}")
        return u * V + v if self.u_major else v * U + u

    def view_path(self, index: int) -> Path:
        return self.directory / self.pattern.format(index=index)

    @property
    def gt_path(self) -> Path | None:
        return None if self.gt_name is None else self.directory / self.gt_name


def _read_png(path: Path, grayscale: bool) -> np.ndarray:
    with Image.open(path) as im:
        if im.mode == "L":
            img = (np.asarray(im, dtype=np.float64) / 255.0)[..., np.newaxis]
        elif im.mode.startswith("I;16"):
            img = (np.asarray(im, dtype=np.float64) / 65535.0)[..., np.newaxis]
        else:
            img = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    if grayscale and img.shape[2] == 3:
        img = (img @ LUMA_601)[..., np.newaxis]
    return img


def load_scene(layout: SceneLayout, n_jobs: int | None = None) -> tuple[LightField, DisparityMap | None]:
    """Load all views (and the ground truth, if present) of a scene."""
    U, V = layout.angular
    paths = [layout.view_path(index) for index in range(U * V)]
    for index, path in enumerate(paths):
        if not path.is_file():
            raise FileNotFoundError(f"missing view {index}: {path.name} in {layout.directory}")
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        images = list(pool.map(lambda p: _read_png(p, layout.grayscale), paths))
    shape = images[0].shape
    for path, img in zip(paths, images):
        if img.shape != shape:
            raise ValueError(f"{path.name}: view shape {img.shape} differs from {shape}")
    views = {layout.coord(index): img for index, img in enumerate(images)}
    H, W, C = shape
    data = np.zeros((U, V, H, W, C), dtype=np.float32)
    for (u, v), img in views.items():
        data[u, v] = img
    gt = None
    gt_path = layout.gt_path
    if gt_path is not None and gt_path.is_file():
        gt = read_disparity(gt_path)
        if gt.shape != (H, W):
            raise ValueError(f"{gt_path.name}: ground truth {gt.shape} does not match views {(H, W)}")
    return LightField(data), gt


def save_scene(lf: LightField, layout: SceneLayout, gt=None) -> None:
    """Write a light field (and optional ground truth) in the given layout as 8-bit PNGs."""
    U, V = lf.angular_shape
    if tuple(layout.angular) != (U, V):
        raise ValueError(f"layout is {layout.angular} but light field is {U}x{V}")
    layout.directory.mkdir(parents=True, exist_ok=True)
    for u in range(U):
        for v in range(V):
            img = np.round(lf.data[u, v].astype(np.float64) * 255.0).astype(np.uint8)
            if img.shape[2] == 1:
                Image.fromarray(img[..., 0]).save(layout.view_path(layout.index(u, v)))
            else:
                Image.fromarray(img).save(layout.view_path(layout.index(u, v)))
    if gt is not None and layout.gt_path is not None:
        write_disparity(layout.gt_path, gt)


# ---------------------------------------------------------------------------
# visualization


def colorize_disparity(disp, value_range) -> np.ndarray:
    """Map ``[lo, hi]`` linearly onto the viridis colormap; invalid pixels are black."""
    from matplotlib import colormaps

    lo, hi = (float(t) for t in value_range)
    if not lo < hi:
        raise ValueError(f"invalid display range [{lo}, {hi}]")
    if not isinstance(disp, DisparityMap):
        disp = DisparityMap(np.asarray(disp, dtype=np.float64))
    lut = (np.asarray(colormaps[DISPARITY_COLORMAP].colors) * 255.0).round().astype(np.uint8)
    t = np.clip((np.nan_to_num(disp.values) - lo) / (hi - lo), 0.0, 1.0)
    idx = np.round(t * (len(lut) - 1)).astype(np.intp)
    img = lut[idx]
    img[~disp.valid] = 0
    return img


def write_disparity_png(disp, value_range, path) -> None:
    Image.fromarray(colorize_disparity(disp, value_range)).save(path)


def write_gray_png(values, path) -> None:
    """Write a map in [0, 1] as an 8-bit grayscale PNG (``round(255 * value)``)."""
    img = np.round(np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(img).save(path)


def write_occlusion_pngs(occ, directory, layout: SceneLayout | None = None) -> list[Path]:
    """One grayscale PNG per view, named ``occ_{index:03}.png`` in layout order."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    U, V = occ.maps.shape[:2]
    if layout is None:
        layout = SceneLayout(directory, angular=(U, V))
    paths = []
    for u in range(U):
        for v in range(V):
            path = directory / f"occ_{layout.index(u, v):03}.png"
            write_gray_png(occ.maps[u, v], path)
            paths.append(path)
    return paths
