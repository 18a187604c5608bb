"""Plain-text ``key = value`` configuration for the cascade.

Blank lines and ``#`` comments are ignored; an optional ``[cascade]`` header
is accepted. Numbers may be written as fractions (``1/8``). Keys:

``coarse_min``, ``coarse_max``, ``coarse_interval``
    Coarse sweep range and interval (default -4, 4, 1/4).
``range_decay``, ``interval_decay``
    Decay factors in (0, 1) deriving the refined grid (default 1/8, 1/2).
``refined_min``, ``refined_max``, ``refined_interval``
    Explicit residual grid; takes precedence over the decay factors.
``temperature``
    Softmax temperature (default 0.1).
``aggregation_window``
    Odd box-filter size (default 9).
``occlusion``
    ``true``/``false``: occlusion-weighted refined volume (default true).
``features``
    ``intensity`` or ``intensity+gradient`` (default).
``cost_normalization``
    ``range`` (default) or ``none``.
"""

from __future__ import annotations

import configparser
from fractions import Fraction
from pathlib import Path

from .cascade import CascadeConfig
from .costvolume import SamplingGrid
from .validation import ConfigError

SECTION = "cascade"
FEATURE_SETS = {"intensity": False, "intensity+gradient": True}
KEYS = {
    "coarse_min",
    "coarse_max",
    "coarse_interval",
    "range_decay",
    "interval_decay",
    "refined_min",
    "refined_max",
    "refined_interval",
    "temperature",
    "aggregation_window",
    "occlusion",
    "features",
    "cost_normalization",
}


def parse_number(text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a number: {text!r}") from None


def parse_config(text: str) -> CascadeConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    if not text.lstrip().startswith("["):
        text = f"[{SECTION}]\n" + text
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    if parser.sections() != [SECTION]:
        raise ConfigError(f"expected a single [{SECTION}] section, got {parser.sections()}")
    items = dict(parser.items(SECTION))
    unknown = set(items) - KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    default = CascadeConfig()
    options = {}
    coarse = default.coarse_grid
    coarse_keys = ("coarse_min", "coarse_max", "coarse_interval")
    if any(k in items for k in coarse_keys):
        options["coarse_grid"] = SamplingGrid(
            parse_number(items.get("coarse_min", str(coarse.d_min))),
            parse_number(items.get("coarse_max", str(coarse.d_max))),
            parse_number(items.get("coarse_interval", str(coarse.interval))),
        )
    refined_keys = ("refined_min", "refined_max", "refined_interval")
    present = [k for k in refined_keys if k in items]
    if present and len(present) != 3:
        raise ConfigError("an explicit refined grid needs refined_min, refined_max and refined_interval")
    if present:
        options["refined_grid"] = SamplingGrid(*(parse_number(items[k]) for k in refined_keys))
    for key, attr in (("range_decay", "range_decay"), ("interval_decay", "interval_decay"), ("temperature", "temperature")):
        if key in items:
            options[attr] = parse_number(items[key])
    if "aggregation_window" in items:
        value = parse_number(items["aggregation_window"])
        if value != int(value):
            raise ConfigError(f"aggregation_window must be an integer, got {items['aggregation_window']}")
        options["aggregation_window"] = int(value)
    if "occlusion" in items:
        try:
            options["occlusion_enabled"] = parser.getboolean(SECTION, "occlusion")
        except ValueError:
            raise ConfigError(f"occlusion must be true or false, got {items['occlusion']!r}") from None
    if "features" in items:
        name = items["features"].strip()
        if name not in FEATURE_SETS:
            raise ConfigError(f"features must be one of {sorted(FEATURE_SETS)}, got {name!r}")
        options["gradient_features"] = FEATURE_SETS[name]
    if "cost_normalization" in items:
        options["cost_normalization"] = items["cost_normalization"].strip()
    return CascadeConfig(**options)


def load_config(path) -> CascadeConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def format_config(cfg: CascadeConfig) -> str:
    """Serialize a config; ``parse_config(format_config(cfg)) == cfg``."""
    lines = [
        f"coarse_min = {cfg.coarse_grid.d_min!r}",
        f"coarse_max = {cfg.coarse_grid.d_max!r}",
        f"coarse_interval = {cfg.coarse_grid.interval!r}",
        f"range_decay = {cfg.range_decay!r}",
        f"interval_decay = {cfg.interval_decay!r}",
    ]
    if cfg.refined_grid is not None:
        lines += [
            f"refined_min = {cfg.refined_grid.d_min!r}",
            f"refined_max = {cfg.refined_grid.d_max!r}",
            f"refined_interval = {cfg.refined_grid.interval!r}",
        ]
    lines += [
        f"temperature = {cfg.temperature!r}",
        f"aggregation_window = {cfg.aggregation_window}",
        f"occlusion = {'true' if cfg.occlusion_enabled else 'false'}",
        f"features = {'intensity+gradient' if cfg.gradient_features else 'intensity'}",
        f"cost_normalization = {cfg.cost_normalization}",
    ]
    return "\n".join(lines) + "\n"
