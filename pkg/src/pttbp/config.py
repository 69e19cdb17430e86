"""Pipeline configuration and its flat ``section.key = value`` file format.

Example::

    # raise the lower PCG cutoff
    filters.pcg.low_hz = 25
    ptt.kind = peak
    aggregate.sigma_s = 10
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from pttbp.errors import ConfigError, InvalidArgumentError
from pttbp.signal import CHANNELS, DEFAULT_FILTERS

PTT_KINDS = ("foot", "dslope", "peak")


@dataclass(frozen=True)
class PipelineConfig:
    filters: dict = field(default_factory=lambda: dict(DEFAULT_FILTERS))
    median_window: int = 5
    envelope_window_s: float = 0.020
    min_gap_s: float = 10.0
    threshold_fraction: float = 0.10
    baseline_window_s: float = 60.0
    sigma_s: float = 15.0
    ptt_min_s: float = 0.05
    ptt_max_s: float = 0.6
    min_beats: int = 3
    kind: str = "peak"
    seed: int = 0

    def validate(self) -> "PipelineConfig":
        for name in CHANNELS:
            if name not in self.filters:
                raise ConfigError(f"missing filter for channel {name!r}")
            try:
                self.filters[name].validate(1000.0)
            except InvalidArgumentError as exc:
                raise ConfigError(f"filters.{name}: {exc}") from None
        if self.median_window < 1 or self.median_window % 2 == 0:
            raise ConfigError("median.window must be an odd positive integer")
        if not 0 < self.ptt_min_s < self.ptt_max_s:
            raise ConfigError("ptt bounds must satisfy 0 < min < max")
        if self.min_beats < 1:
            raise ConfigError("aggregate.min_beats must be >= 1")
        for name in ("sigma_s", "min_gap_s", "envelope_window_s", "baseline_window_s"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive and finite")
        if not 0 < self.threshold_fraction < 1:
            raise ConfigError("segmentation.threshold_fraction must be in (0, 1)")
        if self.kind not in PTT_KINDS:
            raise ConfigError(f"ptt.kind must be one of {PTT_KINDS}, got {self.kind!r}")
        return self


# file key -> (attribute, type)
_SCALAR_KEYS = {
    "median.window": ("median_window", int),
    "envelope.window_s": ("envelope_window_s", float),
    "segmentation.min_gap_s": ("min_gap_s", float),
    "segmentation.threshold_fraction": ("threshold_fraction", float),
    "segmentation.baseline_window_s": ("baseline_window_s", float),
    "aggregate.sigma_s": ("sigma_s", float),
    "aggregate.min_beats": ("min_beats", int),
    "ptt.min_s": ("ptt_min_s", float),
    "ptt.max_s": ("ptt_max_s", float),
    "ptt.kind": ("kind", str),
    "seed": ("seed", int),
}
_FILTER_FIELDS = {"kind": "kind", "low_hz": "low_cutoff_hz", "high_hz": "high_cutoff_hz", "order": "order"}


def parse_config(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    config = base or PipelineConfig()
    scalars = {}
    filters = dict(config.filters)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (s.strip() for s in line.partition("="))
        if not sep or not key or not value:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        try:
            if key in _SCALAR_KEYS:
                attr, cast = _SCALAR_KEYS[key]
                scalars[attr] = cast(value)
            elif key.startswith("filters."):
                _, channel, fld = key.split(".")
                if channel not in CHANNELS or fld not in _FILTER_FIELDS:
                    raise KeyError(key)
                if fld == "order":
                    parsed = int(value)
                elif fld == "kind":
                    parsed = value
                else:
                    parsed = None if value.lower() in ("none", "-") else float(value)
                filters[channel] = replace(filters[channel], **{_FILTER_FIELDS[fld]: parsed})
            else:
                raise KeyError(key)
        except KeyError:
            raise ConfigError(f"line {lineno}: unknown key {key!r}") from None
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value {value!r} for {key!r}") from None
    return replace(config, filters=filters, **scalars).validate()


def load_config(path) -> PipelineConfig:
    if path is None:
        return PipelineConfig().validate()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def dump_config(config: PipelineConfig) -> str:
    lines = []
    for name in CHANNELS:
        spec = config.filters[name]
        lines.append(f"filters.{name}.kind = {spec.kind}")
        lines.append(f"filters.{name}.low_hz = {spec.low_cutoff_hz}")
        lines.append(f"filters.{name}.high_hz = {spec.high_cutoff_hz}")
        lines.append(f"filters.{name}.order = {spec.order}")
    for key, (attr, _) in _SCALAR_KEYS.items():
        lines.append(f"{key} = {getattr(config, attr)}")
    return "\n".join(lines) + "\n"
