"""Time-series container and the preprocessing chain.

Each channel goes median filter -> z-score -> zero-phase Butterworth.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal as ss

from pttbp.errors import DegenerateSignalError, InvalidArgumentError

CHANNELS = ("pcg", "ppg", "fsr")


@dataclass(frozen=True, eq=False)
class TimeSeries:
    samples: np.ndarray
    sample_rate_hz: float
    start_time_s: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1:
            raise InvalidArgumentError("samples must be one-dimensional")
        if not self.sample_rate_hz > 0:
            raise InvalidArgumentError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.start_time_s + np.arange(self.samples.size) / self.sample_rate_hz

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def time_of(self, index) -> float:
        return self.start_time_s + index / self.sample_rate_hz

    def index_of(self, time_s: float) -> int:
        """Nearest sample index, clipped to the series."""
        i = int(round((time_s - self.start_time_s) * self.sample_rate_hz))
        return min(max(i, 0), self.samples.size - 1)

    def with_samples(self, samples) -> "TimeSeries":
        return replace(self, samples=samples)


@dataclass(frozen=True)
class FilterSpec:
    """Frequency-selective filter request.

    A low-pass uses ``low_cutoff_hz`` as its single cutoff.
    """

    kind: Literal["low_pass", "band_pass"]
    low_cutoff_hz: Optional[float]
    high_cutoff_hz: Optional[float] = None
    order: int = 3

    def validate(self, sample_rate_hz: float) -> None:
        nyquist = sample_rate_hz / 2
        if not isinstance(self.order, (int, np.integer)) or self.order < 1:
            raise InvalidArgumentError(f"filter order must be a positive integer, got {self.order!r}")
        if self.kind == "low_pass":
            if self.low_cutoff_hz is None or not 0 < self.low_cutoff_hz < nyquist:
                raise InvalidArgumentError(
                    f"low-pass cutoff must lie in (0, {nyquist}) Hz, got {self.low_cutoff_hz}"
                )
        elif self.kind == "band_pass":
            lo, hi = self.low_cutoff_hz, self.high_cutoff_hz
            if lo is None or hi is None or not 0 < lo < hi < nyquist:
                raise InvalidArgumentError(
                    f"band-pass requires 0 < low < high < {nyquist} Hz, got ({lo}, {hi})"
                )
        else:
            raise InvalidArgumentError(f"unknown filter kind {self.kind!r}")

    @property
    def cutoffs(self) -> tuple:
        if self.kind == "low_pass":
            return (self.low_cutoff_hz,)
        return (self.low_cutoff_hz, self.high_cutoff_hz)


@dataclass(frozen=True, eq=False)
class IirCoefficients:
    numerator: np.ndarray
    denominator: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.numerator, dtype=float)
        a = np.asarray(self.denominator, dtype=float)
        if a.size == 0 or a[0] == 0:
            raise InvalidArgumentError("denominator must have a nonzero leading coefficient")
        object.__setattr__(self, "numerator", b / a[0])
        object.__setattr__(self, "denominator", a / a[0])

    @property
    def poles(self) -> np.ndarray:
        return np.roots(self.denominator)

    def is_stable(self) -> bool:
        return bool(np.all(np.abs(self.poles) < 1.0))

    def response(self, freqs_hz, sample_rate_hz: float) -> np.ndarray:
        """Complex frequency response at the given frequencies."""
        _, h = ss.freqz(self.numerator, self.denominator, worN=np.atleast_1d(freqs_hz), fs=sample_rate_hz)
        return h


# default analysis filters per channel
DEFAULT_FILTERS = {
    "fsr": FilterSpec("low_pass", 0.3, None, 3),
    "ppg": FilterSpec("band_pass", 0.5, 20.0, 3),
    "pcg": FilterSpec("band_pass", 20.0, 240.0, 3),
}


def median_filter(x: TimeSeries, window_samples: int) -> TimeSeries:
    """Running median; windows are truncated (not padded) at the edges."""
    if (
        not isinstance(window_samples, (int, np.integer))
        or window_samples < 1
        or window_samples % 2 == 0
    ):
        raise InvalidArgumentError(f"median window must be odd and positive, got {window_samples!r}")
    data = x.samples
    n = data.size
    if window_samples > n:
        raise InvalidArgumentError(f"median window {window_samples} exceeds series length {n}")
    if window_samples == 1:
        return x.with_samples(data.copy())
    half = window_samples // 2
    out = np.empty(n)
    out[half : n - half] = np.median(sliding_window_view(data, window_samples), axis=1)
    for i in range(half):
        out[i] = np.median(data[: i + half + 1])
        out[n - 1 - i] = np.median(data[n - 1 - i - half :])
    return x.with_samples(out)


def z_normalize(x: TimeSeries) -> TimeSeries:
    """Zero mean, unit population standard deviation."""
    data = x.samples
    if data.size < 2:
        raise InvalidArgumentError("z-normalization needs at least two samples")
    std = data.std()
    # relative floor so float round-off on a constant series still counts as dead
    if not std > 1e-12 * max(1.0, float(np.abs(data).max())):
        raise DegenerateSignalError("signal has zero variance")
    return x.with_samples((data - data.mean()) / std)


def design_filter(spec: FilterSpec, sample_rate_hz: float) -> IirCoefficients:
    """Butterworth via the bilinear transform with cutoff prewarping."""
    spec.validate(sample_rate_hz)
    if spec.kind == "low_pass":
        b, a = ss.butter(spec.order, spec.low_cutoff_hz, btype="lowpass", fs=sample_rate_hz)
    else:
        b, a = ss.butter(spec.order, spec.cutoffs, btype="bandpass", fs=sample_rate_hz)
    coeffs = IirCoefficients(b, a)
    if not coeffs.is_stable():
        raise InvalidArgumentError(f"{spec} realizes an unstable filter at {sample_rate_hz} Hz")
    return coeffs


def min_filtfilt_length(coeffs: IirCoefficients) -> int:
    return 3 * max(coeffs.numerator.size, coeffs.denominator.size)


def filtfilt(coeffs: IirCoefficients, x: TimeSeries) -> TimeSeries:
    """Forward-backward filtering with odd-reflection edge padding."""
    padlen = min_filtfilt_length(coeffs)
    if len(x) <= padlen:
        raise InvalidArgumentError(f"series of {len(x)} samples is too short to filter (need > {padlen})")
    y = ss.filtfilt(coeffs.numerator, coeffs.denominator, x.samples, padtype="odd", padlen=padlen)
    return x.with_samples(y)


def preprocess_channel(x: TimeSeries, spec: FilterSpec, median_window: int) -> TimeSeries:
    x = median_filter(x, median_window)
    x = z_normalize(x)
    return filtfilt(design_filter(spec, x.sample_rate_hz), x)


def preprocess_recording(raw, config=None):
    """Run every channel of a recording through the preprocessing chain."""
    from pttbp.config import PipelineConfig
    from pttbp.recording import Recording

    config = config or PipelineConfig()
    raw.validate()
    channels = {}
    for name in CHANNELS:
        try:
            channels[name] = preprocess_channel(
                raw.channel(name), config.filters[name], config.median_window
            )
        except (DegenerateSignalError, InvalidArgumentError) as exc:
            err = type(exc)(f"channel {name!r}: {exc}")
            err.channel = name
            raise err from exc
    return Recording(subject_id=raw.subject_id, **channels)
