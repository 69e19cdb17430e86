"""Cuff-episode detection on the FSR channel and per-measurement windowing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import find_peaks

from pttbp.errors import InvalidArgumentError, ManifestMismatchError
from pttbp.signal import TimeSeries


@dataclass(frozen=True)
class KeyMoments:
    t1_s: float  # inflation start
    t2_s: float  # deflation start
    t3_s: float  # deflation end, reading shown

    def __post_init__(self):
        if not self.t1_s < self.t2_s < self.t3_s:
            raise InvalidArgumentError(f"key moments out of order: {self}")


@dataclass(frozen=True)
class MeasurementInterval:
    """Half-open window ``[begin_s, end_s)`` owning one cuff reading."""

    begin_s: float
    end_s: float
    moments: KeyMoments
    ref_sbp_mmhg: float
    ref_dbp_mmhg: float

    def __post_init__(self):
        if not self.begin_s <= self.moments.t1_s or not self.moments.t3_s <= self.end_s:
            # the first/last window may cut a t1 that starts before the recording
            if not self.begin_s <= self.moments.t3_s < self.end_s:
                raise InvalidArgumentError(f"interval [{self.begin_s}, {self.end_s}) misses its t3")
        if not self.ref_sbp_mmhg > self.ref_dbp_mmhg > 0:
            raise InvalidArgumentError(
                f"reference reading must satisfy SBP > DBP > 0, got {self.ref_sbp_mmhg}/{self.ref_dbp_mmhg}"
            )

    def contains(self, time_s) -> np.ndarray:
        time_s = np.asarray(time_s)
        return (time_s >= self.begin_s) & (time_s < self.end_s)


def _crossing(x: np.ndarray, i: int, threshold: float) -> float:
    """Fractional index where the segment x[i] -> x[i+1] meets threshold."""
    a, b = x[i], x[i + 1]
    if a == b:
        return float(i)
    return i + (threshold - a) / (b - a)


def detect_key_moments(
    fsr: TimeSeries,
    min_gap_s: float = 10.0,
    threshold_fraction: float = 0.10,
    baseline_window_s: float = 60.0,
) -> list[KeyMoments]:
    x = fsr.samples
    fs = fsr.sample_rate_hz
    span = float(np.ptp(x)) if x.size else 0.0
    if span <= 1e-9 * max(1.0, float(np.abs(x).max(initial=0.0))):
        return []

    distance = max(1, int(round(min_gap_s * fs)))
    peaks, _ = find_peaks(x, distance=distance, prominence=0.25 * span)
    half = int(round(baseline_window_s * fs / 2))

    episodes = []
    for p in peaks:
        lo, hi = max(0, p - half), min(x.size, p + half + 1)
        baseline = np.percentile(x[lo:hi], 5)
        amplitude = x[p] - baseline
        if amplitude <= 0:
            continue
        threshold = baseline + threshold_fraction * amplitude
        below_left = np.flatnonzero(x[:p] < threshold)
        below_right = np.flatnonzero(x[p:] < threshold)
        if below_left.size == 0 or below_right.size == 0:
            # episode cut by the recording edge
            continue
        i1 = _crossing(x, below_left[-1], threshold)
        i3 = _crossing(x, p + below_right[0] - 1, threshold)
        episodes.append((i1, float(p), i3, x[p]))

    # overlapping or too-close episodes are one measurement; keep the taller peak
    merged = []
    for ep in episodes:
        if merged and ep[0] - merged[-1][2] < min_gap_s * fs:
            if ep[3] > merged[-1][3]:
                merged[-1] = (min(merged[-1][0], ep[0]), ep[1], max(merged[-1][2], ep[2]), ep[3])
            else:
                prev = merged[-1]
                merged[-1] = (min(prev[0], ep[0]), prev[1], max(prev[2], ep[2]), prev[3])
            continue
        merged.append(ep)

    return [KeyMoments(fsr.time_of(i1), fsr.time_of(i2), fsr.time_of(i3)) for i1, i2, i3, _ in merged]


def partition_intervals(
    moments: Sequence[KeyMoments],
    recording_span: tuple[float, float],
    refs: Sequence[tuple[float, float]],
) -> list[MeasurementInterval]:
    """Cut the recording at midpoints between consecutive reading moments."""
    if len(moments) != len(refs):
        raise ManifestMismatchError(
            f"detected {len(moments)} cuff episodes but {len(refs)} reference readings"
        )
    if not moments:
        raise InvalidArgumentError("no measurements to partition")
    begin, end = recording_span
    t3 = [m.t3_s for m in moments]
    if any(b <= a for a, b in zip(t3, t3[1:])):
        raise InvalidArgumentError("reading moments must be strictly increasing")
    bounds = [begin] + [(a + b) / 2 for a, b in zip(t3, t3[1:])] + [end]
    return [
        MeasurementInterval(bounds[k], bounds[k + 1], m, float(sbp), float(dbp))
        for k, (m, (sbp, dbp)) in enumerate(zip(moments, refs))
    ]
