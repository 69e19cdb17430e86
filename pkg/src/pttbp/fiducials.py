"""Per-beat timing references: PCG S1 (proximal) and PPG fiducials (distal).

PPG beats are found first; each beat's S1 is then searched backwards from
its foot, which keeps the second heart sound of the same cycle out of the
search window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import find_peaks, peak_prominences

from pttbp.errors import DegenerateSignalError, InsufficientBeatsError, InvalidArgumentError
from pttbp.signal import TimeSeries

MIN_BEAT_SEPARATION_S = 0.3
MAXSLOPE_LOOKBACK_S = 0.4
SLOPE_FIT_HALF_S = 0.040
TRANSIT_WINDOW_S = (0.05, 0.6)


@dataclass(frozen=True)
class PpgBeat:
    foot_s: float
    maxslope_s: float
    peak_s: float

    def __post_init__(self):
        if not self.foot_s <= self.maxslope_s <= self.peak_s:
            raise InvalidArgumentError(f"PPG fiducials out of order: {self}")
        if not self.peak_s - self.foot_s < 0.6:
            raise InvalidArgumentError(f"upstroke longer than 0.6 s: {self}")


@dataclass(frozen=True)
class S1Event:
    time_s: float
    envelope_amplitude: float


@dataclass(frozen=True)
class BeatPair:
    s1: S1Event
    ppg: PpgBeat

    def __post_init__(self):
        lag = self.ppg.foot_s - self.s1.time_s
        # round-off slack on bounds computed from sample indices
        if not TRANSIT_WINDOW_S[0] - 1e-9 <= lag <= TRANSIT_WINDOW_S[1] + 1e-9:
            raise InvalidArgumentError(f"S1-to-foot lag {lag:.4f} s outside the transit window")


def pcg_envelope(pcg: TimeSeries, window_s: float = 0.020) -> TimeSeries:
    """Centered moving average of the squared signal, scaled to unit maximum."""
    n = max(1, int(round(window_s * pcg.sample_rate_hz)))
    if n % 2 == 0:
        n += 1  # odd length keeps the window centered on each sample
    energy = np.convolve(np.square(pcg.samples), np.ones(n) / n, mode="same")
    peak = energy.max()
    if not peak > 0:
        raise DegenerateSignalError("PCG envelope is identically zero")
    return pcg.with_samples(energy / peak)


def _refine_slope_peak(slope: np.ndarray, i: int, lo: int, hi: int, half: int) -> float:
    """Sub-sample position of the steepest upstroke.

    A strict maximum of the first difference is refined to the vertex of a
    least-squares parabola over ``i +- half``; the slope curve is flat at its
    top, so the raw argmax wanders with in-band noise.  Ties (plateaus) keep
    the earliest sample.
    """
    if i <= lo or i + 1 >= hi or not slope[i - 1] < slope[i] > slope[i + 1]:
        return float(i)
    a, b = max(lo, i - half), min(hi, i + half + 1)
    u = np.arange(a, b) - i
    c2, c1, _ = np.polyfit(u, slope[a:b], 2)
    if c2 >= 0:
        return float(i)
    # slope[k] is the difference across k -> k+1, centered half a sample later
    return i + 0.5 + float(np.clip(-c1 / (2 * c2), u[0], u[-1]))


def detect_ppg_beats(ppg: TimeSeries) -> list[PpgBeat]:
    x = ppg.samples
    fs = ppg.sample_rate_hz
    mids, props = find_peaks(
        x, distance=max(1, int(round(MIN_BEAT_SEPARATION_S * fs))), plateau_size=1
    )
    candidates = props["left_edges"]
    if candidates.size:
        prominences = peak_prominences(x, mids)[0]
        keep = prominences >= 0.5 * np.median(prominences)
        keep &= prominences > 1e-9 * max(1.0, float(np.abs(x).max()))
        candidates = candidates[keep]
    if candidates.size < 2:
        raise InsufficientBeatsError(f"found {candidates.size} PPG beats, need at least 2")

    slope = np.diff(x)  # slope[i] spans samples i -> i+1
    lookback = int(round(MAXSLOPE_LOOKBACK_S * fs))
    beats = []
    prev_peak = 0
    for p in candidates:
        lo = max(prev_peak, p - lookback)
        if p - lo < 2:
            prev_peak = p
            continue
        ms = lo + int(np.argmax(slope[lo:p]))
        foot = prev_peak + int(np.argmin(x[prev_peak : ms + 1]))
        prev_peak = p
        if (p - foot) / fs >= 0.6:
            continue
        ms_pos = _refine_slope_peak(slope, ms, lo, p, int(round(SLOPE_FIT_HALF_S * fs)))
        ms_pos = min(max(ms_pos, foot), p)
        beats.append(PpgBeat(ppg.time_of(foot), ppg.time_of(ms_pos), ppg.time_of(p)))
    if len(beats) < 2:
        raise InsufficientBeatsError(f"found {len(beats)} complete PPG beats, need at least 2")
    return beats


def detect_s1(envelope: TimeSeries, beats: Sequence[PpgBeat]) -> list[BeatPair]:
    """Pair each PPG beat with the dominant envelope peak preceding its foot.

    Beats whose window holds no peak above a tenth of the global envelope
    maximum are dropped.
    """
    if not beats:
        raise InvalidArgumentError("no PPG beats to pair")
    e = envelope.samples
    floor = 0.1 * e.max()
    # plateau maxima resolve to their earliest sample
    _, props = find_peaks(e, height=floor, plateau_size=1)
    maxima = props["left_edges"]

    pairs = []
    for beat in beats:
        lo = envelope.index_of(beat.foot_s - TRANSIT_WINDOW_S[1])
        hi = envelope.index_of(beat.foot_s - TRANSIT_WINDOW_S[0])
        # keep the pair inside the transit window after index rounding
        while lo < hi and beat.foot_s - envelope.time_of(lo) > TRANSIT_WINDOW_S[1]:
            lo += 1
        while hi > lo and beat.foot_s - envelope.time_of(hi) < TRANSIT_WINDOW_S[0]:
            hi -= 1
        inside = maxima[(maxima >= lo) & (maxima <= hi)]
        if inside.size == 0:
            continue
        best = inside[int(np.argmax(e[inside]))]
        pairs.append(BeatPair(S1Event(envelope.time_of(best), float(e[best])), beat))
    return pairs
