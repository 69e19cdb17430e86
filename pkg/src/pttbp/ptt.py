"""Per-beat transit times and their per-measurement aggregation."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from pttbp.errors import InvalidArgumentError, SparseIntervalError
from pttbp.fiducials import BeatPair
from pttbp.segmentation import MeasurementInterval

MAD_SCALE = 1.4826


class PttKind(str, enum.Enum):
    FOOT = "foot"
    DSLOPE = "dslope"
    PEAK = "peak"

    @property
    def fiducial(self) -> str:
        return {"foot": "foot_s", "dslope": "maxslope_s", "peak": "peak_s"}[self.value]

    @property
    def label(self) -> str:
        return {"foot": "PTT_f", "dslope": "PTT_d", "peak": "PTT_p"}[self.value]


@dataclass(frozen=True)
class PttSample:
    time_s: float
    ptt_s: float
    kind: PttKind


@dataclass(frozen=True)
class PttAggregate:
    interval_index: int
    kind: PttKind
    ptt_s: float
    n_beats: int
    ref_sbp_mmhg: float
    ref_dbp_mmhg: float

    def reference(self, target: str) -> float:
        return self.ref_sbp_mmhg if target == "SBP" else self.ref_dbp_mmhg


def compute_ptt(
    pairs: Sequence[BeatPair], kind: PttKind, bounds: tuple[float, float] = (0.05, 0.6)
) -> list[PttSample]:
    kind = PttKind(kind)
    lo, hi = bounds
    out = []
    for pair in pairs:
        ptt = getattr(pair.ppg, kind.fiducial) - pair.s1.time_s
        if lo <= ptt <= hi:
            out.append(PttSample(pair.s1.time_s, ptt, kind))
    return out


def reject_outliers(samples: Sequence[PttSample], n_mad: float = 3.0) -> list[PttSample]:
    """Drop samples farther than ``n_mad`` scaled MADs from the median.

    The pass repeats until nothing more is removed, so applying it twice
    changes nothing.
    """
    kept = list(samples)
    while len(kept) >= 2:
        values = np.array([s.ptt_s for s in kept])
        med = np.median(values)
        mad = MAD_SCALE * np.median(np.abs(values - med))
        if mad == 0:
            break
        keep = np.abs(values - med) <= n_mad * mad
        if keep.all():
            break
        kept = [s for s, k in zip(kept, keep) if k]
    return kept


def gaussian_weights(times, center_s: float, sigma_s: float) -> np.ndarray:
    w = np.exp(-np.square(np.asarray(times, dtype=float) - center_s) / (2.0 * sigma_s**2))
    return w / w.sum()


def aggregate_interval(
    samples: Sequence[PttSample],
    interval: MeasurementInterval,
    kind: PttKind,
    interval_index: int = 0,
    sigma_s: float = 15.0,
    min_beats: int = 3,
) -> PttAggregate:
    """Weighted mean emphasizing beats near the reading moment t3."""
    kind = PttKind(kind)
    chosen = [s for s in samples if s.kind == kind]
    if len(chosen) < min_beats:
        raise SparseIntervalError(
            f"interval {interval_index}: {len(chosen)} valid beats, need {min_beats}"
        )
    times = np.array([s.time_s for s in chosen])
    values = np.array([s.ptt_s for s in chosen])
    if not np.all(interval.contains(times)):
        raise InvalidArgumentError(f"interval {interval_index}: samples fall outside the window")
    weights = gaussian_weights(times, interval.moments.t3_s, sigma_s)
    if not np.all(np.isfinite(weights)):
        # every beat so far from t3 that all weights underflowed
        raise SparseIntervalError(f"interval {interval_index}: no beats near the reading moment")
    mean = float(np.dot(weights, values))
    # clamp round-off so the convex-combination bound holds exactly
    mean = min(max(mean, float(values.min())), float(values.max()))
    return PttAggregate(
        interval_index, kind, mean, len(chosen), interval.ref_sbp_mmhg, interval.ref_dbp_mmhg
    )
