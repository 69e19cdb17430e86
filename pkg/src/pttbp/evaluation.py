"""Leave-one-out evaluation and agreement statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from pttbp.calibration import TARGETS, fit, predict
from pttbp.errors import DegenerateMetricsError, InsufficientDataError, InvalidArgumentError
from pttbp.ptt import PttAggregate

LOA_Z = 1.96
REFERENCE_BAND_MMHG = (30.0, 300.0)


@dataclass(frozen=True)
class PredictionRecord:
    subject_id: str
    interval_index: int
    target: str
    estimate_mmhg: float
    reference_mmhg: float

    def __post_init__(self):
        if not (math.isfinite(self.estimate_mmhg) and math.isfinite(self.reference_mmhg)):
            raise InvalidArgumentError(f"non-finite prediction record {self}")
        lo, hi = REFERENCE_BAND_MMHG
        if not lo <= self.reference_mmhg <= hi:
            raise InvalidArgumentError(f"reference {self.reference_mmhg} mmHg outside [{lo}, {hi}]")

    @property
    def error_mmhg(self) -> float:
        return self.estimate_mmhg - self.reference_mmhg


@dataclass(frozen=True)
class EvaluationReport:
    target: str
    mae_mmhg: float
    std_mmhg: float
    r: float
    bland_mean_mmhg: float
    bland_loa_mmhg: tuple[float, float]
    n: int
    records: tuple[PredictionRecord, ...] = field(repr=False, default=())

    def summary(self) -> dict:
        return {
            "target": self.target,
            "n": self.n,
            "mae_mmhg": self.mae_mmhg,
            "std_mmhg": self.std_mmhg,
            "r": self.r,
            "bland_mean_mmhg": self.bland_mean_mmhg,
            "loa_low_mmhg": self.bland_loa_mmhg[0],
            "loa_high_mmhg": self.bland_loa_mmhg[1],
        }


def loocv_subject(
    aggregates: Sequence[PttAggregate], target: str, subject_id: str = ""
) -> list[PredictionRecord]:
    """Predict each aggregate from a model fit on all the others."""
    if target not in TARGETS:
        raise InvalidArgumentError(f"target must be SBP or DBP, got {target!r}")
    if len(aggregates) < 3:
        raise InsufficientDataError(
            f"subject {subject_id!r}: {len(aggregates)} measurements, need at least 3 for leave-one-out"
        )
    points = [(a.ptt_s, a.reference(target)) for a in aggregates]
    records = []
    for k, held_out in enumerate(aggregates):
        model = fit(points[:k] + points[k + 1 :], target)
        records.append(
            PredictionRecord(
                subject_id,
                held_out.interval_index,
                target,
                predict(model, held_out.ptt_s),
                held_out.reference(target),
            )
        )
    return records


def compute_metrics(records: Sequence[PredictionRecord]) -> EvaluationReport:
    if len(records) < 2:
        raise InvalidArgumentError(f"need at least 2 records, got {len(records)}")
    targets = {r.target for r in records}
    if len(targets) != 1:
        raise InvalidArgumentError(f"records mix targets {sorted(targets)}")
    est = np.array([r.estimate_mmhg for r in records])
    ref = np.array([r.reference_mmhg for r in records])
    err = est - ref

    de, dr = est - est.mean(), ref - ref.mean()
    see, srr = float(np.dot(de, de)), float(np.dot(dr, dr))
    if see == 0 or srr == 0:
        raise DegenerateMetricsError("correlation undefined: estimates or references are constant")
    r = float(np.dot(de, dr)) / math.sqrt(see * srr)
    r = min(1.0, max(-1.0, r))

    mean = float(err.mean())
    std = float(err.std())
    half = LOA_Z * std
    return EvaluationReport(
        target=targets.pop(),
        mae_mmhg=float(np.abs(err).mean()),
        std_mmhg=std,
        r=r,
        bland_mean_mmhg=mean,
        bland_loa_mmhg=(mean - half, mean + half),
        n=len(records),
        records=tuple(records),
    )


def pooled_report(
    per_subject: Mapping[str, Sequence[PredictionRecord]], target: str
) -> tuple[EvaluationReport, dict[str, EvaluationReport]]:
    """Concatenate subjects (sorted by id) and score the pool.

    Subjects with fewer than two records, or degenerate ones, get no
    sub-report but still contribute to the pool.
    """
    if not per_subject or not any(per_subject.values()):
        raise InvalidArgumentError("no subject records to pool")
    pooled, subs = [], {}
    for sid in sorted(per_subject):
        records = [r for r in per_subject[sid] if r.target == target]
        pooled.extend(records)
        try:
            subs[sid] = compute_metrics(records)
        except (InvalidArgumentError, DegenerateMetricsError):
            pass
    if not pooled:
        raise InvalidArgumentError(f"no {target} records to pool")
    return compute_metrics(pooled), subs


def bland_altman_points(records: Sequence[PredictionRecord]) -> list[tuple[float, float]]:
    """(mean of pair, estimate - reference) for each record."""
    return [((r.estimate_mmhg + r.reference_mmhg) / 2, r.error_mmhg) for r in records]
