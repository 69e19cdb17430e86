"""End-to-end processing: recording -> per-interval PTT -> LOOCV reports."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from pttbp.calibration import TARGETS, CalibrationModel, fit
from pttbp.config import PipelineConfig
from pttbp.errors import InsufficientDataError, PipelineError, SparseIntervalError
from pttbp.evaluation import EvaluationReport, PredictionRecord, loocv_subject, pooled_report
from pttbp.fiducials import BeatPair, detect_ppg_beats, detect_s1, pcg_envelope
from pttbp.ptt import PttAggregate, PttKind, aggregate_interval, compute_ptt, reject_outliers
from pttbp.recording import Recording
from pttbp.segmentation import MeasurementInterval, detect_key_moments, partition_intervals
from pttbp.signal import preprocess_recording

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntervalRow:
    """One measurement with its aggregated PTT of every kind."""

    subject_id: str
    interval_index: int
    ptt_f_s: float
    ptt_d_s: float
    ptt_p_s: float
    sbp_mmhg: float
    dbp_mmhg: float

    def ptt(self, kind) -> float:
        return {"foot": self.ptt_f_s, "dslope": self.ptt_d_s, "peak": self.ptt_p_s}[PttKind(kind).value]

    def aggregate(self, kind) -> PttAggregate:
        return PttAggregate(self.interval_index, PttKind(kind), self.ptt(kind), 0, self.sbp_mmhg, self.dbp_mmhg)


@dataclass(frozen=True)
class SubjectAnalysis:
    intervals: list[MeasurementInterval]
    pairs: list[BeatPair]
    rows: list[IntervalRow]


def _tag(exc: PipelineError, subject_id: str) -> PipelineError:
    err = type(exc)(f"subject {subject_id!r}: {exc}")
    err.subject_id = subject_id
    return err


def analyze_subject(
    recording: Recording, readings: Sequence[tuple[float, float]], config: PipelineConfig | None = None
) -> SubjectAnalysis:
    config = config or PipelineConfig()
    sid = recording.subject_id
    try:
        pre = preprocess_recording(recording, config)
        moments = detect_key_moments(
            pre.fsr, config.min_gap_s, config.threshold_fraction, config.baseline_window_s
        )
        intervals = partition_intervals(moments, recording.span, readings)
        envelope = pcg_envelope(pre.pcg, config.envelope_window_s)
        pairs = detect_s1(envelope, detect_ppg_beats(pre.ppg))
    except PipelineError as exc:
        raise _tag(exc, sid) from exc

    bounds = (config.ptt_min_s, config.ptt_max_s)
    rows = []
    for k, interval in enumerate(intervals):
        members = [p for p in pairs if interval.begin_s <= p.s1.time_s < interval.end_s]
        values = {}
        try:
            for kind in PttKind:
                samples = reject_outliers(compute_ptt(members, kind, bounds))
                agg = aggregate_interval(samples, interval, kind, k, config.sigma_s, config.min_beats)
                values[kind] = agg.ptt_s
        except SparseIntervalError as exc:
            log.warning("subject %s: interval %d excluded (%s)", sid, k, exc)
            continue
        rows.append(
            IntervalRow(
                sid, k, values[PttKind.FOOT], values[PttKind.DSLOPE], values[PttKind.PEAK],
                interval.ref_sbp_mmhg, interval.ref_dbp_mmhg,
            )
        )
    return SubjectAnalysis(intervals, pairs, rows)


def extract_cohort(
    load: Callable[[str], tuple[Recording, Sequence[tuple[float, float]]]],
    subject_ids: Iterable[str],
    config: PipelineConfig | None = None,
    jobs: int = 1,
) -> list[IntervalRow]:
    """Analyze every subject; ``load`` maps a subject id to (recording, readings)."""
    config = config or PipelineConfig()
    ids = sorted(subject_ids)

    def one(sid):
        recording, readings = load(sid)
        return analyze_subject(recording, readings, config).rows

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(one, ids))
    return [row for rows in results for row in rows]


@dataclass(frozen=True)
class CohortEvaluation:
    kind: PttKind
    pooled: dict[str, EvaluationReport]
    per_subject: dict[str, dict[str, EvaluationReport]]
    records: dict[str, list[PredictionRecord]]
    models: dict[str, list[CalibrationModel]]
    excluded: list[str]


def evaluate_cohort(rows: Sequence[IntervalRow], kind="peak", jobs: int = 1) -> CohortEvaluation:
    """Per-subject leave-one-out for both targets, then pooled metrics."""
    kind = PttKind(kind)
    by_subject: dict[str, list[IntervalRow]] = {}
    for row in rows:
        by_subject.setdefault(row.subject_id, []).append(row)
    ids = sorted(by_subject)

    def one(sid):
        aggs = [r.aggregate(kind) for r in sorted(by_subject[sid], key=lambda r: r.interval_index)]
        try:
            records = {t: loocv_subject(aggs, t, sid) for t in TARGETS}
        except InsufficientDataError as exc:
            log.warning("%s; subject excluded", exc)
            return None
        models = [fit([(a.ptt_s, a.reference(t)) for a in aggs], t) for t in TARGETS]
        return records, models

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = dict(zip(ids, pool.map(one, ids)))

    usable = {sid: res for sid, res in results.items() if res is not None}
    if not usable:
        raise InsufficientDataError("no subject has enough measurements to evaluate")
    pooled, per_subject, records = {}, {}, {}
    for target in TARGETS:
        per = {sid: res[0][target] for sid, res in usable.items()}
        pooled[target], per_subject[target] = pooled_report(per, target)
        records[target] = [r for sid in sorted(per) for r in per[sid]]
    return CohortEvaluation(
        kind=kind,
        pooled=pooled,
        per_subject=per_subject,
        records=records,
        models={sid: res[1] for sid, res in usable.items()},
        excluded=sorted(set(ids) - set(usable)),
    )
