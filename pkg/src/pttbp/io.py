"""File formats: recordings, cohort manifest, aggregates, reports, ground truth.

Recording CSV
    header ``t_ms,pcg,ppg,fsr``; one row per millisecond.  Values are written
    with 17 significant digits so a write/read round trip is lossless.

Cohort manifest (JSON)
    ``{"subjects": [{"subject_id", "recording_path", "readings": [[sbp, dbp], ...]}]}``
    with recording paths resolved relative to the manifest.

Other loaders only need to return a :class:`~pttbp.recording.Recording`;
register them in ``RECORDING_LOADERS`` by file suffix.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from pttbp.errors import InvalidArgumentError, PipelineError
from pttbp.evaluation import bland_altman_points
from pttbp.pipeline import CohortEvaluation, IntervalRow
from pttbp.recording import SAMPLE_RATE_HZ, Recording, SubjectManifest
from pttbp.signal import TimeSeries
from pttbp.synthgen import GroundTruth

RECORDING_HEADER = ("t_ms", "pcg", "ppg", "fsr")
AGGREGATE_HEADER = ("subject_id", "interval_index", "ptt_f_s", "ptt_d_s", "ptt_p_s", "sbp_mmhg", "dbp_mmhg")
RECORD_HEADER = ("subject_id", "interval_index", "target", "estimate_mmhg", "reference_mmhg")
BLAND_HEADER = ("mean_of_pair_mmhg", "difference_mmhg")
TRUTH_HEADER = ("s1_s", "s2_s", "foot_s", "maxslope_s", "peak_s")
CUFF_HEADER = ("t1_s", "t2_s", "t3_s", "sbp_mmhg", "dbp_mmhg")


class DataFileError(PipelineError):
    """Missing or malformed input file."""


def _fmt(value) -> str:
    return repr(float(value))


def write_recording(recording: Recording, path) -> None:
    recording.validate()
    if recording.sample_rate_hz != SAMPLE_RATE_HZ:
        raise InvalidArgumentError("recording files are fixed at 1000 Hz")
    start_ms = int(round(recording.pcg.start_time_s * 1000))
    t_ms = start_ms + np.arange(len(recording.pcg))
    channels = zip(recording.pcg.samples.tolist(), recording.ppg.samples.tolist(), recording.fsr.samples.tolist())
    with open(path, "w", newline="") as fh:
        fh.write(",".join(RECORDING_HEADER) + "\n")
        # repr is the shortest string that round-trips exactly
        fh.write("".join(f"{t},{a!r},{b!r},{c!r}\n" for t, (a, b, c) in zip(t_ms.tolist(), channels)))


def read_csv_recording(path, subject_id: str) -> Recording:
    path = Path(path)
    try:
        with open(path) as fh:
            header = tuple(h.strip() for h in fh.readline().strip().split(","))
            if header != RECORDING_HEADER:
                raise DataFileError(f"{path}: expected header {','.join(RECORDING_HEADER)}, got {','.join(header)}")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError as exc:
        raise DataFileError(f"cannot read recording {path}: {exc}") from None
    except ValueError as exc:
        raise DataFileError(f"{path}: malformed recording ({exc})") from None
    if data.shape[0] == 0:
        raise DataFileError(f"{path}: recording has no samples")
    t_ms = data[:, 0]
    if np.any(np.diff(t_ms) != 1):
        raise DataFileError(f"{path}: t_ms must advance by exactly 1 ms per row")
    start = t_ms[0] / 1000.0
    channels = {name: TimeSeries(data[:, i + 1], SAMPLE_RATE_HZ, start) for i, name in enumerate(("pcg", "ppg", "fsr"))}
    return Recording(subject_id, **channels)


RECORDING_LOADERS: dict[str, Callable[[Path, str], Recording]] = {".csv": read_csv_recording}


def read_recording(path, subject_id: str) -> Recording:
    path = Path(path)
    loader = RECORDING_LOADERS.get(path.suffix.lower())
    if loader is None:
        raise DataFileError(f"no loader for {path.suffix!r} recordings")
    return loader(path, subject_id)


def write_manifest(entries: Sequence[SubjectManifest], path) -> None:
    payload = {
        "subjects": [
            {"subject_id": e.subject_id, "recording_path": e.recording_path, "readings": [list(r) for r in e.readings]}
            for e in entries
        ]
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def read_manifest(path) -> list[SubjectManifest]:
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
        entries = [
            SubjectManifest(
                str(s["subject_id"]),
                str(path.parent / s["recording_path"]),
                tuple((float(a), float(b)) for a, b in s["readings"]),
            )
            for s in payload["subjects"]
        ]
    except OSError as exc:
        raise DataFileError(f"cannot read manifest {path}: {exc}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise DataFileError(f"{path}: malformed manifest ({exc})") from None
    ids = [e.subject_id for e in entries]
    if len(set(ids)) != len(ids):
        raise DataFileError(f"{path}: duplicate subject ids")
    return entries


def write_aggregates(rows: Sequence[IntervalRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATE_HEADER)
        for r in rows:
            w.writerow([r.subject_id, r.interval_index, _fmt(r.ptt_f_s), _fmt(r.ptt_d_s), _fmt(r.ptt_p_s),
                        _fmt(r.sbp_mmhg), _fmt(r.dbp_mmhg)])


def read_aggregates(path) -> list[IntervalRow]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != AGGREGATE_HEADER:
                raise DataFileError(f"{path}: expected header {','.join(AGGREGATE_HEADER)}")
            return [
                IntervalRow(
                    row["subject_id"], int(row["interval_index"]),
                    *(float(row[k]) for k in AGGREGATE_HEADER[2:]),
                )
                for row in reader
            ]
    except OSError as exc:
        raise DataFileError(f"cannot read aggregates {path}: {exc}") from None
    except (ValueError, TypeError) as exc:
        raise DataFileError(f"{path}: malformed aggregates ({exc})") from None


def write_ground_truth(truth: GroundTruth, beats_path, cuff_path) -> None:
    with open(beats_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRUTH_HEADER)
        for row in zip(truth.s1_s, truth.s2_s, truth.foot_s, truth.maxslope_s, truth.peak_s):
            w.writerow([_fmt(v) for v in row])
    with open(cuff_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CUFF_HEADER)
        for m, (sbp, dbp) in zip(truth.cuff_moments, truth.readings):
            w.writerow([_fmt(v) for v in (m.t1_s, m.t2_s, m.t3_s, sbp, dbp)])


def write_reports(evaluation: CohortEvaluation, report_dir) -> list[Path]:
    """Summary JSON, prediction records, Bland-Altman points and fitted models."""
    out = Path(report_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    summary = {
        "ptt_kind": evaluation.kind.value,
        "ptt_label": evaluation.kind.label,
        "excluded_subjects": evaluation.excluded,
        "pooled": {t: rep.summary() for t, rep in evaluation.pooled.items()},
        "per_subject": {
            t: {sid: rep.summary() for sid, rep in sorted(subs.items())}
            for t, subs in evaluation.per_subject.items()
        },
    }
    path = out / "summary.json"
    path.write_text(json.dumps(summary, indent=2) + "\n")
    written.append(path)

    path = out / "records.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_HEADER)
        for target in ("SBP", "DBP"):
            for r in evaluation.records[target]:
                w.writerow([r.subject_id, r.interval_index, r.target, _fmt(r.estimate_mmhg), _fmt(r.reference_mmhg)])
    written.append(path)

    for target in ("SBP", "DBP"):
        path = out / f"bland_altman_{target.lower()}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(BLAND_HEADER)
            for mean, diff in bland_altman_points(evaluation.records[target]):
                w.writerow([_fmt(mean), _fmt(diff)])
        written.append(path)

    path = out / "models.json"
    models = {
        sid: [{"target": m.target, "b0_mmhg": m.b0_mmhg, "b1_mmhg_s": m.b1_mmhg_s, "n_points": m.n_points} for m in ms]
        for sid, ms in sorted(evaluation.models.items())
    }
    path.write_text(json.dumps(models, indent=2) + "\n")
    written.append(path)
    return written
