"""Command-line entry point: ``pttbp {synth,extract,evaluate,run}``.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from pttbp.config import PTT_KINDS, load_config
from pttbp.errors import PipelineError
from pttbp.io import (
    read_aggregates,
    read_manifest,
    read_recording,
    write_aggregates,
    write_ground_truth,
    write_manifest,
    write_recording,
    write_reports,
)
from pttbp.pipeline import evaluate_cohort, extract_cohort
from pttbp.synthgen import generate, random_cohort

log = logging.getLogger("pttbp")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _synth_one(profile, out: Path):
    recording, truth, entry = generate(profile)
    write_recording(recording, out / entry.recording_path)
    write_ground_truth(
        truth,
        out / "truth" / f"{profile.subject_id}_beats.csv",
        out / "truth" / f"{profile.subject_id}_cuff.csv",
    )
    return entry


def cmd_synth(config_path, output_dir, n_subjects, seed, n_measurements=8, snr_db=30.0, jobs=1) -> int:
    if n_subjects < 1:
        raise UsageError("--n-subjects must be at least 1")
    if n_measurements < 3:
        raise UsageError("--measurements must be at least 3")
    config = load_config(config_path)
    seed = config.seed if seed is None else seed
    out = Path(output_dir)
    (out / "truth").mkdir(parents=True, exist_ok=True)
    profiles = random_cohort(n_subjects, seed, n_measurements, snr_db)
    if jobs > 1:
        # text formatting is GIL-bound, so fan out to processes
        with ProcessPoolExecutor(min(jobs, len(profiles))) as pool:
            entries = list(pool.map(_synth_one, profiles, [out] * len(profiles)))
    else:
        entries = [_synth_one(p, out) for p in profiles]
    write_manifest(entries, out / "manifest.json")
    log.info("wrote %d synthetic subjects to %s", len(entries), out)
    return EXIT_OK


def _extract(manifest_path, config, jobs):
    entries = {e.subject_id: e for e in read_manifest(manifest_path)}

    def load(sid):
        entry = entries[sid]
        return read_recording(entry.recording_path, sid), entry.readings

    return extract_cohort(load, entries, config, jobs)


def cmd_extract(manifest_path, config_path, output_path, jobs=1) -> int:
    config = load_config(config_path)
    rows = _extract(manifest_path, config, jobs)
    Path(output_path).parent.mkdir(parents=True, exist_ok=True)
    write_aggregates(rows, output_path)
    log.info("wrote %d interval rows to %s", len(rows), output_path)
    return EXIT_OK


def cmd_evaluate(aggregates_path, config_path, report_dir, kind=None, jobs=1) -> int:
    config = load_config(config_path)
    evaluation = evaluate_cohort(read_aggregates(aggregates_path), kind or config.kind, jobs)
    write_reports(evaluation, report_dir)
    for target, rep in evaluation.pooled.items():
        log.info(
            "%s %s: MAE %.2f STD %.2f r %.3f (n=%d)",
            evaluation.kind.label, target, rep.mae_mmhg, rep.std_mmhg, rep.r, rep.n,
        )
    return EXIT_OK


def cmd_run(manifest_path, config_path, report_dir, kind=None, jobs=1) -> int:
    out = Path(report_dir)
    out.mkdir(parents=True, exist_ok=True)
    cmd_extract(manifest_path, config_path, out / "aggregates.csv", jobs)
    return cmd_evaluate(out / "aggregates.csv", config_path, out, kind, jobs)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pttbp", description="Cuff-less BP estimation from PCG/PPG transit time.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, manifest=False, kind=False):
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--jobs", type=int, default=1, help="subjects processed in parallel")
        if manifest:
            p.add_argument("--manifest", required=True, help="cohort manifest (JSON)")
        if kind:
            p.add_argument("--kind", choices=PTT_KINDS, help="PTT fiducial (default from config: peak)")

    p = sub.add_parser("synth", help="write a synthetic cohort with ground truth")
    common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n-subjects", type=int, default=24)
    p.add_argument("--seed", type=int)
    p.add_argument("--measurements", type=int, default=8, help="cuff readings per subject")
    p.add_argument("--snr-db", type=float, default=30.0)

    p = sub.add_parser("extract", help="per-interval PTT aggregates from recordings")
    common(p, manifest=True)
    p.add_argument("--out", required=True, help="aggregates CSV to write")

    p = sub.add_parser("evaluate", help="leave-one-out evaluation of an aggregates file")
    common(p, kind=True)
    p.add_argument("--aggregates", required=True)
    p.add_argument("--out", required=True, help="report directory")

    p = sub.add_parser("run", help="extract then evaluate")
    common(p, manifest=True, kind=True)
    p.add_argument("--out", required=True, help="report directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be at least 1")
        if args.command == "synth":
            return cmd_synth(
                args.config, args.out, args.n_subjects, args.seed, args.measurements, args.snr_db, args.jobs
            )
        if args.command == "extract":
            return cmd_extract(args.manifest, args.config, args.out, args.jobs)
        if args.command == "evaluate":
            return cmd_evaluate(args.aggregates, args.config, args.out, args.kind, args.jobs)
        return cmd_run(args.manifest, args.config, args.out, args.kind, args.jobs)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except PipelineError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_DATA
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
