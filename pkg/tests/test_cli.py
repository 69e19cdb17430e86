import csv
import json
import logging
import math

import pytest

from pttbp.cli import main
from pttbp.io import write_manifest, write_recording
from pttbp.synthgen import consistent_profile, generate


def tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def cohort(tmp_path_factory):
    out = tmp_path_factory.mktemp("cohort")
    assert main(["synth", "--out", str(out), "--n-subjects", "3", "--seed", "5", "--snr-db", "inf"]) == 0
    return out


@pytest.fixture(scope="module")
def run_dir(cohort, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    assert main(["run", "--manifest", str(cohort / "manifest.json"), "--out", str(out)]) == 0
    return out


class TestSynth:
    def test_count_contract(self, tmp_path):
        code = main(["synth", "--out", str(tmp_path), "--n-subjects", "24", "--seed", "1",
                     "--measurements", "3", "--jobs", "4"])
        assert code == 0
        recordings = sorted(p.name for p in tmp_path.glob("*.csv"))
        assert recordings == [f"S{k:02d}.csv" for k in range(1, 25)]
        assert [p.name for p in tmp_path.glob("*.json")] == ["manifest.json"]
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert len(manifest["subjects"]) == 24
        assert all(len(s["readings"]) == 3 for s in manifest["subjects"])
        assert len(list((tmp_path / "truth").glob("*_beats.csv"))) == 24

    def test_byte_identical_across_runs_and_jobs(self, tmp_path):
        args = ["synth", "--n-subjects", "2", "--seed", "9", "--measurements", "3"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b"), "--jobs", "2"]) == 0
        a, b = tree(tmp_path / "a"), tree(tmp_path / "b")
        assert a.keys() == b.keys() and a == b

    def test_zero_subjects_is_usage_error(self, tmp_path):
        assert main(["synth", "--out", str(tmp_path), "--n-subjects", "0"]) == 1

    def test_unwritable_destination(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert main(["synth", "--out", str(blocker / "sub"), "--n-subjects", "1"]) != 0

    def test_bad_flag(self):
        with pytest.raises(SystemExit) as info:
            main(["synth", "--bogus"])
        assert info.value.code == 1


class TestExtract:
    def test_one_row_per_measurement(self, cohort, tmp_path):
        out = tmp_path / "agg.csv"
        assert main(["extract", "--manifest", str(cohort / "manifest.json"), "--out", str(out)]) == 0
        rows = read_csv(out)
        assert list(rows[0]) == ["subject_id", "interval_index", "ptt_f_s", "ptt_d_s", "ptt_p_s", "sbp_mmhg", "dbp_mmhg"]
        assert [(r["subject_id"], int(r["interval_index"])) for r in rows] == [
            (f"S0{s}", k) for s in (1, 2, 3) for k in range(8)
        ]
        truth = read_csv(cohort / "truth" / "S01_cuff.csv")
        assert [float(r["sbp_mmhg"]) for r in rows[:8]] == [float(t["sbp_mmhg"]) for t in truth]

    def test_mismatch_names_subject(self, cohort, tmp_path, caplog):
        manifest = json.loads((cohort / "manifest.json").read_text())
        manifest["subjects"][1]["readings"].pop()
        for s in manifest["subjects"]:
            s["recording_path"] = str(cohort / s["recording_path"])
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps(manifest))
        with caplog.at_level(logging.ERROR):
            code = main(["extract", "--manifest", str(path), "--out", str(tmp_path / "a.csv")])
        assert code == 2
        assert "S02" in caplog.text

    def test_missing_recording(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps({"subjects": [{"subject_id": "Z", "recording_path": "Z.csv",
                                                  "readings": [[120, 80]] * 3}]}))
        assert main(["extract", "--manifest", str(path), "--out", str(tmp_path / "a.csv")]) == 2

    def test_noiseless_constant_ptt(self, tmp_path):
        prof = consistent_profile(
            "K", 50.0, 20.0, 40.0, 8.0, 0.25, 0.25, hr_start_bpm=75, hr_end_bpm=75,
            n_measurements=3, duration_s=180.0, noise_snr_db=float("inf"),
        )
        rec, _, entry = generate(prof)
        write_recording(rec, tmp_path / entry.recording_path)
        write_manifest([entry], tmp_path / "manifest.json")
        out = tmp_path / "agg.csv"
        assert main(["extract", "--manifest", str(tmp_path / "manifest.json"), "--out", str(out)]) == 0
        rows = read_csv(out)
        assert len(rows) == 3
        for r in rows:
            assert abs(float(r["ptt_p_s"]) - 0.25) <= 0.005


class TestEvaluate:
    def test_exact_cohort_mae(self, run_dir):
        summary = json.loads((run_dir / "summary.json").read_text())
        for target in ("SBP", "DBP"):
            assert summary["pooled"][target]["mae_mmhg"] < 0.1
            assert summary["pooled"][target]["n"] == 24

    def test_label_peak(self, run_dir):
        summary = json.loads((run_dir / "summary.json").read_text())
        assert (summary["ptt_kind"], summary["ptt_label"]) == ("peak", "PTT_p")

    def test_loa_width_in_files(self, run_dir):
        summary = json.loads((run_dir / "summary.json").read_text())
        reports = list(summary["pooled"].values())
        reports += [r for subs in summary["per_subject"].values() for r in subs.values()]
        for rep in reports:
            width = rep["loa_high_mmhg"] - rep["loa_low_mmhg"]
            assert math.isclose(width, 3.92 * rep["std_mmhg"], rel_tol=1e-12, abs_tol=1e-15)

    def test_report_files(self, run_dir):
        names = sorted(p.name for p in run_dir.iterdir())
        assert names == ["aggregates.csv", "bland_altman_dbp.csv", "bland_altman_sbp.csv",
                         "models.json", "records.csv", "summary.json"]
        records = read_csv(run_dir / "records.csv")
        assert list(records[0]) == ["subject_id", "interval_index", "target", "estimate_mmhg", "reference_mmhg"]
        assert len(records) == 48
        bland = read_csv(run_dir / "bland_altman_sbp.csv")
        assert list(bland[0]) == ["mean_of_pair_mmhg", "difference_mmhg"] and len(bland) == 24

    def test_kind_selection(self, run_dir, tmp_path):
        code = main(["evaluate", "--aggregates", str(run_dir / "aggregates.csv"), "--out", str(tmp_path), "--kind", "foot"])
        assert code == 0
        assert json.loads((tmp_path / "summary.json").read_text())["ptt_label"] == "PTT_f"

    def test_kind_from_config(self, run_dir, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("ptt.kind = dslope\n")
        code = main(["evaluate", "--aggregates", str(run_dir / "aggregates.csv"), "--out", str(tmp_path / "r"),
                     "--config", str(cfg)])
        assert code == 0
        assert json.loads((tmp_path / "r" / "summary.json").read_text())["ptt_label"] == "PTT_d"

    def test_short_subject_excluded(self, run_dir, tmp_path):
        lines = (run_dir / "aggregates.csv").read_text().splitlines()
        keep = [lines[0]] + [l for l in lines[1:] if not l.startswith("S03") or l.split(",")[1] in ("0", "1")]
        agg = tmp_path / "agg.csv"
        agg.write_text("\n".join(keep) + "\n")
        assert main(["evaluate", "--aggregates", str(agg), "--out", str(tmp_path / "r")]) == 0
        summary = json.loads((tmp_path / "r" / "summary.json").read_text())
        assert summary["excluded_subjects"] == ["S03"]
        assert summary["pooled"]["SBP"]["n"] == 16

    def test_no_usable_subjects(self, run_dir, tmp_path):
        lines = (run_dir / "aggregates.csv").read_text().splitlines()
        agg = tmp_path / "agg.csv"
        agg.write_text("\n".join(lines[:3]) + "\n")
        assert main(["evaluate", "--aggregates", str(agg), "--out", str(tmp_path / "r")]) == 2

    def test_missing_aggregates(self, tmp_path):
        assert main(["evaluate", "--aggregates", str(tmp_path / "none.csv"), "--out", str(tmp_path)]) == 2

    def test_bad_config(self, run_dir, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("aggregate.sigma_s = zero\n")
        code = main(["evaluate", "--aggregates", str(run_dir / "aggregates.csv"), "--out", str(tmp_path),
                     "--config", str(cfg)])
        assert code == 1


def test_run_is_deterministic_across_jobs(cohort, tmp_path):
    manifest = str(cohort / "manifest.json")
    assert main(["run", "--manifest", manifest, "--out", str(tmp_path / "j1"), "--jobs", "1"]) == 0
    assert main(["run", "--manifest", manifest, "--out", str(tmp_path / "j4"), "--jobs", "4"]) == 0
    assert tree(tmp_path / "j1") == tree(tmp_path / "j4")
