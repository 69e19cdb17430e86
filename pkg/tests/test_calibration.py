import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pttbp.calibration import CalibrationModel, fit, load_models, predict, save_models
from pttbp.errors import InvalidArgumentError, SingularDesignError


def lstsq_oracle(ptt, bp):
    """Independent route: generic least squares on the [1, 1/ptt] design."""
    design = np.column_stack([np.ones(len(ptt)), 1.0 / np.asarray(ptt)])
    (b0, b1), *_ = np.linalg.lstsq(design, np.asarray(bp), rcond=None)
    return b0, b1


def sums_oracle(ptt, bp):
    """Textbook simple-regression sums, uncentered."""
    x = [1.0 / p for p in ptt]
    n = len(x)
    sx, sy = math.fsum(x), math.fsum(bp)
    sxx = math.fsum(v * v for v in x)
    sxy = math.fsum(a * b for a, b in zip(x, bp))
    b1 = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    return (sy - b1 * sx) / n, b1


point_sets = st.lists(
    st.tuples(st.floats(0.1, 0.5), st.floats(60, 220)), min_size=3, max_size=20
).filter(lambda pts: np.ptp([1 / p for p, _ in pts]) > 0.5)


class TestFit:
    def test_exact_family(self):
        m = fit([(0.20, 150.0), (0.25, 130.0), (0.40, 100.0)], "SBP")
        assert m.b0_mmhg == pytest.approx(50, abs=1e-9)
        assert m.b1_mmhg_s == pytest.approx(20, abs=1e-9)
        assert (m.target, m.n_points) == ("SBP", 3)

    def test_two_points_interpolate(self):
        pts = [(0.22, 131.0), (0.31, 104.0)]
        m = fit(pts, "DBP")
        for p, bp in pts:
            assert predict(m, p) == pytest.approx(bp, abs=1e-9)

    def test_noisy_matches_oracles_and_truth(self):
        rng = np.random.default_rng(7)
        ptt = rng.uniform(0.15, 0.4, 50)
        bp = 50 + 20 / ptt + rng.normal(0, 2.0, 50)
        m = fit(list(zip(ptt, bp)), "SBP")
        for b0, b1 in (lstsq_oracle(ptt, bp), sums_oracle(ptt, bp)):
            assert m.b0_mmhg == pytest.approx(b0, rel=1e-9)
            assert m.b1_mmhg_s == pytest.approx(b1, rel=1e-9)
        x = 1 / ptt
        sxx = np.sum((x - x.mean()) ** 2)
        se_b1 = 2.0 / math.sqrt(sxx)
        se_b0 = 2.0 * math.sqrt(1 / 50 + x.mean() ** 2 / sxx)
        assert abs(m.b1_mmhg_s - 20) < 3 * se_b1
        assert abs(m.b0_mmhg - 50) < 3 * se_b0

    def test_equal_ptt_singular(self):
        with pytest.raises(SingularDesignError):
            fit([(0.25, 120.0), (0.25, 125.0), (0.25, 118.0)], "SBP")

    @pytest.mark.parametrize("bad", [0.0, -0.1])
    def test_nonpositive_ptt(self, bad):
        with pytest.raises(InvalidArgumentError):
            fit([(bad, 120.0), (0.25, 125.0)], "SBP")

    def test_one_point(self):
        with pytest.raises(InvalidArgumentError):
            fit([(0.25, 120.0)], "SBP")

    def test_bad_target(self):
        with pytest.raises(InvalidArgumentError):
            fit([(0.2, 120.0), (0.3, 100.0)], "MAP")

    @settings(max_examples=100, deadline=None)
    @given(point_sets)
    def test_residuals_orthogonal_to_design(self, pts):
        m = fit(pts, "SBP")
        ptt = np.array([p for p, _ in pts])
        bp = np.array([b for _, b in pts])
        resid = bp - np.array([predict(m, p) for p in ptt])
        scale = np.linalg.norm(bp)
        assert abs(resid.sum()) <= 1e-6 * scale * len(pts)
        assert abs(np.dot(resid, 1 / ptt)) <= 1e-6 * scale * np.linalg.norm(1 / ptt)
        b0, b1 = lstsq_oracle(ptt, bp)
        assert m.b1_mmhg_s == pytest.approx(b1, rel=1e-7, abs=1e-7)

    @settings(max_examples=100, deadline=None)
    @given(point_sets, st.floats(0.1, 10), st.floats(-50, 50))
    def test_scale_and_shift_equivariance(self, pts, c, shift):
        m = fit(pts, "SBP")
        scaled = fit([(p, c * b) for p, b in pts], "SBP")
        shifted = fit([(p, b + shift) for p, b in pts], "SBP")
        tol = 1e-7 * (abs(m.b0_mmhg) + abs(m.b1_mmhg_s) + 1)
        assert scaled.b0_mmhg == pytest.approx(c * m.b0_mmhg, abs=c * tol)
        assert scaled.b1_mmhg_s == pytest.approx(c * m.b1_mmhg_s, abs=c * tol)
        assert shifted.b0_mmhg == pytest.approx(m.b0_mmhg + shift, abs=tol)
        assert shifted.b1_mmhg_s == pytest.approx(m.b1_mmhg_s, abs=tol)


class TestPredict:
    def test_substitution(self):
        assert predict(CalibrationModel("SBP", 50, 20, 3), 0.2) == pytest.approx(150.0)

    def test_zero_slope(self):
        m = CalibrationModel("DBP", 70, 0.0, 3)
        assert {predict(m, p) for p in (0.1, 0.3, 0.55)} == {70.0}

    def test_held_out_on_curve(self):
        m = fit([(p, 50 + 20 / p) for p in (0.18, 0.24, 0.35)], "SBP")
        assert predict(m, 0.29) == pytest.approx(50 + 20 / 0.29, abs=1e-6)

    def test_nonpositive(self):
        with pytest.raises(InvalidArgumentError):
            predict(CalibrationModel("SBP", 50, 20, 3), 0.0)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.01, 100), st.floats(0.05, 0.59), st.floats(0.001, 0.5))
    def test_monotone_decreasing(self, b1, p, dp):
        m = CalibrationModel("SBP", 40.0, b1, 3)
        assert predict(m, p + dp) < predict(m, p)


def test_model_file_round_trip(tmp_path):
    models = [CalibrationModel("SBP", 50.125, 20.5, 7), CalibrationModel("DBP", 40.0, 8.25, 7)]
    path = tmp_path / "models.json"
    save_models(models, path)
    assert load_models(path) == models


def test_model_rejects_nonfinite():
    with pytest.raises(InvalidArgumentError):
        CalibrationModel("SBP", float("nan"), 1.0, 3)
