import numpy as np
import pytest

from pttbp.synthgen import consistent_profile, generate


def match_nearest(detected, truth):
    """Index of the nearest detected time for every true time."""
    detected = np.asarray(detected)
    idx = np.searchsorted(detected, truth).clip(1, len(detected) - 1)
    left = detected[idx - 1]
    right = detected[idx]
    return np.where(np.abs(truth - left) <= np.abs(right - truth), idx - 1, idx)


@pytest.fixture(scope="session")
def profile():
    return consistent_profile(
        "T01", b0_sbp=50.0, b1_sbp=20.0, b0_dbp=40.0, b1_dbp=8.0,
        ptt_start_s=0.20, ptt_end_s=0.32, n_measurements=4, duration_s=240.0,
        noise_snr_db=30.0, rng_seed=11,
    )


@pytest.fixture(scope="session")
def synthetic_subject(profile):
    return generate(profile)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
