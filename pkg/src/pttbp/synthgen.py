"""Synthetic PCG/PPG/FSR recordings with exactly known ground truth.

Transit time is obtained by inverting the calibration model on the SBP
trajectory, ``ptt_p = b1_sbp / (SBP - b0_sbp)``, one value per beat.

The physical model the inverse-PTT form approximates (vessel elasticity,
blood density, wall cross-section, path length) is not simulated; only the
calibrated form is.

PPG pulse, per beat (foot F, peak P = F + RISE_S, next foot F'):

* upstroke on [F, P]: raised cosine ``(1 - cos(pi (t - F) / RISE_S)) / 2``,
  so the max-slope point sits exactly at ``F + RISE_S / 2``;
* decay on [P, F']: ``(1 + cos(pi * phase)) / 2`` where the phase runs at
  the upstroke's rate near both ends and slowly in between.  The waveform
  is therefore locally even around every peak and foot, and zero-phase
  filtering leaves those extrema where they were placed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from pttbp.errors import ProfileError
from pttbp.recording import SAMPLE_RATE_HZ, Recording, SubjectManifest
from pttbp.segmentation import KeyMoments
from pttbp.signal import TimeSeries

RISE_S = 0.120
DECAY_BUMP_S = 0.030
S1_FREQ_HZ = 50.0
S2_FREQ_HZ = 60.0
BURST_SIGMA_S = 0.010  # +-3 sigma spans 60 ms
S2_DELAY_S = 0.3
S2_AMPLITUDE = 0.5
# cuff episode shape, relative to the reading moment t3
INFLATE_START_S = 25.0
DEFLATE_START_S = 17.0
DUMP_S = 0.5
DUMP_LEVEL = 0.3
MIN_SPACING_S = 56.0
PTT_BOUNDS_S = (0.05, 0.6)


@dataclass(frozen=True)
class SubjectProfile:
    subject_id: str
    b0_sbp: float
    b1_sbp: float
    b0_dbp: float
    b1_dbp: float
    hr_start_bpm: float
    hr_end_bpm: float
    sbp_start: float
    sbp_end: float
    dbp_start: float
    dbp_end: float
    n_measurements: int = 8
    duration_s: float = 480.0
    noise_snr_db: float = 30.0
    rng_seed: int = 0

    def sbp_at(self, t):
        return self.sbp_start + (self.sbp_end - self.sbp_start) * np.asarray(t) / self.duration_s

    def dbp_at(self, t):
        return self.dbp_start + (self.dbp_end - self.dbp_start) * np.asarray(t) / self.duration_s

    def hr_at(self, t):
        return self.hr_start_bpm + (self.hr_end_bpm - self.hr_start_bpm) * np.asarray(t) / self.duration_s

    def ptt_peak_at(self, t):
        return self.b1_sbp / (self.sbp_at(t) - self.b0_sbp)

    def validate(self) -> "SubjectProfile":
        if self.n_measurements < 3:
            raise ProfileError(f"{self.subject_id}: need at least 3 measurements")
        if not (self.b1_sbp > 0 and self.b1_dbp > 0):
            raise ProfileError(f"{self.subject_id}: b1 coefficients must be positive")
        if not (self.sbp_start > self.dbp_start and self.sbp_end > self.dbp_end):
            raise ProfileError(f"{self.subject_id}: SBP must exceed DBP throughout")
        if self.duration_s / self.n_measurements < MIN_SPACING_S:
            raise ProfileError(
                f"{self.subject_id}: {self.duration_s} s cannot hold {self.n_measurements} cuff episodes"
            )
        if not 30 <= min(self.hr_start_bpm, self.hr_end_bpm) <= max(self.hr_start_bpm, self.hr_end_bpm) <= 150:
            raise ProfileError(f"{self.subject_id}: heart rate must stay within 30-150 bpm")
        for bp in (self.sbp_start, self.sbp_end):
            if bp <= self.b0_sbp:
                raise ProfileError(f"{self.subject_id}: SBP {bp} at or below b0 {self.b0_sbp}")
            ptt = self.b1_sbp / (bp - self.b0_sbp)
            # all three kinds must stay in bounds; foot precedes the peak by RISE_S
            if not (PTT_BOUNDS_S[0] <= ptt - RISE_S and ptt <= PTT_BOUNDS_S[1]):
                raise ProfileError(
                    f"{self.subject_id}: implied PTT {ptt:.3f} s leaves "
                    f"[{PTT_BOUNDS_S[0] + RISE_S:.3f}, {PTT_BOUNDS_S[1]}] s"
                )
        return self


@dataclass(frozen=True)
class GroundTruth:
    s1_s: np.ndarray
    s2_s: np.ndarray
    foot_s: np.ndarray
    maxslope_s: np.ndarray
    peak_s: np.ndarray
    cuff_moments: tuple[KeyMoments, ...]
    readings: tuple[tuple[float, float], ...]

    @property
    def ptt_s(self) -> dict:
        return {
            "foot": self.foot_s - self.s1_s,
            "dslope": self.maxslope_s - self.s1_s,
            "peak": self.peak_s - self.s1_s,
        }


def consistent_profile(
    subject_id: str,
    b0_sbp: float,
    b1_sbp: float,
    b0_dbp: float,
    b1_dbp: float,
    ptt_start_s: float,
    ptt_end_s: float,
    **kwargs,
) -> SubjectProfile:
    """Profile whose SBP and DBP trajectories both lie exactly on their models.

    SBP is linear in time, so DBP = b0_dbp + b1_dbp * (SBP - b0_sbp) / b1_sbp
    is too.
    """
    sbp = [b0_sbp + b1_sbp / p for p in (ptt_start_s, ptt_end_s)]
    dbp = [b0_dbp + b1_dbp / p for p in (ptt_start_s, ptt_end_s)]
    return SubjectProfile(
        subject_id, b0_sbp, b1_sbp, b0_dbp, b1_dbp,
        kwargs.pop("hr_start_bpm", 110.0), kwargs.pop("hr_end_bpm", 75.0),
        sbp[0], sbp[1], dbp[0], dbp[1],
        **kwargs,
    )


def random_cohort(
    n_subjects: int,
    seed: int,
    n_measurements: int = 8,
    noise_snr_db: float = 30.0,
) -> list[SubjectProfile]:
    """Draw a cohort of model-consistent profiles (BP falling after exercise)."""
    rng = np.random.default_rng(seed)
    profiles = []
    for i in range(n_subjects):
        profiles.append(
            consistent_profile(
                f"S{i + 1:02d}",
                b0_sbp=float(rng.uniform(30, 60)),
                b1_sbp=float(rng.uniform(16, 28)),
                b0_dbp=float(rng.uniform(30, 45)),
                b1_dbp=float(rng.uniform(6, 10)),
                ptt_start_s=float(rng.uniform(0.19, 0.23)),
                ptt_end_s=float(rng.uniform(0.30, 0.38)),
                hr_start_bpm=float(rng.uniform(100, 130)),
                hr_end_bpm=float(rng.uniform(65, 85)),
                n_measurements=n_measurements,
                duration_s=60.0 * n_measurements,
                noise_snr_db=noise_snr_db,
                rng_seed=int(rng.integers(0, 2**31 - 1)),
            ).validate()
        )
    return profiles


def _beat_times(profile: SubjectProfile) -> np.ndarray:
    # start before zero so the first emitted samples already carry a pulse train
    t, times = -2.0, []
    while t < profile.duration_s + 1.0:
        times.append(t)
        t += 60.0 / float(profile.hr_at(min(max(t, 0.0), profile.duration_s)))
    return np.array(times)


def _decay_phase(u: np.ndarray, span: float) -> np.ndarray:
    """Monotone phase 0 -> 1 over [0, span], rate 1/RISE_S at both ends."""
    tau = DECAY_BUMP_S
    k = tau * math.sqrt(math.pi / 2)
    s = math.sqrt(2) * tau
    full = float(erf(span / s))
    fast = 1.0 / RISE_S
    # solve c * span + (fast - c) * 2 k erf(span/s) = 1 for the slow rate c
    c = (1.0 - fast * 2 * k * full) / (span - 2 * k * full)
    if not 0 < c < fast:
        raise ProfileError(f"beat interval too short for the pulse shape (decay {span:.3f} s)")
    return c * u + (fast - c) * k * (erf(u / s) + full - erf((span - u) / s))


def _ppg_wave(t: np.ndarray, feet: np.ndarray) -> np.ndarray:
    y = np.zeros_like(t)
    fs = SAMPLE_RATE_HZ
    for f, f_next in zip(feet[:-1], feet[1:]):
        peak = f + RISE_S
        i0, i1, i2 = (min(max(int(math.ceil(v * fs)), 0), t.size) for v in (f, peak, f_next))
        y[i0:i1] = 0.5 * (1 - np.cos(np.pi * (t[i0:i1] - f) / RISE_S))
        y[i1:i2] = 0.5 * (1 + np.cos(np.pi * _decay_phase(t[i1:i2] - peak, f_next - peak)))
    return y


def _burst(t: np.ndarray, centers: np.ndarray, freq_hz: float, amplitude: float) -> np.ndarray:
    y = np.zeros_like(t)
    fs = SAMPLE_RATE_HZ
    half = int(6 * BURST_SIGMA_S * fs)
    for c in centers:
        i = int(round(c * fs))
        lo, hi = max(0, i - half), min(t.size, i + half + 1)
        if lo >= hi:
            continue
        dt = t[lo:hi] - c
        y[lo:hi] += amplitude * np.exp(-(dt**2) / (2 * BURST_SIGMA_S**2)) * np.cos(2 * np.pi * freq_hz * dt)
    return y


def _fsr_wave(t: np.ndarray, t3s: np.ndarray) -> np.ndarray:
    xp = np.concatenate([[t3 - INFLATE_START_S, t3 - DEFLATE_START_S, t3 - DUMP_S, t3] for t3 in t3s])
    fp = np.tile([0.0, 1.0, DUMP_LEVEL, 0.0], len(t3s))
    return np.interp(t, xp, fp, left=0.0, right=0.0)


def _add_noise(clean: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    noise = rng.standard_normal(clean.size)
    if math.isinf(snr_db) and snr_db > 0:
        return clean
    power = float(np.var(clean))
    return clean + noise * math.sqrt(power / 10 ** (snr_db / 10))


def generate(profile: SubjectProfile) -> tuple[Recording, GroundTruth, SubjectManifest]:
    profile.validate()
    fs = SAMPLE_RATE_HZ
    n = int(round(profile.duration_s * fs))
    t = np.arange(n) / fs

    beats = _beat_times(profile)
    ptt_p = profile.ptt_peak_at(np.clip(beats, 0.0, profile.duration_s))
    peaks = beats + ptt_p
    feet = peaks - RISE_S
    if np.any(np.diff(feet) - RISE_S < 0.15):
        raise ProfileError(f"{profile.subject_id}: beats too close for the PPG pulse shape")

    spacing = profile.duration_s / profile.n_measurements
    t3s = (np.arange(profile.n_measurements) + 0.5) * spacing
    moments = tuple(
        KeyMoments(float(t3 - INFLATE_START_S), float(t3 - DEFLATE_START_S), float(t3)) for t3 in t3s
    )
    readings = tuple((float(profile.sbp_at(t3)), float(profile.dbp_at(t3))) for t3 in t3s)
    for sbp, dbp in readings:
        if not sbp > dbp > 0:
            raise ProfileError(f"{profile.subject_id}: reading {sbp:.1f}/{dbp:.1f} is not physiological")

    clean = {
        "pcg": _burst(t, beats, S1_FREQ_HZ, 1.0) + _burst(t, beats + S2_DELAY_S, S2_FREQ_HZ, S2_AMPLITUDE),
        "ppg": _ppg_wave(t, feet),
        "fsr": _fsr_wave(t, t3s),
    }
    rng = np.random.default_rng(profile.rng_seed)
    channels = {
        name: TimeSeries(_add_noise(clean[name], profile.noise_snr_db, rng), fs)
        for name in ("pcg", "ppg", "fsr")
    }
    recording = Recording(profile.subject_id, **channels)

    # keep beats whose whole cycle (S1 through the next foot) is on the record
    inside = (beats >= 0.5) & (feet[np.minimum(np.arange(beats.size) + 1, beats.size - 1)] < profile.duration_s - 0.5)
    inside[-1] = False
    truth = GroundTruth(
        s1_s=beats[inside],
        s2_s=beats[inside] + S2_DELAY_S,
        foot_s=feet[inside],
        maxslope_s=feet[inside] + RISE_S / 2,
        peak_s=peaks[inside],
        cuff_moments=moments,
        readings=readings,
    )
    return recording, truth, SubjectManifest(profile.subject_id, f"{profile.subject_id}.csv", readings)
