"""Three-channel synchronized recording."""

from __future__ import annotations

from dataclasses import dataclass

from pttbp.errors import InvalidArgumentError
from pttbp.signal import CHANNELS, TimeSeries

SAMPLE_RATE_HZ = 1000.0


@dataclass(frozen=True)
class Recording:
    subject_id: str
    pcg: TimeSeries
    ppg: TimeSeries
    fsr: TimeSeries

    def channel(self, name: str) -> TimeSeries:
        if name not in CHANNELS:
            raise InvalidArgumentError(f"unknown channel {name!r}")
        return getattr(self, name)

    def validate(self) -> None:
        rates = {self.channel(c).sample_rate_hz for c in CHANNELS}
        lengths = {len(self.channel(c)) for c in CHANNELS}
        starts = {self.channel(c).start_time_s for c in CHANNELS}
        if len(rates) != 1 or len(lengths) != 1 or len(starts) != 1:
            raise InvalidArgumentError(
                f"recording {self.subject_id!r}: channels differ in rate, length or start time"
            )
        if 0 in lengths:
            raise InvalidArgumentError(f"recording {self.subject_id!r} is empty")

    @property
    def sample_rate_hz(self) -> float:
        return self.pcg.sample_rate_hz

    @property
    def span(self) -> tuple[float, float]:
        return (self.pcg.start_time_s, self.pcg.start_time_s + self.pcg.duration_s)


@dataclass(frozen=True)
class SubjectManifest:
    subject_id: str
    recording_path: str
    readings: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.readings) < 3:
            raise InvalidArgumentError(f"subject {self.subject_id!r}: need at least 3 readings")
        for sbp, dbp in self.readings:
            if not sbp > dbp:
                raise InvalidArgumentError(f"subject {self.subject_id!r}: reading {sbp}/{dbp} has SBP <= DBP")
