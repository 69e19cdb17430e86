"""Per-subject inverse-PTT model ``BP = b0 + b1 / PTT`` (PTT in seconds)."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from pttbp.errors import InvalidArgumentError, SingularDesignError

TARGETS = ("SBP", "DBP")


@dataclass(frozen=True)
class CalibrationModel:
    target: str
    b0_mmhg: float
    b1_mmhg_s: float
    n_points: int

    def __post_init__(self):
        if self.target not in TARGETS:
            raise InvalidArgumentError(f"target must be SBP or DBP, got {self.target!r}")
        if self.n_points < 2 or not (math.isfinite(self.b0_mmhg) and math.isfinite(self.b1_mmhg_s)):
            raise InvalidArgumentError(f"invalid calibration model {self}")


def fit(points: Sequence[tuple[float, float]], target: str) -> CalibrationModel:
    """Least-squares fit of bp on 1/ptt via the centered normal equations."""
    arr = np.asarray(points, dtype=float).reshape(-1, 2)
    if arr.shape[0] < 2:
        raise InvalidArgumentError(f"need at least 2 calibration points, got {arr.shape[0]}")
    ptt, bp = arr[:, 0], arr[:, 1]
    if np.any(ptt <= 0) or not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("ptt values must be positive and finite")
    x = 1.0 / ptt
    xm, ym = x.mean(), bp.mean()
    dx = x - xm
    sxx = float(np.dot(dx, dx))
    if sxx <= 1e-12 * max(1.0, xm * xm) * x.size:
        raise SingularDesignError("all ptt values are equal; slope is unidentifiable")
    b1 = float(np.dot(dx, bp - ym)) / sxx
    b0 = float(ym - b1 * xm)
    return CalibrationModel(target, b0, b1, int(x.size))


def predict(model: CalibrationModel, ptt_s: float) -> float:
    if not ptt_s > 0:
        raise InvalidArgumentError(f"ptt must be positive, got {ptt_s}")
    return model.b0_mmhg + model.b1_mmhg_s / ptt_s


def save_models(models: Iterable[CalibrationModel], path) -> None:
    payload = [asdict(m) for m in models]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_models(path) -> list[CalibrationModel]:
    return [CalibrationModel(**entry) for entry in json.loads(Path(path).read_text())]
