"""Cuff-less blood pressure estimation from PCG/PPG pulse transit time."""

from pttbp.calibration import CalibrationModel, fit, predict
from pttbp.errors import PipelineError
from pttbp.signal import FilterSpec, IirCoefficients, TimeSeries

__all__ = [
    "CalibrationModel",
    "FilterSpec",
    "IirCoefficients",
    "PipelineError",
    "TimeSeries",
    "fit",
    "predict",
]

__version__ = "0.1.0"
