"""Two-weight testing machinery for maximal Hilbert transforms on the line.

Exact step-plus-atom measures, shifted dyadic grids, smoothly truncated
Hilbert transforms with noncentered parameter suprema, Poisson-type tail
functionals, Whitney and stopping-cube decompositions, and estimators with
witnesses for every two-weight testing constant, plus a CLI (`tws`).
"""

from .backend import BACKEND
from .measures import (
    Interval,
    StepAtomicMeasure,
    StepFunction,
    WeightPair,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Interval",
    "StepAtomicMeasure",
    "StepFunction",
    "WeightPair",
    "__version__",
]
