"""Accurate one-sided Kolmogorov-Smirnov distribution (SF, CDF, PDF, ISF)."""

from .core import (
    NxSplit,
    PrecisionMode,
    SmirnovTriple,
    nx_split,
    smirnov,
    smirnov_cdf,
    smirnov_pdf,
    smirnov_sf,
)
from .invert import (
    ConvergenceError,
    ProbabilityPair,
    SolveReport,
    smirnov_isf,
    smirnov_ppf,
    smirnovi,
)

__all__ = [
    "ConvergenceError",
    "NxSplit",
    "PrecisionMode",
    "ProbabilityPair",
    "SmirnovTriple",
    "SolveReport",
    "nx_split",
    "smirnov",
    "smirnov_cdf",
    "smirnov_isf",
    "smirnov_pdf",
    "smirnov_ppf",
    "smirnov_sf",
    "smirnovi",
]
