"""Damped harmonic oscillator coupled linearly to a continuum of bath oscillators.

Units: hbar = k_B = 1.
"""
from .core import (
    ConditionKind,
    DerivedRates,
    OscillatorParams,
    Regime,
    ReservoirCondition,
    SpectralGrid,
    Spectrum,
    Trajectory,
    classify_regime,
    derived_rates,
    total_energy,
)
from .coupling import OhmicCoupling, TabulatedCoupling, Verdict

__version__ = "0.1.0"

__all__ = [
    "ConditionKind",
    "DerivedRates",
    "OhmicCoupling",
    "OscillatorParams",
    "Regime",
    "ReservoirCondition",
    "SpectralGrid",
    "Spectrum",
    "TabulatedCoupling",
    "Trajectory",
    "Verdict",
    "classify_regime",
    "derived_rates",
    "total_energy",
]
