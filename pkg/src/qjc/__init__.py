"""Spectra of extended Jaynes-Cummings models on truncated Fock spaces.

The package computes the same spectra by independent routes and checks them
against each other: closed-form doublet formulas, algebraic diagonalization
of finite invariant subspaces, a power-series recurrence whose truncation
roots recover the algebraic levels, and a gauge-transformed polynomial
(differential-operator) representation.
"""

from .errors import (
    NumericalError,
    TrackingAmbiguityError,
    UnpairableSpectrumError,
    ValidationError,
)
from .fock import SpinFockOperator, TruncatedFockSpace
from .models import (
    ModelParams,
    build_extended,
    build_h12,
    build_ht,
    build_jcm,
    build_pseudo_jcm,
)

__all__ = [
    "ModelParams",
    "NumericalError",
    "SpinFockOperator",
    "TrackingAmbiguityError",
    "TruncatedFockSpace",
    "UnpairableSpectrumError",
    "ValidationError",
    "build_extended",
    "build_h12",
    "build_ht",
    "build_jcm",
    "build_pseudo_jcm",
]

__version__ = "0.1.0"
