"""Exception types shared across the package.

ValidationError signals bad inputs (CLI exit code 2); NumericalError signals
a numerical-quality failure such as an unpairable complex eigenvalue or an
eigensolver residual above contract (CLI exit code 3).
"""


class ValidationError(ValueError):
    """Inputs violate a documented precondition."""


class NumericalError(RuntimeError):
    """A numerical result failed its quality check."""


class UnpairableSpectrumError(NumericalError):
    """A complex eigenvalue has no conjugate partner within tolerance."""


class TrackingAmbiguityError(NumericalError):
    """Level tracking stayed ambiguous after the maximum grid refinement."""
