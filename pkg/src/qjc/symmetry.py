"""Structural symmetry checks on assembled spin-Fock matrices.

Every check measures an entrywise deviation and reports it alongside the
boolean verdict, so truncation effects stay visible.  For the photon-parity
conjugation the deviation is measured on the guard-banded submatrix: parity
itself is diagonal and exact, but the identities it certifies are only
claimed below the guard band.

PT here means: photon-parity conjugation combined with complex conjugation
of the matrix in the convention where the oscillator eigenfunctions are
real.  On the symbolic blocks that is a -> -a, adag -> -adag, i -> -i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import eig_checked
from .errors import UnpairableSpectrumError, ValidationError
from .fock import SpinFockOperator, TruncatedFockSpace, fock_parity

REALNESS_TOL = 1e-10
STRUCTURE_TOL = 1e-12


def sigma3_operator(space: TruncatedFockSpace) -> np.ndarray:
    return np.kron(np.diag([1.0, -1.0]), np.eye(space.cutoff))


def parity_matrix(space: TruncatedFockSpace) -> np.ndarray:
    return np.kron(np.eye(2), fock_parity(space))


def parity_sigma3_operator(space: TruncatedFockSpace) -> np.ndarray:
    return np.kron(np.diag([1.0, -1.0]), fock_parity(space))


def _guard_mask(space: TruncatedFockSpace) -> np.ndarray:
    keep = np.arange(space.cutoff) <= space.reliable_max
    return np.concatenate([keep, keep])


def guard_banded_deviation(delta: np.ndarray, space: TruncatedFockSpace) -> float:
    """Max absolute entry of `delta` over rows/columns below the guard band."""
    mask = _guard_mask(space)
    return float(np.max(np.abs(delta[np.ix_(mask, mask)])))


def check_hermitian(h: SpinFockOperator, tol: float = STRUCTURE_TOL) -> tuple[bool, float]:
    delta = h.matrix - h.matrix.conj().T
    dev = float(np.max(np.abs(delta)))
    return dev <= tol, dev


def check_pseudo_hermitian(
    h: SpinFockOperator,
    eta: np.ndarray,
    tol: float = STRUCTURE_TOL,
    guard_banded: bool = False,
) -> tuple[bool, float]:
    """Deviation of eta H eta^-1 from the adjoint of H."""
    if eta.shape != h.matrix.shape:
        raise ValidationError(
            f"eta shape {eta.shape} does not match operator {h.matrix.shape}"
        )
    conjugated = eta @ h.matrix @ np.linalg.inv(eta)
    delta = conjugated - h.matrix.conj().T
    if guard_banded:
        dev = guard_banded_deviation(delta, h.space)
    else:
        dev = float(np.max(np.abs(delta)))
    return dev <= tol, dev


def check_pt(h: SpinFockOperator, tol: float = STRUCTURE_TOL) -> tuple[bool, float]:
    """Invariance under parity conjugation plus complex conjugation."""
    parity = parity_matrix(h.space)
    transformed = parity @ h.matrix.conj() @ parity
    dev = float(np.max(np.abs(transformed - h.matrix)))
    return dev <= tol, dev


def commutator_deviation(h: SpinFockOperator, op: np.ndarray) -> float:
    return float(np.max(np.abs(h.matrix @ op - op @ h.matrix)))


def classify_eigenvalues(
    eigenvalues: np.ndarray, real_tol: float = REALNESS_TOL
) -> str:
    """Partition a spectrum into real values and conjugate pairs.

    Returns "all-real", "conjugate-pairs" (nothing real, everything
    paired), or "mixed".  Raises UnpairableSpectrumError when a complex
    eigenvalue has no conjugate partner within tolerance, which usually
    means the truncation cutoff is too small for the requested model.
    """
    w = np.asarray(eigenvalues, dtype=complex)
    scale = np.maximum(1.0, np.abs(w))
    real_mask = np.abs(w.imag) <= real_tol * scale
    complex_vals = list(w[~real_mask])
    n_real = int(np.count_nonzero(real_mask))
    while complex_vals:
        z = complex_vals.pop()
        dists = [abs(z.conjugate() - other) for other in complex_vals]
        if not dists:
            raise UnpairableSpectrumError(
                f"eigenvalue {z:.6g} has no conjugate partner; raise the cutoff"
            )
        best = int(np.argmin(dists))
        if dists[best] > real_tol * max(1.0, abs(z)):
            raise UnpairableSpectrumError(
                f"eigenvalue {z:.6g} unpaired (nearest conjugate gap "
                f"{dists[best]:.3e}); raise the cutoff"
            )
        complex_vals.pop(best)
    if n_real == len(w):
        return "all-real"
    if n_real == 0:
        return "conjugate-pairs"
    return "mixed"


def classify_spectrum(h: SpinFockOperator, real_tol: float = REALNESS_TOL) -> str:
    w, _ = eig_checked(h.matrix)
    return classify_eigenvalues(w, real_tol)


@dataclass(frozen=True)
class SymmetryReport:
    """Bundle of structural verdicts for one assembled model."""

    hermitian: bool
    hermitian_deviation: float
    pt_symmetric: bool
    pt_deviation: float
    pseudo_hermitian: dict[str, tuple[bool, float]]
    parity_sigma3_commutant: float
    spectrum_class: str


def symmetry_report(
    h: SpinFockOperator,
    tol: float = STRUCTURE_TOL,
    real_tol: float = REALNESS_TOL,
) -> SymmetryReport:
    """Run every check against the standard conjugations.

    The pseudo-hermiticity dictionary is keyed by "sigma3", "parity" and
    "parity_sigma3"; the parity entry is measured below the guard band.
    No identity is asserted here -- the report just records what holds.
    """
    space = h.space
    herm_ok, herm_dev = check_hermitian(h, tol)
    pt_ok, pt_dev = check_pt(h, tol)
    pseudo = {
        "sigma3": check_pseudo_hermitian(h, sigma3_operator(space), tol),
        "parity": check_pseudo_hermitian(
            h, parity_matrix(space), tol, guard_banded=True
        ),
        "parity_sigma3": check_pseudo_hermitian(
            h, parity_sigma3_operator(space), tol
        ),
    }
    return SymmetryReport(
        hermitian=herm_ok,
        hermitian_deviation=herm_dev,
        pt_symmetric=pt_ok,
        pt_deviation=pt_dev,
        pseudo_hermitian=pseudo,
        parity_sigma3_commutant=commutator_deviation(
            h, parity_sigma3_operator(space)
        ),
        spectrum_class=classify_spectrum(h, real_tol),
    )
