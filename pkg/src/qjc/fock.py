"""Truncated Fock space and spin-boson operator construction.

Everything downstream works on a hard-truncated oscillator Hilbert space
spanned by the number states |0>, ..., |D-1> tensored with a spin-1/2.
The basis ordering is frozen to *spin-major*: first all (n, +1/2) with n
ascending, then all (n, -1/2) with n ascending.  With that ordering every
two-by-two operator-block expression maps literally onto matrix quadrants,
e.g. tensor(sigma_plus, a) occupies the upper-right D-by-D block.

Truncation artifacts live in the top `guard` photon states; callers that
compare against exact formulas should restrict to indices n < D - guard.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPIN_UP = 0.5
SPIN_DOWN = -0.5


@dataclass(frozen=True)
class TruncatedFockSpace:
    """Hard-truncated oscillator space with a guard band.

    Parameters
    ----------
    cutoff:
        Number of retained Fock states D (indices 0..D-1).  The raising
        operator annihilates |D-1> instead of leaving the space.
    guard:
        Width g of the guard band.  States with n >= D - g are considered
        corrupted by the truncation; exactness claims apply below it.
    """

    cutoff: int
    guard: int = 8

    def __post_init__(self):
        if self.cutoff < 4:
            raise ValueError(f"cutoff must be >= 4, got {self.cutoff}")
        if self.guard < 0:
            raise ValueError(f"guard must be >= 0, got {self.guard}")
        if self.guard >= self.cutoff:
            raise ValueError(
                f"guard band ({self.guard}) must be smaller than cutoff ({self.cutoff})"
            )

    @property
    def dim(self) -> int:
        """Dimension of the full spin tensor Fock space."""
        return 2 * self.cutoff

    @property
    def reliable_max(self) -> int:
        """Largest photon index outside the guard band."""
        return self.cutoff - self.guard - 1


@dataclass(frozen=True, eq=False)
class SpinFockOperator:
    """A dense operator on the spin tensor Fock space, with basis labels."""

    matrix: np.ndarray
    space: TruncatedFockSpace

    def __post_init__(self):
        d = self.space.dim
        if self.matrix.shape != (d, d):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match space dim {d}"
            )

    @property
    def basis(self) -> list[tuple[int, float]]:
        """Ordered basis labels (n, m_s) matching rows/columns of `matrix`."""
        return basis_labels(self.space)

    def dagger(self) -> "SpinFockOperator":
        return SpinFockOperator(self.matrix.conj().T, self.space)


def basis_labels(space: TruncatedFockSpace) -> list[tuple[int, float]]:
    """Spin-major labels: all (n, +1/2) ascending, then all (n, -1/2)."""
    ups = [(n, SPIN_UP) for n in range(space.cutoff)]
    downs = [(n, SPIN_DOWN) for n in range(space.cutoff)]
    return ups + downs


def basis_index(space: TruncatedFockSpace, n: int, ms: float) -> int:
    """Flat index of |n, ms> under the frozen spin-major ordering."""
    if not 0 <= n < space.cutoff:
        raise ValueError(f"photon index {n} outside [0, {space.cutoff})")
    if ms == SPIN_UP:
        return n
    if ms == SPIN_DOWN:
        return space.cutoff + n
    raise ValueError(f"ms must be +0.5 or -0.5, got {ms}")


def annihilation(space: TruncatedFockSpace) -> np.ndarray:
    """Lowering operator on the Fock factor: a|n> = sqrt(n)|n-1>."""
    return np.diag(np.sqrt(np.arange(1.0, space.cutoff)), k=1)


def creation(space: TruncatedFockSpace) -> np.ndarray:
    """Raising operator with hard cutoff: adag|D-1> = 0."""
    return annihilation(space).T.copy()


def build_ladder(space: TruncatedFockSpace) -> tuple[np.ndarray, np.ndarray]:
    """Return (a, adag) on the Fock factor; adag is exactly a.T."""
    a = annihilation(space)
    return a, a.T.copy()


def number_op(space: TruncatedFockSpace) -> np.ndarray:
    """Photon number operator diag(0, 1, ..., D-1)."""
    return np.diag(np.arange(space.cutoff, dtype=float))


def fock_parity(space: TruncatedFockSpace) -> np.ndarray:
    """Photon-number parity diag((-1)^n) on the Fock factor."""
    return np.diag((-1.0) ** np.arange(space.cutoff))


def sigma3() -> np.ndarray:
    """Pauli z, diag(+1, -1) in the (up, down) ordering."""
    return np.diag([1.0, -1.0])


def sigma_plus() -> np.ndarray:
    """Spin raising: sigma_plus |down> = |up>, sigma_plus |up> = 0."""
    return np.array([[0.0, 1.0], [0.0, 0.0]])


def sigma_minus() -> np.ndarray:
    """Spin lowering: sigma_minus |up> = |down>."""
    return np.array([[0.0, 0.0], [1.0, 0.0]])


def tensor(
    spin_op: np.ndarray, fock_op: np.ndarray, space: TruncatedFockSpace
) -> SpinFockOperator:
    """Kronecker product with the spin factor major (block structure literal)."""
    if spin_op.shape != (2, 2):
        raise ValueError(f"spin factor must be 2x2, got {spin_op.shape}")
    if fock_op.shape != (space.cutoff, space.cutoff):
        raise ValueError(
            f"Fock factor shape {fock_op.shape} does not match cutoff {space.cutoff}"
        )
    return SpinFockOperator(np.kron(spin_op, fock_op), space)


def identity_operator(space: TruncatedFockSpace) -> SpinFockOperator:
    return SpinFockOperator(np.eye(space.dim), space)


def parity_operator(space: TruncatedFockSpace) -> SpinFockOperator:
    """Photon parity tensored with the spin identity.

    Anticommutes exactly with a and adag (entrywise, including the corner):
    conjugation flips the sign of every off-diagonal of an odd ladder string.
    """
    return tensor(np.eye(2), fock_parity(space), space)


def from_blocks(
    upper_left: np.ndarray,
    upper_right: np.ndarray,
    lower_left: np.ndarray,
    lower_right: np.ndarray,
    space: TruncatedFockSpace,
) -> SpinFockOperator:
    """Assemble a SpinFockOperator from its four D-by-D spin blocks."""
    return SpinFockOperator(
        np.block([[upper_left, upper_right], [lower_left, lower_right]]), space
    )
