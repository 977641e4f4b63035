"""Hamiltonian builders for the extended Jaynes-Cummings family.

All models share the diagonal part (eps/2) sigma3 + hbar_omega * n_hat and
differ in the photon-exchange blocks.  In the frozen spin-major ordering the
generic member is the block matrix

    [[ hw*n_hat + P(n_hat) + eps/2,   rho * a^k                  ],
     [ phi * rho * adag^k,            hw*n_hat + P(n_hat) - eps/2 ]]

with phi = +1 giving a hermitian matrix and phi = -1 the sign-flipped
(pseudo-hermitian) coupling.  The quasi-exactly-solvable variant `build_ht`
adds degree-one exchange terms c * a (n_hat - n) and c_hat * (n_hat - n) adag
whose (n_hat - n) factor closes a finite invariant subspace when
n = n_qes = N + 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .fock import (
    SpinFockOperator,
    TruncatedFockSpace,
    annihilation,
    from_blocks,
    number_op,
)


@dataclass(frozen=True)
class ModelParams:
    """Parameter set shared by every model builder.

    Attributes
    ----------
    epsilon:
        Spin level splitting (the sigma3 coefficient is epsilon / 2).
    hbar_omega:
        Oscillator quantum.
    rho:
        k-photon exchange strength.
    phi:
        Sign of the lower-left exchange block; must be +1 or -1.
    k:
        Photon transfer order of the exchange terms (a^k against adag^k).
    poly:
        Ascending coefficients of the diagonal polynomial P applied to the
        number operator.  Empty means P = 0; a nonempty P must have
        degree >= 2 (lower degrees are absorbed by hbar_omega / epsilon).
    theta:
        Convenience coupling for the quasi-exactly-solvable family: unless
        c / c_hat are given explicitly, c = c_hat = -theta / n_qes and the
        one-photon strengths of the non-solvable variant are rho1 = theta.
    n_qes:
        Subspace closure integer n = N + 2 for the solvable variant.
    c, c_hat:
        Explicit mixed-coupling strengths, overriding the theta convention.
    rho1, rho1_hat:
        Explicit one-photon strengths for `build_h12`, overriding theta.
    """

    epsilon: float = 1.0
    hbar_omega: float = 1.0
    rho: float = 0.0
    phi: int = 1
    k: int = 1
    poly: tuple[float, ...] = ()
    theta: float = 0.0
    n_qes: int | None = None
    c: float | None = None
    c_hat: float | None = None
    rho1: float | None = None
    rho1_hat: float | None = None

    def __post_init__(self):
        if self.phi not in (-1, 1):
            raise ValueError(f"phi must be +1 or -1, got {self.phi}")
        if self.k < 1:
            raise ValueError(f"photon transfer order k must be >= 1, got {self.k}")
        if self.poly:
            degree = _poly_degree(self.poly)
            if degree < 2:
                raise ValueError(
                    "diagonal polynomial must have degree >= 2 "
                    f"(got coefficients {self.poly}); fold lower orders into "
                    "hbar_omega and epsilon instead"
                )
        if self.n_qes is not None and self.n_qes < 2:
            raise ValueError(f"n_qes must be >= 2, got {self.n_qes}")

    @property
    def big_n(self) -> int:
        """Subspace label N = n_qes - 2."""
        if self.n_qes is None:
            raise ValueError("n_qes is not set on these parameters")
        return self.n_qes - 2

    def qes_couplings(self) -> tuple[float, float]:
        """Effective (c, c_hat), defaulting to -theta / n_qes."""
        if self.n_qes is None and (self.c is None or self.c_hat is None):
            raise ValueError("need n_qes to derive c, c_hat from theta")
        c = self.c if self.c is not None else -self.theta / self.n_qes
        c_hat = self.c_hat if self.c_hat is not None else -self.theta / self.n_qes
        return c, c_hat

    def one_photon_couplings(self) -> tuple[float, float]:
        """Effective (rho1, rho1_hat) for the non-solvable mixed model."""
        rho1 = self.rho1 if self.rho1 is not None else self.theta
        rho1_hat = self.rho1_hat if self.rho1_hat is not None else self.theta
        return rho1, rho1_hat


def _poly_degree(coeffs: tuple[float, ...]) -> int:
    degree = -1
    for i, coef in enumerate(coeffs):
        if coef != 0.0:
            degree = i
    return degree


def poly_diagonal(params: ModelParams, space: TruncatedFockSpace) -> np.ndarray:
    """P(n_hat) as a diagonal matrix on the Fock factor (zero if P empty)."""
    if not params.poly:
        return np.zeros((space.cutoff, space.cutoff))
    values = npoly.polyval(np.arange(space.cutoff, dtype=float), params.poly)
    return np.diag(values)


def poly_value(params: ModelParams, n: float) -> float:
    """Scalar P(n)."""
    if not params.poly:
        return 0.0
    return float(npoly.polyval(n, params.poly))


def _check_guard(space: TruncatedFockSpace, transfer: int, model: str) -> None:
    if space.guard < transfer + 2:
        raise ValueError(
            f"{model} moves up to {transfer} quanta; guard band must be >= "
            f"{transfer + 2}, got {space.guard}"
        )
    if space.cutoff <= transfer + space.guard:
        raise ValueError(
            f"cutoff {space.cutoff} too small for transfer order {transfer} "
            f"with guard {space.guard}"
        )


def _diagonal_blocks(
    params: ModelParams, space: TruncatedFockSpace, with_poly: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    base = params.hbar_omega * number_op(space)
    if with_poly:
        base = base + poly_diagonal(params, space)
    half = 0.5 * params.epsilon * np.eye(space.cutoff)
    return base + half, base - half


def build_extended(params: ModelParams, space: TruncatedFockSpace) -> SpinFockOperator:
    """k-photon exchange model with optional diagonal polynomial.

    Every two-dimensional subspace span{|n, up>, |n+k, down>} is invariant,
    which is what makes the full spectrum available in closed form.
    """
    _check_guard(space, params.k, "extended model")
    a = annihilation(space)
    a_k = np.linalg.matrix_power(a, params.k)
    upper, lower = _diagonal_blocks(params, space)
    return from_blocks(
        upper,
        params.rho * a_k,
        params.phi * params.rho * a_k.T,
        lower,
        space,
    )


def build_jcm(params: ModelParams, space: TruncatedFockSpace) -> SpinFockOperator:
    """One-photon Jaynes-Cummings matrix (hermitian; phi forced to +1)."""
    base = ModelParams(
        epsilon=params.epsilon,
        hbar_omega=params.hbar_omega,
        rho=params.rho,
        phi=1,
        k=1,
    )
    return build_extended(base, space)


def build_pseudo_jcm(params: ModelParams, space: TruncatedFockSpace) -> SpinFockOperator:
    """One-photon exchange with antisymmetric coupling rho(sp a - sm adag).

    Equal to the k = 1, phi = -1, P = 0 member of the extended family: not
    hermitian, but conjugation by sigma3 maps it to its adjoint, so the
    spectrum is real wherever the doublet discriminants stay positive.
    """
    base = ModelParams(
        epsilon=params.epsilon,
        hbar_omega=params.hbar_omega,
        rho=params.rho,
        phi=-1,
        k=1,
    )
    return build_extended(base, space)


def build_h12(params: ModelParams, space: TruncatedFockSpace) -> SpinFockOperator:
    """Mixed one- and two-photon exchange without the subspace-closing terms.

    Off-diagonal blocks are rho a^2 + rho1 a (upper) against
    phi rho adag^2 + rho1_hat adag (lower).  No finite set of contiguous
    Fock states is invariant when rho and the one-photon strengths are both
    nonzero: the two-photon ladder wants the lower range two states longer,
    the bare one-photon term wants it at most one state longer.
    """
    _check_guard(space, 2, "mixed-exchange model")
    rho1, rho1_hat = params.one_photon_couplings()
    a = annihilation(space)
    a2 = a @ a
    upper, lower = _diagonal_blocks(params, space, with_poly=False)
    return from_blocks(
        upper,
        params.rho * a2 + rho1 * a,
        params.phi * params.rho * a2.T + rho1_hat * a.T,
        lower,
        space,
    )


def build_ht(params: ModelParams, space: TruncatedFockSpace) -> SpinFockOperator:
    """Mixed exchange repaired to close a finite invariant subspace.

    The one-photon terms are dressed with (n_hat - n):

        upper-right  rho a^2 + c * a (n_hat - n)
        lower-left   phi rho adag^2 + c_hat * (n_hat - n) adag

    With n = n_qes = N + 2 the dressing zeroes exactly the matrix element
    that would leak |n, down> onto |n-1, up>, so the span of
    {|0..N, up>} + {|0..N+2, down>} is invariant for any rho, c, c_hat.
    """
    if params.n_qes is None:
        raise ValueError("build_ht requires n_qes (= N + 2) to be set")
    _check_guard(space, 2, "subspace-closed model")
    if space.cutoff <= params.big_n + 4 + space.guard:
        raise ValueError(
            f"cutoff {space.cutoff} too small: need > N + 4 + guard = "
            f"{params.big_n + 4 + space.guard}"
        )
    c, c_hat = params.qes_couplings()
    n = float(params.n_qes)
    a = annihilation(space)
    shifted = number_op(space) - n * np.eye(space.cutoff)
    upper, lower = _diagonal_blocks(params, space, with_poly=False)
    return from_blocks(
        upper,
        params.rho * (a @ a) + c * (a @ shifted),
        params.phi * params.rho * (a.T @ a.T) + c_hat * (shifted @ a.T),
        lower,
        space,
    )
