"""Closed-form spectrum of the k-photon exchange models.

The extended model couples |n, up> only to |n+k, down>, so the full matrix
splits into two-state blocks plus k uncoupled spin-down states.  This module
evaluates those blocks analytically: eigenvalues from the quadratic secular
equation, eigenvectors through a mixing-angle parameterization
(trigonometric for the sign-flipped coupling, hyperbolic for the hermitian
one), and the coupling-independent singlet levels.

Branch convention: branch I always takes the + square root of the
discriminant, i.e. the branch that at zero coupling continues the
higher-energy diagonal entry of the block.
"""

from __future__ import annotations

import cmath
import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fock import SPIN_DOWN, SPIN_UP, TruncatedFockSpace, basis_index
from .models import ModelParams, poly_value


@dataclass(frozen=True, eq=False)
class DoubletBlock:
    """The 2x2 restriction to span{|n, up>, |n+k, down>}."""

    n: int
    k: int
    phi: int
    matrix: np.ndarray
    # coupling^2 computed as rho^2 * (n+1)...(n+k) without the sqrt
    # round-trip, so integer discriminants stay integers
    coupling_squared: float | None = None

    @property
    def basis(self) -> tuple[tuple[int, float], tuple[int, float]]:
        return ((self.n, SPIN_UP), (self.n + self.k, SPIN_DOWN))

    @property
    def gap(self) -> float:
        """Diagonal splitting (lower-right minus upper-left entry)."""
        return float(self.matrix[1, 1] - self.matrix[0, 0])

    @property
    def coupling(self) -> float:
        """Off-diagonal magnitude rho * sqrt((n+1)...(n+k))."""
        return float(self.matrix[0, 1])

    def discriminant(self) -> float:
        """gap^2 + 4 phi coupling^2, negative when the pair is complex."""
        squared = self.coupling_squared
        if squared is None:
            squared = self.coupling**2
        return self.gap**2 + 4.0 * self.phi * squared


@dataclass(frozen=True)
class MixingAngle:
    """Angle parameterizing the doublet eigenvectors.

    trig=True means sin/cos forms (sign-flipped coupling; defined only while
    the discriminant is non-negative).  trig=False means sinh/cosh forms
    (hermitian coupling; defined whenever the diagonal gap is nonzero).
    """

    value: float
    trig: bool


@dataclass(frozen=True)
class LabeledLevel:
    """One closed-form eigenvalue with its provenance label."""

    label: str
    energy: complex
    n: int | None = None
    branch: str | None = None


def transfer_amplitude(n: int, k: int) -> float:
    """sqrt((n+1)(n+2)...(n+k)), the k-step ladder matrix element."""
    prod = 1.0
    for i in range(1, k + 1):
        prod *= n + i
    return math.sqrt(prod)


def doublet_block(params: ModelParams, n: int) -> DoubletBlock:
    """Assemble the 2x2 block for the pair (|n, up>, |n+k, down>)."""
    if n < 0:
        raise ValidationError(f"doublet index must be >= 0, got {n}")
    hw, eps, k = params.hbar_omega, params.epsilon, params.k
    amp = params.rho * transfer_amplitude(n, k)
    prod = 1.0
    for i in range(1, k + 1):
        prod *= n + i
    matrix = np.array(
        [
            [hw * n + poly_value(params, n) + 0.5 * eps, amp],
            [params.phi * amp, hw * (n + k) + poly_value(params, n + k) - 0.5 * eps],
        ]
    )
    return DoubletBlock(
        n=n,
        k=k,
        phi=params.phi,
        matrix=matrix,
        coupling_squared=params.rho * params.rho * prod,
    )


def doublet_eigenvalues(block: DoubletBlock) -> tuple[complex, complex]:
    """(lambda_I, lambda_II) with branch I on the + square root.

    Works for either coupling sign; the discriminant
    gap^2 + 4 * phi * coupling^2 goes negative for the sign-flipped coupling
    at strong rho, in which case the pair is complex conjugate.
    """
    mean = 0.5 * (block.matrix[0, 0] + block.matrix[1, 1])
    disc = block.discriminant()
    root = cmath.sqrt(disc)
    lam_1 = mean + 0.5 * root
    lam_2 = mean - 0.5 * root
    if disc >= 0.0:
        return complex(lam_1.real), complex(lam_2.real)
    return lam_1, lam_2


def doublet_eigenvalues_charpoly(block: DoubletBlock) -> tuple[complex, complex]:
    """Independent route: solve the secular quadratic directly.

    Uses the numerically stable splitting q = -(b + sign(b) sqrt(disc)) / 2
    for lambda^2 + b lambda + c, then the product rule for the second root.
    """
    b = -float(np.trace(block.matrix))
    c = float(np.linalg.det(block.matrix))
    disc = cmath.sqrt(b * b - 4.0 * c)
    q = -0.5 * (b + disc) if b >= 0.0 else -0.5 * (b - disc)
    if q == 0.0:
        roots = [complex(-0.5 * b)] * 2
    else:
        roots = [q, c / q]
    roots.sort(key=lambda z: (-z.real, -z.imag))
    return roots[0], roots[1]


def mixing_angle(block: DoubletBlock) -> MixingAngle:
    """Angle theta with 2 * coupling = gap * sin(theta) (or sinh).

    For the trigonometric case the branch is chosen so that
    gap * cos(theta) = +sqrt(gap^2 - 4 coupling^2) >= 0, absorbing a
    negative gap into theta instead of into the eigenvectors.
    """
    gap = block.gap
    twob = 2.0 * block.coupling
    if block.phi == -1:
        disc = gap * gap - twob * twob
        if disc < 0.0:
            raise ValidationError(
                "trigonometric mixing angle undefined: |2 rho sqrt(...)| "
                f"= {abs(twob):.6g} exceeds |gap| = {abs(gap):.6g}"
            )
        if gap == 0.0:
            return MixingAngle(value=0.0, trig=True)
        return MixingAngle(
            value=math.atan2(twob / gap, math.sqrt(disc) / gap), trig=True
        )
    if gap == 0.0:
        raise ValidationError(
            "hyperbolic mixing angle undefined at zero diagonal gap"
        )
    return MixingAngle(value=math.asinh(twob / gap), trig=False)


def doublet_eigenvectors(
    block: DoubletBlock, angle: MixingAngle
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors in block coordinates, ordered to match branch (I, II).

    The components are the raw half-angle forms, deliberately unnormalized
    (use `normalize` if a unit vector is needed):

        trig:        psi_I = (sin t/2, cos t/2),  psi_II = (cos t/2, sin t/2)
        hyperbolic:  psi_I = (sinh t/2, cosh t/2), psi_II = (cosh t/2, -sinh t/2)

    In the hyperbolic case with a negative diagonal gap the two forms swap
    branches, and the returned pair is reordered so that the first vector
    always belongs to lambda_I (the + square root).
    """
    half = 0.5 * angle.value
    if angle.trig:
        psi_1 = np.array([math.sin(half), math.cos(half)])
        psi_2 = np.array([math.cos(half), math.sin(half)])
        return psi_1, psi_2
    psi_1 = np.array([math.sinh(half), math.cosh(half)])
    psi_2 = np.array([math.cosh(half), -math.sinh(half)])
    if block.gap < 0.0:
        return psi_2, psi_1
    return psi_1, psi_2


def normalize(vec: np.ndarray) -> np.ndarray:
    """Unit-norm copy of a vector; separate on purpose from the raw forms."""
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        raise ValidationError("cannot normalize the zero vector")
    return vec / norm


def eigenvalue_from_angle(block: DoubletBlock, angle: MixingAngle, branch: str) -> float:
    """Branch eigenvalue through the angle: mean + gap*cos(theta)/2 etc."""
    mean = 0.5 * (block.matrix[0, 0] + block.matrix[1, 1])
    if angle.trig:
        stretch = block.gap * math.cos(angle.value)
    else:
        stretch = block.gap * math.cosh(angle.value)
        if block.gap < 0.0:
            stretch = -stretch
    if branch == "I":
        return float(mean + 0.5 * stretch)
    if branch == "II":
        return float(mean - 0.5 * stretch)
    raise ValidationError(f"branch must be 'I' or 'II', got {branch!r}")


def rho_independent_levels(
    params: ModelParams, space: TruncatedFockSpace
) -> list[tuple[float, np.ndarray]]:
    """The k spin-down singlets (0, |j>) with E_j = j hw + P(j) - eps/2.

    These are exact eigenvectors for every coupling strength because a^k
    annihilates |j> for j < k.
    """
    out = []
    for j in range(params.k):
        energy = (
            params.hbar_omega * j + poly_value(params, j) - 0.5 * params.epsilon
        )
        vec = np.zeros(space.dim)
        vec[basis_index(space, j, SPIN_DOWN)] = 1.0
        out.append((float(energy), vec))
    return out


def embed_doublet_vector(
    block: DoubletBlock, psi: np.ndarray, space: TruncatedFockSpace
) -> np.ndarray:
    """Lift block coordinates (upper, lower) into the full spin-Fock space."""
    vec = np.zeros(space.dim)
    vec[basis_index(space, block.n, SPIN_UP)] = psi[0]
    vec[basis_index(space, block.n + block.k, SPIN_DOWN)] = psi[1]
    return vec


def full_algebraic_spectrum(
    params: ModelParams, space: TruncatedFockSpace
) -> list[LabeledLevel]:
    """Every closed-form level whose support clears the guard band.

    Doublets are enumerated for n + k < D - guard; singlets always qualify.
    """
    levels = [
        LabeledLevel(label=f"singlet:{j}", energy=complex(e), n=j, branch=None)
        for j, (e, _) in enumerate(rho_independent_levels(params, space))
    ]
    n = 0
    while n + params.k < space.cutoff - space.guard:
        block = doublet_block(params, n)
        lam_1, lam_2 = doublet_eigenvalues(block)
        levels.append(
            LabeledLevel(label=f"doublet:{n}:I", energy=lam_1, n=n, branch="I")
        )
        levels.append(
            LabeledLevel(label=f"doublet:{n}:II", energy=lam_2, n=n, branch="II")
        )
        n += 1
    return levels


def doublet_coalescence_rho(params: ModelParams, n: int) -> float | None:
    """Coupling strength where the doublet pair meets (discriminant zero).

    Only the sign-flipped coupling coalesces at real rho; returns None for
    the hermitian sign.  A zero diagonal gap collapses the pair at rho = 0.
    """
    if params.phi != -1:
        return None
    block = doublet_block(dataclasses.replace(params, rho=1.0), n)
    return abs(block.gap) / (2.0 * transfer_amplitude(n, params.k))
