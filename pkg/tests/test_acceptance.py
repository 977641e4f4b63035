"""Acceptance gate: ten binding checks with pinned tolerances.

Each test prints one PASS line with the measured worst-case number next to
its pinned tolerance, so a bare `pytest -v -s tests/test_acceptance.py`
reads as a checklist.  Tolerances here are contractual -- do not loosen
them to make a regression green.
"""

import itertools
import time

import numpy as np

from qjc._linalg import eig_checked, spectrum_mismatch
from qjc.closedform import (
    doublet_block,
    doublet_coalescence_rho,
    doublet_eigenvalues,
    doublet_eigenvectors,
    full_algebraic_spectrum,
    mixing_angle,
    normalize,
    transfer_amplitude,
)
from qjc.flow import SweepSpec, locate_coalescence, qes_theta_sweep
from qjc.fock import TruncatedFockSpace
from qjc.models import (
    ModelParams,
    build_extended,
    build_h12,
    build_ht,
    build_jcm,
    build_pseudo_jcm,
)
from qjc.polyrep import (
    gauge_transform_ht,
    gauge_transform_pseudo_jcm,
    restriction_spectrum,
)
from qjc.qes import (
    algebraic_eigenvalues,
    algebraic_spectrum,
    build_subspace,
    certify_in_full_space,
    embed_subspace_vector,
    restriction_matrix,
)
from qjc.recurrence import critical_roots, reconstruct_eigenvector
from qjc.symmetry import (
    check_hermitian,
    check_pseudo_hermitian,
    parity_matrix,
    sigma3_operator,
)

SPACE = TruncatedFockSpace(cutoff=64, guard=8)


def report(number, name, detail):
    print(f"criterion {number:2d} [{name}]: PASS ({detail})")


def test_criterion_01_exact_structure_suite():
    started = time.perf_counter()
    space = TruncatedFockSpace(cutoff=32, guard=8)
    tol = 1e-13
    worst = 0.0

    sign_flipped = [
        build_extended(ModelParams(epsilon=0.7, rho=0.8, k=k, phi=-1), space)
        for k in (1, 2, 3)
    ]
    sign_flipped += [
        build_extended(
            ModelParams(epsilon=0.7, rho=0.8, k=2, phi=-1, poly=(0.0, 0.0, 1.0)),
            space,
        ),
        build_pseudo_jcm(ModelParams(epsilon=1.0, rho=0.6), space),
        build_h12(
            ModelParams(epsilon=1.0, rho=0.6, phi=-1, rho1=0.5, rho1_hat=-0.5),
            space,
        ),
        build_ht(
            ModelParams(epsilon=1.0, rho=0.6, phi=-1, n_qes=4, c=-0.3, c_hat=0.3),
            space,
        ),
        build_ht(ModelParams(epsilon=1.0, rho=0.6, phi=-1, n_qes=4), space),
    ]
    eta = sigma3_operator(space)
    for h in sign_flipped:
        ok, dev = check_pseudo_hermitian(h, eta, tol)
        assert ok, f"sigma3 pseudo-hermiticity broken at deviation {dev:.3e}"
        worst = max(worst, dev)

    hermitian = [
        build_extended(ModelParams(epsilon=0.7, rho=0.8, k=k, phi=1), space)
        for k in (1, 2, 3)
    ]
    hermitian += [
        build_jcm(ModelParams(epsilon=1.0, rho=0.6), space),
        build_h12(ModelParams(epsilon=1.0, rho=0.6, phi=1, theta=0.5), space),
        build_ht(ModelParams(epsilon=1.0, rho=0.6, theta=0.9, phi=1, n_qes=4), space),
    ]
    for h in hermitian:
        ok, dev = check_hermitian(h, tol)
        assert ok, f"hermiticity broken at deviation {dev:.3e}"
        worst = max(worst, dev)

    parity = parity_matrix(space)
    for h in (
        build_pseudo_jcm(ModelParams(epsilon=1.0, rho=0.6), space),
        build_extended(ModelParams(epsilon=0.7, rho=0.8, k=1, phi=-1), space),
    ):
        ok, dev = check_pseudo_hermitian(h, parity, tol)
        assert ok, f"parity pseudo-hermiticity broken at deviation {dev:.3e}"
        worst = max(worst, dev)

    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"structure suite took {elapsed:.2f} s (limit 1 s)"
    report(1, "exact structure", f"worst deviation {worst:.1e} <= 1e-13, {elapsed:.2f} s")


def test_criterion_02_closed_form_vs_numeric_oracle():
    started = time.perf_counter()
    tol = 1e-9
    edge = SPACE.cutoff - SPACE.guard
    photon = np.concatenate([np.arange(SPACE.cutoff)] * 2)
    spin_up = np.arange(2 * SPACE.cutoff) < SPACE.cutoff
    worst = 0.0
    checked = 0
    for k, phi, rho, eps, poly in itertools.product(
        (1, 2, 3), (1, -1), (0.0, 0.3, 1.0), (0.5, 1.0), ((), (0.0, 0.0, 1.0))
    ):
        params = ModelParams(epsilon=eps, rho=rho, k=k, phi=phi, poly=poly)
        w, v = eig_checked(build_extended(params, SPACE).matrix)
        closed = np.array(
            [level.energy for level in full_algebraic_spectrum(params, SPACE)]
        )
        # a doublet couples (n, up) to (n+k, down): its block clears the
        # guard band iff n + k < D - g, so the up-spin mask starts k early
        outside = (spin_up & (photon >= edge - k)) | (~spin_up & (photon >= edge))
        guard_mass = np.add.reduce(np.abs(v[outside, :]) ** 2, axis=0)
        for i in range(len(w)):
            if guard_mass[i] > 1e-10:
                continue
            checked += 1
            worst = max(worst, float(np.min(np.abs(closed - w[i]))))
    elapsed = time.perf_counter() - started
    assert checked > 7000
    assert worst <= tol, f"worst closed-vs-numeric deviation {worst:.3e} > 1e-9"
    assert elapsed < 10.0, f"oracle sweep took {elapsed:.2f} s (limit 10 s)"
    report(
        2,
        "closed form vs numeric",
        f"{checked} guard-banded levels, worst {worst:.1e} <= 1e-9, {elapsed:.2f} s",
    )


def test_criterion_03_mixing_angle_eigenvectors():
    tol = 1e-12
    rng = np.random.default_rng(23)
    worst_residual = 0.0
    worst_ortho = 0.0
    worst_overlap = 0.0

    def residual(block, lam, psi):
        unit = normalize(psi)
        return float(np.linalg.norm(block.matrix @ unit - lam * unit)) / max(
            1.0, abs(lam)
        )

    for _ in range(50):  # trigonometric region, phi = -1
        eps = float(rng.uniform(0.1, 3.0))
        hw = float(rng.uniform(0.5, 2.0))
        k = int(rng.integers(1, 4))
        n = int(rng.integers(0, 12))
        gap = hw * k - eps
        if abs(gap) < 1e-3:
            eps = hw * k - 0.5
            gap = 0.5
        amp = transfer_amplitude(n, k)
        rho = float(rng.uniform(0.0, 0.95)) * abs(gap) / (2.0 * amp)
        block = doublet_block(
            ModelParams(epsilon=eps, hbar_omega=hw, rho=rho, k=k, phi=-1), n
        )
        angle = mixing_angle(block)
        lam_1, lam_2 = doublet_eigenvalues(block)
        psi_1, psi_2 = doublet_eigenvectors(block, angle)
        worst_residual = max(
            worst_residual,
            residual(block, lam_1.real, psi_1),
            residual(block, lam_2.real, psi_2),
        )
        overlap = float(normalize(psi_1) @ normalize(psi_2))
        worst_overlap = max(worst_overlap, abs(overlap - np.sin(angle.value)))

    for _ in range(50):  # hyperbolic region, phi = +1
        hw = float(rng.uniform(0.5, 2.0))
        k = int(rng.integers(1, 4))
        eps = hw * k + float(rng.choice([-1.0, 1.0])) * float(rng.uniform(0.1, 2.0))
        n = int(rng.integers(0, 12))
        rho = float(rng.uniform(0.05, 2.0))
        block = doublet_block(
            ModelParams(epsilon=eps, hbar_omega=hw, rho=rho, k=k, phi=1), n
        )
        angle = mixing_angle(block)
        lam_1, lam_2 = doublet_eigenvalues(block)
        psi_1, psi_2 = doublet_eigenvectors(block, angle)
        worst_residual = max(
            worst_residual,
            residual(block, lam_1.real, psi_1),
            residual(block, lam_2.real, psi_2),
        )
        cosine = abs(float(normalize(psi_1) @ normalize(psi_2)))
        worst_ortho = max(worst_ortho, cosine)

    assert worst_residual <= tol
    assert worst_ortho <= tol
    assert worst_overlap <= tol
    report(
        3,
        "mixing-angle eigenvectors",
        f"100 draws, residual {worst_residual:.1e}, orthogonality "
        f"{worst_ortho:.1e}, trig overlap error {worst_overlap:.1e}, all <= 1e-12",
    )


def test_criterion_04_qes_exactness_cutoff_independent():
    defect_tol = 1e-13
    residual_tol = 1e-10
    double = TruncatedFockSpace(cutoff=128, guard=8)
    rng = np.random.default_rng(404)
    worst_defect = 0.0
    worst_residual = 0.0
    for big_n in range(6):
        for _ in range(3):
            for phi in (1, -1):
                params = ModelParams(
                    epsilon=1.0,
                    rho=float(rng.uniform(0.0, 2.0)),
                    theta=float(rng.uniform(0.0, 3.0)),
                    n_qes=big_n + 2,
                    phi=phi,
                )
                sub = build_subspace(params, SPACE)
                worst_defect = max(worst_defect, sub.defect)
                pairs = algebraic_spectrum(sub, params)
                assert len(pairs) == 2 * big_n + 4
                for pair in pairs:
                    worst_residual = max(worst_residual, pair.residual)
                    if pair.defective:
                        h = build_ht(params, double).matrix
                        basis = pair.cluster_basis
                        full = np.column_stack(
                            [
                                embed_subspace_vector(sub, basis[:, j], double)
                                for j in range(basis.shape[1])
                            ]
                        )
                        small = basis.conj().T @ restriction_matrix(params) @ basis
                        again = float(np.linalg.norm(h @ full - full @ small))
                    else:
                        again = certify_in_full_space(
                            pair.energy, pair.vector, sub, params, double
                        )
                    worst_residual = max(worst_residual, again)
    assert worst_defect <= defect_tol
    assert worst_residual <= residual_tol
    report(
        4,
        "invariant-subspace exactness",
        f"N 0..5, defect {worst_defect:.1e} <= 1e-13, residual at D and 2D "
        f"{worst_residual:.1e} <= 1e-10",
    )


def test_criterion_05_dressed_spectrum_at_zero_rho():
    tol = 1e-12
    root2 = np.sqrt(2.0)
    worst = 0.0
    for theta in (0.25, 1.0, 1.5, 3.0):
        params = ModelParams(epsilon=1.0, rho=0.0, theta=theta, n_qes=3, phi=1)
        expected = np.array(
            [
                -0.5,
                (3.0 - 4.0 * theta) / 6.0,
                (3.0 + 4.0 * theta) / 6.0,
                (9.0 - 2.0 * root2 * theta) / 6.0,
                (9.0 + 2.0 * root2 * theta) / 6.0,
                2.5,
            ]
        )
        worst = max(worst, spectrum_mismatch(algebraic_eigenvalues(params), expected))
    assert worst <= tol
    report(
        5,
        "decoupled dressed spectrum",
        f"theta in {{0.25, 1, 1.5, 3}}, worst mismatch {worst:.1e} <= 1e-12",
    )


def test_criterion_06_level_crossing_at_theta_three_halves():
    params = ModelParams(epsilon=1.0, rho=1.0, theta=0.0, n_qes=3, phi=1)
    spec = SweepSpec(params=params, parameter="theta", start=1.0, stop=2.0, points=21)
    result = qes_theta_sweep(spec)
    crossings = [
        e
        for e in result.events
        if e.kind == "crossing" and abs(e.energy.real + 0.5) <= 1e-6
    ]
    assert crossings, "no crossing located at E = -1/2"
    theta_star = crossings[0].value
    assert 1.4 <= theta_star <= 1.6, f"crossing at theta = {theta_star}, not in [1.4, 1.6]"
    report(
        6,
        "crossing localization",
        f"E = -1/2 crossing at theta* = {theta_star:.8f}, inside [1.4, 1.6]",
    )


def test_criterion_07_ground_state_migration():
    params = ModelParams(epsilon=1.0, k=2, phi=1)
    tol = 1e-10

    def lower_branch(rho):
        block = doublet_block(
            ModelParams(epsilon=1.0, rho=float(rho), k=2, phi=1), 0
        )
        return doublet_eigenvalues(block)[1].real

    lo, hi = 0.5, 1.5
    f_lo = lower_branch(lo) + 0.5
    f_hi = lower_branch(hi) + 0.5
    assert f_lo > 0.0 > f_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if lower_branch(mid) + 0.5 > 0.0:
            lo = mid
        else:
            hi = mid
    crossing = 0.5 * (lo + hi)
    assert abs(crossing - 1.0) <= tol
    assert lower_branch(1.0) == -0.5  # exact: 1 - sqrt(9)/2
    assert lower_branch(1.2) < -0.5  # below the singlet: new ground state
    report(
        7,
        "ground-state migration",
        f"doublet-0 lower branch hits -1/2 at rho = {crossing:.12f} "
        f"(bisection to 1e-10), exactly -1/2 at rho = 1",
    )


def test_criterion_08_exceptional_points():
    params = ModelParams(epsilon=1.0, k=2, phi=-1)
    location_tol = 1e-6
    conjugacy_tol = 1e-10
    pinned = {0: 0.3535534, 1: 0.2041241}
    brackets = {0: (0.25, 0.45), 1: (0.15, 0.25)}
    located = {}
    for doublet, (lo, hi) in brackets.items():
        event = locate_coalescence(params, doublet, lo, hi)
        located[doublet] = event.value
        assert abs(event.value - pinned[doublet]) <= location_tol
        exact = doublet_coalescence_rho(params, doublet)
        assert abs(event.value - exact) <= 1e-7
        # just past the event the pair must be exactly conjugate
        block = doublet_block(
            ModelParams(epsilon=1.0, rho=1.2 * event.value, k=2, phi=-1), doublet
        )
        lam_1, lam_2 = doublet_eigenvalues(block)
        assert lam_1.imag > 0.0
        assert abs(lam_1 - np.conj(lam_2)) <= conjugacy_tol
    report(
        8,
        "exceptional points",
        f"rho*_0 = {located[0]:.7f}, rho*_1 = {located[1]:.7f} "
        f"(pinned +- 1e-6), post-event conjugacy <= 1e-10",
    )


def test_criterion_09_recurrence_oracle():
    root_tol = 1e-8
    overlap_floor = 1.0 - 1e-8
    worst_root = 0.0
    worst_overlap = 1.0
    for big_n, rho, theta in itertools.product(
        range(1, 5), (0.0, 0.5, 1.0), (0.0, 0.5, 1.0)
    ):
        params = ModelParams(
            epsilon=1.0, rho=rho, theta=theta, n_qes=big_n + 2, phi=1
        )
        sub = build_subspace(params, SPACE)
        pairs = algebraic_spectrum(sub, params)
        energies = np.array([pair.energy for pair in pairs])
        for root in critical_roots(params):
            worst_root = max(worst_root, float(np.min(np.abs(energies - root))))
            psi = reconstruct_eigenvector(params, root, SPACE)
            columns = []
            for pair in pairs:
                if abs(pair.energy - root) > 5e-7:
                    continue
                if pair.defective:
                    columns.extend(
                        embed_subspace_vector(sub, pair.cluster_basis[:, j])
                        for j in range(pair.cluster_basis.shape[1])
                    )
                else:
                    columns.append(embed_subspace_vector(sub, pair.vector))
            q, _ = np.linalg.qr(np.column_stack(columns))
            worst_overlap = min(
                worst_overlap, float(np.linalg.norm(q.conj().T @ psi))
            )
    assert worst_root <= root_tol
    assert worst_overlap >= overlap_floor
    report(
        9,
        "series-truncation oracle",
        f"N 1..4 over (rho, theta) grid: worst root distance {worst_root:.1e} "
        f"<= 1e-8, worst eigenvector overlap {worst_overlap:.10f} >= 1 - 1e-8",
    )


def test_criterion_10_cross_representation():
    tol = 1e-9
    worst = 0.0
    for eps, rho in ((0.75, 0.4), (1.0, 1.0)):
        params = ModelParams(epsilon=eps, rho=rho)
        for n in range(1, 11):
            op = gauge_transform_pseudo_jcm(params, n)
            fock_params = ModelParams(epsilon=eps, rho=rho, phi=-1, k=1)
            levels = [complex(-0.5 * eps)]
            for j in range(n):
                levels.extend(doublet_eigenvalues(doublet_block(fock_params, j)))
            worst = max(
                worst,
                spectrum_mismatch(restriction_spectrum(op), np.array(levels)),
            )
    for big_n in range(5):
        for phi in (1, -1):
            for rho, theta in ((0.7, 1.2), (1.0, 1.5)):
                params = ModelParams(
                    epsilon=1.0, rho=rho, theta=theta, n_qes=big_n + 2, phi=phi
                )
                op = gauge_transform_ht(params)
                worst = max(
                    worst,
                    spectrum_mismatch(
                        restriction_spectrum(op), algebraic_eigenvalues(params)
                    ),
                )
    assert worst <= tol
    report(
        10,
        "polynomial vs Fock representation",
        f"one-photon n <= 10 and dressed N <= 4: worst mismatch {worst:.1e} <= 1e-9",
    )
