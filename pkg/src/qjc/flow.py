"""Eigenvalue trajectories under coupling sweeps.

Two sweep routes with different labeling power:

* `sweep` drives the k-photon exchange family through rho.  Every level
  there carries an intrinsic label (a spin-down singlet, or one branch of a
  two-state ladder block), so trajectories never need matching: each label
  is an explicit function of rho, continuous through exceptional points
  because the square root of the discriminant is taken in the complex
  plane.

* `qes_theta_sweep` drives the dressed mixed-exchange model through theta.
  Its restriction eigenvalues come unlabeled out of the solver, so
  trajectories are continued by greedy nearest-neighbor matching against a
  linear extrapolation of each track, with automatic step halving (up to
  `MAX_REFINEMENTS`) whenever two candidates are comparably close.

Events -- real-level crossings, and branch coalescences for the
sign-flipped coupling -- are localized by bisection to `PARAM_TOL`.
"""

from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._linalg import eigvals_checked
from .closedform import doublet_block, doublet_eigenvalues
from .errors import TrackingAmbiguityError, ValidationError
from .fock import TruncatedFockSpace
from .models import ModelParams, build_extended, poly_value
from .qes import algebraic_eigenvalues

PARAM_TOL = 1e-8
MAX_REFINEMENTS = 10
REAL_TOL = 1e-10


def worker_count() -> int:
    """Thread budget for grid evaluation, from QJC_THREADS (default 1)."""
    raw = os.environ.get("QJC_THREADS", "").strip()
    if not raw:
        return 1
    try:
        count = int(raw)
    except ValueError as exc:
        raise ValidationError(f"QJC_THREADS must be an integer, got {raw!r}") from exc
    if count < 1:
        raise ValidationError(f"QJC_THREADS must be >= 1, got {count}")
    return count


def _evaluate_grid(func, grid):
    workers = worker_count()
    if workers == 1:
        return [func(value) for value in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, grid))


@dataclass(frozen=True)
class SweepSpec:
    """One parameter sweep: which knob, over what grid, for which model."""

    params: ModelParams
    parameter: str
    start: float
    stop: float
    points: int
    doublets: int = 2

    def __post_init__(self):
        if self.parameter not in ("rho", "theta"):
            raise ValidationError(
                f"swept parameter must be 'rho' or 'theta', got {self.parameter!r}"
            )
        if self.points < 2:
            raise ValidationError(f"need at least 2 grid points, got {self.points}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValidationError("sweep range must be finite")
        if self.start >= self.stop:
            raise ValidationError("sweep range must have start < stop")
        if self.doublets < 0:
            raise ValidationError("doublets must be >= 0")

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)

    def at(self, value: float) -> ModelParams:
        return dataclasses.replace(self.params, **{self.parameter: float(value)})


@dataclass(frozen=True)
class FlowEvent:
    """A localized spectral event along a sweep."""

    kind: str  # "crossing" | "coalescence"
    parameter: str
    value: float
    energy: complex
    labels: tuple[str, str]
    tolerance: float


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    grid: np.ndarray
    labels: tuple[str, ...]
    tracks: np.ndarray  # shape (len(labels), len(grid))
    events: tuple[FlowEvent, ...]

    def track(self, label: str) -> np.ndarray:
        try:
            return self.tracks[self.labels.index(label)]
        except ValueError:
            raise ValidationError(f"no tracked level labeled {label!r}") from None


def _closed_form_level(params: ModelParams, label: str) -> complex:
    kind, index, *branch = label.split(":")
    if kind == "singlet":
        j = int(index)
        return complex(
            params.hbar_omega * j + poly_value(params, j) - 0.5 * params.epsilon
        )
    block = doublet_block(params, int(index))
    lam_1, lam_2 = doublet_eigenvalues(block)
    return lam_1 if branch[0] == "I" else lam_2


def _sweep_labels(spec: SweepSpec) -> tuple[str, ...]:
    singlets = [f"singlet:{j}" for j in range(spec.params.k)]
    doublets = []
    for t in range(spec.doublets):
        doublets.extend([f"doublet:{t}:I", f"doublet:{t}:II"])
    return tuple(singlets + doublets)


def sweep(spec: SweepSpec) -> SweepResult:
    """Trajectories of labeled closed-form levels over the grid.

    Singlet rows are exactly constant by construction; doublet branches
    follow the +/- square-root branches of their block and continue through
    a coalescence as complex-conjugate values.
    """
    if spec.parameter != "rho":
        raise ValidationError("closed-form sweeps drive rho; use qes_theta_sweep")
    grid = spec.grid()
    labels = _sweep_labels(spec)
    point_values = _evaluate_grid(
        lambda value: [_closed_form_level(spec.at(value), label) for label in labels],
        grid,
    )
    tracks = np.array(point_values, dtype=complex).T
    events = _closed_form_events(spec, grid, labels, tracks)
    return SweepResult(spec=spec, grid=grid, labels=labels, tracks=tracks, events=events)


def _bisect(func, lo: float, hi: float, tol: float) -> float:
    f_lo = func(lo)
    if f_lo == 0.0:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol:
            return mid
        f_mid = func(mid)
        if f_mid == 0.0:
            return mid
        if (f_lo > 0.0) == (f_mid > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _real_rows(tracks: np.ndarray) -> np.ndarray:
    scale = np.maximum(1.0, np.abs(tracks))
    return np.all(np.abs(tracks.imag) <= REAL_TOL * scale, axis=1)


def _closed_form_events(spec, grid, labels, tracks) -> tuple[FlowEvent, ...]:
    events = []
    real_row = _real_rows(tracks)
    # crossings of real labeled levels: sign change of the difference,
    # localized on the exact closed-form difference
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            if not (real_row[i] and real_row[j]):
                continue
            diff = tracks[i].real - tracks[j].real
            label_i, label_j = labels[i], labels[j]
            for g in range(len(grid) - 1):
                # a difference that is exactly zero on an interior grid point
                # (the rho = 1 degeneracies land there) is already localized;
                # endpoint zeros are boundary degeneracies, not events
                if diff[g + 1] == 0.0:
                    if g + 1 < len(grid) - 1:
                        energy = _closed_form_level(spec.at(grid[g + 1]), label_i)
                        events.append(
                            FlowEvent(
                                kind="crossing",
                                parameter=spec.parameter,
                                value=float(grid[g + 1]),
                                energy=energy,
                                labels=(label_i, label_j),
                                tolerance=0.0,
                            )
                        )
                    continue
                if diff[g] * diff[g + 1] < 0.0:

                    def gap(value, li=label_i, lj=label_j):
                        p = spec.at(value)
                        return (
                            _closed_form_level(p, li).real
                            - _closed_form_level(p, lj).real
                        )

                    root = _bisect(gap, grid[g], grid[g + 1], PARAM_TOL)
                    energy = _closed_form_level(spec.at(root), label_i)
                    events.append(
                        FlowEvent(
                            kind="crossing",
                            parameter=spec.parameter,
                            value=root,
                            energy=energy,
                            labels=(label_i, label_j),
                            tolerance=PARAM_TOL,
                        )
                    )
    # coalescences: discriminant zero of each tracked block (phi = -1 only)
    if spec.params.phi == -1:
        for t in range(spec.doublets):

            def disc(value, t=t):
                return doublet_block(spec.at(value), t).discriminant()

            d_lo, d_hi = disc(spec.start), disc(spec.stop)
            if d_lo > 0.0 > d_hi:
                root = _bisect(disc, spec.start, spec.stop, PARAM_TOL)
                block = doublet_block(spec.at(root), t)
                mean = 0.5 * (block.matrix[0, 0] + block.matrix[1, 1])
                events.append(
                    FlowEvent(
                        kind="coalescence",
                        parameter=spec.parameter,
                        value=root,
                        energy=complex(mean),
                        labels=(f"doublet:{t}:I", f"doublet:{t}:II"),
                        tolerance=PARAM_TOL,
                    )
                )
    events.sort(key=lambda e: e.value)
    return tuple(events)


def numeric_deviation(spec: SweepSpec, space: TruncatedFockSpace) -> float:
    """Worst |closed-form - nearest full-matrix eigenvalue| over the sweep.

    The independent route: dense eigenvalues of the truncated matrix at
    every grid point, evaluated in parallel when QJC_THREADS allows.
    """
    result = sweep(spec)

    def numeric_values(value: float) -> np.ndarray:
        return eigvals_checked(build_extended(spec.at(value), space).matrix)

    per_point = _evaluate_grid(numeric_values, result.grid)
    worst = 0.0
    for g, numeric in enumerate(per_point):
        for row in result.tracks[:, g]:
            worst = max(worst, float(np.min(np.abs(numeric - row))))
    return worst


# ---------------------------------------------------------------------------
# unlabeled trajectories: the theta sweep of the dressed model


def _assign_tracks(predictions: np.ndarray, candidates: np.ndarray):
    """Greedy nearest-candidate assignment, most confident track first.

    Returns an index array (track -> candidate) or None when some track
    faces two candidates it cannot tell apart: nearer than 35% of their own
    separation means halving the step is needed to sharpen the prediction.
    Three situations cannot be sharpened by halving and are resolved
    deterministically instead: a degenerate candidate pair, a
    complex-conjugate split straddling a real prediction (+imag goes to the
    first claiming track), and two tracks whose predictions coincide (a
    level pair emerging from a degeneracy: the swapped assignment would be
    an equivalent labeling, so the lower candidate index wins).
    """
    n = len(predictions)
    assignment = np.full(n, -1, dtype=int)
    unassigned = list(range(n))
    available = list(range(n))
    scale = max(1.0, float(np.max(np.abs(candidates))))
    while unassigned:
        best = None  # (distance, track, candidate, runner_up_distance, runner_up)
        for track in unassigned:
            dists = sorted(
                (abs(candidates[c] - predictions[track]), c) for c in available
            )
            d1, c1 = dists[0]
            d2, c2 = dists[1] if len(dists) > 1 else (math.inf, -1)
            if best is None or d1 < best[0]:
                best = (d1, track, c1, d2, c2)
        d1, track, c1, d2, c2 = best
        if d2 < math.inf:
            gap = abs(candidates[c1] - candidates[c2])
            twin = min(
                (abs(predictions[other] - predictions[track]) for other in unassigned if other != track),
                default=math.inf,
            )
            if gap <= REAL_TOL * scale or twin <= REAL_TOL * scale:
                pass  # degenerate candidates or degenerate predictions
            elif d1 > 0.35 * gap:
                conj = abs(candidates[c1] - np.conj(candidates[c2]))
                if conj <= REAL_TOL * scale and abs(predictions[track].imag) <= REAL_TOL * scale:
                    # conjugate pair born from a real level: pick +imag first
                    c1 = c1 if candidates[c1].imag >= candidates[c2].imag else c2
                else:
                    return None
        assignment[track] = c1
        unassigned.remove(track)
        available.remove(c1)
    return assignment


def _advance(values_at, t_prev2, v_prev2, t_prev, v_prev, t_next, depth: int):
    """One tracked step t_prev -> t_next, halving on ambiguity."""
    if v_prev2 is None:
        predictions = v_prev
    else:
        slope = (v_prev - v_prev2) / (t_prev - t_prev2)
        predictions = v_prev + slope * (t_next - t_prev)
    candidates = values_at(t_next)
    assignment = _assign_tracks(predictions, candidates)
    if assignment is not None:
        return candidates[assignment], (t_prev, v_prev)
    if depth >= MAX_REFINEMENTS:
        raise TrackingAmbiguityError(
            f"level matching still ambiguous at step {t_prev}..{t_next} "
            f"after {MAX_REFINEMENTS} refinements"
        )
    t_mid = 0.5 * (t_prev + t_next)
    v_mid, history = _advance(values_at, t_prev2, v_prev2, t_prev, v_prev, t_mid, depth + 1)
    return _advance(values_at, history[0], history[1], t_mid, v_mid, t_next, depth + 1)


def qes_theta_sweep(spec: SweepSpec) -> SweepResult:
    """Restriction-spectrum trajectories of the dressed model over theta.

    Levels carry no intrinsic labels here, so rows are named track:0 ..
    track:2n-1 in the (Re, Im) order of the first grid point and continued
    by matching.  The theta-independent level -eps/2 shows up as an exactly
    constant row.
    """
    if spec.parameter != "theta":
        raise ValidationError("the dressed-model sweep drives theta")
    if spec.params.n_qes is None:
        raise ValidationError("qes_theta_sweep requires n_qes")
    grid = spec.grid()

    def values_at(value: float) -> np.ndarray:
        return algebraic_eigenvalues(spec.at(value))

    columns = [values_at(grid[0])]
    t_prev2, v_prev2 = None, None
    t_prev, v_prev = grid[0], columns[0]
    for t_next in grid[1:]:
        try:
            v_next, (t_prev2, v_prev2) = _advance(
                values_at, t_prev2, v_prev2, t_prev, v_prev, t_next, 0
            )
        except TrackingAmbiguityError as exc:
            # let callers salvage the trajectory prefix (partial CSV output)
            exc.partial_grid = grid[: len(columns)]
            exc.partial_tracks = np.array(columns, dtype=complex).T
            raise
        columns.append(v_next)
        t_prev, v_prev = t_next, v_next
    tracks = np.array(columns, dtype=complex).T
    labels = tuple(f"track:{i}" for i in range(tracks.shape[0]))
    events = _tracked_crossings(spec, grid, labels, tracks, values_at)
    return SweepResult(spec=spec, grid=grid, labels=labels, tracks=tracks, events=events)


def _tracked_crossings(spec, grid, labels, tracks, values_at) -> tuple[FlowEvent, ...]:
    """Bisect sign changes of real track differences, re-matching locally."""
    events = []
    real_row = _real_rows(tracks)
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            if not (real_row[i] and real_row[j]):
                continue
            diff = tracks[i].real - tracks[j].real
            for g in range(len(grid) - 1):
                if diff[g + 1] == 0.0 and g + 1 < len(grid) - 1:
                    events.append(
                        FlowEvent(
                            kind="crossing",
                            parameter=spec.parameter,
                            value=float(grid[g + 1]),
                            energy=complex(tracks[i, g + 1]),
                            labels=(labels[i], labels[j]),
                            tolerance=0.0,
                        )
                    )
                    continue
                if not diff[g] * diff[g + 1] < 0.0:
                    continue

                def gap(value):
                    # interpolate both endpoint tracks to the probe point,
                    # then read off the nearest actual eigenvalues
                    w = values_at(value)
                    frac = (value - grid[g]) / (grid[g + 1] - grid[g])
                    out = []
                    for row in (i, j):
                        guess = (1 - frac) * tracks[row, g] + frac * tracks[row, g + 1]
                        out.append(w[np.argmin(np.abs(w - guess))])
                    return out[0].real - out[1].real

                root = _bisect(gap, grid[g], grid[g + 1], PARAM_TOL)
                w = values_at(root)
                frac = (root - grid[g]) / (grid[g + 1] - grid[g])
                guess = (1 - frac) * tracks[i, g] + frac * tracks[i, g + 1]
                energy = w[np.argmin(np.abs(w - guess))]
                events.append(
                    FlowEvent(
                        kind="crossing",
                        parameter=spec.parameter,
                        value=root,
                        energy=energy,
                        labels=(labels[i], labels[j]),
                        tolerance=PARAM_TOL,
                    )
                )
    events.sort(key=lambda e: e.value)
    return tuple(events)


def max_theta_slope(result: SweepResult) -> float:
    """Largest |dE/dtheta| over all tracks, by forward differences.

    Reported (not asserted) for the weak-dependence regime at large rho.
    """
    steps = np.diff(result.grid)
    slopes = np.abs(np.diff(result.tracks.real, axis=1)) / steps
    return float(np.max(slopes)) if slopes.size else 0.0


def locate_coalescence(
    params: ModelParams, doublet: int, lo: float, hi: float
) -> FlowEvent:
    """Bisection on the exact block discriminant for one ladder doublet."""
    if params.phi != -1:
        raise ValidationError("only the sign-flipped coupling coalesces at real rho")

    def disc(value):
        return doublet_block(
            dataclasses.replace(params, rho=value), doublet
        ).discriminant()

    if not disc(lo) > 0.0 > disc(hi):
        raise ValidationError(
            f"discriminant of doublet {doublet} does not change sign on "
            f"[{lo}, {hi}]"
        )
    root = _bisect(disc, lo, hi, PARAM_TOL)
    block = doublet_block(dataclasses.replace(params, rho=root), doublet)
    mean = 0.5 * (block.matrix[0, 0] + block.matrix[1, 1])
    return FlowEvent(
        kind="coalescence",
        parameter="rho",
        value=root,
        energy=complex(mean),
        labels=(f"doublet:{doublet}:I", f"doublet:{doublet}:II"),
        tolerance=PARAM_TOL,
    )
