"""Command-line front end.

Commands: spectrum, check, qes, recur, sweep, figures, polyrep-check.
Configuration precedence is flags > `--config` key=value file > defaults
(hbar omega = 1, eps = 1, D = 64, guard = 8).  Exit codes: 0 success,
2 invalid input, 3 numerical failure.  Data goes to --output when given,
else to stdout; human messages go to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from ._linalg import eig_checked, spectrum_mismatch
from .closedform import doublet_block, doublet_eigenvalues, full_algebraic_spectrum
from .errors import NumericalError, TrackingAmbiguityError, ValidationError
from .flow import FlowEvent, SweepSpec, qes_theta_sweep, sweep
from .fock import TruncatedFockSpace
from .models import (
    ModelParams,
    build_extended,
    build_h12,
    build_ht,
    build_jcm,
    build_pseudo_jcm,
)
from .output import (
    Table,
    format_number,
    svg_line_plot,
    write_csv,
    write_json,
)
from .polyrep import (
    gauge_transform_ht,
    gauge_transform_pseudo_jcm,
    restriction_spectrum,
)
from .qes import algebraic_eigenvalues, algebraic_spectrum, build_subspace
from .recurrence import critical_polynomial, critical_roots, reconstruct_eigenvector
from .symmetry import REALNESS_TOL, STRUCTURE_TOL, symmetry_report

SPECTRUM_COLUMNS = ("label", "n", "branch", "re_energy", "im_energy", "source", "residual")

# which ModelParams-facing flags each model accepts; anything else set by
# the user is rejected by name
_MODEL_FLAGS = {
    "extended": {"k", "phi", "rho", "eps", "hw", "poly"},
    "h2": {"phi", "rho", "eps", "hw"},
    "jcm": {"rho", "eps", "hw"},
    "pseudo-jcm": {"rho", "eps", "hw"},
    "h12": {"phi", "rho", "theta", "rho1", "rho1_hat", "eps", "hw"},
    "ht": {"phi", "rho", "theta", "c", "c_hat", "N", "eps", "hw"},
}

_BUILDERS = {
    "extended": build_extended,
    "h2": build_extended,
    "jcm": build_jcm,
    "pseudo-jcm": build_pseudo_jcm,
    "h12": build_h12,
    "ht": build_ht,
}

_PARAM_KEYS = (
    "model",
    "k",
    "phi",
    "eps",
    "hw",
    "rho",
    "theta",
    "N",
    "c",
    "c_hat",
    "rho1",
    "rho1_hat",
    "poly",
    "D",
    "guard",
    "format",
)


def _parse_phi(raw: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"--phi must be +1 or -1, got {raw!r}") from None
    if value not in (1, -1):
        raise ValidationError(f"--phi must be +1 or -1, got {raw!r}")
    return value


def _parse_poly(raw: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in raw.split(",") if part.strip() != "")
    except ValueError:
        raise ValidationError(
            f"--poly expects comma-separated coefficients, got {raw!r}"
        ) from None


def _read_config(path: str) -> dict[str, str]:
    """key = value lines; '#' comments; keys restricted to parameter names."""
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ValidationError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, raw = body.split("=", 1)
        key = key.strip()
        if key not in _PARAM_KEYS:
            raise ValidationError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = raw.strip()
    return values


def _merged(args: argparse.Namespace) -> dict:
    """Apply precedence: explicit flags, then config file, then defaults."""
    config = _read_config(args.config) if getattr(args, "config", None) else {}
    merged: dict = {}
    for key in _PARAM_KEYS:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
        elif key in config:
            merged[key] = config[key]
        else:
            merged[key] = None
    # normalize strings coming from the config file
    if isinstance(merged["phi"], str):
        merged["phi"] = _parse_phi(merged["phi"])
    if isinstance(merged["poly"], str):
        merged["poly"] = _parse_poly(merged["poly"])
    for key, cast in (
        ("k", int),
        ("N", int),
        ("D", int),
        ("guard", int),
        ("eps", float),
        ("hw", float),
        ("rho", float),
        ("theta", float),
        ("c", float),
        ("c_hat", float),
        ("rho1", float),
        ("rho1_hat", float),
    ):
        if isinstance(merged[key], str):
            try:
                merged[key] = cast(merged[key])
            except ValueError:
                raise ValidationError(
                    f"config value for {key} must be {cast.__name__}, "
                    f"got {merged[key]!r}"
                ) from None
    merged.setdefault("model", None)
    if merged["D"] is None:
        merged["D"] = 64
    if merged["guard"] is None:
        merged["guard"] = 8
    if merged["format"] is None:
        merged["format"] = "csv"
    return merged


def _require_model(merged: dict) -> str:
    model = merged["model"]
    if model is None:
        raise ValidationError("--model is required")
    if model not in _MODEL_FLAGS:
        raise ValidationError(
            f"unknown model {model!r}; choose from {sorted(_MODEL_FLAGS)}"
        )
    return model


def _check_flags_against_model(model: str, merged: dict):
    allowed = _MODEL_FLAGS[model]
    for key in ("k", "phi", "rho", "theta", "N", "c", "c_hat", "rho1", "rho1_hat", "poly", "eps", "hw"):
        if merged[key] is not None and key not in allowed:
            flag = "--" + key.replace("_", "-")
            raise ValidationError(f"{flag} is not a parameter of model {model!r}")
    if model == "ht" and merged["N"] is None:
        raise ValidationError("model 'ht' requires --N (invariant-subspace label)")


def _params_from(merged: dict, model: str) -> ModelParams:
    _check_flags_against_model(model, merged)
    kwargs = {
        "epsilon": merged["eps"] if merged["eps"] is not None else 1.0,
        "hbar_omega": merged["hw"] if merged["hw"] is not None else 1.0,
        "rho": merged["rho"] if merged["rho"] is not None else 0.0,
    }
    if merged["phi"] is not None:
        kwargs["phi"] = merged["phi"]
    if model == "extended":
        kwargs["k"] = merged["k"] if merged["k"] is not None else 1
        kwargs["poly"] = merged["poly"] if merged["poly"] is not None else ()
    elif model == "h2":
        kwargs["k"] = 2
    elif model == "h12":
        for key in ("theta", "rho1", "rho1_hat"):
            if merged[key] is not None:
                kwargs[key] = merged[key]
    elif model == "ht":
        kwargs["n_qes"] = merged["N"] + 2
        for key in ("theta", "c", "c_hat"):
            if merged[key] is not None:
                kwargs[key] = merged[key]
    try:
        return ModelParams(**kwargs)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def _space_from(merged: dict) -> TruncatedFockSpace:
    try:
        return TruncatedFockSpace(merged["D"], merged["guard"])
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _complex_str(value: complex) -> str:
    value = complex(value)
    sign = "+" if value.imag >= 0 else "-"
    return f"{format_number(value.real)}{sign}{format_number(abs(value.imag))}j"


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(merged: dict, output: str | None) -> int:
    model = _require_model(merged)
    params = _params_from(merged, model)
    space = _space_from(merged)
    builder = _BUILDERS[model]
    operator = builder(params, space)
    numeric, vectors = eig_checked(operator.matrix)
    table = Table(columns=SPECTRUM_COLUMNS)

    if model in ("extended", "h2", "jcm", "pseudo-jcm"):
        effective = params if model == "extended" else dataclasses.replace(
            params,
            k=2 if model == "h2" else 1,
            phi={"jcm": 1, "pseudo-jcm": -1}.get(model, params.phi),
        )
        for level in full_algebraic_spectrum(effective, space):
            nearest = float(np.min(np.abs(numeric - level.energy)))
            table.add(
                level.label,
                level.n,
                level.branch or "",
                level.energy.real,
                level.energy.imag,
                "closed-form",
                nearest,
            )
    if model == "ht":
        sub = build_subspace(params, space)
        for index, pair in enumerate(algebraic_spectrum(sub, params)):
            table.add(
                f"qes:{index}",
                params.big_n,
                "defective" if pair.defective else "",
                pair.energy.real,
                pair.energy.imag,
                "qes",
                pair.residual,
            )
        h_matrix = operator.matrix
        for index, root in enumerate(critical_roots(params)):
            vec = reconstruct_eigenvector(params, root, space)
            residual = float(np.linalg.norm(h_matrix @ vec - root * vec))
            table.add(
                f"recurrence:{index}",
                params.big_n,
                "",
                complex(root).real,
                complex(root).imag,
                "recurrence",
                residual,
            )
    # dense route rows for every model (the only route for h12)
    order = np.lexsort((numeric.imag, numeric.real))
    for rank, index in enumerate(order):
        value = numeric[index]
        residual = float(
            np.linalg.norm(operator.matrix @ vectors[:, index] - value * vectors[:, index])
        )
        table.add(
            f"numeric:{rank}", "", "", value.real, value.imag, "numeric", residual
        )
    table.comments.append(f"model {model}, D {space.cutoff}, guard {space.guard}")
    if merged["format"] == "json":
        document = {
            "command": "spectrum",
            "model": model,
            "rows": [dict(zip(SPECTRUM_COLUMNS, row)) for row in table.rows],
        }
        _emit(write_json(document), output)
    else:
        _emit(write_csv(table), output)
    return 0


def cmd_check(merged: dict, output: str | None) -> int:
    model = _require_model(merged)
    params = _params_from(merged, model)
    space = _space_from(merged)
    report = symmetry_report(_BUILDERS[model](params, space))
    pseudo = {
        name: {"ok": ok, "dev": dev}
        for name, (ok, dev) in report.pseudo_hermitian.items()
    }
    document = {
        "command": "check",
        "model": model,
        "hermitian": {"ok": report.hermitian, "dev": report.hermitian_deviation},
        "pt": {"ok": report.pt_symmetric, "dev": report.pt_deviation},
        "pseudo": pseudo,
        "parity_sigma3_commutant": report.parity_sigma3_commutant,
        "spectrum_class": report.spectrum_class,
        "tolerances": {"structure": STRUCTURE_TOL, "realness": REALNESS_TOL},
    }
    _emit(write_json(document), output)
    return 0


def cmd_qes(merged: dict, output: str | None) -> int:
    model = _require_model(merged)
    if model != "ht":
        raise ValidationError("qes requires --model ht")
    params = _params_from(merged, model)
    space = _space_from(merged)
    sub = build_subspace(params, space)
    pairs = algebraic_spectrum(sub, params)
    if merged["format"] == "json":
        document = {
            "command": "qes",
            "N": params.big_n,
            "subspace_dim": sub.dim,
            "invariance_defect": sub.defect,
            "eigenvalues": [
                {
                    "re": pair.energy.real,
                    "im": pair.energy.imag,
                    "residual": pair.residual,
                    "defective": pair.defective,
                }
                for pair in pairs
            ],
        }
        _emit(write_json(document), output)
        return 0
    table = Table(columns=SPECTRUM_COLUMNS)
    for index, pair in enumerate(pairs):
        table.add(
            f"qes:{index}",
            params.big_n,
            "defective" if pair.defective else "",
            pair.energy.real,
            pair.energy.imag,
            "qes",
            pair.residual,
        )
    table.comments.append(f"subspace dim {sub.dim}")
    table.comments.append(f"invariance defect {format_number(sub.defect)}")
    _emit(write_csv(table), output)
    return 0


def cmd_recur(merged: dict, output: str | None) -> int:
    model = _require_model(merged)
    if model != "ht":
        raise ValidationError("recur requires --model ht")
    params = _params_from(merged, model)
    space = _space_from(merged)
    poly = critical_polynomial(params)
    roots = critical_roots(params)
    h_matrix = build_ht(params, space).matrix
    algebraic = algebraic_eigenvalues(params)
    rows = []
    for index, root in enumerate(roots):
        vec = reconstruct_eigenvector(params, root, space)
        residual = float(np.linalg.norm(h_matrix @ vec - root * vec))
        distance = float(np.min(np.abs(algebraic - root)))
        rows.append((index, complex(root), residual, distance))
    if merged["format"] == "json":
        document = {
            "command": "recur",
            "N": params.big_n,
            "degree": int(poly.degree),
            "coefficients": [float(c) for c in poly.float_coefficients()],
            "roots": [
                {
                    "re": value.real,
                    "im": value.imag,
                    "reconstruction_residual": residual,
                    "distance_to_algebraic": distance,
                }
                for _, value, residual, distance in rows
            ],
        }
        _emit(write_json(document), output)
        return 0
    table = Table(
        columns=("index", "re_energy", "im_energy", "reconstruction_residual", "distance_to_algebraic")
    )
    for index, value, residual, distance in rows:
        table.add(index, value.real, value.imag, residual, distance)
    table.comments.append(f"critical polynomial degree {int(poly.degree)}")
    _emit(write_csv(table), output)
    return 0


def _event_comment(event: FlowEvent) -> str:
    labels = ";".join(event.labels)
    return (
        f"event,{event.kind},{format_number(event.value)},"
        f"{_complex_str(event.energy)},{labels}"
    )


def _sweep_table(grid, labels, tracks, events) -> Table:
    table = Table(columns=("param_value", "level_label", "re_energy", "im_energy"))
    for g, value in enumerate(grid):
        for row, label in enumerate(labels):
            energy = tracks[row, g]
            table.add(float(value), label, energy.real, energy.imag)
    for event in events:
        table.comments.append(_event_comment(event))
    return table


def _sweep_svg(result, title: str, x_label: str) -> str:
    series = [
        (label, list(result.tracks[row].real))
        for row, label in enumerate(result.labels)
    ]
    markers = [(e.value, e.energy.real) for e in result.events]
    return svg_line_plot(result.grid, series, title, x_label, "Re E", markers)


def _run_sweep(spec: SweepSpec, merged: dict, output: str | None, title: str) -> int:
    runner = sweep if spec.parameter == "rho" else qes_theta_sweep
    try:
        result = runner(spec)
    except TrackingAmbiguityError as exc:
        grid = getattr(exc, "partial_grid", np.array([]))
        tracks = getattr(exc, "partial_tracks", np.zeros((0, 0)))
        labels = tuple(f"track:{i}" for i in range(tracks.shape[0]))
        table = _sweep_table(grid, labels, tracks, ())
        table.comments.append(f"INCOMPLETE {exc}")
        _emit(write_csv(table), output)
        print(f"error: {exc}", file=sys.stderr)
        return 3
    if merged["format"] == "svg":
        _emit(_sweep_svg(result, title, spec.parameter), output)
        return 0
    table = _sweep_table(result.grid, result.labels, result.tracks, result.events)
    _emit(write_csv(table), output)
    return 0


def cmd_sweep(merged: dict, args, output: str | None) -> int:
    model = _require_model(merged)
    params = _params_from(merged, model)
    if args.param == "rho":
        if model not in ("extended", "h2", "jcm", "pseudo-jcm"):
            raise ValidationError("rho sweeps need a ladder model (extended/h2/jcm/pseudo-jcm)")
        effective = params if model == "extended" else dataclasses.replace(
            params,
            k=2 if model == "h2" else 1,
            phi={"jcm": 1, "pseudo-jcm": -1}.get(model, params.phi),
        )
    else:
        if model != "ht":
            raise ValidationError("theta sweeps need --model ht")
        effective = params
    spec = SweepSpec(
        params=effective,
        parameter=args.param,
        start=args.start,
        stop=args.stop,
        points=args.points,
        doublets=args.doublets,
    )
    return _run_sweep(spec, merged, output, f"{model} {args.param} sweep")


def _figure_spec(which: int, rho: float | None = None) -> SweepSpec:
    if which in (1, 2):
        params = ModelParams(epsilon=1.0, k=2, phi=1 if which == 1 else -1)
        return SweepSpec(
            params=params, parameter="rho", start=0.0, stop=2.0, points=201, doublets=2
        )
    params = ModelParams(epsilon=1.0, rho=rho, n_qes=3, phi=1)
    return SweepSpec(params=params, parameter="theta", start=0.0, stop=3.0, points=151)


def cmd_figures(merged: dict, args, output: str | None) -> int:
    if args.which in (1, 2):
        spec = _figure_spec(args.which)
        return _run_sweep(spec, merged, output, f"levels vs rho (phi = {spec.params.phi:+d})")
    if output is None:
        raise ValidationError("figures --which 3 writes one file per rho; --output is required")
    stem = Path(output)
    code = 0
    for rho in (0.0, 1.0, 2.0):
        spec = _figure_spec(3, rho)
        target = stem.with_name(f"{stem.stem}_rho{int(rho)}{stem.suffix}")
        code = max(
            code,
            _run_sweep(spec, merged, str(target), f"dressed levels vs theta (rho = {rho})"),
        )
    return code


def cmd_polyrep_check(merged: dict, output: str | None) -> int:
    model = _require_model(merged)
    if model not in ("pseudo-jcm", "ht"):
        raise ValidationError("polyrep-check supports --model pseudo-jcm or ht")
    if model == "ht":
        params = _params_from(merged, model)
        op = gauge_transform_ht(params)
        reference = algebraic_eigenvalues(params)
    else:
        n = merged["N"] if merged["N"] is not None else 5
        if n < 1:
            raise ValidationError("--N must be >= 1 for polyrep-check")
        base = {
            key: merged[key] for key in ("eps", "hw", "rho") if merged[key] is not None
        }
        params = ModelParams(
            epsilon=base.get("eps", 1.0),
            hbar_omega=base.get("hw", 1.0),
            rho=base.get("rho", 0.0),
        )
        op = gauge_transform_pseudo_jcm(params, n)
        fock = dataclasses.replace(params, phi=-1, k=1)
        levels = [complex(-0.5 * fock.epsilon)]
        for j in range(n):
            levels.extend(doublet_eigenvalues(doublet_block(fock, j)))
        reference = np.array(levels)
    deviation = float(spectrum_mismatch(restriction_spectrum(op), reference))
    ok = bool(op.leak == 0.0 and deviation <= 1e-9)
    document = {
        "command": "polyrep-check",
        "model": model,
        "caps": list(op.caps),
        "dim": op.dim,
        "leak": op.leak,
        "max_spectrum_deviation": deviation,
        "ok": ok,
    }
    _emit(write_json(document), output)
    if not ok:
        print(
            f"error: polynomial-space route deviates by {deviation:.3e} "
            f"(leak {op.leak:.3e})",
            file=sys.stderr,
        )
        return 3
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_model_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--model", choices=sorted(_MODEL_FLAGS), default=None)
    parser.add_argument("--k", type=int, default=None, help="photon transfer order (extended)")
    parser.add_argument("--phi", type=_parse_phi, default=None, help="+1 or -1 coupling sign")
    parser.add_argument("--eps", type=float, default=None, help="level splitting")
    parser.add_argument("--hw", type=float, default=None, help="oscillator quantum")
    parser.add_argument("--rho", type=float, default=None, help="k-photon coupling")
    parser.add_argument("--theta", type=float, default=None, help="mixed-coupling strength")
    parser.add_argument("--N", type=int, default=None, help="invariant subspace label (ht)")
    parser.add_argument("--c", type=float, default=None, help="explicit dressing coupling")
    parser.add_argument("--c-hat", dest="c_hat", type=float, default=None)
    parser.add_argument("--rho1", type=float, default=None, help="bare one-photon strength (h12)")
    parser.add_argument("--rho1-hat", dest="rho1_hat", type=float, default=None)
    parser.add_argument("--poly", type=_parse_poly, default=None, help="diagonal P coefficients, ascending")
    parser.add_argument("--D", type=int, default=None, help="Fock cutoff (default 64)")
    parser.add_argument("--guard", type=int, default=None, help="guard band (default 8)")
    parser.add_argument("--output", default=None, help="write here instead of stdout")
    parser.add_argument("--format", choices=("csv", "json", "svg"), default=None)
    parser.add_argument("--config", default=None, help="key = value parameter file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qjc",
        description="Spectra of extended Jaynes-Cummings models, three ways.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("spectrum", "labeled eigenvalue table by every applicable route"),
        ("check", "hermiticity / pseudo-hermiticity report as JSON"),
        ("qes", "invariant-subspace certificate and algebraic spectrum"),
        ("recur", "series-truncation roots with reconstruction residuals"),
    ):
        sub = commands.add_parser(name, help=help_text)
        _add_model_flags(sub)

    sub = commands.add_parser("sweep", help="eigenvalue trajectories over rho or theta")
    _add_model_flags(sub)
    sub.add_argument("--param", choices=("rho", "theta"), required=True)
    sub.add_argument("--start", type=float, required=True)
    sub.add_argument("--stop", type=float, required=True)
    sub.add_argument("--points", type=int, required=True)
    sub.add_argument("--doublets", type=int, default=2)

    sub = commands.add_parser("figures", help="CSV/SVG data behind the three figures")
    _add_model_flags(sub)
    sub.add_argument("--which", type=int, choices=(1, 2, 3), required=True)

    sub = commands.add_parser("polyrep-check", help="polynomial-space route cross-check")
    _add_model_flags(sub)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        merged = _merged(args)
        output = args.output
        if args.command == "spectrum":
            return cmd_spectrum(merged, output)
        if args.command == "check":
            return cmd_check(merged, output)
        if args.command == "qes":
            return cmd_qes(merged, output)
        if args.command == "recur":
            return cmd_recur(merged, output)
        if args.command == "sweep":
            return cmd_sweep(merged, args, output)
        if args.command == "figures":
            return cmd_figures(merged, args, output)
        if args.command == "polyrep-check":
            return cmd_polyrep_check(merged, output)
        raise ValidationError(f"unknown command {args.command!r}")
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
