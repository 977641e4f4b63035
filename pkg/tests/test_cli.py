"""End-to-end checks of the command-line interface.

Everything goes through main(argv) so the exit-code contract (0 ok,
2 bad input, 3 numerical failure) is exercised exactly as a shell would
see it.
"""

import json

import numpy as np
import pytest

from qjc.cli import main
from qjc.errors import TrackingAmbiguityError
from qjc.output import read_csv


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def csv_rows(text, source=None):
    table = read_csv(text)
    rows = [dict(zip(table.columns, row)) for row in table.rows]
    if source is not None:
        rows = [r for r in rows if r.get("source") == source]
    return table, rows


# ---------------------------------------------------------------------------
# spectrum


def test_spectrum_two_photon_lowest_levels(capsys):
    code, out = run(
        capsys,
        "spectrum", "--model", "extended", "--k", "2", "--phi", "1",
        "--rho", "0", "--D", "16", "--guard", "4",
    )
    assert code == 0
    _, rows = csv_rows(out, source="closed-form")
    energies = sorted(float(r["re_energy"]) for r in rows)[:6]
    np.testing.assert_allclose(energies, [-0.5, 0.5, 0.5, 1.5, 1.5, 2.5], atol=1e-12)
    assert all(float(r["residual"]) < 1e-9 for r in rows)
    assert all(float(r["im_energy"]) == 0.0 for r in rows)


def test_spectrum_dressed_example_values(capsys):
    code, out = run(
        capsys,
        "spectrum", "--model", "ht", "--N", "1", "--rho", "0", "--theta", "1",
        "--D", "32", "--guard", "4",
    )
    assert code == 0
    _, qes = csv_rows(out, source="qes")
    got = sorted(float(r["re_energy"]) for r in qes)
    root2 = np.sqrt(2.0)
    expected = sorted(
        [-0.5, -1 / 6, 7 / 6, (9 - 2 * root2) / 6, (9 + 2 * root2) / 6, 2.5]
    )
    np.testing.assert_allclose(got, expected, atol=1e-12)
    _, recur = csv_rows(out, source="recurrence")
    assert len(recur) == 5  # every level except the constant -eps/2 one
    assert all(float(r["residual"]) < 1e-10 for r in recur)


def test_spectrum_h2_alias_matches_extended(capsys):
    code_a, out_a = run(
        capsys, "spectrum", "--model", "h2", "--rho", "0.3", "--D", "16", "--guard", "4"
    )
    code_b, out_b = run(
        capsys,
        "spectrum", "--model", "extended", "--k", "2", "--rho", "0.3",
        "--D", "16", "--guard", "4",
    )
    assert code_a == code_b == 0
    # same physics, different model tag in the trailing comment
    strip = lambda text: [l for l in text.splitlines() if not l.startswith("#")]
    assert strip(out_a) == strip(out_b)


def test_spectrum_writes_file(tmp_path, capsys):
    target = tmp_path / "spec.csv"
    code, out = run(
        capsys,
        "spectrum", "--model", "jcm", "--rho", "0.2", "--D", "16", "--guard", "4",
        "--output", str(target),
    )
    assert code == 0
    assert out == ""
    assert target.read_text().startswith("label,n,branch,re_energy,im_energy")


def test_spectrum_json_format(capsys):
    code, out = run(
        capsys,
        "spectrum", "--model", "jcm", "--D", "16", "--guard", "4",
        "--format", "json",
    )
    assert code == 0
    document = json.loads(out)
    assert list(document)[0] == "schema_version"
    assert document["rows"][0]["label"] == "singlet:0"


# ---------------------------------------------------------------------------
# input validation -> exit 2


@pytest.mark.parametrize(
    "argv, fragment",
    [
        (("spectrum", "--model", "jcm", "--theta", "1"), "--theta"),
        (("spectrum", "--model", "jcm", "--k", "2"), "--k"),
        (("spectrum", "--model", "extended", "--N", "1"), "--N"),
        (("spectrum", "--model", "ht", "--theta", "1"), "--N"),
        (("spectrum",), "--model"),
        (("qes", "--model", "jcm"), "ht"),
        (("recur", "--model", "h12"), "ht"),
        (("sweep", "--model", "ht", "--N", "0", "--param", "rho",
          "--start", "0", "--stop", "1", "--points", "5"), "ladder"),
        (("sweep", "--model", "jcm", "--param", "theta",
          "--start", "0", "--stop", "1", "--points", "5"), "ht"),
        (("sweep", "--model", "jcm", "--param", "rho",
          "--start", "0", "--stop", "1", "--points", "1"), "grid"),
        (("figures", "--which", "3"), "--output"),
        (("polyrep-check", "--model", "extended"), "polyrep"),
    ],
)
def test_invalid_input_exits_2(capsys, argv, fragment):
    code = main(list(argv))
    err = capsys.readouterr().err
    assert code == 2
    assert fragment in err


def test_unknown_flag_exits_2_via_argparse():
    with pytest.raises(SystemExit) as info:
        main(["spectrum", "--bogus", "1"])
    assert info.value.code == 2


# ---------------------------------------------------------------------------
# check


def test_check_pseudo_jcm_truth_table(capsys):
    code, out = run(
        capsys, "check", "--model", "pseudo-jcm", "--rho", "0.4", "--D", "32"
    )
    assert code == 0
    document = json.loads(out)
    assert document["hermitian"]["ok"] is False
    assert document["pseudo"]["sigma3"]["ok"] is True
    assert document["pseudo"]["parity"]["ok"] is True
    assert document["tolerances"]["structure"] == 1e-12


def test_check_jcm_is_hermitian(capsys):
    code, out = run(capsys, "check", "--model", "jcm", "--rho", "0.4", "--D", "32")
    document = json.loads(out)
    assert code == 0
    assert document["hermitian"]["ok"] is True
    assert document["spectrum_class"] == "all-real"


def test_check_two_photon_flipped_loses_parity(capsys):
    code, out = run(
        capsys,
        "check", "--model", "extended", "--k", "2", "--phi", "-1",
        "--rho", "0.4", "--D", "32",
    )
    document = json.loads(out)
    assert code == 0
    assert document["pseudo"]["sigma3"]["ok"] is True
    assert document["pseudo"]["parity"]["ok"] is False


# ---------------------------------------------------------------------------
# qes / recur


def test_qes_certificate(capsys):
    code, out = run(
        capsys,
        "qes", "--model", "ht", "--N", "2", "--theta", "1.5", "--rho", "0.5",
        "--format", "json",
    )
    assert code == 0
    document = json.loads(out)
    assert document["subspace_dim"] == 8
    assert document["invariance_defect"] == 0.0
    assert len(document["eigenvalues"]) == 8
    assert all(e["residual"] < 1e-10 for e in document["eigenvalues"])


def test_recur_roots_live_inside_qes_spectrum(capsys):
    code, out = run(
        capsys,
        "recur", "--model", "ht", "--N", "1", "--rho", "1", "--theta", "0.5",
    )
    assert code == 0
    table, rows = csv_rows(out)
    assert len(rows) == 5
    assert all(float(r["distance_to_algebraic"]) < 1e-8 for r in rows)
    assert all(float(r["reconstruction_residual"]) < 1e-10 for r in rows)
    assert any("degree 5" in c for c in table.comments)


# ---------------------------------------------------------------------------
# sweep


def test_sweep_rho_csv_contract(capsys):
    code, out = run(
        capsys,
        "sweep", "--model", "h2", "--phi", "-1", "--param", "rho",
        "--start", "0", "--stop", "0.5", "--points", "11",
        "--D", "32", "--guard", "8",
    )
    assert code == 0
    table, rows = csv_rows(out)
    assert table.columns == ("param_value", "level_label", "re_energy", "im_energy")
    assert len(rows) == 11 * 6  # two singlets + two tracked doublets
    events = [c for c in table.comments if c.startswith("event,coalescence")]
    assert len(events) == 2
    values = sorted(float(e.split(",")[2]) for e in events)
    np.testing.assert_allclose(
        values, [1 / (2 * np.sqrt(6)), 1 / (2 * np.sqrt(2))], atol=1e-6
    )


def test_sweep_theta_reports_crossing(capsys):
    code, out = run(
        capsys,
        "sweep", "--model", "ht", "--N", "1", "--rho", "1", "--param", "theta",
        "--start", "0", "--stop", "3", "--points", "13",
        "--D", "32", "--guard", "4",
    )
    assert code == 0
    table, _ = csv_rows(out)
    crossings = [c for c in table.comments if c.startswith("event,crossing")]
    assert crossings, table.comments
    theta_star = float(crossings[0].split(",")[2])
    assert abs(theta_star - 1.5) < 1e-6
    assert "-0.5" in crossings[0].split(",")[3]


def test_sweep_round_trips_through_reader(capsys):
    code, out = run(
        capsys,
        "sweep", "--model", "jcm", "--param", "rho",
        "--start", "0", "--stop", "1", "--points", "5",
        "--D", "16", "--guard", "4",
    )
    assert code == 0
    from qjc.output import write_csv

    assert write_csv(read_csv(out)) == out


def test_sweep_svg_output(capsys):
    code, out = run(
        capsys,
        "sweep", "--model", "jcm", "--param", "rho",
        "--start", "0", "--stop", "1", "--points", "9",
        "--D", "16", "--guard", "4", "--format", "svg",
    )
    assert code == 0
    assert out.startswith("<svg")
    assert "polyline" in out


def test_tracking_failure_emits_partial_csv_and_exit_3(capsys, monkeypatch):
    def explode(spec):
        exc = TrackingAmbiguityError("could not disambiguate tracks")
        exc.partial_grid = np.array([0.0, 0.25])
        exc.partial_tracks = np.array([[1.0, 1.1], [2.0, 1.9]], dtype=complex)
        raise exc

    monkeypatch.setattr("qjc.cli.qes_theta_sweep", explode)
    code, out = run(
        capsys,
        "sweep", "--model", "ht", "--N", "1", "--param", "theta",
        "--start", "0", "--stop", "3", "--points", "7",
    )
    assert code == 3
    assert "# INCOMPLETE" in out
    _, rows = csv_rows(out)
    assert len(rows) == 4  # two grid points, two salvaged tracks


# ---------------------------------------------------------------------------
# figures


def test_figure_one_svg(tmp_path, capsys):
    target = tmp_path / "fig1.svg"
    code, _ = run(
        capsys,
        "figures", "--which", "1", "--format", "svg", "--output", str(target),
        "--D", "32", "--guard", "8",
    )
    assert code == 0
    text = target.read_text()
    assert text.count("<polyline") == 6  # two singlets + two doublet pairs


def test_figure_two_has_coalescence_events(tmp_path, capsys):
    target = tmp_path / "fig2.csv"
    code, _ = run(
        capsys,
        "figures", "--which", "2", "--output", str(target),
        "--D", "32", "--guard", "8",
    )
    assert code == 0
    table = read_csv(target.read_text())
    events = [c for c in table.comments if c.startswith("event,coalescence")]
    assert len(events) == 2


def test_figure_three_writes_one_file_per_rho(tmp_path, capsys):
    target = tmp_path / "fig3.csv"
    code, _ = run(
        capsys,
        "figures", "--which", "3", "--output", str(target),
        "--D", "32", "--guard", "4",
    )
    assert code == 0
    for rho in (0, 1, 2):
        path = tmp_path / f"fig3_rho{rho}.csv"
        assert path.exists(), path
        table = read_csv(path.read_text())
        constant = [
            float(r[2]) for r in table.rows if abs(float(r[2]) + 0.5) < 1e-9
        ]
        assert constant  # the -1/2 line shows up at every rho


# ---------------------------------------------------------------------------
# polyrep-check


@pytest.mark.parametrize(
    "argv",
    [
        ("polyrep-check", "--model", "pseudo-jcm", "--N", "4", "--rho", "0.3"),
        ("polyrep-check", "--model", "ht", "--N", "2", "--rho", "0.7", "--theta", "1.2"),
    ],
)
def test_polyrep_check_passes(capsys, argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    document = json.loads(out)
    assert code == 0
    assert document["ok"] is True
    assert document["leak"] == 0.0
    assert document["max_spectrum_deviation"] < 1e-9


# ---------------------------------------------------------------------------
# configuration files


def test_config_file_supplies_defaults_and_flags_win(tmp_path, capsys):
    config = tmp_path / "run.conf"
    config.write_text("model = ht\nN = 1\nrho = 1.0\ntheta = 1.5 # flag wins\n")
    code, out = run(
        capsys,
        "recur", "--config", str(config), "--theta", "0.5", "--format", "json",
    )
    assert code == 0
    document = json.loads(out)
    assert document["N"] == 1
    # theta = 0.5 has no root at -1/2; theta = 1.5 does (exact crossing)
    assert all(abs(r["re"] + 0.5) > 1e-3 for r in document["roots"])


def test_config_unknown_key_exits_2(tmp_path, capsys):
    config = tmp_path / "run.conf"
    config.write_text("flux = 7\n")
    code = main(["spectrum", "--config", str(config), "--model", "jcm"])
    assert code == 2
    assert "flux" in capsys.readouterr().err


def test_config_bad_syntax_exits_2(tmp_path, capsys):
    config = tmp_path / "run.conf"
    config.write_text("just some words\n")
    code = main(["spectrum", "--config", str(config), "--model", "jcm"])
    assert code == 2
    assert "key = value" in capsys.readouterr().err


def test_config_bad_number_exits_2(tmp_path, capsys):
    config = tmp_path / "run.conf"
    config.write_text("rho = fast\n")
    code = main(["spectrum", "--config", str(config), "--model", "jcm"])
    assert code == 2
    assert "rho" in capsys.readouterr().err


def test_missing_config_file_exits_2(capsys):
    code = main(["spectrum", "--model", "jcm", "--config", "/nonexistent/x.conf"])
    assert code == 2
