import csv
import hashlib
import io
import json

import numpy as np
import pytest

from mechcirc.cli import EXIT_CONFIG, EXIT_OK, EXIT_TARGET, main
from mechcirc.config import data_path, load_config

DEVICE = str(data_path("device.toml"))
ISOLATOR = str(data_path("isolator.toml"))
CIRCULATOR = str(data_path("circulator.toml"))
NOISE_ENV = str(data_path("noise_env.toml"))


def _read(path):
    text = path.read_text()
    comments = [line for line in text.splitlines() if line.startswith("#")]
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    rows = list(csv.DictReader(io.StringIO(body)))
    return comments, rows


def _column(rows, name):
    return np.array([float(r[name]) for r in rows])


def test_spectrum_is_deterministic_and_hashed(tmp_path):
    out = tmp_path / "a.csv"
    assert main(["spectrum", ISOLATOR, "--points", "11", "--out", str(out)]) == EXIT_OK
    first = out.read_bytes()
    assert main(["spectrum", ISOLATOR, "--points", "11", "--out", str(out)]) == EXIT_OK
    assert out.read_bytes() == first
    comments, rows = _read(out)
    manifest = json.loads(comments[1].split("manifest: ", 1)[1])
    digest = hashlib.sha256(comments[1].split("manifest: ", 1)[1].encode()).hexdigest()
    assert comments[2].endswith(digest)
    assert manifest["inputs"][0]["sha256"] == hashlib.sha256(data_path("isolator.toml").read_bytes()).hexdigest()
    assert len(rows) == 11 and "s21_db" in rows[0]


def test_pumps_off_reflection_rows(tmp_path):
    out = tmp_path / "off.csv"
    assert main(["spectrum", DEVICE, "--omega-min", "-100", "--omega-max", "100",
                 "--points", "5", "--out", str(out)]) == EXIT_OK
    _, rows = _read(out)
    eta = load_config(DEVICE).device.eta
    for k in range(3):
        level = _column(rows, f"s{k + 1}{k + 1}_db")
        np.testing.assert_allclose(level, 10 * np.log10((2 * eta[k] - 1) ** 2), atol=1e-4)


def test_isolator_fixture_dip(tmp_path):
    out = tmp_path / "iso.csv"
    assert main(["spectrum", ISOLATOR, "--omega-min", "-500", "--omega-max", "500",
                 "--points", "101", "--out", str(out)]) == EXIT_OK
    _, rows = _read(out)
    center = _column(rows, "omega_hz") == 0.0
    assert -_column(rows, "s12_db")[center][0] >= 40.0
    assert -_column(rows, "s21_db")[center][0] <= 5.0


def test_phase_sweep_zero_row_reciprocal(tmp_path):
    out = tmp_path / "phase.csv"
    assert main(["phase-sweep", ISOLATOR, "--phi-points", "5", "--points", "7",
                 "--out", str(out)]) == EXIT_OK
    _, rows = _read(out)
    zero = [r for r in rows if float(r["phi_deg"]) == 0.0]
    assert len(zero) == 7
    np.testing.assert_allclose(_column(zero, "s12_db"), _column(zero, "s21_db"), atol=1e-9)
    assert main(["phase-sweep", ISOLATOR, "--phase-index", "4,1"]) == EXIT_CONFIG


def test_convert_reports_closed_form(tmp_path, capsys):
    out = tmp_path / "conv.csv"
    assert main(["convert", DEVICE, "--points", "5", "--out", str(out)]) == EXIT_OK
    err = capsys.readouterr().err
    engine, closed = _parse_conversion(err)
    assert engine == pytest.approx(closed, rel=1e-6)
    assert main(["convert", DEVICE, "--mode", "3"]) == EXIT_CONFIG


def _parse_conversion(text):
    engine = float(text.split("engine ")[1].split()[0])
    closed = float(text.split("closed form ")[1].split(";")[0])
    return engine, closed


def test_noise_gain_change_leaves_added_noise(tmp_path):
    env = data_path("noise_env.toml").read_text()
    louder = tmp_path / "louder.toml"
    louder.write_text(env.replace("gain_db = [67.5, 64.0, 60.5]", "gain_db = [77.5, 70.0, 60.5]"))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["noise", CIRCULATOR, NOISE_ENV, "--points", "3", "--out", str(a)]) == EXIT_OK
    assert main(["noise", CIRCULATOR, str(louder), "--points", "3", "--out", str(b)]) == EXIT_OK
    _, ra = _read(a)
    _, rb = _read(b)
    added = [k for k in ra[0] if k.startswith("n_add")]
    assert len(added) == 6
    for k in added:
        np.testing.assert_array_equal(_column(ra, k), _column(rb, k))
    ratio = _column(rb, "psd1_w_per_hz") / _column(ra, "psd1_w_per_hz")
    np.testing.assert_allclose(ratio, 10.0)


def test_noise_pumps_off_has_no_added_columns(tmp_path):
    out = tmp_path / "off.csv"
    assert main(["noise", DEVICE, NOISE_ENV, "--points", "3", "--out", str(out)]) == EXIT_OK
    _, rows = _read(out)
    assert not [k for k in rows[0] if k.startswith("n_add")]


def test_noise_missing_gains_is_config_error(tmp_path):
    env = tmp_path / "env.toml"
    env.write_text("[occupancy]\ncavity = [0, 0, 0]\nmechanics = [1, 1]\n")
    assert main(["noise", CIRCULATOR, str(env)]) == EXIT_CONFIG


def test_optimize_isolate_writes_result(tmp_path):
    target = tmp_path / "t.toml"
    target.write_text(data_path("target_isolate.toml").read_text()
                      + "\n[search]\nn_starts = 2\nmax_evals = 800\n")
    out = tmp_path / "res"
    assert main(["optimize", DEVICE, str(target), "--out", str(out)]) == EXIT_OK
    cfg = load_config(out / "result.toml")
    assert cfg.raw["meta"]["result"]["target_met"] is True
    assert np.all(np.abs(np.rad2deg(cfg.pumps.phase)) <= 180.0)
    _, rows = _read(out / "history.csv")
    assert len(rows) > 10


def test_optimize_infeasible_target_exits_nonzero(tmp_path, capsys):
    code = main(["optimize", DEVICE, str(data_path("target_infeasible.toml")),
                 "--set", "cavity.0.kappa_ext_hz=0.069e6", "--set", "cavity.1.kappa_ext_hz=0.031e6"])
    assert code == EXIT_TARGET
    assert "target met: False" in capsys.readouterr().out


def test_verify_fresh_fixture_passes(capsys):
    assert main(["verify", DEVICE]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("PASS") == 9 and "FAIL" not in out


def test_verify_corrupted_coupling_fails_oracle():
    assert main(["verify", DEVICE, "--mode", "oracle", "--set", "coupling.g0_hz.0.0=0"]) == EXIT_TARGET
    assert main(["verify", DEVICE, "--mode", "oracle", "--set", "coupling.g0_hz.0.0=-33"]) == EXIT_CONFIG


def test_verify_reduced_splitting_fails_timedomain(capsys):
    assert main(["verify", DEVICE, "--mode", "timedomain", "--set", "mechanics.1.f_hz=4.5e6"]) == EXIT_TARGET
    assert "FAIL  timedomain: rotating-wave hierarchy" in capsys.readouterr().out


def test_config_errors_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[[cavity]]\nf_hz = 1e9\n")
    assert main(["spectrum", str(bad)]) == EXIT_CONFIG
    assert main(["spectrum", DEVICE, "--set", "cavity.0.nonsense=1"]) == EXIT_CONFIG
    assert main(["spectrum", DEVICE, "--points", "1"]) == EXIT_CONFIG
    assert "nonsense" in capsys.readouterr().err
