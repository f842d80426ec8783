"""Command-line front end.

Subcommands::

    mechcirc spectrum     CONFIG [--omega-min HZ --omega-max HZ --points N] [--out CSV]
    mechcirc phase-sweep  CONFIG [--phase-index I,J --phi-points N ...] [--out CSV]
    mechcirc convert      CONFIG [--ports I,J --mode K --cooperativity C] [--out CSV]
    mechcirc noise        CONFIG ENV [--omega-min HZ ...] [--out CSV]
    mechcirc optimize     CONFIG TARGET [--out DIR] [--seed N]
    mechcirc verify       CONFIG [--mode oracle|timedomain|invariants|all]

All numbers at this boundary are in Hz, dB and degrees; ports and drive
indices are one-based. ``--set key=value`` overrides any config entry, e.g.
``--set cavity.0.kappa_ext_hz=2e6``. Every CSV starts with ``#`` comment lines
holding the run manifest and its SHA-256, so identical runs give identical
files.

Exit codes: 0 success, 2 configuration error, 3 numerical error, 4 target
not met or verification failed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import tomli_w

from . import __version__
from .config import Config, load_config, load_toml
from .device import DeviceModel
from .effective import PumpConfiguration, build_effective, rwa_validity
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    MechcircError,
    NumericalError,
)
from .noise import (
    AmplifierChain,
    ThermalEnvironment,
    added_noise_per_path,
    output_noise_psd,
)
from .optimize import (
    OptimizationTarget,
    calibrate_renormalization,
    impedance_match,
    optimize_circulation,
    optimize_isolation,
)
from .oracles import (
    TwoPortWorkingPoint,
    conversion_bandwidth,
    conversion_efficiency,
    cooling_rate,
    lambda_ratio,
)
from .scattering import (
    absorption_budget,
    max_singular_value,
    power_budget,
    power_db,
    s_matrices,
    solve_grid,
)
from .timedomain import compare_adiabatic

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_TARGET = 4

TWO_PI = 2.0 * np.pi
#: relative |S_21| deviation accepted by the time-domain check
TIMEDOMAIN_TOLERANCE = 0.01


# ---------------------------------------------------------------- output


def _fmt(x) -> str:
    # adding 0.0 folds negative zero into zero
    return format(float(x) + 0.0, ".10g")


def _file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def build_manifest(args: argparse.Namespace, inputs: Sequence[str]) -> dict:
    """Run manifest: command, inputs with content hashes, overrides, options."""
    skip = {"func", "command", "set", "config", "env", "target"}
    return {
        "version": __version__,
        "command": args.command,
        "inputs": [{"path": str(p), "sha256": _file_digest(p)} for p in inputs],
        "overrides": list(args.set or []),
        "options": {k: v for k, v in sorted(vars(args).items()) if k not in skip},
    }


def manifest_header(manifest: dict) -> list:
    text = json.dumps(manifest, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(text.encode()).hexdigest()
    return [f"# mechcirc {__version__}", f"# manifest: {text}", f"# manifest_sha256: {digest}"]


def write_csv(out: Optional[str], manifest: dict, header: Sequence[str], rows) -> None:
    """Write comment header, column header and rows to ``out`` or stdout."""
    buf = io.StringIO()
    for line in manifest_header(manifest):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else _fmt(v) for v in row])
    if out in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(buf.getvalue())


def _pair_names(n: int) -> list:
    return [(i, j) for i in range(n) for j in range(n)]


def _index_pair(text: str, name: str) -> tuple:
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"expected two comma-separated integers, got '{text}'", field=name) from None
    return a - 1, b - 1


def _grid(args) -> np.ndarray:
    if args.points < 2 or not args.omega_min < args.omega_max:
        raise ConfigError("need omega-min < omega-max and at least 2 points", field="omega")
    return TWO_PI * np.linspace(args.omega_min, args.omega_max, args.points)


def _pumps(cfg: Config) -> PumpConfiguration:
    if cfg.pumps is not None:
        return cfg.pumps
    return PumpConfiguration.off(cfg.device.n_cavities, cfg.device.n_mechanics)


# ---------------------------------------------------------------- commands


def cmd_spectrum(args) -> int:
    cfg = load_config(args.config, args.set or ())
    eff = build_effective(cfg.device, _pumps(cfg), cfg.include_off_resonant)
    omega = _grid(args)
    S = solve_grid(eff, cfg.device, omega).s_matrices
    n = cfg.device.n_cavities
    header = ["omega_hz"]
    for i, j in _pair_names(n):
        header += [f"s{i + 1}{j + 1}_re", f"s{i + 1}{j + 1}_im", f"s{i + 1}{j + 1}_db"]
    rows = []
    for k, w in enumerate(omega):
        row = [w / TWO_PI]
        for i, j in _pair_names(n):
            s = S[k, i, j]
            row += [s.real, s.imag, float(power_db(s))]
        rows.append(row)
    write_csv(args.out, build_manifest(args, [args.config]), header, rows)
    return EXIT_OK


def cmd_phase_sweep(args) -> int:
    cfg = load_config(args.config, args.set or ())
    device = cfg.device
    i, j = _index_pair(args.phase_index, "phase-index")
    if not (0 <= i < device.n_cavities and 0 <= j < device.n_mechanics):
        raise ConfigError(f"phase index {args.phase_index} out of range", field="phase-index")
    if args.phi_points < 2:
        raise ConfigError("need at least 2 phase points", field="phi-points")
    phis = np.linspace(args.phi_min, args.phi_max, args.phi_points)
    omega = _grid(args)
    pumps = _pumps(cfg)
    n = device.n_cavities
    header = ["phi_deg", "omega_hz"] + [f"s{a + 1}{b + 1}_db" for a, b in _pair_names(n)]
    rows = []
    for phi in phis:
        eff = build_effective(device, pumps.with_phase((i, j), np.deg2rad(phi)),
                              cfg.include_off_resonant)
        S = s_matrices(eff, device, omega)
        for k, w in enumerate(omega):
            rows.append([phi, w / TWO_PI] + [float(power_db(S[k, a, b])) for a, b in _pair_names(n)])
    write_csv(args.out, build_manifest(args, [args.config]), header, rows)
    return EXIT_OK


def cmd_convert(args) -> int:
    cfg = load_config(args.config, args.set or ())
    device = cfg.device
    a, b = _index_pair(args.ports, "ports")
    mode = args.mode - 1
    if not 0 <= mode < device.n_mechanics:
        raise ConfigError(f"mechanical mode {args.mode} out of range", field="mode")
    match = impedance_match(device, mode, args.cooperativity, (a, b))
    eff = build_effective(device, match.pumps, cfg.include_off_resonant)
    omega = _grid(args)
    S = s_matrices(eff, device, omega)
    header = ["omega_hz", f"s{b + 1}{a + 1}_db", f"s{a + 1}{b + 1}_db",
              f"s{a + 1}{a + 1}_db", f"s{b + 1}{b + 1}_db"]
    rows = [[w / TWO_PI] + [float(power_db(S[k, p, q])) for p, q in ((b, a), (a, b), (a, a), (b, b))]
            for k, w in enumerate(omega)]
    write_csv(args.out, build_manifest(args, [args.config]), header, rows)
    eta = device.eta
    T0 = np.abs(s_matrices(eff, device, 0.0)[0, b, a]) ** 2
    pred = conversion_efficiency(args.cooperativity, args.cooperativity, eta[a], eta[b])
    G = np.abs(eff.G[:, mode])
    width = conversion_bandwidth(device.gamma_m[mode], cooling_rate(G[a], device.kappa[a]),
                                 cooling_rate(G[b], device.kappa[b]))
    print(f"conversion |T|^2 engine {T0:.6f} closed form {float(pred):.6f}; "
          f"bandwidth {width / TWO_PI:.6g} Hz; |S_ii(0)| {np.round(match.reflection, 6).tolist()}",
          file=sys.stderr)
    return EXIT_OK


_ENV_KEYS = {"amplifier", "occupancy", "temperature", "paths", "calibration", "meta"}


def load_environment(path, device: DeviceModel):
    """Read a noise environment file.

    Schema::

        [amplifier]
        gain_db = [67.5, 64.0, 60.5]
        n_amp = [23, 23, 33]
        [occupancy]               # or [temperature] with cavity_k, mechanics_k
        cavity = [0.0, 0.0, 0.0]
        mechanics = [40.0, 60.0]
        [paths]                   # optional, (output, input) one-based pairs
        forward = [[2, 1], [3, 2], [1, 3]]
        backward = [[1, 2], [2, 3], [3, 1]]

    Backward paths are evaluated with phase-negated pumps.
    """
    raw = load_toml(path)
    src = str(path)
    for key in raw:
        if key not in _ENV_KEYS:
            raise ConfigError(f"unknown section '{key}'", field=key, source=src)
    amp = raw.get("amplifier")
    if amp is None or "gain_db" not in amp:
        raise ConfigError("missing amplifier gains", field="amplifier.gain_db", source=src)
    nc, nm = device.n_cavities, device.n_mechanics
    try:
        chain = AmplifierChain(np.asarray(amp["gain_db"], float),
                               np.asarray(amp.get("n_amp", [0.0] * nc), float))
    except (MechcircError, ValueError) as exc:
        raise ConfigError(str(exc), field="amplifier", source=src) from None
    if chain.gain_db.shape != (nc,):
        raise ConfigError(f"expected {nc} gains", field="amplifier.gain_db", source=src)
    try:
        if "occupancy" in raw:
            occ = raw["occupancy"]
            env = ThermalEnvironment(np.asarray(occ.get("cavity", [0.0] * nc), float),
                                     np.asarray(occ.get("mechanics", [0.0] * nm), float))
        elif "temperature" in raw:
            tt = raw["temperature"]
            env = ThermalEnvironment.from_temperatures(device, tt.get("cavity_k", 0.0),
                                                       tt.get("mechanics_k", 0.0))
        else:
            env = ThermalEnvironment.zero(nc, nm)
    except (MechcircError, ValueError) as exc:
        raise ConfigError(str(exc), field="occupancy", source=src) from None
    if env.cavity_occupancy.shape != (nc,) or env.mech_occupancy.shape != (nm,):
        raise ConfigError("occupancy arrays do not match the device", field="occupancy", source=src)
    paths = raw.get("paths", {})
    fwd = [(int(i) - 1, int(j) - 1) for i, j in paths.get("forward", [])]
    bwd = [(int(i) - 1, int(j) - 1) for i, j in paths.get("backward", [])]
    return chain, env, fwd, bwd


def cmd_noise(args) -> int:
    cfg = load_config(args.config, args.set or ())
    device = cfg.device
    chain, env, fwd, bwd = load_environment(args.env, device)
    pumps = _pumps(cfg)
    omega = _grid(args)
    res = solve_grid(build_effective(device, pumps, cfg.include_off_resonant), device, omega)
    n = device.n_cavities
    header = ["omega_hz"] + [f"psd{k + 1}_w_per_hz" for k in range(n)]
    cols = [omega / TWO_PI]
    cols += [output_noise_psd(res, env, chain, k, float(device.omega_c[k])) for k in range(n)]
    groups = [(res, fwd)]
    if bwd:
        rev = solve_grid(build_effective(device, pumps.negated_phases(), cfg.include_off_resonant),
                         device, omega)
        groups.append((rev, bwd))
    if not fwd and not bwd:
        groups = [(res, [(i, j) for i, j in _pair_names(n) if i != j])]
    for result, paths in groups:
        for i, j in paths:
            s = np.abs(result.s_matrices[:, i, j])
            # paths that do not transmit have no input-referred noise
            if np.min(s) < 1e-6:
                continue
            header.append(f"n_add{i + 1}{j + 1}")
            cols.append(added_noise_per_path(result, env, (i, j)))
    write_csv(args.out, build_manifest(args, [args.config, args.env]), header, np.column_stack(cols))
    return EXIT_OK


_TARGET_KEYS = {"kind", "ports", "order", "band_hz", "band_points", "weight",
                "min_isolation_db", "max_insertion_loss_db"}
_SEARCH_KEYS = {"n_starts", "max_evals", "include_off_resonant", "workers"}


def load_target(path):
    """Read an optimization target file (``[target]`` and optional ``[search]``)."""
    raw = load_toml(path)
    src = str(path)
    for key in raw:
        if key not in ("target", "search", "meta"):
            raise ConfigError(f"unknown section '{key}'", field=key, source=src)
    tab = raw.get("target")
    if tab is None or "kind" not in tab:
        raise ConfigError("missing target kind", field="target.kind", source=src)
    for key in tab:
        if key not in _TARGET_KEYS:
            raise ConfigError(f"unknown key '{key}'", field=f"target.{key}", source=src)
    search = raw.get("search", {})
    for key in search:
        if key not in _SEARCH_KEYS:
            raise ConfigError(f"unknown key '{key}'", field=f"search.{key}", source=src)
    return tab, search


def _config_with_pumps(cfg: Config, pumps: PumpConfiguration, include_off: bool, meta: dict) -> dict:
    raw = {k: v for k, v in cfg.raw.items() if k not in ("pumps", "meta")}
    raw["pumps"] = {
        "photons": pumps.photon_number.tolist(),
        "phase_deg": np.rad2deg(np.angle(np.exp(1j * pumps.phase))).tolist(),
        "detuning_hz": (pumps.sideband_detuning / TWO_PI).tolist(),
        "include_off_resonant": bool(include_off),
    }
    raw["meta"] = meta
    return raw


def cmd_optimize(args) -> int:
    cfg = load_config(args.config, args.set or ())
    device = cfg.device
    tab, search = load_target(args.target)
    kind = tab["kind"]
    band = tuple(TWO_PI * float(v) for v in tab.get("band_hz", [0.0, 0.0]))
    points = int(tab.get("band_points", 1 if band[0] == band[1] else 11))
    include_off = bool(search.get("include_off_resonant", cfg.include_off_resonant))
    common = dict(include_off_resonant=include_off,
                  n_starts=int(search.get("n_starts", 8)),
                  workers=int(search.get("workers", args.workers)),
                  rng_seed=args.seed)
    if "max_evals" in search:
        common["max_evals"] = int(search["max_evals"])
    try:
        if kind == "isolate":
            ports = tuple(int(p) - 1 for p in tab.get("ports", [1, 2]))
            target = OptimizationTarget("isolate", ports, band, float(tab.get("weight", 1.0)),
                                        float(tab.get("min_isolation_db", 40.0)),
                                        float(tab.get("max_insertion_loss_db", 2.5)), points)
            result = optimize_isolation(device, target, **common)
        elif kind == "circulate":
            order = tuple(int(p) - 1 for p in tab.get("order", [1, 2, 3]))
            result = optimize_circulation(device, order, band, float(tab.get("weight", 1.0)),
                                          float(tab.get("min_isolation_db", 18.0)),
                                          float(tab.get("max_insertion_loss_db", 5.0)),
                                          band_points=points, **common)
        else:
            raise ConfigError(f"unsupported target kind '{kind}'", field="target.kind",
                              source=str(args.target))
    except DomainError as exc:
        raise ConfigError(str(exc), source=str(args.target)) from None

    ach = result.achieved
    manifest = build_manifest(args, [args.config, args.target])
    summary = {
        "target_met": bool(result.target_met),
        "objective": float(result.objective),
        "isolation_db": ach.isolation_db.tolist(),
        "insertion_loss_db": ach.insertion_loss_db.tolist(),
        "bandwidth_hz": float(ach.bandwidth_hz),
        "start_index": int(result.start_index),
        "converged": bool(result.converged),
    }
    lines = [f"target met: {result.target_met}",
             "isolation dB: " + ", ".join(f"{v:.2f}" for v in ach.isolation_db),
             "insertion loss dB: " + ", ".join(f"{v:.2f}" for v in ach.insertion_loss_db),
             f"isolation bandwidth: {ach.bandwidth_hz:.4g} Hz"]
    print("\n".join(lines))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        meta = {"manifest_sha256": manifest_header(manifest)[2].split()[-1], "result": summary}
        (out / "result.toml").write_text(
            "\n".join(manifest_header(manifest)) + "\n"
            + tomli_w.dumps(_config_with_pumps(cfg, result.pumps, include_off, meta)))
        write_csv(str(out / "history.csv"), manifest, ["evaluation", "objective"],
                  [[k, v] for k, v in enumerate(result.history)])
    return EXIT_OK if result.target_met else EXIT_TARGET


# ---------------------------------------------------------------- verify


def _check_oracle(cfg: Config, rng: np.random.Generator) -> list:
    """Engine against closed forms on every cavity pair of the configured device."""
    device = cfg.device
    out = []
    omega = TWO_PI * np.linspace(-200.0, 200.0, 21)
    worst = 0.0
    for a in range(device.n_cavities):
        for b in range(a + 1, device.n_cavities):
            sub = DeviceModel([device.cavities[a], device.cavities[b]], device.mechanics,
                              device.g0[[a, b]])
            for _ in range(5):
                n = 10.0 ** rng.uniform(3, 6, (2, device.n_mechanics))
                phi = np.zeros_like(n)
                phi[1, 1] = rng.uniform(-np.pi, np.pi)
                d0 = TWO_PI * rng.uniform(-100, 100, device.n_mechanics)
                eff = build_effective(sub, PumpConfiguration(n, phi, d0), include_off_resonant=False)
                S = s_matrices(eff, sub, omega)
                C = 4 * np.abs(eff.G) ** 2 / (sub.kappa[:, None] * eff.gamma_eff[None, :])
                wp = TwoPortWorkingPoint(C, phi[1, 1], 0.0, eff.gamma_eff, sub.eta,
                                         deltas=eff.delta_eff)
                ref = lambda_ratio(wp, omega)
                err = np.max(np.abs(S[:, 0, 1] / S[:, 1, 0] - ref) / np.abs(ref))
                worst = max(worst, float(err))
    out.append(("oracle: two-port transmission ratio", bool(worst < 1e-9), f"max rel err {worst:.2e}"))
    worst = 0.0
    for j in range(device.n_mechanics):
        match = impedance_match(device, j, 2.0, (0, 1))
        eff = build_effective(device, match.pumps, include_off_resonant=False)
        T = np.abs(s_matrices(eff, device, 0.0)[0, 1, 0]) ** 2
        pred = conversion_efficiency(2.0, 2.0, device.eta[0], device.eta[1])
        worst = max(worst, abs(T - pred) / pred)
    out.append(("oracle: conversion efficiency", bool(worst < 1e-9), f"max rel err {worst:.2e}"))
    return out


def _check_invariants(cfg: Config) -> list:
    device = cfg.device
    pumps = _pumps(cfg)
    eff = build_effective(device, pumps, cfg.include_off_resonant)
    span = 20.0 * float(np.max(eff.gamma_eff))
    res = solve_grid(eff, device, np.linspace(-span, span, 201))
    sv = float(np.max(max_singular_value(res)))
    rank = float(np.max(res.rank_residual))
    pb = float(np.max(np.abs(power_budget(res) - 1.0)))
    ab = float(np.max(np.abs(absorption_budget(res) - 1.0)))
    shift = PumpConfiguration(pumps.photon_number, pumps.phase + 0.37, pumps.sideband_detuning)
    res2 = solve_grid(build_effective(device, shift, cfg.include_off_resonant), device, res.omega_grid)
    gauge = float(np.max(np.abs(np.abs(res2.s_matrices) - np.abs(res.s_matrices))))
    return [
        ("invariants: passivity", sv <= 1 + 1e-9, f"max singular value {sv:.12f}"),
        ("invariants: drift rank", rank < 1e-10, f"rank residual {rank:.2e}"),
        ("invariants: output noise budget", pb < 1e-9, f"max |sum - 1| {pb:.2e}"),
        ("invariants: energy balance", ab < 1e-9, f"max |sum - 1| {ab:.2e}"),
        ("invariants: phase gauge", gauge < 1e-9, f"max |S| change {gauge:.2e}"),
    ]


def _check_timedomain(cfg: Config) -> list:
    device = cfg.device
    if cfg.pumps is not None:
        pumps = cfg.pumps
    else:
        tg = TWO_PI * np.array([190.0, 407.0])
        td = TWO_PI * np.array([-84.0, 233.0])
        pumps = calibrate_renormalization(device, tg, td).pumps
    eff = build_effective(device, pumps, cfg.include_off_resonant)
    rwa = rwa_validity(eff, device)
    rep = compare_adiabatic(device, pumps, [0.0], include_off_resonant=cfg.include_off_resonant)
    s21_td = abs(rep.time_domain[0, 1])
    s21_fd = abs(rep.frequency_domain[0, 1])
    dev = abs(s21_td - s21_fd) / s21_fd
    return [
        ("timedomain: |S21| extended vs effective", dev < TIMEDOMAIN_TOLERANCE,
         f"relative deviation {dev:.2e}"),
        ("timedomain: rotating-wave hierarchy", rwa.status != "fail",
         f"status {rwa.status}, worst ratio {rwa.worst:.3f}"),
    ]


def cmd_verify(args) -> int:
    cfg = load_config(args.config, args.set or ())
    modes = ["oracle", "timedomain", "invariants"] if args.mode == "all" else [args.mode]
    rng = np.random.default_rng(args.seed)
    checks = []
    for mode in modes:
        fn: Callable = {"oracle": lambda: _check_oracle(cfg, rng),
                        "timedomain": lambda: _check_timedomain(cfg),
                        "invariants": lambda: _check_invariants(cfg)}[mode]
        try:
            checks += fn()
        except (NumericalError, ConvergenceError, DomainError, FloatingPointError) as exc:
            checks.append((f"{mode}: evaluation", False, f"{type(exc).__name__}: {exc}"))
    ok = True
    for name, passed, detail in checks:
        ok &= bool(passed)
        print(f"{'PASS' if passed else 'FAIL'}  {name}  ({detail})")
    return EXIT_OK if ok else EXIT_TARGET


# ---------------------------------------------------------------- parser


def _add_grid(p, lo=-2000.0, hi=2000.0, points=401):
    p.add_argument("--omega-min", type=float, default=lo, help="lowest probe detuning (Hz)")
    p.add_argument("--omega-max", type=float, default=hi, help="highest probe detuning (Hz)")
    p.add_argument("--points", type=int, default=points, help="number of detuning points")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mechcirc", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"mechcirc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("config", help="device/pump TOML file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config entry (repeatable)")
        p.set_defaults(func=func)
        return p

    p = command("spectrum", cmd_spectrum, "scattering parameters versus probe detuning")
    _add_grid(p)
    p.add_argument("--out", help="output CSV (default stdout)")

    p = command("phase-sweep", cmd_phase_sweep, "scattering versus pump phase and detuning")
    p.add_argument("--phase-index", default="2,2", help="drive (cavity,mode) whose phase is swept")
    p.add_argument("--phi-min", type=float, default=-180.0, help="degrees")
    p.add_argument("--phi-max", type=float, default=180.0, help="degrees")
    p.add_argument("--phi-points", type=int, default=73)
    _add_grid(p, points=101)
    p.add_argument("--out", help="output CSV (default stdout)")

    p = command("convert", cmd_convert, "impedance-matched frequency conversion through one mode")
    p.add_argument("--ports", default="1,2", help="the two cavities to convert between")
    p.add_argument("--mode", type=int, default=1, help="mechanical mode used")
    p.add_argument("--cooperativity", type=float, default=95.0)
    _add_grid(p, -20000.0, 20000.0)
    p.add_argument("--out", help="output CSV (default stdout)")

    p = command("noise", cmd_noise, "output noise spectra and added noise per path")
    p.add_argument("env", help="noise environment TOML file")
    _add_grid(p)
    p.add_argument("--out", help="output CSV (default stdout)")

    p = command("optimize", cmd_optimize, "search pumps for an isolation or circulation target")
    p.add_argument("target", help="target TOML file")
    p.add_argument("--out", help="directory for result.toml and history.csv")
    p.add_argument("--seed", type=int, default=0, help="multi-start RNG seed")
    p.add_argument("--workers", type=int, default=1, help="parallel starts")

    p = command("verify", cmd_verify, "run oracle, time-domain and invariant checks")
    p.add_argument("--mode", choices=["oracle", "timedomain", "invariants", "all"], default="all")
    p.add_argument("--seed", type=int, default=0, help="RNG seed for random oracle draws")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ConvergenceError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DomainError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MechcircError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
