"""TOML device and pump description files.

Schema (all frequencies in Hz, angles in degrees)::

    [[cavity]]                      # one table per microwave resonator
    f_hz = 9.55e9
    kappa_int_hz = 0.62e6
    kappa_ext_hz = 1.8e6
    L_h = 48.2e-9                   # optional circuit data
    Cs_f = 5.3e-15
    Cm_f = 0.45e-15
    [cavity.tuning]                 # optional, all-or-none across cavities
    alpha1_hz_per_v2 = 0.53e6
    alpha2_hz_per_v4 = 0.05e6
    sign = 1
    v_max_v = 4.4454

    [[mechanics]]
    f_hz = 4.34e6
    gamma_hz = 4.0
    m_eff_kg = 4e-15                # optional
    x_zpf_m = 22e-15                # optional

    [coupling]
    g0_hz = [[33, 34], [13, 31], [22, 45]]

    [pumps]                         # optional
    photons = [[...], [...], [...]]
    phase_deg = [[...], [...], [...]]
    detuning_hz = [0.0, 0.0]
    include_off_resonant = true     # optional, default true

Unknown keys anywhere are rejected with a :class:`ConfigError` naming the
offending field.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np
import tomli

from .device import CavityMode, DeviceModel, MechanicalMode, TuningCurve
from .effective import PumpConfiguration
from .errors import ConfigError, MechcircError

TWO_PI = 2.0 * np.pi

_CAVITY_KEYS = {"f_hz", "kappa_int_hz", "kappa_ext_hz", "L_h", "Cs_f", "Cm_f", "tuning"}
_CAVITY_REQUIRED = {"f_hz", "kappa_int_hz", "kappa_ext_hz"}
_TUNING_KEYS = {"alpha1_hz_per_v2", "alpha2_hz_per_v4", "sign", "v_max_v"}
_MECH_KEYS = {"f_hz", "gamma_hz", "m_eff_kg", "x_zpf_m"}
_MECH_REQUIRED = {"f_hz", "gamma_hz"}
_PUMP_KEYS = {"photons", "phase_deg", "detuning_hz", "include_off_resonant"}
_TOP_KEYS = {"cavity", "mechanics", "coupling", "pumps", "meta"}


@dataclass(frozen=True)
class Config:
    """Parsed configuration: device, optional pumps and the raw table."""

    device: DeviceModel
    pumps: Optional[PumpConfiguration]
    include_off_resonant: bool
    raw: dict
    source: Optional[str] = None
    overrides: tuple = field(default=())


def _check_keys(table: dict, allowed: set, required: set, path: str, source) -> None:
    if not isinstance(table, dict):
        raise ConfigError("expected a table", field=path, source=source)
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}'", field=f"{path}.{key}" if path else key,
                              source=source)
    for key in required:
        if key not in table:
            raise ConfigError(f"missing required key '{key}'",
                              field=f"{path}.{key}" if path else key, source=source)


def _number(value: Any, path: str, source) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", field=path, source=source)
    return float(value)


def _matrix(value: Any, shape: tuple, path: str, source) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError("expected a numeric matrix", field=path, source=source) from None
    if arr.shape != shape:
        raise ConfigError(f"expected shape {shape}, got {arr.shape}", field=path, source=source)
    return arr


def _parse_value(text: str) -> Any:
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        # bare words are taken as strings
        return text


def apply_overrides(raw: dict, overrides: Iterable[str]) -> dict:
    """Apply ``dotted.path=value`` overrides to a raw config table.

    Integer path components index into arrays of tables or lists, e.g.
    ``cavity.0.kappa_ext_hz=2e6`` or ``pumps.photons.1.0=1e5``.
    """
    out = copy.deepcopy(raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not of the form key=value")
        key, text = item.split("=", 1)
        parts = key.strip().split(".")
        node = out
        for depth, part in enumerate(parts[:-1]):
            nxt = parts[depth + 1]
            if isinstance(node, list):
                try:
                    node = node[int(part)]
                except (ValueError, IndexError):
                    raise ConfigError("bad list index in override", field=key) from None
            else:
                if part not in node:
                    node[part] = [] if nxt.isdigit() else {}
                node = node[part]
        last = parts[-1]
        value = _parse_value(text.strip())
        if isinstance(node, list):
            try:
                node[int(last)] = value
            except (ValueError, IndexError):
                raise ConfigError("bad list index in override", field=key) from None
        else:
            node[last] = value
    return out


def parse_config(raw: dict, source: Optional[str] = None, overrides: tuple = ()) -> Config:
    """Validate a raw TOML table and build the device and pump objects."""
    for key in raw:
        if key not in _TOP_KEYS:
            raise ConfigError(f"unknown section '{key}'", field=key, source=source)
    for key in ("cavity", "mechanics", "coupling"):
        if key not in raw:
            raise ConfigError(f"missing section '{key}'", field=key, source=source)

    cavities, tunings = [], []
    for k, tab in enumerate(raw["cavity"]):
        path = f"cavity.{k}"
        _check_keys(tab, _CAVITY_KEYS, _CAVITY_REQUIRED, path, source)
        vals = {name: _number(tab[name], f"{path}.{name}", source)
                for name in _CAVITY_KEYS - {"tuning"} if name in tab}
        try:
            cavities.append(CavityMode(
                index=k + 1,
                omega=TWO_PI * vals["f_hz"],
                kappa_int=TWO_PI * vals["kappa_int_hz"],
                kappa_ext=TWO_PI * vals["kappa_ext_hz"],
                inductance=vals.get("L_h"),
                stray_capacitance=vals.get("Cs_f"),
                motional_capacitance=vals.get("Cm_f"),
            ))
        except MechcircError as exc:
            raise ConfigError(str(exc), field=path, source=source) from None
        if "tuning" in tab:
            tt = tab["tuning"]
            tpath = f"{path}.tuning"
            _check_keys(tt, _TUNING_KEYS, {"alpha1_hz_per_v2", "alpha2_hz_per_v4"}, tpath, source)
            sign = int(tt.get("sign", 1))
            if sign not in (1, -1):
                raise ConfigError("sign must be +1 or -1", field=f"{tpath}.sign", source=source)
            tunings.append(TuningCurve(
                alpha1=TWO_PI * _number(tt["alpha1_hz_per_v2"], f"{tpath}.alpha1_hz_per_v2", source),
                alpha2=TWO_PI * _number(tt["alpha2_hz_per_v4"], f"{tpath}.alpha2_hz_per_v4", source),
                sign=sign,
                v_max=_number(tt["v_max_v"], f"{tpath}.v_max_v", source) if "v_max_v" in tt else None,
            ))
    if tunings and len(tunings) != len(cavities):
        raise ConfigError("tuning must be given for every cavity or none", field="cavity",
                          source=source)

    mechanics = []
    for k, tab in enumerate(raw["mechanics"]):
        path = f"mechanics.{k}"
        _check_keys(tab, _MECH_KEYS, _MECH_REQUIRED, path, source)
        vals = {name: _number(tab[name], f"{path}.{name}", source) for name in tab}
        try:
            mechanics.append(MechanicalMode(
                index=k + 1,
                omega_m=TWO_PI * vals["f_hz"],
                gamma_m=TWO_PI * vals["gamma_hz"],
                m_eff=vals.get("m_eff_kg"),
                x_zpf=vals.get("x_zpf_m"),
            ))
        except MechcircError as exc:
            raise ConfigError(str(exc), field=path, source=source) from None

    shape = (len(cavities), len(mechanics))
    _check_keys(raw["coupling"], {"g0_hz"}, {"g0_hz"}, "coupling", source)
    g0 = TWO_PI * _matrix(raw["coupling"]["g0_hz"], shape, "coupling.g0_hz", source)
    try:
        device = DeviceModel(cavities, mechanics, g0, tuple(tunings))
    except MechcircError as exc:
        raise ConfigError(str(exc), source=source) from None

    pumps = None
    include_off = True
    if "pumps" in raw:
        tab = raw["pumps"]
        _check_keys(tab, _PUMP_KEYS, {"photons"}, "pumps", source)
        n = _matrix(tab["photons"], shape, "pumps.photons", source)
        phi = np.deg2rad(_matrix(tab.get("phase_deg", np.zeros(shape).tolist()), shape,
                                 "pumps.phase_deg", source))
        d0 = TWO_PI * _matrix(tab.get("detuning_hz", [0.0] * shape[1]), (shape[1],),
                              "pumps.detuning_hz", source)
        include_off = tab.get("include_off_resonant", True)
        if not isinstance(include_off, bool):
            raise ConfigError("expected true or false", field="pumps.include_off_resonant",
                              source=source)
        try:
            pumps = PumpConfiguration(n, phi, d0)
        except MechcircError as exc:
            raise ConfigError(str(exc), field="pumps", source=source) from None

    return Config(device, pumps, include_off, raw, source, tuple(overrides))


def load_config(path, overrides: Iterable[str] = ()) -> Config:
    """Read and validate a TOML configuration file.

    Syntax errors are re-raised as :class:`ConfigError` carrying the line and
    column reported by the TOML parser.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read file: {exc.strerror}", source=str(path)) from None
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(str(exc), source=str(path)) from None
    overrides = tuple(overrides)
    if overrides:
        raw = apply_overrides(raw, overrides)
    return parse_config(raw, source=str(path), overrides=overrides)


def load_toml(path) -> dict:
    """Read a TOML file, mapping syntax errors to :class:`ConfigError`."""
    path = Path(path)
    try:
        return tomli.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read file: {exc.strerror}", source=str(path)) from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(str(exc), source=str(path)) from None


def data_path(name: str) -> Path:
    """Path of a bundled data file (device fixtures, targets, environments)."""
    return Path(__file__).resolve().parent / "data" / name
