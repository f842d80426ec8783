"""Thermal noise propagation, amplifier chains and added-noise quanta.

Input fluctuations are white with normally ordered occupancies: each port and
internal-loss channel of cavity ``i`` carries ``N_i`` photons and the intrinsic
bath of mechanical mode ``j`` carries ``N_m,j`` phonons. The off-resonant
damping channel that cavity ``k`` opens on mode ``j`` feeds in cavity ``k``'s
occupancy. The output occupancy at port ``i`` is therefore

    n_out,i = sum_k (|S_ik|^2 + |L_ik|^2) N_k + sum_j |T_ij|^2 N_m,j
              + sum_{k,j} |R_ij|^2 r_kj N_k

and an amplifier chain with gain ``g`` dB and ``n_amp`` added quanta records
the single-sided spectral density ``hbar omega 10^(g/10) (1 + n_amp + n_out)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import constants
from scipy.optimize import linprog, nnls

from .device import DeviceModel
from .effective import PumpConfiguration, build_effective
from .errors import CalibrationError, ConfigError, DomainError, ReferredNoiseOverflowError
from .scattering import ScatteringResult, solve_grid

HBAR = constants.hbar
K_B = constants.k
#: |S_ij| below which input referral is refused
MIN_REFERRAL_GAIN = 1e-6
#: tolerance on negative inferred amplifier noise before it is an error
AMP_NOISE_TOLERANCE = 0.5


def bose_occupancy(omega, temperature):
    """Thermal occupancy ``1 / (exp(hbar omega / k_B T) - 1)``; zero at ``T = 0``."""
    omega = np.asarray(omega, dtype=float)
    temperature = np.asarray(temperature, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("frequency must be positive")
    if np.any(temperature < 0):
        raise DomainError("temperature must be non-negative")
    with np.errstate(divide="ignore", over="ignore"):
        x = HBAR * omega / (K_B * temperature)
        out = np.where(temperature > 0, 1.0 / np.expm1(x), 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ThermalEnvironment:
    """Bath occupancies of every cavity and mechanical mode."""

    cavity_occupancy: np.ndarray
    mech_occupancy: np.ndarray

    def __post_init__(self):
        nc = np.array(self.cavity_occupancy, dtype=float)
        nm = np.array(self.mech_occupancy, dtype=float)
        if np.any(nc < 0) or np.any(nm < 0):
            raise DomainError("occupancies must be non-negative")
        object.__setattr__(self, "cavity_occupancy", nc)
        object.__setattr__(self, "mech_occupancy", nm)

    @classmethod
    def from_temperatures(cls, device: DeviceModel, cavity_temps, mech_temps):
        """Occupancies from bath temperatures (K) at the mode frequencies."""
        nc = bose_occupancy(device.omega_c, np.broadcast_to(cavity_temps, device.omega_c.shape))
        nm = bose_occupancy(device.omega_m, np.broadcast_to(mech_temps, device.omega_m.shape))
        return cls(np.atleast_1d(nc), np.atleast_1d(nm))

    @classmethod
    def zero(cls, n_cavities: int = 3, n_mechanics: int = 2):
        return cls(np.zeros(n_cavities), np.zeros(n_mechanics))

    def vector(self) -> np.ndarray:
        """Stacked occupancies ``(N_1..N_n, N_m1..N_mk)``."""
        return np.concatenate([self.cavity_occupancy, self.mech_occupancy])


@dataclass(frozen=True)
class AmplifierChain:
    """Per-port amplifier gain (dB) and added noise quanta."""

    gain_db: np.ndarray
    added_quanta: np.ndarray

    def __post_init__(self):
        g = np.array(self.gain_db, dtype=float)
        n = np.array(self.added_quanta, dtype=float)
        if g.shape != n.shape:
            raise DomainError("gain and added-noise arrays must match")
        if np.any(n < 0):
            raise DomainError("amplifier added quanta must be non-negative")
        object.__setattr__(self, "gain_db", g)
        object.__setattr__(self, "added_quanta", n)

    @property
    def linear_gain(self) -> np.ndarray:
        return 10.0 ** (self.gain_db / 10.0)


def noise_weights(result: ScatteringResult, port: int) -> np.ndarray:
    """Coefficients of each bath occupancy in the output occupancy of ``port``.

    Returns
    -------
    ndarray, shape (n_omega, n_cav + n_mech)
        Column ``k < n_cav`` multiplies cavity occupancy ``N_k`` and collects
        the port, internal-loss and off-resonant channels; the remaining
        columns multiply the mechanical occupancies.
    """
    s2 = np.abs(result.s_matrices[:, port, :]) ** 2
    l2 = np.abs(result.loss_transfer[:, port, :]) ** 2
    resp2 = np.abs(result.mech_response[:, port, :]) ** 2
    cooling = resp2 @ result.cooling_rates.T
    mech = np.abs(result.mech_transfer[:, port, :]) ** 2
    return np.concatenate([s2 + l2 + cooling, mech], axis=1)


def output_occupancy(result: ScatteringResult, env: ThermalEnvironment, port: int) -> np.ndarray:
    """Normally ordered output occupancy ``n_out`` at ``port`` over the grid."""
    w = noise_weights(result, port)
    occ = env.vector()
    if w.shape[1] != occ.size:
        raise DomainError("environment does not match the scattering result dimensions")
    return w @ occ


def output_noise_psd(result: ScatteringResult, env: ThermalEnvironment,
                     chain: AmplifierChain, port: int, carrier_omega: float) -> np.ndarray:
    """Single-sided PSD (W/Hz) recorded after the amplifier chain of ``port``.

    ``carrier_omega`` is the absolute angular frequency of the cavity output
    (the rotating-frame detunings on the grid are added to it).
    """
    n_out = output_occupancy(result, env, port)
    omega_abs = carrier_omega + result.omega_grid
    return HBAR * omega_abs * chain.linear_gain[port] * (1.0 + chain.added_quanta[port] + n_out)


def infer_amp_noise(measured_psd, omega, gain_db):
    """Amplifier added quanta from a pumps-off PSD: ``S / (hbar omega 10^(g/10)) - 1``.

    Raises
    ------
    CalibrationError
        If the result is negative beyond :data:`AMP_NOISE_TOLERANCE`.
    """
    n = np.asarray(measured_psd, dtype=float) / (HBAR * np.asarray(omega) * 10.0 ** (np.asarray(gain_db) / 10.0)) - 1.0
    if np.any(n < -AMP_NOISE_TOLERANCE):
        raise CalibrationError("inferred amplifier noise is negative; check gain calibration")
    return n if np.ndim(n) else float(n)


def added_noise_per_path(result: ScatteringResult, env: ThermalEnvironment, path) -> np.ndarray:
    """Input-referred added quanta on the path from port ``j`` to port ``i``.

    ``path = (i, j)`` with zero-based ports. The signal-port thermal term
    ``|S_ij|^2 N_j`` is excluded since it is input noise, not added noise.

    Raises
    ------
    ReferredNoiseOverflowError
        If ``|S_ij|`` drops below :data:`MIN_REFERRAL_GAIN` on the grid.
    """
    i, j = path
    s2 = np.abs(result.s_matrices[:, i, j]) ** 2
    if np.any(np.sqrt(s2) < MIN_REFERRAL_GAIN):
        raise ReferredNoiseOverflowError(f"|S_{i + 1}{j + 1}| too small to refer noise to input")
    return (output_occupancy(result, env, i) - s2 * env.cavity_occupancy[j]) / s2


def added_noise_weights(result: ScatteringResult, path) -> np.ndarray:
    """Occupancy coefficients of :func:`added_noise_per_path`, shape (n_omega, n_baths)."""
    i, j = path
    s2 = np.abs(result.s_matrices[:, i, j]) ** 2
    if np.any(np.sqrt(s2) < MIN_REFERRAL_GAIN):
        raise ReferredNoiseOverflowError(f"|S_{i + 1}{j + 1}| too small to refer noise to input")
    w = noise_weights(result, i)
    w[:, j] -= s2
    return w / s2[:, None]


def referred_noise_weights(device: DeviceModel, pumps: PumpConfiguration, paths,
                           reversed_paths=(), omega: float = 0.0,
                           include_off_resonant: bool = True) -> np.ndarray:
    """Added-noise weight rows for several paths at one probe detuning.

    ``paths`` are evaluated with ``pumps``; ``reversed_paths`` with the
    phase-negated pumps, i.e. the device operated in the opposite
    circulation sense, where those paths transmit.

    Returns
    -------
    ndarray, shape (len(paths) + len(reversed_paths), n_cav + n_mech)
    """
    rows = []
    for config, group in ((pumps, paths), (pumps.negated_phases(), reversed_paths)):
        if not group:
            continue
        res = solve_grid(build_effective(device, config, include_off_resonant), device, [omega])
        rows += [added_noise_weights(res, p)[0] for p in group]
    return np.array(rows)


@dataclass(frozen=True)
class OccupancyFit:
    """Result of :func:`fit_occupancies`."""

    env: ThermalEnvironment
    predicted: np.ndarray
    targets: np.ndarray
    relative_error: np.ndarray


def fit_occupancies(weights: np.ndarray, targets: Sequence[float], n_cavities: int,
                    fit_cavities: bool = True,
                    cavity_occupancy: Optional[Sequence[float]] = None,
                    method: str = "lsq") -> OccupancyFit:
    """Non-negative fit of bath occupancies to added-noise targets.

    Parameters
    ----------
    weights : (n_paths, n_baths) array
        Rows of :func:`added_noise_weights` evaluated at the fit frequency.
    targets : (n_paths,) array
        Added-noise values to reproduce; residuals are relative.
    n_cavities : int
        Number of leading cavity columns in ``weights``.
    fit_cavities : bool
        If false, cavity occupancies are held at ``cavity_occupancy``
        (default zero) and only mechanical occupancies are fitted.
    method : {"lsq", "minimax"}
        ``lsq`` minimizes the sum of squared relative residuals (NNLS);
        ``minimax`` minimizes the largest relative residual (linear program).
    """
    A = np.asarray(weights, dtype=float)
    y = np.asarray(targets, dtype=float)
    if np.any(y <= 0):
        raise DomainError("targets must be positive")
    fixed = np.zeros(n_cavities) if cavity_occupancy is None else np.asarray(cavity_occupancy, float)
    if fit_cavities:
        cols = np.arange(A.shape[1])
        rhs = y
    else:
        cols = np.arange(n_cavities, A.shape[1])
        rhs = y - A[:, :n_cavities] @ fixed
    # relative residuals: divide each row by its target
    Ar = A[:, cols] / y[:, None]
    br = rhs / y
    if method == "lsq":
        sol, _ = nnls(Ar, br)
    elif method == "minimax":
        m, k = Ar.shape
        ones = np.ones((m, 1))
        res = linprog(np.r_[np.zeros(k), 1.0],
                      A_ub=np.block([[Ar, -ones], [-Ar, -ones]]), b_ub=np.r_[br, -br],
                      bounds=[(0, None)] * (k + 1), method="highs")
        if not res.success:
            raise CalibrationError(f"occupancy fit failed: {res.message}")
        sol = res.x[:k]
    else:
        raise DomainError(f"unknown fit method '{method}'")
    x = np.concatenate([fixed, sol]) if not fit_cavities else sol
    pred = A @ x
    env = ThermalEnvironment(x[:n_cavities], x[n_cavities:])
    return OccupancyFit(env, pred, y, pred / y - 1.0)


PSD_HEADER = ("freq_hz", "psd_w_per_hz")


def read_psd_csv(path):
    """Read a measured PSD trace with columns ``freq_hz,psd_w_per_hz``.

    Lines starting with ``#`` are ignored. The header must match exactly.

    Returns
    -------
    freq_hz, psd : ndarray
    """
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(line for line in fh if not line.lstrip().startswith("#"))
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError("empty PSD file", source=str(path)) from None
        if tuple(h.strip() for h in header) != PSD_HEADER:
            raise ConfigError(f"expected header {','.join(PSD_HEADER)}, got {','.join(header)}",
                              source=str(path))
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise ConfigError(f"line {lineno}: expected 2 columns", source=str(path))
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                raise ConfigError(f"line {lineno}: non-numeric value", source=str(path)) from None
    if not rows:
        raise ConfigError("PSD file has no data rows", source=str(path))
    data = np.array(rows)
    if np.any(data[:, 1] < 0):
        raise ConfigError("PSD values must be non-negative", source=str(path))
    return data[:, 0], data[:, 1]
