"""Frequency-domain input-output solution of the reduced Langevin equations.

The mechanical modes are eliminated through their susceptibilities, leaving an
``N x N`` drift matrix ``M`` for the cavity amplitudes. For a probe detuned by
``omega`` from the cavity resonances,

    a = (M - i omega)^-1 [sqrt(kappa_ext) a_in + sqrt(kappa_int) c_in
                          - i G chi sqrt(gamma) b_in]
    a_out = sqrt(kappa_ext) a - a_in

so the port scattering matrix is ``S = T (M - i omega)^-1 T - 1`` with
``T = diag(sqrt(kappa_ext))``. The same resolvent gives the transfer of
internal-loss and mechanical-bath fluctuations to each output port.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .device import DeviceModel
from .effective import EffectiveModel, PumpConfiguration, build_effective, off_resonant_rates
from .errors import DomainError, NumericalError

#: condition number above which a resolvent solve is rejected
MAX_CONDITION = 1e12


def mechanical_susceptibility(omega, delta_eff, gamma_eff):
    """``chi_j(omega) = 1 / (Gamma_j / 2 - i (omega + delta_j))``.

    Broadcasts ``omega`` against the mode arrays; the mode axis is last.
    """
    gamma_eff = np.asarray(gamma_eff, dtype=float)
    if np.any(gamma_eff <= 0):
        raise DomainError("mechanical damping must be positive")
    omega = np.asarray(omega, dtype=float)[..., None] if np.ndim(delta_eff) else omega
    return 1.0 / (0.5 * gamma_eff - 1j * (omega + np.asarray(delta_eff)))


@dataclass(frozen=True)
class DriftMatrix:
    """Cavity-sector drift matrix at probe detuning ``omega``."""

    entries: np.ndarray
    omega: float
    kappa: np.ndarray

    @property
    def rank_residual(self) -> float:
        """Relative size of singular values beyond the mechanical rank.

        ``M - diag(kappa / 2)`` is a sum of one rank-one term per mechanical
        mode; the returned ratio of the first excess singular value to the
        largest one should sit at round-off level.
        """
        return _rank_residual(self.entries - np.diag(self.kappa / 2.0), 2)


def _rank_residual(mat: np.ndarray, rank: int) -> float:
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv.size <= rank or sv[0] == 0:
        return 0.0
    return float(sv[rank] / sv[0])


def _drift_entries(effective: EffectiveModel, kappa, omega):
    """Drift matrices for an array of probe detunings, shape (n_omega, N, N)."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    chi = mechanical_susceptibility(omega, effective.delta_eff, effective.gamma_eff)
    G = effective.G
    M = np.einsum("kj,wj,lj->wkl", G, chi, G.conj())
    idx = np.arange(len(kappa))
    M[:, idx, idx] += np.asarray(kappa) / 2.0
    return M, chi


def assemble_drift_matrix(effective: EffectiveModel, device: DeviceModel, omega: float) -> DriftMatrix:
    """Drift matrix ``M_kl = kappa_k/2 delta_kl + sum_j chi_j G_kj conj(G_lj)``."""
    M, _ = _drift_entries(effective, device.kappa, omega)
    return DriftMatrix(M[0], float(omega), device.kappa)


@dataclass(frozen=True)
class ScatteringResult:
    """Scattering data on a grid of probe detunings.

    Attributes
    ----------
    omega_grid : (n,) array
        Probe detunings (rad/s).
    s_matrices : (n, N, N) complex array
        Port scattering matrices, ``s_matrices[w, i, j]`` maps input ``j`` to
        output ``i``.
    mech_transfer : (n, N, n_mech) complex array
        Amplitude transfer from the intrinsic mechanical baths to each output.
    loss_transfer : (n, N, N) complex array
        Transfer from the internal-loss channels of each cavity.
    mech_response : (n, N, n_mech) complex array
        Transfer per unit square-root rate of force noise on each mechanical
        mode; ``mech_transfer = mech_response * sqrt(gamma_m)``.
    cooling_rates : (N, n_mech) array
        Off-resonant damping contributed by each cavity to each mode (rad/s).
        Its fluctuations enter mode ``j`` with occupancy of cavity ``k``.
    mech_absorption : (n, N, n_mech) array
        Power ``Gamma_j |b_j|^2`` dissipated by mechanical mode ``j`` for unit
        power entering port ``k`` (axis 1).
    loss_absorption : (n, N) array
        Power dissipated in internal cavity losses for unit power entering
        port ``k``.
    rank_residual : (n,) array
        Drift-matrix rank residual at each grid point.
    condition : (n,) array
        Condition number of ``M - i omega`` at each grid point.
    """

    omega_grid: np.ndarray
    s_matrices: np.ndarray
    mech_transfer: np.ndarray
    loss_transfer: np.ndarray
    mech_response: np.ndarray
    cooling_rates: np.ndarray
    mech_absorption: np.ndarray
    loss_absorption: np.ndarray
    rank_residual: np.ndarray
    condition: np.ndarray

    def __len__(self):
        return self.omega_grid.size

    def s(self, i: int, j: int) -> np.ndarray:
        """``S_ij`` over the grid (zero-based port indices)."""
        return self.s_matrices[:, i, j]

    def power_db(self, i: int, j: int) -> np.ndarray:
        """``10 log10 |S_ij|^2`` over the grid."""
        return power_db(self.s_matrices[:, i, j])


def power_db(s):
    """Power ratio in dB, ``10 log10 |s|^2``; exact zeros map to -inf."""
    p = np.abs(np.asarray(s)) ** 2
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(p)


def solve_grid(effective: EffectiveModel, device: DeviceModel, omega) -> ScatteringResult:
    """Evaluate scattering and noise transfer on an arbitrary detuning grid."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    kappa = device.kappa
    n_cav = kappa.size
    if effective.G.shape[0] != n_cav:
        raise DomainError("effective model does not match the device")
    M, chi = _drift_entries(effective, kappa, omega)
    A = M - 1j * omega[:, None, None] * np.eye(n_cav)
    cond = np.linalg.cond(A)
    if not np.all(np.isfinite(cond)) or np.max(cond) > MAX_CONDITION:
        worst = float(np.nanmax(np.where(np.isfinite(cond), cond, np.inf)))
        raise NumericalError("drift resolvent is singular or ill-conditioned", condition_number=worst)

    sq_ext = np.sqrt(device.kappa_ext)
    sq_int = np.sqrt(device.kappa_int)
    # right-hand sides: external ports, internal losses, unit mechanical forces
    forces = -1j * effective.G[None, :, :] * chi[:, None, :]
    rhs = np.concatenate(
        [np.broadcast_to(np.diag(sq_ext), A.shape),
         np.broadcast_to(np.diag(sq_int), A.shape),
         forces],
        axis=2,
    )
    sol = np.linalg.solve(A, rhs)
    out = sq_ext[None, :, None] * sol
    S = out[:, :, :n_cav] - np.eye(n_cav)
    L = out[:, :, n_cav:2 * n_cav]
    response = out[:, :, 2 * n_cav:]
    mech_transfer = response * np.sqrt(effective.gamma_m)[None, None, :]

    if effective.delta_omega_m != 0:
        rates = off_resonant_rates(effective.F, kappa, effective.delta_omega_m)
    else:
        rates = np.zeros(effective.G.shape)
    # intracavity and mechanical amplitudes for unit drive at each port
    a = sol[:, :, :n_cav]
    b = -1j * chi[:, :, None] * np.einsum("ij,wik->wjk", effective.G.conj(), a)
    mech_abs = (effective.gamma_eff[None, :, None] * np.abs(b) ** 2).transpose(0, 2, 1)
    loss_abs = np.einsum("i,wik->wk", device.kappa_int, np.abs(a) ** 2)

    n_mech = effective.G.shape[1]
    rank = np.array([_rank_residual(m - np.diag(kappa / 2.0), n_mech) for m in M])
    return ScatteringResult(omega, S, mech_transfer, L, response, rates,
                            mech_abs, loss_abs, rank, cond)


def s_matrices(effective: EffectiveModel, device: DeviceModel, omega) -> np.ndarray:
    """Port scattering matrices on a grid without noise or diagnostic outputs.

    Lightweight variant of :func:`solve_grid` for inner optimization loops.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    n_cav = device.n_cavities
    M, _ = _drift_entries(effective, device.kappa, omega)
    A = M - 1j * omega[:, None, None] * np.eye(n_cav)
    sq_ext = np.sqrt(device.kappa_ext)
    try:
        sol = np.linalg.solve(A, np.broadcast_to(np.diag(sq_ext), A.shape))
    except np.linalg.LinAlgError:
        raise NumericalError("drift resolvent is singular") from None
    return sq_ext[None, :, None] * sol - np.eye(n_cav)


def scattering_matrix(effective: EffectiveModel, device: DeviceModel, omega: float) -> np.ndarray:
    """Port scattering matrix ``S(omega)``."""
    return solve_grid(effective, device, omega).s_matrices[0]


def spectrum_sweep(effective: EffectiveModel, device: DeviceModel,
                   omega_min: float, omega_max: float, n_points: int) -> ScatteringResult:
    """Scattering on a uniform grid of ``n_points`` detunings including both ends."""
    if n_points < 2:
        raise DomainError("n_points must be at least 2")
    if not omega_min < omega_max:
        raise DomainError("omega_min must be below omega_max")
    return solve_grid(effective, device, np.linspace(omega_min, omega_max, n_points))


def phase_sweep(device: DeviceModel, pumps: PumpConfiguration, phase_index, phi_grid,
                omega_grid, include_off_resonant: bool = True) -> np.ndarray:
    """S matrices on a (phi, omega) grid with ``phase[phase_index]`` swept.

    Returns
    -------
    ndarray, shape (len(phi_grid), len(omega_grid), N, N)
    """
    i, j = phase_index
    if not (0 <= i < device.n_cavities and 0 <= j < device.n_mechanics):
        raise DomainError(f"phase index {phase_index} out of range")
    omega_grid = np.asarray(omega_grid, dtype=float)
    out = []
    for phi in np.asarray(phi_grid, dtype=float):
        eff = build_effective(device, pumps.with_phase((i, j), phi), include_off_resonant)
        out.append(solve_grid(eff, device, omega_grid).s_matrices)
    return np.array(out)


def power_budget(result: ScatteringResult) -> np.ndarray:
    """Total noise weight reaching each output for unit input in every channel.

    For output ``i`` sums ``|S_ik|^2 + |L_ik|^2`` plus, per mechanical mode,
    the response weighted by the full damping ``Gamma_j`` (intrinsic bath and
    off-resonant channels). Complete bookkeeping gives exactly one.

    Returns
    -------
    ndarray, shape (n_omega, N)
    """
    resp2 = np.abs(result.mech_response) ** 2
    mech = (np.abs(result.mech_transfer) ** 2).sum(axis=2)
    cool = np.einsum("wij,kj->wi", resp2, result.cooling_rates)
    return (np.abs(result.s_matrices) ** 2).sum(axis=2) \
        + (np.abs(result.loss_transfer) ** 2).sum(axis=2) + mech + cool


def absorption_budget(result: ScatteringResult) -> np.ndarray:
    """Energy balance per input port: scattered plus dissipated power.

    Returns ``sum_i |S_ik|^2 + loss_k + sum_j mech_kj`` with shape
    (n_omega, N); energy conservation makes every entry one.
    """
    scattered = (np.abs(result.s_matrices) ** 2).sum(axis=1)
    return scattered + result.loss_absorption + result.mech_absorption.sum(axis=2)


def max_singular_value(result: ScatteringResult) -> np.ndarray:
    """Largest singular value of ``S`` at each grid point."""
    return np.linalg.svd(result.s_matrices, compute_uv=False)[:, 0]
