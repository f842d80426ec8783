"""Time-domain integration of the mean-field Langevin equations.

Two systems are integrated under a weak coherent probe:

* the *direct* system, in which the off-resonant couplings appear with
  explicit ``exp(+-i delta_omega_m t)`` factors, and
* the *extended* system, in which those oscillating components are carried
  by auxiliary amplitudes ``A_i^+, A_i^-, B_1, B_2`` closed at first order.

Both are linear. Working in the frame that co-rotates with the probe, the
extended system is time invariant and the direct one is periodic with period
``2 pi / delta_omega_m``. A fixed-step fourth-order Runge-Kutta step is an
affine map ``y -> P y + q``, so long integrations are done by composing step
maps with repeated squaring. The steady state is read off after successive
doublings agree, and the direct system is demodulated by averaging over one
beat period.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .device import DeviceModel
from .effective import EffectiveModel, PumpConfiguration, build_effective
from .errors import ConvergenceError, DomainError
from .scattering import scattering_matrix

#: steps per unit of the fastest rate, as required by the step rule
DT_FACTOR = 0.1
#: induced photon number above which a probe is considered too strong
MAX_PROBE_PHOTONS = 1e3


@dataclass(frozen=True)
class ProbeDrive:
    """Coherent probe on one port.

    ``amplitude`` is the input field amplitude in sqrt(rad/s) and
    ``frequency`` the detuning (rad/s) from the cavity resonance.
    """

    port: int
    amplitude: float = 1.0
    frequency: float = 0.0

    def induced_photons(self, device: DeviceModel) -> float:
        c = device.cavities[self.port]
        return 4.0 * c.kappa_ext * abs(self.amplitude) ** 2 / c.kappa**2


@dataclass(frozen=True)
class MeanFieldState:
    """Demodulated steady-state amplitudes in the probe frame."""

    cavity_amps: np.ndarray
    mech_amps: np.ndarray
    aux_amps: Optional[np.ndarray]
    time: float


@dataclass(frozen=True)
class MeanFieldResult:
    """Steady state and inferred scattering column of one integration."""

    state: MeanFieldState
    s_column: np.ndarray
    residual: float
    dt: float
    probe: ProbeDrive


def _layout(n_cav: int, extended: bool) -> int:
    return n_cav + 2 + (2 * n_cav + 2 if extended else 0)


def _system(device: DeviceModel, eff: EffectiveModel, probe: ProbeDrive, extended: bool):
    """Matrices ``(A0, A_plus, A_minus, f)`` with
    ``dy/dt = (A0 + A_plus e^{i dw t} + A_minus e^{-i dw t}) y + f`` in the probe frame.
    """
    nc = device.n_cavities
    if device.n_mechanics != 2:
        raise DomainError("time-domain verifier needs two mechanical modes")
    G, F = eff.G, eff.F
    dw = eff.delta_omega_m
    kappa = device.kappa
    gamma = eff.gamma_m
    d0 = eff.delta0
    n = _layout(nc, extended)
    a = np.arange(nc)
    b = nc + np.arange(2)
    A0 = np.zeros((n, n), complex)
    Ap = np.zeros((n, n), complex)
    Am = np.zeros((n, n), complex)
    A0[a, a] = -kappa / 2.0
    A0[np.ix_(a, b)] = -1j * G
    A0[b, b] = 1j * d0 - gamma / 2.0
    A0[np.ix_(b, a)] = -1j * G.conj().T
    if extended:
        ap = nc + 2 + np.arange(nc)
        am = ap + nc
        B1, B2 = nc + 2 + 2 * nc, nc + 3 + 2 * nc
        bb = np.array([B1, B2])
        A0[np.ix_(a, bb)] += -1j * F
        A0[b[0], am] = -1j * F[:, 0].conj()
        A0[b[1], ap] = -1j * F[:, 1].conj()
        A0[ap, ap] = 1j * dw - kappa / 2.0
        A0[ap, b[1]] = -1j * F[:, 1]
        A0[ap, B1] = -1j * G[:, 0]
        A0[am, am] = -(1j * dw + kappa / 2.0)
        A0[am, b[0]] = -1j * F[:, 0]
        A0[am, B2] = -1j * G[:, 1]
        A0[B1, B1] = 1j * (dw + d0[0]) - gamma[0] / 2.0
        A0[B1, a] = -1j * F[:, 0].conj()
        A0[B1, ap] = -1j * G[:, 0].conj()
        A0[B2, B2] = -(1j * (dw - d0[1]) + gamma[1] / 2.0)
        A0[B2, a] = -1j * F[:, 1].conj()
        A0[B2, am] = -1j * G[:, 1].conj()
    else:
        Ap[a, b[0]] = -1j * F[:, 0]
        Am[a, b[1]] = -1j * F[:, 1]
        Am[b[0], a] = -1j * F[:, 0].conj()
        Ap[b[1], a] = -1j * F[:, 1].conj()
    A0 += 1j * probe.frequency * np.eye(n)
    f = np.zeros(n, complex)
    f[probe.port] = np.sqrt(device.kappa_ext[probe.port]) * probe.amplitude
    return A0, Ap, Am, f


def _rk4_map(Aug0, Aug_half, Aug1, h):
    """Step matrix of classical RK4 for the linear system ``z' = Aug(t) z``."""
    I = np.eye(Aug0.shape[0])
    k1 = Aug0
    k2 = Aug_half @ (I + 0.5 * h * k1)
    k3 = Aug_half @ (I + 0.5 * h * k2)
    k4 = Aug1 @ (I + h * k3)
    return I + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _augment(A, f):
    n = A.shape[0]
    out = np.zeros((n + 1, n + 1), complex)
    out[:n, :n] = A
    out[:n, n] = f
    return out


def max_step(device: DeviceModel, effective: EffectiveModel, probe_frequency: float = 0.0) -> float:
    """Largest step allowed by ``dt <= 0.1 / max(kappa, |delta_omega_m|, |delta|)``."""
    rates = [float(np.max(device.kappa)), abs(effective.delta_omega_m),
             float(np.max(np.abs(effective.delta_eff))), abs(probe_frequency)]
    return DT_FACTOR / max(rates)


def integrate_mean_field(device: DeviceModel, effective: EffectiveModel, probe: ProbeDrive,
                         t_end: float = 20.0, dt: Optional[float] = None, extended: bool = True,
                         tol: float = 1e-8, y0: Optional[np.ndarray] = None) -> MeanFieldResult:
    """Integrate to steady state and infer the scattering column of the probe port.

    Parameters
    ----------
    t_end : float
        Longest simulated time (s) before giving up.
    dt : float, optional
        Step (s); defaults to the largest step the step rule allows. For the
        direct system it is shortened so a beat period is a whole number of
        steps.
    extended : bool
        Integrate the auxiliary-mode system instead of the direct one.
    tol : float
        Relative change between successive doublings accepted as steady.
    y0 : array, optional
        Initial amplitudes (defaults to zero).

    Raises
    ------
    DomainError
        If ``dt`` violates the step rule.
    ConvergenceError
        If the amplitudes do not settle before ``t_end``.
    """
    limit = max_step(device, effective, probe.frequency)
    if dt is None:
        dt = limit
    elif dt > limit * (1 + 1e-12):
        raise DomainError(f"dt={dt:.3g} s exceeds the step rule limit {limit:.3g} s")
    if probe.induced_photons(device) > MAX_PROBE_PHOTONS:
        warnings.warn("probe drives more than 1e3 photons; linear response assumed",
                      RuntimeWarning, stacklevel=2)

    A0, Ap, Am, f = _system(device, effective, probe, extended)
    n = A0.shape[0]
    dw = effective.delta_omega_m
    periodic = (not extended) and (np.any(Ap) or np.any(Am)) and dw != 0

    if periodic:
        period = 2.0 * np.pi / abs(dw)
        n_steps = int(np.ceil(period / dt))
        dt = period / n_steps

        def aug(t):
            return _augment(A0 + Ap * np.exp(1j * dw * t) + Am * np.exp(-1j * dw * t), f)

        steps = [_rk4_map(aug(k * dt), aug((k + 0.5) * dt), aug((k + 1) * dt), dt)
                 for k in range(n_steps)]
        base = np.eye(n + 1, dtype=complex)
        for P in steps:
            base = P @ base
        base_time = period
    else:
        Aug = _augment(A0, f)
        base = _rk4_map(Aug, Aug, Aug, dt)
        steps = [base]
        base_time = dt

    z = np.zeros(n + 1, complex)
    if y0 is not None:
        z[:n] = y0
    z[n] = 1.0
    # advance by doubling: after k squarings the map spans base_time * 2^k
    Phi = base
    t = base_time
    z_prev = Phi @ z
    residual = np.inf
    while True:
        Phi = Phi @ Phi
        t *= 2.0
        z_new = Phi @ z
        scale = np.linalg.norm(z_new[:n])
        residual = np.linalg.norm(z_new[:n] - z_prev[:n]) / scale if scale > 0 else \
            np.linalg.norm(z_new[:n] - z_prev[:n])
        if residual < tol and t > 10 * base_time:
            # confirm stationarity over one more period of the base map
            z_next = base @ z_new
            step_res = np.linalg.norm(z_next[:n] - z_new[:n]) / max(scale, 1e-300)
            if step_res < tol or scale == 0:
                break
        if t > t_end:
            raise ConvergenceError(f"no steady state within t_end={t_end:g} s", residual=residual)
        z_prev = z_new

    if periodic:
        acc = np.zeros(n, complex)
        zz = z_new
        for P in steps:
            acc += zz[:n]
            zz = P @ zz
        y = acc / len(steps)
    else:
        y = z_new[:n]

    nc = device.n_cavities
    a = y[:nc]
    a_in = np.zeros(nc, complex)
    a_in[probe.port] = probe.amplitude
    s_col = (np.sqrt(device.kappa_ext) * a - a_in) / probe.amplitude
    state = MeanFieldState(a, y[nc:nc + 2], y[nc + 2:] if extended else None, t)
    return MeanFieldResult(state, s_col, float(residual), dt, probe)


@dataclass(frozen=True)
class AdiabaticReport:
    """Deviation between time-domain and effective frequency-domain scattering."""

    omega: np.ndarray
    deviation: np.ndarray
    time_domain: np.ndarray
    frequency_domain: np.ndarray

    @property
    def max(self) -> float:
        return float(np.max(self.deviation))

    @property
    def mean(self) -> float:
        return float(np.mean(self.deviation))


def compare_adiabatic(device: DeviceModel, pumps: PumpConfiguration, omega_list: Sequence[float],
                      probe_port: int = 0, extended: bool = True,
                      dt: Optional[float] = None, include_off_resonant: bool = True,
                      t_end: float = 20.0) -> AdiabaticReport:
    """Relative deviation of the probe-port scattering column per detuning.

    ``deviation = |s_td - s_fd| / |s_fd|`` using vector norms over all
    output ports, where ``s_fd`` comes from the effective model.
    """
    eff = build_effective(device, pumps, include_off_resonant)
    omega = np.asarray(omega_list, dtype=float)
    td, fd, dev = [], [], []
    for w in omega:
        res = integrate_mean_field(device, eff, ProbeDrive(probe_port, 1.0, w), t_end, dt, extended)
        ref = scattering_matrix(eff, device, w)[:, probe_port]
        td.append(res.s_column)
        fd.append(ref)
        dev.append(np.linalg.norm(res.s_column - ref) / np.linalg.norm(ref))
    return AdiabaticReport(omega, np.array(dev), np.array(td), np.array(fd))
