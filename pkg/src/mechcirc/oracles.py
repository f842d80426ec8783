"""Closed-form two-port and conversion formulas.

These serve as a user-facing API and as independent checks on the numerical
scattering engine. Conventions follow :mod:`mechcirc.effective`: mechanical
mode ``j`` has detuning ``delta_j`` and damping ``Gamma_j`` and the normalized
inverse susceptibility is

    Sigma_j(omega) = 1 - 2 i (omega + delta_j) / Gamma_j.

A *common* detuning ``delta`` means ``(delta_1, delta_2) = (delta, -delta)``.
The loop phase ``phi`` is carried by drive (2, 2) with the other three drive
phases at zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError

#: cooperativity above which the impedance-matched form of the ratio is trusted
HIGH_COOPERATIVITY = 10.0


@dataclass(frozen=True)
class TwoPortWorkingPoint:
    """Parameters of a two-cavity, two-mode converter.

    Parameters
    ----------
    cooperativities : (2, 2) array
        ``C[i, j]`` for cavity ``i`` and mode ``j``, defined with the damping
        rates in ``gammas``.
    phi : float
        Loop phase (rad).
    delta : float
        Common detuning (rad/s); ignored when ``deltas`` is given.
    gammas : (2,) array
        Mechanical damping rates (rad/s).
    etas : (2,) array
        Cavity coupling efficiencies.
    deltas : (2,) array, optional
        Individual mode detunings (rad/s).
    """

    cooperativities: np.ndarray
    phi: float
    delta: float
    gammas: np.ndarray
    etas: np.ndarray = field(default_factory=lambda: np.ones(2))
    deltas: Optional[np.ndarray] = None

    def __post_init__(self):
        C = np.array(self.cooperativities, dtype=float)
        if C.shape != (2, 2) or np.any(C < 0):
            raise DomainError("cooperativities must be a non-negative 2x2 array")
        g = np.array(self.gammas, dtype=float)
        if g.shape != (2,) or np.any(g <= 0):
            raise DomainError("gammas must be two positive rates")
        object.__setattr__(self, "cooperativities", C)
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "etas", np.array(self.etas, dtype=float))
        if self.deltas is not None:
            object.__setattr__(self, "deltas", np.array(self.deltas, dtype=float))

    @property
    def mode_detunings(self) -> np.ndarray:
        if self.deltas is not None:
            return self.deltas
        return np.array([self.delta, -self.delta])

    @property
    def high_cooperativity(self) -> bool:
        """Whether all four cooperativities exceed :data:`HIGH_COOPERATIVITY`."""
        return bool(np.all(self.cooperativities >= HIGH_COOPERATIVITY))

    def sigma(self, omega):
        """``Sigma_j(omega)``; returns shape ``omega.shape + (2,)``."""
        omega = np.asarray(omega, dtype=float)[..., None]
        return 1.0 - 2j * (omega + self.mode_detunings) / self.gammas

    def with_phase(self, phi: float) -> "TwoPortWorkingPoint":
        from dataclasses import replace

        return replace(self, phi=phi)


def equal_working_point(C, delta, gamma, phi=0.0, etas=(1.0, 1.0), gamma2=None):
    """Working point with all four cooperativities equal to ``C``."""
    g2 = gamma if gamma2 is None else gamma2
    return TwoPortWorkingPoint(np.full((2, 2), float(C)), phi, delta, np.array([gamma, g2]),
                               np.asarray(etas, dtype=float))


def _arms(wp: TwoPortWorkingPoint, omega):
    s = wp.sigma(omega)
    C = wp.cooperativities
    via_mode1 = np.sqrt(C[0, 0] * C[1, 0]) * s[..., 1]
    via_mode2 = np.sqrt(C[0, 1] * C[1, 1]) * s[..., 0]
    return via_mode1, via_mode2


def lambda_ratio(wp: TwoPortWorkingPoint, omega=0.0):
    """Backward-to-forward transmission ratio ``S12 / S21``.

    Raises
    ------
    DomainError
        If the forward amplitude vanishes exactly.
    """
    a, b = _arms(wp, omega)
    num = a + b * np.exp(1j * wp.phi)
    den = a + b * np.exp(-1j * wp.phi)
    if np.any(den == 0):
        raise DomainError("forward transmission vanishes; ratio is singular")
    return num / den


def optimal_phase(delta: float, gamma1: float, gamma2: float, omega: float = 0.0) -> float:
    """Loop phase giving perfect isolation at equal cooperativities.

    Solves ``tan(phi) = [delta (g1 + g2) + omega (g2 - g1)] /
    [g1 g2 / 2 - 2 (delta^2 - omega^2)]`` and picks, of the two solutions
    ``phi`` and ``phi + pi``, the one for which :func:`lambda_ratio` vanishes.

    Raises
    ------
    DomainError
        If no isolating phase exists (the two arms are in phase or
        antiphase, e.g. ``delta = omega = 0``).
    """
    num = delta * (gamma1 + gamma2) + omega * (gamma2 - gamma1)
    den = gamma1 * gamma2 / 2.0 - 2.0 * (delta**2 - omega**2)
    if num == 0:
        raise DomainError("no isolating phase exists for these parameters")
    wp = equal_working_point(1.0, delta, gamma1, gamma2=gamma2)
    candidates = [np.arctan2(num, den), np.arctan2(-num, -den)]
    ratios = [abs(lambda_ratio(wp.with_phase(p), omega)) for p in candidates]
    return float(candidates[int(np.argmin(ratios))])


def isolation_phase(wp: TwoPortWorkingPoint, omega: float = 0.0) -> float:
    """Exact loop phase cancelling ``S12`` for arbitrary mode detunings.

    Equals ``pi + arg Sigma_2 - arg Sigma_1`` wrapped to ``(-pi, pi]``; with
    equal cooperativity products and ``deltas = (delta, -delta)`` it agrees
    with :func:`optimal_phase`. Exact cancellation additionally requires the
    two arms to have equal magnitude, ``C11 C21 |Sigma_2|^2 = C12 C22 |Sigma_1|^2``
    (see :func:`balanced_cooperativity`); otherwise this is the phase of
    deepest suppression.

    Raises
    ------
    DomainError
        If ``Sigma_2 / Sigma_1`` is real so no isolating phase exists.
    """
    s = wp.sigma(omega)
    ratio = s[1] / s[0]
    if ratio.imag == 0:
        raise DomainError("no isolating phase exists for these parameters")
    phi = np.pi + np.angle(s[1]) - np.angle(s[0])
    return float(np.angle(np.exp(1j * phi)))


def isolation_phase_tan(deltas, gammas, omega: float = 0.0) -> float:
    """``tan(phi)`` of the exact isolating phase for individual mode detunings.

    ``[(omega + d1) g2 - (omega + d2) g1] / [g1 g2 / 2 + 2 (omega + d1)(omega + d2)]``,
    which reduces to the common-detuning form when ``(d1, d2) = (delta, -delta)``.
    """
    d1, d2 = deltas
    g1, g2 = gammas
    num = (omega + d1) * g2 - (omega + d2) * g1
    den = g1 * g2 / 2.0 + 2.0 * (omega + d1) * (omega + d2)
    return float(num / den)


def forward_transmission(C: float, delta: float, gamma: float, eta1: float, eta2: float):
    """On-resonance forward amplitude at the isolating phase.

    Equal cooperativities ``C`` and equal damping ``gamma`` are assumed.

    Returns
    -------
    s21 : complex
    power : float
        ``|s21|^2``.
    """
    if not (C > 0 and gamma > 0):
        raise DomainError("C and gamma must be positive")
    x = 2.0 * delta / gamma
    s21 = -np.sqrt(eta1 * eta2) * 4j * delta * (1 - 1j * x) / (
        C * gamma * (1 + (1 + x * x) / (2.0 * C)) ** 2)
    return complex(s21), float(abs(s21) ** 2)


def balanced_cooperativity(wp: TwoPortWorkingPoint, omega: float = 0.0) -> float:
    """Value of ``C22`` that equalizes the two arm magnitudes at ``omega``."""
    s = wp.sigma(omega)
    C = wp.cooperativities
    if C[0, 1] == 0:
        raise DomainError("C12 must be nonzero")
    return float(C[0, 0] * C[1, 0] * abs(s[1]) ** 2 / (abs(s[0]) ** 2 * C[0, 1]))


def forward_transmission_general(wp: TwoPortWorkingPoint) -> complex:
    """On-resonance forward amplitude at a phase where ``S12(0)`` vanishes.

    Valid for arbitrary cooperativities and mode detunings provided ``wp.phi``
    cancels the backward path exactly (balanced arms and
    :func:`isolation_phase`).
    """
    s1, s2 = wp.sigma(0.0)
    C = wp.cooperativities
    eta1, eta2 = wp.etas
    arm = np.sqrt(C[0, 0] * C[1, 0]) * s2 + np.sqrt(C[0, 1] * C[1, 1]) * s1 * np.exp(-1j * wp.phi)
    p1 = C[0, 0] * s2 + C[0, 1] * s1 + s1 * s2
    p2 = C[1, 0] * s2 + C[1, 1] * s1 + s1 * s2
    return complex(-2.0 * np.sqrt(eta1 * eta2) * s1 * s2 * arm / (p1 * p2))


def peak_cooperativity(delta: float, gamma: float) -> float:
    """Cooperativity maximizing forward transmission: ``2C = 1 + 4 delta^2 / gamma^2``."""
    return 0.5 * (1.0 + 4.0 * delta**2 / gamma**2)


def peak_transmission(C: float, eta1: float, eta2: float) -> float:
    """Forward power ``eta1 eta2 (1 - 1 / 2C)`` at the optimum detuning."""
    return eta1 * eta2 * (1.0 - 1.0 / (2.0 * C))


def detuning_for_peak(C: float, gamma: float) -> float:
    """Common detuning satisfying the peak condition for cooperativity ``C``."""
    if C < 0.5:
        raise DomainError("peak condition requires C >= 1/2")
    return 0.5 * gamma * np.sqrt(2.0 * C - 1.0)


def cooperativity_for_insertion_loss(loss_db: float, eta1: float, eta2: float) -> float:
    """Invert :func:`peak_transmission` for a target insertion loss (dB)."""
    t = 10.0 ** (-loss_db / 10.0)
    frac = t / (eta1 * eta2)
    if not 0 < frac < 1:
        raise DomainError("insertion loss unreachable with these coupling efficiencies")
    return 1.0 / (2.0 * (1.0 - frac))


def conversion_efficiency(C1, C2, eta1, eta2):
    """Bidirectional conversion ``|T|^2 = 4 eta1 eta2 C1 C2 / (1 + C1 + C2)^2``."""
    C1 = np.asarray(C1, dtype=float)
    C2 = np.asarray(C2, dtype=float)
    if np.any(C1 < 0) or np.any(C2 < 0):
        raise DomainError("cooperativities must be non-negative")
    return 4.0 * eta1 * eta2 * C1 * C2 / (1.0 + C1 + C2) ** 2


def reflection_coefficients(C1, C2, eta1, eta2):
    """On-resonance reflected powers ``(|S11|^2, |S22|^2)`` of the converter."""
    s = 1.0 + np.asarray(C1, dtype=float) + np.asarray(C2, dtype=float)
    r1 = ((s - 2.0 * eta1 * (1.0 + C2)) / s) ** 2
    r2 = ((s - 2.0 * eta2 * (1.0 + C1)) / s) ** 2
    return r1, r2


def cooling_rate(G, kappa):
    """Optomechanical damping ``4 |G|^2 / kappa`` contributed by one cavity."""
    return 4.0 * np.abs(G) ** 2 / kappa


def conversion_bandwidth(gamma_m: float, cooling1: float, cooling2: float) -> float:
    """Conversion linewidth ``gamma_m + Gamma_1 + Gamma_2``."""
    if min(gamma_m, cooling1, cooling2) < 0:
        raise DomainError("rates must be non-negative")
    return gamma_m + cooling1 + cooling2
