"""Static physical description of a multi-cavity electromechanical device.

All rates and frequencies are angular (rad/s). Conversion from the Hz-based
configuration format happens in :mod:`mechcirc.config`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, FitError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class CavityMode:
    """A single microwave resonator.

    Parameters
    ----------
    index : int
        One-based label of the cavity.
    omega : float
        Resonance frequency (rad/s).
    kappa_int, kappa_ext : float
        Internal loss and external coupling rates (rad/s).
    inductance, stray_capacitance, motional_capacitance : float, optional
        Circuit parameters in SI units.
    """

    index: int
    omega: float
    kappa_int: float
    kappa_ext: float
    inductance: Optional[float] = None
    stray_capacitance: Optional[float] = None
    motional_capacitance: Optional[float] = None

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError(f"cavity {self.index}: omega must be positive")
        if not self.kappa_int >= 0:
            raise DomainError(f"cavity {self.index}: kappa_int must be non-negative")
        if not self.kappa_ext > 0:
            raise DomainError(f"cavity {self.index}: kappa_ext must be positive")

    @property
    def kappa(self) -> float:
        """Total linewidth (rad/s)."""
        return self.kappa_int + self.kappa_ext

    @property
    def eta(self) -> float:
        """Coupling efficiency kappa_ext / kappa."""
        return self.kappa_ext / self.kappa


@dataclass(frozen=True)
class MechanicalMode:
    """A mechanical resonance of the nanostring."""

    index: int
    omega_m: float
    gamma_m: float
    m_eff: Optional[float] = None
    x_zpf: Optional[float] = None

    def __post_init__(self):
        if not self.omega_m > 0:
            raise DomainError(f"mechanical mode {self.index}: omega_m must be positive")
        if not self.gamma_m > 0:
            raise DomainError(f"mechanical mode {self.index}: gamma_m must be positive")
        if self.omega_m / self.gamma_m < 1e3:
            warnings.warn(
                f"mechanical mode {self.index}: quality factor "
                f"{self.omega_m / self.gamma_m:.3g} is below 1e3",
                RuntimeWarning,
                stacklevel=3,
            )


@dataclass(frozen=True)
class TuningCurve:
    """Voltage-dependent frequency shift ``sign * (alpha1 V^2 + alpha2 V^4)``."""

    alpha1: float
    alpha2: float
    sign: int = 1
    v_max: Optional[float] = None

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise DomainError("tuning sign must be +1 or -1")

    def shift(self, voltage):
        """Frequency shift (rad/s) at bias ``voltage`` (V)."""
        v2 = np.square(np.asarray(voltage, dtype=float))
        return self.sign * (self.alpha1 * v2 + self.alpha2 * v2 * v2)

    def span(self, v_max: Optional[float] = None) -> float:
        """Total tuning range (rad/s) between 0 V and ``v_max``."""
        v = self.v_max if v_max is None else v_max
        if v is None:
            raise DomainError("no voltage range given for tuning span")
        return float(abs(self.shift(v)))


@dataclass(frozen=True)
class DeviceModel:
    """Immutable device description.

    ``g0`` is an (n_cavities, n_mechanics) array of non-negative vacuum
    coupling rates (rad/s). Coupling phases are carried by the pumps.
    """

    cavities: tuple
    mechanics: tuple
    g0: np.ndarray
    tuning: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "cavities", tuple(self.cavities))
        object.__setattr__(self, "mechanics", tuple(self.mechanics))
        object.__setattr__(self, "tuning", tuple(self.tuning))
        g0 = np.array(self.g0, dtype=float)
        if g0.shape != (len(self.cavities), len(self.mechanics)):
            raise DomainError(
                f"g0 has shape {g0.shape}, expected "
                f"({len(self.cavities)}, {len(self.mechanics)})"
            )
        if np.any(g0 < 0) or not np.all(np.isfinite(g0)):
            raise DomainError("g0 entries must be finite and non-negative")
        g0.setflags(write=False)
        object.__setattr__(self, "g0", g0)
        freqs = [c.omega for c in self.cavities]
        if len(set(freqs)) != len(freqs):
            raise DomainError("cavity frequencies must be pairwise distinct")
        if self.tuning and len(self.tuning) != len(self.cavities):
            raise DomainError("tuning must be given for every cavity or none")

    @property
    def n_cavities(self) -> int:
        return len(self.cavities)

    @property
    def n_mechanics(self) -> int:
        return len(self.mechanics)

    @property
    def kappa(self) -> np.ndarray:
        return np.array([c.kappa for c in self.cavities])

    @property
    def kappa_ext(self) -> np.ndarray:
        return np.array([c.kappa_ext for c in self.cavities])

    @property
    def kappa_int(self) -> np.ndarray:
        return np.array([c.kappa_int for c in self.cavities])

    @property
    def eta(self) -> np.ndarray:
        return np.array([c.eta for c in self.cavities])

    @property
    def omega_c(self) -> np.ndarray:
        return np.array([c.omega for c in self.cavities])

    @property
    def omega_m(self) -> np.ndarray:
        return np.array([m.omega_m for m in self.mechanics])

    @property
    def gamma_m(self) -> np.ndarray:
        return np.array([m.gamma_m for m in self.mechanics])

    def replace(self, **changes) -> "DeviceModel":
        """Return a copy with the given fields replaced."""
        from dataclasses import replace

        return replace(self, **changes)

    def with_mechanical_frequency(self, index: int, omega_m: float) -> "DeviceModel":
        """Copy with mechanical mode ``index`` (zero-based) moved to ``omega_m``."""
        from dataclasses import replace

        mech = list(self.mechanics)
        mech[index] = replace(mech[index], omega_m=omega_m)
        return replace(self, mechanics=tuple(mech))


def lc_frequency(inductance: float, capacitance: float) -> float:
    """Angular resonance frequency ``1/sqrt(L C)`` of an LC circuit."""
    if not (inductance > 0 and capacitance > 0):
        raise DomainError("inductance and capacitance must be positive")
    return 1.0 / np.sqrt(inductance * capacitance)


def participation_ratio(motional_capacitance: float, stray_capacitance: float) -> float:
    """Fraction ``Cm / (Cm + Cs)`` of capacitance that moves with the string."""
    if not motional_capacitance > 0:
        raise DomainError("motional capacitance must be positive")
    if stray_capacitance < 0:
        raise DomainError("stray capacitance must be non-negative")
    return motional_capacitance / (motional_capacitance + stray_capacitance)


def vacuum_coupling(x_zpf: float, zeta: float, omega: float,
                    motional_capacitance: float, dc_dx: float) -> float:
    """Magnitude of the single-phonon electromechanical coupling (rad/s).

    Parameters
    ----------
    x_zpf : float
        Zero-point displacement (m).
    zeta : float
        Participation ratio.
    omega : float
        Cavity frequency (rad/s).
    motional_capacitance : float
        Motional capacitance (F).
    dc_dx : float
        Derivative of the motional capacitance with displacement (F/m).
    """
    if motional_capacitance == 0:
        raise DomainError("motional capacitance must be nonzero")
    if x_zpf < 0 or zeta < 0 or omega < 0 or motional_capacitance < 0:
        raise DomainError("vacuum_coupling inputs must be non-negative")
    return abs(x_zpf * zeta * omega / (2.0 * motional_capacitance) * dc_dx)


def photons_from_drive(amplitude, kappa, detuning):
    """Intracavity photon number ``4|E|^2 / (kappa^2 + 4 Delta^2)``."""
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa <= 0):
        raise DomainError("kappa must be positive")
    amp = np.abs(np.asarray(amplitude))
    return 4.0 * amp**2 / (kappa**2 + 4.0 * np.square(detuning))


def cooperativity(g0, n, kappa, gamma_m):
    """Cooperativity ``4 g0^2 n / (kappa gamma_m)``."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 0):
        raise DomainError("photon number must be non-negative")
    return 4.0 * np.square(g0) * n / (np.asarray(kappa) * np.asarray(gamma_m))


def photons_for_cooperativity(C, g0, kappa, gamma_m):
    """Photon number giving cooperativity ``C`` (inverse of :func:`cooperativity`)."""
    g0 = np.asarray(g0, dtype=float)
    if np.any(g0 <= 0):
        raise DomainError("g0 must be positive to reach a finite cooperativity")
    return np.asarray(C) * np.asarray(kappa) * np.asarray(gamma_m) / (4.0 * g0**2)


@dataclass(frozen=True)
class TuningFit:
    """Result of :func:`voltage_tuning_fit`."""

    alpha1: float
    alpha2: float
    residual_norm: float
    stderr: tuple

    def __iter__(self):
        yield self.alpha1
        yield self.alpha2


def voltage_tuning_fit(voltages: Sequence[float], shifts: Sequence[float]) -> TuningFit:
    """Least-squares fit of ``shift = alpha1 V^2 + alpha2 V^4`` with no intercept.

    Raises
    ------
    FitError
        If fewer than two distinct ``|V|`` values are supplied.
    """
    v = np.asarray(voltages, dtype=float).ravel()
    y = np.asarray(shifts, dtype=float).ravel()
    if v.shape != y.shape:
        raise FitError("voltages and shifts must have equal length")
    if np.unique(np.abs(v)[np.abs(v) > 0]).size < 2:
        raise FitError("need at least two distinct nonzero |V| values")
    v2 = v * v
    design = np.column_stack([v2, v2 * v2])
    # column scaling keeps the normal equations well conditioned
    scale = np.linalg.norm(design, axis=0)
    coef, _, rank, _ = np.linalg.lstsq(design / scale, y, rcond=None)
    if rank < 2:
        raise FitError("rank-deficient tuning design matrix")
    coef = coef / scale
    resid = y - design @ coef
    rnorm = float(np.linalg.norm(resid))
    dof = v.size - 2
    if dof > 0:
        sigma2 = rnorm**2 / dof
        cov = sigma2 * np.linalg.inv(design.T @ design)
        stderr = tuple(np.sqrt(np.diag(cov)))
    else:
        stderr = (float("nan"), float("nan"))
    return TuningFit(float(coef[0]), float(coef[1]), rnorm, stderr)
