"""Linearized, frame-rotated couplings and renormalized mechanical parameters.

Each pump (i, j) is a red-sideband tone on cavity ``i`` addressing mechanical
mode ``j``. Besides the resonant beam-splitter coupling ``G[i, j]`` it also
couples cavity ``i`` off-resonantly to the *other* mechanical mode, detuned by
``delta_omega_m``. That off-resonant coupling is stored as ``F``: column 0 of
``F`` is produced by the drives of column 1 and vice versa. Eliminating the
off-resonant sidebands shifts and broadens each mechanical mode.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .device import DeviceModel
from .errors import DomainError, ModelValidityError

RWA_WARN = 0.1
RWA_FAIL = 1.0


@dataclass(frozen=True)
class PumpConfiguration:
    """Pump settings expressed by intracavity photon numbers.

    Parameters
    ----------
    photon_number : (n_cav, n_mech) array
        Intracavity photons of drive (i, j).
    phase : (n_cav, n_mech) array
        Drive phases (rad).
    sideband_detuning : (n_mech,) array
        Offset ``delta0_j`` (rad/s) of the drives addressing mode ``j`` from the
        exact red sideband. All drives on the same mode share it.
    """

    photon_number: np.ndarray
    phase: np.ndarray
    sideband_detuning: np.ndarray

    def __post_init__(self):
        n = np.array(self.photon_number, dtype=float)
        phi = np.array(self.phase, dtype=float)
        d0 = np.array(self.sideband_detuning, dtype=float).ravel()
        if n.ndim != 2 or phi.shape != n.shape:
            raise DomainError("photon_number and phase must be equal-shape 2-D arrays")
        if d0.shape != (n.shape[1],):
            raise DomainError("one sideband detuning per mechanical mode is required")
        if np.any(n < 0) or not np.all(np.isfinite(n)):
            raise DomainError("photon numbers must be finite and non-negative")
        for arr in (n, phi, d0):
            arr.setflags(write=False)
        object.__setattr__(self, "photon_number", n)
        object.__setattr__(self, "phase", phi)
        object.__setattr__(self, "sideband_detuning", d0)

    @classmethod
    def off(cls, n_cavities: int = 3, n_mechanics: int = 2) -> "PumpConfiguration":
        """All pumps off."""
        z = np.zeros((n_cavities, n_mechanics))
        return cls(z, z, np.zeros(n_mechanics))

    def with_phase(self, index, value: float) -> "PumpConfiguration":
        """Copy with ``phase[index] = value``."""
        phi = np.array(self.phase)
        phi[index] = value
        return replace(self, phase=phi)

    def negated_phases(self) -> "PumpConfiguration":
        """Copy with every phase sign-flipped (time-reversed circulation)."""
        return replace(self, phase=-np.asarray(self.phase))


@dataclass(frozen=True)
class EffectiveModel:
    """Linearized parameters in the interaction frame.

    Attributes
    ----------
    G, F : (n_cav, n_mech) complex arrays
        Resonant and off-resonant couplings (rad/s).
    delta_eff, gamma_eff : (n_mech,) arrays
        Renormalized mechanical detunings and damping rates (rad/s). The
        mechanical equation of motion reads
        ``db_j/dt = (i delta_j - Gamma_j / 2) b_j + ...``.
    delta_omega_m : float
        Splitting between the two mechanical frames (rad/s).
    gamma_m : (n_mech,) array
        Intrinsic mechanical damping, kept for noise bookkeeping.
    delta0 : (n_mech,) array
        Bare sideband detunings.
    """

    G: np.ndarray
    F: np.ndarray
    delta_eff: np.ndarray
    gamma_eff: np.ndarray
    delta_omega_m: float
    gamma_m: np.ndarray
    delta0: np.ndarray

    @property
    def off_resonant_damping(self) -> np.ndarray:
        """Extra damping ``Gamma_j - gamma_j`` (rad/s)."""
        return self.gamma_eff - self.gamma_m

    def without_off_resonant(self) -> "EffectiveModel":
        """Bare resonant model: F set to zero, mechanics back to intrinsic values."""
        return replace(
            self,
            F=np.zeros_like(self.F),
            delta_eff=np.array(self.delta0, dtype=float),
            gamma_eff=np.array(self.gamma_m, dtype=float),
        )


def off_resonant_weights(kappas, delta_omega_m):
    """Lorentzian weights ``4 / (4 delta_omega_m^2 + kappa_i^2)``."""
    kappas = np.asarray(kappas, dtype=float)
    return 4.0 / (4.0 * delta_omega_m**2 + kappas**2)


def off_resonant_rates(F, kappas, delta_omega_m):
    """Per-(cavity, mode) damping contributions ``kappa_i w_i |F_ij|^2``."""
    w = off_resonant_weights(kappas, delta_omega_m)
    return (np.asarray(kappas) * w)[:, None] * np.abs(F) ** 2


def renormalize_mechanics(G, F, kappas, delta_omega_m, delta0, gamma_m):
    """Mechanical detunings and damping after eliminating off-resonant sidebands.

    Returns
    -------
    delta_eff, gamma_eff : ndarray
        Mode 1 is pulled towards ``+delta_omega_m`` and mode 2 the opposite way.
    """
    kappas = np.asarray(kappas, dtype=float)
    if np.any(kappas <= 0):
        raise DomainError("kappa must be positive")
    if delta_omega_m == 0:
        raise DomainError("delta_omega_m must be nonzero")
    F = np.asarray(F)
    if F.shape[1] != 2:
        raise DomainError("off-resonant renormalization is defined for two mechanical modes")
    w = off_resonant_weights(kappas, delta_omega_m)
    f2 = np.abs(F) ** 2
    shift = delta_omega_m * (w[:, None] * f2).sum(axis=0)
    delta_eff = np.asarray(delta0, dtype=float) + np.array([shift[0], -shift[1]])
    gamma_eff = np.asarray(gamma_m, dtype=float) + ((kappas * w)[:, None] * f2).sum(axis=0)
    return delta_eff, gamma_eff


def build_effective(device: DeviceModel, pumps: PumpConfiguration,
                    include_off_resonant: bool = True) -> EffectiveModel:
    """Derive G, F and the renormalized mechanics from device and pumps.

    With ``include_off_resonant=False`` F is zeroed, giving the bare model in
    which each mode keeps its intrinsic damping and bare sideband detuning.
    """
    n = pumps.photon_number
    if n.shape != device.g0.shape:
        raise DomainError(
            f"pump array shape {n.shape} does not match coupling shape {device.g0.shape}"
        )
    g0 = device.g0
    amp = np.sqrt(n)
    G = g0 * amp * np.exp(-1j * pumps.phase)
    d0 = pumps.sideband_detuning
    gamma_m = device.gamma_m

    if device.n_mechanics != 2:
        # a single mechanical mode has no off-resonant partner
        F = np.zeros_like(G)
        return EffectiveModel(G, F, d0.copy(), gamma_m.copy(), 0.0, gamma_m, d0.copy())

    omega_m = device.omega_m
    delta_omega_m = float(omega_m[1] - omega_m[0] + d0[1] - d0[0])
    if not abs(delta_omega_m) > 0:
        raise ModelValidityError("mechanical frames are degenerate (delta_omega_m = 0)")

    F = np.empty_like(G)
    F[:, 0] = g0[:, 0] * amp[:, 1] * np.exp(-1j * pumps.phase[:, 1])
    F[:, 1] = g0[:, 1] * amp[:, 0] * np.exp(-1j * pumps.phase[:, 0])
    if not include_off_resonant:
        F = np.zeros_like(G)

    delta_eff, gamma_eff = renormalize_mechanics(G, F, device.kappa, delta_omega_m, d0, gamma_m)
    return EffectiveModel(G, F, delta_eff, gamma_eff, delta_omega_m, gamma_m, d0.copy())


@dataclass(frozen=True)
class RwaReport:
    """Ratios controlling the rotating-wave and adiabatic approximations."""

    coupling_ratio: float
    linewidth_to_mechanics: float
    linewidth_to_splitting: float
    status: str

    @property
    def worst(self) -> float:
        return max(self.coupling_ratio, self.linewidth_to_mechanics, self.linewidth_to_splitting)


def rwa_validity(effective: EffectiveModel, device: DeviceModel,
                 warn_at: float = RWA_WARN, fail_at: float = RWA_FAIL) -> RwaReport:
    """Check ``|F|, kappa << omega_m, |delta_omega_m|``.

    Linewidths enter as half-widths ``kappa_i / 2``, which is the scale the
    off-resonant Lorentzian compares against, and only driven cavities count.
    ``status`` is ``"pass"`` below ``warn_at``, ``"fail"`` at or above
    ``fail_at`` and ``"warn"`` in between.
    """
    dwm = abs(effective.delta_omega_m)
    driven = np.any(np.abs(effective.G) > 0, axis=1) | np.any(np.abs(effective.F) > 0, axis=1)
    if not np.any(driven):
        return RwaReport(0.0, 0.0, 0.0, "pass")
    half_k = 0.5 * float(np.max(device.kappa[driven]))
    f_ratio = float(np.max(np.abs(effective.F)) / dwm) if dwm > 0 else 0.0
    k_mech = half_k / float(np.min(device.omega_m))
    k_split = half_k / dwm if dwm > 0 else 0.0
    worst = max(f_ratio, k_mech, k_split)
    if worst >= fail_at:
        status = "fail"
    elif worst >= warn_at:
        status = "warn"
    else:
        status = "pass"
    return RwaReport(f_ratio, k_mech, k_split, status)
