"""Pump-configuration search and calibration recipes.

The optimizers run derivative-free Nelder-Mead searches from several
deterministic starting points. Search variables are log photon numbers, the
gauge-free drive phases and the two sideband detunings. Three phases are
pinned to zero, ``phi[0, 0] = phi[1, 0] = phi[0, 1] = 0``, since a common
phase offset per cavity or per mode is unobservable.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .device import DeviceModel, photons_for_cooperativity
from .effective import PumpConfiguration, build_effective
from .errors import DomainError, MechcircError
from .oracles import (
    TwoPortWorkingPoint,
    cooperativity_for_insertion_loss,
    detuning_for_peak,
    isolation_phase,
    reflection_coefficients,
)
from .scattering import power_db, s_matrices, solve_grid

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
PINNED_PHASES = ((0, 0), (1, 0), (0, 1))
#: scale of the detuning search variable (rad/s per unit)
DETUNING_UNIT = TWO_PI * 100.0
DEFAULT_STARTS = 8


@dataclass(frozen=True)
class OptimizationTarget:
    """What to optimize.

    Parameters
    ----------
    kind : {"isolate", "circulate", "convert", "match"}
    ports : tuple of int
        Zero-based ports. ``isolate``: ``(src, dst)`` with ``src -> dst``
        transmitting; ``circulate``: the circulation order, e.g. ``(0, 1, 2)``
        for 1 -> 2 -> 3 -> 1.
    band : (float, float)
        Probe-detuning interval (rad/s) over which worst cases are taken.
    weight : float
        Weight of the insertion-loss term relative to backward leakage.
    min_isolation_db, max_insertion_loss_db : float
        Pass thresholds reported in the result.
    band_points : int
        Number of grid points across ``band``.
    """

    kind: str
    ports: tuple
    band: tuple = (0.0, 0.0)
    weight: float = 1.0
    min_isolation_db: float = 40.0
    max_insertion_loss_db: float = 2.5
    band_points: int = 1

    def __post_init__(self):
        if self.kind not in ("isolate", "circulate", "convert", "match"):
            raise DomainError(f"unknown target kind '{self.kind}'")
        if self.band[0] > self.band[1]:
            raise DomainError("band must be a nonempty interval")
        if self.weight < 0:
            raise DomainError("weight must be non-negative")
        if self.band_points < 1 or (self.band[0] < self.band[1] and self.band_points < 2):
            raise DomainError("a finite band needs at least two points")

    @property
    def omega_grid(self) -> np.ndarray:
        if self.band[0] == self.band[1]:
            return np.array([float(self.band[0])])
        return np.linspace(self.band[0], self.band[1], self.band_points)

    @property
    def forward_paths(self) -> list:
        if self.kind == "circulate":
            o = self.ports
            return [(o[(k + 1) % len(o)], o[k]) for k in range(len(o))]
        src, dst = self.ports
        return [(dst, src)]

    @property
    def backward_paths(self) -> list:
        return [(j, i) for i, j in self.forward_paths]

    @property
    def leakage_floor_db(self) -> float:
        """Backward level below which leakage no longer improves the objective."""
        return -(self.min_isolation_db + 10.0)


@dataclass(frozen=True)
class Achieved:
    """Metrics recomputed from scratch for a pump configuration."""

    isolation_db: np.ndarray
    insertion_loss_db: np.ndarray
    bandwidth_hz: float

    @property
    def worst_isolation_db(self) -> float:
        return float(np.min(self.isolation_db))

    @property
    def worst_insertion_loss_db(self) -> float:
        return float(np.max(self.insertion_loss_db))


@dataclass(frozen=True)
class OptimizationResult:
    """Outcome of a pump search."""

    pumps: PumpConfiguration
    objective: float
    history: tuple
    achieved: Achieved
    target: OptimizationTarget
    include_off_resonant: bool
    converged: bool
    start_index: int
    start_objectives: tuple = field(default=())

    @property
    def target_met(self) -> bool:
        return (self.achieved.worst_isolation_db >= self.target.min_isolation_db
                and self.achieved.worst_insertion_loss_db <= self.target.max_insertion_loss_db)


def _free_phases(n_cav: int, n_mech: int) -> list:
    return [(i, j) for i in range(n_cav) for j in range(n_mech) if (i, j) not in PINNED_PHASES]


class _Problem:
    """Maps search vectors to pump configurations and objective values."""

    def __init__(self, device: DeviceModel, target: OptimizationTarget, active, include_off_resonant):
        self.device = device
        self.target = target
        self.active = list(active)
        self.include_off = include_off_resonant
        self.phases = [p for p in _free_phases(device.n_cavities, device.n_mechanics)
                       if p[0] in {a[0] for a in self.active}]
        self.kappa_half = 0.5 * float(np.min(device.kappa[[a[0] for a in self.active]]))
        self.omega = target.omega_grid
        self.floor = 10.0 ** (target.leakage_floor_db / 10.0)

    @property
    def size(self) -> int:
        return len(self.active) + len(self.phases) + self.device.n_mechanics

    def pumps(self, x) -> PumpConfiguration:
        x = np.asarray(x, dtype=float)
        na = len(self.active)
        n = np.zeros(self.device.g0.shape)
        phi = np.zeros(self.device.g0.shape)
        for k, idx in enumerate(self.active):
            n[idx] = np.exp(np.clip(x[k], -50.0, 50.0))
        for k, idx in enumerate(self.phases):
            phi[idx] = x[na + k]
        u = x[na + len(self.phases):]
        d0 = self.kappa_half * np.tanh(u * DETUNING_UNIT / self.kappa_half)
        return PumpConfiguration(n, phi, d0)

    def encode(self, pumps: PumpConfiguration) -> np.ndarray:
        n = pumps.photon_number
        x = [np.log(max(n[idx], 1e-300)) for idx in self.active]
        x += [pumps.phase[idx] for idx in self.phases]
        d0 = np.clip(pumps.sideband_detuning / self.kappa_half, -1 + 1e-12, 1 - 1e-12)
        x += list(np.arctanh(d0) * self.kappa_half / DETUNING_UNIT)
        return np.array(x, dtype=float)

    def metrics(self, pumps: PumpConfiguration):
        eff = build_effective(self.device, pumps, self.include_off)
        S = s_matrices(eff, self.device, self.omega)
        fwd = np.array([np.abs(S[:, i, j]) ** 2 for i, j in self.target.forward_paths])
        bwd = np.array([np.abs(S[:, i, j]) ** 2 for i, j in self.target.backward_paths])
        return fwd, bwd

    def objective(self, x) -> float:
        try:
            fwd, bwd = self.metrics(self.pumps(x))
        except MechcircError:
            return 1e6
        loss = float(np.max(-10.0 * np.log10(fwd + 1e-30)))
        leak = float(np.max(10.0 * np.log10(bwd + self.floor)))
        return leak + self.target.weight * loss


def achieved_metrics(device: DeviceModel, pumps: PumpConfiguration, target: OptimizationTarget,
                     include_off_resonant: bool = True, bandwidth_level_db: float = 20.0) -> Achieved:
    """Isolation, insertion loss and isolation bandwidth recomputed from scratch.

    Isolation and insertion loss are per path, worst case over the target
    band. The bandwidth is the width (Hz) of the contiguous region around the
    band center where every backward path stays ``bandwidth_level_db`` below
    unity.
    """
    eff = build_effective(device, pumps, include_off_resonant)
    res = solve_grid(eff, device, target.omega_grid)
    iso = np.array([np.min(-power_db(res.s(i, j))) for i, j in target.backward_paths])
    il = np.array([np.max(-power_db(res.s(i, j))) for i, j in target.forward_paths])
    center = 0.5 * (target.band[0] + target.band[1])
    bw = isolation_bandwidth(eff, device, target.backward_paths, center, bandwidth_level_db)
    return Achieved(iso, il, bw)


def isolation_bandwidth(effective, device: DeviceModel, paths, center: float = 0.0,
                        level_db: float = 20.0, n_points: int = 2001,
                        reference_paths=None) -> float:
    """Width (Hz) of the region around ``center`` with all ``paths`` below ``-level_db``.

    With ``reference_paths`` (one per entry of ``paths``) the level is the
    contrast ``|S_path|^2 / |S_reference|^2`` instead of the absolute power,
    e.g. backward relative to forward transmission.

    The search window starts at a few mechanical linewidths and doubles until
    both edges are found or it reaches the smallest cavity half-linewidth, in
    which case the window width is returned. Returns 0 if the center itself is
    not isolated. Edges are located by linear interpolation of the dB trace.
    """
    if reference_paths is not None and len(reference_paths) != len(paths):
        raise DomainError("one reference path per path is required")
    span = 10.0 * float(np.max(effective.gamma_eff))
    span_max = 0.5 * float(np.min(device.kappa))
    while True:
        omega = center + np.linspace(-span, span, n_points)
        S = s_matrices(effective, device, omega)
        traces = [power_db(S[:, i, j]) for i, j in paths]
        if reference_paths is not None:
            traces = [t - power_db(S[:, i, j]) for t, (i, j) in zip(traces, reference_paths)]
        level = np.max(traces, axis=0) + level_db
        mid = n_points // 2
        if level[mid] > 0:
            return 0.0
        inside = level <= 0
        lo = mid
        while lo > 0 and inside[lo - 1]:
            lo -= 1
        hi = mid
        while hi < n_points - 1 and inside[hi + 1]:
            hi += 1
        if (lo > 0 and hi < n_points - 1) or span >= span_max:
            break
        span = min(2.0 * span, span_max)

    def interp(k, step):
        if not 0 <= k + step < n_points:
            return omega[k]
        y0, y1 = level[k], level[k + step]
        return omega[k] + (-y0 / (y1 - y0)) * (omega[k + step] - omega[k])

    return float(interp(hi, 1) - interp(lo, -1)) / TWO_PI


def _run_start(problem: _Problem, x0, max_evals: int, xatol: float, fatol: float):
    history = []

    def f(x):
        val = problem.objective(x)
        history.append(val)
        return val

    # initial simplex sized per variable type
    na = len(problem.active)
    npf = len(problem.phases)
    steps = np.concatenate([np.full(na, 0.5), np.full(npf, 0.3), np.full(problem.size - na - npf, 0.5)])
    simplex = np.vstack([x0] + [x0 + np.eye(problem.size)[k] * steps[k] for k in range(problem.size)])
    res = minimize(f, x0, method="Nelder-Mead",
                   options={"maxfev": max_evals, "xatol": xatol, "fatol": fatol,
                            "initial_simplex": simplex, "adaptive": True})
    # one restart from the optimum to escape simplex collapse
    left = max_evals - res.nfev
    if left > 0:
        simplex = np.vstack([res.x] + [res.x + np.eye(problem.size)[k] * steps[k] * 0.2
                                       for k in range(problem.size)])
        res2 = minimize(f, res.x, method="Nelder-Mead",
                        options={"maxfev": left, "xatol": xatol, "fatol": fatol,
                                 "initial_simplex": simplex, "adaptive": True})
        if res2.fun <= res.fun:
            res = res2
    return res.x, float(res.fun), bool(res.success), tuple(history)


def _multistart(problem: _Problem, starts: Sequence[np.ndarray], max_evals: int, workers: int,
                xatol: float = 1e-6, fatol: float = 1e-7):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(lambda s: _run_start(problem, s, max_evals, xatol, fatol), starts))
    else:
        runs = [_run_start(problem, s, max_evals, xatol, fatol) for s in starts]
    objs = [r[1] for r in runs]
    # lowest objective wins; ties resolved by start order
    best = min(range(len(runs)), key=lambda k: (objs[k], k))
    return runs, best


def _perturbed_starts(problem: _Problem, seed_x: np.ndarray, n_starts: int, rng_seed: int,
                      mirror: bool = False) -> list:
    rng = np.random.default_rng(rng_seed)
    na = len(problem.active)
    npf = len(problem.phases)
    starts = [seed_x]
    for _ in range(n_starts - 1):
        x = np.array(seed_x, dtype=float)
        x[:na] += rng.normal(0.0, 0.7, na)
        ph = rng.uniform(-np.pi, np.pi, npf)
        x[na:na + npf] = -ph if mirror else ph
        x[na + npf:] = seed_x[na + npf:] + rng.normal(0.0, 1.0, problem.size - na - npf)
        starts.append(x)
    return starts


def _finish(problem: _Problem, runs, best, target, include_off, start_objs=None) -> OptimizationResult:
    x, obj, ok, hist = runs[best]
    pumps = problem.pumps(x)
    ach = achieved_metrics(problem.device, pumps, target, include_off)
    return OptimizationResult(pumps, obj, hist, ach, target, include_off, ok, best,
                              tuple(r[1] for r in runs))


def recompute_objective(result: OptimizationResult, device: DeviceModel) -> float:
    """Objective of ``result.pumps`` evaluated from scratch."""
    active = [tuple(a) for a in zip(*np.nonzero(result.pumps.photon_number))]
    problem = _Problem(device, result.target, active, result.include_off_resonant)
    fwd, bwd = problem.metrics(result.pumps)
    loss = float(np.max(-10.0 * np.log10(fwd + 1e-30)))
    leak = float(np.max(10.0 * np.log10(bwd + problem.floor)))
    return leak + result.target.weight * loss


def isolator_seed(device: DeviceModel, ports=(0, 1), insertion_loss_db: float = 2.4,
                  include_off_resonant: bool = True, iterations: int = 20) -> PumpConfiguration:
    """Analytic starting point for a two-port isolator.

    Equal cooperativities are set from the target insertion loss, the common
    detuning from the peak-transmission condition and the loop phase from the
    exact isolation condition. With off-resonant terms on, cooperativities and
    phase are iterated against the renormalized damping rates.
    """
    a, b = ports
    eta = device.eta
    # keep the seed constructible when the requested loss is out of reach
    floor_db = -10.0 * np.log10(eta[a] * eta[b]) + 0.5
    C = cooperativity_for_insertion_loss(max(insertion_loss_db, floor_db), eta[a], eta[b])
    gamma = device.gamma_m.copy()
    kappa = device.kappa
    g0 = device.g0
    delta = detuning_for_peak(C, float(np.mean(gamma)))
    n = np.zeros(g0.shape)
    phi = np.zeros(g0.shape)
    d0 = np.array([delta, -delta])
    eff = None
    for _ in range(iterations if include_off_resonant else 1):
        for i in (a, b):
            n[i] = photons_for_cooperativity(C, g0[i], kappa[i], gamma)
        pumps = PumpConfiguration(n, phi, d0)
        eff = build_effective(device, pumps, include_off_resonant)
        if np.allclose(eff.gamma_eff, gamma, rtol=1e-10):
            break
        gamma = eff.gamma_eff
    Cm = 4.0 * np.abs(eff.G[[a, b]]) ** 2 / (kappa[[a, b], None] * eff.gamma_eff[None, :])
    wp = TwoPortWorkingPoint(Cm, 0.0, 0.0, eff.gamma_eff, eta[[a, b]], deltas=eff.delta_eff)
    phase = isolation_phase(wp, 0.0)
    # the loop phase sits on drive (dst, mode 2); sign flips for the reverse direction
    phi[b, 1] = phase if (a, b) == (0, 1) else -phase
    return PumpConfiguration(n, phi, d0)


def optimize_isolation(device: DeviceModel, target: OptimizationTarget,
                       seed_config: Optional[PumpConfiguration] = None,
                       include_off_resonant: bool = True, n_starts: int = DEFAULT_STARTS,
                       max_evals: int = 3000, workers: int = 1, rng_seed: int = 0,
                       starts: Optional[Sequence[PumpConfiguration]] = None) -> OptimizationResult:
    """Search photon numbers, loop phase and detunings of a two-port isolator.

    The analytic seed (or ``seed_config``) is always the first start; the
    returned objective is never worse than the seed's.
    """
    if target.kind != "isolate" or len(target.ports) != 2:
        raise DomainError("optimize_isolation needs an 'isolate' target with two ports")
    a, b = target.ports
    if sorted((a, b)) != [0, 1]:
        raise DomainError("isolation is supported between ports 1 and 2 (gauge-pinned drives)")
    active = [(i, j) for i in (a, b) for j in range(device.n_mechanics)]
    problem = _Problem(device, target, active, include_off_resonant)
    if seed_config is None:
        seed_config = isolator_seed(device, (a, b), target.max_insertion_loss_db,
                                    include_off_resonant)
    seed_x = problem.encode(seed_config)
    if starts is None:
        xs = _perturbed_starts(problem, seed_x, n_starts, rng_seed)
    else:
        xs = [problem.encode(p) for p in starts]
    runs, best = _multistart(problem, xs, max_evals, workers)
    return _finish(problem, runs, best, target, include_off_resonant)


def _orientation(order) -> int:
    """+1 for cyclic shifts of (0, 1, 2), -1 for the reversed cycle."""
    o = tuple(order)
    if len(o) != 3 or sorted(o) != [0, 1, 2]:
        raise DomainError("circulation order must be a permutation of three ports")
    k = o.index(0)
    return 1 if (o[(k + 1) % 3]) == 1 else -1


def circulator_seed(device: DeviceModel, cooperativity: float = 1.0,
                    phases=(0.0, 0.0, 0.0), orientation: int = 1) -> PumpConfiguration:
    """Equal-cooperativity six-pump starting point for a three-port circulator.

    ``phases`` fill the free drives (2, 2), (3, 1), (3, 2) in that order and
    are sign-flipped for the reversed orientation.
    """
    g0, kappa, gamma = device.g0, device.kappa, device.gamma_m
    n = photons_for_cooperativity(cooperativity, g0, kappa[:, None], gamma[None, :])
    phi = np.zeros(g0.shape)
    for (i, j), p in zip([(1, 1), (2, 0), (2, 1)], phases):
        phi[i, j] = orientation * p
    return PumpConfiguration(n, phi, np.zeros(device.n_mechanics))


def optimize_circulation(device: DeviceModel, order=(0, 1, 2), band=(0.0, 0.0),
                         weight: float = 1.0, min_isolation_db: float = 18.0,
                         max_insertion_loss_db: float = 5.0,
                         include_off_resonant: bool = True, n_starts: int = DEFAULT_STARTS,
                         max_evals: int = 4000, workers: int = 1, rng_seed: int = 0,
                         band_points: int = 1,
                         starts: Optional[Sequence[PumpConfiguration]] = None) -> OptimizationResult:
    """Search all six pumps for circulation in the given port ``order``.

    The objective is the worst forward insertion loss plus ``weight`` times
    the worst backward leakage (dB, floored ``10 dB`` beyond the isolation
    threshold). Start points are generated with phases mirrored for the
    reversed orientation, so the two orientations explore mirror images.
    """
    if device.n_cavities != 3 or device.n_mechanics != 2:
        raise DomainError("circulation needs three cavities and two mechanical modes")
    sign = _orientation(order)
    # the shared objective weights insertion loss against leakage, so invert
    target = OptimizationTarget("circulate", tuple(order), tuple(band), 1.0 / weight if weight > 0 else 1e6,
                                min_isolation_db, max_insertion_loss_db, band_points)
    active = [(i, j) for i in range(3) for j in range(2)]
    problem = _Problem(device, target, active, include_off_resonant)
    if starts is None:
        rng = np.random.default_rng(rng_seed)
        xs = []
        for k in range(n_starts):
            ph = (0.0, 0.0, 0.0) if k == 0 else tuple(rng.uniform(-np.pi, np.pi, 3))
            C = 1.0 if k == 0 else float(np.exp(rng.normal(0.0, 0.7)))
            seed = circulator_seed(device, C, ph, sign)
            x = problem.encode(seed)
            if k > 0:
                x[:6] += rng.normal(0.0, 0.5, 6)
            xs.append(x)
    else:
        xs = [problem.encode(p) for p in starts]
    runs, best = _multistart(problem, xs, max_evals, workers)
    return _finish(problem, runs, best, target, include_off_resonant)


@dataclass(frozen=True)
class ImpedanceMatch:
    """Result of :func:`impedance_match`."""

    pumps: PumpConfiguration
    reflection: np.ndarray
    predicted_reflection: np.ndarray


def impedance_match(device: DeviceModel, mech_index: int, target_C: float,
                    cavities=(0, 1)) -> ImpedanceMatch:
    """Drive ``cavities`` on mechanical mode ``mech_index`` at cooperativity ``target_C``.

    Returns the pumps, the engine's on-resonance reflection magnitudes
    ``|S_ii(0)|`` and the closed-form prediction for two cavities.
    """
    if not target_C > 0:
        raise DomainError("target cooperativity must be positive")
    n = np.zeros(device.g0.shape)
    j = mech_index
    for i in cavities:
        n[i, j] = photons_for_cooperativity(target_C, device.g0[i, j], device.kappa[i],
                                            device.gamma_m[j])
    pumps = PumpConfiguration(n, np.zeros_like(n), np.zeros(device.n_mechanics))
    eff = build_effective(device, pumps, include_off_resonant=False)
    S = s_matrices(eff, device, 0.0)[0]
    refl = np.abs(np.diag(S))[list(cavities)]
    pred = np.full(len(cavities), np.nan)
    if len(cavities) == 2:
        eta = device.eta
        r1, r2 = reflection_coefficients(target_C, target_C, eta[cavities[0]], eta[cavities[1]])
        pred = np.sqrt([r1, r2])
    return ImpedanceMatch(pumps, refl, pred)


@dataclass(frozen=True)
class RenormalizationCalibration:
    """Pumps reconstructed from target mechanical damping and detunings."""

    pumps: PumpConfiguration
    cooperativity: float
    gamma_eff: np.ndarray
    delta_eff: np.ndarray
    relative_error: np.ndarray


def equal_cooperativity_pumps(device: DeviceModel, C: float, cavities=(0, 1),
                              sideband_detuning=(0.0, 0.0)) -> Optional[PumpConfiguration]:
    """Pumps giving effective cooperativity ``C`` on every (cavity, mode) pair.

    The cooperativity is defined with the renormalized damping, which itself
    depends on the photon numbers through the off-resonant couplings. The
    resulting linear system for the two damping rates is solved exactly.
    Returns ``None`` if ``C`` exceeds the largest self-consistent value.
    """
    g0, kappa, gamma = device.g0, device.kappa, device.gamma_m
    d0 = np.asarray(sideband_detuning, dtype=float)
    dwm = float(device.omega_m[1] - device.omega_m[0] + d0[1] - d0[0])
    w = 4.0 / (4.0 * dwm**2 + kappa**2)
    cav = list(cavities)
    # Gamma_1 = gamma_1 + a C Gamma_2 and Gamma_2 = gamma_2 + b C Gamma_1
    a = np.sum(kappa[cav] ** 2 * w[cav] * g0[cav, 0] ** 2 / (4.0 * g0[cav, 1] ** 2))
    b = np.sum(kappa[cav] ** 2 * w[cav] * g0[cav, 1] ** 2 / (4.0 * g0[cav, 0] ** 2))
    det = 1.0 - a * b * C * C
    if det <= 0:
        return None
    g1 = (gamma[0] + a * C * gamma[1]) / det
    g2 = (gamma[1] + b * C * gamma[0]) / det
    n = np.zeros(g0.shape)
    for i in cav:
        n[i] = photons_for_cooperativity(C, g0[i], kappa[i], np.array([g1, g2]))
    return PumpConfiguration(n, np.zeros_like(n), d0)


def max_equal_cooperativity(device: DeviceModel, cavities=(0, 1)) -> float:
    """Supremum of self-consistent equal effective cooperativities."""
    kappa, g0 = device.kappa, device.g0
    dwm = float(device.omega_m[1] - device.omega_m[0])
    w = 4.0 / (4.0 * dwm**2 + kappa**2)
    cav = list(cavities)
    a = np.sum(kappa[cav] ** 2 * w[cav] * g0[cav, 0] ** 2 / (4.0 * g0[cav, 1] ** 2))
    b = np.sum(kappa[cav] ** 2 * w[cav] * g0[cav, 1] ** 2 / (4.0 * g0[cav, 0] ** 2))
    return float(1.0 / np.sqrt(a * b))


def calibrate_renormalization(device: DeviceModel, target_gamma, target_delta,
                              cavities=(0, 1), detuning_sign: float = -1.0
                              ) -> RenormalizationCalibration:
    """Reconstruct isolator pump photon numbers from renormalized mechanics.

    Pumps are restricted to equal effective cooperativity on all four
    (cavity, mode) pairs with drives on the exact sidebands; the single
    remaining scale is chosen to minimize the worst relative error against
    ``target_gamma`` and ``detuning_sign * target_delta`` (rad/s).

    ``detuning_sign = -1`` compares against detunings quoted with the
    opposite sign convention to :class:`~mechcirc.effective.EffectiveModel`.
    """
    tg = np.asarray(target_gamma, dtype=float)
    td = detuning_sign * np.asarray(target_delta, dtype=float)
    c_max = max_equal_cooperativity(device, cavities)

    def errors(C):
        pumps = equal_cooperativity_pumps(device, C, cavities)
        eff = build_effective(device, pumps)
        err = np.concatenate([eff.gamma_eff / tg - 1.0, eff.delta_eff / td - 1.0])
        return pumps, eff, err

    res = minimize_scalar(lambda C: np.max(np.abs(errors(C)[2])),
                          bounds=(1e-3, c_max * (1 - 1e-9)), method="bounded",
                          options={"xatol": 1e-10})
    pumps, eff, err = errors(res.x)
    return RenormalizationCalibration(pumps, float(res.x), eff.gamma_eff, eff.delta_eff, err)
