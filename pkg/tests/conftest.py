"""Shared fixtures and an independent reference solver."""

from __future__ import annotations

import numpy as np
import pytest

from mechcirc.config import data_path, load_config
from mechcirc.device import CavityMode, DeviceModel, MechanicalMode, photons_for_cooperativity
from mechcirc.effective import PumpConfiguration
from mechcirc.oracles import TwoPortWorkingPoint, balanced_cooperativity, isolation_phase

TWO_PI = 2.0 * np.pi


def full_system_s(device, effective, omega):
    """Scattering matrices from the cavity-plus-mechanics linear system.

    Keeps the mechanical amplitudes as unknowns instead of eliminating them,
    so it shares no code path with the reduced drift-matrix solve. Only the
    resonant couplings ``G`` enter; renormalized mechanics come in through
    ``delta_eff`` and ``gamma_eff``.
    """
    nc, nm = effective.G.shape
    n = nc + nm
    out = []
    for w in np.atleast_1d(omega):
        A = np.zeros((n, n), complex)
        A[:nc, :nc] = np.diag(device.kappa / 2.0 - 1j * w)
        A[:nc, nc:] = 1j * effective.G
        A[nc:, :nc] = 1j * effective.G.conj().T
        A[nc:, nc:] = np.diag(effective.gamma_eff / 2.0 - 1j * (w + effective.delta_eff))
        rhs = np.zeros((n, nc), complex)
        rhs[:nc, :] = np.diag(np.sqrt(device.kappa_ext))
        amps = np.linalg.solve(A, rhs)
        out.append(np.sqrt(device.kappa_ext)[:, None] * amps[:nc] - np.eye(nc))
    return np.array(out)


def balanced_isolator(device, C, delta, gammas=None):
    """Bare isolator pumps on cavities 1 and 2 with balanced arms and isolating phase.

    Returns the pumps and the matching two-port working point.
    """
    gam = device.gamma_m if gammas is None else np.asarray(gammas, dtype=float)
    Cm = np.full((2, 2), float(C))
    wp = TwoPortWorkingPoint(Cm, 0.0, delta, gam, device.eta[:2])
    Cm[1, 1] = balanced_cooperativity(wp)
    wp = TwoPortWorkingPoint(Cm, 0.0, delta, gam, device.eta[:2])
    n = np.zeros(device.g0.shape)
    phi = np.zeros(device.g0.shape)
    n[:2] = photons_for_cooperativity(Cm, device.g0[:2], device.kappa[:2, None], gam[None, :])
    phi[1, 1] = isolation_phase(wp)
    return PumpConfiguration(n, phi, np.array([delta, -delta])), wp.with_phase(phi[1, 1])


@pytest.fixture(scope="session")
def device():
    return load_config(data_path("device.toml")).device


@pytest.fixture(scope="session")
def isolator_config():
    return load_config(data_path("isolator.toml"))


@pytest.fixture(scope="session")
def circulator_config():
    return load_config(data_path("circulator.toml"))


def make_two_port(rng, n_mech=2):
    """Random two-cavity device with well-separated mechanical modes."""
    cav = [CavityMode(k + 1, TWO_PI * (5e9 + 1e8 * k), TWO_PI * rng.uniform(1e5, 5e5),
                      TWO_PI * rng.uniform(5e5, 2e6)) for k in range(2)]
    mech = [MechanicalMode(j + 1, TWO_PI * (4e6 + 1.3e6 * j), TWO_PI * rng.uniform(3, 30))
            for j in range(n_mech)]
    return DeviceModel(cav, mech, TWO_PI * rng.uniform(10, 50, (2, n_mech)))


@pytest.fixture
def two_port_device():
    return make_two_port(np.random.default_rng(7))


ACCEPTANCE_LINES = []


def record_acceptance(number, title, passed, detail):
    """Print and remember one PASS/FAIL line for the acceptance summary."""
    line = f"{'PASS' if passed else 'FAIL'}  criterion {number:2d} {title}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
