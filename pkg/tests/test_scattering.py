import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import full_system_s
from mechcirc.effective import PumpConfiguration, build_effective
from mechcirc.errors import DomainError, NumericalError
from mechcirc.scattering import (
    absorption_budget,
    assemble_drift_matrix,
    max_singular_value,
    mechanical_susceptibility,
    phase_sweep,
    power_budget,
    power_db,
    s_matrices,
    scattering_matrix,
    solve_grid,
    spectrum_sweep,
)

TWO_PI = 2.0 * np.pi

pump_arrays = st.tuples(
    st.lists(st.floats(1e3, 3e6), min_size=6, max_size=6),
    st.lists(st.floats(-np.pi, np.pi), min_size=6, max_size=6),
    st.lists(st.floats(-500.0, 500.0), min_size=2, max_size=2),
)


def _pumps(arrays):
    n, phi, d0 = arrays
    return PumpConfiguration(np.reshape(n, (3, 2)), np.reshape(phi, (3, 2)), TWO_PI * np.array(d0))


def test_isolator_fixture_frozen_values(isolator_config):
    # reference entries from the unreduced cavity-plus-mechanics solve
    eff = build_effective(isolator_config.device, isolator_config.pumps)
    S = scattering_matrix(eff, isolator_config.device, 0.0)
    assert S[1, 0] == pytest.approx(-0.5035647803034391 - 0.3494169614995877j, abs=1e-12)
    assert S[0, 1] == pytest.approx(-2.9991721808878975e-06 - 4.108542636714631e-07j, abs=1e-12)
    assert S[2, 2] == pytest.approx(0.053333333333333233, abs=1e-12)


def test_circulator_fixture_frozen_values(circulator_config):
    eff = build_effective(circulator_config.device, circulator_config.pumps)
    S = scattering_matrix(eff, circulator_config.device, 0.0)
    assert S[1, 0] == pytest.approx(-0.1918505889582134 - 0.3976204255186691j, abs=1e-12)
    assert S[2, 1] == pytest.approx(0.35483652393649234 + 0.19667490621810946j, abs=1e-12)
    assert S[0, 2] == pytest.approx(0.06273798844578721 + 0.40081384093560496j, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(arrays=pump_arrays, off=st.booleans())
def test_matches_unreduced_solver(device, arrays, off):
    eff = build_effective(device, _pumps(arrays), include_off_resonant=off)
    omega = TWO_PI * np.array([-2e3, -150.0, 0.0, 75.0, 1e4])
    np.testing.assert_allclose(s_matrices(eff, device, omega), full_system_s(device, eff, omega),
                               atol=1e-11)


@settings(max_examples=40, deadline=None)
@given(arrays=pump_arrays)
def test_passivity_rank_and_budgets(device, arrays):
    eff = build_effective(device, _pumps(arrays))
    res = solve_grid(eff, device, TWO_PI * np.linspace(-3e3, 3e3, 41))
    assert np.max(max_singular_value(res)) <= 1 + 1e-9
    assert np.max(res.rank_residual) < 1e-10
    np.testing.assert_allclose(power_budget(res), 1.0, atol=1e-9)
    np.testing.assert_allclose(absorption_budget(res), 1.0, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(arrays=pump_arrays)
def test_zero_phases_reciprocal(device, arrays):
    n, _, d0 = arrays
    eff = build_effective(device, _pumps((n, [0.0] * 6, d0)))
    S = s_matrices(eff, device, TWO_PI * np.linspace(-500, 500, 11))
    np.testing.assert_allclose(S, np.swapaxes(S, 1, 2), atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(arrays=pump_arrays)
def test_phase_reversal_transposes(device, arrays):
    # negating every phase maps S to its transpose
    pumps = _pumps(arrays)
    omega = TWO_PI * np.linspace(-500, 500, 7)
    S = s_matrices(build_effective(device, pumps), device, omega)
    R = s_matrices(build_effective(device, pumps.negated_phases()), device, omega)
    np.testing.assert_allclose(R, np.swapaxes(S, 1, 2), atol=1e-13)


def test_pumps_off_reflection_is_flat(device):
    eff = build_effective(device, PumpConfiguration.off())
    res = spectrum_sweep(eff, device, -TWO_PI * 1e3, TWO_PI * 1e3, 5)
    for k in range(3):
        bare = device.kappa_ext[k] / (device.kappa[k] / 2 - 1j * res.omega_grid) - 1
        np.testing.assert_allclose(res.s(k, k), bare, atol=1e-15)
        assert res.s(k, k)[2] == pytest.approx(2 * device.eta[k] - 1, abs=1e-15)
    off_diagonal = res.s_matrices * (1 - np.eye(3))
    assert np.max(np.abs(off_diagonal)) < 1e-15


def test_drift_matrix_entries(isolator_config):
    d = isolator_config.device
    eff = build_effective(d, isolator_config.pumps)
    M = assemble_drift_matrix(eff, d, 0.0)
    chi = mechanical_susceptibility(0.0, eff.delta_eff, eff.gamma_eff)
    expected = np.diag(d.kappa / 2) + (eff.G * chi) @ eff.G.conj().T
    np.testing.assert_allclose(M.entries, expected, atol=1e-13 * np.max(np.abs(expected)))
    assert M.rank_residual < 1e-10


def test_susceptibility_requires_damping():
    with pytest.raises(DomainError):
        mechanical_susceptibility(0.0, [0.0, 0.0], [1.0, 0.0])


def test_singular_resolvent_raises(device):
    # absurd photon numbers push the resolvent past the condition limit
    pumps = PumpConfiguration(np.full((3, 2), 1e30), np.zeros((3, 2)), np.zeros(2))
    eff = build_effective(device, pumps, include_off_resonant=False)
    with pytest.raises(NumericalError) as info:
        solve_grid(eff, device, [TWO_PI * 1e3])
    assert info.value.condition_number > 1e12


def test_sweep_argument_checks(device):
    eff = build_effective(device, PumpConfiguration.off())
    with pytest.raises(DomainError):
        spectrum_sweep(eff, device, 1.0, 0.0, 10)
    with pytest.raises(DomainError):
        spectrum_sweep(eff, device, 0.0, 1.0, 1)
    with pytest.raises(DomainError):
        phase_sweep(device, PumpConfiguration.off(), (5, 0), [0.0], [0.0])


def test_phase_sweep_mirror_and_reciprocal_column(isolator_config):
    d, p = isolator_config.device, isolator_config.pumps
    phi = np.deg2rad(np.linspace(-180, 180, 37))
    omega = TWO_PI * np.linspace(-500, 500, 21)
    S = phase_sweep(d, p, (1, 1), phi, omega)
    zero = int(np.argmin(np.abs(phi)))
    np.testing.assert_allclose(S[zero, :, 0, 1], S[zero, :, 1, 0], atol=1e-13)
    # |S21(phi)| = |S12(-phi)| on the whole grid
    np.testing.assert_allclose(np.abs(S[:, :, 1, 0]), np.abs(S[::-1, :, 0, 1]), atol=1e-13)
    # one isolation stripe per sign of phi: the deepest S12 point sits at negative phase
    depth = power_db(S[:, omega.size // 2, 0, 1])
    assert phi[np.argmin(depth)] < 0
    depth21 = power_db(S[:, omega.size // 2, 1, 0])
    assert phi[np.argmin(depth21)] > 0


def test_power_db_zero_is_minus_inf():
    assert power_db(0.0) == -np.inf
    assert power_db(0.1) == pytest.approx(-20.0)
