import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mechcirc.config import data_path, load_toml
from mechcirc.effective import PumpConfiguration, build_effective
from mechcirc.errors import CalibrationError, ConfigError, DomainError, ReferredNoiseOverflowError
from mechcirc.noise import (
    HBAR,
    AmplifierChain,
    ThermalEnvironment,
    added_noise_per_path,
    bose_occupancy,
    fit_occupancies,
    infer_amp_noise,
    output_noise_psd,
    output_occupancy,
    read_psd_csv,
    referred_noise_weights,
)
from mechcirc.scattering import solve_grid

TWO_PI = 2.0 * np.pi
FORWARD = [(1, 0), (2, 1), (0, 2)]
BACKWARD = [(0, 1), (1, 2), (2, 0)]


def test_bose_occupancy_values():
    # 5 GHz at 50 mK, evaluated by hand from hbar omega / k_B T = 4.7987
    assert bose_occupancy(TWO_PI * 5e9, 0.05) == pytest.approx(0.008304373364239451, rel=1e-9)
    assert bose_occupancy(TWO_PI * 5e9, 0.0) == 0.0
    # classical limit k_B T / hbar omega
    assert bose_occupancy(TWO_PI * 4e6, 1.0) == pytest.approx(5208.8, rel=1e-3)
    with pytest.raises(DomainError):
        bose_occupancy(0.0, 1.0)
    with pytest.raises(DomainError):
        bose_occupancy(1.0, -1.0)


@settings(max_examples=30, deadline=None)
@given(occ=st.floats(0.0, 100.0), n=st.lists(st.floats(1e3, 3e6), min_size=6, max_size=6),
       phi=st.lists(st.floats(-np.pi, np.pi), min_size=6, max_size=6))
def test_equilibrium_output_equals_bath(device, occ, n, phi):
    pumps = PumpConfiguration(np.reshape(n, (3, 2)), np.reshape(phi, (3, 2)), np.zeros(2))
    res = solve_grid(build_effective(device, pumps), device, TWO_PI * np.linspace(-500, 500, 9))
    env = ThermalEnvironment(np.full(3, occ), np.full(2, occ))
    for port in range(3):
        np.testing.assert_allclose(output_occupancy(res, env, port), occ, rtol=1e-9, atol=1e-12)


def test_pumps_off_output_is_own_bath(device):
    res = solve_grid(build_effective(device, PumpConfiguration.off()), device, [0.0, 1e4])
    env = ThermalEnvironment([0.1, 0.2, 0.3], [50.0, 80.0])
    for port in range(3):
        np.testing.assert_allclose(output_occupancy(res, env, port), env.cavity_occupancy[port])


def test_added_noise_fixture_values(circulator_config):
    # frozen from the bundled environment and circulator pumps
    raw = load_toml(data_path("noise_env.toml"))
    env = ThermalEnvironment(raw["occupancy"]["cavity"], raw["occupancy"]["mechanics"])
    W = referred_noise_weights(circulator_config.device, circulator_config.pumps, FORWARD, BACKWARD)
    np.testing.assert_allclose(W @ env.vector(),
                               [3.582914, 5.74175637, 4.01995031, 3.53338854, 4.46661144,
                                5.41413081], rtol=1e-6)


def test_added_noise_zero_when_cold(circulator_config):
    d, p = circulator_config.device, circulator_config.pumps
    res = solve_grid(build_effective(d, p), d, [0.0])
    cold = ThermalEnvironment.zero()
    for path in FORWARD:
        assert added_noise_per_path(res, cold, path)[0] == pytest.approx(0.0, abs=1e-15)
    hot_signal = ThermalEnvironment([5.0, 0, 0], [0, 0])
    # the signal port's own occupancy is input noise and is subtracted before referral
    s2 = abs(res.s_matrices[0, 1, 0]) ** 2
    expected = (output_occupancy(res, hot_signal, 1)[0] - 5.0 * s2) / s2
    assert added_noise_per_path(res, hot_signal, (1, 0))[0] == pytest.approx(expected, rel=1e-12)


def test_referral_refused_for_blocked_path(isolator_config):
    d, p = isolator_config.device, isolator_config.pumps
    res = solve_grid(build_effective(d, p), d, [0.0])
    with pytest.raises(ReferredNoiseOverflowError):
        added_noise_per_path(res, ThermalEnvironment.zero(), (2, 0))


def test_amplifier_round_trip():
    gains = np.array([67.5, 64.0, 60.5])
    n_amp = np.array([23.0, 23.0, 33.0])
    omega = TWO_PI * np.array([9.55e9, 9.82e9, 11.32e9])
    psd = HBAR * omega * 10 ** (gains / 10) * (1 + n_amp)
    np.testing.assert_allclose(infer_amp_noise(psd, omega, gains), n_amp, rtol=1e-12)
    with pytest.raises(CalibrationError):
        infer_amp_noise(0.01 * psd, omega, gains)


def test_psd_scales_with_linear_gain(circulator_config):
    d, p = circulator_config.device, circulator_config.pumps
    res = solve_grid(build_effective(d, p), d, [0.0, 100.0])
    env = ThermalEnvironment([0.0, 0.03, 0.9], [57.0, 0.0])
    a = output_noise_psd(res, env, AmplifierChain([60.0, 60, 60], [20.0, 20, 20]), 1, TWO_PI * 9.8e9)
    b = output_noise_psd(res, env, AmplifierChain([70.0, 70, 70], [20.0, 20, 20]), 1, TWO_PI * 9.8e9)
    np.testing.assert_allclose(b / a, 10.0)
    with pytest.raises(DomainError):
        AmplifierChain([1.0], [1.0, 2.0])


def test_fit_recovers_synthetic_occupancies(circulator_config):
    W = referred_noise_weights(circulator_config.device, circulator_config.pumps, FORWARD, BACKWARD)
    truth = np.array([0.0, 0.05, 0.5, 40.0, 3.0])
    fit = fit_occupancies(W, W @ truth, 3)
    np.testing.assert_allclose(fit.relative_error, 0.0, atol=1e-9)
    mm = fit_occupancies(W, W @ truth, 3, method="minimax")
    np.testing.assert_allclose(mm.relative_error, 0.0, atol=1e-7)


def test_minimax_never_worse_than_lsq(circulator_config):
    W = referred_noise_weights(circulator_config.device, circulator_config.pumps, FORWARD, BACKWARD)
    targets = [4.0, 6.5, 3.6, 4.0, 4.0, 5.5]
    lsq = fit_occupancies(W, targets, 3)
    mm = fit_occupancies(W, targets, 3, method="minimax")
    assert np.max(np.abs(mm.relative_error)) <= np.max(np.abs(lsq.relative_error)) + 1e-9
    assert np.all(mm.env.vector() >= 0)


def test_fit_argument_checks():
    W = np.ones((2, 3))
    with pytest.raises(DomainError):
        fit_occupancies(W, [1.0, 0.0], 1)
    with pytest.raises(DomainError):
        fit_occupancies(W, [1.0, 1.0], 1, method="bogus")
    held = fit_occupancies(W, [2.0, 2.0], 1, fit_cavities=False, cavity_occupancy=[1.0])
    assert held.env.cavity_occupancy[0] == 1.0
    np.testing.assert_allclose(held.predicted, 2.0)


def test_read_psd_csv(tmp_path):
    good = tmp_path / "psd.csv"
    good.write_text("# trace\nfreq_hz,psd_w_per_hz\n1e9,2e-18\n2e9,3e-18\n")
    f, s = read_psd_csv(good)
    np.testing.assert_allclose(f, [1e9, 2e9])
    np.testing.assert_allclose(s, [2e-18, 3e-18])
    for text in ("f,p\n1,2\n", "freq_hz,psd_w_per_hz\n1,x\n", "freq_hz,psd_w_per_hz\n1,-2\n",
                 "freq_hz,psd_w_per_hz\n", ""):
        bad = tmp_path / "bad.csv"
        bad.write_text(text)
        with pytest.raises(ConfigError):
            read_psd_csv(bad)


def test_environment_from_temperatures(device):
    env = ThermalEnvironment.from_temperatures(device, 0.0, 0.02)
    np.testing.assert_allclose(env.cavity_occupancy, 0.0)
    assert env.mech_occupancy[0] == pytest.approx(bose_occupancy(device.omega_m[0], 0.02))
    with pytest.raises(DomainError):
        ThermalEnvironment([-1.0], [0.0])
