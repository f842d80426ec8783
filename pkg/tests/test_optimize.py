import numpy as np
import pytest

from conftest import balanced_isolator
from mechcirc.device import MechanicalMode
from mechcirc.effective import PumpConfiguration, build_effective
from mechcirc.errors import DomainError
from mechcirc.optimize import (
    OptimizationTarget,
    achieved_metrics,
    calibrate_renormalization,
    circulator_seed,
    equal_cooperativity_pumps,
    impedance_match,
    isolation_bandwidth,
    isolator_seed,
    max_equal_cooperativity,
    optimize_circulation,
    optimize_isolation,
    recompute_objective,
)
from mechcirc.oracles import (
    conversion_efficiency,
    cooperativity_for_insertion_loss,
    detuning_for_peak,
)
from mechcirc.scattering import power_db, s_matrices

TWO_PI = 2.0 * np.pi


def test_target_paths_and_validation():
    t = OptimizationTarget("circulate", (0, 1, 2))
    assert t.forward_paths == [(1, 0), (2, 1), (0, 2)]
    assert t.backward_paths == [(0, 1), (1, 2), (2, 0)]
    iso = OptimizationTarget("isolate", (0, 1))
    assert iso.forward_paths == [(1, 0)] and iso.backward_paths == [(0, 1)]
    assert OptimizationTarget("isolate", (0, 1), band=(-1.0, 1.0), band_points=5).omega_grid.size == 5
    with pytest.raises(DomainError):
        OptimizationTarget("amplify", (0, 1))
    with pytest.raises(DomainError):
        OptimizationTarget("isolate", (0, 1), band=(1.0, -1.0))
    with pytest.raises(DomainError):
        OptimizationTarget("isolate", (0, 1), band=(-1.0, 1.0), band_points=1)


def test_bare_seed_suppresses_backward_path(device):
    pumps = isolator_seed(device, (0, 1), 4.0, include_off_resonant=False)
    S = s_matrices(build_effective(device, pumps, include_off_resonant=False), device, 0.0)[0]
    # unequal intrinsic damping leaves the equal-cooperativity seed imperfect
    assert power_db(S[0, 1]) < power_db(S[1, 0]) - 10


def test_seed_survives_unreachable_loss(device):
    # the requested loss is below the coupling-efficiency floor; the seed is clamped
    pumps = isolator_seed(device, (0, 1), 0.5, include_off_resonant=False)
    assert np.all(np.isfinite(pumps.photon_number))


@pytest.mark.parametrize("off", [False, True])
def test_isolation_search_meets_target(device, off):
    target = OptimizationTarget("isolate", (0, 1), min_isolation_db=40, max_insertion_loss_db=5.0)
    res = optimize_isolation(device, target, include_off_resonant=off, n_starts=2, max_evals=800)
    assert res.target_met
    assert res.objective <= res.start_objectives[0] + 1e-12
    assert recompute_objective(res, device) == pytest.approx(res.objective, abs=1e-9)
    again = optimize_isolation(device, target, include_off_resonant=off, n_starts=2, max_evals=800)
    np.testing.assert_array_equal(again.pumps.photon_number, res.pumps.photon_number)
    np.testing.assert_array_equal(again.history, res.history)


def test_isolation_supports_reverse_direction(device):
    target = OptimizationTarget("isolate", (1, 0), min_isolation_db=40, max_insertion_loss_db=5.0)
    res = optimize_isolation(device, target, include_off_resonant=False, n_starts=1, max_evals=400)
    assert res.achieved.worst_isolation_db > 40
    with pytest.raises(DomainError):
        optimize_isolation(device, OptimizationTarget("isolate", (0, 2)))


def test_parallel_starts_match_serial(device):
    target = OptimizationTarget("isolate", (0, 1), max_insertion_loss_db=5.0)
    a = optimize_isolation(device, target, include_off_resonant=False, n_starts=3, max_evals=300)
    b = optimize_isolation(device, target, include_off_resonant=False, n_starts=3, max_evals=300,
                           workers=3)
    assert a.start_objectives == b.start_objectives


def test_circulation_search_runs_and_is_reproducible(device):
    a = optimize_circulation(device, n_starts=2, max_evals=400)
    b = optimize_circulation(device, n_starts=2, max_evals=400)
    assert a.objective == b.objective
    assert len(a.achieved.isolation_db) == 3
    assert recompute_objective(a, device) == pytest.approx(a.objective, abs=1e-9)
    with pytest.raises(DomainError):
        optimize_circulation(device, order=(0, 1, 1))


def test_circulator_seed_orientation(device):
    fwd = circulator_seed(device, 1.0, (0.5, 1.0, -0.2), orientation=1)
    rev = circulator_seed(device, 1.0, (0.5, 1.0, -0.2), orientation=-1)
    np.testing.assert_allclose(fwd.phase, -rev.phase)


def test_achieved_metrics_of_fixture(circulator_config):
    target = OptimizationTarget("circulate", (0, 1, 2))
    ach = achieved_metrics(circulator_config.device, circulator_config.pumps, target)
    S = s_matrices(build_effective(circulator_config.device, circulator_config.pumps),
                   circulator_config.device, 0.0)[0]
    assert ach.insertion_loss_db[0] == pytest.approx(-power_db(S[1, 0]))
    assert ach.worst_isolation_db == pytest.approx(np.min(ach.isolation_db))


def _scaled_isolator(device, scale):
    C = cooperativity_for_insertion_loss(2.4, *device.eta[:2])
    base, _ = balanced_isolator(device, C, detuning_for_peak(C, float(np.mean(device.gamma_m))))
    return PumpConfiguration(base.photon_number * scale, base.phase, base.sideband_detuning)


def test_contrast_bandwidth_invariant_under_cooperativity_scaling(device):
    widths = []
    for scale in (1.0, 2.0, 4.0):
        eff = build_effective(device, _scaled_isolator(device, scale), include_off_resonant=False)
        widths.append(isolation_bandwidth(eff, device, [(0, 1)], reference_paths=[(1, 0)]))
    np.testing.assert_allclose(widths, widths[0], rtol=1e-9)
    with pytest.raises(DomainError):
        isolation_bandwidth(eff, device, [(0, 1)], reference_paths=[])


def test_absolute_bandwidth_scales_with_damping(device):
    widths = []
    for factor in (1.0, 3.0):
        mech = [MechanicalMode(m.index, m.omega_m, m.gamma_m * factor) for m in device.mechanics]
        d = device.replace(mechanics=mech)
        C = cooperativity_for_insertion_loss(2.4, *d.eta[:2])
        pumps, _ = balanced_isolator(d, C, detuning_for_peak(C, float(np.mean(d.gamma_m))))
        eff = build_effective(d, pumps, include_off_resonant=False)
        widths.append(isolation_bandwidth(eff, d, [(0, 1)]))
    assert widths[1] / widths[0] == pytest.approx(3.0, rel=1e-3)


def test_impedance_match_prediction(device):
    match = impedance_match(device, 0, 95.0)
    np.testing.assert_allclose(match.reflection, match.predicted_reflection, rtol=1e-9)
    eff = build_effective(device, match.pumps, include_off_resonant=False)
    T = abs(s_matrices(eff, device, 0.0)[0, 1, 0]) ** 2
    assert T == pytest.approx(conversion_efficiency(95, 95, *device.eta[:2]), rel=1e-10)
    with pytest.raises(DomainError):
        impedance_match(device, 0, 0.0)


def test_equal_cooperativity_is_self_consistent(device):
    C = 0.5 * max_equal_cooperativity(device)
    pumps = equal_cooperativity_pumps(device, C)
    eff = build_effective(device, pumps)
    coop = 4 * np.abs(eff.G[:2]) ** 2 / (device.kappa[:2, None] * eff.gamma_eff[None, :])
    np.testing.assert_allclose(coop, C, rtol=1e-10)
    assert equal_cooperativity_pumps(device, 1.01 * max_equal_cooperativity(device)) is None


def test_renormalization_calibration_within_tolerance(device):
    cal = calibrate_renormalization(device, TWO_PI * np.array([190.0, 407.0]),
                                    TWO_PI * np.array([-84.0, 233.0]))
    assert np.max(np.abs(cal.relative_error)) < 0.15
    eff = build_effective(device, cal.pumps)
    np.testing.assert_allclose(eff.gamma_eff, cal.gamma_eff)
