import math

import numpy as np
import pytest

from fluxcat import (DephasingChannel, EnergyMeasurement, FluxBinMeasurement,
                     FluxGrid, GridState, OutcomeDistribution,
                     StateProjectionMeasurement, TimeDistribution, dephase,
                     averaged_bound, bhattacharyya, gaussian_time_average,
                     optimized_unitary_bound, quantum_coherence,
                     simulate_protocol, solve_circuit, to_grid, unitary_bound,
                     weak_dephasing_bound, HoBasisConfig)
from fluxcat import witness as witness_mod
from fluxcat.errors import BinningMismatchError, ConfigError, MonotonicityError

SIGMA_REF = math.sqrt(3.2579436243020165e-4)


def dist(probs):
    p = np.asarray(probs, dtype=float)
    return OutcomeDistribution(p, np.arange(p.size + 1, dtype=float), "energy")


@pytest.fixture(scope="module")
def witness_grid():
    return FluxGrid(-0.4, 1.4, 1024)


@pytest.fixture(scope="module")
def witness_state(suny, basis_cfg, suny_result, suny_targets, witness_grid):
    return to_grid(suny_result.states[:, suny_targets[1]], suny, basis_cfg, witness_grid)


@pytest.fixture(scope="module")
def energy_measurement(suny, witness_grid):
    return EnergyMeasurement(suny, witness_grid, n_bins=128)


def test_bhattacharyya_basic_values():
    assert bhattacharyya(dist([0.3, 0.7]), dist([0.3, 0.7])) == pytest.approx(1.0, abs=1e-12)
    assert bhattacharyya(dist([1.0, 0.0]), dist([0.0, 1.0])) == 0.0
    assert bhattacharyya(dist([0.5, 0.5]), dist([1.0, 0.0])) == pytest.approx(
        math.sqrt(0.5), rel=1e-12)


def test_bhattacharyya_binning_mismatch():
    p = dist([0.5, 0.5])
    q = OutcomeDistribution(np.array([0.5, 0.5]), np.array([0.0, 0.7, 2.0]), "energy")
    with pytest.raises(BinningMismatchError):
        bhattacharyya(p, q)


def test_unitary_bound_values():
    assert unitary_bound(1.0, 2.0) == 0.0
    assert unitary_bound(0.0, 1.0) == pytest.approx((math.pi / 2) ** 2, rel=1e-12)
    with pytest.raises(ConfigError):
        unitary_bound(0.5, 0.0)
    with pytest.raises(ConfigError):
        unitary_bound(1.5, 1.0)


def test_averaged_bound_delta_reduces_to_unitary():
    for t0 in (0.5, 2.0):
        mu = TimeDistribution.delta(t0)
        for b in (0.05, 0.3, 0.7, 0.95):
            closed = unitary_bound(b, t0)
            numeric = averaged_bound(b, mu, i_max=100.0)
            assert numeric == pytest.approx(closed, rel=1e-9)


def test_averaged_bound_trivial_cases():
    mu = TimeDistribution.gaussian(1.0)
    assert averaged_bound(1.0, mu, i_max=1.0) == 0.0
    with pytest.raises(ConfigError):
        averaged_bound(0.5, TimeDistribution.delta(0.0), i_max=1.0)


def test_averaged_bound_monotonicity_guard(monkeypatch):
    calls = iter([1.0, 0.2, 0.8, 0.1] + [0.05] * 200)
    monkeypatch.setattr(witness_mod, "response_floor", lambda i, mu: next(calls))
    with pytest.raises(MonotonicityError):
        witness_mod.averaged_bound(0.5, TimeDistribution.gaussian(1.0), i_max=1.0)


def test_weak_dephasing_bound_values():
    assert weak_dephasing_bound(1.0, 2.0) == 0.0
    assert weak_dephasing_bound(math.exp(-0.5), 1.0) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ConfigError):
        weak_dephasing_bound(0.0, 1.0)


def test_weak_matches_numeric_inversion_in_weak_limit():
    gamma_w = 1.0
    mu = TimeDistribution.gaussian(gamma_w)
    for b in (0.996, 0.999, 0.9999):
        weak = weak_dephasing_bound(b, gamma_w)
        numeric = averaged_bound(b, mu, i_max=10.0)
        assert gamma_w**2 >= 100 * numeric  # inside the weak-dephasing regime
        assert weak == pytest.approx(numeric, rel=0.05)


def test_flux_binned_outcomes_are_blind(witness_state, suny):
    # flux projectors commute with the dynamics, so q = p and nothing is certified
    meas = FluxBinMeasurement(witness_state.grid, 128)
    res_delta = simulate_protocol(witness_state, TimeDistribution.delta(3.0), suny,
                                  measurement=meas)
    assert res_delta.b == pytest.approx(1.0, abs=1e-12)
    assert res_delta.bound_i == pytest.approx(0.0, abs=1e-12)
    res_gauss = simulate_protocol(witness_state, TimeDistribution.gaussian(4 * SIGMA_REF),
                                  suny, measurement=meas)
    assert res_gauss.b == pytest.approx(1.0, abs=1e-10)
    assert res_gauss.bound_i < 1e-8


def test_identity_dynamics_certify_nothing(witness_state, suny, energy_measurement):
    res = simulate_protocol(witness_state, TimeDistribution.delta(0.0), suny,
                            measurement=energy_measurement)
    assert res.b == 1.0 and res.bound_i == 0.0


def test_delta_protocol_sound_and_useful(witness_state, suny, energy_measurement):
    true_i = quantum_coherence(witness_state)
    ladder = np.array([0.25, 0.5, 1.0, 2.0, 4.0]) / math.sqrt(true_i)
    best = optimized_unitary_bound(witness_state, suny, ladder, n_bins=128)
    assert best.method == "exact-unitary"
    assert best.bound_i <= true_i * (1 + 1e-9)
    assert best.bound_i >= 0.1 * true_i


def test_gaussian_protocol_sound_and_positive(witness_state, suny, energy_measurement):
    true_i = quantum_coherence(witness_state)
    res = simulate_protocol(witness_state, TimeDistribution.gaussian(4 * SIGMA_REF),
                            suny, measurement=energy_measurement)
    assert res.method == "numeric-inversion"
    assert 0.0 < res.bound_i <= true_i * (1 + 1e-9)


def test_weak_limit_tightness_constructed_cat():
    grid = FluxGrid(-0.6, 0.6, 1024)
    sigma, sep = 0.02, 0.4
    psi = (np.exp(-(grid.phi - sep / 2) ** 2 / (4 * sigma**2))
           + np.exp(-(grid.phi + sep / 2) ** 2 / (4 * sigma**2)))
    psi /= math.sqrt(np.sum(psi**2) * grid.dphi)
    cat = GridState(grid, "pure", psi)
    true_i = quantum_coherence(cat)
    gamma_w = math.sqrt(100 * true_i)
    mu = TimeDistribution.gaussian(gamma_w)
    meas = StateProjectionMeasurement(cat)
    dephased = dephase(cat, DephasingChannel(gamma_w))
    b = bhattacharyya(meas.probabilities(cat), meas.probabilities(dephased))
    weak = weak_dephasing_bound(b, gamma_w)
    numeric = averaged_bound(b, mu, i_max=((grid.phi_max - grid.phi_min) / 2) ** 2)
    assert weak == pytest.approx(true_i, rel=0.10)
    assert numeric == pytest.approx(true_i, rel=0.10)
    assert numeric <= true_i * (1 + 1e-9)


def test_weak_limit_tightness_energy_basis_reference(suny, basis_cfg):
    params = suny.with_phi_x(0.0)
    res = solve_circuit(params, basis_cfg)
    grid = FluxGrid(-0.9, 0.9, 1024)
    ground = to_grid(res.states[:, 0], params, basis_cfg, grid)
    true_i = quantum_coherence(ground)
    gamma_w = math.sqrt(100 * true_i)
    out = simulate_protocol(ground, TimeDistribution.gaussian(gamma_w), params, n_bins=256)
    assert out.bound_i == pytest.approx(true_i, rel=0.10)
    assert out.bound_i <= true_i * (1 + 1e-9)


def test_soundness_sweep(suny, basis_cfg, suny_result, suny_targets, witness_grid,
                         witness_state, energy_measurement):
    i0, i1 = suny_targets
    s0 = to_grid(suny_result.states[:, i0], suny, basis_cfg, witness_grid)
    s1 = witness_state
    ground = to_grid(suny_result.states[:, 0], suny, basis_cfg, witness_grid)
    mixed = dephase(s1, DephasingChannel(4 * SIGMA_REF))
    catg = FluxGrid(-0.6, 0.6, 1024)
    psi = (np.exp(-(catg.phi - 0.2) ** 2 / (4 * 0.02**2))
           + np.exp(-(catg.phi + 0.2) ** 2 / (4 * 0.02**2)))
    psi /= math.sqrt(np.sum(psi**2) * catg.dphi)
    cat = GridState(catg, "pure", psi)

    states = [s0, s1, ground, mixed, cat]
    checked = 0
    for state in states:
        true_i = quantum_coherence(state)
        meas = energy_measurement if state.grid is witness_grid else None
        for mu in (TimeDistribution.delta(0.5 / math.sqrt(true_i)),
                   TimeDistribution.delta(2.0 / math.sqrt(true_i)),
                   TimeDistribution.gaussian(4 * SIGMA_REF),
                   TimeDistribution.gaussian(16 * SIGMA_REF)):
            out = simulate_protocol(state, mu, suny, n_bins=128, measurement=meas)
            assert out.bound_i <= true_i * (1 + 1e-9) + 1e-15, (state.kind, mu.kind)
            checked += 1
    assert checked >= 20


def test_bound_never_increases_under_coarsening(witness_state, suny):
    true_i = quantum_coherence(witness_state)
    for mu in (TimeDistribution.delta(1.0 / math.sqrt(true_i)),
               TimeDistribution.gaussian(4 * SIGMA_REF)):
        bounds = []
        for n_bins in (256, 128, 64, 32):
            out = simulate_protocol(witness_state, mu, suny, n_bins=n_bins)
            bounds.append(out.bound_i)
        for fine, coarse in zip(bounds, bounds[1:]):
            assert coarse <= fine * (1 + 1e-9) + 1e-12


def test_time_averaged_unitaries_equal_kernel_channel(suny, basis_cfg, suny_result,
                                                      suny_targets):
    grid = FluxGrid(-1.0, 2.0, 512)
    state = to_grid(suny_result.states[:, suny_targets[1]], suny, basis_cfg, grid)
    scales_gamma = math.sqrt(2 * 5.943662080379479e-4)  # sqrt(hbar/(C omega))
    for gamma in (scales_gamma, 4 * SIGMA_REF):
        averaged = gaussian_time_average(state, gamma)
        kernel = dephase(state, DephasingChannel(gamma))
        assert np.max(np.abs(averaged.data - kernel.data)) < 1e-10


def test_energy_measurement_bin_count_constraint(suny, witness_grid):
    with pytest.raises(ConfigError):
        EnergyMeasurement(suny, witness_grid, n_bins=100)  # must divide 256
