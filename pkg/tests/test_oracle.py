import math

import numpy as np
import pytest

from hcran import controller, oracle, wmmse
from hcran.metrics import BeamformerSet, compute_powers, compute_rates
from hcran.scenario import SystemConfig, build_scenario, channel_stream, draw_channels
from hcran.traffic import QueueState


def test_scalar_closed_form_cases():
    assert oracle.scalar_closed_form(1.0, 0.0, 1.0, 0.1, 5.0) == 0.0
    assert oracle.scalar_closed_form(0.0, 1.0, 1.0, 0.1, 5.0) == 5.0
    p = oracle.scalar_closed_form(1.0, 1.0, 1.0, 0.1, 5.0)
    assert abs(p - (1.0 / math.log(2.0) - 0.1)) < 1e-12
    assert abs(p - 1.3427) < 1e-3
    with pytest.raises(ValueError):
        oracle.scalar_closed_form(1.0, 1.0, 0.0, 0.1, 5.0)


def test_scalar_closed_form_matches_grid():
    rng = np.random.default_rng(0)
    for _ in range(25):
        x_w = float(rng.uniform(0.1, 20.0))
        y_w = float(rng.uniform(0.0, 20.0))
        h = float(rng.uniform(0.1, 3.0))
        phi = float(rng.uniform(0.01, 1.0))
        p_max = float(rng.uniform(0.1, 2.0))
        p_cf = oracle.scalar_closed_form(x_w, y_w, h, phi, p_max)
        p_grid, _ = oracle.power_grid_search(x_w, y_w, h, phi, p_max, 1e-4)
        assert abs(p_cf - p_grid) <= 1e-4 + 1e-12


def tiny_problem(seed=41, tradeoff=20.0, backlog=5.0):
    config = SystemConfig(num_rrh=1, num_rue=1, num_mue=1, antennas_rrh=1,
                          antennas_mbs=2, fronthaul_cap=math.inf,
                          interference_cap=1e-6, tradeoff=tradeoff,
                          rue_dist_min=10.0, rue_dist_max=30.0)
    topo, mbs = build_scenario(config, seed)
    ch = draw_channels(topo, mbs, config, channel_stream(seed))
    queues = QueueState.zeros(1, 1)
    queues.q[:] = backlog
    return controller.build_slot_problem(queues, ch, config), ch, config, mbs


def test_grid_search_slot_zero_weight():
    prob, ch, config, _ = tiny_problem(tradeoff=0.0, backlog=0.0)
    beams, obj = oracle.grid_search_slot(prob, config, resolution=0.05)
    assert obj == 0.0
    assert np.allclose(beams.v, 0.0)


def test_grid_search_slot_matches_closed_form():
    prob, ch, config, _ = tiny_problem()
    beams, obj = oracle.grid_search_slot(prob, config, resolution=2e-3)
    h_amp = float(np.abs(ch.h[0, 0]))
    p_star = oracle.scalar_closed_form(prob.x[0], prob.y[0], h_amp,
                                       float(ch.phi[0]), config.p_max)
    found = float(compute_powers(beams)[0])
    # the 2-D grid quantizes amplitude; allow one diagonal grid step
    step = 2e-3 * math.sqrt(2.0) * (math.sqrt(p_star) + 2e-3)
    assert abs(found - p_star) <= 2 * step + 4e-6


def test_grid_search_dimension_cap():
    config = SystemConfig()   # 4 RUEs x 4 complex dims >> 4 real dims
    topo, mbs = build_scenario(config, 0)
    ch = draw_channels(topo, mbs, config, channel_stream(0))
    prob = controller.build_slot_problem(QueueState.zeros(4, 2), ch, config)
    with pytest.raises(ValueError):
        oracle.grid_search_slot(prob, config, resolution=0.1)


def test_wmmse_agrees_with_grid_oracle():
    prob, ch, config, _ = tiny_problem()
    beams, metrics, _ = wmmse.run_algorithm1(prob, config)
    achieved = float(prob.x @ compute_powers(beams) - prob.y @ compute_rates(ch, beams))
    h_amp = float(np.abs(ch.h[0, 0]))
    _, best = oracle.power_grid_search(prob.x[0], prob.y[0], h_amp,
                                       float(ch.phi[0]), config.p_max, 1e-4)
    assert achieved <= -best + 0.01 * abs(best)


def test_monte_carlo_mse_zero_receiver():
    prob, ch, config, mbs = tiny_problem()
    beams = BeamformerSet(v=np.array([[0.001]], dtype=complex), num_rrh=1, ant_per_rrh=1)
    est = oracle.monte_carlo_mse(0, 0.0, ch, beams, mbs, config.sigma2, 40_000,
                                 np.random.default_rng(0))
    assert abs(est - 1.0) <= 3.0 / math.sqrt(40_000)


def test_monte_carlo_mse_matches_closed_form():
    config = SystemConfig()
    topo, mbs = build_scenario(config, 11)
    ch = draw_channels(topo, mbs, config, channel_stream(11))
    rng = np.random.default_rng(5)
    beams = BeamformerSet(v=0.1 * (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))),
                          num_rrh=2, ant_per_rrh=2)
    u = wmmse.update_receivers(ch, beams)
    closed = wmmse.compute_mses(u, ch, beams)
    est = oracle.monte_carlo_mse(0, complex(u[0]), ch, beams, mbs, config.sigma2,
                                 100_000, np.random.default_rng(6))
    assert abs(est - closed[0]) <= 0.01 * closed[0]


def test_monte_carlo_mse_noise_only():
    config = SystemConfig()
    topo, mbs = build_scenario(config, 17)
    ch = draw_channels(topo, mbs, config, channel_stream(17))
    beams = BeamformerSet.zeros(4, 2, 2)
    u = 123.0 + 45.0j
    est = oracle.monte_carlo_mse(0, u, ch, beams, mbs, config.sigma2, 100_000,
                                 np.random.default_rng(7))
    expect = abs(u) ** 2 * float(ch.phi[0]) + 1.0
    assert abs(est - expect) <= 0.02 * expect


def test_monte_carlo_requires_samples():
    config = SystemConfig()
    topo, mbs = build_scenario(config, 1)
    ch = draw_channels(topo, mbs, config, channel_stream(1))
    with pytest.raises(ValueError):
        oracle.monte_carlo_mse(0, 0.0, ch, BeamformerSet.zeros(4, 2, 2), mbs,
                               config.sigma2, 100, np.random.default_rng(0))
