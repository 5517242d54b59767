"""Self-contained oracle and invariant suite behind the `verify` CLI command.

Each check is deterministic (fixed seeds), cheap enough for CI, and validates a
solver-path result against an independent derivation from this package's oracle
module or a hand-computed value.
"""

from __future__ import annotations

import math

import numpy as np

from . import controller, harness, metrics, oracle, qcqp, wmmse
from .scenario import ChannelState, SystemConfig, build_scenario, channel_stream, draw_channels
from .traffic import QueueState, TrafficConfig, update_actual_queue, update_virtual_queue


def _tiny_config(**overrides) -> SystemConfig:
    base = dict(num_rrh=1, num_rue=1, num_mue=1, antennas_rrh=1, antennas_mbs=2,
                fronthaul_cap=math.inf, interference_cap=1e-6, tradeoff=0.0,
                slots=10, rue_dist_min=10.0, rue_dist_max=30.0)
    base.update(overrides)
    return SystemConfig(**base)


def _random_channels(config: SystemConfig, seed: int) -> ChannelState:
    topo, mbs = build_scenario(config, seed)
    return draw_channels(topo, mbs, config, channel_stream(seed))


def check_fading_normalization() -> bool:
    rng = np.random.default_rng(7)
    xi = (rng.standard_normal(100_000) + 1j * rng.standard_normal(100_000)) / math.sqrt(2)
    return abs(np.mean(np.abs(xi) ** 2) - 1.0) < 0.02


def check_mbs_power_split() -> bool:
    config = SystemConfig()
    _, mbs = build_scenario(config, seed=3)
    return abs(np.sum(np.abs(mbs.v0) ** 2) - config.p_mbs) < 1e-9


def check_queue_updates() -> bool:
    ok = np.allclose(update_actual_queue([5.0, 1.0, 0.0], [2.0, 3.0, 0.0], [1.0, 2.0, 0.0]),
                     [4.0, 2.0, 0.0])
    ok &= np.allclose(update_virtual_queue([0.0, 0.5], [0.1, 0.3], 0.2), [0.0, 0.6])
    return bool(ok)


def check_mse_monte_carlo() -> bool:
    config = _tiny_config(num_rue=2, num_mue=2, antennas_rrh=2, num_rrh=2)
    channels = _random_channels(config, seed=11)
    _, mbs = build_scenario(config, seed=11)
    rng = np.random.default_rng(5)
    beams = metrics.BeamformerSet(
        v=0.1 * (rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))),
        num_rrh=2, ant_per_rrh=2)
    u = wmmse.update_receivers(channels, beams)
    closed = wmmse.compute_mses(u, channels, beams)
    est = oracle.monte_carlo_mse(0, complex(u[0]), channels, beams, mbs,
                                 config.sigma2, 100_000, np.random.default_rng(6))
    return abs(est - closed[0]) <= 0.01 * max(closed[0], 1e-12)


def check_receiver_minimizes_mse() -> bool:
    config = _tiny_config(num_rue=2, num_mue=1, antennas_rrh=2)
    channels = _random_channels(config, seed=21)
    rng = np.random.default_rng(9)
    beams = metrics.BeamformerSet(
        v=0.2 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))),
        num_rrh=1, ant_per_rrh=2)
    u = wmmse.update_receivers(channels, beams)
    e_star = wmmse.compute_mse(0, complex(u[0]), channels, beams)
    grid = np.arange(-5e-3, 5e-3 + 1e-3, 1e-3)
    for dre in grid:
        for dim in grid:
            e = wmmse.compute_mse(0, complex(u[0] + dre + 1j * dim), channels, beams)
            if e < e_star - 1e-12:
                return False
    return True


def check_rate_mse_identity() -> bool:
    config = _tiny_config(num_rue=3, num_mue=2, antennas_rrh=2, num_rrh=2)
    channels = _random_channels(config, seed=31)
    rng = np.random.default_rng(13)
    beams = metrics.BeamformerSet(
        v=0.15 * (rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))),
        num_rrh=2, ant_per_rrh=2)
    u = wmmse.update_receivers(channels, beams)
    e = wmmse.compute_mses(u, channels, beams)
    rates = metrics.compute_rates(channels, beams)
    return bool(np.max(np.abs(rates + np.log2(e))) <= 1e-9)


def check_scalar_closed_form() -> bool:
    p_star = oracle.scalar_closed_form(1.0, 1.0, 1.0, 0.1, 10.0)
    if abs(p_star - (1.0 / math.log(2.0) - 0.1)) > 1e-12:
        return False
    p_grid, _ = oracle.power_grid_search(1.0, 1.0, 1.0, 0.1, 10.0, 1e-4)
    return abs(p_star - p_grid) <= 1e-4


def check_qcqp_certificates() -> bool:
    rng = np.random.default_rng(17)
    for _ in range(20):
        k_b, d = 2, 3
        basis = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        quad = basis @ basis.conj().T + 0.1 * np.eye(d)
        lin = rng.standard_normal((k_b, d)) + 1j * rng.standard_normal((k_b, d))
        g = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        cons = [qcqp.QuadConstraint(form=np.eye(d, dtype=complex), weights=np.ones(k_b),
                                    cap=float(rng.uniform(0.5, 2.0)), kind="power"),
                qcqp.QuadConstraint(form=np.outer(g, g.conj()), weights=np.ones(k_b),
                                    cap=float(rng.uniform(0.5, 2.0)), kind="interference")]
        sol = qcqp.solve(qcqp.QcqpProblem(quad=quad, lin=lin, constraints=cons))
        if sol.kkt_residual > 1e-6 or sol.status != "optimal":
            return False
    # 1-D clipped case: min x^2 - 2x s.t. x^2 <= 0.25 -> x* = 0.5
    x, *_ = qcqp.solve_real(np.array([[1.0]]), np.array([[1.0]]),
                            np.array([[[1.0]]]), np.array([[1.0]]), np.array([0.25]))
    return abs(float(x[0, 0]) - 0.5) <= 1e-6


def check_wmmse_against_grid() -> bool:
    config = _tiny_config(tradeoff=20.0)
    channels = _random_channels(config, seed=41)
    queues = QueueState.zeros(1, 1)
    queues.q[:] = 5.0
    problem = controller.build_slot_problem(queues, channels, config)
    beams, _, _ = wmmse.run_algorithm1(problem, config)
    h_amp = float(np.abs(channels.h[0, 0]))
    _, obj_best = oracle.power_grid_search(problem.x[0], problem.y[0], h_amp,
                                           float(channels.phi[0]), config.p_max, 1e-4)
    # the oracle maximizes Y R - X p; the slot problem minimizes the negation
    achieved = float(problem.x[0] * metrics.compute_powers(beams)[0]
                     - problem.y[0] * metrics.compute_rates(channels, beams)[0])
    return achieved <= -obj_best + 0.01 * abs(obj_best) + 1e-9


def check_drift_inequality_run() -> bool:
    config = SystemConfig(slots=200, tradeoff=20.0)
    tr = TrafficConfig.for_rues(config.num_rue, 2.0)
    result = harness.run_trajectory(config, tr, seed=1, slots=200)
    return result.summary.drift_pass_rate == 1.0


CHECKS = [
    ("fading normalization", check_fading_normalization),
    ("mbs power split", check_mbs_power_split),
    ("queue updates", check_queue_updates),
    ("mse monte carlo", check_mse_monte_carlo),
    ("receiver minimizes mse", check_receiver_minimizes_mse),
    ("rate-mse identity", check_rate_mse_identity),
    ("scalar closed form vs grid", check_scalar_closed_form),
    ("qcqp kkt certificates", check_qcqp_certificates),
    ("wmmse vs grid oracle", check_wmmse_against_grid),
    ("sample-path drift inequality", check_drift_inequality_run),
]


def run_all(verbose: bool = True) -> int:
    failures = 0
    for name, fn in CHECKS:
        try:
            ok = fn()
        except Exception as exc:  # a crash is a failure with context
            ok = False
            if verbose:
                print(f"FAIL {name}: {exc!r}")
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'} {name}")
        failures += 0 if ok else 1
    return failures
