"""Acceptance suite: every gate prints one PASS/FAIL line (run with -s to watch).

The heavy simulation blocks are session fixtures shared by several gates:
  * stability block  - lambda=2.0, V=50, T=5000, seeds 0-4
  * tradeoff sweep   - V in {5,10,20,40,80}, lambda=4.2, seeds 0-4, T=1200
  * fronthaul pair   - C_n=6 vs ideal at lambda=4.2, V=40, seeds 0-4, T=1000
"""

import math

import numpy as np
import pytest

from hcran import controller, harness, oracle, qcqp, wmmse
from hcran.metrics import compute_powers, compute_rates
from hcran.scenario import SystemConfig, build_scenario, channel_stream, draw_channels
from hcran.traffic import QueueState, TrafficConfig

SWEEP_V = (5.0, 10.0, 20.0, 40.0, 80.0)
SWEEP_SLOTS = 1200
FRONTHAUL_V = 40.0
FRONTHAUL_SLOTS = 1000
SEEDS = 5


def report(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", flush=True)


@pytest.fixture(scope="session")
def stability_runs():
    config = SystemConfig(tradeoff=50.0, slots=5000)
    traffic = TrafficConfig.for_rues(config.num_rue, 2.0)
    return [harness.run_trajectory(config, traffic, seed=s) for s in range(SEEDS)]


@pytest.fixture(scope="session")
def tradeoff_sweep():
    config = SystemConfig()
    return harness.sweep(config, SWEEP_V, [4.2], seeds=SEEDS, slots=SWEEP_SLOTS)


@pytest.fixture(scope="session")
def fronthaul_pair():
    config = SystemConfig(tradeoff=FRONTHAUL_V)
    return harness.compare_fronthaul(config, 6.0, [FRONTHAUL_V], 4.2, seeds=SEEDS,
                                     slots=FRONTHAUL_SLOTS)


def test_stability_of_all_queues(stability_runs):
    slopes = [r.summary.stability_slope for r in stability_runs]
    ok = all(s < 0.01 for s in slopes)
    report("stability (worst queue slope < 0.01)", ok,
           f"slopes={['%.4f' % s for s in slopes]}")
    assert ok


def test_average_power_constraint(stability_runs):
    cap = 0.2 * 1.05
    worst = max(float(np.max(r.summary.avg_power)) for r in stability_runs)
    ok = worst <= cap
    report("average power (P_bar_n <= 0.2 W x 1.05)", ok, f"worst avg P_n={worst:.4f} W")
    assert ok


def test_per_slot_feasibility(stability_runs, tradeoff_sweep, fronthaul_pair):
    viols = [max(r.summary.max_c3_viol, r.summary.max_c4_viol, r.summary.max_c6_viol)
             for r in stability_runs]
    viols += [max(s.max_c3_viol, s.max_c4_viol, s.max_c6_viol) for s in tradeoff_sweep]
    viols += [max(s.max_c3_viol, s.max_c4_viol, s.max_c6_viol)
              for arm in fronthaul_pair for s in arm]
    worst = max(viols)
    ok = worst <= 1e-6
    report("per-slot feasibility (power/interference/fronthaul within 1e-6 relative)", ok,
           f"worst relative violation={worst:.2e}")
    assert ok


def test_sample_path_drift_inequality():
    config = SystemConfig(tradeoff=50.0, slots=500)
    traffic = TrafficConfig.for_rues(config.num_rue, 2.0)
    result = harness.run_trajectory(config, traffic, seed=7, slots=500)
    rate = result.summary.drift_pass_rate
    ok = rate == 1.0
    report("sample-path drift bound over 500 slots", ok, f"pass rate={rate:.3f}")
    assert ok


def test_wmmse_surrogate_monotone_descent():
    worst_rise = -math.inf
    rng = np.random.default_rng(2024)
    for trial in range(100):
        config = SystemConfig(tradeoff=float(rng.uniform(0.5, 80.0)))
        topo, mbs = build_scenario(config, int(rng.integers(0, 10_000)))
        ch = draw_channels(topo, mbs, config, channel_stream(int(rng.integers(0, 10_000))))
        queues = QueueState.zeros(config.num_rue, config.num_rrh)
        queues.q[:] = rng.uniform(0.0, 30.0, config.num_rue)
        queues.h[:] = rng.uniform(0.0, 1.0, config.num_rrh)
        problem = controller.build_slot_problem(queues, ch, config)
        _, metrics, _ = wmmse.run_algorithm1(problem, config, record_surrogate=True)
        diffs = np.diff(metrics.surrogate_path)
        if diffs.size:
            worst_rise = max(worst_rise, float(diffs.max()))
    ok = worst_rise <= 1e-9
    report("WMMSE surrogate monotone descent (100 random slot problems)", ok,
           f"worst per-sweep increase={worst_rise:.2e}")
    assert ok


def test_wmmse_convergence_identities():
    worst_we = 0.0
    worst_rate = 0.0
    for seed in range(20):
        config = SystemConfig(tradeoff=50.0)
        topo, mbs = build_scenario(config, seed)
        ch = draw_channels(topo, mbs, config, channel_stream(seed))
        rng = np.random.default_rng(seed)
        queues = QueueState.zeros(config.num_rue, config.num_rrh)
        queues.q[:] = rng.uniform(0.0, 20.0, config.num_rue)
        problem = controller.build_slot_problem(queues, ch, config)
        beams, _, _ = wmmse.run_algorithm1(problem, config)
        u = wmmse.update_receivers(ch, beams)
        e = wmmse.compute_mses(u, ch, beams)
        w = 1.0 / e
        rates = compute_rates(ch, beams)
        worst_we = max(worst_we, float(np.max(np.abs(w * e - 1.0))))
        worst_rate = max(worst_rate, float(np.max(np.abs(rates + np.log2(e)))))
    ok = worst_we <= 1e-6 and worst_rate <= 1e-9
    report("WMMSE identities at convergence (w*e=1, R=-log2 e)", ok,
           f"|we-1|={worst_we:.2e}, |R+log2 e|={worst_rate:.2e}")
    assert ok


def test_wmmse_matches_grid_oracle_on_tiny_instance():
    config = SystemConfig(num_rrh=1, num_rue=1, num_mue=1, antennas_rrh=1,
                          antennas_mbs=2, fronthaul_cap=math.inf,
                          interference_cap=1e-6, tradeoff=20.0,
                          rue_dist_min=10.0, rue_dist_max=30.0)
    worst_gap = 0.0
    for seed in (41, 42, 43):
        topo, mbs = build_scenario(config, seed)
        ch = draw_channels(topo, mbs, config, channel_stream(seed))
        queues = QueueState.zeros(1, 1)
        queues.q[:] = 5.0
        problem = controller.build_slot_problem(queues, ch, config)
        beams, _, _ = wmmse.run_algorithm1(problem, config)
        achieved = float(problem.x @ compute_powers(beams)
                         - problem.y @ compute_rates(ch, beams))
        h_amp = float(np.abs(ch.h[0, 0]))
        _, best = oracle.power_grid_search(problem.x[0], problem.y[0], h_amp,
                                           float(ch.phi[0]), config.p_max, 1e-4)
        gap = (achieved - (-best)) / abs(best)
        worst_gap = max(worst_gap, gap)
    ok = worst_gap <= 0.01
    report("WMMSE vs grid oracle on 1x1x1x1 (within 1%)", ok,
           f"worst relative gap={worst_gap:.2e}")
    assert ok


def test_qcqp_certificates_and_oracles():
    worst_kkt = 0.0
    statuses_ok = True
    for trial in range(100):
        rng = np.random.default_rng(5000 + trial)
        d, k_b = 4, 3
        basis = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        quad = basis @ basis.conj().T + float(rng.uniform(0.01, 0.5)) * np.eye(d)
        lin = rng.standard_normal((k_b, d)) + 1j * rng.standard_normal((k_b, d))
        g = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        cons = [qcqp.QuadConstraint(np.eye(d, dtype=complex), np.ones(k_b),
                                    float(rng.uniform(0.3, 3.0)), "power"),
                qcqp.QuadConstraint(np.outer(g, g.conj()), np.ones(k_b),
                                    float(rng.uniform(0.3, 3.0)), "interference"),
                qcqp.QuadConstraint(np.eye(d, dtype=complex), rng.uniform(0.05, 5.0, k_b),
                                    float(rng.uniform(0.3, 3.0)), "fronthaul")]
        sol = qcqp.solve(qcqp.QcqpProblem(quad=quad, lin=lin, constraints=cons))
        worst_kkt = max(worst_kkt, sol.kkt_residual)
        statuses_ok &= sol.status == "optimal"
    # 1-D closed-form / grid agreement
    worst_dev = 0.0
    for trial in range(50):
        rng = np.random.default_rng(9000 + trial)
        b = float(rng.uniform(0.1, 2.0))
        cap = float(rng.uniform(0.04, 1.5))
        x, *_ = qcqp.solve_real(np.array([[1.0]]), np.array([[b]]),
                                np.array([[[1.0]]]), np.array([[1.0]]), np.array([cap]))
        worst_dev = max(worst_dev, abs(float(x[0, 0]) - min(b, math.sqrt(cap))))
    ok = worst_kkt <= 1e-6 and statuses_ok and worst_dev <= 1e-4
    report("QCQP certificates (100 instances) + 1-D oracle agreement", ok,
           f"worst KKT={worst_kkt:.2e}, worst 1-D deviation={worst_dev:.2e}")
    assert ok


def test_queue_growth_linear_in_v(tradeoff_sweep):
    ts = controller.tradeoff_summary(tradeoff_sweep)
    ok = ts.slope > 0 and ts.r_squared >= 0.9
    report("O(V) queue growth (slope>0, R^2>=0.9)", ok,
           f"slope={ts.slope:.3f}, R^2={ts.r_squared:.4f}, "
           f"avg_queue={np.round(ts.avg_queue, 1).tolist()}")
    assert ok


def test_ee_improves_with_v(tradeoff_sweep):
    ts = controller.tradeoff_summary(tradeoff_sweep, eta_tol=0.02)
    scale = np.maximum(np.abs(ts.avg_eta[:-2]), 1e-12)
    gaps_ok = bool(np.all(ts.eta_gaps[1:] <= ts.eta_gaps[:-1] + 0.02 * scale))
    ok = ts.eta_nondecreasing and gaps_ok
    report("O(1/V) EE (non-decreasing within 2%, shrinking gaps)", ok,
           f"eta={np.round(ts.avg_eta, 3).tolist()}, gaps={np.round(ts.eta_gaps, 3).tolist()}")
    assert ok


def test_power_non_increasing_in_v(tradeoff_sweep):
    ts = controller.tradeoff_summary(tradeoff_sweep)
    p = ts.avg_power
    ok = bool(np.all(p[1:] <= p[:-1] * 1.02))
    report("power non-increasing in V (within 2%)", ok,
           f"avg_power={np.round(p, 4).tolist()}")
    assert ok


def test_fronthaul_constraint_effects(fronthaul_pair):
    constrained, ideal = fronthaul_pair
    dq = np.array([a.avg_queue_total - b.avg_queue_total
                   for a, b in zip(constrained, ideal)])
    dp = np.array([a.avg_power_mean - b.avg_power_mean
                   for a, b in zip(constrained, ideal)])
    de = np.array([a.avg_eta_ee - b.avg_eta_ee for a, b in zip(constrained, ideal)])

    def significant(diff, sign):
        se = diff.std(ddof=1) / math.sqrt(len(diff))
        return sign * diff.mean() > 2.0 * se, se

    q_ok, q_se = significant(dq, +1.0)
    p_ok, p_se = significant(dp, -1.0)
    e_ok, e_se = significant(de, +1.0)
    ok = q_ok and p_ok and e_ok
    report("fronthaul C=6 vs ideal (queue up, power down, EE up; >2 SE)", ok,
           f"dQ={dq.mean():+.1f}({q_se:.1f}), dP={dp.mean():+.4f}({p_se:.4f}), "
           f"dEta={de.mean():+.3f}({e_se:.3f})")
    assert ok


def test_determinism_identical_bytes(tmp_path):
    config = SystemConfig(tradeoff=30.0)
    traffic = TrafficConfig.for_rues(config.num_rue, 2.0)
    blobs = []
    for i in range(2):
        res = harness.run_trajectory(config, traffic, seed=11, slots=200)
        sp = tmp_path / f"s{i}.csv"
        tp = tmp_path / f"t{i}.csv"
        harness.emit_csv([res.summary], str(sp))
        harness.emit_trace_csv(res, str(tp))
        blobs.append(sp.read_bytes() + tp.read_bytes())
    ok = blobs[0] == blobs[1]
    report("determinism (identical config+seed -> identical CSV bytes)", ok,
           f"{len(blobs[0])} bytes compared")
    assert ok
