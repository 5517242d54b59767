import math
from dataclasses import replace

import numpy as np
import pytest

from hcran import harness
from hcran.scenario import SystemConfig
from hcran.traffic import TrafficConfig

FAST = dict(tradeoff=30.0, slots=120)


def fast_config(**overrides):
    return SystemConfig(**{**FAST, **overrides})


def test_identical_seeds_identical_csv_bytes(tmp_path):
    config = fast_config()
    traffic = TrafficConfig.for_rues(config.num_rue, 2.0)
    paths = []
    for i in range(2):
        res = harness.run_trajectory(config, traffic, seed=3)
        summary_path = tmp_path / f"summary{i}.csv"
        trace_path = tmp_path / f"trace{i}.csv"
        harness.emit_csv([res.summary], str(summary_path))
        harness.emit_trace_csv(res, str(trace_path))
        paths.append((summary_path.read_bytes(), trace_path.read_bytes()))
    assert paths[0][0] == paths[1][0]
    assert paths[0][1] == paths[1][1]


def test_zero_arrivals_keep_queues_empty():
    config = fast_config()
    traffic = TrafficConfig.for_rues(config.num_rue, 0.0)
    res = harness.run_trajectory(config, traffic, seed=0)
    assert np.all(res.q_trace == 0.0)


def test_summary_rates_and_feasibility_fields():
    config = fast_config()
    traffic = TrafficConfig.for_rues(config.num_rue, 2.0)
    res = harness.run_trajectory(config, traffic, seed=1)
    s = res.summary
    assert 0.0 <= s.pct_slots_converged <= 1.0
    assert 0.0 <= s.drift_pass_rate <= 1.0
    assert s.max_c3_viol <= 1e-6 and s.max_c4_viol <= 1e-6 and s.max_c6_viol <= 1e-6
    assert s.slots == config.slots
    assert s.avg_power.shape == (config.num_rrh,)


def test_drift_holds_on_short_run():
    config = fast_config(slots=150)
    traffic = TrafficConfig.for_rues(config.num_rue, 2.0)
    res = harness.run_trajectory(config, traffic, seed=2)
    assert res.summary.drift_pass_rate == 1.0
    assert all(c.holds for c in res.drift_checks)


def test_summary_csv_round_trip(tmp_path):
    config = fast_config()
    traffic = TrafficConfig.for_rues(config.num_rue, 2.0)
    rows = [harness.run_trajectory(config, traffic, seed=s).summary for s in (0, 1)]
    p1 = tmp_path / "a.csv"
    harness.emit_csv(rows, str(p1))
    parsed = harness.read_summary_csv(str(p1))
    p2 = tmp_path / "b.csv"
    harness.emit_csv(parsed, str(p2))
    assert p1.read_bytes() == p2.read_bytes()
    assert parsed[0].seed == 0 and parsed[1].seed == 1


def test_summary_header_exact():
    assert harness.SUMMARY_HEADER == (
        "run_id,V,lambda,fronthaul_cap,slots,avg_queue_total,avg_power_mean,"
        "avg_eta_ee,avg_eta_ee_trad,stability_slope,pct_slots_converged,drift_pass_rate")


def test_trace_header_layout():
    assert harness.trace_header(2, 3) == \
        "slot,Q_1,Q_2,H_1,H_2,H_3,R_1,R_2,P_1,P_2,P_3,eta_ee"


def test_empty_table_gives_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    harness.emit_csv([], str(path))
    assert path.read_text(encoding="utf-8") == harness.SUMMARY_HEADER + "\n"


def test_sweep_single_point_matches_trajectory():
    config = fast_config()
    summaries = harness.sweep(config, [30.0], [2.0], seeds=[4], slots=120)
    direct = harness.run_trajectory(replace(config, tradeoff=30.0),
                                    TrafficConfig.for_rues(config.num_rue, 2.0),
                                    seed=4, slots=120).summary
    assert len(summaries) == 1
    assert summaries[0].run_id == direct.run_id
    assert summaries[0].avg_queue_total == direct.avg_queue_total
    assert np.array_equal(summaries[0].avg_power, direct.avg_power)


def test_sweep_requires_nonempty_lists():
    with pytest.raises(ValueError):
        harness.sweep(fast_config(), [], [2.0], seeds=1)


def test_compare_fronthaul_identical_when_both_ideal():
    config = fast_config(slots=80)
    with pytest.raises(ValueError):
        harness.compare_fronthaul(config, math.inf, [30.0], 2.0, seeds=1, slots=80)
    # a cap far above any realizable load behaves like the ideal arm
    cons, ideal = harness.compare_fronthaul(config, 1e9, [30.0], 2.0, seeds=[0], slots=80)
    assert abs(cons[0].avg_queue_total - ideal[0].avg_queue_total) < 1e-9
    assert abs(cons[0].avg_eta_ee - ideal[0].avg_eta_ee) < 1e-9


def test_trace_csv_round_trip_floats(tmp_path):
    config = fast_config(slots=100)
    traffic = TrafficConfig.for_rues(config.num_rue, 2.0)
    res = harness.run_trajectory(config, traffic, seed=5)
    path = tmp_path / "trace.csv"
    harness.emit_trace_csv(res, str(path))
    lines = path.read_text(encoding="utf-8").strip().split("\n")
    assert lines[0] == harness.trace_header(config.num_rue, config.num_rrh)
    assert len(lines) == 1 + config.slots
    row = lines[1].split(",")
    assert row[0] == "0"
    np_row = np.array([float(x) for x in row[1:]])
    assert np_row.shape == (2 * config.num_rue + 2 * config.num_rrh + 1,)
