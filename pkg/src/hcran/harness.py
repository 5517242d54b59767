"""Experiment runner: slot-loop trajectories, (V, lambda) sweeps, fronthaul
comparisons, and CSV emission with a stable byte-level format."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import controller, wmmse
from .metrics import BeamformerSet
from .scenario import SystemConfig, arrival_stream, build_scenario, channel_stream, draw_channels
from .traffic import QueueState, TrafficConfig, draw_arrivals, stability_slope, \
    update_actual_queue, update_virtual_queue

SUMMARY_HEADER = ("run_id,V,lambda,fronthaul_cap,slots,avg_queue_total,avg_power_mean,"
                  "avg_eta_ee,avg_eta_ee_trad,stability_slope,pct_slots_converged,"
                  "drift_pass_rate")
DISCARD_FRACTION = 0.1   # transient fraction excluded from time averages
SLOPE_WINDOW = 0.25      # trailing fraction used by the stability diagnostic


@dataclass
class RunSummary:
    run_id: str
    v: float
    lam: float                # mean arrival rate (averaged over RUEs for the CSV)
    fronthaul_cap: float
    slots: int
    avg_queue_total: float    # time average of sum_k Q_k
    avg_power: np.ndarray     # (N,) time-averaged P_n
    avg_eta_ee: float
    avg_eta_ee_trad: float
    stability_slope: float    # worst queue (actual or virtual)
    pct_slots_converged: float
    drift_pass_rate: float
    max_c3_viol: float = 0.0
    max_c4_viol: float = 0.0
    max_c6_viol: float = 0.0
    seed: int = 0

    @property
    def avg_power_mean(self) -> float:
        return float(np.mean(self.avg_power))


@dataclass
class TrajectoryResult:
    summary: RunSummary
    q_trace: np.ndarray       # (T, K_R) start-of-slot backlogs
    h_trace: np.ndarray       # (T, N) start-of-slot virtual backlogs
    r_trace: np.ndarray       # (T, K_R)
    p_trace: np.ndarray       # (T, N)
    eta_trace: np.ndarray     # (T,)
    drift_checks: list


def _run_id(v: float, lam: float, cap: float, seed: int) -> str:
    cap_s = "inf" if math.isinf(cap) else format(cap, ".9g")
    return f"V{format(v, '.9g')}_lam{format(lam, '.9g')}_C{cap_s}_s{seed}"


def run_trajectory(config: SystemConfig, traffic: TrafficConfig, seed: int,
                   slots: int | None = None, check_drift: bool = True) -> TrajectoryResult:
    """Simulate one seeded trajectory of the per-slot control loop.

    Channels for the whole horizon are drawn up front so the drift-bound constant
    is fixed before any optimization runs; the fading stream is identical to
    drawing slot by slot.
    """
    t_len = config.slots if slots is None else int(slots)
    topo, mbs = build_scenario(config, seed)
    ch_rng = channel_stream(seed)
    arr_rng = arrival_stream(seed)
    channel_seq = [draw_channels(topo, mbs, config, ch_rng) for _ in range(t_len)]
    g_max = max(float(np.max(np.sum(np.abs(ch.h) ** 2, axis=1))) for ch in channel_seq)
    bounds = controller.compute_bound_B(config, traffic, g_max)

    k_r, n = config.num_rue, config.num_rrh
    queues = QueueState.zeros(k_r, n)
    prev_beams: BeamformerSet | None = None

    q_trace = np.zeros((t_len, k_r))
    h_trace = np.zeros((t_len, n))
    r_trace = np.zeros((t_len, k_r))
    p_trace = np.zeros((t_len, n))
    eta_trace = np.zeros(t_len)
    eta_trad = np.full(t_len, math.nan)
    converged = np.zeros(t_len, dtype=bool)
    viol = np.zeros((t_len, 3))
    drift_checks = []

    for t in range(t_len):
        ch = channel_seq[t]
        arrivals = draw_arrivals(traffic, arr_rng)
        problem = controller.build_slot_problem(queues, ch, config, prev_beams)
        beams, metrics, _ = wmmse.run_algorithm1(problem, config)

        q_trace[t] = queues.q
        h_trace[t] = queues.h
        r_trace[t] = metrics.rates
        p_trace[t] = metrics.powers
        eta_trace[t] = metrics.eta_ee
        eta_trad[t] = metrics.eta_ee_trad
        converged[t] = metrics.solver_status.startswith("converged")
        viol[t] = (metrics.c3_rel_viol, metrics.c4_rel_viol, metrics.c6_rel_viol)

        after = QueueState(q=update_actual_queue(queues.q, metrics.rates, arrivals),
                           h=update_virtual_queue(queues.h, metrics.powers, config.p_avg),
                           a=arrivals)
        if check_drift:
            drift_checks.append(controller.check_drift_inequality(
                queues, after, arrivals, metrics, bounds, config))
        queues = after
        prev_beams = beams

    start = int(t_len * DISCARD_FRACTION)
    slopes = np.concatenate([stability_slope(q_trace, SLOPE_WINDOW),
                             stability_slope(h_trace, SLOPE_WINDOW)]) \
        if t_len >= 100 else np.array([math.nan])
    with np.errstate(invalid="ignore"):
        trad_avg = float(np.nanmean(eta_trad[start:])) if np.any(np.isfinite(eta_trad[start:])) \
            else math.nan
    pass_rate = (sum(c.holds for c in drift_checks) / len(drift_checks)) if drift_checks else 1.0

    summary = RunSummary(
        run_id=_run_id(config.tradeoff, float(np.mean(traffic.lam)), config.fronthaul_cap, seed),
        v=config.tradeoff,
        lam=float(np.mean(traffic.lam)),
        fronthaul_cap=config.fronthaul_cap,
        slots=t_len,
        avg_queue_total=float(np.mean(q_trace[start:].sum(axis=1))),
        avg_power=p_trace[start:].mean(axis=0),
        avg_eta_ee=float(np.mean(eta_trace[start:])),
        avg_eta_ee_trad=trad_avg,
        stability_slope=float(np.max(slopes)),
        pct_slots_converged=float(np.mean(converged)),
        drift_pass_rate=float(pass_rate),
        max_c3_viol=float(viol[:, 0].max()),
        max_c4_viol=float(viol[:, 1].max()),
        max_c6_viol=float(viol[:, 2].max()),
        seed=seed,
    )
    return TrajectoryResult(summary=summary, q_trace=q_trace, h_trace=h_trace,
                            r_trace=r_trace, p_trace=p_trace, eta_trace=eta_trace,
                            drift_checks=drift_checks)


def _seed_list(seeds) -> list:
    if isinstance(seeds, (int, np.integer)):
        return list(range(int(seeds)))
    return [int(s) for s in seeds]


def sweep(config: SystemConfig, v_list, lambda_list, seeds, slots: int | None = None,
          check_drift: bool = True) -> list:
    """One RunSummary per (V, lambda, seed), ordered deterministically."""
    v_list, lambda_list = list(v_list), list(lambda_list)
    if not v_list or not lambda_list:
        raise ValueError("v_list and lambda_list must be nonempty")
    out = []
    for v in v_list:
        for lam in lambda_list:
            for seed in _seed_list(seeds):
                cfg = replace(config, tradeoff=float(v))
                tr = TrafficConfig.for_rues(cfg.num_rue, float(lam))
                out.append(run_trajectory(cfg, tr, seed, slots=slots,
                                          check_drift=check_drift).summary)
    return out


def compare_fronthaul(config: SystemConfig, c_value: float, v_list, lam, seeds,
                      slots: int | None = None):
    """Paired constrained (C_n = c_value) vs ideal (C_n = inf) runs on shared seeds."""
    if not math.isfinite(c_value):
        raise ValueError("c_value must be finite; the ideal arm is added automatically")
    constrained = sweep(replace(config, fronthaul_cap=float(c_value)), v_list, [lam], seeds,
                        slots=slots)
    ideal = sweep(replace(config, fronthaul_cap=math.inf), v_list, [lam], seeds, slots=slots)
    return constrained, ideal


# --- CSV emission -----------------------------------------------------------------


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return format(float(x), ".9g")


def emit_csv(summaries, path: str) -> None:
    """Summary table with the fixed header; floats carry 9 significant digits."""
    lines = [SUMMARY_HEADER]
    for s in summaries:
        lines.append(",".join([
            s.run_id, _fmt(s.v), _fmt(s.lam), _fmt(s.fronthaul_cap), str(s.slots),
            _fmt(s.avg_queue_total), _fmt(s.avg_power_mean), _fmt(s.avg_eta_ee),
            _fmt(s.avg_eta_ee_trad), _fmt(s.stability_slope),
            _fmt(s.pct_slots_converged), _fmt(s.drift_pass_rate),
        ]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def trace_header(num_rue: int, num_rrh: int) -> str:
    cols = ["slot"]
    cols += [f"Q_{k + 1}" for k in range(num_rue)]
    cols += [f"H_{n + 1}" for n in range(num_rrh)]
    cols += [f"R_{k + 1}" for k in range(num_rue)]
    cols += [f"P_{n + 1}" for n in range(num_rrh)]
    cols.append("eta_ee")
    return ",".join(cols)


def emit_trace_csv(result: TrajectoryResult, path: str) -> None:
    t_len, k_r = result.q_trace.shape
    n = result.h_trace.shape[1]
    lines = [trace_header(k_r, n)]
    for t in range(t_len):
        row = [str(t)]
        row += [_fmt(x) for x in result.q_trace[t]]
        row += [_fmt(x) for x in result.h_trace[t]]
        row += [_fmt(x) for x in result.r_trace[t]]
        row += [_fmt(x) for x in result.p_trace[t]]
        row.append(_fmt(result.eta_trace[t]))
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_summary_csv(path: str) -> list:
    """Parse an emitted summary table back into RunSummary rows (power detail lost)."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or lines[0] != SUMMARY_HEADER:
        raise ValueError(f"unexpected summary header in {path}")
    out = []
    for ln in lines[1:]:
        parts = ln.split(",")
        run_id = parts[0]
        v, lam, cap = (float(p) for p in parts[1:4])
        slots = int(parts[4])
        (queue, p_mean, eta, eta_trad, slope, conv, drift) = (float(p) for p in parts[5:12])
        seed = int(run_id.rsplit("_s", 1)[1]) if "_s" in run_id else 0
        out.append(RunSummary(run_id=run_id, v=v, lam=lam, fronthaul_cap=cap, slots=slots,
                              avg_queue_total=queue, avg_power=np.array([p_mean]),
                              avg_eta_ee=eta, avg_eta_ee_trad=eta_trad,
                              stability_slope=slope, pct_slots_converged=conv,
                              drift_pass_rate=drift, seed=seed))
    return out
