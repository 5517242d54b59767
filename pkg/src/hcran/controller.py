"""Per-slot control: drift-plus-penalty weights, slot problem assembly, bound
constants, sample-path drift verification, and tradeoff diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .metrics import BeamformerSet, SlotMetrics, compute_fronthauls, compute_interferences, \
    compute_powers, compute_rates
from .scenario import ChannelState, SystemConfig
from .traffic import QueueState, TrafficConfig

DRIFT_SLACK = 1e-9  # absolute slack on the sample-path drift inequality


@dataclass
class SlotProblem:
    """Everything the per-slot minimization of sum X_n P_n - sum Y_k R_k needs."""

    x: np.ndarray              # (N,) power weights X_n = H_n + V(1-alpha)mu_n/N
    y: np.ndarray              # (K_R,) rate weights Y_k = Q_k + V alpha omega_k/K_R
    beta: np.ndarray           # (N, K_R) reweighting coefficients, 1/W
    r_tilde: np.ndarray        # (K_R,) previous-iteration rates for the linearized fronthaul
    channels: ChannelState
    p_max: float               # W, per-RRH instantaneous power cap
    phi_max: np.ndarray        # (K_M,) W per-MUE interference caps
    fronthaul_cap: np.ndarray  # (N,) bit/slot/Hz caps; inf entries are inactive
    init_beams: BeamformerSet  # feasible starting point for the slot


@dataclass
class BoundConstants:
    """Finite constants backing the drift bound and the tradeoff theorems."""

    r_max: np.ndarray   # (K_R,) rate caps
    a_max: np.ndarray   # (K_R,) peak arrivals
    b: float            # drift bound constant
    eta_max: float      # upper bound on the weighted EE utility
    gamma: float        # bound on P_n - p_avg


@dataclass
class DriftCheck:
    lhs: float
    rhs: float
    holds: bool


@dataclass
class TradeoffSummary:
    v_values: np.ndarray
    avg_queue: np.ndarray
    avg_eta: np.ndarray
    avg_power: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    eta_nondecreasing: bool
    eta_gaps: np.ndarray
    eta_gaps_shrinking: bool


def compute_weights(queues: QueueState, config: SystemConfig):
    """X_n and Y_k of the drift-plus-penalty reduction (affine in V)."""
    v = config.tradeoff
    x = queues.h + v * (1.0 - config.alpha) * config.mu / config.num_rrh
    y = queues.q + v * config.alpha * config.omega / config.num_rue
    return x, y


def reweighting(beams: BeamformerSet, kappa_reg: float) -> np.ndarray:
    """beta_{n,k} = 1 / (||v_{n,k}||^2 + kappa_reg); 1/kappa_reg on dark links."""
    return 1.0 / (beams.block_powers() + kappa_reg)


def initial_beams(channels: ChannelState, config: SystemConfig) -> BeamformerSet:
    """Slot-0 policy: per-RUE MRT from its strongest RRH at power p_max / K_R."""
    k_r, l_r, n = config.num_rue, config.antennas_rrh, config.num_rrh
    beams = BeamformerSet.zeros(k_r, n, l_r)
    block_gains = np.abs(channels.h.reshape(k_r, n, l_r)) ** 2
    strongest = np.argmax(block_gains.sum(axis=2), axis=1)
    amp = math.sqrt(config.p_max / k_r)
    for k in range(k_r):
        sl = slice(strongest[k] * l_r, (strongest[k] + 1) * l_r)
        blk = channels.h[k, sl]
        norm = np.linalg.norm(blk)
        if norm > 0:
            beams.v[k, sl] = amp * blk / norm
    return enforce_feasible(beams, channels, config)


def warm_start_beams(previous: BeamformerSet, channels: ChannelState,
                     config: SystemConfig) -> BeamformerSet:
    """Previous slot's beams rescaled to meet the power cap with a 10% margin, then shrunk
    until the current channels' interference and fronthaul caps hold.

    RUEs that ended the previous slot silent get their strongest-RRH MRT block
    re-seeded at reduced power: a silent beam is a fixed point of the iteration
    (zero receiver -> zero linear reward), so without the reseed a starved user
    could never re-enter service regardless of its backlog.
    """
    beams = previous.copy()
    silent = beams.block_powers().max(axis=0) < config.eps_active   # (K_R,)
    if np.any(silent):
        k_r, l_r, n = config.num_rue, config.antennas_rrh, config.num_rrh
        block_gains = np.abs(channels.h.reshape(k_r, n, l_r)) ** 2
        strongest = np.argmax(block_gains.sum(axis=2), axis=1)
        amp = math.sqrt(config.p_max / k_r) / 2.0
        for k in np.flatnonzero(silent):
            sl = slice(strongest[k] * l_r, (strongest[k] + 1) * l_r)
            blk = channels.h[k, sl]
            norm = np.linalg.norm(blk)
            if norm > 0:
                beams.v[k, sl] = amp * blk / norm
    powers = compute_powers(beams)
    peak = float(np.max(powers)) if powers.size else 0.0
    if peak > 0.9 * config.p_max:
        beams.v *= math.sqrt(0.9 * config.p_max / peak)
    return enforce_feasible(beams, channels, config)


def enforce_feasible(beams: BeamformerSet, channels: ChannelState,
                     config: SystemConfig) -> BeamformerSet:
    """Shrink toward zero (always feasible) until the power and interference caps
    and the activity-based fronthaul load hold on the given channels."""
    out = beams.copy()
    for _ in range(80):
        powers = compute_powers(out)
        interference = compute_interferences(channels, out)
        load = compute_fronthauls(compute_rates(channels, out), out, config.eps_active)
        ok = (np.all(powers <= config.p_max * (1 + 1e-12))
              and np.all(interference <= config.interference_cap * (1 + 1e-12))
              and np.all(load <= config.fronthaul_cap * (1 + 1e-12)))
        if ok:
            return out
        out.v *= 0.7
        if np.max(np.abs(out.v), initial=0.0) < 1e-12:
            break
    out.v[:] = 0.0
    return out


def build_slot_problem(queues: QueueState, channels: ChannelState, config: SystemConfig,
                       previous_solution: BeamformerSet | None = None) -> SlotProblem:
    """Assemble the slot's minimization with warm-start beams, beta and R-tilde seeds."""
    queues.validate()
    x, y = compute_weights(queues, config)
    if previous_solution is None:
        init = initial_beams(channels, config)
    else:
        init = warm_start_beams(previous_solution, channels, config)
    r_tilde = compute_rates(channels, init)
    beta = reweighting(init, config.kappa_reg)
    return SlotProblem(
        x=x, y=y, beta=beta, r_tilde=r_tilde, channels=channels,
        p_max=config.p_max,
        phi_max=np.full(config.num_mue, config.interference_cap),
        fronthaul_cap=np.full(config.num_rrh, config.fronthaul_cap),
        init_beams=init,
    )


def compute_bound_B(config: SystemConfig, traffic: TrafficConfig,
                    channels_max_gain: float) -> BoundConstants:
    """Drift bound constant from the rate/arrival/power caps.

    channels_max_gain is the largest per-RUE stacked channel gain ||h_k||^2 seen
    over the horizon (or a configured cap), so R_max dominates every realized rate.
    """
    r_max_val = math.log2(1.0 + channels_max_gain * config.p_max * config.num_rrh
                          / config.sigma2)
    r_max = np.full(config.num_rue, r_max_val)
    a_max = np.asarray(traffic.a_max, dtype=float)
    b = 0.5 * float(np.sum(a_max**2 + r_max**2))
    b += 0.5 * config.num_rrh * (config.p_max - config.p_avg) ** 2
    eta_max = config.alpha / config.num_rue * float(config.omega @ r_max)
    return BoundConstants(r_max=r_max, a_max=a_max, b=b, eta_max=eta_max,
                          gamma=config.p_max - config.p_avg)


def check_drift_inequality(before: QueueState, after: QueueState, arrivals,
                           metrics: SlotMetrics, bounds: BoundConstants,
                           config: SystemConfig) -> DriftCheck:
    """Deterministic per-slot form of the drift-plus-penalty bound.

    lhs = Delta L - V eta_EE for the realized transition; rhs = B - V eta_EE
    + sum Q_k (A_k - R_k) + sum H_n (P_n - p_avg). Raises if `after` is not the
    queue update of `before` under the given action.
    """
    arrivals = np.asarray(arrivals, dtype=float)
    expect_q = np.maximum(before.q - metrics.rates, 0.0) + arrivals
    expect_h = np.maximum(before.h - config.p_avg + metrics.powers, 0.0)
    if not (np.allclose(after.q, expect_q, atol=1e-6) and
            np.allclose(after.h, expect_h, atol=1e-6)):
        raise ValueError("queue states are not consecutive under the given action")
    v_eta = config.tradeoff * metrics.eta_ee
    lhs = 0.5 * (np.sum(after.q**2) - np.sum(before.q**2)) \
        + 0.5 * (np.sum(after.h**2) - np.sum(before.h**2)) - v_eta
    rhs = bounds.b - v_eta + float(before.q @ (arrivals - metrics.rates)) \
        + float(before.h @ (metrics.powers - config.p_avg))
    return DriftCheck(lhs=float(lhs), rhs=float(rhs), holds=bool(lhs <= rhs + DRIFT_SLACK))


def tradeoff_summary(summaries, eta_tol: float = 0.0, gap_tol: float = 0.0) -> TradeoffSummary:
    """Aggregate sweep results into the queue-vs-V fit and EE monotonicity flags.

    `summaries` is any iterable with .v, .avg_queue_total, .avg_eta_ee and
    .avg_power_mean attributes; entries sharing V are averaged (seed replicates).
    """
    entries = list(summaries)
    if not entries:
        raise ValueError("no sweep results given")
    by_v: dict[float, list] = {}
    for s in entries:
        by_v.setdefault(float(s.v), []).append(s)
    v_values = np.array(sorted(by_v))
    if v_values.size < 3:
        raise ValueError("need at least 3 distinct V values for a tradeoff fit")
    avg_queue = np.array([np.mean([s.avg_queue_total for s in by_v[v]]) for v in v_values])
    avg_eta = np.array([np.mean([s.avg_eta_ee for s in by_v[v]]) for v in v_values])
    avg_power = np.array([np.mean([s.avg_power_mean for s in by_v[v]]) for v in v_values])

    slope, intercept = np.polyfit(v_values, avg_queue, 1)
    fit = slope * v_values + intercept
    ss_res = float(np.sum((avg_queue - fit) ** 2))
    ss_tot = float(np.sum((avg_queue - avg_queue.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 and ss_res == 0.0 else 1.0 - ss_res / max(ss_tot, 1e-300)

    eta_nondec = bool(np.all(avg_eta[1:] >= avg_eta[:-1] - eta_tol * np.abs(avg_eta[:-1])))
    gaps = np.diff(avg_eta)
    scale = np.maximum(np.abs(avg_eta[:-2]), 1e-12)
    gaps_shrinking = bool(gaps.size < 2 or np.all(gaps[1:] <= gaps[:-1] + gap_tol * scale))
    return TradeoffSummary(v_values=v_values, avg_queue=avg_queue, avg_eta=avg_eta,
                           avg_power=avg_power, slope=float(slope), intercept=float(intercept),
                           r_squared=float(r_squared), eta_nondecreasing=eta_nondec,
                           eta_gaps=gaps, eta_gaps_shrinking=gaps_shrinking)
