"""Block-coordinate WMMSE iteration that solves each slot's weighted problem.

Receiver convention: the symbol estimate is conj(u_k) * y_k, so the MSE reads
e_k = |u_k|^2 (sum_j |h_k^H v_j|^2 + phi_k) - 2 Re{conj(u_k) h_k^H v_k} + 1 and
u_k = h_k^H v_k / (sum_j |h_k^H v_j|^2 + phi_k) is its exact minimizer, giving
e_min = 1/(1 + SINR_k) and the rate identity R_k = -log2 e_k.

Rates are in bits while the weight update w = 1/e pairs with a natural-log
surrogate, so the rate weights enter the beamformer subproblem scaled by 1/ln 2;
the iteration's fixed points then solve the bit-scale slot objective exactly.

The slow tail of plain block descent is cut by an inertial step: after each
subproblem solve the iterate is extrapolated along its last displacement and
the extrapolation is kept only when it stays feasible and strictly improves
the slot objective, which preserves the per-sweep surrogate descent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qcqp
from .controller import SlotProblem, reweighting
from .metrics import BeamformerSet, SlotMetrics, compute_eta_ee, compute_eta_ee_traditional, \
    compute_fronthauls, compute_interferences, compute_powers, compute_rates
from .scenario import ChannelState, SystemConfig

QCQP_TOL = 1e-8  # keep the subproblem certificate well inside the 1e-6 gates


@dataclass
class WmmseState:
    """One iteration's working variables (receivers, weights, beams, reweights)."""

    beams: BeamformerSet
    u: np.ndarray        # (K_R,) complex scalar receivers
    w: np.ndarray        # (K_R,) positive MSE weights
    e: np.ndarray        # (K_R,) MSEs at the current receivers
    beta: np.ndarray     # (N, K_R)
    r_tilde: np.ndarray  # (K_R,)
    eta_current: float


def _totals(channels: ChannelState, beams: BeamformerSet):
    """Per-RUE desired-signal coefficient and total received power at the RUE."""
    cross = channels.h.conj() @ beams.v.T          # (K, K): [k, j] = h_k^H v_j
    desired = np.diag(cross).copy()
    total = np.sum(np.abs(cross) ** 2, axis=1) + channels.phi
    return desired, total


def update_receivers(channels: ChannelState, beams: BeamformerSet) -> np.ndarray:
    """u_k = h_k^H v_k / (sum_j |h_k^H v_j|^2 + phi_k), all RUEs at once."""
    desired, total = _totals(channels, beams)
    return desired / total


def update_receiver(k: int, channels: ChannelState, beams: BeamformerSet) -> complex:
    return complex(update_receivers(channels, beams)[k])


def compute_mses(u: np.ndarray, channels: ChannelState, beams: BeamformerSet) -> np.ndarray:
    desired, total = _totals(channels, beams)
    return np.abs(u) ** 2 * total - 2.0 * np.real(np.conj(u) * desired) + 1.0


def compute_mse(k: int, u_k: complex, channels: ChannelState, beams: BeamformerSet) -> float:
    u = np.zeros(channels.h.shape[0], dtype=complex)
    u[k] = u_k
    return float(compute_mses(u, channels, beams)[k])


def update_weight(k: int, e_k: float) -> float:
    """w_k = 1/e_k; a nonpositive MSE signals an upstream numerical fault."""
    if e_k <= 0.0:
        raise ValueError("MSE must be positive; upstream computation is inconsistent")
    return 1.0 / e_k


def surrogate_objective(problem: SlotProblem, u: np.ndarray, w: np.ndarray,
                        beams: BeamformerSet) -> float:
    """Bit-scale WMMSE surrogate: sum_k (Y_k/ln2)(w_k e_k - ln w_k) + sum_n X_n P_n."""
    e = compute_mses(u, problem.channels, beams)
    rate_part = float(problem.y @ (w * e - np.log(w))) / math.log(2.0)
    power_part = float(problem.x @ compute_powers(beams))
    return rate_part + power_part


def _objective_terms(problem: SlotProblem, u: np.ndarray, w: np.ndarray):
    """Complex quadratic/linear data of the beamformer subproblem."""
    h = problem.channels.h
    d = h.shape[1]
    y_eff = problem.y / math.log(2.0)
    coef = y_eff * w * np.abs(u) ** 2
    quad = (h.T * coef) @ h.conj()      # sum_k coef_k h_k h_k^H
    quad[np.diag_indices(d)] += np.repeat(problem.x, problem.init_beams.ant_per_rrh)
    lin = (y_eff * w * u)[:, None] * h
    return quad, lin


def assemble_qcqp(problem: SlotProblem, u: np.ndarray, w: np.ndarray,
                  config: SystemConfig) -> qcqp.QcqpProblem:
    """Quadratic beamformer subproblem under fixed receivers, weights and reweights."""
    quad, lin = _objective_terms(problem, u, w)
    k_r, d = problem.channels.h.shape
    n, l_r = config.num_rrh, config.antennas_rrh
    ones = np.ones(k_r)
    constraints = []
    for rrh in range(n):
        mask = np.zeros(d)
        mask[rrh * l_r:(rrh + 1) * l_r] = 1.0
        constraints.append(qcqp.QuadConstraint(form=np.diag(mask).astype(complex),
                                               weights=ones, cap=problem.p_max,
                                               kind=f"power:{rrh}"))
    for m in range(problem.phi_max.shape[0]):
        g_m = problem.channels.g[m]
        constraints.append(qcqp.QuadConstraint(form=np.outer(g_m, g_m.conj()),
                                               weights=ones, cap=float(problem.phi_max[m]),
                                               kind=f"interference:{m}"))
    for rrh in range(n):
        cap = float(problem.fronthaul_cap[rrh])
        if not np.isfinite(cap):
            continue
        mask = np.zeros(d)
        mask[rrh * l_r:(rrh + 1) * l_r] = 1.0
        constraints.append(qcqp.QuadConstraint(form=np.diag(mask).astype(complex),
                                               weights=problem.beta[rrh] * problem.r_tilde,
                                               cap=cap, kind=f"fronthaul:{rrh}"))
    return qcqp.QcqpProblem(quad=quad, lin=lin, constraints=constraints)


def update_beamformers(problem: SlotProblem, state: WmmseState, config: SystemConfig,
                       warm_multipliers=None):
    """One QCQP descent step; keeps the incoming beams on solver failure."""
    qp = assemble_qcqp(problem, state.u, state.w, config)
    sol = qcqp.solve(qp, tol=QCQP_TOL, warm_multipliers=warm_multipliers)
    beams = state.beams
    if sol.status != "numerical_failure" and \
            sol.objective <= qcqp.objective_value(qp, beams.v) + 1e-12:
        beams = BeamformerSet(v=sol.beams, num_rrh=beams.num_rrh,
                              ant_per_rrh=beams.ant_per_rrh)
    return beams, sol, qp


class _SlotSolver:
    """Per-slot cache: lifted constraint forms stay fixed across iterations,
    only the objective data and the fronthaul reweights move."""

    def __init__(self, problem: SlotProblem, config: SystemConfig):
        k_r, d = problem.channels.h.shape
        n, l_r = config.num_rrh, config.antennas_rrh
        forms, weights, caps, kinds = [], [], [], []
        self.fronthaul_rows = []
        ones = np.ones(k_r)
        for rrh in range(n):
            mask = np.zeros(2 * d)
            mask[rrh * l_r:(rrh + 1) * l_r] = 1.0
            mask[d + rrh * l_r:d + (rrh + 1) * l_r] = 1.0
            forms.append(np.diag(mask))
            weights.append(ones)
            caps.append(problem.p_max)
            kinds.append("power")
        for m in range(problem.phi_max.shape[0]):
            g_m = problem.channels.g[m]
            forms.append(qcqp.lift_matrix(np.outer(g_m, g_m.conj())))
            weights.append(ones)
            caps.append(float(problem.phi_max[m]))
            kinds.append("interference")
        for rrh in range(n):
            cap = float(problem.fronthaul_cap[rrh])
            if not np.isfinite(cap):
                continue
            mask = np.zeros(2 * d)
            mask[rrh * l_r:(rrh + 1) * l_r] = 1.0
            mask[d + rrh * l_r:d + (rrh + 1) * l_r] = 1.0
            forms.append(np.diag(mask))
            weights.append(np.zeros(k_r))
            caps.append(cap)
            kinds.append("fronthaul")
            self.fronthaul_rows.append((len(caps) - 1, rrh))
        self.kinds = kinds
        forms = np.stack(forms) if forms else np.zeros((0, 2 * d, 2 * d))
        weights = np.stack(weights) if weights else np.zeros((0, k_r))
        self.core = qcqp._RealCore(np.zeros((2 * d, 2 * d)), np.zeros((k_r, 2 * d)),
                                   forms, weights, np.asarray(caps, dtype=float))

    def solve(self, problem: SlotProblem, u, w, warm):
        quad, lin = _objective_terms(problem, u, w)
        self.core.set_objective(qcqp.lift_matrix(quad), qcqp.lift_vector(lin))
        for row, rrh in self.fronthaul_rows:
            self.core.set_weights(row, problem.beta[rrh] * problem.r_tilde)
        x, objective, q, lam, kkt, status, iters = qcqp.run_prepared(
            self.core, tol=QCQP_TOL, warm_multipliers=warm)
        return qcqp.unlift_vector(x), objective, lam, status

    def objective_of(self, v: np.ndarray) -> float:
        return self.core.objective_of(qcqp.lift_vector(v))

    def norm_constraint_values(self, v: np.ndarray) -> np.ndarray:
        q, _ = self.core.constraint_values(qcqp.lift_vector(v))
        return q

    def feasible(self, v: np.ndarray, tol: float = 1e-9) -> bool:
        return bool(np.all(self.norm_constraint_values(v) <= 1.0 + tol))

    def max_violation(self, v: np.ndarray, kind: str) -> float:
        q = self.norm_constraint_values(v)
        rows = [i for i, k in enumerate(self.kinds) if k == kind]
        if not rows:
            return 0.0
        return float(max(0.0, np.max(q[rows] - 1.0)))


EXTRAPOLATION_LADDER = (1.0, 3.0, 9.0)  # trial step lengths along the last displacement


def run_algorithm1(problem: SlotProblem, config: SystemConfig,
                   init_beams: BeamformerSet | None = None,
                   record_surrogate: bool = False):
    """Iterate receiver / weight / beamformer / reweight updates to a local optimum.

    Stops when the relative EE change falls below convergence_tol (immediately if
    the reference EE is exactly zero) or after max_wmmse_iters sweeps. Returns
    (beams, SlotMetrics, iterations).

    With record_surrogate the SlotMetrics carries the surrogate objective
    evaluated at each sweep's refreshed receivers/weights; that sequence is
    non-increasing by construction (subproblem descent plus the guarded
    extrapolation, which only ever accepts strictly better slot objectives).
    """
    channels = problem.channels
    beams = (init_beams if init_beams is not None else problem.init_beams).copy()

    if not (np.any(problem.x > 0) or np.any(problem.y > 0)):
        # zero-weight slot: every feasible action scores 0, take the zero beams
        beams.v[:] = 0.0
        metrics = _finish_metrics(problem, beams, config, iters=1,
                                  converged=True, qcqp_failures=0, solver=None)
        return beams, metrics, 1

    solver = _SlotSolver(problem, config)
    rates = compute_rates(channels, beams)
    powers = compute_powers(beams)
    eta = compute_eta_ee(rates, powers, config)
    problem.r_tilde = rates
    problem.beta = reweighting(beams, config.kappa_reg)

    warm = None
    qcqp_failures = 0
    converged = False
    iters = 0
    v_prev = beams.v.copy()
    surrogate_path = [] if record_surrogate else None
    for iters in range(1, config.max_wmmse_iters + 1):
        eta_star = eta
        u = update_receivers(channels, beams)
        e = compute_mses(u, channels, beams)
        w = 1.0 / e
        if record_surrogate:
            rate_part = float(problem.y @ (w * e - np.log(w))) / math.log(2.0)
            surrogate_path.append(rate_part + float(problem.x @ powers))
        v_new, sub_obj, lam, status = solver.solve(problem, u, w, warm)
        # keep the incoming beams only when they are feasible for the current
        # linearization: after a beta/R-tilde refresh they may not be, and then
        # the subproblem optimum legitimately exceeds the incoming objective
        if status == "numerical_failure":
            qcqp_failures += 1
            if solver.feasible(beams.v):
                v_new = beams.v
        elif sub_obj > solver.objective_of(beams.v) + 1e-12 and solver.feasible(beams.v):
            v_new = beams.v
        else:
            warm = lam
        rates, powers = _rates_powers(channels, v_new, beams)
        if iters > 1:
            # guarded extrapolation along the last displacement: accept the best
            # trial that stays feasible and strictly improves the slot objective
            # (each accepted point keeps the sweep-boundary surrogate descending)
            base = v_new
            best = float(problem.x @ powers - problem.y @ rates)
            step = base - v_prev
            for theta in EXTRAPOLATION_LADDER:
                cand = base + theta * step
                cand_rates, cand_powers = _rates_powers(channels, cand, beams)
                val = float(problem.x @ cand_powers - problem.y @ cand_rates)
                if val < best and solver.feasible(cand):
                    best = val
                    v_new, rates, powers = cand, cand_rates, cand_powers
        v_prev = beams.v
        beams = BeamformerSet(v=v_new, num_rrh=beams.num_rrh, ant_per_rrh=beams.ant_per_rrh)
        eta = compute_eta_ee(rates, powers, config)
        problem.beta = reweighting(beams, config.kappa_reg)
        problem.r_tilde = rates
        if eta_star == 0.0 or abs(eta_star - eta) <= config.convergence_tol * abs(eta_star):
            converged = True
            break

    metrics = _finish_metrics(problem, beams, config, iters=iters,
                              converged=converged, qcqp_failures=qcqp_failures,
                              solver=solver)
    if record_surrogate:
        metrics.surrogate_path = np.asarray(surrogate_path)
    return beams, metrics, iters


def _rates_powers(channels: ChannelState, v: np.ndarray, template: BeamformerSet):
    b = BeamformerSet(v=v, num_rrh=template.num_rrh, ant_per_rrh=template.ant_per_rrh)
    return compute_rates(channels, b), compute_powers(b)


def _finish_metrics(problem: SlotProblem, beams: BeamformerSet, config: SystemConfig,
                    iters: int, converged: bool, qcqp_failures: int,
                    solver: "_SlotSolver | None") -> SlotMetrics:
    channels = problem.channels
    rates = compute_rates(channels, beams)
    powers = compute_powers(beams)
    eta = compute_eta_ee(rates, powers, config)
    try:
        eta_trad = compute_eta_ee_traditional(rates, powers, config)
    except ValueError:
        eta_trad = math.nan
    interference = compute_interferences(channels, beams)
    fronthaul = compute_fronthauls(rates, beams, config.eps_active)

    c3 = float(np.max(np.maximum(powers - problem.p_max, 0.0) / problem.p_max))
    c4 = float(np.max(np.maximum(interference - problem.phi_max, 0.0) / problem.phi_max))
    c6 = solver.max_violation(beams.v, "fronthaul") if solver is not None else 0.0
    status = "converged" if converged else "max_iters"
    if qcqp_failures:
        status += f"+qcqp_fallback:{qcqp_failures}"
    return SlotMetrics(rates=rates, powers=powers, eta_ee=eta, eta_ee_trad=eta_trad,
                       interference=interference, fronthaul=fronthaul,
                       wmmse_iters=iters, solver_status=status,
                       c3_rel_viol=c3, c4_rel_viol=c4, c6_rel_viol=c6)
