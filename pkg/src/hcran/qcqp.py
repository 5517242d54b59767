"""Convex complex-valued QCQP solver for the beamformer subproblem.

Problem shape: one shared Hermitian PSD quadratic form, a linear term per
beamformer, and weighted-sum quadratic constraints,

    minimize    sum_k  v_k^H Q v_k - 2 Re{b_k^H v_k}
    subject to  sum_k  w_{c,k} v_k^H F_c v_k  <=  cap_c,   c = 1..C,

with F_c Hermitian PSD, w_{c,k} >= 0 and cap_c > 0, so v = 0 is strictly
feasible and strong duality holds.

Method: complex vectors are lifted to real pairs (Re, Im) and all forms to real
symmetric matrices, after which the dual is solved by a semismooth Newton on the
complementarity system min(lam_c, slack_c) = 0 (constraints normalized to unit
caps). For fixed multipliers the primal blocks decouple into batched linear
solves, which also back the Newton direction. The result carries an explicit
KKT certificate: stationarity, primal feasibility and complementary slackness
residuals, whose maximum is `kkt_residual`.

Residual normalization: stationarity is scaled by (1 + max |b|), feasibility is
relative to each cap, complementarity is scaled by (1 + |objective|).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITERS = 500
FAILURE_FACTOR = 1e3  # residuals above FAILURE_FACTOR * tol mean numerical_failure


@dataclass
class QuadConstraint:
    """One weighted-sum quadratic constraint sum_k weights[k] * v_k^H form v_k <= cap."""

    form: np.ndarray      # (d, d) Hermitian PSD
    weights: np.ndarray   # (K,) nonnegative per-beamformer scale
    cap: float            # > 0 (finite; drop infinite-cap constraints upstream)
    kind: str = ""        # "power" | "interference" | "fronthaul" | free-form


@dataclass
class QcqpProblem:
    quad: np.ndarray                    # (d, d) Hermitian PSD, shared across k
    lin: np.ndarray                     # (K, d) complex linear terms b_k
    constraints: list                   # list[QuadConstraint]


@dataclass
class QcqpSolution:
    beams: np.ndarray        # (K, d) complex minimizer
    objective: float
    slacks: np.ndarray       # (C,) cap_c - q_c(beams), original units
    multipliers: np.ndarray  # (C,) duals in unit-cap scaling (warm-start input)
    kkt_residual: float
    status: str              # "optimal" | "max_iters" | "numerical_failure"
    iterations: int


def lift_matrix(s: np.ndarray) -> np.ndarray:
    """Hermitian (d,d) -> real symmetric (2d,2d) so v^H S v = x^T lift(S) x."""
    d = s.shape[0]
    out = np.empty((2 * d, 2 * d))
    re, im = np.real(s), np.imag(s)
    out[:d, :d] = re
    out[:d, d:] = -im
    out[d:, :d] = im
    out[d:, d:] = re
    return out


def lift_vector(v: np.ndarray) -> np.ndarray:
    """(..., d) complex -> (..., 2d) real with Re{b^H v} = lift(b)^T lift(v)."""
    return np.concatenate([np.real(v), np.imag(v)], axis=-1)


def unlift_vector(x: np.ndarray) -> np.ndarray:
    d2 = x.shape[-1]
    d = d2 // 2
    return x[..., :d] + 1j * x[..., d:]


def objective_value(problem: QcqpProblem, beams: np.ndarray) -> float:
    quad_part = np.einsum("ki,ij,kj->", beams.conj(), problem.quad, beams)
    lin_part = np.einsum("ki,ki->", problem.lin.conj(), beams)
    return float(np.real(quad_part) - 2.0 * np.real(lin_part))


def constraint_values(problem: QcqpProblem, beams: np.ndarray) -> np.ndarray:
    """q_c(beams) = sum_k w_ck v_k^H F_c v_k for every constraint."""
    vals = np.empty(len(problem.constraints))
    for i, con in enumerate(problem.constraints):
        forms = np.real(np.einsum("ki,ij,kj->k", beams.conj(), con.form, beams))
        vals[i] = float(con.weights @ forms)
    return vals


@dataclass
class FeasibilityReport:
    slack: np.ndarray      # (C,) cap - value
    rel_slack: np.ndarray  # (C,) slack / cap
    kinds: list
    ok: bool


def check_feasible(beams: np.ndarray, problem: QcqpProblem, tol: float = DEFAULT_TOL) -> FeasibilityReport:
    """Per-constraint slack report; ok when every relative violation is within tol."""
    caps = np.array([c.cap for c in problem.constraints], dtype=float)
    vals = constraint_values(problem, beams)
    slack = caps - vals
    rel = slack / caps
    return FeasibilityReport(slack=slack, rel_slack=rel,
                             kinds=[c.kind for c in problem.constraints],
                             ok=bool(np.all(rel >= -tol)))


class _RealCore:
    """Dual semismooth-Newton over the real lifting.

    Reusable across related solves: `set_objective` swaps the quadratic/linear
    data and `set_weights` rewrites one constraint's per-block weights without
    re-normalizing the cached unit-cap forms.
    """

    def __init__(self, quad, lin, forms, weights, caps):
        self.caps = caps               # (C,)
        # normalize each constraint to cap 1
        self.bn = forms / caps[:, None, None] if len(caps) else forms
        self.num_con = len(caps)
        self.dim = quad.shape[0]
        self._bn_flat = self.bn.reshape(self.num_con, self.dim * self.dim)
        self.w = weights               # (C, K)
        self.set_objective(quad, lin)

    def set_objective(self, quad, lin):
        self.a_mat = quad              # (D, D) symmetric PSD
        self.lin = lin                 # (K, D)
        self.num_blocks = lin.shape[0]
        self.lin_scale = 1.0 + np.max(np.abs(lin)) if lin.size else 1.0

    def set_weights(self, index: int, values: np.ndarray) -> None:
        self.w[index] = values

    def objective_of(self, x: np.ndarray) -> float:
        return float(np.sum((x @ self.a_mat) * x) - 2.0 * np.sum(self.lin * x))

    def block_matrices(self, lam: np.ndarray) -> np.ndarray:
        if not self.num_con:
            return np.broadcast_to(self.a_mat, (self.num_blocks, self.dim, self.dim)).copy()
        scale = (lam[:, None] * self.w).T                     # (K, C)
        m = (scale @ self._bn_flat).reshape(self.num_blocks, self.dim, self.dim)
        m += self.a_mat
        return m

    def solve_blocks(self, m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        try:
            return np.linalg.solve(m, rhs)
        except np.linalg.LinAlgError:
            # PSD-singular block: fall back to least-squares (min-norm) solves
            out = np.empty(rhs.shape, dtype=float)
            for k in range(m.shape[0]):
                out[k] = np.linalg.lstsq(m[k], rhs[k], rcond=None)[0]
            return out

    def primal(self, lam: np.ndarray) -> np.ndarray:
        m = self.block_matrices(lam)
        return self.solve_blocks(m, self.lin[..., None])[..., 0]

    def constraint_values(self, x: np.ndarray):
        if not self.num_con:
            return np.zeros(0), np.zeros((0, self.dim, self.num_blocks))
        applied = np.matmul(self.bn, x.T)                     # (C, D, K)
        per_block = np.sum(applied * x.T[None, :, :], axis=1)  # (C, K)
        q = np.sum(self.w * per_block, axis=1)
        return q, applied

    def phi(self, lam: np.ndarray):
        """Complementarity map min(lam, slack) plus the state used to build it."""
        x = self.primal(lam)
        q, applied = self.constraint_values(x)
        slack = 1.0 - q
        return np.minimum(lam, slack), x, q, applied

    def newton_step(self, lam, x, q, applied, slack):
        m = self.block_matrices(lam)
        weighted = applied * self.w[:, None, :]               # (C, D, K)
        rhs = weighted.transpose(2, 1, 0)                     # (K, D, C)
        z = self.solve_blocks(m, np.ascontiguousarray(rhs))   # (K, D, C)
        lhs_flat = weighted.transpose(0, 2, 1).reshape(self.num_con, -1)  # (C, K*D)
        z_flat = z.reshape(-1, self.num_con)                  # (K*D, C)
        jac_q = -2.0 * (lhs_flat @ z_flat)
        newton_mat = -jac_q
        rows_primal = lam <= slack
        if np.any(rows_primal):
            newton_mat[rows_primal] = 0.0
            newton_mat[rows_primal, rows_primal] = 1.0
        rhs_vec = -np.minimum(lam, slack)
        try:
            return np.linalg.solve(newton_mat, rhs_vec)
        except np.linalg.LinAlgError:
            return np.linalg.lstsq(newton_mat, rhs_vec, rcond=None)[0]

    def run(self, warm, tol, max_iters):
        num_con = self.num_con
        lam = np.zeros(num_con) if warm is None else np.maximum(np.asarray(warm, float), 0.0)
        if lam.shape != (num_con,):
            lam = np.zeros(num_con)
        target = max(1e-12, 1e-3 * tol)
        phi, x, q, applied = self.phi(lam)
        best = (np.max(np.abs(phi)) if num_con else 0.0, lam.copy(), x)
        iters = 0
        while num_con and iters < max_iters:
            res = np.max(np.abs(phi))
            if res <= target:
                break
            iters += 1
            slack = 1.0 - q
            step = self.newton_step(lam, x, q, applied, slack)
            merit = float(phi @ phi)
            t, accepted = 1.0, False
            for _ in range(40):
                lam_t = np.maximum(lam + t * step, 0.0)
                phi_t, x_t, q_t, applied_t = self.phi(lam_t)
                if float(phi_t @ phi_t) <= merit * (1.0 - 1e-4 * t) + 1e-300:
                    lam, phi, x, q, applied = lam_t, phi_t, x_t, q_t, applied_t
                    accepted = True
                    break
                t *= 0.5
            if not accepted:
                # diagonal-curvature projected ascent fallback on the dual
                m = self.block_matrices(lam)
                weighted = applied * self.w[:, None, :]
                z = self.solve_blocks(m, np.ascontiguousarray(weighted.transpose(2, 1, 0)))
                curv = 2.0 * np.einsum("cik,kic->c", weighted, z)
                step_sizes = 1.0 / np.maximum(curv, 1e-12)
                lam = np.maximum(lam + step_sizes * (q - 1.0), 0.0)
                phi, x, q, applied = self.phi(lam)
            res_now = np.max(np.abs(phi))
            if res_now < best[0]:
                best = (res_now, lam.copy(), x)
        if num_con and np.max(np.abs(phi)) > best[0]:
            _, lam, x = best
            phi, x, q, applied = self.phi(lam)
        return lam, x, q, iters

    def residuals(self, lam, x, q, objective):
        m = self.block_matrices(lam)
        stat = np.max(np.abs(np.einsum("kij,kj->ki", m, x) - self.lin)) / self.lin_scale
        if self.num_con:
            feas = float(np.max(np.maximum(q - 1.0, 0.0)))
            comp = float(np.max(np.abs(lam * (1.0 - q)))) / (1.0 + abs(objective))
        else:
            feas = comp = 0.0
        return max(float(stat), feas, comp)


def solve_real(quad, lin, forms, weights, caps, tol=DEFAULT_TOL,
               max_iters=DEFAULT_MAX_ITERS, warm_multipliers=None):
    """Real-valued core: blocks x_k in R^D, shared `quad`, forms (C, D, D).

    Returns (x, objective, q_values, multipliers, kkt_residual, status, iterations).
    """
    quad = np.asarray(quad, dtype=float)
    lin = np.atleast_2d(np.asarray(lin, dtype=float))
    forms = np.asarray(forms, dtype=float).reshape(-1, quad.shape[0], quad.shape[0])
    caps = np.asarray(caps, dtype=float).reshape(-1)
    weights = np.asarray(weights, dtype=float).reshape(len(caps), -1) if len(caps) \
        else np.zeros((0, lin.shape[0]))
    if np.any(caps <= 0):
        raise ValueError("constraint caps must be positive")
    if np.any(weights < 0):
        raise ValueError("constraint weights must be nonnegative")

    core = _RealCore(quad, lin, forms, weights, caps)
    return run_prepared(core, tol=tol, max_iters=max_iters, warm_multipliers=warm_multipliers)


def run_prepared(core: "_RealCore", tol: float = DEFAULT_TOL,
                 max_iters: int = DEFAULT_MAX_ITERS, warm_multipliers=None):
    """Run the dual iteration on an existing core (cheap re-solves after
    set_objective / set_weights updates). Same return contract as solve_real."""
    if not np.any(core.lin):
        x = np.zeros_like(core.lin)
        lam = np.zeros(core.num_con)
        return x, 0.0, np.zeros(core.num_con), lam, 0.0, "optimal", 0

    lam, x, q, iters = core.run(warm_multipliers, tol, max_iters)
    objective = core.objective_of(x)
    kkt = core.residuals(lam, x, q, objective)
    if kkt <= tol:
        status = "optimal"
    elif kkt <= FAILURE_FACTOR * tol:
        status = "max_iters"
    else:
        status = "numerical_failure"
    return x, objective, q, lam, kkt, status, iters


def solve(problem: QcqpProblem, tol: float = DEFAULT_TOL,
          max_iters: int = DEFAULT_MAX_ITERS, warm_multipliers=None) -> QcqpSolution:
    """Solve the complex QCQP; see the module docstring for the certificate contract."""
    quad = np.asarray(problem.quad)
    lin = np.asarray(problem.lin, dtype=complex)
    if quad.shape[0] != quad.shape[1] or lin.shape[1] != quad.shape[0]:
        raise ValueError("quad must be (d, d) and lin (K, d)")
    herm_gap = np.max(np.abs(quad - quad.conj().T)) if quad.size else 0.0
    if herm_gap > 1e-9 * (1.0 + np.max(np.abs(quad))):
        raise ValueError("quad must be Hermitian")

    cons = [c for c in problem.constraints if np.isfinite(c.cap)]
    forms = np.stack([lift_matrix(np.asarray(c.form)) for c in cons]) if cons \
        else np.zeros((0, 2 * quad.shape[0], 2 * quad.shape[0]))
    weights = np.stack([np.asarray(c.weights, dtype=float) for c in cons]) if cons \
        else np.zeros((0, lin.shape[0]))
    caps = np.array([c.cap for c in cons], dtype=float)

    x, objective, q, lam, kkt, status, iters = solve_real(
        lift_matrix(quad), lift_vector(lin), forms, weights, caps,
        tol=tol, max_iters=max_iters, warm_multipliers=warm_multipliers)

    beams = unlift_vector(x)
    slacks = caps - q * caps if len(caps) else np.zeros(0)
    return QcqpSolution(beams=beams, objective=objective, slacks=slacks,
                        multipliers=lam, kkt_residual=kkt, status=status,
                        iterations=iters)
