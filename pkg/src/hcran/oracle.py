"""Independent brute-force and closed-form baselines.

These live in the shipped library (not the test tree) so the CLI `verify`
command can replay them in CI. They deliberately re-derive every quantity from
first principles instead of calling into the solver path they validate.
"""

from __future__ import annotations

import math

import numpy as np

from .controller import SlotProblem
from .metrics import BeamformerSet
from .scenario import ChannelState, MbsBeamformers, SystemConfig

_CHUNK = 1 << 18  # grid points evaluated per vectorized block


def _grid_axis(halfwidth: float, resolution: float) -> np.ndarray:
    """Integer multiples of the resolution covering [-halfwidth, halfwidth]; 0 exact."""
    steps = int(math.floor(halfwidth / resolution + 1e-12))
    pos = resolution * np.arange(0, steps + 1)
    return np.concatenate([-pos[1:][::-1], pos])


def _grid_chunks(axis: np.ndarray, dim: int):
    """Yield (chunk, dim) blocks of the full Cartesian grid without materializing it."""
    shape = (axis.size,) * dim
    total = axis.size ** dim
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total))
        coords = np.unravel_index(idx, shape)
        yield axis[np.stack(coords, axis=1)]


def scalar_closed_form(x_weight: float, y_weight: float, h: float, phi: float,
                       p_max: float) -> float:
    """Maximizer of Y log2(1 + h^2 p / phi) - X p over p in [0, p_max].

    Stationarity gives p* = Y/(X ln2) - phi/h^2, clamped to the box.
    """
    if min(x_weight, y_weight) < 0 or h <= 0 or phi <= 0 or p_max <= 0:
        raise ValueError("scalar closed form needs nonnegative weights and positive h, phi, p_max")
    if y_weight == 0.0:
        return 0.0
    if x_weight == 0.0:
        return p_max
    p_star = y_weight / (x_weight * math.log(2.0)) - phi / (h * h)
    return float(min(max(p_star, 0.0), p_max))


def power_grid_search(x_weight: float, y_weight: float, h: float, phi: float,
                      p_max: float, resolution: float):
    """1-D grid oracle for the same scalar objective; returns (p_best, objective)."""
    grid = np.arange(0.0, p_max + resolution, resolution)
    grid = grid[grid <= p_max]
    obj = y_weight * np.log2(1.0 + h * h * grid / phi) - x_weight * grid
    i = int(np.argmax(obj))
    return float(grid[i]), float(obj[i])


def slot_objective(problem: SlotProblem, beams_flat: np.ndarray, config: SystemConfig):
    """Vectorized sum X_n P_n - sum Y_k R_k over candidate beam stacks.

    beams_flat has shape (M, K_R, d) complex; returns (objective, feasible) with
    feasibility = power caps, interference caps and the activity-threshold fronthaul load.
    """
    h, g, phi = problem.channels.h, problem.channels.g, problem.channels.phi
    n, l_r = config.num_rrh, config.antennas_rrh
    cross = np.einsum("ki,mji->mkj", h.conj(), beams_flat)
    mag = np.abs(cross) ** 2
    sig = np.einsum("mkk->mk", mag)
    denom = mag.sum(axis=2) - sig + phi[None, :]
    rates = np.log2(1.0 + sig / denom)

    block_pow = np.abs(beams_flat) ** 2
    block_pow = block_pow.reshape(block_pow.shape[0], block_pow.shape[1], n, l_r).sum(axis=3)
    powers = block_pow.sum(axis=1)                                   # (M, N)
    interference = np.sum(np.abs(np.einsum("ki,mji->mkj", g.conj(), beams_flat)) ** 2, axis=2)
    active = block_pow > config.eps_active                           # (M, K, N)
    load = np.einsum("mkn,mk->mn", active.astype(float), rates)

    objective = powers @ problem.x - rates @ problem.y
    feasible = (np.all(powers <= problem.p_max * (1 + 1e-9), axis=1)
                & np.all(interference <= problem.phi_max[None, :] * (1 + 1e-9), axis=1)
                & np.all(load <= problem.fronthaul_cap[None, :] * (1 + 1e-9), axis=1))
    return objective, feasible


def grid_search_slot(problem: SlotProblem, config: SystemConfig, resolution: float):
    """Exhaustive search of the slot problem over a real coordinate grid.

    Every real/imaginary beam coordinate ranges over [-sqrt(p_max), sqrt(p_max)]
    (no single coordinate can exceed the per-RRH power cap). Only instances with
    at most 4 real dimensions are accepted; returns (beams, objective).
    """
    k_r, d = problem.channels.h.shape
    dim = 2 * k_r * d
    if dim > 4:
        raise ValueError("grid search is limited to 4 real dimensions")
    axis = _grid_axis(math.sqrt(problem.p_max), resolution)

    best_obj, best_pow, best_point = math.inf, math.inf, None
    for chunk in _grid_chunks(axis, dim):
        beams = (chunk[:, :k_r * d] + 1j * chunk[:, k_r * d:]).reshape(-1, k_r, d)
        obj, feas = slot_objective(problem, beams, config)
        obj = np.where(feas, obj, math.inf)
        # ties broken toward the cheapest point so degenerate objectives pick 0
        power = np.sum(np.abs(beams) ** 2, axis=(1, 2))
        order = np.lexsort((power, obj))
        i = int(order[0])
        if obj[i] < best_obj - 1e-15 or (obj[i] < best_obj + 1e-15 and power[i] < best_pow):
            best_obj, best_pow, best_point = float(obj[i]), float(power[i]), beams[i].copy()
    if best_point is None:
        raise RuntimeError("no feasible grid point found; zero should always qualify")
    beams = BeamformerSet(v=best_point, num_rrh=config.num_rrh,
                          ant_per_rrh=config.antennas_rrh)
    return beams, best_obj


def grid_search_qcqp(quad, lin, forms, weights, caps, halfwidth: float, resolution: float):
    """Brute-force oracle for the real QCQP core over the box [-halfwidth, halfwidth]^D.

    Returns (x_best, objective). Intended for tiny instances only.
    """
    quad = np.asarray(quad, dtype=float)
    lin = np.atleast_2d(np.asarray(lin, dtype=float))
    k_b, d = lin.shape
    dim = k_b * d
    axis = _grid_axis(halfwidth, resolution)
    best_obj, best_x = math.inf, None
    caps = np.asarray(caps, dtype=float)
    forms = np.asarray(forms, dtype=float)
    weights = np.asarray(weights, dtype=float)

    for chunk in _grid_chunks(axis, dim):
        m = chunk.shape[0]
        flat = chunk.reshape(m * k_b, d)
        quad_val = ((flat @ quad) * flat).sum(axis=1).reshape(m, k_b).sum(axis=1)
        lin_val = chunk @ lin.reshape(-1)
        obj = quad_val - 2.0 * lin_val
        feas = np.ones(m, dtype=bool)
        for c in range(caps.size):
            per_block = ((flat @ forms[c]) * flat).sum(axis=1).reshape(m, k_b)
            feas &= per_block @ weights[c] <= caps[c] * (1 + 1e-9)
        obj = np.where(feas, obj, math.inf)
        i = int(np.argmin(obj))
        if obj[i] < best_obj:
            best_obj, best_x = float(obj[i]), chunk[i].reshape(k_b, d).copy()
    return best_x, best_obj


def monte_carlo_mse(k: int, u_k: complex, channels: ChannelState, beams: BeamformerSet,
                    mbs_beams: MbsBeamformers, sigma2: float, samples: int,
                    rng: np.random.Generator) -> float:
    """Stochastic estimate of the symbol MSE by simulating the received signal.

    Draws unit-variance circular symbols for every RUE and MUE stream plus
    receiver noise, forms y_k, applies the conj(u)*y estimate, and averages
    |estimate - s_k|^2.
    """
    if samples < 10_000:
        raise ValueError("use at least 1e4 samples for a meaningful estimate")
    coeff_rue = channels.h[k].conj() @ beams.v.T            # (K_R,)
    coeff_mue = channels.g0[k].conj() @ mbs_beams.v0.T      # (K_M,)

    def draw(shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)

    s_rue = draw((samples, coeff_rue.size))
    s_mue = draw((samples, coeff_mue.size))
    noise = math.sqrt(sigma2) * draw(samples)
    y = s_rue @ coeff_rue + s_mue @ coeff_mue + noise
    est = np.conj(u_k) * y
    return float(np.mean(np.abs(est - s_rue[:, k]) ** 2))
