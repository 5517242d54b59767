"""Random arrivals, actual/virtual queue evolution, and stability diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TrafficConfig:
    """Per-RUE arrival law: i.i.d. uniform on [0, 2*lam] so the mean is lam.

    a_max is the declared peak (feeds the drift bound constant); it must cover the
    uniform law's support, i.e. a_max >= 2*lam.
    """

    lam: np.ndarray    # (K_R,) mean arrival rate, bit/slot/Hz
    a_max: np.ndarray  # (K_R,) peak arrival rate, bit/slot/Hz

    @classmethod
    def for_rues(cls, num_rue: int, lam, a_max=None) -> "TrafficConfig":
        lam_v = np.atleast_1d(np.asarray(lam, dtype=float))
        if lam_v.size == 1:
            lam_v = np.full(num_rue, float(lam_v[0]))
        if lam_v.shape != (num_rue,):
            raise ValueError(f"lambda must be a scalar or length-{num_rue} sequence")
        if a_max is None:
            amax_v = 2.0 * lam_v
        else:
            amax_v = np.atleast_1d(np.asarray(a_max, dtype=float))
            if amax_v.size == 1:
                amax_v = np.full(num_rue, float(amax_v[0]))
        cfg = cls(lam=lam_v, a_max=amax_v)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if np.any(self.lam < 0):
            raise ValueError("arrival rates must be nonnegative")
        if np.any(self.a_max < 2.0 * self.lam - 1e-12):
            raise ValueError("a_max must cover the uniform law's peak 2*lambda")


@dataclass
class QueueState:
    """Actual backlogs Q_k, virtual power backlogs H_n, current-slot arrivals A_k."""

    q: np.ndarray  # (K_R,) bit/slot/Hz
    h: np.ndarray  # (N,) watt-slots
    a: np.ndarray  # (K_R,) bit/slot/Hz

    @classmethod
    def zeros(cls, num_rue: int, num_rrh: int) -> "QueueState":
        return cls(q=np.zeros(num_rue), h=np.zeros(num_rrh), a=np.zeros(num_rue))

    def copy(self) -> "QueueState":
        return QueueState(q=self.q.copy(), h=self.h.copy(), a=self.a.copy())

    def validate(self) -> None:
        for name, arr in (("Q", self.q), ("H", self.h), ("A", self.a)):
            if np.any(~np.isfinite(arr)) or np.any(arr < 0):
                raise ValueError(f"queue state {name} must be nonnegative and finite")


def draw_arrivals(traffic: TrafficConfig, slot_rng: np.random.Generator) -> np.ndarray:
    """One slot of arrivals, A_k ~ U[0, 2*lam_k] independently."""
    return slot_rng.uniform(0.0, 2.0 * traffic.lam)


def update_actual_queue(q, r, a):
    """Q' = max(Q - R, 0) + A, elementwise."""
    q, r, a = (np.asarray(x, dtype=float) for x in (q, r, a))
    if np.any(q < 0) or np.any(r < 0) or np.any(a < 0):
        raise ValueError("queue update inputs must be nonnegative")
    return np.maximum(q - r, 0.0) + a


def update_virtual_queue(h, p, p_avg):
    """H' = max(H - p_avg + P, 0), elementwise."""
    h, p = np.asarray(h, dtype=float), np.asarray(p, dtype=float)
    if np.any(h < 0) or np.any(p < 0) or p_avg < 0:
        raise ValueError("virtual queue update inputs must be nonnegative")
    return np.maximum(h - p_avg + p, 0.0)


def stability_slope(queue_trace: np.ndarray, window_fraction: float = 0.25) -> np.ndarray:
    """Empirical mean-rate-stability diagnostic: mean of Q(t)/t over the trailing window.

    queue_trace has shape (T, num_queues) (or (T,) for one queue); slot index t
    starts at 1 for the division. Small values certify that Q(t)/t -> 0.
    """
    trace = np.asarray(queue_trace, dtype=float)
    if trace.ndim == 1:
        trace = trace[:, None]
    t_len = trace.shape[0]
    if t_len < 100:
        raise ValueError("need at least 100 slots to estimate a stability slope")
    if not 0.0 < window_fraction <= 1.0:
        raise ValueError("window_fraction must lie in (0, 1]")
    start = min(t_len - 1, int(np.floor(t_len * (1.0 - window_fraction))))
    t = np.arange(1, t_len + 1, dtype=float)[start:, None]
    return np.mean(trace[start:, :] / t, axis=0)
