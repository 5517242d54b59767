"""Per-slot physical-layer quantities: rates, powers, EE metrics, interference, fronthaul."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import ChannelState, SystemConfig


@dataclass
class BeamformerSet:
    """Network-wide beamformers, one stacked length-(N*L_R) vector per RUE.

    Block n of RUE k (the serving contribution of RRH n) is v[k, n*L_R:(n+1)*L_R].
    """

    v: np.ndarray      # (K_R, N*L_R) complex
    num_rrh: int
    ant_per_rrh: int

    @classmethod
    def zeros(cls, num_rue: int, num_rrh: int, ant_per_rrh: int) -> "BeamformerSet":
        return cls(v=np.zeros((num_rue, num_rrh * ant_per_rrh), dtype=complex),
                   num_rrh=num_rrh, ant_per_rrh=ant_per_rrh)

    def copy(self) -> "BeamformerSet":
        return BeamformerSet(v=self.v.copy(), num_rrh=self.num_rrh, ant_per_rrh=self.ant_per_rrh)

    def block(self, n: int) -> np.ndarray:
        """(K_R, L_R) view of every RUE's block toward RRH n."""
        l = self.ant_per_rrh
        return self.v[:, n * l:(n + 1) * l]

    def block_powers(self) -> np.ndarray:
        """(N, K_R) matrix of per-link powers ||v_{n,k}||^2."""
        k, d = self.v.shape
        blocks = np.abs(self.v) ** 2
        return blocks.reshape(k, self.num_rrh, self.ant_per_rrh).sum(axis=2).T

    def decompose(self):
        """Split each v_k into (||v_k||, unit direction); zero vectors keep a zero direction."""
        norms = np.linalg.norm(self.v, axis=1)
        dirs = np.zeros_like(self.v)
        nz = norms > 0
        dirs[nz] = self.v[nz] / norms[nz, None]
        return norms, dirs

    @classmethod
    def reconstruct(cls, norms, dirs, num_rrh: int, ant_per_rrh: int) -> "BeamformerSet":
        return cls(v=np.asarray(norms)[:, None] * np.asarray(dirs),
                   num_rrh=num_rrh, ant_per_rrh=ant_per_rrh)


@dataclass
class SlotMetrics:
    """Everything the harness records about one served slot."""

    rates: np.ndarray          # (K_R,) bit/slot/Hz
    powers: np.ndarray         # (N,) W
    eta_ee: float              # weighted EE utility
    eta_ee_trad: float         # bit/Hz/Joule; NaN if total power is zero
    interference: np.ndarray   # (K_M,) W at each MUE
    fronthaul: np.ndarray      # (N,) bit/slot/Hz accumulated active rate
    wmmse_iters: int = 0
    solver_status: str = ""
    c3_rel_viol: float = 0.0   # max over RRHs of (P_n - p_max)/p_max, clipped at 0
    c4_rel_viol: float = 0.0
    c6_rel_viol: float = 0.0
    surrogate_path: np.ndarray | None = None  # filled only when recording is requested


def _check_dims(channels: ChannelState, beams: BeamformerSet) -> None:
    if channels.h.shape[1] != beams.v.shape[1]:
        raise ValueError("channel and beamformer stacked dimensions disagree")


def compute_rates(channels: ChannelState, beams: BeamformerSet) -> np.ndarray:
    """R_k = log2(1 + SINR_k) for every RUE at once."""
    _check_dims(channels, beams)
    cross = channels.h.conj() @ beams.v.T            # (K, K), entry [k, j] = h_k^H v_j
    mag = np.abs(cross) ** 2
    sig = np.diag(mag)
    denom = mag.sum(axis=1) - sig + channels.phi
    return np.log2(1.0 + sig / denom)


def compute_rate(k: int, channels: ChannelState, beams: BeamformerSet) -> float:
    return float(compute_rates(channels, beams)[k])


def compute_powers(beams: BeamformerSet) -> np.ndarray:
    """P_n = sum_k ||v_{n,k}||^2 for every RRH."""
    return beams.block_powers().sum(axis=1)


def compute_power(n: int, beams: BeamformerSet) -> float:
    return float(compute_powers(beams)[n])


def compute_eta_ee(rates, powers, config: SystemConfig) -> float:
    """Weighted EE utility: (alpha/K_R) sum omega_k R_k - ((1-alpha)/N) sum mu_n P_n."""
    rates = np.asarray(rates, dtype=float)
    powers = np.asarray(powers, dtype=float)
    if rates.shape != (config.num_rue,) or powers.shape != (config.num_rrh,):
        raise ValueError("rates/powers lengths must match K_R and N")
    rate_term = config.alpha / config.num_rue * float(config.omega @ rates)
    power_term = (1.0 - config.alpha) / config.num_rrh * float(config.mu @ powers)
    return rate_term - power_term


def compute_eta_ee_traditional(rates, powers, config: SystemConfig,
                               rate_weights=None, power_weights=None) -> float:
    """Ratio EE (bit/Hz/Joule): sum omega'_k R_k / sum mu'_n P_n, unit weights by default."""
    rates = np.asarray(rates, dtype=float)
    powers = np.asarray(powers, dtype=float)
    w_r = np.ones_like(rates) if rate_weights is None else np.asarray(rate_weights, dtype=float)
    w_p = np.ones_like(powers) if power_weights is None else np.asarray(power_weights, dtype=float)
    denom = float(w_p @ powers)
    if denom <= 0.0:
        raise ValueError("traditional EE is undefined at zero total weighted power")
    return float(w_r @ rates) / denom


def compute_interferences(channels: ChannelState, beams: BeamformerSet) -> np.ndarray:
    """Inter-tier interference sum_j |g_m^H v_j|^2 at every MUE."""
    _check_dims(channels, beams)
    cross = channels.g.conj() @ beams.v.T            # (K_M, K_R)
    return np.sum(np.abs(cross) ** 2, axis=1)


def compute_interference(m: int, channels: ChannelState, beams: BeamformerSet) -> float:
    return float(compute_interferences(channels, beams)[m])


def compute_fronthauls(rates, beams: BeamformerSet, eps_active: float) -> np.ndarray:
    """Accumulated active-link rate per RRH: sum_k 1{||v_{n,k}||^2 > eps_active} R_k."""
    if eps_active <= 0:
        raise ValueError("eps_active must be positive")
    active = beams.block_powers() > eps_active       # (N, K)
    return active @ np.asarray(rates, dtype=float)


def compute_fronthaul(n: int, rates, beams: BeamformerSet, eps_active: float) -> float:
    return float(compute_fronthauls(rates, beams, eps_active)[n])
