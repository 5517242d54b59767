"""Scenario ownership: configuration, node placement, fading draws, fixed MBS beams.

Geometry convention: MBS at the origin, RRHs equally spaced on a ring around it
(random rotation per seed), each RUE dropped as a hotspot user of RRH (k mod N),
MUEs uniform over the macro area. All link distances are clamped below by the
path-loss reference distance d0 = 1 m.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields

import numpy as np

REF_DISTANCE_M = 1.0  # d0: path-loss reference distance and minimum link distance

_SCENARIO_STREAM = 0  # SeedSequence tags; keep stable or saved seeds change meaning
_CHANNEL_STREAM = 1
_ARRIVAL_STREAM = 2

_GOLDEN_FRACTION = 0.381966011250105  # spreads co-served hotspot users in angle


@dataclass
class SystemConfig:
    """All scenario constants. Defaults give the desk-scale reference setup
    (1 MBS + 2 RRHs, 4 RUEs, 4 MUEs, 2 antennas each)."""

    num_rrh: int = 2            # N
    num_mbs: int = 1            # fixed at 1
    num_rue: int = 4            # K_R
    num_mue: int = 4            # K_M
    antennas_rrh: int = 2       # L_R
    antennas_mbs: int = 2       # L_M
    p_max: float = 0.22         # W, per-RRH instantaneous transmit cap
    p_avg: float = 0.2          # W, per-RRH average transmit cap (C1)
    p_mbs: float = 20.0         # W, total MBS transmit power
    fronthaul_cap: float = math.inf   # bit/slot/Hz per RRH; +inf = ideal fronthaul
    interference_cap: float = 1e-9    # W per MUE
    alpha: float = 0.5          # EE weighting between rate and power terms
    rate_weights: object = 1.0  # omega_k >= 0; scalar or per-RUE sequence
    power_weights: object = 100.0  # mu_n >= 0 (1/W); scalar or per-RRH sequence
    tradeoff: float = 50.0      # V >= 0, EE-delay tradeoff knob
    noise_psd: float = -174.0   # dBm/Hz
    bandwidth: float = 10e6     # Hz, only used to convert the PSD to sigma^2 watts
    pathloss_exponent: float = 4.0
    convergence_tol: float = 1e-4    # kappa_conv, relative eta_EE stop rule
    l1_reg: float | None = None      # kappa_reg; None -> 1e-6 * p_max
    active_link_threshold: float | None = None  # eps_active (W); None -> 1e-6 * p_max
    max_wmmse_iters: int = 100
    slots: int = 5000           # T
    rng_seed: int = 0
    # geometry (see module docstring for the layout convention)
    area_radius: float = 500.0  # m, macro coverage disk
    rrh_radius: float = 250.0   # m, RRH ring radius around the MBS
    rue_dist_min: float = 22.0  # m, hotspot annulus around the serving RRH
    rue_dist_max: float = 40.0  # m
    mue_dist_min: float = 35.0  # m, keep MUEs off the MBS mast

    @property
    def sigma2(self) -> float:
        """Noise power in watts: 10^((PSD_dBm - 30)/10) * bandwidth."""
        return 10.0 ** ((self.noise_psd - 30.0) / 10.0) * self.bandwidth

    @property
    def kappa_reg(self) -> float:
        return self.l1_reg if self.l1_reg is not None else 1e-6 * self.p_max

    @property
    def eps_active(self) -> float:
        return (self.active_link_threshold if self.active_link_threshold is not None
                else 1e-6 * self.p_max)

    @property
    def stacked_dim(self) -> int:
        """Length N * L_R of a network-wide beamformer."""
        return self.num_rrh * self.antennas_rrh

    @property
    def omega(self) -> np.ndarray:
        return _as_weight_vector(self.rate_weights, self.num_rue, "rate_weights")

    @property
    def mu(self) -> np.ndarray:
        return _as_weight_vector(self.power_weights, self.num_rrh, "power_weights")

    def validate(self) -> None:
        if self.num_rrh < 1 or self.num_rue < 1 or self.num_mue < 1:
            raise ValueError("need at least one RRH, one RUE and one MUE")
        if self.num_mbs != 1:
            raise ValueError("the model carries exactly one MBS")
        if self.antennas_rrh < 1 or self.antennas_mbs < 1:
            raise ValueError("antenna counts must be positive")
        if not (self.p_max > 0 and self.p_avg > 0 and self.p_mbs > 0):
            raise ValueError("power caps must be positive")
        if self.p_avg > self.p_max:
            raise ValueError("p_avg must not exceed p_max")
        if not (self.fronthaul_cap > 0):
            raise ValueError("fronthaul_cap must be positive (may be inf)")
        if not (self.interference_cap > 0):
            raise ValueError("interference_cap must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if np.any(self.omega < 0) or np.any(self.mu < 0):
            raise ValueError("rate/power weights must be nonnegative")
        if self.tradeoff < 0:
            raise ValueError("tradeoff V must be nonnegative")
        if self.sigma2 <= 0:
            raise ValueError("noise power must convert to positive watts")
        if self.convergence_tol <= 0 or self.kappa_reg <= 0 or self.eps_active <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_wmmse_iters < 1:
            raise ValueError("max_wmmse_iters must be at least 1")
        if self.slots < 1:
            raise ValueError("slots must be at least 1")
        if self.rue_dist_min < REF_DISTANCE_M:
            raise ValueError("rue_dist_min must be at least the reference distance")
        if self.rue_dist_max < self.rue_dist_min:
            raise ValueError("rue_dist_max must be >= rue_dist_min")
        if self.mue_dist_min < REF_DISTANCE_M or self.mue_dist_min > self.area_radius:
            raise ValueError("mue_dist_min must lie in [d0, area_radius]")


@dataclass
class Topology:
    """Node positions in meters on the 2-D plane; MBS at the origin."""

    pos_mbs: np.ndarray   # (2,)
    pos_rrh: np.ndarray   # (N, 2)
    pos_rue: np.ndarray   # (K_R, 2)
    pos_mue: np.ndarray   # (K_M, 2)


@dataclass
class ChannelState:
    """One slot of CSI plus the MBS-interference-plus-noise floor per RUE."""

    h: np.ndarray    # (K_R, N*L_R) complex, stacked RRH->RUE channels
    g: np.ndarray    # (K_M, N*L_R) complex, stacked RRH->MUE channels
    g0: np.ndarray   # (K_R, L_M) complex, MBS->RUE channels
    phi: np.ndarray  # (K_R,) W, sum_i |g0_k^H v0_i|^2 + sigma^2


@dataclass
class MbsBeamformers:
    """Fixed MBS transmit beamformers, one length-L_M vector per MUE."""

    v0: np.ndarray  # (K_M, L_M) complex, sum of squared norms = p_mbs


def _as_weight_vector(value, length: int, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        arr = np.full(length, float(arr[0]))
    if arr.shape != (length,):
        raise ValueError(f"{name} must be a scalar or a length-{length} sequence")
    return arr


def path_gain(dist_m: np.ndarray, exponent: float) -> np.ndarray:
    """PL(d) = (max(d, d0)/d0)^(-exponent)."""
    d = np.maximum(np.asarray(dist_m, dtype=float), REF_DISTANCE_M)
    return (d / REF_DISTANCE_M) ** (-exponent)


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric complex Gaussian, unit variance per entry."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def build_scenario(config: SystemConfig, seed: int) -> tuple[Topology, MbsBeamformers]:
    """Place all nodes and freeze the MBS beamformers (MRT on the slot-0 MUE channels).

    The layout is deterministic and symmetric: RRHs equally spaced on a ring
    around the MBS, RUE k a hotspot user of RRH (k mod N) with distances spread
    evenly over [rue_dist_min, rue_dist_max], MUEs equally spaced on a ring at
    70% of the area radius. The seed therefore only drives fading and the MRT
    directions, which keeps seed replicates comparable run-to-run.
    """
    config.validate()
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), _SCENARIO_STREAM]))
    n, k_r, k_m = config.num_rrh, config.num_rue, config.num_mue

    pos_mbs = np.zeros(2)
    ang = 2.0 * math.pi * np.arange(n) / n
    pos_rrh = config.rrh_radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)

    serving = np.arange(k_r) % n
    spread = (np.arange(k_r) + 0.5) / k_r
    rue_r = config.rue_dist_min + spread * (config.rue_dist_max - config.rue_dist_min)
    rue_a = ang[serving] + 2.0 * math.pi * _GOLDEN_FRACTION * np.arange(k_r)
    pos_rue = pos_rrh[serving] + np.stack([rue_r * np.cos(rue_a), rue_r * np.sin(rue_a)], axis=1)

    mue_radius = min(max(0.7 * config.area_radius, config.mue_dist_min), config.area_radius)
    mue_a = 2.0 * math.pi * (np.arange(k_m) + 0.5) / k_m
    pos_mue = mue_radius * np.stack([np.cos(mue_a), np.sin(mue_a)], axis=1)

    topo = Topology(pos_mbs=pos_mbs, pos_rrh=pos_rrh, pos_rue=pos_rue, pos_mue=pos_mue)

    # MRT toward each MUE's slot-0 MBS channel, equal power split p_mbs / K_M
    d_mbs_mue = np.linalg.norm(pos_mue - pos_mbs, axis=1)
    gains = path_gain(d_mbs_mue, config.pathloss_exponent)
    ch = np.sqrt(gains)[:, None] * _complex_normal(rng, (k_m, config.antennas_mbs))
    v0 = math.sqrt(config.p_mbs / k_m) * ch / np.linalg.norm(ch, axis=1, keepdims=True)
    return topo, MbsBeamformers(v0=v0)


def draw_channels(topology: Topology, mbs_beams: MbsBeamformers, config: SystemConfig,
                  slot_rng: np.random.Generator) -> ChannelState:
    """One slot of block fading: entry = sqrt(PL(d)) * CN(0, 1), i.i.d. per entry.

    Draw order (h, g, g0) is fixed so a shared generator yields reproducible slots.
    """
    l_r, l_m = config.antennas_rrh, config.antennas_mbs
    eta = config.pathloss_exponent

    d_rrh_rue = np.linalg.norm(topology.pos_rue[:, None, :] - topology.pos_rrh[None, :, :], axis=2)
    scale_h = np.repeat(np.sqrt(path_gain(d_rrh_rue, eta)), l_r, axis=1)  # (K_R, N*L_R)
    h = scale_h * _complex_normal(slot_rng, scale_h.shape)

    d_rrh_mue = np.linalg.norm(topology.pos_mue[:, None, :] - topology.pos_rrh[None, :, :], axis=2)
    scale_g = np.repeat(np.sqrt(path_gain(d_rrh_mue, eta)), l_r, axis=1)  # (K_M, N*L_R)
    g = scale_g * _complex_normal(slot_rng, scale_g.shape)

    d_mbs_rue = np.linalg.norm(topology.pos_rue - topology.pos_mbs, axis=1)
    scale_g0 = np.sqrt(path_gain(d_mbs_rue, eta))[:, None]
    g0 = scale_g0 * _complex_normal(slot_rng, (topology.pos_rue.shape[0], l_m))

    cross = g0.conj() @ mbs_beams.v0.T        # (K_R, K_M), entries g0_k^H v0_i
    phi = np.sum(np.abs(cross) ** 2, axis=1) + config.sigma2
    return ChannelState(h=h, g=g, g0=g0, phi=phi)


def channel_stream(seed: int) -> np.random.Generator:
    """Per-slot fading stream for a trajectory; advance it once per slot."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), _CHANNEL_STREAM]))


def arrival_stream(seed: int) -> np.random.Generator:
    """Traffic arrival stream for a trajectory."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), _ARRIVAL_STREAM]))


# --- configuration file handling -------------------------------------------------

_TRAFFIC_KEYS = ("lambda", "a_max")
ENV_PREFIX = "HCRAN_"


def _parse_value(field_type: str, raw: str):
    raw = raw.strip()
    if field_type == "int":
        return int(raw)
    if field_type == "float":
        return float(raw)  # float('inf') handles the ideal-fronthaul case
    if field_type == "vector":
        parts = [p for p in raw.replace(",", " ").split() if p]
        vals = [float(p) for p in parts]
        return vals[0] if len(vals) == 1 else vals
    raise ValueError(f"unknown field type {field_type!r}")


_FIELD_TYPES = {
    "num_rrh": "int", "num_mbs": "int", "num_rue": "int", "num_mue": "int",
    "antennas_rrh": "int", "antennas_mbs": "int", "max_wmmse_iters": "int",
    "slots": "int", "rng_seed": "int",
    "rate_weights": "vector", "power_weights": "vector",
}


def parse_kv_file(path: str) -> dict[str, str]:
    """Flat `key = value` UTF-8 file; '#' starts a comment."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, raw = line.split("=", 1)
            out[key.strip()] = raw.strip()
    return out


def env_overrides(environ=None) -> dict[str, str]:
    """HCRAN_<KEY> environment variables override file/default config keys."""
    environ = os.environ if environ is None else environ
    out = {}
    for name, value in environ.items():
        if name.startswith(ENV_PREFIX):
            out[name[len(ENV_PREFIX):].lower()] = value
    return out


def configs_from_mapping(raw: dict[str, str]):
    """Build (SystemConfig, TrafficConfig) from flat string key/values."""
    from .traffic import TrafficConfig

    sys_fields = {f.name for f in fields(SystemConfig)}
    sys_kwargs, lam, a_max = {}, 4.2, None
    for key, value in raw.items():
        if key == "lambda":
            lam = _parse_value("vector", value)
        elif key == "a_max":
            a_max = _parse_value("vector", value)
        elif key in sys_fields:
            sys_kwargs[key] = _parse_value(_FIELD_TYPES.get(key, "float"), value)
        else:
            raise ValueError(f"unknown configuration key {key!r}")
    config = SystemConfig(**sys_kwargs)
    config.validate()
    traffic = TrafficConfig.for_rues(config.num_rue, lam, a_max)
    return config, traffic


def load_config(path: str | None = None, use_env: bool = True):
    """Load (SystemConfig, TrafficConfig); with no file the defaults apply."""
    raw: dict[str, str] = {}
    if path is not None:
        raw.update(parse_kv_file(path))
    if use_env:
        raw.update(env_overrides())
    return configs_from_mapping(raw)
