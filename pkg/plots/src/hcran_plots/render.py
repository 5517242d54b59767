"""Figure analogues of the simulator's headline results.

Seven images per render: queue-vs-time, queue-vs-V, power-vs-V, weighted-EE-vs-V,
ratio-EE-vs-V, EE-vs-queue tradeoff, and the fronthaul comparison overlay.
Series split by arrival rate and by fronthaul arm; output bytes are stable for
identical inputs (fixed renderer metadata, no timestamps).
"""

from __future__ import annotations

import math
import os
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schema import load_sweep, load_trace

_SAVE_KW = dict(dpi=110, metadata={"Software": "hcran-plots"})
FIGURES = ("queue_vs_time", "queue_vs_v", "power_vs_v", "eta_ee_vs_v",
           "eta_ee_trad_vs_v", "ee_vs_queue", "fronthaul_compare")


def _series(rows):
    """Group sweep rows by (lambda, fronthaul_cap) and average seeds per V."""
    grouped = defaultdict(lambda: defaultdict(list))
    for rec in rows:
        grouped[(rec["lambda"], rec["fronthaul_cap"])][rec["V"]].append(rec)
    out = {}
    for key, by_v in grouped.items():
        v_values = sorted(by_v)
        agg = {col: np.array([np.mean([r[col] for r in by_v[v]]) for v in v_values])
               for col in ("avg_queue_total", "avg_power_mean", "avg_eta_ee",
                           "avg_eta_ee_trad")}
        out[key] = (np.array(v_values), agg)
    return out


def _label(lam, cap):
    cap_txt = "ideal fronthaul" if math.isinf(cap) else f"C={cap:g} bit/slot/Hz"
    return f"lambda={lam:g}, {cap_txt}"


def _save(fig, out_dir, name):
    path = os.path.join(out_dir, f"{name}.png")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def _line_figure(series, column, ylabel, title, out_dir, name, logy=False):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for (lam, cap), (v_values, agg) in sorted(series.items()):
        ax.plot(v_values, agg[column], marker="o", label=_label(lam, cap))
    ax.set_xlabel("tradeoff parameter V")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if logy:
        ax.set_yscale("log")
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, out_dir, name)


def render(sweep_csv: str, trace_csv: str, out_dir: str) -> list[str]:
    """Produce the seven figure analogues; returns the written image paths."""
    rows = load_sweep(sweep_csv)
    trace = load_trace(trace_csv)
    os.makedirs(out_dir, exist_ok=True)
    series = _series(rows)
    paths = []

    # queue backlog over time (mean across users per slot)
    q_cols = [k for k in trace if k.startswith("Q_")]
    q_mean = np.mean([trace[k] for k in q_cols], axis=0)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(trace["slot"], q_mean, lw=0.9)
    ax.set_xlabel("slot")
    ax.set_ylabel("average queue length (bit/slot/Hz)")
    ax.set_title("Queue length versus time")
    ax.grid(True, alpha=0.4)
    fig.tight_layout()
    paths.append(_save(fig, out_dir, "queue_vs_time"))

    paths.append(_line_figure(series, "avg_queue_total",
                              "average total queue (bit/slot/Hz)",
                              "Average queue length versus V", out_dir, "queue_vs_v"))
    paths.append(_line_figure(series, "avg_power_mean", "average RRH power (W)",
                              "Average power consumption versus V", out_dir, "power_vs_v"))
    paths.append(_line_figure(series, "avg_eta_ee", "weighted EE utility",
                              "Weighted EE versus V", out_dir, "eta_ee_vs_v"))
    paths.append(_line_figure(series, "avg_eta_ee_trad", "EE (bit/Hz/Joule)",
                              "Ratio EE versus V", out_dir, "eta_ee_trad_vs_v"))

    # EE against queue backlog, parametrized by V
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for (lam, cap), (v_values, agg) in sorted(series.items()):
        ax.plot(agg["avg_queue_total"], agg["avg_eta_ee"], marker="o",
                label=_label(lam, cap))
    ax.set_xlabel("average total queue (bit/slot/Hz)")
    ax.set_ylabel("weighted EE utility")
    ax.set_title("EE versus queue backlog tradeoff")
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    paths.append(_save(fig, out_dir, "ee_vs_queue"))

    # fronthaul comparison overlay (one panel per metric, one line per arm)
    fig, axes = plt.subplots(1, 3, figsize=(11.0, 3.6))
    metric_axis = (("avg_queue_total", "avg queue (bit/slot/Hz)"),
                   ("avg_power_mean", "avg RRH power (W)"),
                   ("avg_eta_ee", "weighted EE"))
    for ax, (col, ylabel) in zip(axes, metric_axis):
        for (lam, cap), (v_values, agg) in sorted(series.items()):
            ax.plot(v_values, agg[col], marker="o", label=_label(lam, cap))
        ax.set_xlabel("V")
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.4)
    axes[0].legend(fontsize=7)
    fig.suptitle("Constrained versus ideal fronthaul")
    fig.tight_layout()
    paths.append(_save(fig, out_dir, "fronthaul_compare"))
    return paths
