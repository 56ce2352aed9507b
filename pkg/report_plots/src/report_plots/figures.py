"""Figure builders over the experiment CLI's output files.

All quantities are read from the CSV/JSON inputs; nothing is re-simulated
here. Each builder renders one PNG, embeds the run-manifest hash in both the
caption and the image metadata, and returns a FigureInfo with the annotation
values so callers (and tests) can inspect what was drawn.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schemas import (
    SchemaError,
    manifest_hash,
    read_deviation,
    read_records,
    read_summary,
    read_sweep,
)


class Refusal(Exception):
    """Raised when an input is valid but too thin to plot honestly."""


@dataclass
class FigureInfo:
    """What a builder drew: output path, hash, and the annotated numbers."""

    kind: str
    path: str
    manifest_sha256: str
    annotations: dict = field(default_factory=dict)
    fitted_slope: float | None = None
    scatter_points: int = 0
    notice: str | None = None


def _save(fig, out_path: str, sha256: str) -> None:
    fig.text(0.01, 0.005, f"manifest {sha256[:12]}", fontsize=7, color="0.4")
    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    metadata = None
    if out_path.lower().endswith(".png"):
        metadata = {"Description": f"run manifest sha256 {sha256}"}
    fig.savefig(out_path, dpi=120, bbox_inches="tight", metadata=metadata)
    plt.close(fig)


def _require(in_dir: str, name: str) -> str:
    return os.path.join(in_dir, name)


def plot_survival(in_dir: str, out_path: str, constant: float | None = None) -> FigureInfo:
    """Empirical survival of the exit time against the exponential prediction.

    Draws the ECDF step curve with a 95% band (Dvoretzky-Kiefer-Wolfowitz),
    the predicted survival exp(-rate*u), and, when a constant is supplied,
    the two-sided envelope curves at that constant.
    """
    records = read_records(_require(in_dir, "records.csv"))
    summary = read_summary(_require(in_dir, "summary.json"))
    sha = manifest_hash(_require(in_dir, "manifest.json"))
    times = np.sort(records.uncensored_times())
    if times.size == 0:
        raise Refusal("refusing survival plot: no uncensored exit records")
    if times.size < 100:
        raise Refusal(
            f"refusing survival plot: {times.size} uncensored records, need at least 100"
        )
    theory = summary.get("theory")
    if not theory or "rate" not in theory:
        raise SchemaError("summary.json lacks a theory block with a rate")
    rate = float(theory["rate"])
    n = times.size
    surv = 1.0 - np.arange(1, n + 1) / n
    band = math.sqrt(math.log(2.0 / 0.05) / (2.0 * n))

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.step(times, surv, where="post", lw=1.2, label=f"empirical (n={n})")
    ax.fill_between(
        times,
        np.clip(surv - band, 0.0, 1.0),
        np.clip(surv + band, 0.0, 1.0),
        step="post",
        alpha=0.2,
        label="95% band",
    )
    grid = np.linspace(0.0, times[-1], 400)
    ax.plot(grid, np.exp(-rate * grid), "k--", lw=1.2, label=f"exp(-{rate:.4g} u)")
    info = FigureInfo("survival", out_path, sha, scatter_points=int(n))
    info.annotations["rate"] = f"{rate:.6g}"
    info.annotations["mean"] = f"{float(theory.get('mean', math.nan)):.6g}"
    if constant is not None:
        eps = float(summary["eps"])
        delta = float(theory["delta"])
        corr = constant * eps**delta
        lo = np.exp(-rate * (1.0 + corr) * grid) * (1.0 - corr)
        hi = np.exp(-rate * (1.0 - corr) * grid) * (1.0 + corr)
        ax.plot(grid, np.clip(lo, 0.0, None), "r:", lw=1.0, label="envelope")
        ax.plot(grid, np.clip(hi, None, 1.05), "r:", lw=1.0)
        info.annotations["constant"] = f"{constant:g}"
    ax.set_xlabel("u (time)")
    ax.set_ylabel("P(exit time > u)")
    ax.set_title("Exit-time survival vs exponential prediction")
    ax.legend(loc="upper right", fontsize=8)
    _save(fig, out_path, sha)
    return info


def plot_mean_scaling(in_dir: str, out_path: str) -> FigureInfo:
    """Log-log mean exit time against eps with the fitted power-law slope."""
    sweep = read_sweep(_require(in_dir, "sweep.csv"))
    sha = manifest_hash(_require(in_dir, "manifest.json"))
    if sweep.n_rows < 2:
        raise Refusal("refusing mean-scaling plot: need at least two eps rows")
    order = np.argsort(sweep.eps)[::-1]
    eps = sweep.eps[order]
    mask = sweep.empirical_mask()[order]

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(eps, sweep.theory_mean[order], "k--", lw=1.2, label="prediction")
    info = FigureInfo("mean_scaling", out_path, sha)
    if mask.sum() >= 2:
        means = sweep.mean[order][mask]
        err = np.vstack(
            [
                means - sweep.ci_low[order][mask],
                sweep.ci_high[order][mask] - means,
            ]
        )
        ax.errorbar(
            eps[mask], means, yerr=np.clip(err, 0.0, None),
            fmt="o", ms=5, capsize=3, label="Monte Carlo",
        )
        slope = float(np.polyfit(np.log(eps[mask]), np.log(means), 1)[0])
        info.fitted_slope = slope
        info.scatter_points = int(mask.sum())
        info.annotations["slope"] = f"{slope:.3f}"
        ax.annotate(
            f"fitted slope {slope:.3f}",
            xy=(0.05, 0.08), xycoords="axes fraction", fontsize=9,
        )
    else:
        info.annotations["slope"] = "theory only"
        ax.annotate(
            "theory only (no simulated rows)",
            xy=(0.05, 0.08), xycoords="axes fraction", fontsize=9,
        )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("eps")
    ax.set_ylabel("mean exit time")
    ax.set_title("Mean exit time scaling")
    ax.legend(loc="upper right", fontsize=8)
    _save(fig, out_path, sha)
    return info


def plot_kramers(in_dir: str, out_path: str) -> FigureInfo:
    """ln(mean exit time) against eps^-2 with the fitted barrier slope."""
    sweep = read_sweep(_require(in_dir, "sweep.csv"))
    sha = manifest_hash(_require(in_dir, "manifest.json"))
    if sweep.n_rows < 2:
        raise Refusal("refusing barrier plot: need at least two eps rows")
    order = np.argsort(sweep.eps)[::-1]
    x = sweep.eps[order] ** -2.0
    mask = sweep.empirical_mask()[order]

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(x, np.log(sweep.theory_mean[order]), "k--", lw=1.2,
            label="closed form (with prefactor)")
    info = FigureInfo("kramers", out_path, sha)
    if mask.sum() >= 2:
        y = np.log(sweep.mean[order][mask])
        ax.plot(x[mask], y, "o", ms=5, label="Monte Carlo")
        slope = float(np.polyfit(x[mask], y, 1)[0])
        info.fitted_slope = slope
        info.scatter_points = int(mask.sum())
        info.annotations["slope"] = f"{slope:.3f}"
        ax.annotate(
            f"fitted slope {slope:.3f}",
            xy=(0.05, 0.85), xycoords="axes fraction", fontsize=9,
        )
    else:
        info.annotations["slope"] = "theory only"
        ax.annotate("theory only", xy=(0.05, 0.85), xycoords="axes fraction", fontsize=9)
    ax.set_xlabel("eps^-2")
    ax.set_ylabel("ln(mean exit time)")
    ax.set_title("Barrier scaling in the Gaussian regime")
    ax.legend(loc="lower right", fontsize=8)
    _save(fig, out_path, sha)
    return info


def plot_mechanism(in_dir: str, out_path: str) -> FigureInfo:
    """Where paths sat just before the exit jump, plus big-jump exit fractions.

    Left panel: histogram of pre-jump positions for exits caused by a large
    jump, with the 2*eps^gamma concentration window marked. Right panel:
    big-jump exit fraction per eps from sweep.csv when present, else the
    single fraction of this ensemble.
    """
    records = read_records(_require(in_dir, "records.csv"))
    summary = read_summary(_require(in_dir, "summary.json"))
    sha = manifest_hash(_require(in_dir, "manifest.json"))
    cfg = summary["config"]
    eps = float(summary["eps"]) if "eps" in summary else float(cfg["eps"][0])
    alpha = float(cfg["alpha"])
    gamma = cfg.get("gamma")
    gamma = float(gamma) if gamma is not None else (2.0 - alpha) / 5.0
    window = 2.0 * eps**gamma
    pre = records.big_jump_pre_positions()

    fig, (ax_h, ax_b) = plt.subplots(1, 2, figsize=(9.2, 4.0))
    info = FigureInfo("mechanism", out_path, sha)
    if pre.size == 0:
        ax_h.text(
            0.5, 0.5, "no big-jump exits in this ensemble",
            ha="center", va="center", transform=ax_h.transAxes,
        )
        info.notice = "no big-jump exits"
        info.annotations["within_window"] = "n/a"
    else:
        ax_h.hist(pre, bins=40, color="C0", alpha=0.8)
        ax_h.axvline(-window, color="r", ls=":", lw=1.0)
        ax_h.axvline(window, color="r", ls=":", lw=1.0,
                     label=f"+-2 eps^gamma = {window:.3g}")
        within = float(np.mean(np.abs(pre) <= window))
        info.annotations["within_window"] = f"{within:.3f}"
        info.scatter_points = int(pre.size)
        ax_h.annotate(
            f"{within:.0%} within the window",
            xy=(0.05, 0.9), xycoords="axes fraction", fontsize=9,
        )
        ax_h.legend(loc="upper right", fontsize=8)
    ax_h.set_xlabel("position just before the exit jump")
    ax_h.set_ylabel("count")
    ax_h.set_title(f"Pre-jump positions (eps={eps:g})")

    sweep_path = os.path.join(in_dir, "sweep.csv")
    if os.path.isfile(sweep_path):
        sweep = read_sweep(sweep_path)
        order = np.argsort(sweep.eps)[::-1]
        labels = [f"{e:g}" for e in sweep.eps[order]]
        fracs = sweep.big_jump_exit_fraction[order]
    else:
        mask = ~records.censored
        labels = [f"{eps:g}"]
        fracs = np.array([float(np.mean(records.exited_at_large_jump[mask]))])
    ax_b.bar(range(len(fracs)), fracs, color="C1", alpha=0.8)
    ax_b.set_xticks(range(len(fracs)), labels)
    ax_b.set_ylim(0.0, 1.05)
    ax_b.set_xlabel("eps (decreasing)")
    ax_b.set_ylabel("big-jump exit fraction")
    ax_b.set_title("Exit mechanism share")
    info.annotations["fractions"] = ", ".join(f"{f:.3f}" for f in fracs)
    _save(fig, out_path, sha)
    return info


def plot_deviation(in_dir: str, out_path: str) -> FigureInfo:
    """Tube-deviation probability against eps on log-log axes."""
    dev = read_deviation(_require(in_dir, "deviation.csv"))
    sha = manifest_hash(_require(in_dir, "manifest.json"))
    if len(dev.eps) < 2:
        raise Refusal("refusing deviation plot: need at least two eps rows")
    order = np.argsort(dev.eps)[::-1]
    eps = dev.eps[order]
    # continuity floor keeps zero-count estimates on the log axis
    floor = 0.5 / (dev.n_paths[order] + 1)
    est = np.maximum(dev.estimate[order], floor)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    err = np.vstack(
        [
            np.clip(est - np.maximum(dev.ci_low[order], floor), 0.0, None),
            np.clip(dev.ci_high[order] - est, 0.0, None),
        ]
    )
    ax.errorbar(eps, est, yerr=err, fmt="o-", ms=5, capsize=3, label="estimate")
    slope = float(np.polyfit(np.log(eps), np.log(est), 1)[0])
    ax.annotate(
        f"fitted exponent {slope:.2f}",
        xy=(0.05, 0.85), xycoords="axes fraction", fontsize=9,
    )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("eps")
    ax.set_ylabel("P(leave tube before t=1)")
    ax.set_title("Tube-deviation probability")
    ax.legend(loc="lower right", fontsize=8)
    info = FigureInfo("deviation", out_path, sha, fitted_slope=slope,
                      scatter_points=int(len(eps)))
    info.annotations["exponent"] = f"{slope:.2f}"
    _save(fig, out_path, sha)
    return info
