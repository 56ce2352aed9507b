"""Closed-form exit-law predictors, experiment harness and fit statistics.

Under heavy-tailed driving noise the first-exit time from a domain around
the well at 0 is asymptotically exponential with rate eps^alpha*theta/alpha,
where theta weighs the boundary distances; the mean exit time grows like a
power eps^(-alpha). Under pure Gaussian noise the mean instead follows
Kramers' law, exponential in eps^(-2). This module computes both predictions,
runs path ensembles against them and reports goodness-of-fit summaries.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .engine import (
    ExitRecord,
    PathParams,
    gamma_default,
    run_ensemble,
)
from .noise import RngStream, StableNoiseSpec, check_alpha
from .potential import ExitDomain, PotentialSpec, harmonic_quartic, quadratic
from .split import SplitSpec

__all__ = [
    "TheoryPrediction",
    "ExperimentConfig",
    "StatsSummary",
    "ExperimentResult",
    "SweepRow",
    "SweepResult",
    "theta",
    "stable_exit_law",
    "kramers_prediction",
    "survival_sandwich",
    "kramers_mean_exit",
    "ks_exponential",
    "summarize",
    "run_experiment",
    "sweep",
]


def theta(dom: ExitDomain, alpha: float) -> float:
    """Boundary weight theta = 1/a^alpha + 1/b^alpha (one-sided on a half line).

    The exit rate is eps^alpha * theta / alpha, so closer boundaries and
    smaller alpha exit faster.
    """
    alpha = check_alpha(alpha)
    t = dom.a ** (-alpha)
    if not dom.is_half_line:
        t += dom.b ** (-alpha)
    return t


@dataclass(frozen=True)
class TheoryPrediction:
    """Closed-form exit law for one (alpha, eps, domain) triple.

    rate * mean = 1 and survival(u) = exp(-rate*u). delta is the correction
    exponent min(alpha/2, gamma/2) entering the sandwich bounds; theta and
    delta are NaN in Gaussian (Kramers) mode, where the rate comes from
    Kramers' formula instead.
    """

    theta: float
    rate: float
    mean: float = field(init=False)
    delta: float = float("nan")

    def __post_init__(self) -> None:
        if self.rate <= 0:
            raise ValueError(f"rate must be > 0, got {self.rate}")
        object.__setattr__(self, "mean", 1.0 / self.rate)

    def survival(self, u):
        """P(exit time > u) under the limiting exponential law."""
        return np.exp(-self.rate * np.asarray(u, dtype=float))


def stable_exit_law(
    alpha: float, eps: float, dom: ExitDomain, gamma: float | None = None
) -> TheoryPrediction:
    """Exit-law prediction under stable noise: rate eps^alpha*theta/alpha.

    The mean is alpha*eps^(-alpha)/theta; on a half line this reduces to
    alpha*a^alpha*eps^(-alpha).
    """
    alpha = check_alpha(alpha)
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    if gamma is None:
        gamma = gamma_default(alpha)
    th = theta(dom, alpha)
    return TheoryPrediction(
        theta=th,
        rate=eps**alpha * th / alpha,
        delta=min(alpha / 2.0, gamma / 2.0),
    )


def survival_sandwich(u, eps: float, pred: TheoryPrediction, C: float):
    """Bounding survival curves with relative-error amplitude C*eps^delta.

    lower(u) = exp(-u*rate*(1+C*eps^delta))*(1-C*eps^delta) and the upper
    curve mirrors it; C=0 collapses both onto pred.survival(u).
    """
    if C < 0:
        raise ValueError(f"C must be >= 0, got {C}")
    u = np.asarray(u, dtype=float)
    corr = C * eps**pred.delta
    lower = np.exp(-u * pred.rate * (1.0 + corr)) * (1.0 - corr)
    upper = np.exp(-u * pred.rate * (1.0 - corr)) * (1.0 + corr)
    return lower, upper


def kramers_mean_exit(eps: float, p: PotentialSpec, a: float) -> float:
    """Kramers' mean first-exit time over the barrier at a under Gaussian noise.

    eps*sqrt(pi)/(U'(a)*sqrt(U''(0))) * exp(2*U(a)/eps^2): exponential in
    eps^(-2), against the polynomial eps^(-alpha) of the heavy-tailed case.
    """
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    if a <= 0:
        raise ValueError(f"a must be > 0, got {a}")
    return (
        eps * math.sqrt(math.pi) / (p.du(a) * math.sqrt(p.d2u(0.0)))
        * math.exp(2.0 * p.u(a) / (eps * eps))
    )


def kramers_prediction(eps: float, p: PotentialSpec, dom: ExitDomain) -> TheoryPrediction:
    """Gaussian-mode prediction: exponential law at the Kramers rate."""
    mean = kramers_mean_exit(eps, p, dom.a)
    return TheoryPrediction(theta=float("nan"), rate=1.0 / mean)


def ks_exponential(samples, censored=None) -> float:
    """KS distance between the sample ECDF and Exp(1/sample mean).

    The rate is fitted from the sample mean, so the usual KS critical values
    do not apply (Lilliefors-style caveat); the statistic is still a sound
    relative measure and is scale invariant. Censored entries are refused:
    the caller must filter them or extend the horizon.
    """
    if censored is not None and np.any(np.asarray(censored, dtype=bool)):
        raise ValueError("censored samples present: filter them or extend t_max")
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.size
    if n < 30:
        raise ValueError(f"need at least 30 samples, got {n}")
    if not np.all(np.isfinite(xs)) or xs[0] < 0:
        raise ValueError("samples must be finite and nonnegative")
    mean = xs.mean()
    if mean <= 0:
        raise ValueError("sample mean must be positive")
    cdf = 1.0 - np.exp(-xs / mean)
    i = np.arange(n, dtype=float)
    d_plus = np.max((i + 1.0) / n - cdf)
    d_minus = np.max(cdf - i / n)
    return float(max(d_plus, d_minus))


@dataclass(frozen=True)
class StatsSummary:
    """Ensemble summary: uncensored-mean estimate with a 95% CI, fit stats.

    The CI is a delta-method interval on the log scale (robust against the
    near-exponential right tail). insufficient flags ensembles with fewer
    than 30 uncensored exits, where mean/ks are NaN.
    """

    n: int
    n_uncensored: int
    censored_count: int
    mean: float
    ci_low: float
    ci_high: float
    ks_statistic: float
    big_jump_exit_fraction: float
    insufficient: bool


def summarize(records: list[ExitRecord]) -> StatsSummary:
    n = len(records)
    unc = [r for r in records if not r.censored]
    n_unc = len(unc)
    censored = n - n_unc
    if n_unc < 30:
        return StatsSummary(
            n=n, n_uncensored=n_unc, censored_count=censored,
            mean=float("nan"), ci_low=float("nan"), ci_high=float("nan"),
            ks_statistic=float("nan"), big_jump_exit_fraction=float("nan"),
            insufficient=True,
        )
    ts = np.array([r.exit_time for r in unc])
    mean = float(ts.mean())
    sd = float(ts.std(ddof=1))
    se_log = sd / (mean * math.sqrt(n_unc))
    big = sum(1 for r in unc if r.exited_at_large_jump) / n_unc
    return StatsSummary(
        n=n, n_uncensored=n_unc, censored_count=censored,
        mean=mean,
        ci_low=mean * math.exp(-1.959963984540054 * se_log),
        ci_high=mean * math.exp(1.959963984540054 * se_log),
        ks_statistic=ks_exponential(ts),
        big_jump_exit_fraction=float(big),
        insufficient=False,
    )


_POTENTIALS = ("quadratic", "harmonic_quartic")
_DOMAINS = ("bounded", "half_line")
_SCHEMES = ("euler", "jump_adapted")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated description of one experiment family.

    eps_list holds one value for plain runs and several for sweeps; every
    violation found during validation is reported at once.
    """

    alpha: float
    potential: str
    domain: str
    a: float
    eps_list: tuple
    n_paths: int
    seed: int
    b: float | None = None
    d: float = 1.0
    stable: bool = True
    rho: float = 0.5
    scheme: str = "euler"
    t_max_multiplier: float = 20.0
    x0: float = 0.0
    h: float | None = None
    workers: int = 0  # 0 means "use all cores"
    m: float = 1.0
    kappa: float = 1.0
    c: float = 1.0
    gamma: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "eps_list", tuple(float(e) for e in self.eps_list))
        errors = self.violations()
        if errors:
            raise ValueError("invalid config: " + "; ".join(errors))

    def violations(self) -> list[str]:
        errs = []
        from .noise import ALPHA_MAX, ALPHA_MIN

        if not (ALPHA_MIN <= self.alpha <= ALPHA_MAX):
            errs.append(
                f"alpha must lie in (0, 2), within [{ALPHA_MIN}, {ALPHA_MAX}], got {self.alpha}"
            )
        if self.potential not in _POTENTIALS:
            errs.append(f"potential must be one of {_POTENTIALS}, got {self.potential!r}")
        if self.domain not in _DOMAINS:
            errs.append(f"domain must be one of {_DOMAINS}, got {self.domain!r}")
        if self.a <= 0:
            errs.append(f"a must be > 0, got {self.a}")
        if self.domain == "bounded" and (self.b is None or self.b <= 0):
            errs.append(f"bounded domain needs b > 0, got {self.b}")
        if self.domain == "half_line" and self.b is not None:
            errs.append("half_line domain takes no b")
        if self.domain == "half_line" and self.potential == "quadratic":
            errs.append(
                "half_line domain needs superquadratic growth on the left: "
                "quadratic does not qualify, use harmonic_quartic"
            )
        if not self.eps_list or any(e <= 0 for e in self.eps_list):
            errs.append(f"eps values must be > 0, got {self.eps_list}")
        if self.n_paths < 0:
            errs.append(f"n_paths must be >= 0, got {self.n_paths}")
        if not (0 <= self.seed < 2**63):
            errs.append(f"seed must be a nonnegative 63-bit integer, got {self.seed}")
        if self.d < 0:
            errs.append(f"d must be >= 0, got {self.d}")
        if not self.stable and self.d == 0:
            errs.append("stable=false with d=0 leaves no noise at all")
        if not (0 < self.rho < 1):
            errs.append(f"rho must lie in (0, 1), got {self.rho}")
        if self.scheme not in _SCHEMES:
            errs.append(f"scheme must be one of {_SCHEMES}, got {self.scheme!r}")
        if self.scheme == "jump_adapted" and not self.stable:
            errs.append("jump_adapted scheme needs the stable part enabled")
        if self.t_max_multiplier <= 0:
            errs.append(f"t_max_multiplier must be > 0, got {self.t_max_multiplier}")
        if self.h is not None and self.h <= 0:
            errs.append(f"h must be > 0, got {self.h}")
        if self.workers < 0:
            errs.append(f"workers must be >= 0, got {self.workers}")
        if self.m <= 0:
            errs.append(f"m must be > 0, got {self.m}")
        if self.kappa <= 0:
            errs.append(f"kappa must be > 0, got {self.kappa}")
        if self.c <= 0:
            errs.append(f"c must be > 0, got {self.c}")
        if self.gamma is not None and self.gamma <= 0:
            errs.append(f"gamma must be > 0, got {self.gamma}")
        if not errs and self.x0 is not None:
            dom = self.build_domain()
            if not dom.contains(self.x0):
                errs.append(f"x0 = {self.x0} lies outside the domain")
        return errs

    def build_potential(self) -> PotentialSpec:
        if self.potential == "quadratic":
            return quadratic(self.m)
        return harmonic_quartic(self.m, self.kappa)

    def build_domain(self) -> ExitDomain:
        if self.domain == "bounded":
            return ExitDomain.bounded(self.a, self.b)
        return ExitDomain.half_line(self.a)

    def build_noise(self) -> StableNoiseSpec:
        return StableNoiseSpec(alpha=self.alpha, d=self.d, stable_enabled=self.stable)

    def build_split(self, eps: float) -> SplitSpec:
        return SplitSpec(alpha=self.alpha, eps=eps, rho=self.rho)

    def effective_h(self) -> float:
        return self.h if self.h is not None else min(0.01, 0.01 / self.m)

    def effective_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)


class ExperimentResult(NamedTuple):
    records: list
    summary: StatsSummary
    prediction: TheoryPrediction


def _predict(cfg: ExperimentConfig, eps: float, p: PotentialSpec, dom: ExitDomain):
    if cfg.stable:
        return stable_exit_law(cfg.alpha, eps, dom, cfg.gamma)
    return kramers_prediction(eps, p, dom)


def run_experiment(
    cfg: ExperimentConfig,
    eps: float | None = None,
    stream_offset: int = 0,
    workers: int | None = None,
) -> ExperimentResult:
    """Run n_paths independent exits for one eps and summarize them.

    Path i consumes the counter-based stream (seed, stream_offset + i), so
    the record set is a pure function of (config, seed) whatever the worker
    count. With n_paths = 0 the summary flags insufficient data but the
    theory prediction is still returned.
    """
    if eps is None:
        if len(cfg.eps_list) != 1:
            raise ValueError("config has several eps values: pass eps or use sweep()")
        eps = cfg.eps_list[0]
    p = cfg.build_potential()
    dom = cfg.build_domain()
    noise = cfg.build_noise()
    pred = _predict(cfg, eps, p, dom)
    if cfg.t_max_multiplier < 10:
        warnings.warn(
            f"t_max = {cfg.t_max_multiplier:g} x predicted mean risks censoring bias; "
            "10x or more is safe"
        )
    split = cfg.build_split(eps) if cfg.stable else None
    pp = PathParams(
        eps=eps,
        h=cfg.effective_h(),
        t_max=cfg.t_max_multiplier * pred.mean,
        scheme=cfg.scheme,
        split=split,
        x0=cfg.x0,
    )
    records = run_ensemble(
        p, dom, noise, pp, cfg.n_paths,
        RngStream(cfg.seed, stream_offset),
        workers=workers if workers is not None else cfg.effective_workers(),
    )
    return ExperimentResult(records, summarize(records), pred)


@dataclass(frozen=True)
class SweepRow:
    eps: float
    n_paths: int
    mean: float
    ci_low: float
    ci_high: float
    ks_statistic: float
    big_jump_exit_fraction: float
    censored_count: int
    theory_mean: float
    ratio: float


@dataclass(frozen=True)
class SweepResult:
    """Per-eps rows plus the fitted scaling exponents.

    mean_scaling_slope fits log(mean) against log(eps) (stable mode, the
    expected value is -alpha); gaussian_log_slope fits log(mean) against
    eps^(-2) (Gaussian mode, the expected value is 2*U(a)). Only the slope
    matching the config mode is set; the other is NaN. Empirical means are
    used when paths were run, otherwise theory means.
    """

    rows: tuple
    mean_scaling_slope: float
    gaussian_log_slope: float
    records_by_eps: dict


def sweep(cfg: ExperimentConfig, workers: int | None = None) -> SweepResult:
    """Run the experiment across cfg.eps_list and fit the scaling exponents."""
    if len(cfg.eps_list) < 2:
        raise ValueError("sweep needs at least 2 eps values")
    rows = []
    records_by_eps = {}
    means = []
    for i, eps in enumerate(sorted(cfg.eps_list, reverse=True)):
        res = run_experiment(cfg, eps=eps, stream_offset=i * max(cfg.n_paths, 1), workers=workers)
        records_by_eps[eps] = res.records
        s = res.summary
        mean = res.prediction.mean if s.insufficient else s.mean
        means.append(mean)
        rows.append(
            SweepRow(
                eps=eps, n_paths=cfg.n_paths, mean=s.mean,
                ci_low=s.ci_low, ci_high=s.ci_high, ks_statistic=s.ks_statistic,
                big_jump_exit_fraction=s.big_jump_exit_fraction,
                censored_count=s.censored_count,
                theory_mean=res.prediction.mean,
                ratio=s.mean / res.prediction.mean,
            )
        )
    eps_arr = np.array([r.eps for r in rows])
    mean_arr = np.array(means)
    stable_slope = float("nan")
    gauss_slope = float("nan")
    if cfg.stable:
        stable_slope = float(np.polyfit(np.log(eps_arr), np.log(mean_arr), 1)[0])
    else:
        gauss_slope = float(np.polyfit(eps_arr**-2.0, np.log(mean_arr), 1)[0])
    return SweepResult(tuple(rows), stable_slope, gauss_slope, records_by_eps)
