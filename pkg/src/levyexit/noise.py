"""Driving-noise primitives: Gaussian plus symmetric alpha-stable increments.

The driving process L is a Brownian motion with variance weight d plus an
independent symmetric alpha-stable motion whose jump measure is
dy/|y|^(1+alpha). Its characteristic exponent is

    psi(lam) = -d*lam^2/2 - C(alpha)*|lam|^alpha,

where C(alpha) is the integral of (1-cos y)/|y|^(1+alpha) over the real
line. Every sampler is a pure function of its parameters and an RngStream,
so paths can be fanned out to any number of workers without changing the
results.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

# C(alpha) diverges at both ends of (0, 2); reject the blowup region.
ALPHA_MIN = 1e-3
ALPHA_MAX = 2.0 - 1e-3

__all__ = [
    "ALPHA_MIN",
    "ALPHA_MAX",
    "StableNoiseSpec",
    "RngStream",
    "as_generator",
    "stable_scale_constant",
    "characteristic_exponent",
    "sample_gaussian_increment",
    "sample_stable_increment",
    "standard_stable_from_uniforms",
]


def check_alpha(alpha: float) -> float:
    """Validate the stability index, returning it as a float."""
    alpha = float(alpha)
    if not (ALPHA_MIN <= alpha <= ALPHA_MAX):
        raise ValueError(
            f"alpha must lie in [{ALPHA_MIN}, {ALPHA_MAX}] "
            f"(scale constant diverges at 0 and 2), got {alpha}"
        )
    return alpha


def stable_scale_constant(alpha: float) -> float:
    """Scale constant C(alpha) of the stable part of L.

    C(alpha) = integral of (1 - cos y)/|y|^(1+alpha) over the real line,
    which evaluates in closed form to pi / (Gamma(1+alpha)*sin(pi*alpha/2)).
    The stable part of L then has characteristic exponent -C(alpha)*|lam|^alpha.

    Parameters
    ----------
    alpha : float
        Stability index in [ALPHA_MIN, ALPHA_MAX].

    Returns
    -------
    float
        C(alpha). For alpha=1 this is pi.
    """
    alpha = check_alpha(alpha)
    return math.pi / (math.gamma(1.0 + alpha) * math.sin(math.pi * alpha / 2.0))


@dataclass(frozen=True)
class StableNoiseSpec:
    """Parameters of the driving noise L.

    Attributes
    ----------
    alpha : float
        Stability index of the jump part, strictly inside (0, 2).
    d : float
        Brownian variance weight, >= 0.
    stable_enabled : bool
        False switches the jump part off (pure-Gaussian mode used for
        the Kramers comparison).
    """

    alpha: float
    d: float = 1.0
    stable_enabled: bool = True

    def __post_init__(self) -> None:
        check_alpha(self.alpha)
        if self.d < 0:
            raise ValueError(f"d must be >= 0, got {self.d}")
        if self.d == 0 and not self.stable_enabled:
            # degenerate but constructible: useful for zero-noise reduction tests
            warnings.warn("noise spec has d=0 and stable disabled: L is identically 0")


@dataclass(frozen=True)
class RngStream:
    """Identity of one counter-based random stream.

    Philox keyed by (seed, stream_id): the same pair reproduces the same
    draw sequence bit for bit on one platform, and distinct stream_ids give
    independent streams regardless of thread scheduling.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not (0 <= int(v) < 2**64):
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v!r}")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=(self.seed, self.stream_id)))

    def child(self, offset: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id + offset)


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream or a live Generator and return a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return rng.generator()


def characteristic_exponent(spec: StableNoiseSpec, lam: float) -> float:
    """Characteristic exponent psi(lam) of L, so that E e^{i lam L_1} = e^{psi}.

    psi(lam) = -d*lam^2/2 - C(alpha)*|lam|^alpha; the stable term is dropped
    when the spec disables it. Real-valued by symmetry of the jump measure.
    """
    lam = float(lam)
    psi = -spec.d * lam * lam / 2.0
    if spec.stable_enabled:
        psi -= stable_scale_constant(spec.alpha) * abs(lam) ** spec.alpha
    return psi


@njit(cache=True, nogil=True)
def standard_stable_from_uniforms(alpha, u, w):
    """Standard symmetric alpha-stable variate from one uniform and one exponential.

    Chambers-Mallows-Stuck, symmetric case: with V = pi*(u - 1/2),

        X = sin(alpha*V)/cos(V)^(1/alpha) * (cos((1-alpha)*V)/w)^((1-alpha)/alpha)

    has characteristic function exp(-|lam|^alpha). At alpha=1 the second
    factor is exactly 1 and X reduces to tan(V), a standard Cauchy variate.
    Negating V negates X, so the law is exactly symmetric.
    """
    v = math.pi * (u - 0.5)
    t = math.sin(alpha * v) / math.cos(v) ** (1.0 / alpha)
    s = (math.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha)
    return t * s


@njit(cache=True, nogil=True)
def draw_standard_stable(alpha, gen):
    # draw order: one uniform, then one exponential
    u = gen.random()
    w = gen.exponential(1.0)
    return standard_stable_from_uniforms(alpha, u, w)


@njit(cache=True, nogil=True)
def _fill_standard_stable(alpha, gen, out):
    for i in range(out.size):
        out[i] = draw_standard_stable(alpha, gen)


def sample_gaussian_increment(d: float, h: float, rng, size=None):
    """Brownian increment of L over time h, distributed N(0, d*h).

    With size=None returns a scalar; otherwise an array of independent
    increments drawn from the same stream.
    """
    if d < 0:
        raise ValueError(f"d must be >= 0, got {d}")
    if h <= 0:
        raise ValueError(f"h must be > 0, got {h}")
    gen = as_generator(rng)
    scale = math.sqrt(d * h)
    if size is None:
        return scale * gen.standard_normal()
    return scale * gen.standard_normal(size)


def sample_stable_increment(alpha: float, h: float, rng, size=None):
    """Increment over time h of the stable part of L.

    Distributed as (C(alpha)*h)^(1/alpha) * S with S standard symmetric
    alpha-stable, i.e. characteristic function exp(-h*C(alpha)*|lam|^alpha).
    For alpha=1, h=1 this is Cauchy with scale pi.
    """
    alpha = check_alpha(alpha)
    if h <= 0:
        raise ValueError(f"h must be > 0, got {h}")
    gen = as_generator(rng)
    scale = (stable_scale_constant(alpha) * h) ** (1.0 / alpha)
    if size is None:
        return scale * draw_standard_stable(alpha, gen)
    out = np.empty(int(size))
    _fill_standard_stable(alpha, gen, out)
    return scale * out
