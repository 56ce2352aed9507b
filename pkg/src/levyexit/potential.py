"""Single-well potentials, exit domains, deterministic flows, relaxation times.

A potential U confines the dynamics to a well at the origin: U(0)=0,
U'(0)=0, U''(0)=M>0 and x*U'(x)>0 away from 0. Half-line exit problems
additionally require superquadratic growth on the left so that excursions
to -infinity return in finite time. Potentials carry their derivatives
explicitly (no numerical differentiation in hot loops); the callables are
compiled with numba at construction so the path kernels can inline them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from numba import njit
from numba.core.dispatcher import Dispatcher
from scipy.integrate import quad, solve_ivp

__all__ = [
    "PotentialSpec",
    "ExitDomain",
    "ValidationReport",
    "quadratic",
    "harmonic_quartic",
    "validate_potential",
    "flow",
    "relaxation_time",
]


def _compiled(f: Callable, label: str) -> Dispatcher:
    """Compile a scalar callable with numba and smoke-test it at x=0."""
    fn = f if isinstance(f, Dispatcher) else njit(cache=False, nogil=True)(f)
    try:
        fn(0.0)
    except Exception as exc:  # numba typing errors carry long chains
        raise ValueError(
            f"potential callable {label} must be numba-compilable "
            f"(scalar float in, float out): {exc}"
        ) from None
    return fn


@dataclass(frozen=True)
class PotentialSpec:
    """A potential U with derivatives and validity metadata.

    Attributes
    ----------
    u, du, d2u : callable
        U, U' and U''; compiled with numba at construction.
    M : float
        Curvature U''(0) > 0.
    growth_exponent : float or None
        c2 > 0 when U grows like |x|^(2+c2) on the left; required by
        half-line exit problems, None otherwise.
    name, params : str, tuple
        Registry identity used by configs and output echoes.
    """

    u: Callable
    du: Callable
    d2u: Callable
    M: float
    growth_exponent: float | None = None
    name: str = "custom"
    params: tuple = ()

    def __post_init__(self) -> None:
        if self.M <= 0:
            raise ValueError(
                f"curvature M = U''(0) must be positive (non-degenerate well), got {self.M}"
            )
        for label in ("u", "du", "d2u"):
            object.__setattr__(self, label, _compiled(getattr(self, label), label))
        if abs(self.u(0.0)) > 1e-9:
            raise ValueError(f"U(0) must be 0, got {self.u(0.0)}")
        if abs(self.du(0.0)) > 1e-9:
            raise ValueError(f"U'(0) must be 0, got {self.du(0.0)}")
        if abs(self.d2u(0.0) - self.M) > 1e-6 * max(1.0, self.M):
            raise ValueError(
                f"U''(0) = {self.d2u(0.0)} does not match declared curvature M = {self.M}"
            )
        if self.growth_exponent is not None and self.growth_exponent <= 0:
            raise ValueError(f"growth_exponent must be positive, got {self.growth_exponent}")


@lru_cache(maxsize=None)
def _quadratic_fns(m: float):
    @njit(cache=False, nogil=True)
    def u(x):
        return 0.5 * m * x * x

    @njit(cache=False, nogil=True)
    def du(x):
        return m * x

    @njit(cache=False, nogil=True)
    def d2u(x):
        return m

    return u, du, d2u


def quadratic(m: float = 1.0) -> PotentialSpec:
    """Quadratic single well U(x) = m*x^2/2."""
    m = float(m)
    if m <= 0:
        raise ValueError(f"m must be positive, got {m}")
    u, du, d2u = _quadratic_fns(m)
    return PotentialSpec(u=u, du=du, d2u=d2u, M=m, name="quadratic", params=(m,))


@lru_cache(maxsize=None)
def _harmonic_quartic_fns(m: float, kappa: float):
    @njit(cache=False, nogil=True)
    def u(x):
        return 0.5 * m * x * x + 0.25 * kappa * x**4

    @njit(cache=False, nogil=True)
    def du(x):
        return m * x + kappa * x**3

    @njit(cache=False, nogil=True)
    def d2u(x):
        return m + 3.0 * kappa * x * x

    return u, du, d2u


def harmonic_quartic(m: float = 1.0, kappa: float = 1.0) -> PotentialSpec:
    """Quadratic-plus-quartic well U(x) = m*x^2/2 + kappa*x^4/4.

    Grows like |x|^4 at infinity (growth exponent 2), so it also suits
    half-line exit problems.
    """
    m, kappa = float(m), float(kappa)
    if m <= 0 or kappa <= 0:
        raise ValueError(f"m and kappa must be positive, got m={m}, kappa={kappa}")
    u, du, d2u = _harmonic_quartic_fns(m, kappa)
    return PotentialSpec(
        u=u, du=du, d2u=d2u, M=m, growth_exponent=2.0,
        name="harmonic_quartic", params=(m, kappa),
    )


@dataclass(frozen=True)
class ExitDomain:
    """Exit domain: bounded interval [-b, a] or half line (-inf, a]."""

    kind: str
    a: float
    b: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("bounded", "half_line"):
            raise ValueError(f"kind must be 'bounded' or 'half_line', got {self.kind!r}")
        if self.a <= 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if self.kind == "bounded":
            if self.b is None or self.b <= 0:
                raise ValueError(f"bounded domain needs b > 0, got {self.b}")
        elif self.b is not None:
            raise ValueError("half-line domain takes no b")

    @classmethod
    def bounded(cls, a: float, b: float) -> "ExitDomain":
        return cls("bounded", float(a), float(b))

    @classmethod
    def half_line(cls, a: float) -> "ExitDomain":
        return cls("half_line", float(a))

    @property
    def is_half_line(self) -> bool:
        return self.kind == "half_line"

    def contains(self, x: float) -> bool:
        if self.is_half_line:
            return x <= self.a
        return -self.b <= x <= self.a


@dataclass(frozen=True)
class ValidationReport:
    """Per-condition pass/fail rows for a (potential, domain) pair."""

    checks: tuple  # (name, passed, detail)
    passed: bool

    @property
    def failures(self) -> tuple:
        return tuple(c for c in self.checks if not c[1])


def _left_reach(dom: ExitDomain) -> float:
    # working-domain left edge for half-line grids (finite stand-in for -inf)
    return max(10.0, 3.0 * dom.a)


def validate_potential(p: PotentialSpec, dom: ExitDomain) -> ValidationReport:
    """Check the well geometry, derivative consistency and growth conditions.

    Returns a report carrying each condition; never raises on failures.
    """
    checks = []
    left = dom.b if not dom.is_half_line else _left_reach(dom)

    ok = abs(p.u(0.0)) <= 1e-10 and abs(p.du(0.0)) <= 1e-10
    checks.append(("origin_is_critical_point", ok, f"U(0)={p.u(0.0):g}, U'(0)={p.du(0.0):g}"))

    curv = p.d2u(0.0)
    ok = curv > 0 and abs(curv - p.M) <= 1e-6 * max(1.0, p.M)
    checks.append(("positive_curvature_at_origin", ok, f"U''(0)={curv:g}, M={p.M:g}"))

    grid = np.linspace(-left, dom.a, 201)
    grid = grid[np.abs(grid) > 1e-9]
    signs = np.array([x * p.du(x) for x in grid])
    ok = bool(np.all(signs > 0))
    checks.append(("confining_sign_x_du_positive", ok, f"min x*U'(x) = {signs.min():g}"))

    s = 1e-4
    pts = grid[np.abs(grid) >= 0.1]
    err_du = max(
        abs(p.du(x) - (p.u(x + s) - p.u(x - s)) / (2 * s)) / max(1.0, abs(p.du(x)))
        for x in pts
    )
    checks.append(("du_matches_u_finite_difference", err_du < 1e-5, f"max rel err {err_du:.2e}"))
    err_d2u = max(
        abs(p.d2u(x) - (p.du(x + s) - p.du(x - s)) / (2 * s)) / max(1.0, abs(p.d2u(x)))
        for x in pts
    )
    checks.append(("d2u_matches_du_finite_difference", err_d2u < 1e-5, f"max rel err {err_d2u:.2e}"))

    if dom.is_half_line:
        if p.growth_exponent is None or p.growth_exponent <= 0:
            checks.append(
                (
                    "superquadratic_left_growth",
                    False,
                    "half-line exit needs growth_exponent > 0 (U' must grow faster than linear)",
                )
            )
        else:
            # measured tail steepness of |U'| versus the declared exponent
            ratio = abs(p.du(-2.0 * left)) / abs(p.du(-left))
            measured = math.log2(ratio)
            need = 1.0 + p.growth_exponent / 2.0
            checks.append(
                (
                    "superquadratic_left_growth",
                    measured >= need,
                    f"log2 |U'(-2L)|/|U'(-L)| = {measured:.3f}, needs >= {need:g}",
                )
            )

    return ValidationReport(tuple(checks), all(c[1] for c in checks))


def flow(p: PotentialSpec, x: float, t: float) -> float:
    """Deterministic gradient flow Y_t(x), the solution of y' = -U'(y), y(0)=x.

    Adaptive explicit Runge-Kutta (RK45) at tight tolerance; monotone in x
    and |Y_t(x)| is non-increasing in t.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    x = float(x)
    if t == 0.0 or x == 0.0:
        return x
    du = p.du
    sol = solve_ivp(
        lambda s, y: (-du(y[0]),),
        (0.0, t),
        (x,),
        method="RK45",
        rtol=1e-10,
        atol=1e-12,
    )
    if not sol.success:
        raise RuntimeError(f"flow integration failed: {sol.message}")
    return float(sol.y[0, -1])


def relaxation_time(p: PotentialSpec, dom: ExitDomain, delta: float) -> float:
    """Worst-case time for the flow to reach the delta-neighbourhood of 0.

    Separation of variables gives the bound max of the two side integrals
    of dy/|U'(y)| from the boundary down to +-delta. For half-line domains
    the left integral starts at -infinity; it converges because U' grows
    superquadratically there.
    """
    min_dist = dom.a if dom.is_half_line else min(dom.a, dom.b)
    if not (0.0 < delta <= min_dist):
        raise ValueError(f"delta must lie in (0, {min_dist:g}], got {delta}")
    du = p.du
    right = 0.0
    if delta < dom.a:
        right, _ = quad(lambda y: 1.0 / du(y), delta, dom.a, limit=200)
    if dom.is_half_line:
        if p.growth_exponent is None:
            raise ValueError(
                "half-line relaxation time needs a superquadratic potential "
                "(growth_exponent is not set)"
            )
        left, _ = quad(lambda y: -1.0 / du(y), -np.inf, -delta, limit=200)
    else:
        left = 0.0
        if delta < dom.b:
            left, _ = quad(lambda y: -1.0 / du(y), -dom.b, -delta, limit=200)
    return max(left, right)
