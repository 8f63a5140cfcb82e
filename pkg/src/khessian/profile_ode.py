"""Numerical solution of the radial profile ODE

    c_{n,k} r^{1-n} (r^{n-k} (v')^k)' + alpha v + beta r v' = 0,  v(0) = a, v'(0) = 0.

Two independent routes are provided:

* :func:`solve_profile` -- Taylor start off the singular point ``r = 0``
  followed by adaptive integration of ``(v, v')``: embedded Runge-Kutta 4(5)
  for k = 1, Radau IIA for the stiff k > 1 case;
* :func:`picard_solve` -- fixed-point iteration of the equivalent integral
  equation ``v = a - int_0^r G(F(v)(s)) ds`` (``alpha, beta > 0`` only), used
  as a cross-check near the origin.

Even ``k`` is only served through the closed forms in :mod:`khessian.explicit`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import BPoly, CubicHermiteSpline

from . import explicit
from .core_types import (ContractionError, DomainError, NonConvergenceError, NumericalError,
                         ProblemParams, ProfileRangeError, SingularityError)
from .explicit import Branch, ClosedFormProfile, ClosedFormTag

POSITIVITY_EPS = 1e-12
W_FLOOR = 1e-150


class Regime(enum.Enum):
    THEOREM1 = "theorem1"
    BETA_ZERO = "beta-zero"
    NEGATIVE_EXPONENTS = "negative-exponents"
    ALPHA_ZERO = "alpha-zero"
    EXPLICIT_ONLY = "explicit-only"
    UNSUPPORTED = "unsupported"

    @property
    def global_existence(self) -> bool:
        """Whether a positive solution on (0, inf) is guaranteed (k odd)."""
        return self in (Regime.THEOREM1, Regime.BETA_ZERO, Regime.NEGATIVE_EXPONENTS)


REGIME_CONDITIONS = {
    Regime.THEOREM1: "k odd, alpha <= beta(n-2k)/k and beta > 0",
    Regime.BETA_ZERO: "k odd, alpha < 0 and beta = 0",
    Regime.NEGATIVE_EXPONENTS: "k odd and 0 > n*beta >= alpha",
    Regime.ALPHA_ZERO: "alpha = 0",
    Regime.EXPLICIT_ONLY: "k >= 2, alpha = n*beta != 0 (beta < 0 if k is even)",
}


def lemma_regime(params: ProblemParams) -> Regime:
    """Classify ``params`` into the known existence regimes."""
    n, k, alpha, beta = params.n, params.k, params.alpha, params.beta
    if alpha == 0:
        return Regime.ALPHA_ZERO
    if k % 2 == 1:
        if beta > 0 and alpha <= beta * (n - 2 * k) / k:
            return Regime.THEOREM1
        if beta == 0 and alpha < 0:
            return Regime.BETA_ZERO
        if 0 > n * beta >= alpha:
            return Regime.NEGATIVE_EXPONENTS
    if k >= 2 and math.isclose(alpha, n * beta, rel_tol=1e-12):
        if k % 2 == 1 or beta < 0:
            return Regime.EXPLICIT_ONLY
    return Regime.UNSUPPORTED


def initial_slope_limit(params: ProblemParams) -> float:
    """Limit ``L`` of ``v'(r)/r`` as ``r -> 0``, from ``L^k = -alpha a / (n c_{n,k})``."""
    if params.alpha == 0:
        raise DomainError("the slope limit is only defined for alpha != 0")
    rhs = -params.alpha * params.a / (params.n * params.cnk)
    if rhs < 0 and params.k % 2 == 0:
        raise DomainError(
            f"even k = {params.k} needs -alpha*a >= 0 for a real root; got alpha = {params.alpha}")
    return math.copysign(abs(rhs) ** (1.0 / params.k), rhs)


def rhs_first_order(params: ProblemParams, r: float, v: float, w: float,
                    w_floor: float = W_FLOOR) -> float:
    """Second derivative ``v''`` from the expanded divergence form.

    ``c [k w^{k-1} v'' + (n-k) w^k / r] = -r^{k-1} (alpha v + beta r w)`` with
    ``w = v'``.
    """
    n, k, c = params.n, params.k, params.cnk
    src = -(params.alpha * v + params.beta * r * w)
    if k == 1:
        return src / c - (n - 1) * w / r
    if abs(w) < w_floor:
        raise SingularityError(
            f"v' = {w:.3e} at r = {r:.6g}: leading coefficient k (v')^(k-1) degenerates")
    return (r ** (k - 1) * src / c - (n - k) * w ** k / r) / (k * w ** (k - 1))


def _second_deriv_scaled(params, r, v, z, w_floor=W_FLOOR):
    # rhs_first_order with w = r z; the factor r^{k-1} cancels, which keeps the
    # expression regular at r = 0
    n, k, c = params.n, params.k, params.cnk
    src = -(params.alpha * v + params.beta * r * r * z)
    if k == 1:
        return src / c - (n - 1) * z
    if abs(r * z if r > 0 else z) < w_floor:
        raise SingularityError(
            f"v' = {r * z:.3e} at r = {r:.6g}: leading coefficient k (v')^(k-1) degenerates")
    return (src / c - (n - k) * z ** k) / (k * z ** (k - 1))


RTOL_FLOOR = 100 * np.finfo(float).eps


@dataclass(frozen=True)
class SolverConfig:
    r_max: float
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    h_init: float | None = None
    picard_radius: float | None = None
    branch: Branch | None = None
    method: str | None = None

    def __post_init__(self):
        if not self.r_max > 0:
            raise DomainError("r_max must be > 0")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be > 0")
        if self.rel_tol < RTOL_FLOOR:
            # below this the integrators clamp rtol and Radau's Newton loop can stall
            raise DomainError(f"rel_tol must be >= {RTOL_FLOOR:.3g} (100 machine epsilons)")
        if self.h_init is not None and not 0 < self.h_init < self.r_max:
            raise DomainError("h_init must lie in (0, r_max)")
        if self.picard_radius is not None and not 0 < self.picard_radius < self.r_max:
            raise DomainError("picard_radius must lie in (0, r_max)")

    def method_for(self, k: int) -> str:
        """Integrator name for ``solve_ivp``.

        For k > 1 the fast mode decays at a rate ~ beta r^k / (k c (v')^{k-1})
        that grows without bound as v' -> 0, so an explicit pair is step-limited
        by stability; the implicit Radau IIA (order 5) is used there.
        """
        if self.method is not None:
            return self.method
        return "RK45" if k == 1 else "Radau"

    @property
    def start_step(self) -> float:
        return self.h_init if self.h_init is not None else 1e-6 * max(1.0, self.r_max)


@dataclass(frozen=True, eq=False)
class Profile:
    """Tabulated profile ``v(r_i), v'(r_i)`` on ``0 = r_0 < r_1 < ... < r_N``.

    Between nodes the profile is a piecewise quintic Hermite interpolant when
    second derivatives are known, cubic Hermite otherwise.  Profiles of closed-form
    provenance keep the exact evaluator and use it instead.
    """

    params: ProblemParams
    grid: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    provenance: ClosedFormTag | None = None
    second_derivs: np.ndarray | None = None
    r_stop: float | None = None
    stop_reason: str = ""
    exact: ClosedFormProfile | None = None

    def __post_init__(self):
        for name in ("grid", "values", "derivs", "second_derivs"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.array(arr, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.grid[0] != 0 or np.any(np.diff(self.grid) <= 0):
            raise DomainError("profile grid must start at 0 and be strictly increasing")
        if self.values[0] != self.params.a or self.derivs[0] != 0:
            raise DomainError("profile must satisfy v(0) = a, v'(0) = 0")
        if np.any(self.values <= 0):
            raise DomainError("profile values must be positive on the grid")
        # interpolate v - a so rounding near r = 0 scales with v - a, not with a
        excess = self.values - self.params.a
        if self.second_derivs is not None:
            nodes = np.stack([excess, self.derivs, self.second_derivs], axis=1)
            interp = BPoly.from_derivatives(self.grid, nodes)
        else:
            interp = CubicHermiteSpline(self.grid, excess, self.derivs)
        dinterp = interp.derivative()
        object.__setattr__(self, "_interp", interp)
        object.__setattr__(self, "_dinterp", dinterp)

    @property
    def is_numerical(self) -> bool:
        return self.provenance is None

    @property
    def r_max(self) -> float:
        if self.exact is not None:
            return math.inf
        return float(self.grid[-1])

    @property
    def support_radius(self) -> float:
        return self.exact.support_radius if self.exact is not None else math.inf

    @property
    def integrable(self) -> bool:
        # tabulated tails carry no decay information
        return self.exact is not None and self.exact.integrable

    def _check(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise DomainError("profiles are defined for r >= 0")
        if self.exact is None and np.any(r > self.grid[-1] * (1 + 1e-14)):
            raise ProfileRangeError(
                f"r = {np.max(r):.6g} is beyond the tabulated range [0, {self.grid[-1]:.6g}]")
        return r

    def __call__(self, r):
        return self.value(r)

    def value(self, r):
        r = self._check(r)
        out = self.exact.value(r) if self.exact is not None else self.params.a + self._interp(r)
        return float(out) if np.ndim(out) == 0 else np.asarray(out)

    def deriv(self, r):
        r = self._check(r)
        out = self.exact.deriv(r) if self.exact is not None else self._dinterp(r)
        return float(out) if np.ndim(out) == 0 else np.asarray(out)

    def refined(self, factor: int = 4):
        """Grid with ``factor - 1`` equally spaced points inserted per interval,
        and the interpolated values and derivatives there."""
        g = self.grid
        frac = np.arange(factor) / factor
        fine = (g[:-1, None] + np.diff(g)[:, None] * frac[None, :]).ravel()
        fine = np.append(fine, g[-1])
        return fine, np.asarray(self.value(fine)), np.asarray(self.deriv(fine))


def tabulate(closed: ClosedFormProfile, r_max: float, count: int = 2001) -> Profile:
    """Sample a closed-form profile onto a uniform grid on ``[0, min(r_max, r*))``."""
    support = closed.support_radius
    end = min(r_max, support)
    grid = np.linspace(0.0, end, count)
    if end == support:
        grid = grid[:-1]
    values = np.asarray(closed.value(grid), dtype=float)
    values[0] = closed.params.a
    derivs = np.asarray(closed.deriv(grid), dtype=float)
    derivs[0] = 0.0
    compact = math.isfinite(support) and support <= r_max
    return Profile(closed.params, grid, values, derivs, provenance=closed.tag,
                   r_stop=support if compact else None,
                   stop_reason="compact support" if compact else "", exact=closed)


def _explicit_for(params: ProblemParams, branch: Branch | None) -> ClosedFormProfile:
    k, alpha, beta = params.k, params.alpha, params.beta
    if alpha == 0:
        if beta == 0 or k == 1 or (beta > 0 and k % 2 == 1):
            return explicit.constant(params)
        return explicit.alpha_zero(params)
    if not math.isclose(alpha, params.n * beta, rel_tol=1e-12):
        raise DomainError(
            f"generic even k = {k} is unsupported; closed forms need alpha = 0 or alpha = n*beta")
    if beta > 0:
        raise DomainError(
            "for even k and alpha = n*beta > 0, c r^(n-k) (v')^k = -beta r^n v has no real solution")
    return explicit.barenblatt(params, branch or Branch.INCREASING)


def solve_profile(params: ProblemParams, cfg: SolverConfig) -> Profile:
    """Solve the profile problem on ``[0, cfg.r_max]``.

    For k odd and alpha != 0 the ODE is integrated from ``r = h`` with Taylor
    data ``v = a + L h^2/2``, ``v' = L h`` (``L`` from :func:`initial_slope_limit`).
    The integrated state is ``(v, v'/r)``, which stays O(1) near the origin so
    that the absolute tolerance controls the relative error of ``v'`` there.
    Integration halts when ``v`` drops below ``1e-12 a``; the stopping radius is
    recorded in ``Profile.r_stop``.  In regimes where a global positive solution
    is guaranteed an early stop raises :class:`NumericalError`.

    ``alpha = 0`` and even ``k`` are delegated to the closed forms.
    """
    if params.alpha == 0 or params.k % 2 == 0:
        return tabulate(_explicit_for(params, cfg.branch), cfg.r_max)

    regime = lemma_regime(params)
    L = initial_slope_limit(params)
    h0 = cfg.start_step
    y0 = [params.a + 0.5 * L * h0 * h0, L]
    floor = POSITIVITY_EPS * params.a

    def fun(r, y):
        v, z = y
        return (r * z, (_second_deriv_scaled(params, r, v, z) - z) / r)

    def positivity(r, y):
        return y[0] - floor
    positivity.terminal = True
    positivity.direction = -1

    sol = solve_ivp(fun, (h0, cfg.r_max), y0, method=cfg.method_for(params.k), rtol=cfg.rel_tol,
                    atol=cfg.abs_tol, events=positivity)
    if sol.status == -1:
        raise NumericalError(f"integration failed: {sol.message}")

    r = np.concatenate([[0.0], sol.t])
    v = np.concatenate([[params.a], sol.y[0]])
    z = np.concatenate([[L], sol.y[1]])
    w = r * z
    w[0] = 0.0  # not -0.0
    r_stop, reason = None, ""
    if sol.status == 1:
        # drop the event point itself, where v has reached the floor
        keep = v > floor
        r, v, z, w = r[keep], v[keep], z[keep], w[keep]
        r_stop, reason = float(sol.t_events[0][0]), "positivity lost"
        if regime.global_existence:
            raise NumericalError(
                f"positivity lost at r = {r_stop:.6g} although {REGIME_CONDITIONS[regime]} "
                "guarantees a global positive solution")
    ddv = np.array([_second_deriv_scaled(params, ri, vi, zi) for ri, vi, zi in zip(r, v, z)])
    return Profile(params, r, v, w, second_derivs=ddv, r_stop=r_stop, stop_reason=reason)


# -- fixed-point solver ---------------------------------------------------------

def lower_bound_constant(params: ProblemParams) -> float:
    """Constant ``A`` of the lower bound ``F(phi)(s) >= A s^k``."""
    a, n = params.a, params.n
    if a < 1:
        return a * a / (2 * n)
    if a == 1:
        return 1.0 / (2 * n)
    return a / (2 * n)


def _picard_scale(params):
    A = lower_bound_constant(params)
    return (1 / (2 * A)) * (A * params.alpha / params.cnk) ** (1.0 / params.k)


def contraction_factor(params: ProblemParams, radius: float) -> float:
    """Lipschitz bound ``(C~/2A) (A alpha / c_{n,k})^{1/k} radius^2`` of the map ``J``,
    with ``C~ = beta/alpha + |1/n - beta/alpha|``."""
    _require_positive_quadrant(params)
    d = params.beta / params.alpha
    c_tilde = d + abs(1 / params.n - d)
    return c_tilde * _picard_scale(params) * radius * radius


def ball_radius(params: ProblemParams) -> float:
    """Largest admissible ball radius ``delta`` around ``a`` (exclusive bound)."""
    _require_positive_quadrant(params)
    ratio = params.n * params.beta / params.alpha
    if ratio < 1:
        return params.a / 2
    return params.a / 2 / (2 * ratio - 1)


def invariance_bound(params: ProblemParams, radius: float, delta: float) -> float:
    """``(C/2A) (A alpha/c_{n,k})^{1/k} radius^2`` with
    ``C = (beta/alpha + |1 - n beta/alpha|)(a + delta)``; must not exceed delta."""
    d = params.beta / params.alpha
    C = (d + abs(1 - params.n * d)) * (params.a + delta)
    return C * _picard_scale(params) * radius * radius


def picard_radius(params: ProblemParams, target: float = 0.1) -> float:
    """A radius on which ``J`` maps the ball into itself and contracts by ``target``."""
    if not 0 < target < 1:
        raise DomainError("target contraction factor must lie in (0, 1)")
    delta = 0.9 * ball_radius(params)
    r_con = math.sqrt(target / contraction_factor(params, 1.0))
    r_inv = math.sqrt(delta / invariance_bound(params, 1.0, delta))
    return min(r_con, r_inv)


def _require_positive_quadrant(params):
    if not (params.alpha > 0 and params.beta > 0):
        raise DomainError("the fixed-point solver covers alpha > 0 and beta > 0 only")


def _power_weights(s, n):
    """Weights ``(w0, w1)`` with ``int_{s_j}^{s_{j+1}} tau^{n-1} phi = w0_j phi_j + w1_j phi_{j+1}``
    for piecewise linear ``phi``."""
    lo, hi = s[:-1], s[1:]
    h = hi - lo
    m0 = (hi ** n - lo ** n) / n
    m1 = (hi ** (n + 1) - lo ** (n + 1)) / (n + 1)
    w1 = (m1 - lo * m0) / h
    return m0 - w1, w1


def picard_solve(params: ProblemParams, radius: float, iters_max: int = 200,
                 tol: float = 1e-13, n_points: int = 2048) -> Profile:
    """Fixed point of ``J(phi)(r) = a - int_0^r G(F(phi)(s)) ds`` on ``[0, radius]``.

    ``G(s) = (alpha s / c_{n,k})^{1/k}`` and
    ``F(phi)(s) = s^k (delta phi(s) + (1 - n delta) s^{-n} int_0^s tau^{n-1} phi)``.
    The outer integral is a composite trapezoid rule on a uniform grid; the
    inner moment integrates ``tau^{n-1}`` exactly against the piecewise linear
    interpolant of ``phi``.
    """
    _require_positive_quadrant(params)
    q = contraction_factor(params, radius)
    if q >= 1:
        raise ContractionError(f"contraction factor {q:.4g} >= 1 on radius {radius:g}")
    n, k, a = params.n, params.k, params.a
    d = params.beta / params.alpha
    s = np.linspace(0.0, radius, n_points)
    w0, w1 = _power_weights(s, n)
    h = s[1] - s[0]
    s_pow_k = s ** k
    s_pow_n = s ** n
    s_pow_n[0] = 1.0  # F(0) = 0 through the s^k factor

    def G_of_F(phi):
        moment = np.concatenate([[0.0], np.cumsum(w0 * phi[:-1] + w1 * phi[1:])])
        F = s_pow_k * (d * phi + (1 - n * d) * moment / s_pow_n)
        if np.any(F < 0):
            raise ContractionError("F(phi) turned negative; the iterate left the invariant ball")
        return (params.alpha * F / params.cnk) ** (1.0 / k)

    phi = np.full_like(s, a)
    for _ in range(iters_max):
        g = G_of_F(phi)
        new = a - np.concatenate([[0.0], np.cumsum(0.5 * h * (g[1:] + g[:-1]))])
        step = np.max(np.abs(new - phi))
        phi = new
        if step < tol:
            break
    else:
        raise NonConvergenceError(f"Picard iteration stalled at update {step:.3e} after {iters_max} iterations")
    derivs = -G_of_F(phi)
    derivs[0] = 0.0
    return Profile(params, s, phi, derivs, r_stop=None, stop_reason="")
