"""Closed-form profiles and self-similar solutions.

Families covered:

* ``alpha = 0``: ``a -/+ C r^{2k/(k-1)}`` (compact for beta > 0, k even;
  growing for beta < 0).
* ``alpha = n beta``: the Barenblatt-type profile ``(C -/+ gamma r^2)^{k/(k-1)}``
  with ``C = a^{(k-1)/k}`` and ``gamma = (k-1)/(2k) (|beta|/c_{n,k})^{1/k}``.
* the type II blow-up pair built from the ``alpha = n beta`` profile with
  ``beta = -1/(n(k-1)+2k)``.
* the heat-equation family ``a (T-t)^{alpha_m} M(n/2+m, n/2; |x|^2/(4(T-t)))``.

Profiles with compact support are extended by zero beyond their support.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core_types import DomainError, ProblemParams, c_nk
from .kummer import KummerSpec, kummer_M

_EXP_TOL = 1e-12


class ClosedFormTag(enum.Enum):
    CONSTANT = "constant"
    ALPHA_ZERO_PLUS = "alpha-zero-plus"
    ALPHA_ZERO_MINUS = "alpha-zero-minus"
    BARENBLATT_COMPACT = "barenblatt-compact"
    BARENBLATT_GROWING = "barenblatt-growing"
    HEAT_KUMMER = "heat-kummer"


class Branch(enum.Enum):
    DECREASING = "decreasing"
    INCREASING = "increasing"


def _close(x, y):
    return abs(x - y) <= _EXP_TOL * max(1.0, abs(x), abs(y))


def selfsimilar_denominator(n: int, k: int) -> int:
    return n * (k - 1) + 2 * k


def barenblatt_exponents(n: int, k: int) -> tuple[float, float, float]:
    """``(alpha, beta, gamma)`` of the type I source-type family."""
    if k < 2:
        raise DomainError("the Barenblatt-type family needs k >= 2")
    d = selfsimilar_denominator(n, k)
    beta = 1.0 / d
    gamma = (k - 1) / (2 * k) * (beta / c_nk(n, k)) ** (1.0 / k)
    return n / d, beta, gamma


# -- alpha = 0 ----------------------------------------------------------------

def _alpha_zero_constant(params):
    n, k, beta = params.n, params.k, params.beta
    if params.alpha != 0:
        raise DomainError(f"alpha-zero profile requires alpha = 0, got {params.alpha}")
    if beta == 0:
        raise DomainError("alpha-zero profile requires beta != 0 (beta = 0 gives v = a)")
    if k < 2:
        raise DomainError("alpha-zero profile requires k >= 2")
    if beta > 0 and k % 2:
        raise DomainError("the beta > 0 alpha-zero profile requires k even")
    d = selfsimilar_denominator(n, k)
    return (k - 1) / (2 * k) * ((k - 1) * abs(beta) / (d * params.cnk)) ** (1.0 / (k - 1))


def alpha_zero_profile(params: ProblemParams, r: float) -> float:
    """Evaluate ``a - C_+ r^p`` (beta > 0, k even; zero beyond r_bar) or
    ``a + C_- r^p`` (beta < 0), with ``p = 2k/(k-1)``."""
    return float(alpha_zero(params).value(r))


def alpha_zero_support(params: ProblemParams) -> float:
    """Support radius ``(a/C_+)^{(k-1)/(2k)}``; infinity for beta < 0."""
    const = _alpha_zero_constant(params)
    if params.beta < 0:
        return math.inf
    return (params.a / const) ** ((params.k - 1) / (2 * params.k))


# -- alpha = n beta -------------------------------------------------------------

def _barenblatt_constants(params, branch):
    n, k, alpha, beta = params.n, params.k, params.alpha, params.beta
    if k < 2:
        raise DomainError("the Barenblatt-type profile requires k >= 2")
    if alpha == 0 or not _close(alpha, n * beta):
        raise DomainError(f"requires alpha = n*beta != 0, got alpha={alpha}, n*beta={n * beta}")
    if branch is Branch.DECREASING and not (beta > 0 or k % 2 == 0):
        raise DomainError("the decreasing branch requires beta > 0, or beta < 0 with k even")
    if branch is Branch.INCREASING and not alpha < 0:
        raise DomainError("the increasing branch requires alpha < 0")
    gamma = (k - 1) / (2 * k) * (abs(beta) / params.cnk) ** (1.0 / k)
    return params.a ** ((k - 1) / k), gamma


def barenblatt_profile(params: ProblemParams, branch: Branch, r: float) -> float:
    """``(C - gamma r^2)_+^{k/(k-1)}`` (decreasing) or ``(C + gamma r^2)^{k/(k-1)}``
    (increasing)."""
    return float(barenblatt(params, branch).value(r))


def barenblatt_support(params: ProblemParams) -> float:
    """Radius ``sqrt(C/gamma)`` where the decreasing branch vanishes."""
    C, gamma = _barenblatt_constants(params, Branch.DECREASING)
    return math.sqrt(C / gamma)


def barenblatt_selfsimilar(n: int, k: int, C: float, t: float, x_norm: float) -> float:
    """Type I source-type solution ``t^{-alpha} (C - gamma |x|^2 t^{-2 beta})_+^{k/(k-1)}``."""
    if t <= 0:
        raise DomainError(f"barenblatt_selfsimilar needs t > 0, got {t}")
    if C <= 0:
        raise DomainError(f"C must be > 0, got {C}")
    alpha, beta, gamma = barenblatt_exponents(n, k)
    xi = x_norm / t ** beta
    bracket = C - gamma * xi * xi
    if bracket <= 0:
        return 0.0
    return t ** (-alpha) * bracket ** (k / (k - 1))


def blowup_exponents(n: int, k: int) -> tuple[float, float]:
    d = selfsimilar_denominator(n, k)
    return -n / d, -1.0 / d


def blowup_family_k(params: ProblemParams, T: float, t: float, x_norm: float) -> float:
    """Type II blow-up pair for ``k >= 2``.

    Compact support (positive part) for even k, globally positive for odd k::

        u = (T-t)^alpha (C -/+ gamma |x|^2 / (T-t)^{2|beta|})^{k/(k-1)}

    with ``C = a^{(k-1)/k}`` so that ``u(t, 0) = a (T-t)^alpha``.
    """
    n, k = params.n, params.k
    if k < 2:
        raise DomainError("blowup_family_k requires k >= 2")
    alpha, beta = blowup_exponents(n, k)
    if not (_close(params.alpha, alpha) and _close(params.beta, beta)):
        raise DomainError(
            f"requires alpha = -n/(n(k-1)+2k) = {alpha} and beta = -1/(n(k-1)+2k) = {beta}")
    if T <= 0 or not 0 <= t < T:
        raise DomainError(f"requires T > 0 and 0 <= t < T, got T={T}, t={t}")
    tau = T - t
    C = params.a ** ((k - 1) / k)
    gamma = (k - 1) / (2 * k) * (abs(beta) / params.cnk) ** (1.0 / k)
    y = gamma * x_norm ** 2 / tau ** (2 * abs(beta))
    bracket = C - y if k % 2 == 0 else C + y
    if bracket <= 0:
        return 0.0
    return tau ** alpha * bracket ** (k / (k - 1))


# -- heat equation ---------------------------------------------------------------

def heat_exponent(n: int, m: int) -> float:
    """``alpha_m = -n/2 - m``."""
    return -n / 2 - m


def heat_blowup(n: int, m: int, a: float, T: float, t: float, x_norm: float) -> float:
    """``a (T-t)^{-(n+2m)/2} M(n/2 + m, n/2; |x|^2 / (4 (T-t)))``."""
    if m < 0 or int(m) != m:
        raise DomainError(f"m must be a non-negative integer, got {m}")
    if a <= 0:
        raise DomainError(f"a must be > 0, got {a}")
    if not t < T:
        raise DomainError(f"requires t < T, got t={t}, T={T}")
    tau = T - t
    z = x_norm * x_norm / (4 * tau)
    return a * tau ** heat_exponent(n, m) * kummer_M(KummerSpec(n / 2 + m, n / 2), z)


# -- profile objects -------------------------------------------------------------

@dataclass(frozen=True)
class ClosedFormProfile:
    """An exactly evaluable radial profile ``v(r)`` with derivative.

    Build these with :func:`constant`, :func:`alpha_zero`, :func:`barenblatt`
    and :func:`heat_kummer`, which check the parameter constraints.
    """

    params: ProblemParams
    tag: ClosedFormTag
    m: int | None = None

    r_max = math.inf

    @property
    def support_radius(self) -> float:
        if self.tag is ClosedFormTag.ALPHA_ZERO_PLUS:
            return alpha_zero_support(self.params)
        if self.tag is ClosedFormTag.BARENBLATT_COMPACT:
            return barenblatt_support(self.params)
        return math.inf

    @property
    def integrable(self) -> bool:
        return math.isfinite(self.support_radius)

    @property
    def is_numerical(self) -> bool:
        return False

    def __call__(self, r):
        return self.value(r)

    def value(self, r):
        return self._eval(r, 0)

    def deriv(self, r):
        return self._eval(r, 1)

    def _eval(self, r, order):
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr < 0):
            raise DomainError("profiles are defined for r >= 0")
        out = np.vectorize(lambda x: self._scalar(x, order), otypes=[float])(r_arr)
        return float(out) if out.ndim == 0 else out

    def _scalar(self, r, order):
        p = self.params
        tag = self.tag
        if tag is ClosedFormTag.CONSTANT:
            return p.a if order == 0 else 0.0
        if tag is ClosedFormTag.HEAT_KUMMER:
            a_, b_ = -p.alpha, p.n / 2
            z = r * r / 4
            if order == 0:
                return p.a * kummer_M(KummerSpec(a_, b_), z)
            return p.a * a_ / b_ * kummer_M(KummerSpec(a_ + 1, b_ + 1), z) * r / 2
        k = p.k
        if tag in (ClosedFormTag.ALPHA_ZERO_PLUS, ClosedFormTag.ALPHA_ZERO_MINUS):
            const = _alpha_zero_constant(p)
            pw = 2 * k / (k - 1)
            sign = -1.0 if tag is ClosedFormTag.ALPHA_ZERO_PLUS else 1.0
            if sign < 0 and r >= self.support_radius:
                return 0.0
            if order == 0:
                return p.a + sign * const * r ** pw
            return sign * pw * const * r ** (pw - 1)
        branch = Branch.DECREASING if tag is ClosedFormTag.BARENBLATT_COMPACT else Branch.INCREASING
        C, gamma = _barenblatt_constants(p, branch)
        sign = -1.0 if branch is Branch.DECREASING else 1.0
        bracket = C + sign * gamma * r * r
        if bracket <= 0:
            return 0.0
        q = k / (k - 1)
        if order == 0:
            return bracket ** q
        return sign * 2 * gamma * r * q * bracket ** (q - 1)


def constant(params: ProblemParams) -> ClosedFormProfile:
    """``v = a``; solves the profile equation whenever ``alpha = 0``."""
    if params.alpha != 0:
        raise DomainError("the constant profile requires alpha = 0")
    return ClosedFormProfile(params, ClosedFormTag.CONSTANT)


def alpha_zero(params: ProblemParams) -> ClosedFormProfile:
    _alpha_zero_constant(params)
    tag = ClosedFormTag.ALPHA_ZERO_PLUS if params.beta > 0 else ClosedFormTag.ALPHA_ZERO_MINUS
    return ClosedFormProfile(params, tag)


def barenblatt(params: ProblemParams, branch: Branch = Branch.DECREASING) -> ClosedFormProfile:
    _barenblatt_constants(params, branch)
    tag = (ClosedFormTag.BARENBLATT_COMPACT if branch is Branch.DECREASING
           else ClosedFormTag.BARENBLATT_GROWING)
    return ClosedFormProfile(params, tag)


def heat_kummer(n: int, m: int, a: float = 1.0) -> ClosedFormProfile:
    """Profile ``a M(n/2 + m, n/2; r^2/4)`` of the heat blow-up family."""
    if m < 0 or int(m) != m:
        raise DomainError(f"m must be a non-negative integer, got {m}")
    params = ProblemParams(n, 1, heat_exponent(n, m), -0.5, a)
    return ClosedFormProfile(params, ClosedFormTag.HEAT_KUMMER, m=int(m))
