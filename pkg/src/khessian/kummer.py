"""Pochhammer symbol and Kummer's function M(a, b; z) by direct summation.

The series is summed term by term in extended precision (``np.longdouble``)
with Neumaier-compensated accumulation.  Only real parameters are supported.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core_types import DomainError, NonConvergenceError, ProblemParams

LARGE_Z = 50.0


class ConditioningWarning(UserWarning):
    """Issued for |z| > 50, where term growth can cost significant digits."""


def pochhammer(a: float, s: int) -> float:
    """Rising factorial ``(a)_s = a (a+1) ... (a+s-1)`` with ``(a)_0 = 1``."""
    if s < 0 or int(s) != s:
        raise DomainError(f"pochhammer needs a non-negative integer s, got {s!r}")
    out = 1.0
    for j in range(int(s)):
        out *= a + j
    return out


def _is_nonpositive_integer(x):
    return x <= 0 and float(x).is_integer()


@dataclass(frozen=True)
class KummerSpec:
    """Parameters and truncation policy for ``M(a, b; z)``."""

    a: float
    b: float
    rel_tol: float = 1e-14
    max_terms: int = 10_000

    def __post_init__(self):
        if _is_nonpositive_integer(self.b):
            raise DomainError(f"M(a, b; z) is undefined for b = {self.b} (non-positive integer)")
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be > 0")
        if self.max_terms < 1:
            raise DomainError("max_terms must be >= 1")

    @property
    def terminates(self) -> bool:
        """True when ``a`` is a non-positive integer, making M a polynomial."""
        return _is_nonpositive_integer(self.a)


class KummerResult(NamedTuple):
    value: float
    terms: int
    ill_conditioned: bool


def _finished(spec, z, value, terms):
    value = float(value)
    if not math.isfinite(value):
        raise NonConvergenceError(f"M({spec.a}, {spec.b}; {z}) overflows double precision")
    return KummerResult(value, terms, abs(z) > LARGE_Z)


def kummer_series(spec: KummerSpec, z: float) -> KummerResult:
    """Sum the series and report how many terms were used.

    Summation stops once two consecutive terms are below ``rel_tol`` times the
    running sum, or when a terminating series reaches its last term.
    """
    a = np.longdouble(spec.a)
    b = np.longdouble(spec.b)
    zz = np.longdouble(z)
    term = np.longdouble(1)
    total = np.longdouble(1)
    comp = np.longdouble(0)
    small = 0
    for s in range(spec.max_terms):
        term = term * (a + s) / (b + s) * zz / (s + 1)
        if term == 0:
            # terminating series (a = -m) or underflow: the remaining tail is zero
            return _finished(spec, z, total + comp, s + 1)
        t = total + term
        if abs(total) >= abs(term):
            comp += (total - t) + term
        else:
            comp += (term - t) + total
        total = t
        if abs(term) <= spec.rel_tol * abs(total + comp):
            small += 1
            if small == 2:
                return _finished(spec, z, total + comp, s + 2)
        else:
            small = 0
    raise NonConvergenceError(
        f"M({spec.a}, {spec.b}; {z}) did not converge within {spec.max_terms} terms")


def kummer_M(spec: KummerSpec, z: float) -> float:
    """Kummer's confluent hypergeometric function of the first kind.

    >>> round(kummer_M(KummerSpec(2.0, 1.0), 1.0), 12)
    5.436563656918
    """
    result = kummer_series(spec, z)
    if result.ill_conditioned:
        warnings.warn(f"|z| = {abs(z):g} > {LARGE_Z:g}: series may be ill-conditioned",
                      ConditioningWarning, stacklevel=2)
    return result.value


def kummer_profile(params: ProblemParams, r: float, *, rel_tol: float = 1e-14) -> float:
    """Heat-equation blow-up profile ``a * M(-alpha, n/2; r^2/4)``.

    Requires ``k = 1``, ``beta = -1/2`` and ``alpha <= -n/2``; at ``alpha = -n/2``
    this is ``a exp(r^2/4)``.
    """
    if params.k != 1:
        raise DomainError(f"kummer_profile requires k = 1, got k={params.k}")
    if params.beta != -0.5:
        raise DomainError(f"kummer_profile requires beta = -1/2, got beta={params.beta}")
    if params.alpha > -params.n / 2:
        raise DomainError(
            f"kummer_profile requires alpha <= -n/2 = {-params.n / 2}, got alpha={params.alpha}")
    if r < 0 or not math.isfinite(r):
        raise DomainError(f"radius must be finite and >= 0, got {r}")
    spec = KummerSpec(-params.alpha, params.n / 2, rel_tol=rel_tol)
    return params.a * kummer_M(spec, r * r / 4)


def kummer_profile_deriv(params: ProblemParams, r: float, *, rel_tol: float = 1e-14) -> float:
    """Radial derivative of :func:`kummer_profile`, from M' = (a/b) M(a+1, b+1)."""
    kummer_profile(params, r, rel_tol=rel_tol)  # validates
    a_, b_ = -params.alpha, params.n / 2
    dM = a_ / b_ * kummer_M(KummerSpec(a_ + 1, b_ + 1, rel_tol=rel_tol), r * r / 4)
    return params.a * dM * r / 2
