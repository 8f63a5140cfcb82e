"""Shared parameter types, exceptions and the self-similar exponent algebra.

The radial profile equation studied throughout the package is

    c_{n,k} r^{1-n} (r^{n-k} (v')^k)' + alpha v + beta r v' = 0,
    v(0) = a,  v'(0) = 0,

and a pair (alpha, beta) is admissible for one of the three self-similar
ansatze when ``alpha (k - 1) + 2 k beta = rho`` with rho in {1, -1, 0}.
"""

from __future__ import annotations

import enum
import math
import numbers
from dataclasses import dataclass, field


class KHessianError(Exception):
    """Base class for every error raised by this package."""


class DomainError(KHessianError, ValueError):
    """Parameters fall outside the region where an object is defined."""


class DegenerateSystemError(DomainError):
    """The exponent relation cannot determine the requested component."""


class ProfileRangeError(DomainError):
    """Evaluation was requested beyond a tabulated profile's grid."""


class NonIntegrableError(DomainError):
    """The mass integral diverges or cannot be bounded from the data."""


class NumericalError(KHessianError, ArithmeticError):
    """A numerical procedure failed (divergence, stagnation, breakdown)."""


class NonConvergenceError(NumericalError):
    pass


class ContractionError(NumericalError):
    """The fixed-point map is not provably contractive on the requested radius."""


class SingularityError(NumericalError):
    """The leading coefficient k (v')^{k-1} of the profile ODE degenerated."""


def c_nk(n: int, k: int) -> float:
    """Return the dimensional constant ``binomial(n, k) / n``."""
    _check_int("n", n)
    _check_int("k", k)
    if not 1 <= k <= n:
        raise DomainError(f"c_nk requires 1 <= k <= n, got n={n}, k={k}")
    return math.comb(n, k) / n


def _check_int(name, value):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise DomainError(f"{name} must be an integer, got {value!r}")


@dataclass(frozen=True)
class ProblemParams:
    """Parameters ``(n, k, alpha, beta, a)`` of the radial profile problem.

    Only integer Hessian orders are accepted; ``1 <= k <= n`` and ``a > 0``
    are enforced on construction.
    """

    n: int
    k: int
    alpha: float
    beta: float
    a: float = 1.0

    def __post_init__(self):
        _check_int("n", self.n)
        _check_int("k", self.k)
        if not 1 <= self.k <= self.n:
            raise DomainError(f"requires 1 <= k <= n, got n={self.n}, k={self.k}")
        for name in ("alpha", "beta", "a"):
            value = getattr(self, name)
            if not isinstance(value, numbers.Real) or not math.isfinite(value):
                raise DomainError(f"{name} must be a finite real, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.a <= 0:
            raise DomainError(f"requires a > 0, got a={self.a}")

    @property
    def cnk(self) -> float:
        return c_nk(self.n, self.k)

    @property
    def delta(self) -> float:
        """``beta / alpha``; undefined for ``alpha == 0``."""
        if self.alpha == 0:
            raise DomainError("delta = beta/alpha is undefined for alpha = 0")
        return self.beta / self.alpha

    @property
    def k_odd(self) -> bool:
        return self.k % 2 == 1

    def replace(self, **changes) -> "ProblemParams":
        fields = {"n": self.n, "k": self.k, "alpha": self.alpha, "beta": self.beta, "a": self.a}
        fields.update(changes)
        return ProblemParams(**fields)

    def as_dict(self) -> dict:
        return {"n": self.n, "k": self.k, "alpha": self.alpha, "beta": self.beta, "a": self.a}


class AnsatzKind(enum.Enum):
    """Self-similar ansatz; the value is rho, the right-hand side of the
    exponent relation.

    * ``TYPE_I``:   u = t^{-alpha} v(x t^{-beta}),           rho = 1
    * ``TYPE_II``:  u = (T - t)^alpha v(x (T - t)^beta),     rho = -1
    * ``TYPE_III``: u = e^{-alpha t} v(x e^{-beta t}),       rho = 0
    """

    TYPE_I = 1
    TYPE_II = -1
    TYPE_III = 0

    @property
    def rho(self) -> int:
        return self.value

    @classmethod
    def from_label(cls, label: str) -> "AnsatzKind":
        labels = {"I": cls.TYPE_I, "II": cls.TYPE_II, "III": cls.TYPE_III}
        try:
            return labels[label.upper()]
        except KeyError:
            raise DomainError(f"unknown ansatz {label!r}; expected I, II or III") from None


def exponent_relation_residual(params: ProblemParams, kind: AnsatzKind) -> float:
    """Return ``alpha (k-1) + 2 k beta - rho``; zero for admissible exponents."""
    k = params.k
    return params.alpha * (k - 1) + 2 * k * params.beta - kind.rho


def solve_free_exponent(kind: AnsatzKind, k: int, *, alpha: float | None = None,
                        beta: float | None = None) -> tuple[float, float]:
    """Complete ``(alpha, beta)`` from one fixed component.

    Exactly one of ``alpha`` or ``beta`` must be given.  For ``k = 1`` the
    relation reads ``2 beta = rho`` and leaves alpha undetermined, so fixing
    beta raises :class:`DegenerateSystemError`.
    """
    _check_int("k", k)
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if (alpha is None) == (beta is None):
        raise DomainError("exactly one of alpha, beta must be fixed")
    rho = kind.rho
    if alpha is not None:
        return float(alpha), (rho - alpha * (k - 1)) / (2 * k)
    if k == 1:
        raise DegenerateSystemError(
            "for k = 1 the exponent relation fixes beta = rho/2 and leaves alpha free")
    return (rho - 2 * k * beta) / (k - 1), float(beta)


@dataclass(frozen=True)
class Check:
    """One entry of a :class:`VerificationReport`.

    A skipped check records why its hypotheses did not hold; it neither
    passes nor fails.
    """

    name: str
    measured: float
    tolerance: float
    skipped: bool = False
    note: str = ""

    @property
    def passed(self) -> bool:
        if self.skipped:
            return True
        return bool(self.measured <= self.tolerance)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "measured": self.measured,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "skipped": self.skipped,
            "note": self.note,
        }


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)

    def add(self, name, measured, tolerance, note=""):
        self.checks.append(Check(name, float(measured), float(tolerance), note=note))

    def skip(self, name, note):
        self.checks.append(Check(name, math.nan, math.nan, skipped=True, note=note))

    def extend(self, other: "VerificationReport", prefix: str = ""):
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.measured, c.tolerance, c.skipped, c.note))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> list[dict]:
        return [c.as_dict() for c in self.checks]

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            status = "SKIP" if c.skipped else ("PASS" if c.passed else "FAIL")
            detail = c.note if c.skipped else f"{c.measured:.3e} <= {c.tolerance:.1e}"
            lines.append(f"[{status}] {c.name}: {detail}")
        return "\n".join(lines)
