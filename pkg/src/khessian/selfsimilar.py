"""Self-similar solutions ``u(t, x)`` of ``u_t = S_k(D^2 u)`` built from a profile.

    type I    u = t^{-alpha} v(|x| t^{-beta})              t > 0
    type II   u = (T - t)^alpha v(|x| (T - t)^beta)        0 <= t < T
    type III  u = e^{-alpha t} v(|x| e^{-beta t})          all t
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from . import explicit
from .core_types import (AnsatzKind, DomainError, NonIntegrableError, ProblemParams,
                         VerificationReport, exponent_relation_residual)
from .explicit import Branch

_RELATION_TOL = 1e-12


def sphere_area(n: int) -> float:
    """Surface area ``2 pi^{n/2} / Gamma(n/2)`` of the unit sphere in R^n."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


@dataclass(frozen=True, eq=False)
class SelfSimilarSolution:
    """A radial profile combined with an ansatz.

    ``profile`` is anything exposing ``value(r)``, ``support_radius``,
    ``integrable`` and ``params`` -- a :class:`~khessian.profile_ode.Profile`
    or a :class:`~khessian.explicit.ClosedFormProfile`.
    """

    profile: object
    kind: AnsatzKind
    T: float | None = None

    def __post_init__(self):
        res = exponent_relation_residual(self.params, self.kind)
        if abs(res) > _RELATION_TOL:
            raise DomainError(
                f"(alpha, beta) = ({self.params.alpha}, {self.params.beta}) violate "
                f"alpha(k-1) + 2k beta = {self.kind.rho} (residual {res:.3e})")
        if self.kind is AnsatzKind.TYPE_II and not (self.T is not None and self.T > 0):
            raise DomainError("type II solutions need a blow-up time T > 0")

    @property
    def params(self) -> ProblemParams:
        return self.profile.params

    def scales(self, t: float) -> tuple[float, float]:
        """``(amplitude, s)`` with ``u(t, x) = amplitude * v(s |x|)``."""
        alpha, beta = self.params.alpha, self.params.beta
        if self.kind is AnsatzKind.TYPE_I:
            if not t > 0:
                raise DomainError(f"type I solutions are defined for t > 0, got t={t}")
            return t ** (-alpha), t ** (-beta)
        if self.kind is AnsatzKind.TYPE_II:
            if not 0 <= t < self.T:
                raise DomainError(f"type II solutions are defined for 0 <= t < T={self.T}, got t={t}")
            tau = self.T - t
            return tau ** alpha, tau ** beta
        return math.exp(-alpha * t), math.exp(-beta * t)

    def support_radius(self, t: float) -> float:
        """Radius of ``supp u(t, .)`` (infinite for positive profiles)."""
        _, s = self.scales(t)
        return self.profile.support_radius / s

    def __call__(self, t, x_norm):
        return evaluate(self, t, x_norm)


def evaluate(sol: SelfSimilarSolution, t: float, x_norm):
    """``u(t, x)`` for ``|x| = x_norm`` (scalar or array)."""
    amp, s = sol.scales(t)
    x = np.asarray(x_norm, dtype=float)
    if np.any(x < 0):
        raise DomainError("x_norm must be >= 0")
    out = amp * np.asarray(sol.profile.value(x * s))
    return float(out) if out.ndim == 0 else out


def mass_conserved(sol: SelfSimilarSolution) -> bool:
    """Whether ``M(t)`` is finite and time independent.

    This needs a type I or II ansatz, an integrable profile and ``alpha = n beta``.
    Type III solutions never qualify: for ``beta != 0`` the exponent relation
    ``alpha(k-1) = -2k beta`` forces opposite signs, and the constant profile
    has infinite mass.
    """
    return sol.kind is not AnsatzKind.TYPE_III and sol.profile.integrable and _mass_law(sol.params)


def _mass_law(p) -> bool:
    return math.isclose(p.alpha, p.n * p.beta, rel_tol=1e-12, abs_tol=1e-15)


def _radial_integral(sol, t, weight, rtol):
    if not sol.profile.integrable:
        why = "the profile is not integrable on R^n"
        if not sol.profile.is_numerical:
            why += " (it does not decay)"
        else:
            why += " (tabulated profiles carry no tail information)"
        if sol.kind is AnsatzKind.TYPE_III:
            why += "; M(t) is not conserved along eternal type III solutions"
        raise NonIntegrableError(f"M(t) is undefined: {why}")
    n = sol.params.n
    R = sol.support_radius(t)

    def integrand(r):
        return evaluate(sol, t, r) * weight(r) * r ** (n - 1)

    val, _ = quad(integrand, 0.0, R, epsabs=0.0, epsrel=rtol, limit=200)
    # tighten to the absolute target 1e-10 (1 + |M|)
    val, err = quad(integrand, 0.0, R, epsabs=1e-10 * (1 + abs(val)), epsrel=rtol, limit=200)
    return sphere_area(n) * val


def mass(sol: SelfSimilarSolution, t: float, rtol: float = 1e-12) -> float:
    """Total mass ``M(t) = int_{R^n} u(t, x) dx`` by adaptive quadrature over the support."""
    return _radial_integral(sol, t, lambda r: 1.0, rtol)


def mass_report(sol: SelfSimilarSolution, times: Sequence[float], tol: float = 1e-6) -> VerificationReport:
    """Relative spread ``(max M - min M) / max |M|`` of the mass across ``times``."""
    report = VerificationReport()
    if not mass_conserved(sol):
        p = sol.params
        if sol.kind is AnsatzKind.TYPE_III:
            why = "eternal type III solution"
        elif not sol.profile.integrable:
            why = "profile not integrable"
        else:
            why = f"alpha = {p.alpha} != n*beta = {p.n * p.beta}"
        report.add("mass_law", 1.0, 0.0, note=f"{why}: M(t) is not conserved")
        return report
    masses = np.array([mass(sol, t) for t in times])
    spread = (masses.max() - masses.min()) / np.abs(masses).max()
    report.add("mass_spread", spread, tol)
    return report


def dirac_trace_check(sol: SelfSimilarSolution, test_fn: Callable[[float], float],
                      times: Sequence[float], tol: float = 1e-3) -> VerificationReport:
    """Check ``int u(t, x) phi(x) dx -> M phi(0)`` as ``t -> 0`` for radial ``phi``.

    ``test_fn`` is ``phi`` as a function of ``|x|``.  The report contains the
    number of times the gap failed to decrease and the final gap relative to
    ``M |phi(0)|``.
    """
    if sol.kind is not AnsatzKind.TYPE_I:
        raise DomainError("the initial trace is only defined for type I solutions")
    times = list(times)
    if any(t1 >= t0 for t0, t1 in zip(times, times[1:])):
        raise DomainError("times must decrease towards 0")
    M = mass(sol, times[-1])
    phi0 = test_fn(0.0)
    gaps = np.array([abs(_radial_integral(sol, t, test_fn, 1e-12) - M * phi0) for t in times])
    report = VerificationReport()
    report.add("gap_not_decreasing", np.count_nonzero(np.diff(gaps) >= 0), 0,
               note="gaps: " + ", ".join(f"{g:.3e}" for g in gaps))
    report.add("final_gap", gaps[-1] / (M * abs(phi0)), tol)
    return report


def sup_norms(sol: SelfSimilarSolution, radius: float, times: Sequence[float],
              inner_radius: float = 0.0, samples: int = 257) -> np.ndarray:
    """``max |u(t, x)|`` over ``inner_radius <= |x| <= radius`` at each time (sampled)."""
    xs = np.linspace(inner_radius, radius, samples) if radius > inner_radius else np.array([radius])
    return np.array([np.max(np.abs(evaluate(sol, t, xs))) for t in times])


def blowup_diagnostic(sol: SelfSimilarSolution, radius: float, times: Sequence[float],
                      inner_radius: float = 0.0, slack: float = 0.1) -> VerificationReport:
    """Check that ``sup |u(t, .)|`` over the annulus diverges as ``t -> T``.

    Consecutive sup ratios must reach ``(1 - slack)`` times the ratio of the
    amplitude ``(T - t)^alpha``.  If ``u`` vanishes on the sampled region the
    ratio checks are skipped and no divergence is reported.
    """
    if sol.kind is not AnsatzKind.TYPE_II:
        raise DomainError("blow-up diagnostics apply to type II solutions")
    times = list(times)
    if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
        raise DomainError("times must increase towards T")
    sups = sup_norms(sol, radius, times, inner_radius)
    amps = np.array([sol.scales(t)[0] for t in times])
    report = VerificationReport()
    if np.all(sups == 0):
        report.add("sup_vanishes", 0.0, 0.0, note="u = 0 on the sampled region; no blow-up there")
        for i in range(len(times) - 1):
            report.skip(f"ratio_{i}", "u vanishes on the sampled region")
        return report
    for i in range(len(times) - 1):
        expected = amps[i + 1] / amps[i]
        ratio = sups[i + 1] / sups[i] if sups[i] > 0 else math.inf
        measured = expected / ratio if ratio > 0 else math.inf
        report.add(f"ratio_{i}", measured, 1 / (1 - slack),
                   note=f"sup ratio {ratio:.6g}, amplitude ratio {expected:.6g}")
    return report


# -- constructors for the closed-form families ------------------------------------

def barenblatt_solution(n: int, k: int, C: float = 1.0) -> SelfSimilarSolution:
    """Type I source-type solution with free constant ``C`` (``v(0) = C^{k/(k-1)}``)."""
    alpha, beta, _ = explicit.barenblatt_exponents(n, k)
    params = ProblemParams(n, k, alpha, beta, C ** (k / (k - 1)))
    return SelfSimilarSolution(explicit.barenblatt(params, Branch.DECREASING), AnsatzKind.TYPE_I)


def blowup_solution(n: int, k: int, a: float = 1.0, T: float = 1.0) -> SelfSimilarSolution:
    """Type II blow-up solution: compact support for even k, positive for odd k."""
    alpha, beta = explicit.blowup_exponents(n, k)
    params = ProblemParams(n, k, alpha, beta, a)
    branch = Branch.DECREASING if k % 2 == 0 else Branch.INCREASING
    return SelfSimilarSolution(explicit.barenblatt(params, branch), AnsatzKind.TYPE_II, T)


def heat_solution(n: int, m: int, a: float = 1.0, T: float = 1.0) -> SelfSimilarSolution:
    return SelfSimilarSolution(explicit.heat_kummer(n, m, a), AnsatzKind.TYPE_II, T)


def alpha_zero_solution(n: int, k: int, kind: AnsatzKind, a: float = 1.0,
                        T: float | None = None) -> SelfSimilarSolution:
    """``alpha = 0`` solutions: type I with beta = 1/(2k) (k even, compact) or
    type II with beta = -1/(2k) (growing)."""
    if kind is AnsatzKind.TYPE_III:
        raise DomainError("alpha = 0 type III solutions are constant; use constant_solution")
    beta = 1.0 / (2 * k) * kind.rho
    params = ProblemParams(n, k, 0.0, beta, a)
    return SelfSimilarSolution(explicit.alpha_zero(params), kind, T)


def constant_solution(n: int, k: int, a: float = 1.0) -> SelfSimilarSolution:
    return SelfSimilarSolution(explicit.constant(ProblemParams(n, k, 0.0, 0.0, a)), AnsatzKind.TYPE_III)
