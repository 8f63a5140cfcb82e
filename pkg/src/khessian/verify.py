"""Independent residual and invariant oracles.

Everything here works from function values only (finite differences and
quadrature), never from the solvers' internal right-hand sides, so it can be
used to check both numerical and closed-form profiles.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core_types import AnsatzKind, DomainError, ProblemParams, VerificationReport
from .profile_ode import Regime, lemma_regime

_OFFSETS = np.arange(-2, 3)

RICHARDSON_TOL = 1e-4


class StepSizeWarning(UserWarning):
    """Halving the finite-difference step changed the result noticeably."""


def _d1(vals, h):
    # 5-point central difference over the last axis (offsets -2..2), paired
    # antisymmetrically so that constants differentiate to exactly 0
    vals = np.asarray(vals)
    return (8 * (vals[..., 3] - vals[..., 1]) - (vals[..., 4] - vals[..., 0])) / (12 * h)


def _k_hessian_fd(params, v, r, h):
    inner = r + (_OFFSETS[:, None] + _OFFSETS[None, :]) * h
    vals = np.array([[v(x) for x in row] for row in inner])
    dv = _d1(vals, h)                         # v' at r + j h, j = -2..2
    rho = r + _OFFSETS * h
    g = rho ** (params.n - params.k) * dv ** params.k
    dg = _d1(g, h)
    return params.cnk * r ** (1 - params.n) * dg


def radial_k_hessian(params: ProblemParams, v: Callable[[float], float], r: float,
                     h_fd: float | None = None) -> float:
    """``S_k(D^2 v)`` for radial ``v`` via ``c_{n,k} r^{1-n} (r^{n-k} (v')^k)'``.

    Both derivatives use 4th-order central differences with step ``h_fd``
    (default ``1e-4 max(1, r)``).  A :class:`StepSizeWarning` is issued if the
    result at ``h_fd/2`` differs by more than ``1e-4`` relative.
    """
    h = 1e-4 * max(1.0, r) if h_fd is None else h_fd
    if not r > 4 * h:
        raise DomainError(f"r = {r} is too close to 0 for step {h}: need r > 4 h")
    coarse = _k_hessian_fd(params, v, r, h)
    fine = _k_hessian_fd(params, v, r, h / 2)
    scale = max(abs(coarse), 1e-12 * max(1.0, abs(v(r))))
    if abs(coarse - fine) > RICHARDSON_TOL * scale:
        warnings.warn(f"finite-difference step {h:g} at r = {r:g} looks too large "
                      f"({coarse:.6e} vs {fine:.6e})", StepSizeWarning, stacklevel=2)
    return float(coarse)


@dataclass(frozen=True)
class ResidualSample:
    t: float
    r: float
    residual: float
    scale: float

    @property
    def normalized(self) -> float:
        return abs(self.residual) / self.scale


def evolution_residual(sol, t: float, r: float, h_t: float | None = None,
                       h_r: float | None = None) -> ResidualSample:
    """Residual ``u_t - S_k(D^2 u)`` of a self-similar solution at ``(t, |x| = r)``.

    ``u_t`` is a 4th-order central difference with step ``h_t`` (default
    ``1e-5 max(1, t)``), shrunk if needed to stay inside the time domain.
    Normalized by ``|u_t| + |S_k| + 1``.
    """
    ht = 1e-5 * max(1.0, t) if h_t is None else h_t
    if sol.kind is AnsatzKind.TYPE_I:
        ht = min(ht, t / 4)
    elif sol.kind is AnsatzKind.TYPE_II:
        ht = min(ht, (sol.T - t) / 4)
    if not ht > 0:
        raise DomainError(f"t = {t} is not interior to the time domain")
    ut = _d1([sol(t + j * ht, r) for j in _OFFSETS], ht)
    sk = radial_k_hessian(sol.params, lambda x: sol(t, x), r, h_r)
    res = ut - sk
    return ResidualSample(t, r, res, abs(ut) + abs(sk) + 1.0)


def profile_residual(params: ProblemParams, v: Callable[[float], float], r: float,
                     h_fd: float | None = None) -> float:
    """Normalized residual of the profile ODE at ``r`` (finite differences only).

    ``|S_k v + alpha v + beta r v'| / (|alpha| v + |beta| r |v'| + 1)``.
    """
    h = 1e-4 * max(1.0, r) if h_fd is None else h_fd
    sk = radial_k_hessian(params, v, r, h)
    dv = _d1([v(r + j * h) for j in _OFFSETS], h)
    val = v(r)
    res = sk + params.alpha * val + params.beta * r * dv
    return abs(res) / (abs(params.alpha) * abs(val) + abs(params.beta) * r * abs(dv) + 1.0)


def fd_weights(x0: float, xs, order: int = 1) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at ``x0`` on the
    nodes ``xs`` (Fornberg's recursion)."""
    xs = np.asarray(xs, dtype=float)
    m = len(xs)
    c = np.zeros((m, order + 1))
    c[0, 0] = 1.0
    c1, c4 = 1.0, xs[0] - x0
    for i in range(1, m):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, xs[i] - x0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for s_ in range(mn, 0, -1):
                    c[i, s_] = c1 * (s_ * c[i - 1, s_ - 1] - c5 * c[i - 1, s_]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for s_ in range(mn, 0, -1):
                c[j, s_] = (c4 * c[j, s_] - s_ * c[j, s_ - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def flux_residuals(profile) -> np.ndarray:
    """Normalized divergence-form residual at every grid node with ``r > 0``.

    The flux is written as ``r^{n-k} (v')^k = r^n z^k`` with ``z = v'/r``, which
    is smooth and O(1) at the origin; ``z'`` is a 4th-order finite difference on
    the 5 nearest grid nodes.
    """
    p = profile.params
    n, k, c = p.n, p.k, p.cnk
    r = np.asarray(profile.grid[1:], dtype=float)
    v = np.asarray(profile.values[1:], dtype=float)
    w = np.asarray(profile.derivs[1:], dtype=float)
    if len(r) < 5:
        raise DomainError("at least 5 grid nodes with r > 0 are needed")
    z = w / r
    out = np.empty_like(r)
    for i in range(len(r)):
        lo = min(max(i - 2, 0), len(r) - 5)
        sl = slice(lo, lo + 5)
        dz = fd_weights(r[i], r[sl]) @ z[sl]
        div = c * (n * z[i] ** k + k * r[i] * z[i] ** (k - 1) * dz)
        out[i] = abs(div + p.alpha * v[i] + p.beta * r[i] * w[i])
    scale = abs(p.alpha) * np.abs(v) + abs(p.beta) * r * np.abs(w) + 1.0
    return out / scale


_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def radial_moment(profile, r) -> np.ndarray:
    """Cumulative ``int_0^{r_i} rho^{n-1} v(rho) d rho`` on the increasing grid ``r``
    (8-point Gauss-Legendre per interval on the profile's interpolant)."""
    n = profile.params.n
    lo, hi = r[:-1], r[1:]
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = nodes ** (n - 1) * np.asarray(profile.value(nodes))
    pieces = (vals @ _GL_W) * half
    return np.concatenate([[0.0], np.cumsum(pieces)])


def integral_identity_residuals(profile, r=None) -> np.ndarray:
    """Relative residual of
    ``c r^{n-k} (v')^k + beta r^n v - (n beta - alpha) int_0^r rho^{n-1} v = 0``."""
    p = profile.params
    n, k = p.n, p.k
    r = np.asarray(profile.grid if r is None else r, dtype=float)
    v = np.asarray(profile.value(r))
    w = np.asarray(profile.deriv(r))
    moment = radial_moment(profile, r)
    t1 = p.cnk * r ** (n - k) * w ** k
    t2 = p.beta * r ** n * v
    t3 = (n * p.beta - p.alpha) * moment
    scale = np.abs(t1) + np.abs(t2) + np.abs(t3)
    keep = scale > 0
    return np.abs(t1 + t2 - t3)[keep] / scale[keep]


def theorem1_suite(profile, refine: int = 4, resolution: float = 1e-9,
                   identity_tol: float = 1e-6, residual_tol: float = 1e-6) -> VerificationReport:
    """Grid checks of the qualitative properties of a computed profile.

    * ``E(r) = r^2 v^{2 delta}`` strictly increasing   (existence regime)
    * ``h(r) = v + delta r v' > 0``                      (existence regime)
    * ``sign v' = -sign alpha`` for ``r > 0``            (k odd existence regimes)
    * the integrated identity and the divergence-form residual

    Sign properties are checked on the solver grid refined ``refine`` times;
    the identity and the residual use the solver nodes themselves.
    ``resolution`` is the relative size below which a decrease of E or a
    negative h is attributed to rounding: on the boundary
    ``alpha = beta(n-2k)/k`` the true h decays like exp(-C r^{k+1}) and is
    not representable as ``v + delta r v'`` in double precision.  Use
    ``resolution=0`` for strict comparisons.  Checks whose hypotheses fail
    are reported as skipped.
    """
    p = profile.params
    regime = lemma_regime(p)
    r, v, w = profile.refined(refine)
    pos = r > 0
    rp, vp, wp = r[pos], v[pos], w[pos]
    report = VerificationReport()

    if p.alpha == 0:
        report.skip("E_increasing", "delta = beta/alpha undefined for alpha = 0")
        report.skip("h_positive", "delta = beta/alpha undefined for alpha = 0")
    elif regime is Regime.THEOREM1:
        d = p.delta
        E = rp ** 2 * vp ** (2 * d)
        dE = np.diff(E)
        bad = np.count_nonzero(dE <= -resolution * E[:-1]) if resolution else np.count_nonzero(dE <= 0)
        flat = np.count_nonzero(dE <= 0)
        report.add("E_increasing", bad, 0, note=f"{len(E)} points, {flat} not resolved as increasing")
        h = vp + d * rp * wp
        hscale = np.abs(vp) + np.abs(d * rp * wp)
        bad = np.count_nonzero(h <= -resolution * hscale) if resolution else np.count_nonzero(h <= 0)
        report.add("h_positive", bad, 0, note=f"min h = {h.min():.3e}")
    else:
        why = f"regime {regime.value}: requires alpha <= beta(n-2k)/k and beta > 0"
        report.skip("E_increasing", why)
        report.skip("h_positive", why)

    if regime.global_existence and p.alpha != 0:
        expected = -math.copysign(1.0, p.alpha)
        report.add("dv_sign", np.count_nonzero(np.sign(wp) != expected), 0,
                   note=f"expected sign {expected:+.0f}")
    else:
        report.skip("dv_sign", f"no sign law known in regime {regime.value}")

    ident = integral_identity_residuals(profile)
    report.add("integral_identity", float(ident.max()) if ident.size else 0.0, identity_tol)
    div = flux_residuals(profile)
    report.add("divergence_residual", float(div.max()) if div.size else 0.0, residual_tol)
    return report


def residual_report(sol, samples, tol: float = 1e-6, name: str = "residual",
                    h_r: float | None = None) -> VerificationReport:
    """Evolution residual at each ``(t, r)`` in ``samples``; one check per point."""
    report = VerificationReport()
    for i, (t, r) in enumerate(samples):
        s = evolution_residual(sol, t, r, h_r=h_r)
        report.add(f"{name}_{i}", s.normalized, tol, note=f"t={t:.6g}, r={r:.6g}")
    return report


def interior_samples(sol, count: int = 20, t_range=None, r_frac=(0.05, 0.9), seed: int = 0,
                     r_max: float = 2.0):
    """Deterministic ``(t, r)`` samples strictly inside the time domain and the support.

    Radii are drawn in ``r_frac`` times the support radius at ``t`` (for
    positive profiles, ``r_max`` capped by the tabulated range mapped to
    ``|x|``), staying clear of the free boundary.
    """
    rng = np.random.default_rng(seed)
    if t_range is None:
        if sol.kind is AnsatzKind.TYPE_II:
            t_range = (0.1 * sol.T, 0.8 * sol.T)
        else:
            t_range = (0.5, 2.0)
    out = []
    for _ in range(count):
        t = float(rng.uniform(*t_range))
        R = sol.support_radius(t)
        if not math.isfinite(R):
            R = min(r_max, sol.profile.r_max / sol.scales(t)[1])
        r = float(rng.uniform(r_frac[0] * R, r_frac[1] * R))
        out.append((t, r))
    return out
