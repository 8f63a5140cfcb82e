import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from khessian import explicit
from khessian.core_types import DomainError, ProblemParams, c_nk
from khessian.explicit import (Branch, ClosedFormTag, alpha_zero_profile, alpha_zero_support,
                               barenblatt_exponents, barenblatt_profile, barenblatt_selfsimilar,
                               barenblatt_support, blowup_exponents, blowup_family_k, heat_blowup)
from khessian.profile_ode import SolverConfig, solve_profile
from khessian.verify import profile_residual


def _ode_residual_symbolic(params, expr, r):
    """Profile ODE residual of a sympy expression, divided by |alpha v| + |beta r v'| + 1."""
    n, k = params.n, params.k
    c = sp.Rational(math.comb(n, k), n)
    dv = sp.diff(expr, r)
    lhs = c * r ** (1 - n) * sp.diff(r ** (n - k) * dv ** k, r)
    res = lhs + params.alpha * expr + params.beta * r * dv
    scale = abs(params.alpha) * sp.Abs(expr) + abs(params.beta) * r * sp.Abs(dv) + 1
    return sp.lambdify(r, res / scale, "mpmath")


# -- alpha = 0 -------------------------------------------------------------------

def test_alpha_zero_origin():
    assert alpha_zero_profile(ProblemParams(3, 3, 0.0, -1 / 6, 2.0), 0.0) == 2.0


def test_alpha_zero_constant_n2_k2():
    # v = 1 - r^4/12 solves (1/2) r^{-1} ((v')^2)' + r v' = 0
    p = ProblemParams(2, 2, 0.0, 1.0, 1.0)
    assert alpha_zero_profile(p, 1.0) == pytest.approx(1 - 1 / 12, rel=1e-15)
    assert alpha_zero_support(p) == pytest.approx(12 ** 0.25, rel=1e-15)
    assert alpha_zero_profile(p, 12 ** 0.25 + 1e-9) == 0.0


@pytest.mark.parametrize("params", [ProblemParams(2, 2, 0.0, 1.0), ProblemParams(4, 2, 0.0, 0.25, 2.0),
                                    ProblemParams(3, 3, 0.0, -1 / 6), ProblemParams(5, 4, 0.0, -0.3, 0.5)])
def test_alpha_zero_fd_residual(params):
    prof = explicit.alpha_zero(params)
    for r in (0.1, 0.5):
        assert profile_residual(params, prof.value, r) <= 1e-8


def test_alpha_zero_symbolic_residual():
    r = sp.symbols("r", positive=True)
    p = ProblemParams(3, 3, 0.0, -1 / 6)
    const = explicit._alpha_zero_constant(p)
    f = _ode_residual_symbolic(p, 1 + const * r ** 3, r)
    for x in (0.2, 0.9, 2.5):
        assert abs(float(f(x))) <= 1e-13


@pytest.mark.parametrize("params", [ProblemParams(3, 1, 0.0, 1.0), ProblemParams(3, 3, 0.0, 1.0),
                                    ProblemParams(3, 2, 0.5, 1.0), ProblemParams(3, 2, 0.0, 0.0)])
def test_alpha_zero_rejects(params):
    with pytest.raises(DomainError):
        explicit.alpha_zero(params)


# -- alpha = n beta --------------------------------------------------------------

def test_barenblatt_origin_is_a():
    assert barenblatt_profile(ProblemParams(3, 3, 3 / 12, 1 / 12, 1.7), Branch.DECREASING, 0.0) == pytest.approx(1.7)
    assert barenblatt_profile(ProblemParams(3, 3, -3 / 12, -1 / 12, 1.7), Branch.INCREASING, 0.0) == pytest.approx(1.7)


def test_barenblatt_support_root():
    p = ProblemParams(3, 2, 3 / 7, 1 / 7, 1.0)
    rs = barenblatt_support(p)
    gamma = 0.25 * (1 / 7) ** 0.5
    assert rs == pytest.approx(math.sqrt(1 / gamma), rel=1e-14)
    assert barenblatt_profile(p, Branch.DECREASING, rs) == 0.0
    assert barenblatt_profile(p, Branch.DECREASING, rs * (1 - 1e-6)) > 0
    assert barenblatt_profile(p, Branch.DECREASING, 2 * rs) == 0.0


@pytest.mark.parametrize("n, k, branch", [(3, 3, Branch.DECREASING), (4, 3, Branch.DECREASING),
                                          (3, 3, Branch.INCREASING), (3, 2, Branch.DECREASING),
                                          (5, 4, Branch.DECREASING)])
def test_barenblatt_first_integral(n, k, branch):
    # c r^{n-k} (v')^k + beta r^n v = 0 wherever the branch is a real solution
    d = explicit.selfsimilar_denominator(n, k)
    beta = 1 / d if branch is Branch.DECREASING and k % 2 else -1 / d
    p = ProblemParams(n, k, n * beta, beta, 1.3)
    prof = explicit.barenblatt(p, branch)
    R = min(prof.support_radius, 3.0)
    for r in np.linspace(0.05, 0.95, 10) * R:
        first = p.cnk * r ** (n - k) * prof.deriv(r) ** k
        second = beta * r ** n * prof.value(r)
        assert abs(first + second) <= 1e-9 * (abs(first) + abs(second))


def test_even_k_type_one_barenblatt_is_not_a_solution():
    # for k even and beta > 0, (v')^k = -beta r^k v / c has no real solution, so
    # the decreasing closed form cannot satisfy the profile equation
    r = sp.symbols("r", positive=True)
    alpha, beta, gamma = barenblatt_exponents(3, 2)
    p = ProblemParams(3, 2, alpha, beta)
    f = _ode_residual_symbolic(p, (1 - gamma * r ** 2) ** 2, r)
    assert abs(float(f(0.5 * barenblatt_support(p)))) > 0.1


@pytest.mark.parametrize("params, branch", [
    (ProblemParams(3, 1, 3.0, 1.0), Branch.DECREASING),
    (ProblemParams(3, 3, 1.0, 1.0), Branch.DECREASING),
    (ProblemParams(3, 3, -0.25, -1 / 12), Branch.DECREASING),
    (ProblemParams(3, 3, 0.25, 1 / 12), Branch.INCREASING)])
def test_barenblatt_rejects(params, branch):
    with pytest.raises(DomainError):
        explicit.barenblatt(params, branch)


def test_barenblatt_exponents_n3_k2():
    alpha, beta, gamma = barenblatt_exponents(3, 2)
    assert (alpha, beta) == pytest.approx((3 / 7, 1 / 7), rel=1e-15)
    assert gamma == pytest.approx(0.25 * (1 / 7) ** 0.5, rel=1e-15)


def test_barenblatt_selfsimilar_outside_support():
    assert barenblatt_selfsimilar(3, 3, 1.0, 1.0, 100.0) == 0.0


@settings(max_examples=50)
@given(st.sampled_from([(2, 2), (3, 3), (4, 3), (5, 5)]), st.floats(0.2, 5), st.floats(0.3, 3),
       st.floats(0.2, 4), st.floats(0.05, 3), st.floats(0, 2))
def test_scaling_group_maps_family_to_itself(nk, C, b, c, t, x):
    # c u(a t, b x) solves the equation iff a = c^{k-1} b^{2k}; it maps U_C to
    # U_{C a^{2 beta} / b^2}
    n, k = nk
    a = c ** (k - 1) * b ** (2 * k)
    _, beta, _ = barenblatt_exponents(n, k)
    lhs = c * barenblatt_selfsimilar(n, k, C, a * t, b * x)
    rhs = barenblatt_selfsimilar(n, k, C * a ** (2 * beta) / b ** 2, t, x)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-300)


def test_growing_branch_matches_solver():
    p = ProblemParams(3, 3, -0.25, -1 / 12)
    prof = solve_profile(p, SolverConfig(5.0))
    closed = explicit.barenblatt(p, Branch.INCREASING)
    r = np.linspace(0, 5, 201)
    assert np.max(np.abs(prof.value(r) / closed.value(r) - 1)) <= 1e-6


def test_growing_branch_constants_agree():
    # |beta| inside the blow-up constant equals |alpha|/n along alpha = n beta
    n, k = 4, 3
    alpha, beta = blowup_exponents(n, k)
    assert abs(beta) == pytest.approx(abs(alpha) / n, rel=1e-15)


# -- type II families ------------------------------------------------------------

def test_blowup_divergence_at_origin():
    n, k, a, T = 3, 3, 1.5, 1.0
    alpha, beta = blowup_exponents(n, k)
    p = ProblemParams(n, k, alpha, beta, a)
    times = [T - 10.0 ** -j for j in range(1, 8)]
    values = [blowup_family_k(p, T, t, 0.0) for t in times]
    assert values == pytest.approx([a * (T - t) ** alpha for t in times], rel=1e-13)
    assert all(v1 > v0 for v0, v1 in zip(values, values[1:]))


def test_blowup_even_support_at_t0():
    n, k, T = 3, 2, 2.0
    alpha, beta = blowup_exponents(n, k)
    p = ProblemParams(n, k, alpha, beta, 1.0)
    r_star = explicit.barenblatt(p, Branch.DECREASING).support_radius
    R = T ** abs(beta) * r_star
    assert blowup_family_k(p, T, 0.0, R * (1 - 1e-9)) > 0
    assert blowup_family_k(p, T, 0.0, R * (1 + 1e-9)) == 0.0


def test_blowup_rejects_wrong_exponents():
    with pytest.raises(DomainError):
        blowup_family_k(ProblemParams(3, 3, -0.5, -1 / 6), 1.0, 0.5, 0.1)


def test_heat_m0_closed_form():
    n, a, T, t, x = 3, 1.2, 1.0, 0.3, 0.8
    tau = T - t
    assert heat_blowup(n, 0, a, T, t, x) == pytest.approx(a * tau ** (-n / 2) * math.exp(x * x / (4 * tau)), rel=1e-14)


def test_heat_m1_closed_form():
    n, a, T, t, x = 3, 1.0, 1.0, 0.4, 1.1
    tau = T - t
    expected = a * tau ** (-n / 2 - 1) * (1 + x * x / (2 * n * tau)) * math.exp(x * x / (4 * tau))
    assert heat_blowup(n, 1, a, T, t, x) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_heat_ratio_is_polynomial(m):
    n, T, t = 3, 1.0, 0.2
    tau = T - t
    xs = np.linspace(0.1, 2.0, m + 2)
    y = xs ** 2 / tau
    ratio = np.array([heat_blowup(n, m, 1.0, T, t, x) / heat_blowup(n, 0, 1.0, T, t, x) for x in xs])
    ratio *= tau ** m
    coef = np.polyfit(y, ratio, m)
    assert np.max(np.abs(np.polyval(coef, y) - ratio)) <= 1e-9 * np.max(np.abs(ratio))


def test_closed_form_tags_and_support():
    assert explicit.constant(ProblemParams(3, 2, 0.0, 0.0, 2.0)).value(5.0) == 2.0
    heat = explicit.heat_kummer(3, 2)
    assert heat.tag is ClosedFormTag.HEAT_KUMMER and heat.params.alpha == -3.5
    assert not heat.integrable
    compact = explicit.barenblatt(ProblemParams(3, 3, 0.25, 1 / 12))
    assert compact.integrable and compact.value(compact.support_radius) == 0.0


CLOSED_FORMS = [
    explicit.alpha_zero(ProblemParams(3, 2, 0.0, 0.25)),
    explicit.alpha_zero(ProblemParams(3, 3, 0.0, -1 / 6)),
    explicit.barenblatt(ProblemParams(3, 3, 0.25, 1 / 12)),
    explicit.barenblatt(ProblemParams(4, 3, 4 / 14, 1 / 14)),
    explicit.barenblatt(ProblemParams(3, 3, -0.25, -1 / 12), Branch.INCREASING),
    explicit.barenblatt(ProblemParams(3, 2, -3 / 7, -1 / 7), Branch.DECREASING),
    explicit.barenblatt(ProblemParams(3, 2, -3 / 7, -1 / 7), Branch.INCREASING),
    explicit.heat_kummer(3, 0), explicit.heat_kummer(3, 1), explicit.heat_kummer(2, 2),
]


@pytest.mark.parametrize("prof", CLOSED_FORMS, ids=lambda p: f"{p.tag.value}-{p.params.n}-{p.params.k}")
def test_closed_forms_solve_the_profile_equation(prof):
    rng = np.random.default_rng(1)
    R = min(prof.support_radius, 3.0)
    for r in rng.uniform(0.05, 0.95, 20) * R:
        assert profile_residual(prof.params, prof.value, r) <= 1e-6


@pytest.mark.parametrize("prof", [p for p in CLOSED_FORMS if math.isfinite(p.support_radius)],
                         ids=lambda p: p.tag.value)
def test_compact_forms_vanish_beyond_support(prof):
    R = prof.support_radius
    assert prof.value(R) == 0.0
    assert prof.value(R * (1 - 1e-8)) <= 1e-6
    assert np.all(prof.value(np.linspace(R, 3 * R, 10)) == 0.0)


def test_cnk_consistency_with_core():
    p = ProblemParams(5, 3, 5 / 18, 1 / 18)
    assert p.cnk == c_nk(5, 3) == 2.0
