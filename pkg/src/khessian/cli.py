"""Command-line front end.

    khessian solve       --n 9 --k 3 --alpha 1 --beta 1 --r-max 10
    khessian explicit    --family barenblatt --n 3 --k 3 --r-max 2
    khessian kummer      --a 2 --b 1 --z 1
    khessian selfsimilar --family heat --n 3 --m 1 --T 1 --t 0.5
    khessian verify      --family barenblatt --n 3 --k 3
    khessian mass        --family barenblatt --n 3 --k 3 --t 0.5 1 2

Exit codes: 0 success, 1 verification checks failed, 2 domain error,
3 numerical failure.  Output is deterministic; floats are written with the
shortest representation that round-trips exactly.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import explicit, selfsimilar, verify
from .core_types import (AnsatzKind, DomainError, NumericalError, ProblemParams,
                         VerificationReport)
from .explicit import Branch
from .kummer import KummerSpec, kummer_series
from .profile_ode import REGIME_CONDITIONS, Regime, SolverConfig, lemma_regime, solve_profile

FAMILIES = ("numerical", "constant", "alpha-zero", "barenblatt", "blowup", "heat")


class VerificationFailed(Exception):
    pass


def _num(x):
    x = float(x) + 0.0
    return None if math.isnan(x) else x


def _fmt(x) -> str:
    return repr(float(x) + 0.0)  # + 0.0 maps -0.0 to 0.0


def _params_dict(params: ProblemParams) -> dict:
    return {key: _num(val) if isinstance(val, float) else val for key, val in params.as_dict().items()}


def _document(params, grid=(), values=(), derivs=(), checks=None, **extra) -> dict:
    doc = {
        "params": _params_dict(params) if params is not None else {},
        "grid": [_num(x) for x in grid],
        "values": [_num(x) for x in values],
        "derivs": [_num(x) for x in derivs],
        "checks": [{key: _num(val) if isinstance(val, float) else val for key, val in c.items()}
                   for c in (checks.as_dict() if checks is not None else [])],
    }
    doc.update(extra)
    return doc


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _emit(args, text: str):
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _emit_json(args, doc):
    _emit(args, json.dumps(doc, indent=2, allow_nan=False) + "\n")


def _params_from(args) -> ProblemParams:
    if args.alpha is None or args.beta is None:
        raise DomainError("--alpha and --beta are required")
    return ProblemParams(args.n, args.k, args.alpha, args.beta, args.a)


def _grid(args) -> np.ndarray:
    if args.count < 2:
        raise DomainError("--count must be >= 2")
    if not 0 <= args.r_min < args.r_max:
        raise DomainError("need 0 <= --r-min < --r-max")
    return np.linspace(args.r_min, args.r_max, args.count)


def _solver_config(args) -> SolverConfig:
    return SolverConfig(args.r_max, rel_tol=args.rel_tol, abs_tol=args.abs_tol)


def _numerical_profile(args):
    params = _params_from(args)
    regime = lemma_regime(params)
    if regime is Regime.UNSUPPORTED:
        known = "; ".join(REGIME_CONDITIONS.values())
        raise DomainError(f"parameters {params.as_dict()} lie outside every supported regime: "
                          f"requires one of [{known}]")
    return solve_profile(params, _solver_config(args))


def _branch(args):
    return None if args.branch is None else Branch(args.branch)


def _solution(args) -> selfsimilar.SelfSimilarSolution:
    fam = args.family
    if fam == "numerical":
        if args.ansatz is None:
            raise DomainError("--family numerical needs --ansatz")
        kind = AnsatzKind.from_label(args.ansatz)
        return selfsimilar.SelfSimilarSolution(_numerical_profile(args), kind, args.T)
    if fam == "constant":
        return selfsimilar.constant_solution(args.n, args.k, args.a)
    if fam == "alpha-zero":
        kind = AnsatzKind.from_label(args.ansatz or "I")
        return selfsimilar.alpha_zero_solution(args.n, args.k, kind, args.a, args.T)
    if fam == "barenblatt":
        return selfsimilar.barenblatt_solution(args.n, args.k, args.C)
    if fam == "blowup":
        return selfsimilar.blowup_solution(args.n, args.k, args.a, args.T)
    if fam == "heat":
        return selfsimilar.heat_solution(args.n, args.m, args.a, args.T)
    raise DomainError(f"unknown family {fam!r}")


def _closed_profile(args):
    fam = args.family
    if fam == "numerical":
        raise DomainError("explicit needs a closed-form family, not 'numerical'")
    if fam == "barenblatt" and args.alpha is not None:
        # a general alpha = n beta profile with user-chosen exponents
        return explicit.barenblatt(_params_from(args), _branch(args) or Branch.DECREASING)
    return _solution(args).profile


# -- commands --------------------------------------------------------------------

def cmd_solve(args):
    prof = _numerical_profile(args)
    if args.format == "csv":
        _emit(args, _csv(["r", "v", "dv"], zip(prof.grid, prof.values, prof.derivs)))
    else:
        extra = {"r_stop": _num(prof.r_stop) if prof.r_stop is not None else None,
                 "stop_reason": prof.stop_reason}
        _emit_json(args, _document(prof.params, prof.grid, prof.values, prof.derivs, **extra))


def cmd_explicit(args):
    prof = _closed_profile(args)
    r = _grid(args)
    v = np.asarray(prof.value(r))
    dv = np.asarray(prof.deriv(r))
    if args.format == "csv":
        _emit(args, _csv(["r", "v", "dv"], zip(r, v, dv)))
    else:
        _emit_json(args, _document(prof.params, r, v, dv, tag=prof.tag.value))


def cmd_kummer(args):
    spec = KummerSpec(args.a, args.b, rel_tol=args.rel_tol)
    res = kummer_series(spec, args.z)
    if args.format == "json":
        _emit_json(args, {"a": spec.a, "b": spec.b, "z": args.z, "value": res.value,
                          "terms": res.terms, "ill_conditioned": res.ill_conditioned})
    else:
        if res.ill_conditioned:
            print(f"warning: |z| = {abs(args.z):g} > 50, series may be ill-conditioned", file=sys.stderr)
        _emit(args, _fmt(res.value) + "\n")


def _times(args, sol):
    if args.t:
        return list(args.t)
    if sol.kind is AnsatzKind.TYPE_II:
        return [0.5 * sol.T]
    return [1.0]


def cmd_selfsimilar(args):
    sol = _solution(args)
    x = _grid(args)
    times = _times(args, sol)
    rows = [(t, xi, ui) for t in times for xi, ui in zip(x, np.atleast_1d(sol(t, x)))]
    if args.format == "csv":
        _emit(args, _csv(["t", "x", "u"], rows))
    else:
        _emit_json(args, _document(sol.params, x, [], [], kind=sol.kind.name,
                                   samples=[[_num(v) for v in row] for row in rows]))


def verification_report(sol) -> VerificationReport:
    """The checks run by ``khessian verify`` for a self-similar solution."""
    report = VerificationReport()
    if sol.profile.is_numerical:
        report.extend(verify.theorem1_suite(sol.profile))
    samples = verify.interior_samples(sol, count=20)
    report.extend(verify.residual_report(sol, samples, tol=1e-6))
    if selfsimilar.mass_conserved(sol):
        if sol.kind is AnsatzKind.TYPE_II:
            times = [0.1 * sol.T, 0.5 * sol.T, 0.9 * sol.T]
        else:
            times = [0.5, 1.0, 2.0]
        report.extend(selfsimilar.mass_report(sol, times))
    if sol.kind is AnsatzKind.TYPE_II and not math.isfinite(sol.profile.support_radius):
        times = [sol.T - 2.0 ** -j * sol.T for j in range(1, 6)]
        report.extend(selfsimilar.blowup_diagnostic(sol, 0.0, times, slack=0.01), prefix="blowup_")
    return report


def cmd_verify(args):
    sol = _solution(args)
    report = verification_report(sol)
    prof = sol.profile
    r = _grid(args) if not prof.is_numerical else prof.grid
    _emit_json(args, _document(sol.params, r, prof.value(r), prof.deriv(r), report,
                               kind=sol.kind.name, passed=report.passed))
    if not report.passed:
        raise VerificationFailed(
            "failed checks: " + ", ".join(c.name for c in report.checks if not c.passed))


def cmd_mass(args):
    sol = _solution(args)
    times = _times(args, sol)
    masses = [selfsimilar.mass(sol, t) for t in times]
    if args.format == "csv":
        _emit(args, _csv(["t", "M"], zip(times, masses)))
    else:
        report = selfsimilar.mass_report(sol, times) if len(times) > 1 else None
        _emit_json(args, _document(sol.params, [], [], [], report, times=times, masses=masses,
                                   conserved=selfsimilar.mass_conserved(sol)))


COMMANDS = {"solve": cmd_solve, "explicit": cmd_explicit, "kummer": cmd_kummer,
            "selfsimilar": cmd_selfsimilar, "verify": cmd_verify, "mass": cmd_mass}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="khessian", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt_default="csv"):
        p.add_argument("--output", "-o", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=fmt_default)
        p.add_argument("--rel-tol", type=float, default=1e-10)
        p.add_argument("--abs-tol", type=float, default=1e-12)

    def problem(p):
        p.add_argument("--n", type=int, default=3)
        p.add_argument("--k", type=int, default=1)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--beta", type=float, default=None)
        p.add_argument("--a", type=float, default=1.0, help="v(0)")
        p.add_argument("--r-max", type=float, default=5.0)
        p.add_argument("--r-min", type=float, default=0.0)
        p.add_argument("--count", type=int, default=201, help="grid points for sampled output")

    def family(p):
        p.add_argument("--family", choices=FAMILIES, default="numerical")
        p.add_argument("--ansatz", choices=("I", "II", "III"), default=None)
        p.add_argument("--branch", choices=[b.value for b in Branch], default=None)
        p.add_argument("--T", type=float, default=1.0, help="blow-up time (type II)")
        p.add_argument("--m", type=int, default=0, help="heat family index")
        p.add_argument("--C", type=float, default=1.0, help="Barenblatt constant")
        p.add_argument("--t", type=float, nargs="+", default=None, help="sample times")

    p = sub.add_parser("solve", help="integrate the profile ODE")
    problem(p)
    common(p)

    p = sub.add_parser("explicit", help="sample a closed-form profile")
    problem(p)
    family(p)
    common(p)

    p = sub.add_parser("kummer", help="evaluate M(a, b; z)")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--rel-tol", type=float, default=1e-14)

    p = sub.add_parser("selfsimilar", help="sample u(t, x)")
    problem(p)
    family(p)
    common(p)

    p = sub.add_parser("verify", help="run the residual and invariant checks (JSON)")
    problem(p)
    family(p)
    common(p, fmt_default="json")

    p = sub.add_parser("mass", help="total mass M(t)")
    problem(p)
    family(p)
    common(p)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
