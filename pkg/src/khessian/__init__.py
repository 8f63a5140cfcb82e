"""Radially symmetric self-similar solutions of the k-Hessian evolution equation
``u_t = S_k(D^2 u)``: profile solvers, closed-form families, the Kummer function
and residual oracles."""

from .core_types import (AnsatzKind, Check, ContractionError, DegenerateSystemError, DomainError,
                         KHessianError, NonConvergenceError, NonIntegrableError, NumericalError,
                         ProblemParams, ProfileRangeError, SingularityError, VerificationReport,
                         c_nk, exponent_relation_residual, solve_free_exponent)
from .explicit import Branch, ClosedFormProfile, ClosedFormTag
from .kummer import KummerSpec, kummer_M, kummer_profile, pochhammer
from .profile_ode import (Profile, Regime, SolverConfig, initial_slope_limit, lemma_regime,
                          picard_radius, picard_solve, solve_profile)
from .selfsimilar import SelfSimilarSolution, evaluate, mass
from .verify import evolution_residual, radial_k_hessian, theorem1_suite

__version__ = "0.1.0"

__all__ = [
    "AnsatzKind", "Branch", "Check", "ClosedFormProfile", "ClosedFormTag", "ContractionError",
    "DegenerateSystemError", "DomainError", "KHessianError", "KummerSpec", "NonConvergenceError",
    "NonIntegrableError", "NumericalError", "ProblemParams", "Profile", "ProfileRangeError",
    "Regime", "SelfSimilarSolution", "SingularityError", "SolverConfig", "VerificationReport",
    "c_nk", "evaluate", "evolution_residual", "exponent_relation_residual", "initial_slope_limit",
    "kummer_M", "kummer_profile", "lemma_regime", "mass", "picard_radius", "picard_solve",
    "pochhammer", "radial_k_hessian", "solve_free_exponent", "solve_profile", "theorem1_suite",
]
