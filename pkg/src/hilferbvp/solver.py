"""Fixed-point operator of the equivalent integral equation and its Picard
iteration, plus control functions and upper/lower solution brackets.

The operator maps y to

    Lambda t^(gamma-1)
      + (lam t^(gamma-1) / (Gamma(gamma) mu)) * integral_0^1 (Q(tau)/Gamma(alpha)) f(tau, y(tau)) dtau
      + I^alpha f(., y(.)) (t)

and is applied entirely in the weighted representation w = t^(1-gamma) y.
For f >= 0, mu > 0 and d >= 0 it maps the nonnegative cone into itself,
which the discretization preserves exactly because every quadrature weight
is nonnegative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Union

import numpy as np

from .core import (
    MU_TOLERANCE,
    DerivedConstants,
    GradedMesh,
    HilferProblem,
    WeightedGridFunction,
)
from .errors import (
    InvalidInterval,
    MissingBounds,
    RhsEvaluationFailure,
    RhsNegative,
    SingularProblem,
)
from .fracops import QuadratureRule, boundary_kernel_weights, rl_integral

INITIAL_GUESS_CONSTANT_LAMBDA = "constant-lambda"
INITIAL_GUESS_BRACKET_MIDPOINT = "bracket-midpoint"


@dataclass(frozen=True)
class PicardSettings:
    """Stopping rule and starting point for the fixed-point iteration.

    ``initial_guess`` is one of the named strategies or an explicit grid of
    weighted samples.
    """

    tol: float = 1e-10
    max_iter: int = 200
    initial_guess: Union[str, np.ndarray] = INITIAL_GUESS_CONSTANT_LAMBDA

    def __post_init__(self):
        if not (math.isfinite(self.tol) and self.tol > 0.0):
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if not (isinstance(self.max_iter, (int, np.integer)) and self.max_iter >= 1):
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if isinstance(self.initial_guess, str) and self.initial_guess not in (
            INITIAL_GUESS_CONSTANT_LAMBDA,
            INITIAL_GUESS_BRACKET_MIDPOINT,
        ):
            raise ValueError(f"unknown initial guess {self.initial_guess!r}")


@dataclass(frozen=True, eq=False)
class SolveResult:
    solution: WeightedGridFunction
    iterations: int
    history: List[float]
    converged: bool


@dataclass(frozen=True, eq=False)
class ControlFunctions:
    """Running sup/inf envelopes of f over a sampled y-grid on [y_lo, y_hi];
    both are nondecreasing in their second argument by construction and
    satisfy lower(t, x) <= f(t, x) <= upper(t, x) at the grid points."""

    y_lo: float
    y_hi: float
    upper: Callable[[float, float], float]
    lower: Callable[[float, float], float]


@dataclass(frozen=True, eq=False)
class SolutionBracket:
    lower: WeightedGridFunction
    upper: WeightedGridFunction


def _rhs_samples(problem: HilferProblem, consts: DerivedConstants,
                 w: np.ndarray, mesh: GradedMesh) -> np.ndarray:
    """Evaluate f(t_j, y_j) with y_j = t_j^(gamma-1) w_j.

    f is only defined for t > 0 and y may be unbounded at the origin, so the
    first node reuses the first interior sample; the kernel mass it carries
    is O(t_1^gamma) on the graded mesh.
    """
    t = mesh.nodes
    gm1 = consts.gamma - 1.0
    out = np.empty_like(w)
    f = problem.rhs
    for j in range(1, t.size):
        value = f(float(t[j]), float(t[j] ** gm1 * w[j]))
        if not math.isfinite(value):
            raise RhsEvaluationFailure(
                f"f({t[j]}, .) evaluated to a non-finite value {value}"
            )
        out[j] = value
    out[0] = out[1]
    if np.any(out < 0.0):
        j = int(np.argmin(out))
        raise RhsNegative(
            f"f evaluated to {out[j]} < 0 at t={t[j]}; "
            "the positive-solution iteration requires f >= 0"
        )
    return out


def _require_nonsingular(consts: DerivedConstants) -> None:
    if abs(consts.mu) < MU_TOLERANCE:
        raise SingularProblem(
            f"mu = {consts.mu:.3e} is numerically zero: the integral equation "
            "is unavailable (it requires mu != 0)"
        )


def boundary_functional(problem: HilferProblem, consts: DerivedConstants,
                        w: WeightedGridFunction, rule: QuadratureRule) -> float:
    """integral_0^1 (Q(tau)/Gamma(alpha)) f(tau, y(tau)) dtau for the
    current iterate, with the kernel integrated exactly."""
    weights = boundary_kernel_weights(problem.alpha, rule.mesh)
    samples = _rhs_samples(problem, consts, w.values, rule.mesh)
    return float(weights @ samples)


def apply_delta(problem: HilferProblem, consts: DerivedConstants,
                w: WeightedGridFunction, rule: QuadratureRule) -> WeightedGridFunction:
    """One application of the integral-equation operator, in weighted form.

    Output nodes carry t^(1-gamma) times the operator value; at t = 0 that
    is the weighted limit Lambda + lam B / (Gamma(gamma) mu), the convolution
    term contributing zero there.
    """
    _require_nonsingular(consts)
    mesh = rule.mesh
    t = mesh.nodes
    gamma = consts.gamma
    samples = _rhs_samples(problem, consts, w.values, mesh)
    conv = rl_integral(problem.alpha, samples, rule)
    head = consts.capital_lambda
    if problem.lam != 0.0:
        weights = boundary_kernel_weights(problem.alpha, mesh)
        b = float(weights @ samples)
        head += problem.lam * b / (math.gamma(gamma) * consts.mu)
    out = np.empty_like(w.values)
    out[0] = head
    out[1:] = head + t[1:] ** (1.0 - gamma) * conv[1:]
    return WeightedGridFunction(mesh, gamma, out)


def initial_iterate(problem: HilferProblem, consts: DerivedConstants,
                    settings: PicardSettings, mesh: GradedMesh) -> WeightedGridFunction:
    guess = settings.initial_guess
    if isinstance(guess, str):
        if guess == INITIAL_GUESS_CONSTANT_LAMBDA:
            values = np.full(mesh.n + 1, consts.capital_lambda)
        else:
            bracket = bracket_from_bounds(problem, consts, mesh)
            values = 0.5 * (bracket.lower.values + bracket.upper.values)
        return WeightedGridFunction(mesh, consts.gamma, values)
    return WeightedGridFunction(mesh, consts.gamma, np.asarray(guess, dtype=float))


def solve_picard(problem: HilferProblem, consts: DerivedConstants,
                 settings: PicardSettings, rule: QuadratureRule) -> SolveResult:
    """Iterate the operator until successive iterates differ by at most
    ``settings.tol`` in the weighted sup norm.

    Non-convergence is reported through the ``converged`` flag; the final
    iterate and the history of successive differences are always returned
    for diagnosis.
    """
    w = initial_iterate(problem, consts, settings, rule.mesh)
    history: List[float] = []
    converged = False
    for _ in range(settings.max_iter):
        w_next = apply_delta(problem, consts, w, rule)
        diff = float(np.max(np.abs(w_next.values - w.values)))
        history.append(diff)
        w = w_next
        if diff <= settings.tol:
            converged = True
            break
    return SolveResult(solution=w, iterations=len(history),
                       history=history, converged=converged)


def solution_integral(problem: HilferProblem, consts: DerivedConstants,
                      w: WeightedGridFunction, rule: QuadratureRule) -> float:
    """integral_0^1 y(s) ds evaluated through the discrete boundary
    functional: A = d/(mu Gamma(gamma+1)) + B/mu, the same closed form the
    operator itself uses, so the boundary identity closes to stopping
    tolerance rather than quadrature tolerance."""
    _require_nonsingular(consts)
    b = boundary_functional(problem, consts, w, rule)
    return problem.d / (consts.mu * math.gamma(consts.gamma + 1.0)) + b / consts.mu


def boundary_identity_gap(problem: HilferProblem, consts: DerivedConstants,
                          w: WeightedGridFunction, rule: QuadratureRule) -> float:
    """|Gamma(gamma) w(0) - lam * integral_0^1 y - d| for a computed solution;
    the integral is the solver-consistent closed form of solution_integral."""
    a = solution_integral(problem, consts, w, rule)
    lhs = math.gamma(consts.gamma) * float(w.values[0])
    return abs(lhs - problem.lam * a - problem.d)


def build_control_functions(problem: HilferProblem, y_lo: float, y_hi: float,
                            samples: int = 256) -> ControlFunctions:
    """Realize the sup/inf envelopes of f on a uniform y-grid.

    upper(t, x) = max f(t, y_k) over grid points y_k <= x and
    lower(t, x) = min f(t, y_k) over grid points y_k >= x; x is clamped to
    [y_lo, y_hi].  f is opaque, so the envelopes are sampled rather than
    symbolic; ties keep the first-encountered grid point.
    """
    if not (0.0 < y_lo <= y_hi):
        raise InvalidInterval(f"need 0 < y_lo <= y_hi, got [{y_lo}, {y_hi}]")
    if not (isinstance(samples, (int, np.integer)) and samples >= 2):
        raise InvalidInterval(f"need at least 2 sample points, got {samples}")
    grid = np.linspace(y_lo, y_hi, samples)
    f = problem.rhs

    def upper(t: float, x: float) -> float:
        x = min(max(x, y_lo), y_hi)
        return max(f(t, float(yk)) for yk in grid[grid <= x])

    def lower(t: float, x: float) -> float:
        x = min(max(x, y_lo), y_hi)
        return min(f(t, float(yk)) for yk in grid[grid >= x])

    return ControlFunctions(y_lo=y_lo, y_hi=y_hi, upper=upper, lower=lower)


def bracket_from_bounds(problem: HilferProblem, consts: DerivedConstants,
                        mesh: GradedMesh) -> SolutionBracket:
    """Closed-form bracket for problems with constant bounds A1 <= f <= A2:
    both envelope solutions are d/Gamma(gamma) t^(gamma-1) + A t^alpha / Gamma(alpha+1)
    in physical form, sampled here in weighted form.

    The caller asserts that the bounds actually dominate f.
    """
    if problem.lower_bound is None or problem.upper_bound is None:
        raise MissingBounds("bracket_from_bounds needs both lower_bound and upper_bound")
    t = mesh.nodes
    gamma = consts.gamma
    base = problem.d / math.gamma(gamma)
    # alpha + 1 - gamma = (1-beta)(1-alpha) >= 0; t^0 = 1 at the origin.
    expo = problem.alpha + 1.0 - gamma
    shape = t ** expo / math.gamma(problem.alpha + 1.0)
    lower = WeightedGridFunction(mesh, gamma, base + problem.lower_bound * shape)
    upper = WeightedGridFunction(mesh, gamma, base + problem.upper_bound * shape)
    return SolutionBracket(lower=lower, upper=upper)
