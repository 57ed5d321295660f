"""Independent verification of computed solutions.

The interior residual applies the two-parameter fractional derivative to the
solution and compares with f.  The solution is split as

    y(t) = w(0) t^(gamma-1) + v(t),     v(t) = t^(gamma-1) (w(t) - w(0)),

and the first term is annihilated analytically (the derivative of t^(gamma-1)
at composite order gamma vanishes identically), so only the bounded part v
is differentiated numerically.  Residuals are certified away from the origin
(t >= t_cut); the boundary condition is checked separately at t = 0 with the
integral of y taken by singularity-aware quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DerivedConstants, GradedMesh, HilferProblem, WeightedGridFunction
from .errors import NotConstantRhs, OutOfDomain, RequiresLambdaZero, SingularProblem
from .fracops import QuadratureRule, hilfer_derivative, physical_integral

# Relative tolerance used to decide that sampled rhs values are "the same
# constant"; pure roundoff in user callbacks stays far below this.
_CONST_RTOL = 1e-12

# Sample points used to probe whether f is constant.
_PROBE_T = (0.21, 0.5, 0.83, 1.0)
_PROBE_Y = (0.0, 0.7, 1.9, 5.0)


@dataclass(frozen=True)
class ResidualReport:
    interior_residual: float
    boundary_residual: float
    t_cut: float
    node_count: int


def residual_check(problem: HilferProblem, consts: DerivedConstants,
                   solution: WeightedGridFunction, rule: QuadratureRule,
                   t_cut: float = 0.05) -> ResidualReport:
    """max_{t_i >= t_cut} |D^(alpha,beta) y(t_i) - f(t_i, y(t_i))| plus the
    boundary defect |Gamma(gamma) w(0) - lam int_0^1 y - d|."""
    if not (0.0 < t_cut < 0.5):
        raise OutOfDomain(f"t_cut must lie in (0, 0.5), got {t_cut}")
    mesh = rule.mesh
    t = mesh.nodes
    w = solution.values
    gamma = consts.gamma
    # Bounded part v = t^(gamma-1) (w - w(0)); v(0) = 0 since w is continuous.
    v = np.zeros_like(w)
    v[1:] = t[1:] ** (gamma - 1.0) * (w[1:] - w[0])
    derivative = hilfer_derivative(problem.alpha, problem.beta, v, rule)

    mask = t >= t_cut
    idx = np.nonzero(mask)[0]
    residuals = np.empty(idx.size)
    for k, i in enumerate(idx):
        y_i = t[i] ** (gamma - 1.0) * w[i]
        residuals[k] = abs(derivative[i] - problem.rhs(float(t[i]), float(y_i)))
    interior = float(np.max(residuals))

    integral_y = physical_integral(solution)
    boundary = abs(math.gamma(gamma) * float(w[0])
                   - problem.lam * integral_y - problem.d)
    return ResidualReport(interior_residual=interior, boundary_residual=boundary,
                          t_cut=t_cut, node_count=int(idx.size))


def _detect_constant(problem: HilferProblem) -> float:
    f = problem.rhs
    c = f(1.0, 1.0)
    scale = max(1.0, abs(c))
    for t in _PROBE_T:
        for y in _PROBE_Y:
            if abs(f(t, y) - c) > _CONST_RTOL * scale:
                raise NotConstantRhs(
                    f"f({t}, {y}) = {f(t, y)} differs from f(1, 1) = {c}; "
                    "the constant-rhs oracle needs f identically constant"
                )
    return float(c)


def constant_rhs_oracle(problem: HilferProblem, consts: DerivedConstants,
                        mesh: GradedMesh) -> WeightedGridFunction:
    """Closed-form solution for f identically c, in weighted form:

        w(t) = Lambda + lam c/(Gamma(gamma) mu Gamma(alpha+2))
                      + c t^(1-gamma+alpha)/Gamma(alpha+1),

    using integral_0^1 Q(tau) dtau = 1/(alpha(alpha+1))."""
    if not consts.mu > 0.0:
        raise SingularProblem(
            f"mu = {consts.mu:.3e} <= 0: the positive closed form needs mu > 0"
        )
    c = _detect_constant(problem)
    t = mesh.nodes
    gamma = consts.gamma
    alpha = problem.alpha
    head = consts.capital_lambda + problem.lam * c / (
        math.gamma(gamma) * consts.mu * math.gamma(alpha + 2.0))
    values = head + c * t ** (1.0 - gamma + alpha) / math.gamma(alpha + 1.0)
    return WeightedGridFunction(mesh, gamma, values)


def power_rhs_oracle(problem: HilferProblem, consts: DerivedConstants,
                     mesh: GradedMesh, sigma: float) -> WeightedGridFunction:
    """Closed-form solution for f(t, y) = t^(sigma-1) when lam = 0:

        y(t) = (d/Gamma(gamma)) t^(gamma-1)
               + (Gamma(sigma)/Gamma(alpha+sigma)) t^(alpha+sigma-1),

    returned as weighted samples."""
    if problem.lam != 0.0:
        raise RequiresLambdaZero(
            f"the power-rhs closed form needs lam = 0, got {problem.lam}"
        )
    if not sigma >= 1.0:
        raise OutOfDomain(f"sigma must be >= 1, got {sigma}")
    t = mesh.nodes
    gamma = consts.gamma
    alpha = problem.alpha
    coef = math.gamma(sigma) / math.gamma(alpha + sigma)
    values = problem.d / math.gamma(gamma) + coef * t ** (alpha + sigma - gamma)
    return WeightedGridFunction(mesh, gamma, values)
