"""Machine-checkable certificates for the hypotheses behind existence and
uniqueness: nonnegativity of f, mu != 0 (and its sign), the kernel bound
Q(tau)/Gamma(alpha) < e, and the contraction condition

    (lam e / (Gamma(gamma) mu) + 1/Gamma(alpha+1)) L_f < 1.

Certificates record the computed quantity and the threshold it was compared
against; a failing certificate is data, not an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .core import MU_TOLERANCE, DerivedConstants, HilferProblem, composite_order
from .errors import RhsEvaluationFailure, SingularProblem

CERT_RHS_NONNEGATIVE = "rhs-nonnegative"
CERT_MU_NONZERO = "mu-nonzero"
CERT_KERNEL_BOUND = "kernel-bound"
CERT_CONTRACTION = "contraction"


@dataclass(frozen=True)
class Certificate:
    name: str
    holds: bool
    value: float
    threshold: float
    detail: str


@dataclass(frozen=True)
class LipschitzEstimate:
    """A Lipschitz constant for f in its second argument.

    Sampled estimates are lower bounds of the true constant: a certificate
    built from one is only sound if the user confirms the constant
    analytically.
    """

    value: float
    method: str                      # "user-supplied" | "sampled"
    t_samples: int = 0
    y_samples: int = 0


def check_mu(consts: DerivedConstants) -> Certificate:
    """Holds when mu exceeds the singularity tolerance; the detail records
    the sign, which positivity arguments additionally need."""
    mu = consts.mu
    return Certificate(
        name=CERT_MU_NONZERO,
        holds=mu > MU_TOLERANCE,
        value=mu,
        threshold=MU_TOLERANCE,
        detail=f"mu = 1 - lam/Gamma(gamma+1) = {mu:.17g}; positive: {mu > 0.0}",
    )


def check_kernel_bound(alpha: float, grid_size: int = 1000) -> Certificate:
    """max over a tau-grid of Q(tau)/Gamma(alpha), compared against e.

    The supremum is attained at tau = 0 where it equals 1/Gamma(alpha+1).
    """
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if grid_size < 2:
        raise ValueError(f"grid_size must be >= 2, got {grid_size}")
    tau = np.linspace(0.0, 1.0, grid_size)
    values = (1.0 - tau) ** alpha / (alpha * math.gamma(alpha))
    worst = float(np.max(values))
    return Certificate(
        name=CERT_KERNEL_BOUND,
        holds=worst < math.e,
        value=worst,
        threshold=math.e,
        detail=(f"max over {grid_size} tau points of Q(tau)/Gamma(alpha) at "
                f"alpha={alpha:.17g}; closed-form sup is 1/Gamma(alpha+1) = "
                f"{1.0 / math.gamma(alpha + 1.0):.17g}"),
    )


def estimate_lipschitz(problem: HilferProblem, t_grid: int, y_grid: int,
                       y_range: Tuple[float, float]) -> LipschitzEstimate:
    """Largest slope |f(t, y+) - f(t, y)| / dy over adjacent points of a
    uniform y-grid, maximized over a t-grid in (0, 1].

    The estimate never decreases under nested refinement (doubling t_grid,
    or growing the y-grid through 2^k + 1 point counts).
    """
    if t_grid < 2 or y_grid < 2:
        raise ValueError(f"grids must have >= 2 points, got {t_grid}x{y_grid}")
    y_lo, y_hi = y_range
    if not (math.isfinite(y_lo) and math.isfinite(y_hi) and y_lo < y_hi):
        raise ValueError(f"invalid y_range [{y_lo}, {y_hi}]")
    ts = np.arange(1, t_grid + 1) / t_grid
    ys = np.linspace(y_lo, y_hi, y_grid)
    f = problem.rhs
    worst = 0.0
    for t in ts:
        try:
            vals = np.array([f(float(t), float(y)) for y in ys])
        except Exception as exc:
            raise RhsEvaluationFailure(f"f failed at t={t}: {exc}") from exc
        if not np.all(np.isfinite(vals)):
            raise RhsEvaluationFailure(f"f returned a non-finite value at t={t}")
        slopes = np.abs(np.diff(vals)) / np.diff(ys)
        worst = max(worst, float(np.max(slopes)))
    return LipschitzEstimate(value=worst, method="sampled",
                             t_samples=t_grid, y_samples=y_grid)


def contraction_certificate(consts: DerivedConstants, alpha: float,
                            lam: float, lipschitz: float) -> Certificate:
    """Contraction constant q = (lam e/(Gamma(gamma) mu) + 1/Gamma(alpha+1)) L_f;
    the iteration is certified when q < 1 strictly.

    The constant e enters verbatim even though sup Q/Gamma(alpha) is the
    sharper 1/Gamma(alpha+1); the sharpened value is reported in the detail.
    """
    if consts.mu <= 0.0:
        raise SingularProblem(
            f"mu = {consts.mu:.3e} <= 0: the positive-cone contraction "
            "argument requires mu > 0"
        )
    if lipschitz < 0.0:
        raise ValueError(f"lipschitz constant must be >= 0, got {lipschitz}")
    g_gamma = math.gamma(consts.gamma)
    g_alpha1 = math.gamma(alpha + 1.0)
    # Summed as lam-term + L_f/Gamma(alpha+1) so that the boundary case
    # lam = 0, L_f = Gamma(alpha+1) lands on exactly 1.0.
    q = lam * math.e * lipschitz / (g_gamma * consts.mu) + lipschitz / g_alpha1
    sharpened = (lam * lipschitz / (g_gamma * consts.mu) + lipschitz) / g_alpha1
    return Certificate(
        name=CERT_CONTRACTION,
        holds=q < 1.0,
        value=q,
        threshold=1.0,
        detail=(f"L_f = {lipschitz:.17g}; sharpened constant with "
                f"sup Q/Gamma(alpha) in place of e: {sharpened:.17g}"),
    )


def _nonnegativity_certificate(problem: HilferProblem, t_grid: int,
                               y_grid: int, y_max: float) -> Certificate:
    ts = np.arange(1, t_grid + 1) / t_grid
    ys = np.linspace(0.0, y_max, y_grid)
    f = problem.rhs
    worst = math.inf
    where = (ts[0], ys[0])
    finite = True
    for t in ts:
        for y in ys:
            try:
                v = f(float(t), float(y))
            except Exception:
                finite = False
                v = math.nan
            if not math.isfinite(v):
                finite = False
                worst = math.nan
                where = (t, y)
                break
            if v < worst:
                worst = v
                where = (t, y)
        if not finite:
            break
    holds = finite and worst >= 0.0
    return Certificate(
        name=CERT_RHS_NONNEGATIVE,
        holds=holds,
        value=worst,
        threshold=0.0,
        detail=(f"min of f over a {t_grid}x{y_grid} grid on (0,1]x[0,{y_max:g}], "
                f"attained near (t,y)=({where[0]:.4g},{where[1]:.4g}); "
                "sampled falsification only"),
    )


def hypothesis_report(problem: HilferProblem, t_grid: int = 32,
                      y_grid: int = 32) -> List[Certificate]:
    """All evaluable certificates in fixed order: nonnegativity of f, mu,
    kernel bound, and (when a Lipschitz constant is known and mu > 0) the
    contraction condition.  Failing certificates are returned, not raised.
    """
    y_max = problem.upper_bound if problem.upper_bound is not None else 10.0
    certs = [_nonnegativity_certificate(problem, t_grid, y_grid, y_max)]
    gamma = composite_order(problem.alpha, problem.beta)
    mu = 1.0 - problem.lam / math.gamma(gamma + 1.0)
    consts = _raw_constants(problem, gamma, mu)
    certs.append(check_mu(consts))
    certs.append(check_kernel_bound(problem.alpha))
    if problem.lipschitz is not None and mu > MU_TOLERANCE:
        certs.append(contraction_certificate(consts, problem.alpha,
                                             problem.lam, problem.lipschitz))
    return certs


def _raw_constants(problem: HilferProblem, gamma: float, mu: float) -> DerivedConstants:
    """Constants without the singularity guard, so a failing mu can still be
    reported as a certificate instead of an exception."""
    if mu != 0.0:
        g_gamma = math.gamma(gamma)
        g_gamma1 = math.gamma(gamma + 1.0)
        lam_term = problem.lam / (mu * g_gamma * g_gamma1) + 1.0 / g_gamma
        capital_lambda = lam_term * problem.d
    else:
        capital_lambda = math.inf
    return DerivedConstants(gamma=gamma, mu=mu, capital_lambda=capital_lambda)
