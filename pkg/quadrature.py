"""
Composite Gauss-Legendre rules with geometric grading
Shared by the lifting integrals, the error norms and the quadrature oracle
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Tuple

import numpy as np

from config import Config
from errors import ConvergenceFailure


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1] (cached, read-only)"""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


class QuadratureRule(NamedTuple):
    points: np.ndarray
    weights: np.ndarray

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.points)))

    def __len__(self):
        return self.points.size


def graded_breakpoints(a, c, grade_left=False, grade_right=False,
                       levels=None, ratio=None) -> np.ndarray:
    """
    Panel breakpoints on [a, c], geometrically refined toward the flagged ends

    Each level shrinks the panel next to a graded end by `ratio`; the innermost
    panel of width (c - a) * ratio**levels is kept as a single Gauss panel.
    """
    levels = Config.LIFTING_GRADING_LEVELS if levels is None else levels
    ratio = Config.GRADING_RATIO if ratio is None else ratio
    if c <= a:
        raise ValueError(f"empty interval [{a}, {c}]")

    if grade_left and grade_right:
        mid = 0.5 * (a + c)
        left = graded_breakpoints(a, mid, True, False, levels, ratio)
        right = graded_breakpoints(mid, c, False, True, levels, ratio)
        return np.concatenate([left, right[1:]])

    if not (grade_left or grade_right):
        return np.array([a, c], dtype=float)

    scales = ratio ** np.arange(levels, -1, -1, dtype=float)  # r^L, ..., r, 1
    if grade_left:
        return np.concatenate([[a], a + (c - a) * scales])
    return np.concatenate([c - (c - a) * scales[::-1], [c]])


def composite_gauss(breakpoints, order=None) -> QuadratureRule:
    """Gauss rule of the given order on every panel between consecutive breakpoints"""
    order = Config.LIFTING_GAUSS_POINTS if order is None else order
    x, w = gauss_legendre(order)
    bp = np.asarray(breakpoints, dtype=float)
    lo, hi = bp[:-1], bp[1:]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    points = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return QuadratureRule(points, weights)


def graded_rule(a, c, grade_left=False, grade_right=False,
                levels=None, order=None, ratio=None) -> QuadratureRule:
    return composite_gauss(graded_breakpoints(a, c, grade_left, grade_right, levels, ratio), order)


def join_rules(*rules: QuadratureRule) -> QuadratureRule:
    """Concatenate rules on adjacent intervals"""
    return QuadratureRule(np.concatenate([r.points for r in rules]),
                          np.concatenate([r.weights for r in rules]))


def integrate(f, rule: QuadratureRule) -> float:
    return rule.integrate(f)


@dataclass
class AdaptiveResult:
    """Outcome of an adaptive refinement"""
    value: float
    error: float
    evaluations: int
    refinements: int


def adaptive_integrate(estimate: Callable[[int], Tuple[float, int]], tol=None,
                       budget=None, label="integral", atol=0.0) -> AdaptiveResult:
    """
    Drive refinement until two successive estimates agree

    Args:
        estimate: callable mapping a refinement index (0, 1, 2, ...) to
            (value, number of integrand evaluations)
        tol: relative tolerance
        budget: total evaluation budget
        atol: absolute gap accepted regardless of the estimate, for integrals that vanish

    Raises:
        ConvergenceFailure: budget exhausted; carries the last estimate and gap
    """
    tol = Config.ORACLE_TOLERANCE if tol is None else tol
    budget = Config.ORACLE_BUDGET if budget is None else budget

    previous, used = estimate(0)
    refinement = 0
    while True:
        refinement += 1
        current, evals = estimate(refinement)
        used += evals
        gap = abs(current - previous)
        if gap <= max(tol * abs(current), atol) or gap == 0.0:
            return AdaptiveResult(current, gap, used, refinement)
        if used >= budget:
            raise ConvergenceFailure(
                f"{label}: tolerance {tol:g} not reached within {budget} evaluations "
                f"(estimate {current:.12g}, gap {gap:.3g})",
                estimate=current, error_bound=gap,
            )
        previous = current
