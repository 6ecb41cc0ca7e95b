"""
Error norms between a model solution and the exact local solution
L2 and full H1 norms by composite Gauss per element (graded next to 0, b and 1
when the solution carries a phi^s term), a discrete energy norm, the interface
error, and log-log slope fitting.
"""

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Tuple

import numpy as np

from assembly import CoefficientField, assemble_local, constant_coefficient_matrix
from config import Config
from errors import DomainError
from exact_local import LocalExactSolution
from mesh_interface import InterfaceMesh
from quadrature import composite_gauss, graded_breakpoints
from solvers import ModelSolution


@dataclass
class ErrorReport:
    l2: float
    h1: float
    energy: float
    interface_abs: float

    def as_dict(self):
        return asdict(self)


def _breakpoints(mesh: InterfaceMesh, singular) -> np.ndarray:
    """Mesh nodes, with geometric sub-panels inside the cells touching a singular point"""
    nodes = mesh.nodes
    singular = set(singular)
    levels = Config.ERROR_GRADING_LEVELS
    pieces = [nodes[:1]]
    for c in range(mesh.n_cells):
        left, right = c in singular, c + 1 in singular
        if left or right:
            pieces.append(graded_breakpoints(nodes[c], nodes[c + 1], left, right, levels)[1:])
        else:
            pieces.append(nodes[c + 1:c + 2])
    return np.concatenate(pieces)


def error_rule(mesh: InterfaceMesh, graded_interface: bool):
    """Quadrature over [0, 1]; node indices 0 always, M and n_cells too when graded_interface"""
    singular = [0]
    if graded_interface:
        singular += [mesh.m_interface, mesh.n_cells]
    return composite_gauss(_breakpoints(mesh, singular), Config.ERROR_GAUSS_POINTS)


def energy_matrix(mesh: InterfaceMesh, s: Optional[float]) -> np.ndarray:
    """(C(s)/2) times the sigma = 1 constant-coefficient matrix; the local P1 stiffness when s is None"""
    if s is None:
        return assemble_local(mesh, CoefficientField.constant(1.0)).entries
    return constant_coefficient_matrix(mesh.n_interior, mesh.h, s)


def compute_errors(sol: ModelSolution, exact: LocalExactSolution, mesh: Optional[InterfaceMesh] = None,
                   s: Optional[float] = None) -> ErrorReport:
    mesh = sol.mesh if mesh is None else mesh
    if abs(mesh.b - exact.b) > 1e-14:
        raise DomainError(f"solution on b={mesh.b} compared against an exact solution for b={exact.b}")
    graded = sol.lifting is not None
    if graded and (s if s is not None else sol.lifting.s) <= 0.5:
        raise DomainError("H1 error of a phi^s-bearing solution needs s > 1/2")

    rule = error_rule(mesh, graded)
    x = rule.points
    e = np.asarray(exact.value(x)) - np.asarray(sol.evaluate(x))
    de = np.asarray(exact.derivative(x)) - np.asarray(sol.derivative(x))
    l2_sq = float(rule.weights @ (e * e))
    semi_sq = float(rule.weights @ (de * de))

    nodal = np.asarray(exact.value(mesh.interior_nodes)) - sol.nodal_values
    quad = float(nodal @ energy_matrix(mesh, s) @ nodal)

    return ErrorReport(
        l2=math.sqrt(l2_sq),
        h1=math.sqrt(l2_sq + semi_sq),
        energy=math.sqrt(max(quad, 0.0)),
        interface_abs=abs(sol.interface_value - exact.interface_value),
    )


def fit_slope(points: Iterable[Tuple[float, float]]) -> float:
    """Least-squares slope of log(error) against log(scale)"""
    data = np.asarray(list(points), dtype=float)
    if data.ndim != 2 or data.shape[0] < 3 or data.shape[1] != 2:
        raise DomainError("slope fitting needs at least three (scale, error) pairs")
    if np.any(data <= 0.0) or not np.all(np.isfinite(data)):
        raise DomainError("slope fitting needs positive, finite scales and errors")
    slope, _ = np.polyfit(np.log(data[:, 0]), np.log(data[:, 1]), 1)
    return float(slope)
