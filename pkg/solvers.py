"""
Dense solves and the five model runners
Reconstructed models return u0 on the hats plus u(b) phi^s; the evaluator
combines both, so evaluator(b) is the interface value.
"""

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve as scipy_lu_solve

from assembly import (
    CoefficientField, CouplingData, LoadVector, SourceTerm, StiffnessMatrix, assemble_bordered,
    assemble_local, assemble_old, assemble_subdomain, coupling_vector_and_scalars, interface_scalars,
    load_hats, load_phi_s, load_vector,
)
from config import Config
from errors import ConfigurationError, DomainError, FractransError, SingularSystemError
from exact_local import LocalExactSolution, build_exact
from lifting import FractionalLifting
from mesh_interface import InterfaceMesh, RationalInterface


class ModelKind(str, Enum):
    LOCAL_EXACT = "local-exact"
    LOCAL_FEM = "local-fem"
    OLD = "old"
    NEW = "new"
    SIMPLIFIED = "simplified"

    @classmethod
    def parse(cls, value) -> "ModelKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        for kind in cls:
            if kind.value == key:
                return kind
        raise ConfigurationError(f"unknown model {value!r} (expected one of {', '.join(k.value for k in cls)})")

    @property
    def reconstructed(self) -> bool:
        return self in (ModelKind.NEW, ModelKind.SIMPLIFIED)

    @property
    def fractional(self) -> bool:
        return self in (ModelKind.OLD, ModelKind.NEW, ModelKind.SIMPLIFIED)


COMPUTED_MODELS = (ModelKind.LOCAL_FEM, ModelKind.OLD, ModelKind.NEW, ModelKind.SIMPLIFIED)


@dataclass(frozen=True)
class ProblemConfig:
    """One problem instance; sigma3=None means the model's default cross coefficient"""
    b: RationalInterface
    sigma1: float
    sigma2: float
    alpha: float
    s: Optional[float] = None
    sigma3: Optional[float] = None

    def __post_init__(self):
        if not isinstance(self.b, RationalInterface):
            object.__setattr__(self, "b", RationalInterface.parse(self.b))

    @property
    def source(self) -> SourceTerm:
        return SourceTerm(self.alpha)

    def coefficients(self, kind: ModelKind) -> CoefficientField:
        if kind.reconstructed:
            if self.sigma3 not in (None, 0.0):
                raise ConfigurationError(f"{kind.value} model needs sigma3 = 0 (got {self.sigma3})")
            return CoefficientField(self.sigma1, self.sigma2, 0.0)
        if self.sigma3 is None:
            return CoefficientField.with_average(self.sigma1, self.sigma2)
        return CoefficientField(self.sigma1, self.sigma2, self.sigma3)


# ============================================================================
# LINEAR ALGEBRA
# ============================================================================

def lu_solve(matrix, rhs) -> np.ndarray:
    """Row-pivoted LU solve with pivot and residual checks (symmetric-indefinite safe)"""
    A = np.asarray(matrix.entries if isinstance(matrix, StiffnessMatrix) else matrix, dtype=float)
    b = np.asarray(rhs.entries if isinstance(rhs, LoadVector) else rhs, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != b.size:
        raise ConfigurationError(f"cannot solve a {A.shape} system with a right-hand side of length {b.size}")
    if A.shape[0] == 0:
        return np.zeros(0)

    norm = np.linalg.norm(A, np.inf)
    if norm == 0.0 or not np.isfinite(norm):
        raise SingularSystemError(f"matrix norm is {norm}")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(A)
    smallest = float(np.min(np.abs(np.diag(lu))))
    if smallest < Config.PIVOT_TOLERANCE * norm:
        raise SingularSystemError(
            f"pivot {smallest:.3e} below {Config.PIVOT_TOLERANCE:g} * ||A||_inf = {Config.PIVOT_TOLERANCE * norm:.3e}")

    x = scipy_lu_solve((lu, piv), b)
    residual = np.linalg.norm(A @ x - b, np.inf)
    bound = Config.RESIDUAL_TOLERANCE * (norm * np.linalg.norm(x, np.inf) + np.linalg.norm(b, np.inf))
    if residual > bound:
        raise SingularSystemError(f"residual {residual:.3e} exceeds {bound:.3e}; the system is ill-conditioned")
    return x


# ============================================================================
# SOLUTIONS
# ============================================================================

@dataclass
class ModelSolution:
    """
    kind: which model produced it
    hat_coefficients: coefficients of the interior hats (zero at M for reconstructed kinds)
    interface_value: u(b); the lifting coefficient for reconstructed kinds, the node-M value otherwise
    """
    kind: ModelKind
    mesh: InterfaceMesh
    hat_coefficients: np.ndarray
    interface_value: float
    lifting: Optional[FractionalLifting] = None
    exact: Optional[LocalExactSolution] = None
    coupling: Optional[CouplingData] = field(default=None, repr=False)
    c_star: Optional[float] = None

    @property
    def nodal_values(self) -> np.ndarray:
        """Values at the interior nodes (U0 + u(b) phi^s(x_j) for reconstructed kinds)"""
        if self.exact is not None:
            return np.asarray(self.exact.value(self.mesh.interior_nodes), dtype=float)
        values = self.hat_coefficients.copy()
        if self.lifting is not None:
            values = values + self.interface_value * self.lifting.value(self.mesh.interior_nodes)
        return values

    def _padded(self):
        return np.concatenate([[0.0], self.hat_coefficients, [0.0]])

    def evaluate(self, x):
        if self.exact is not None:
            return self.exact.value(x)
        xx = np.asarray(x, dtype=float)
        out = np.interp(xx, self.mesh.nodes, self._padded(), left=0.0, right=0.0)
        if self.lifting is not None:
            out = out + self.interface_value * self.lifting.value(xx)
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self, x):
        """Piecewise derivative; undefined at nodes (the right-cell slope is returned there)"""
        if self.exact is not None:
            return self.exact.derivative(x)
        xx = np.asarray(x, dtype=float)
        n = self.mesh.n_cells
        cell = np.clip(np.floor(xx * n).astype(int), 0, n - 1)
        padded = self._padded()
        out = (padded[cell + 1] - padded[cell]) * n
        if self.lifting is not None:
            out = out + self.interface_value * self.lifting.derivative(xx)
        return float(out) if np.ndim(out) == 0 else out

    def profile(self, oversampling=None):
        """(x, value) on the nodes, refined `oversampling` times for reconstructed kinds"""
        factor = Config.PROFILE_OVERSAMPLING if oversampling is None else oversampling
        if not self.kind.reconstructed and self.kind != ModelKind.LOCAL_EXACT:
            factor = 1
        x = np.linspace(0.0, 1.0, self.mesh.n_cells * factor + 1)
        x[self.mesh.m_interface * factor] = self.mesh.b
        return x, np.asarray(self.evaluate(x), dtype=float)


# ============================================================================
# RUNNERS
# ============================================================================

def _check_order(kind: ModelKind, s):
    if not kind.fractional:
        return
    if s is None:
        raise ConfigurationError(f"{kind.value} model needs a fractional order s")
    if kind.reconstructed and not (0.5 < s < 1.0):
        raise DomainError(f"{kind.value} model needs s in (1/2, 1), got {s}")
    if not (0.0 < s < 1.0):
        raise DomainError(f"fractional order s={s} outside (0, 1)")
    if s > Config.MAX_ORDER:
        raise DomainError(f"s={s} exceeds the supported maximum {Config.MAX_ORDER}")


def _run_local_exact(config, mesh):
    exact = build_exact(mesh.b, config.sigma1, config.sigma2, config.alpha)
    nodal = np.asarray(exact.value(mesh.interior_nodes), dtype=float)
    return ModelSolution(ModelKind.LOCAL_EXACT, mesh, nodal, exact.interface_value, exact=exact)


def _run_local_fem(config, mesh):
    coeff = config.coefficients(ModelKind.LOCAL_FEM)
    U = lu_solve(assemble_local(mesh, coeff), load_vector(mesh, config.source, "hat"))
    return ModelSolution(ModelKind.LOCAL_FEM, mesh, U, float(U[mesh.interface_slot]))


def _run_old(config, mesh):
    coeff = config.coefficients(ModelKind.OLD)
    U = lu_solve(assemble_old(mesh, coeff, config.s), load_vector(mesh, config.source, "hat"))
    return ModelSolution(ModelKind.OLD, mesh, U, float(U[mesh.interface_slot]))


def _run_new(config, mesh):
    coeff = config.coefficients(ModelKind.NEW)
    s = config.s
    coupling = coupling_vector_and_scalars(mesh, coeff, s)
    K = assemble_bordered(mesh, coeff, s, coupling)
    V = lu_solve(K, load_vector(mesh, config.source, "bordered", s=s))
    m = mesh.interface_slot
    u_b = float(V[m])
    U0 = V.copy()
    U0[m] = 0.0
    return ModelSolution(ModelKind.NEW, mesh, U0, u_b, lifting=FractionalLifting(mesh.b, s),
                         coupling=coupling, c_star=coupling.c_star)


def _run_simplified(config, mesh):
    coeff = config.coefficients(ModelKind.SIMPLIFIED)
    s = config.s
    _, _, c_star = interface_scalars(mesh.b, coeff, s)
    F = load_hats(mesh, config.source)
    U0 = np.zeros(mesh.n_interior)
    for k, sigma in ((1, coeff.sigma1), (2, coeff.sigma2)):
        slots = mesh.subdomain_slots(k)
        if slots.size:
            U0[slots] = lu_solve(assemble_subdomain(mesh, k, sigma, s), F[slots])
    u_b = load_phi_s(config.source, mesh.b, s) / c_star
    return ModelSolution(ModelKind.SIMPLIFIED, mesh, U0, float(u_b), lifting=FractionalLifting(mesh.b, s),
                         c_star=c_star)


_RUNNERS = {
    ModelKind.LOCAL_EXACT: _run_local_exact,
    ModelKind.LOCAL_FEM: _run_local_fem,
    ModelKind.OLD: _run_old,
    ModelKind.NEW: _run_new,
    ModelKind.SIMPLIFIED: _run_simplified,
}


def run_model(kind, config: ProblemConfig, mesh: InterfaceMesh) -> ModelSolution:
    """Assemble and solve one model; errors carry the model name"""
    kind = ModelKind.parse(kind)
    try:
        if mesh.interface != config.b:
            raise ConfigurationError(f"mesh interface {mesh.interface} differs from the problem's b={config.b}")
        _check_order(kind, config.s)
        return _RUNNERS[kind](config, mesh)
    except FractransError as exc:
        if exc.model is None:
            exc.model = kind.value
        raise


def simplified_interface_value(config: ProblemConfig) -> float:
    """(int f phi^s) / c*: mesh independent"""
    coeff = config.coefficients(ModelKind.SIMPLIFIED)
    _check_order(ModelKind.SIMPLIFIED, config.s)
    _, _, c_star = interface_scalars(config.b.value, coeff, config.s)
    return load_phi_s(config.source, config.b.value, config.s) / c_star


def max_difference(a: ModelSolution, b: ModelSolution, oversampling=None) -> float:
    """Sup-norm distance of two solutions on a common oversampled grid"""
    factor = Config.PROFILE_OVERSAMPLING if oversampling is None else oversampling
    n = math.lcm(a.mesh.n_cells, b.mesh.n_cells) * factor
    x = np.linspace(0.0, 1.0, n + 1)
    return float(np.max(np.abs(np.asarray(a.evaluate(x)) - np.asarray(b.evaluate(x)))))
