"""
Assembly of every discrete system
Old global nonlocal matrix (full case analysis around the interface), subdomain
blocks, coupling vector and interface scalars, bordered and block-diagonal
systems, the local tridiagonal matrix, and load vectors for monomial sources.
"""

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.linalg import toeplitz
from scipy.special import beta, betainc

from config import Config
from errors import ConfigurationError, DomainError, SolvabilityError
from kernel_closed_form import (
    KernelParams, bicher_row, eval_H_family, eval_L1, eval_L2, eval_S1, eval_S2,
    fractional_constant,
)
from lifting import (
    FractionalLifting, alpha1 as lifting_alpha1, alpha2_closed_form, c_star_scale,
    interpolant_coeffs,
)
from mesh_interface import InterfaceMesh
from quadrature import graded_rule


# ============================================================================
# TYPES
# ============================================================================

class MatrixKind(str, Enum):
    OLD = "old"
    BORDERED = "bordered"
    BLOCK_DIAG = "block_diag"
    LOCAL_TRIDIAG = "local_tridiag"
    SUBDOMAIN = "subdomain"


@dataclass(frozen=True)
class CoefficientField:
    """sigma1 on (-inf, b)^2, sigma2 on (b, inf)^2, sigma3 across the interface"""
    sigma1: float
    sigma2: float
    sigma3: float = 0.0

    def __post_init__(self):
        if self.sigma1 == 0.0 or self.sigma2 == 0.0:
            raise DomainError("sigma1 and sigma2 must be nonzero")

    @classmethod
    def with_average(cls, sigma1, sigma2):
        return cls(sigma1, sigma2, 0.5 * (sigma1 + sigma2))

    @classmethod
    def constant(cls, sigma):
        return cls(sigma, sigma, sigma)

    def without_cross(self):
        return CoefficientField(self.sigma1, self.sigma2, 0.0)


@dataclass
class StiffnessMatrix:
    kind: MatrixKind
    entries: np.ndarray

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    def symmetry_defect(self) -> float:
        """max |A - A^T| / max |A|"""
        scale = np.max(np.abs(self.entries)) or 1.0
        return float(np.max(np.abs(self.entries - self.entries.T)) / scale)

    def is_symmetric(self, rtol=1e-12) -> bool:
        return self.symmetry_defect() <= rtol

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


@dataclass
class LoadVector:
    entries: np.ndarray
    interface_role: str = "hat"  # "hat": slot M holds int f phi_M; "phi_s": int f phi^s

    def __len__(self):
        return self.entries.size


@dataclass(frozen=True)
class SourceTerm:
    """f(x) = x^alpha"""
    alpha: float
    kind: str = "monomial"

    def __post_init__(self):
        if self.alpha <= -0.5:
            raise DomainError(f"source exponent alpha={self.alpha} must exceed -1/2")

    def __call__(self, x):
        return np.power(x, self.alpha)

    def integral(self, a, c, shift=0.0) -> float:
        """int_a^c x^(alpha + shift) dx"""
        e = self.alpha + 1.0 + shift
        return (c ** e - a ** e) / e


@dataclass
class CouplingData:
    D: np.ndarray  # length N_h, zero at the interface slot
    c_h: float
    c_star: float
    alpha1: float
    alpha2: float
    interpolant: np.ndarray = field(repr=False)


# ============================================================================
# OLD MODEL
# ============================================================================

def assemble_old(mesh: InterfaceMesh, coeff: CoefficientField, s: float) -> StiffnessMatrix:
    """A_old = (C(s)/2) B, B from the closed forms on the upper triangle, mirrored"""
    p = KernelParams(mesh.h, s)
    hv = eval_H_family(p)
    n, M, h = mesh.n_interior, mesh.m_interface, mesh.h
    s1, s2, s3 = coeff.sigma1, coeff.sigma2, coeff.sigma3
    idx = np.arange(1, n + 1)
    B = np.zeros((n, n))

    # diagonal
    sum_h = hv.H1 + hv.H2 + hv.H3 + hv.H4
    diag = np.empty(n)
    left, right = idx < M - 1, idx > M + 1
    if np.any(left):
        diag[left] = 2.0 * s1 * sum_h + (s3 - s1) * eval_S1(p, (M - idx[left]) * h)
    if np.any(right):
        diag[right] = 2.0 * s2 * sum_h + (s3 - s2) * eval_S1(p, (idx[right] - M) * h)
    diag[M - 1] = (s1 + s2) * (hv.H1 + hv.H3) + 2.0 * s3 * (hv.H2 + hv.H4)
    if M - 1 >= 1:
        diag[M - 2] = (s1 + s3) * (hv.H1 + hv.H2) + 2.0 * s1 * (hv.H3 + hv.H4)
    if M + 1 <= n:
        diag[M] = (s2 + s3) * (hv.H1 + hv.H2) + 2.0 * s2 * (hv.H3 + hv.H4)
    B[idx - 1, idx - 1] = diag

    # first superdiagonal (i, i+1)
    if n >= 2:
        near = -hv.H3 + 2.0 * hv.H5 + 2.0 * hv.H6 + hv.H7
        sup_i = idx[:-1]
        sup = np.empty(n - 1)
        left, right = sup_i + 1 < M, sup_i > M
        if np.any(left):
            sup[left] = s1 * near - (s3 - s1) * eval_S2(p, (M - sup_i[left]) * h)
        if np.any(right):
            sup[right] = s2 * near - (s3 - s2) * eval_S2(p, (sup_i[right] + 1 - M) * h)
        if M <= n - 1:
            sup[M - 1] = -s2 * hv.H3 + (s2 + s3) * (hv.H5 + hv.H6) + s3 * hv.H7
        if M - 1 >= 1:
            sup[M - 2] = -s1 * hv.H3 + (s1 + s3) * (hv.H5 + hv.H6) + s3 * hv.H7
        B[sup_i - 1, sup_i] = sup

    # offsets k >= 2
    if n >= 3:
        ks = np.arange(2, n, dtype=float)
        L1 = np.zeros(n)
        L2 = np.zeros(n)
        L1[2:] = eval_L1(p, ks)
        L2[2:] = eval_L2(p, ks)
        Lsum = L1 + L2
        for i in range(1, n - 1):
            k = np.arange(2, n - i + 1)
            j = i + k
            if i == M:
                row = s3 * L1[k] + s2 * L2[k]
            elif i > M:
                row = s2 * Lsum[k]
            else:
                row = np.where(j < M, s1, s3) * Lsum[k]
                if M - i >= 2:
                    kM = M - i
                    row[kM - 2] = s3 * L1[kM] + s1 * L2[kM]
            B[i - 1, j - 1] = row

    B = np.triu(B) + np.triu(B, 1).T
    return StiffnessMatrix(MatrixKind.OLD, 0.5 * fractional_constant(s) * B)


def constant_coefficient_matrix(n: int, h: float, s: float, sigma: float = 1.0) -> np.ndarray:
    """sigma (C(s)/2) times the Toeplitz matrix of constant-coefficient entries"""
    row = bicher_row(KernelParams(h, s), n)
    return sigma * 0.5 * fractional_constant(s) * toeplitz(row)


# ============================================================================
# NEW / SIMPLIFIED MODELS
# ============================================================================

def assemble_subdomain(mesh: InterfaceMesh, k: int, sigma_k: float, s: float) -> StiffnessMatrix:
    """Interior nodes of I_k, constant coefficient sigma_k, zero exterior condition outside I_k"""
    slots = mesh.subdomain_slots(k)
    if slots.size == 0:
        raise ConfigurationError(f"subdomain I_{k} has no interior node on mesh {mesh.describe()}")
    return StiffnessMatrix(MatrixKind.SUBDOMAIN,
                           constant_coefficient_matrix(slots.size, mesh.h, s, sigma_k))


def _require_no_cross(coeff: CoefficientField):
    if coeff.sigma3 != 0.0:
        raise ConfigurationError(f"the reconstructed models need sigma3 = 0 (got {coeff.sigma3})")


def interface_scalars(b: float, coeff: CoefficientField, s: float):
    """(alpha1, alpha2, c*) for sigma3 = 0; SolvabilityError when c* is degenerate"""
    _require_no_cross(coeff)
    if not (0.5 < s < 1.0):
        raise DomainError(f"reconstructed models need s in (1/2, 1), got {s}")
    a1 = lifting_alpha1(b, coeff.sigma1, coeff.sigma2, s)
    a2 = alpha2_closed_form(b, coeff.sigma1, coeff.sigma2, s)
    c_star = a1 + a2
    scale = c_star_scale(b, coeff.sigma1, coeff.sigma2, s)
    if abs(c_star) < Config.CSTAR_DEGENERACY * scale:
        raise SolvabilityError(
            f"c* = {c_star:.3e} is degenerate against its scale {scale:.3e}; "
            "the interface equation has no unique solution")
    return a1, a2, c_star


def coupling_vector_and_scalars(mesh: InterfaceMesh, coeff: CoefficientField, s: float,
                                old: Optional[StiffnessMatrix] = None) -> CouplingData:
    """D_h = A_old phi_h^s (slot M dropped), c_h = phi_h^s . A_old phi_h^s, c* = alpha1 + alpha2"""
    a1, a2, c_star = interface_scalars(mesh.b, coeff, s)
    w = interpolant_coeffs(mesh, FractionalLifting(mesh.b, s))
    A = (old if old is not None else assemble_old(mesh, coeff, s)).entries

    Aw = A @ w
    D = Aw.copy()
    D[mesh.interface_slot] = 0.0
    c_h = float(w @ Aw)
    return CouplingData(D=D, c_h=c_h, c_star=c_star, alpha1=a1, alpha2=a2, interpolant=w)


def _bordered(mesh, A1, A2, D, corner, kind):
    n = mesh.n_interior
    K = np.zeros((n, n))
    sl1, sl2 = mesh.subdomain_slots(1), mesh.subdomain_slots(2)
    K[np.ix_(sl1, sl1)] = A1
    K[np.ix_(sl2, sl2)] = A2
    m = mesh.interface_slot
    K[m, :] = D
    K[:, m] = D
    K[m, m] = corner
    return StiffnessMatrix(kind, K)


def _subdomain_blocks(mesh, coeff, s):
    blocks = []
    for k, sigma in ((1, coeff.sigma1), (2, coeff.sigma2)):
        if mesh.subdomain_slots(k).size == 0:
            blocks.append(np.zeros((0, 0)))
        else:
            blocks.append(assemble_subdomain(mesh, k, sigma, s).entries)
    return blocks


def assemble_bordered(mesh: InterfaceMesh, coeff: CoefficientField, s: float,
                      coupling: Optional[CouplingData] = None) -> StiffnessMatrix:
    """[A1 0 D1; 0 A2 D2; D1^T D2^T c*] with the interface unknown kept at slot M"""
    coupling = coupling or coupling_vector_and_scalars(mesh, coeff, s)
    A1, A2 = _subdomain_blocks(mesh, coeff, s)
    return _bordered(mesh, A1, A2, coupling.D, coupling.c_star, MatrixKind.BORDERED)


def assemble_block_diag(mesh: InterfaceMesh, coeff: CoefficientField, s: float,
                        coupling: Optional[CouplingData] = None) -> StiffnessMatrix:
    coupling = coupling or coupling_vector_and_scalars(mesh, coeff, s)
    A1, A2 = _subdomain_blocks(mesh, coeff, s)
    return _bordered(mesh, A1, A2, np.zeros(mesh.n_interior), coupling.c_star, MatrixKind.BLOCK_DIAG)


# ============================================================================
# LOCAL MODEL
# ============================================================================

def assemble_local(mesh: InterfaceMesh, coeff: CoefficientField) -> StiffnessMatrix:
    """P1 stiffness of int sigma u' v' (sigma1 left of b, sigma2 right)"""
    n, M = mesh.n_interior, mesh.m_interface
    cells = np.arange(mesh.n_cells)
    sigma = np.where(cells < M, coeff.sigma1, coeff.sigma2) / mesh.h
    diag = sigma[:-1] + sigma[1:]
    off = -sigma[1:-1]
    A = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    return StiffnessMatrix(MatrixKind.LOCAL_TRIDIAG, A.reshape(n, n))


def local_consistency_gap(mesh: InterfaceMesh, s: float, u, v) -> float:
    """|u . A_s v - u . A_local v| for constant unit coefficient"""
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    frac = constant_coefficient_matrix(mesh.n_interior, mesh.h, s)
    loc = assemble_local(mesh, CoefficientField.constant(1.0)).entries
    return float(abs(u @ frac @ v - u @ loc @ v))


# ============================================================================
# LOADS
# ============================================================================

def load_hats(mesh: InterfaceMesh, f: SourceTerm) -> np.ndarray:
    """
    F_j = int f phi_j exactly

    With P(x) = x^(alpha+2) / ((alpha+1)(alpha+2)), F_j is the second difference
    (P(x_j + h) - 2 P(x_j) + P(x_j - h)) / h; the differences are formed through
    expm1/log1p so they keep relative accuracy far from the origin.
    """
    a = f.alpha
    x = mesh.interior_nodes
    h = mesh.h
    e = a + 2.0
    ratio = h / x
    with np.errstate(divide="ignore"):
        up = np.expm1(e * np.log1p(ratio))
        down = np.expm1(e * np.log1p(-ratio))
    return np.power(x, e) / ((a + 1.0) * e) * (up + down) / h


def load_phi(f: SourceTerm, b: float) -> float:
    """int f phi for the affine lifting"""
    a = f.alpha
    left = b ** (a + 1.0) / (a + 2.0)
    right = (f.integral(b, 1.0) - f.integral(b, 1.0, shift=1.0)) / (1.0 - b)
    return left + right


def load_phi_s(f: SourceTerm, b: float, s: float, method: str = "analytic") -> float:
    """
    int f phi^s

    analytic: b^(alpha+1)/(alpha+s+1) on [0, b] plus an incomplete Beta function on [b, 1]
    graded: composite Gauss graded toward 0, b and 1
    """
    a = f.alpha
    if method == "analytic":
        left = b ** (a + 1.0) / (a + s + 1.0)
        right = beta(a + 1.0, s + 1.0) * betainc(s + 1.0, a + 1.0, 1.0 - b) / (1.0 - b) ** s
        return float(left + right)
    if method == "graded":
        lifting = FractionalLifting(b, s)
        levels, order = Config.LIFTING_GRADING_LEVELS, Config.LIFTING_GAUSS_POINTS
        integrand = lambda x: f(x) * lifting.value(x)
        return (graded_rule(0.0, b, True, True, levels, order).integrate(integrand)
                + graded_rule(b, 1.0, True, True, levels, order).integrate(integrand))
    raise ConfigurationError(f"unknown interface-load method {method!r}")


def load_vector(mesh: InterfaceMesh, f: SourceTerm, target: str = "hat", s: Optional[float] = None):
    """
    target "hat"      -> LoadVector of F_j (old and local models)
    target "bordered" -> LoadVector G with G_M = int f phi^s (new and simplified models)
    target "phi"      -> float int f phi
    target "phi_s"    -> float int f phi^s
    """
    if target == "hat":
        return LoadVector(load_hats(mesh, f), "hat")
    if target == "phi":
        return load_phi(f, mesh.b)
    if s is None:
        raise ConfigurationError(f"load target {target!r} needs the fractional order s")
    if target == "phi_s":
        return load_phi_s(f, mesh.b, s)
    if target == "bordered":
        G = load_hats(mesh, f)
        G[mesh.interface_slot] = load_phi_s(f, mesh.b, s)
        return LoadVector(G, "phi_s")
    raise ConfigurationError(f"unknown load target {target!r}")


# ============================================================================
# EXPORT
# ============================================================================

def export_matrix_csv(path, matrix) -> Path:
    """One matrix row per CSV line"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    entries = np.atleast_2d(np.asarray(matrix, dtype=float))
    fmt = Config.CSV_FLOAT_FORMAT
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        for row in entries:
            writer.writerow([fmt % v for v in row])
    return path


def export_vector_csv(path, vector) -> Path:
    entries = vector.entries if isinstance(vector, LoadVector) else vector
    return export_matrix_csv(path, np.asarray(entries, dtype=float).reshape(-1, 1))
