"""
Brute-force quadrature of Gagliardo-form quantities
Shares no code with the closed-form kernels. Hat pairs are integrated cell by
cell: Duffy transform at touching corners, power-weighted graded rules along
the diagonal, plain tensor Gauss for separated cells, and the analytic inner
integral over the exterior of the supports.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List

import numpy as np
from scipy.special import gamma, roots_jacobi

from assembly import CoefficientField, assemble_old
from config import Config
from errors import CapacityError, ConfigurationError, ConvergenceFailure, DomainError
from mesh_interface import InterfaceMesh, hat_value
from quadrature import QuadratureRule, adaptive_integrate, composite_gauss, gauss_legendre, graded_rule


def _constant(s):
    return 4.0 ** s * s * gamma(s + 0.5) / (math.sqrt(math.pi) * gamma(1.0 - s))


def _schedule(refinement):
    """(grading levels, Gauss order) used at a refinement index"""
    return Config.ORACLE_START_LEVELS + 8 * refinement, Config.ORACLE_START_POINTS + 2 * refinement


def _check_tol(tol):
    tol = Config.ORACLE_TOLERANCE if tol is None else tol
    if tol < Config.ORACLE_MIN_TOLERANCE:
        raise ConfigurationError(f"oracle tolerance {tol:g} is below {Config.ORACLE_MIN_TOLERANCE:g}")
    return tol


# ============================================================================
# RULES
# ============================================================================

@lru_cache(maxsize=None)
def _jacobi(order, power):
    x, w = roots_jacobi(order, 0.0, power)
    return x, w


def _power_rule(length, power, levels, order) -> QuadratureRule:
    """
    Rule for int_0^length t^power g(t) dt with g smooth (weights include t^power)

    Geometric panels toward 0; the innermost panel uses Gauss-Jacobi with the
    weight t^power, so power may be anywhere in (-1, 2].
    """
    ratio = Config.GRADING_RATIO
    delta = length * ratio ** levels
    outer = composite_gauss(length * ratio ** np.arange(levels, -1, -1, dtype=float), order)
    x, w = _jacobi(order, float(power))
    inner_t = 0.5 * delta * (1.0 + x)
    inner_w = (0.5 * delta) ** (power + 1.0) * w
    return QuadratureRule(np.concatenate([inner_t, outer.points]),
                          np.concatenate([inner_w, outer.weights * outer.points ** power]))


def _unit_gauss(order):
    x, w = gauss_legendre(order)
    return 0.5 * (1.0 + x), 0.5 * w


def _duffy_square(F, power, levels, order):
    """
    int_[0,1]^2 F(u, v) du dv for F singular only at the corner u = v = 0

    Both triangles u >= v and v >= u are mapped to (rho, w) in [0,1]^2;
    rho F(rho, rho w) must behave like rho^power near 0.
    """
    rule = _power_rule(1.0, power, levels, order)
    w, ww = _unit_gauss(order)
    R = rule.points[:, None]
    W = w[None, :]
    vals = R * (F(R, R * W) + F(R * W, R)) / R ** power
    return float(rule.weights @ (vals @ ww)), 2 * vals.size


def _tensor(F, ax, bx, ay, by, order):
    x, w = gauss_legendre(order)
    X = 0.5 * (ax + bx) + 0.5 * (bx - ax) * x
    Y = 0.5 * (ay + by) + 0.5 * (by - ay) * x
    vals = F(X[:, None], Y[None, :])
    return float(0.25 * (bx - ax) * (by - ay) * (w @ vals @ w)), vals.size


# ============================================================================
# MATRIX ENTRIES
# ============================================================================

def _exterior_weight(x, lo, hi, b, coeff: CoefficientField, s):
    """int over y outside [lo, hi] of sigma(x, y) |x - y|^(-1-2s) dy, split at b"""
    two_s = 2.0 * s
    left_x = x < b
    with_left = np.where(left_x, coeff.sigma1, coeff.sigma3)
    with_right = np.where(left_x, coeff.sigma3, coeff.sigma2)
    if lo <= b:
        low = with_left * (x - lo) ** -two_s
    else:
        low = (with_right * ((x - lo) ** -two_s - (x - b) ** -two_s)
               + with_left * (x - b) ** -two_s)
    if hi >= b:
        high = with_right * (hi - x) ** -two_s
    else:
        high = (with_left * ((hi - x) ** -two_s - (b - x) ** -two_s)
                + with_right * (b - x) ** -two_s)
    return (low + high) / two_s


def _same_cell(g, a, h, s, levels, order):
    """2 int_0^h t^(-1-2s) int_a^(a+h-t) g(x, x+t) dx dt"""
    rule = _power_rule(h, 1.0 - 2.0 * s, levels, order)
    t = rule.points[:, None]
    xi, wi = gauss_legendre(order)
    half = 0.5 * (h - t)
    x = a + half * (1.0 + xi[None, :])
    Q = (half * g(x, x + t)) @ wi
    return float(2.0 * rule.weights @ (Q / rule.points ** 2)), x.size


def _touching_cells(g, a, h, s, levels, order):
    """x in [a-h, a], y in [a, a+h]"""
    def F(u, v):
        return h * h * g(a - h * u, a + h * v) / (h * (u + v)) ** (1.0 + 2.0 * s)
    return _duffy_square(F, 2.0 - 2.0 * s, levels, order)


def _separated_cells(g, ap, aq, h, s, order):
    def F(x, y):
        return g(x, y) / np.abs(y - x) ** (1.0 + 2.0 * s)
    return _tensor(F, ap, ap + h, aq, aq + h, order + 4)


def _pair_value(mesh: InterfaceMesh, i, j, coeff: CoefficientField, s, levels, order):
    """Double integral of sigma (dphi_i)(dphi_j) |x-y|^(-1-2s) over R^2 (no C(s)/2)"""
    h, nodes, M = mesh.h, mesh.nodes, mesh.m_interface
    supp_i, supp_j = {i - 1, i}, {j - 1, j}
    cells = sorted(supp_i | supp_j)

    def g(x, y):
        return ((hat_value(mesh, i, x) - hat_value(mesh, i, y))
                * (hat_value(mesh, j, x) - hat_value(mesh, j, y)))

    def cell_sigma(P, Q):
        if P < M and Q < M:
            return coeff.sigma1
        if P >= M and Q >= M:
            return coeff.sigma2
        return coeff.sigma3

    total, evals = 0.0, 0
    for a, P in enumerate(cells):
        for Q in cells[a:]:
            if not ((P in supp_i or Q in supp_i) and (P in supp_j or Q in supp_j)):
                continue
            sigma = cell_sigma(P, Q)
            if sigma == 0.0:
                continue
            if Q == P:
                val, ev = _same_cell(g, nodes[P], h, s, levels, order)
            elif Q == P + 1:
                val, ev = _touching_cells(g, nodes[Q], h, s, levels, order)
                val *= 2.0
            else:
                val, ev = _separated_cells(g, nodes[P], nodes[Q], h, s, order)
                val *= 2.0
            total += sigma * val
            evals += ev

    if abs(i - j) <= 1:
        lo, hi = nodes[cells[0]], nodes[cells[-1] + 1]
        power = 2.0 - 2.0 * s

        def outside(x):
            return (hat_value(mesh, i, x) * hat_value(mesh, j, x)
                    * _exterior_weight(x, lo, hi, mesh.b, coeff, s))

        ext = 0.0
        for c in cells:
            a0, a1 = nodes[c], nodes[c + 1]
            if a0 == lo:
                rule = _power_rule(h, power, levels, order)
                ext += rule.integrate(lambda t: outside(lo + t) / t ** power)
            elif a1 == hi:
                rule = _power_rule(h, power, levels, order)
                ext += rule.integrate(lambda t: outside(hi - t) / t ** power)
            else:
                rule = graded_rule(a0, a1, order=order + 4)
                ext += rule.integrate(outside)
            evals += len(rule)
        total += 2.0 * ext
    return total, evals


def _check_node(mesh, i):
    if not (1 <= i <= mesh.n_interior):
        raise DomainError(f"node index {i} is not interior (1..{mesh.n_interior})")


def oracle_entry(mesh: InterfaceMesh, i, j, coeff: CoefficientField, s, tol=None, budget=None) -> float:
    """(C(s)/2) int int sigma (phi_i(x)-phi_i(y))(phi_j(x)-phi_j(y)) / |x-y|^(1+2s)"""
    _check_node(mesh, i)
    _check_node(mesh, j)
    if not (0.0 < s < 1.0):
        raise DomainError(f"fractional order s={s} outside (0, 1)")
    tol = _check_tol(tol)
    lo, hi = min(i, j), max(i, j)

    def estimate(refinement):
        levels, order = _schedule(refinement)
        return _pair_value(mesh, lo, hi, coeff, s, levels, order)

    scale = mesh.h ** (1.0 - 2.0 * s) * max(abs(coeff.sigma1), abs(coeff.sigma2), abs(coeff.sigma3))
    result = adaptive_integrate(estimate, tol, budget, label=f"entry ({lo},{hi})",
                                atol=tol * Config.ORACLE_ABS_FLOOR * scale)
    return 0.5 * _constant(s) * result.value


def oracle_matrix(mesh: InterfaceMesh, coeff: CoefficientField, s, tol=None, nodes=None, strict=True):
    """
    Oracle Gram matrix over `nodes` (1-based interior indices, default all) and its convergence mask

    strict=False keeps the last estimate of an entry that misses the tolerance and
    flags it False in the mask instead of raising ConvergenceFailure.
    """
    nodes = np.arange(1, mesh.n_interior + 1) if nodes is None else np.asarray(nodes, dtype=int)
    n = nodes.size
    A = np.zeros((n, n))
    converged = np.ones((n, n), dtype=bool)
    for a in range(n):
        for c in range(a, n):
            try:
                value = oracle_entry(mesh, int(nodes[a]), int(nodes[c]), coeff, s, tol)
            except ConvergenceFailure as exc:
                if strict:
                    raise
                value = exc.estimate if exc.estimate is not None else math.nan
                converged[a, c] = converged[c, a] = False
            A[a, c] = A[c, a] = value
    return A, converged


def oracle_subdomain_matrix(mesh: InterfaceMesh, k, sigma_k, s, tol=None) -> np.ndarray:
    """Constant-coefficient Gagliardo matrix over the interior nodes of I_k, zero extension"""
    nodes = mesh.subdomain_slots(k) + 1
    if nodes.size == 0:
        raise ConfigurationError(f"subdomain {k} has no interior node")
    A, _ = oracle_matrix(mesh, CoefficientField.constant(sigma_k), s, tol, nodes=nodes)
    return A



# ============================================================================
# KERNEL BUILDING BLOCKS
# ============================================================================

def _far_enough(r, h, name):
    rr = r / h
    if rr <= 1.0:
        raise DomainError(f"{name} needs r > h (got r/h = {rr:g})")
    return rr


def oracle_S1(h, s, r, tol=None) -> float:
    """(1/s) int phi_i(y)^2 |y - b|^(-2s) dy for a hat centred r from b"""
    rr = _far_enough(r, h, "S1")

    def f(t):
        return (1.0 - np.abs(t)) ** 2 * (rr + t) ** (-2.0 * s)

    def estimate(refinement):
        levels, order = _schedule(refinement)
        near = graded_rule(-1.0, 0.0, True, False, levels, order)
        far = graded_rule(0.0, 1.0, order=order)
        return (near.integrate(f) + far.integrate(f)) / s, len(near) + len(far)

    result = adaptive_integrate(estimate, _check_tol(tol), label="S1")
    return result.value * h ** (1.0 - 2.0 * s)


def oracle_S2(h, s, r, tol=None) -> float:
    rr = _far_enough(r, h, "S2")

    def f(x):
        return x * (1.0 + x) * (x + rr) ** (-2.0 * s)

    def estimate(refinement):
        levels, order = _schedule(refinement)
        rule = graded_rule(-1.0, 0.0, True, False, levels, order)
        return rule.integrate(f) / s, len(rule)

    result = adaptive_integrate(estimate, _check_tol(tol), label="S2")
    return result.value * h ** (1.0 - 2.0 * s)


def _check_offset(k):
    if k < 2:
        raise DomainError("far-field kernels need node offset k >= 2")


def oracle_L1(h, s, k, tol=None) -> float:
    """-2 int_{x in [-1,1]} int_{y in [-1,0]} (1-|x|)(1+y)(k+x-y)^(-1-2s)"""
    _check_offset(k)

    def F(x, y):
        return (1.0 - np.abs(x)) * (1.0 + y) * (k + x - y) ** (-1.0 - 2.0 * s)

    def estimate(refinement):
        _, order = _schedule(refinement)
        left, n1 = _tensor(F, -1.0, 0.0, -1.0, 0.0, order)
        right, n2 = _tensor(F, 0.0, 1.0, -1.0, 0.0, order)
        return -2.0 * (left + right), n1 + n2

    result = adaptive_integrate(estimate, _check_tol(tol), label="L1")
    return result.value * h ** (1.0 - 2.0 * s)


def oracle_L2(h, s, k, tol=None) -> float:
    """-2 int_{x in [-1,1]} int_{y in [0,1]} (1-|x|)(1-y)(k+x-y)^(-1-2s); corner singular for k = 2"""
    _check_offset(k)

    def corner(u, v):
        return u * v * (k - 2.0 + u + v) ** (-1.0 - 2.0 * s)

    def F(x, y):
        return (1.0 - x) * (1.0 - y) * (k + x - y) ** (-1.0 - 2.0 * s)

    power = 2.0 - 2.0 * s if k == 2 else 0.0

    def estimate(refinement):
        levels, order = _schedule(refinement)
        near, n1 = _duffy_square(corner, power, levels, order)
        far, n2 = _tensor(F, 0.0, 1.0, 0.0, 1.0, order)
        return -2.0 * (near + far), n1 + n2

    result = adaptive_integrate(estimate, _check_tol(tol), label="L2")
    return result.value * h ** (1.0 - 2.0 * s)


# ============================================================================
# LIFTING QUANTITIES
# ============================================================================

@dataclass(frozen=True)
class PhiQuantities:
    phi1: float
    phi2: float
    c_star: float
    alpha1: float
    alpha2: float


def _profile(kind, s):
    if kind == "phi":
        return lambda t, L: t / L
    if kind == "phi_s":
        return lambda t, L: (np.clip(t, 0.0, None) / L) ** s
    raise ConfigurationError(f"unknown lifting {kind!r} (expected 'phi' or 'phi_s')")


def _interval_gagliardo(p, L, s, levels, order):
    """2 int_0^L t^(-1-2s) int_0^(L-t) (p(x+t) - p(x))^2 dx dt"""
    outer = _power_rule(L, 1.0 - 2.0 * s, levels, order)
    inner = graded_rule(0.0, 1.0, True, False, levels, order)
    t = outer.points[:, None]
    span = L - t
    x = span * inner.points[None, :]
    Q = (span * (p(x + t, L) - p(x, L)) ** 2) @ inner.weights
    return float(2.0 * outer.weights @ (Q / outer.points ** 2)), x.size


def _boundary_weight(p, L, s, far, levels, order):
    """int_0^L p(t)^2 d^(-2s) / (2s) with d = t (adjacent boundary) or 1 - t (opposite boundary)"""
    rule = graded_rule(0.0, L, True, False, levels, order)
    t = rule.points
    d = (1.0 - t) if far else t
    vals = p(t, L) ** 2 * d ** (-2.0 * s) / (2.0 * s)
    return float(rule.weights @ vals), len(rule)


def oracle_phi_quantities(b, sigma1, sigma2, s, lifting="phi_s", tol=None) -> PhiQuantities:
    """
    Phi_1, Phi_2 (two-sided exterior weight) and c* (sigma3 = 0) by direct quadrature

    Phi_k = Gagliardo(I_k x I_k) + 2 int_{I_k} psi^2 omega
    c* = (C/2)(sigma1 G_1 + sigma2 G_2) + C (sigma1 E_1 + sigma2 E_2), with E_k the
    exterior integral toward the boundary adjacent to I_k
    """
    if not (0.0 < b < 1.0):
        raise DomainError(f"interface b={b} outside (0, 1)")
    if not (0.5 < s < 1.0):
        raise DomainError(f"lifting quantities need s in (1/2, 1), got {s}")
    tol = _check_tol(tol)
    p = _profile(lifting, s)

    def run(fn, L, label, **kw):
        def estimate(refinement):
            levels, order = _schedule(refinement)
            return fn(p, L, s, levels=levels, order=order, **kw)
        return adaptive_integrate(estimate, tol, label=label).value

    values: Dict[str, float] = {}
    for name, L in (("1", b), ("2", 1.0 - b)):
        values["gag" + name] = run(_interval_gagliardo, L, f"Gagliardo I{name}")
        values["near" + name] = run(_boundary_weight, L, f"exterior I{name}", far=False)
        values["far" + name] = run(_boundary_weight, L, f"exterior I{name}", far=True)

    C = _constant(s)
    phi1 = values["gag1"] + 2.0 * (values["near1"] + values["far1"])
    phi2 = values["gag2"] + 2.0 * (values["near2"] + values["far2"])
    alpha2 = 0.5 * C * (sigma1 * values["gag1"] + sigma2 * values["gag2"])
    alpha1 = C * (sigma1 * values["near1"] + sigma2 * values["near2"])
    return PhiQuantities(phi1=phi1, phi2=phi2, c_star=alpha1 + alpha2, alpha1=alpha1, alpha2=alpha2)


# ============================================================================
# VERIFICATION
# ============================================================================

@dataclass
class EntryCheck:
    i: int
    j: int
    case_class: str
    case: str
    closed: float
    oracle: float
    relative: float
    converged: bool = True


def classify_entry(mesh: InterfaceMesh, i, j):
    """(case class, case) of entry (i, j) in the old-model case analysis"""
    i, j = min(i, j), max(i, j)
    M = mesh.m_interface
    k = j - i
    if k == 0:
        if i == M:
            return "diag", "x_i=b"
        if i + 1 == M:
            return "diag", "x_(i+1)=b"
        if i - 1 == M:
            return "diag", "x_(i-1)=b"
        return "diag", "x_(i-1)>b" if i - 1 > M else "x_(i+1)<b"
    if k == 1:
        if i == M:
            return "superdiag", "x_i=b"
        if j == M:
            return "superdiag", "x_(i+1)=b"
        return "superdiag", "x_i>b" if i > M else "x_(i+1)<b"
    if i == M:
        return "far", "x_i=b"
    if j == M:
        return "far", "x_j=b"
    return "far", "interior"


def verify_matrix(mesh: InterfaceMesh, coeff: CoefficientField, s, tol=None) -> List[EntryCheck]:
    """Every upper-triangle entry of the old-model matrix against the oracle"""
    if mesh.n_cells > Config.VERIFY_MAX_CELLS:
        raise CapacityError(
            f"kernel verification is limited to {Config.VERIFY_MAX_CELLS} cells (got {mesh.n_cells})")
    closed = assemble_old(mesh, coeff, s).entries
    reference, converged = oracle_matrix(mesh, coeff, s, tol, strict=False)
    floor = Config.VERIFY_ZERO_FLOOR * (np.max(np.abs(closed)) or 1.0)
    checks = []
    for i in range(1, mesh.n_interior + 1):
        for j in range(i, mesh.n_interior + 1):
            case_class, case = classify_entry(mesh, i, j)
            value, oracle = closed[i - 1, j - 1], reference[i - 1, j - 1]
            ok = bool(converged[i - 1, j - 1])
            rel = abs(value - oracle) / max(abs(oracle), floor) if ok else math.inf
            checks.append(EntryCheck(i, j, case_class, case, value, oracle, rel, converged=ok))
    return checks


def summarize_checks(checks: List[EntryCheck]) -> Dict[str, float]:
    """Largest relative discrepancy per case class"""
    summary: Dict[str, float] = {}
    for check in checks:
        summary[check.case_class] = max(summary.get(check.case_class, 0.0), check.relative)
    return summary
