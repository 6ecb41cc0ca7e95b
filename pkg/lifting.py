"""
Interface liftings and interface constants
phi (piecewise affine) and phi^s (fractional power), the local constant c~,
the classical Phi-ratio, and the two parts alpha1/alpha2 of c*.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

from config import Config
from errors import ConfigurationError, DomainError
from kernel_closed_form import fractional_constant
from mesh_interface import InterfaceMesh
from quadrature import graded_rule, join_rules


# ============================================================================
# LIFTINGS
# ============================================================================

def _check_b(b):
    if not (0.0 < b < 1.0):
        raise DomainError(f"interface b={b} outside (0, 1)")


@dataclass(frozen=True)
class LocalLifting:
    """x/b on [0, b], (1-x)/(1-b) on [b, 1], zero outside"""
    b: float

    def __post_init__(self):
        _check_b(self.b)

    def value(self, x):
        xx = np.asarray(x, dtype=float)
        b = self.b
        out = np.where(xx <= b, xx / b, (1.0 - xx) / (1.0 - b))
        out = np.where((xx < 0.0) | (xx > 1.0), 0.0, out)
        return float(out) if out.ndim == 0 else out

    def derivative(self, x):
        xx = np.asarray(x, dtype=float)
        out = np.where(xx < self.b, 1.0 / self.b, -1.0 / (1.0 - self.b))
        out = np.where((xx < 0.0) | (xx > 1.0), 0.0, out)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FractionalLifting:
    """(x/b)^s on [0, b], ((1-x)/(1-b))^s on [b, 1], zero outside"""
    b: float
    s: float

    def __post_init__(self):
        _check_b(self.b)
        if not (0.5 < self.s < 1.0):
            raise DomainError(f"fractional lifting needs s in (1/2, 1), got {self.s}")

    def value(self, x):
        xx = np.asarray(x, dtype=float)
        b, s = self.b, self.s
        left = np.power(np.clip(xx, 0.0, None) / b, s)
        right = np.power(np.clip(1.0 - xx, 0.0, None) / (1.0 - b), s)
        out = np.where(xx <= b, left, right)
        out = np.where((xx < 0.0) | (xx > 1.0), 0.0, out)
        return float(out) if out.ndim == 0 else out

    def derivative(self, x):
        xx = np.asarray(x, dtype=float)
        b, s = self.b, self.s
        if np.any((xx <= 0.0) | (xx >= 1.0) | (xx == b)):
            raise DomainError("phi^s derivative is undefined at 0, b and 1")
        left = s / b ** s * np.power(np.where(xx < b, xx, 1.0), s - 1.0)
        right = -s / (1.0 - b) ** s * np.power(np.where(xx > b, 1.0 - xx, 1.0), s - 1.0)
        out = np.where(xx < b, left, right)
        return float(out) if out.ndim == 0 else out


def eval_phi(lifting: LocalLifting, x):
    return lifting.value(x)


def eval_phi_s(lifting: FractionalLifting, x):
    return lifting.value(x)


def eval_phi_s_deriv(lifting: FractionalLifting, x):
    return lifting.derivative(x)


def interpolant_coeffs(mesh: InterfaceMesh, lifting) -> np.ndarray:
    """Nodal values of the lifting at the interior nodes (entry M equals 1)"""
    if abs(mesh.b - lifting.b) > 1e-14:
        raise ConfigurationError(f"lifting interface b={lifting.b} is not node M of mesh {mesh.describe()}")
    coeffs = np.asarray(lifting.value(mesh.interior_nodes), dtype=float)
    coeffs[mesh.interface_slot] = 1.0
    return coeffs


# ============================================================================
# LOCAL CONSTANTS
# ============================================================================

def c_tilde(b, sigma1, sigma2) -> float:
    """(sigma1 (1-b) + sigma2 b) / (b (1-b))"""
    _check_b(b)
    return (sigma1 * (1.0 - b) + sigma2 * b) / (b * (1.0 - b))


def contrast_scale(b, sigma1, sigma2) -> float:
    return abs(sigma1) / b + abs(sigma2) / (1.0 - b)


def contrast_is_critical(b, sigma1, sigma2, tol=None) -> bool:
    """|c~| below tol times the contrast scale: sigma2/sigma1 = -(1-b)/b"""
    tol = Config.CRITICAL_TOLERANCE if tol is None else tol
    return abs(c_tilde(b, sigma1, sigma2)) <= tol * contrast_scale(b, sigma1, sigma2)


def _check_open_order(s):
    if not (0.5 < s < 1.0) or abs(s - 0.5) <= Config.BRANCH_TOLERANCE:
        raise DomainError(f"order s={s} must lie in (1/2, 1) away from the branch point")


def _q_part(length, s):
    """Gagliardo integral of the affine lifting on a subinterval of the given length"""
    return length ** (1.0 - 2.0 * s) / ((1.0 - s) * (3.0 - 2.0 * s))


def _r_part(length, s):
    """2 * integral of the affine lifting squared against the two-sided exterior weight"""
    L = length
    own = L ** (1.0 - 2.0 * s) / (s * (3.0 - 2.0 * s))
    poly = -2.0 * L * L * s * s + 3.0 * L * L * s - L * L + 2.0 * L * s - L - 1.0
    far = ((1.0 - L) ** (1.0 - 2.0 * s) * poly + 1.0) / (
        L * L * s * (1.0 - s) * (1.0 - 2.0 * s) * (3.0 - 2.0 * s))
    return own + far


def phi_quantities_classical(b, s):
    """(Phi_1, Phi_2) of the affine lifting, Q_i + R_i"""
    _check_b(b)
    _check_open_order(s)
    phi1 = _q_part(b, s) + _r_part(b, s)
    phi2 = _q_part(1.0 - b, s) + _r_part(1.0 - b, s)
    return phi1, phi2


def phi_ratio_classical(b, s) -> float:
    phi1, phi2 = phi_quantities_classical(b, s)
    return phi1 / phi2


# ============================================================================
# c* = alpha1 + alpha2
# ============================================================================

def gagliardo_unit_power(s) -> float:
    """
    Gagliardo integral of t -> t^s over (0, 1)^2

    The change of variables y = v x reduces it to 2 * int_0^1 (1 - v^s)^2 (1 - v)^(-1-2s) dv,
    which is a combination of Beta functions continued to negative arguments.
    """
    _check_open_order(s)
    bracket = 2.0 * gamma(1.0 + s) / (gamma(1.0 + 2.0 * s) * gamma(1.0 - s)) - 1.0
    return float(-1.0 / s + 2.0 * math.pi / math.sin(2.0 * math.pi * s) * bracket)


def alpha2_closed_form(b, sigma1, sigma2, s) -> float:
    """(C(s)/2) [sigma1 b^(1-2s) + sigma2 (1-b)^(1-2s)] G(s): the two I_k x I_k Gagliardo parts of phi^s"""
    _check_b(b)
    weight = sigma1 * b ** (1.0 - 2.0 * s) + sigma2 * (1.0 - b) ** (1.0 - 2.0 * s)
    return 0.5 * fractional_constant(s) * weight * gagliardo_unit_power(s)


def _lifting_rule(b):
    levels = Config.LIFTING_GRADING_LEVELS
    order = Config.LIFTING_GAUSS_POINTS
    return (graded_rule(0.0, b, True, True, levels, order),
            graded_rule(b, 1.0, True, True, levels, order))


def alpha1(b, sigma1, sigma2, s, sigma3=0.0) -> float:
    """
    Exterior part of c*: C(s) int_I |phi^s|^2 omega_sigma

    omega_sigma(x) = (sigma_left x^(-2s) + sigma_right (1-x)^(-2s)) / (2s), with
    (sigma_left, sigma_right) = (sigma1, sigma3) on I1 and (sigma3, sigma2) on I2.
    """
    lifting = FractionalLifting(b, s)
    rule1, rule2 = _lifting_rule(b)
    two_s = 2.0 * s

    def left(x):
        return lifting.value(x) ** 2 * (sigma1 * x ** -two_s + sigma3 * (1.0 - x) ** -two_s) / two_s

    def right(x):
        return lifting.value(x) ** 2 * (sigma3 * x ** -two_s + sigma2 * (1.0 - x) ** -two_s) / two_s

    return fractional_constant(s) * (rule1.integrate(left) + rule2.integrate(right))


def c_star(b, sigma1, sigma2, s) -> float:
    """a(phi^s, phi^s) for the cross coefficient sigma3 = 0"""
    return alpha1(b, sigma1, sigma2, s) + alpha2_closed_form(b, sigma1, sigma2, s)


def c_star_scale(b, sigma1, sigma2, s) -> float:
    """c* evaluated with |sigma1|, |sigma2|: the size c* is compared against"""
    return c_star(b, abs(sigma1), abs(sigma2), s)


def weak_coercivity_margin(b, sigma1, sigma2, s) -> float:
    """c* / c*(|sigma|); zero exactly when the interface equation loses solvability"""
    return c_star(b, sigma1, sigma2, s) / c_star_scale(b, sigma1, sigma2, s)


@dataclass(frozen=True)
class InterfaceConstants:
    b: float
    s: float
    c_tilde: float
    phi_ratio: float
    alpha1: float
    alpha2: float
    critical: bool

    @property
    def c_star(self) -> float:
        return self.alpha1 + self.alpha2


def interface_constants(b, sigma1, sigma2, s) -> InterfaceConstants:
    return InterfaceConstants(
        b=b, s=s,
        c_tilde=c_tilde(b, sigma1, sigma2),
        phi_ratio=phi_ratio_classical(b, s),
        alpha1=alpha1(b, sigma1, sigma2, s),
        alpha2=alpha2_closed_form(b, sigma1, sigma2, s),
        critical=contrast_is_critical(b, sigma1, sigma2),
    )


def lifting_distance_h1(b, s) -> float:
    """H^1 distance between phi^s and phi (graded quadrature)"""
    frac, loc = FractionalLifting(b, s), LocalLifting(b)
    rule = join_rules(*_lifting_rule(b))
    value = rule.integrate(lambda x: (frac.value(x) - loc.value(x)) ** 2)
    slope = rule.integrate(lambda x: (frac.derivative(x) - loc.derivative(x)) ** 2)
    return math.sqrt(value + slope)
