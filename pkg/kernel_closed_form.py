"""
Closed-form building blocks of the P1 fractional stiffness entries
H-family, S1/S2 interface corrections, L1/L2 far-field halves and the
constant-coefficient entries, with logarithmic formulas at s = 1/2.

Everything is evaluated at unit mesh size and scaled by h^(1-2s).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma, xlogy

from config import Config
from errors import DomainError

LOG2 = math.log(2.0)
LOG3 = math.log(3.0)


# ============================================================================
# PARAMETERS
# ============================================================================

@dataclass(frozen=True)
class KernelParams:
    """Mesh size and fractional order"""
    h: float
    s: float

    def __post_init__(self):
        if not (0.0 < self.h <= 1.0):
            raise DomainError(f"mesh size h={self.h} outside (0, 1]")
        if not (0.0 < self.s < 1.0):
            raise DomainError(f"fractional order s={self.s} outside (0, 1)")

    @property
    def is_half(self) -> bool:
        return abs(self.s - 0.5) <= Config.BRANCH_TOLERANCE

    @property
    def branch(self) -> str:
        return "half" if self.is_half else "generic"

    @property
    def scale(self) -> float:
        """h^(1-2s); exactly 1 on the s = 1/2 branch"""
        if self.is_half:
            return 1.0
        return math.exp((1.0 - 2.0 * self.s) * math.log(self.h))


@dataclass(frozen=True)
class KernelValueSet:
    H: float
    H1: float
    H2: float
    H3: float
    H4: float
    H5: float
    H6: float
    H7: float

    def as_dict(self):
        return dict(self.__dict__)


# ============================================================================
# HELPERS
# ============================================================================

def _power(base, exponent):
    """base^exponent for base >= 0 through exp/log; 0 maps to 0 (exponent > 0 here)"""
    base = np.asarray(base, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(base > 0.0, np.exp(exponent * np.log(np.where(base > 0.0, base, 1.0))), 0.0)
    return out if out.ndim else float(out)


def _unit_H(s):
    return 1.0 / (2.0 * s * (1.0 - s) * (1.0 - 2.0 * s) * (3.0 - 2.0 * s))


def _as_result(values, like):
    return float(values) if np.ndim(like) == 0 else values


# ============================================================================
# OPERATIONS
# ============================================================================

def fractional_constant(s: float) -> float:
    """C(s) = 2^(2s) s Gamma(s + 1/2) / (sqrt(pi) Gamma(1 - s))"""
    if not (0.0 < s < 1.0):
        raise DomainError(f"fractional order s={s} outside (0, 1)")
    return float(4.0 ** s * s * gamma(s + 0.5) / (math.sqrt(math.pi) * gamma(1.0 - s)))


def eval_H_family(p: KernelParams) -> KernelValueSet:
    s = p.s
    H1 = 1.0 / (s * (3.0 - 2.0 * s))
    H3 = 1.0 / ((1.0 - s) * (3.0 - 2.0 * s))
    H5 = 1.0 / (2.0 * s * (1.0 - s) * (3.0 - 2.0 * s))
    H6 = (s - 2.0 + 2.0 ** (1.0 - 2.0 * s)) / (s * (1.0 - s) * (3.0 - 2.0 * s))

    if p.is_half:
        H = math.nan
        H2 = -5.0 + 8.0 * LOG2
        H4 = 3.0 - 4.0 * LOG2
        H7 = 1.0 - 16.0 * LOG2 + 9.0 * LOG3
    else:
        H = _unit_H(s)
        H2 = 2.0 * H * (-2.0 * s * s + 7.0 * s - 7.0 + 2.0 ** (3.0 - 2.0 * s))
        H4 = 2.0 * H * (2.0 * s * s - 5.0 * s + 4.0 - 2.0 ** (2.0 - 2.0 * s))
        H7 = H * (4.0 * s * s - s * (14.0 - 2.0 ** (4.0 - 2.0 * s)) + 13.0
                  + 3.0 ** (3.0 - 2.0 * s) - 5.0 * 2.0 ** (3.0 - 2.0 * s))

    c = p.scale
    return KernelValueSet(H * c, H1 * c, H2 * c, H3 * c, H4 * c, H5 * c, H6 * c, H7 * c)


def eval_S1(p: KernelParams, r):
    """Exterior correction for a hat at distance r > h from the interface"""
    rr = np.asarray(r, dtype=float) / p.h
    if np.any(rr <= 1.0):
        raise DomainError(f"S1 needs r > h (got r/h = {np.min(rr):g})")
    s = p.s
    if p.is_half:
        val = (-2.0 * xlogy((1.0 - rr) ** 2, rr - 1.0) + 2.0 * xlogy((1.0 + rr) ** 2, 1.0 + rr)
               - 8.0 * rr * (np.log(rr) + 0.5))
    else:
        e3, e2 = 3.0 - 2.0 * s, 2.0 - 2.0 * s
        val = 2.0 * _unit_H(s) * (_power(1.0 + rr, e3) + 2.0 * _power(rr, e2) * (2.0 * s - 3.0)
                                  - _power(rr - 1.0, e3))
    return _as_result(val * p.scale, r)


def eval_S2(p: KernelParams, r):
    """Exterior correction for a neighbouring hat pair whose far node sits r > h from b"""
    rr = np.asarray(r, dtype=float) / p.h
    if np.any(rr <= 1.0):
        raise DomainError(f"S2 needs r > h (got r/h = {np.min(rr):g})")
    s = p.s
    if p.is_half:
        val = (2.0 * rr * xlogy(1.0 - rr, rr - 1.0) + 2.0 * rr * (rr - 1.0) * np.log(rr)
               + 1.0 - 2.0 * rr)
    else:
        e2 = 2.0 - 2.0 * s
        val = _unit_H(s) * (_power(rr, e2) * (2.0 * s - 3.0 + 2.0 * rr)
                            + _power(rr - 1.0, e2) * (2.0 * s - 1.0 - 2.0 * rr))
    return _as_result(val * p.scale, r)


def _check_far(k):
    kk = np.asarray(k, dtype=float)
    if np.any(kk < 2):
        raise DomainError("far-field kernels need node offset k >= 2")
    return kk


def eval_L1(p: KernelParams, k):
    """Far entry part from the half of the row hat that lies away from the column hat"""
    kk = _check_far(k)
    s = p.s
    if p.is_half:
        val = (xlogy(1.0 - kk ** 2, kk - 1.0) + xlogy((kk + 2.0) ** 2, kk + 2.0)
               - (3.0 * kk ** 2 + 8.0 * kk + 5.0) * np.log(kk + 1.0)
               + 3.0 * kk * (kk + 4.0 / 3.0) * np.log(kk))
    else:
        e3, e2 = 3.0 - 2.0 * s, 2.0 - 2.0 * s
        val = _unit_H(s) * (3.0 * _power(kk, e3) - 2.0 * _power(kk + 1.0, e3) + _power(kk + 2.0, e3)
                            - (kk - 2.0 * s + 2.0) * _power(kk - 1.0, e2)
                            + (6.0 - 4.0 * s) * _power(kk, e2)
                            - (kk - 2.0 * s + 4.0) * _power(kk + 1.0, e2))
    return _as_result(val * p.scale, k)


def eval_L2(p: KernelParams, k):
    """Far entry part from the half of the row hat facing the column hat"""
    kk = _check_far(k)
    s = p.s
    if p.is_half:
        val = (xlogy((kk - 2.0) ** 2, kk - 2.0) + (-3.0 * kk ** 2 + 8.0 * kk - 5.0) * np.log(kk - 1.0)
               + (1.0 - kk ** 2) * np.log(kk + 1.0) + 3.0 * kk * (kk - 4.0 / 3.0) * np.log(kk))
    else:
        e3, e2 = 3.0 - 2.0 * s, 2.0 - 2.0 * s
        val = _unit_H(s) * (_power(kk - 2.0, e3) - 2.0 * _power(kk - 1.0, e3) + 3.0 * _power(kk, e3)
                            - (kk + 2.0 * s - 4.0) * _power(kk - 1.0, e2)
                            + (4.0 * s - 6.0) * _power(kk, e2)
                            - (kk + 2.0 * s - 2.0) * _power(kk + 1.0, e2))
    return _as_result(val * p.scale, k)


_FIVE_POINT = ((2.0, 1.0), (1.0, -4.0), (0.0, 6.0), (-1.0, -4.0), (-2.0, 1.0))


def bicher_entry(p: KernelParams, k):
    """Constant-coefficient entry (sigma factored out, C(s)/2 not applied) for node offset k >= 0"""
    kk = np.asarray(k, dtype=float)
    if np.any(kk < 0):
        raise DomainError("node offset must be non-negative")
    s = p.s
    out = np.zeros_like(kk)

    far = kk >= 2
    if np.any(far):
        kf = kk[far] if kk.ndim else kk
        if p.is_half:
            val = sum(c * xlogy((kf + m) ** 2, kf + m) for m, c in _FIVE_POINT)
        else:
            e3 = 3.0 - 2.0 * s
            val = _unit_H(s) * sum(c * _power(kf + m, e3) for m, c in _FIVE_POINT)
        if kk.ndim:
            out[far] = val
        else:
            out = np.asarray(val, dtype=float)

    if p.is_half:
        diag, first = 8.0 * LOG2, 9.0 * LOG3 - 16.0 * LOG2
    else:
        H = _unit_H(s)
        diag = H * (2.0 ** (4.0 - 2.0 * s) - 8.0)
        first = H * (3.0 ** (3.0 - 2.0 * s) + 7.0 - 2.0 ** (5.0 - 2.0 * s))
    out = np.where(kk == 0, diag, np.where(kk == 1, first, out))
    return _as_result(out * p.scale, k)


def bicher_row(p: KernelParams, n: int) -> np.ndarray:
    """Entries for offsets 0..n-1 (first row of the Toeplitz constant-coefficient matrix)"""
    return np.asarray(bicher_entry(p, np.arange(n, dtype=float)), dtype=float)
