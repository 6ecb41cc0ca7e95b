"""
Exact solution of the local transmission problem -(sigma u')' = x^alpha, u(0) = u(1) = 0
Piecewise closed form with the continuity/flux constant lambda, plus the critical-contrast guard.
"""

from dataclasses import dataclass

import numpy as np

from config import Config
from errors import CriticalContrastError, DomainError, FractransError
from run_logging import log_status


def _contrast(b, sigma1, sigma2):
    """sigma1 (1-b) + sigma2 b and the scale it is judged against"""
    return sigma1 * (1.0 - b) + sigma2 * b, abs(sigma1) * (1.0 - b) + abs(sigma2) * b


def check_contrast(b, sigma1, sigma2, context="local problem"):
    """Raise CriticalContrastError on the critical ratio; warn inside the near-critical band"""
    gap, scale = _contrast(b, sigma1, sigma2)
    relative = abs(gap) / scale
    if relative <= Config.CRITICAL_TOLERANCE:
        raise CriticalContrastError(
            f"{context}: sigma2/sigma1 = {sigma2 / sigma1:g} equals -(1-b)/b = {-(1.0 - b) / b:g}; "
            "the local operator is not injective (its kernel is spanned by phi)")
    if relative <= Config.NEAR_CRITICAL_BAND:
        log_status("EXACT", f"near-critical contrast (relative gap {relative:.2e}); expect poor conditioning", "warn")
    return relative


@dataclass(frozen=True)
class LocalExactSolution:
    b: float
    sigma1: float
    sigma2: float
    alpha: float
    lam: float

    @property
    def _denominator(self):
        return (self.alpha + 1.0) * (self.alpha + 2.0)

    def value(self, x):
        xx = np.asarray(x, dtype=float)
        a, s1, s2, lam = self.alpha, self.sigma1, self.sigma2, self.lam
        p = np.power(np.clip(xx, 0.0, None), a + 2.0)
        u1 = -p / (s1 * self._denominator) + lam * xx
        u2 = (1.0 - p) / (s2 * self._denominator) + lam * s1 / s2 * (xx - 1.0)
        out = np.where(xx <= self.b, u1, u2)
        return float(out) if out.ndim == 0 else out

    def derivative(self, x):
        xx = np.asarray(x, dtype=float)
        a, s1, s2, lam = self.alpha, self.sigma1, self.sigma2, self.lam
        p = np.power(np.clip(xx, 0.0, None), a + 1.0) / (a + 1.0)
        out = np.where(xx < self.b, -p / s1 + lam, -p / s2 + lam * s1 / s2)
        return float(out) if out.ndim == 0 else out

    def second_derivative(self, x):
        xx = np.asarray(x, dtype=float)
        p = np.power(xx, self.alpha)
        out = np.where(xx < self.b, -p / self.sigma1, -p / self.sigma2)
        return float(out) if out.ndim == 0 else out

    def flux(self, x):
        """sigma(x) u'(x), continuous across b"""
        xx = np.asarray(x, dtype=float)
        sigma = np.where(xx < self.b, self.sigma1, self.sigma2)
        return sigma * self.derivative(xx)

    @property
    def interface_value(self) -> float:
        return self.value(self.b)


def build_exact(b, sigma1, sigma2, alpha) -> LocalExactSolution:
    if not (0.0 < b < 1.0):
        raise DomainError(f"interface b={b} outside (0, 1)")
    if alpha <= -0.5:
        raise DomainError(f"source exponent alpha={alpha} must exceed -1/2")
    check_contrast(b, sigma1, sigma2)
    gap, _ = _contrast(b, sigma1, sigma2)
    bp = b ** (alpha + 2.0)
    lam = (sigma1 * (1.0 - bp) + sigma2 * bp) / (sigma1 * (alpha + 1.0) * (alpha + 2.0) * gap)
    return LocalExactSolution(b=b, sigma1=sigma1, sigma2=sigma2, alpha=alpha, lam=lam)


def critical_flux_gap(b, sigma1, sigma2) -> float:
    """sigma1 phi'(b-) - sigma2 phi'(b+): zero exactly when phi solves the homogeneous problem"""
    return sigma1 / b + sigma2 / (1.0 - b)


def lifting_in_kernel(b, sigma1, sigma2, tol=None) -> bool:
    """phi vanishes at 0 and 1 by construction, so it lies in the kernel iff the flux matches"""
    tol = Config.CRITICAL_TOLERANCE if tol is None else tol
    return abs(critical_flux_gap(b, sigma1, sigma2)) <= tol * (abs(sigma1) / b + abs(sigma2) / (1.0 - b))


def interface_value_identity(b, sigma1, sigma2, f, verify=True) -> float:
    """u(b) = (int f phi) / c~, checked against the closed-form solution"""
    from assembly import load_phi
    from lifting import c_tilde

    check_contrast(b, sigma1, sigma2, context="interface identity")
    value = load_phi(f, b) / c_tilde(b, sigma1, sigma2)
    if verify:
        reference = build_exact(b, sigma1, sigma2, f.alpha).interface_value
        if abs(value - reference) > 1e-10 * max(1.0, abs(reference)):
            raise FractransError(f"interface identity mismatch: {value!r} vs closed form {reference!r}")
    return value
