"""Closed-form and implicit dispersion laws sigma^2(t) for free quantum
Brownian motion, plus the lower real branch of the Lambert W function.

Law catalogue (lam = thermal de Broglie wavelength, D = kT/b):

  classical       sigma^2 = 2 D t
  semiclassical   sigma^2 = 2 D t + lam^2 ln(6 D t / lam^2) / 3   (large t)
  improved        sigma^2 = 2 D t + lam^2 ln(1 + 6 D t / lam^2) / 3
  implicit        root of sigma^2 - lam^2 ln(1 + 3 sigma^2/lam^2)/3 = 2 D t
  lambert         sigma^2/lam^2 = -1 - W_{-1}[-exp(-1 - 2 D t / lam^2)]
  short-third     sigma^2 = hbar sqrt(t / 3 m b)
  short-exact     sigma^2 = hbar sqrt(t / m b)

All evaluators are pure and deterministic.
"""

import math

import numpy as np

from .core import DispersionCurve, DomainError

LAW_NAMES = (
    "classical",
    "semiclassical",
    "improved",
    "implicit",
    "lambert",
    "short-third",
    "short-exact",
)

_INV_E = math.exp(-1.0)


def sigma2_classical(params, t):
    if t < 0:
        raise DomainError("time must be nonnegative")
    return 2.0 * params.D * t


def semiclassical_time_bound(params):
    """Validity threshold of the large-time semiclassical law."""
    return params.lambda_T**2 / (2.0 * params.D)


def sigma2_semiclassical(params, t):
    lam2 = params.lambda_T**2
    if lam2 == 0.0:
        return sigma2_classical(params, t)
    bound = semiclassical_time_bound(params)
    if not t > bound:
        raise DomainError(
            f"semiclassical law is applicable for large times only: t must exceed "
            f"lambda_T^2 / 2D = {bound!r}, got t = {t!r}"
        )
    return 2.0 * params.D * t + lam2 * math.log(6.0 * params.D * t / lam2) / 3.0


def sigma2_improved(params, t):
    if t < 0:
        raise DomainError("time must be nonnegative")
    lam2 = params.lambda_T**2
    if lam2 == 0.0:
        return 2.0 * params.D * t
    return 2.0 * params.D * t + lam2 * math.log1p(6.0 * params.D * t / lam2) / 3.0


def sigma2_short_time(params, t, kind="third"):
    if t < 0:
        raise DomainError("time must be nonnegative")
    if kind == "third":
        return params.hbar * math.sqrt(t / (3.0 * params.m * params.b))
    if kind == "exact":
        return params.hbar * math.sqrt(t / (params.m * params.b))
    raise DomainError(f"unknown short-time kind {kind!r}")


def sigma2_implicit(params, t, tol=1e-12):
    """Solve sigma^2 - lam^2 ln(1 + 3 sigma^2/lam^2)/3 = 2 D t for sigma^2.

    The left-hand side is monotone increasing and unbounded, so a bracket
    always exists; bisection is refined until the residual drops below
    tol * max(1, 2 D t).
    """
    if t < 0:
        raise DomainError("time must be nonnegative")
    if not tol > 0:
        raise DomainError("tol must be positive")
    lam2 = params.lambda_T**2
    rhs = 2.0 * params.D * t
    if lam2 == 0.0:
        return rhs
    if t == 0.0:
        return 0.0

    def lhs(s2):
        return s2 - lam2 * math.log1p(3.0 * s2 / lam2) / 3.0

    # Lower bound: the short-time law; upper bound grown until bracketed.
    lo = 0.0
    hi = max(rhs + lam2, params.hbar * math.sqrt(t / (params.m * params.b)))
    while lhs(hi) < rhs:
        hi *= 2.0
    scale = max(1.0, rhs)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r = lhs(mid) - rhs
        if r < 0:
            lo = mid
        else:
            hi = mid
        if abs(r) < tol * scale and hi - lo <= 4.0 * np.finfo(float).eps * max(mid, 1.0):
            break
    s2 = 0.5 * (lo + hi)
    # Newton polish; lhs' = 1 - 1/(1 + 3 s2/lam2) is well away from 0 here.
    for _ in range(3):
        deriv = 1.0 - 1.0 / (1.0 + 3.0 * s2 / lam2)
        if deriv <= 0:
            break
        step = (lhs(s2) - rhs) / deriv
        s2 -= step
        if s2 <= 0:
            s2 = 0.5 * (lo + hi)
            break
    assert abs(lhs(s2) - rhs) < max(tol, 1e-10) * scale
    return s2


def lambert_w_minus1(z):
    """Lower real branch W_{-1} of w e^w = z, for z in [-1/e, 0).

    Start from the asymptotic series (square-root series near the branch
    point) and refine with Halley iterations to 1e-14 relative residual.
    """
    z = float(z)
    if not (-_INV_E <= z < 0.0):
        raise DomainError(f"W_-1 requires z in [-1/e, 0), got {z!r}")
    eta = 2.0 * (1.0 + math.e * z)
    if eta <= 0.0:
        return -1.0
    if eta < 0.25:
        # Branch-point series in p = -sqrt(2 (1 + e z)).
        p = -math.sqrt(eta)
        w = -1.0 + p - p * p / 3.0 + 11.0 * p**3 / 72.0 - 43.0 * p**4 / 540.0
    else:
        l1 = math.log(-z)
        l2 = math.log(-l1)
        w = l1 - l2 + l2 / l1
    for _ in range(50):
        ew = math.exp(w)
        f = w * ew - z
        if abs(f) <= 1e-14 * abs(z):
            break
        denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0)
        step = f / denom
        w -= step
        if abs(step) <= 4.0 * np.finfo(float).eps * abs(w):
            break
    return min(w, -1.0)


def scaled_lambert_dispersion(s):
    """Solve u - ln(1 + u) = s for u >= 0 via the W_{-1} branch.

    This is the scaled form of the 'lambert' law: u = sigma^2/lam^2,
    s = 2 D t / lam^2.  For s large enough that exp(-1-s) underflows,
    fall back to Newton on the implicit relation itself.
    """
    if s < 0:
        raise DomainError("scaled time must be nonnegative")
    if s == 0.0:
        return 0.0
    arg = -math.exp(-1.0 - s)
    if arg < 0.0:
        return -1.0 - lambert_w_minus1(arg)
    # exp underflowed (s > ~708): Newton with the asymptotic start.
    u = s + math.log1p(s)
    for _ in range(50):
        f = u - math.log1p(u) - s
        u -= f / (1.0 - 1.0 / (1.0 + u))
        if abs(f) <= 1e-13 * max(1.0, s):
            break
    return u


def sigma2_lambert(params, t):
    if t < 0:
        raise DomainError("time must be nonnegative")
    lam2 = params.lambda_T**2
    if lam2 == 0.0:
        return 2.0 * params.D * t
    return lam2 * scaled_lambert_dispersion(2.0 * params.D * t / lam2)


class DispersionLaw:
    """A named dispersion law bound to a set of physical parameters."""

    def __init__(self, variant, params):
        if variant not in LAW_NAMES:
            raise DomainError(f"unknown dispersion law {variant!r}")
        self.variant = variant
        self.params = params

    def __call__(self, t):
        p = self.params
        if self.variant == "classical":
            return sigma2_classical(p, t)
        if self.variant == "semiclassical":
            return sigma2_semiclassical(p, t)
        if self.variant == "improved":
            return sigma2_improved(p, t)
        if self.variant == "implicit":
            return sigma2_implicit(p, t)
        if self.variant == "lambert":
            return sigma2_lambert(p, t)
        if self.variant == "short-third":
            return sigma2_short_time(p, t, "third")
        return sigma2_short_time(p, t, "exact")

    def curve(self, times):
        times = np.asarray(times, dtype=float)
        values = np.array([self(t) for t in times])
        return DispersionCurve(times, values, self.variant)
