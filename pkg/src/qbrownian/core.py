"""Physical parameters, grids and density/phase-space containers.

Everything here is an immutable value object; all operations are pure
functions, so the containers can be shared freely between threads.
Quadrature is trapezoidal throughout and grids are expected to span at
least six standard deviations of whatever they hold.
"""

from dataclasses import dataclass
from functools import cached_property
import math
import warnings

import numpy as np


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class IntegrityError(RuntimeError):
    """A solver produced values that violate a structural invariant."""


class StabilityError(RuntimeError):
    """A numerical scheme would be (or became) unstable."""


NORMALIZATION_TOL = 1e-8


def trapezoid(values, dx, axis=-1):
    return np.trapezoid(values, dx=dx, axis=axis)


@dataclass(frozen=True)
class PhysicalParams:
    """Mass, friction, thermal energy and hbar, with derived scales.

    Units are the caller's own consistent system.  hbar = 0 is the
    admissible classical limit.
    """

    m: float
    b: float
    kT: float
    hbar: float

    def __post_init__(self):
        for name in ("m", "b", "kT"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.hbar < 0:
            raise DomainError(f"hbar must be nonnegative, got {self.hbar!r}")

    @property
    def D(self):
        """Einstein diffusion constant kT/b."""
        return self.kT / self.b

    @property
    def lambda_T(self):
        """Thermal de Broglie wavelength hbar / (2 sqrt(m kT))."""
        return self.hbar / (2.0 * math.sqrt(self.m * self.kT))

    @property
    def beta(self):
        """Inverse thermal energy 1/kT."""
        return 1.0 / self.kT

    @property
    def is_classical(self):
        return self.hbar == 0.0


def derive_params(m, b, kT, hbar):
    """Validate raw inputs and return a :class:`PhysicalParams` record."""
    return PhysicalParams(float(m), float(b), float(kT), float(hbar))


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform 1D grid with n >= 8 nodes on [x_min, x_max]."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 8:
            raise DomainError(f"grid needs at least 8 nodes, got {self.n}")
        if not self.x_max > self.x_min:
            raise DomainError("grid requires x_max > x_min")

    @property
    def h(self):
        return (self.x_max - self.x_min) / (self.n - 1)

    @cached_property
    def nodes(self):
        x = np.linspace(self.x_min, self.x_max, self.n)
        x.flags.writeable = False
        return x

    @property
    def width(self):
        return self.x_max - self.x_min


def _freeze(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class DensityProfile:
    """Nonnegative probability density on a SpatialGrid, trapz-normalized."""

    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.shape != (self.grid.n,):
            raise DomainError("density values do not match the grid")
        if not np.all(np.isfinite(v)):
            raise IntegrityError("density contains non-finite values")
        if np.any(v < 0):
            raise IntegrityError("density contains negative values")
        mass = trapezoid(v, self.grid.h)
        if abs(mass - 1.0) > NORMALIZATION_TOL:
            raise IntegrityError(f"density not normalized: integral = {mass!r}")

    @classmethod
    def from_values(cls, grid, values):
        """Build a profile, clipping tiny negatives and renormalizing.

        Negatives below -1e-10 * max signal a solver blow-up and raise.
        """
        v = np.asarray(values, dtype=float)
        vmax = float(np.max(v)) if v.size else 0.0
        if np.any(v < -1e-10 * max(vmax, 1e-300)):
            raise IntegrityError("density has negative values beyond the clip tolerance")
        v = np.clip(v, 0.0, None)
        mass = trapezoid(v, grid.h)
        if not mass > 0:
            raise IntegrityError("density has zero mass")
        return cls(grid, _freeze(v / mass))

    @classmethod
    def gaussian(cls, grid, sigma2, mean=0.0):
        x = grid.nodes
        v = np.exp(-((x - mean) ** 2) / (2.0 * sigma2)) / math.sqrt(2.0 * math.pi * sigma2)
        return cls.from_values(grid, v)

    def mass(self):
        return trapezoid(self.values, self.grid.h)


@dataclass(frozen=True)
class WignerField:
    """Real function W(x, p) on a uniform 2D grid, trapz-normalized.

    W may be negative; only finiteness and normalization are enforced.
    """

    x_grid: SpatialGrid
    p_grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.shape != (self.x_grid.n, self.p_grid.n):
            raise DomainError("Wigner values do not match the grids")
        if not np.all(np.isfinite(v)):
            raise IntegrityError("Wigner field contains non-finite values")
        mass = self.mass()
        if abs(mass - 1.0) > NORMALIZATION_TOL:
            raise IntegrityError(f"Wigner field not normalized: integral = {mass!r}")

    @classmethod
    def from_values(cls, x_grid, p_grid, values, normalize=True):
        v = np.asarray(values, dtype=float)
        if normalize:
            mass = trapezoid(trapezoid(v, p_grid.h, axis=1), x_grid.h)
            if not mass > 0:
                raise IntegrityError("Wigner field has nonpositive mass")
            v = v / mass
        return cls(x_grid, p_grid, _freeze(v))

    @classmethod
    def gaussian_product(cls, x_grid, p_grid, sigma2_x, sigma2_p, x0=0.0, p0=0.0):
        x = x_grid.nodes[:, None]
        p = p_grid.nodes[None, :]
        v = np.exp(-((x - x0) ** 2) / (2 * sigma2_x) - ((p - p0) ** 2) / (2 * sigma2_p))
        return cls.from_values(x_grid, p_grid, v)

    def mass(self):
        return trapezoid(trapezoid(self.values, self.p_grid.h, axis=1), self.x_grid.h)


@dataclass(frozen=True)
class Potential:
    """Polynomial potential V(x) of degree <= 6, coefficients ascending.

    Derivatives up to third order are exact polynomial arithmetic.
    """

    coeffs: tuple

    def __post_init__(self):
        c = tuple(float(ci) for ci in self.coeffs)
        if len(c) > 7:
            raise DomainError("potential degree must be <= 6")
        object.__setattr__(self, "coeffs", c)

    @staticmethod
    def _derive(coeffs):
        return tuple(k * coeffs[k] for k in range(1, len(coeffs)))

    @cached_property
    def _d1(self):
        return self._derive(self.coeffs)

    @cached_property
    def _d2(self):
        return self._derive(self._d1)

    @cached_property
    def _d3(self):
        return self._derive(self._d2)

    @staticmethod
    def _eval(coeffs, x):
        if not coeffs:
            return np.zeros_like(np.asarray(x, dtype=float))
        return np.polynomial.polynomial.polyval(x, coeffs)

    def v(self, x):
        return self._eval(self.coeffs, x)

    def dv(self, x):
        return self._eval(self._d1, x)

    def d2v(self, x):
        return self._eval(self._d2, x)

    def d3v(self, x):
        return self._eval(self._d3, x)

    @property
    def dv_is_zero(self):
        return all(c == 0.0 for c in self._d1)

    @property
    def d3v_is_zero(self):
        return all(c == 0.0 for c in self._d3)

    @classmethod
    def zero(cls):
        return cls(())

    @classmethod
    def harmonic(cls, m, omega):
        return cls((0.0, 0.0, 0.5 * m * omega**2))


@dataclass(frozen=True)
class ReferenceDensity:
    """Closed-form classical reference density.

    kind 'free': spreading Gaussian with variance 2 D t (t > 0 only; at
    t = 0 it degenerates to a delta function and is rejected).
    kind 'boltzmann': exp(-V/kT)/Z, normalized by quadrature on the
    working grid.
    """

    kind: str
    params: PhysicalParams
    potential: Potential = None

    def __post_init__(self):
        if self.kind not in ("free", "boltzmann"):
            raise DomainError(f"unknown reference density kind {self.kind!r}")
        if self.kind == "boltzmann" and self.potential is None:
            raise DomainError("boltzmann reference requires a potential")

    def evaluate(self, x, t):
        """Raw (unnormalized for 'boltzmann') density values at nodes x."""
        x = np.asarray(x, dtype=float)
        if self.kind == "free":
            if not t > 0:
                raise DomainError("free-particle reference is singular at t <= 0")
            var = 2.0 * self.params.D * t
            return np.exp(-(x**2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)
        return np.exp(-self.potential.v(x) / self.params.kT)

    def profile(self, grid, t=None):
        return DensityProfile.from_values(grid, self.evaluate(grid.nodes, t))


@dataclass(frozen=True)
class DispersionCurve:
    """Time-ordered (t, sigma2) samples with a provenance label."""

    t: np.ndarray
    sigma2: np.ndarray
    label: str

    def __post_init__(self):
        t = _freeze(self.t)
        s = _freeze(self.sigma2)
        if t.shape != s.shape or t.ndim != 1:
            raise DomainError("curve arrays must be matching 1D arrays")
        if np.any(np.diff(t) <= 0):
            raise DomainError("curve times must be strictly increasing")
        if np.any(s < 0):
            raise IntegrityError("curve has negative dispersion values")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "sigma2", s)


def moments(rho):
    """Trapezoidal (mean, sigma2, excess kurtosis) of a density profile.

    Warns when sigma2 is below 4 h^2 (under-resolved on the grid).
    """
    x = rho.grid.nodes
    h = rho.grid.h
    v = rho.values
    mean = trapezoid(x * v, h)
    d = x - mean
    sigma2 = trapezoid(d**2 * v, h)
    if sigma2 < 4.0 * h * h:
        warnings.warn("density is under-resolved: sigma2 < 4 h^2", RuntimeWarning)
    mu4 = trapezoid(d**4 * v, h)
    return mean, sigma2, mu4 / sigma2**2 - 3.0


def marginal_x(w, return_renorm=False):
    """Position density rho(x) = integral of W over p, renormalized.

    Negative marginal values below -1e-10 (relative to the peak) signal a
    solver blow-up and raise; tiny negatives are clipped to zero.  The
    renormalization factor is available as a diagnostic.
    """
    raw = trapezoid(w.values, w.p_grid.h, axis=1)
    peak = float(np.max(raw))
    if np.any(raw < -1e-10 * max(peak, 1e-300)):
        raise IntegrityError("marginal density has significantly negative values")
    raw = np.clip(raw, 0.0, None)
    mass = trapezoid(raw, w.x_grid.h)
    profile = DensityProfile(w.x_grid, _freeze(raw / mass))
    if return_renorm:
        return profile, 1.0 / mass
    return profile


def marginal_p(w):
    """Momentum density: integral of W over x (as a profile on the p grid)."""
    raw = np.clip(trapezoid(w.values, w.x_grid.h, axis=0), 0.0, None)
    mass = trapezoid(raw, w.p_grid.h)
    return DensityProfile(w.p_grid, _freeze(raw / mass))
