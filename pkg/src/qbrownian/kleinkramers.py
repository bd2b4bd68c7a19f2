"""2D (x, p) finite-difference integrator for Wigner-function dynamics
of a Brownian particle, with variant effective momentum-diffusion
temperatures Theta(x):

  classical   Theta = kT
  curvature   Theta = kT + hbar^2 V''(x) / (12 m kT)
  reference   Theta = kT - (hbar^2 / 12 m) d^2 ln rho_ref / dx^2
  nonlinear   Theta = kT - (hbar^2 / 12 m) d^2 ln rho / dx^2,  rho = int W dp

The evolution is

  dW/dt = -(p/m) dW/dx + V' dW/dp - (hbar^2/24) V''' d^3W/dp^3
          + b d/dp [ (p/m) W + Theta(x) dW/dp ]

with the hbar^2 streaming term omitted for the classical variant.  All
first- and second-order terms are stepped in conservative face-flux form
with zero-flux walls and half-width wall cells, so the trapezoidal mass
is conserved structurally; the third-derivative term uses a pointwise
5-point antisymmetric stencil (its mass defect is at tail level for
fields spanning six thermal widths).  Time stepping is classical RK4;
the nonlinear variant refreshes its marginal at every stage.
"""

from dataclasses import dataclass
import math

import numpy as np

from .core import (
    DispersionCurve,
    DomainError,
    IntegrityError,
    Potential,
    ReferenceDensity,
    StabilityError,
    WignerField,
    marginal_p,
    marginal_x,
    moments,
    trapezoid,
)
from .functionals import DEFAULT_FLOOR, log_curvature_values

VARIANTS = ("classical", "curvature", "reference", "nonlinear")

CFL_SAFETY = 0.4


@dataclass(frozen=True)
class KramersModel:
    variant: str
    params: object
    potential: Potential = None
    reference: ReferenceDensity = None
    floor: float = DEFAULT_FLOOR
    x_grid: object = None  # optional working grid for construction checks

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown variant {self.variant!r}")
        if self.potential is None:
            object.__setattr__(self, "potential", Potential.zero())
        if self.variant == "reference" and self.reference is None:
            raise DomainError("reference variant requires a ReferenceDensity")
        if self.variant == "curvature" and self.x_grid is not None:
            p = self.params
            if p.hbar > 0.0:
                theta = p.kT + p.hbar**2 * self.potential.d2v(self.x_grid.nodes) / (
                    12.0 * p.m * p.kT
                )
                if np.any(theta <= 0.0):
                    i = int(np.argmin(theta))
                    raise DomainError(
                        "curvature variant has nonpositive effective temperature "
                        f"{theta[i]!r} at x = {self.x_grid.nodes[i]!r}: the potential "
                        "is too anticonvex for this hbar (backward momentum diffusion)"
                    )


def theta_field(model, x_grid, t=None, marginal_values=None):
    """Effective momentum-diffusion temperature Theta(x) on the x grid.

    For the nonlinear variant `marginal_values` must hold the current
    x-marginal (any positive scaling; log-curvature is scale invariant).
    """
    p = model.params
    nodes = x_grid.nodes
    if model.variant == "classical" or p.hbar == 0.0:
        theta = np.full(x_grid.n, p.kT)
    elif model.variant == "curvature":
        theta = p.kT + p.hbar**2 * model.potential.d2v(nodes) / (12.0 * p.m * p.kT)
    else:
        if model.variant == "reference":
            values = model.reference.evaluate(nodes, t)
        else:
            if marginal_values is None:
                raise DomainError("nonlinear variant requires the current marginal")
            values = marginal_values
        curv = log_curvature_values(values, x_grid.h, model.floor)
        # One-sided stencils at the walls feed back on themselves through
        # the outermost flux faces (same pathology as the 1D solver);
        # constant extrapolation is harmless there and kills the feedback.
        curv[0] = curv[1]
        curv[-1] = curv[-2]
        # Log-curvature is only well conditioned where the density is
        # within a few orders of its peak: further out, round-off and
        # wall boundary layers distort it without bound.  Since the
        # curvature of any resolved smooth density varies slowly in x,
        # each deep tail inherits the value at its last trusted node,
        # which leaves a clean Gaussian's constant curvature exactly
        # constant across the whole grid.
        trusted = np.flatnonzero(values >= 1e-8 * float(np.max(values)))
        if trusted.size:
            lo, hi = trusted[0], trusted[-1]
            curv[:lo] = curv[lo]
            curv[hi + 1 :] = curv[hi]
        theta = p.kT - p.hbar**2 / (12.0 * p.m) * curv
    if np.any(theta <= 0.0):
        i = int(np.argmin(theta))
        raise StabilityError(
            f"nonpositive effective temperature {theta[i]!r} at x = {nodes[i]!r} "
            f"({model.variant} variant)"
        )
    return theta


def _wall_rate_from_flux(flux, h, axis):
    """divergence of face fluxes with zero-flux walls and half-width wall
    cells, along the given axis of a 2D array of face values."""
    flux = np.moveaxis(flux, axis, 0)
    n = flux.shape[0] + 1
    rate = np.empty((n,) + flux.shape[1:])
    rate[0] = 2.0 * flux[0] / h
    rate[-1] = -2.0 * flux[-1] / h
    rate[1:-1] = (flux[1:] - flux[:-1]) / h
    return np.moveaxis(rate, 0, axis)


def streaming_rate(model, w):
    """Liouville + quantum-correction part of dW/dt on the field values."""
    if w.p_grid.n < 7:
        raise DomainError("the d^3/dp^3 stencil needs at least 7 p nodes")
    return _streaming_values(model, w.values, w.x_grid, w.p_grid)


def _streaming_values(model, values, x_grid, p_grid):
    p = model.params
    hx, hp = x_grid.h, p_grid.h
    pot = model.potential
    pvals = p_grid.nodes[None, :]

    # -(p/m) dW/dx as -d/dx of the face flux (p/m) * W_face.
    flux_x = (pvals / p.m) * 0.5 * (values[1:, :] + values[:-1, :])
    rate = -_wall_rate_from_flux(flux_x, hx, axis=0)

    # + V' dW/dp as +d/dp of the face flux V'(x) * W_face.
    if not pot.dv_is_zero:
        dv = pot.dv(x_grid.nodes)[:, None]
        flux_p = dv * 0.5 * (values[:, 1:] + values[:, :-1])
        rate += _wall_rate_from_flux(flux_p, hp, axis=1)

    # -(hbar^2/24) V''' d^3W/dp^3, pointwise 5-point antisymmetric stencil
    # with zero ghost values beyond the p walls.
    if p.hbar > 0.0 and model.variant != "classical" and not pot.d3v_is_zero:
        padded = np.zeros((values.shape[0], values.shape[1] + 4))
        padded[:, 2:-2] = values
        d3 = (
            -0.5 * padded[:, :-4]
            + padded[:, 1:-3]
            - padded[:, 3:-1]
            + 0.5 * padded[:, 4:]
        ) / hp**3
        rate -= p.hbar**2 / 24.0 * pot.d3v(x_grid.nodes)[:, None] * d3
    return rate


def collision_rate(model, w, t=None, marginal_values=None):
    """Friction + momentum-diffusion part b d/dp[(p/m) W + Theta dW/dp]."""
    if model.variant == "nonlinear" and marginal_values is None:
        marginal_values = trapezoid(w.values, w.p_grid.h, axis=1)
    return _collision_values(model, w.values, w.x_grid, w.p_grid, t, marginal_values)


def _collision_values(model, values, x_grid, p_grid, t, marginal_values):
    p = model.params
    hp = p_grid.h
    theta = theta_field(model, x_grid, t, marginal_values)[:, None]
    p_face = 0.5 * (p_grid.nodes[1:] + p_grid.nodes[:-1])[None, :]
    w_face = 0.5 * (values[:, 1:] + values[:, :-1])
    flux = p.b * ((p_face / p.m) * w_face + theta * (values[:, 1:] - values[:, :-1]) / hp)
    return _wall_rate_from_flux(flux, hp, axis=1)


def _total_rate(model, values, x_grid, p_grid, t):
    marg = None
    if model.variant == "nonlinear":
        marg = trapezoid(values, p_grid.h, axis=1)
    rate = _streaming_values(model, values, x_grid, p_grid)
    rate += _collision_values(model, values, x_grid, p_grid, t, marg)
    return rate


def stable_dt_kk(model, w, t=None):
    """Explicit step bound: the tightest of the advective, drift and
    momentum-diffusion limits (plus the quantum-streaming stencil limit
    when the cubic potential term is active)."""
    p = model.params
    x_grid, p_grid = w.x_grid, w.p_grid
    hx, hp = x_grid.h, p_grid.h
    marg = None
    if model.variant == "nonlinear":
        marg = trapezoid(w.values, p_grid.h, axis=1)
    theta_max = float(np.max(theta_field(model, x_grid, t, marg)))
    p_max = max(abs(p_grid.x_min), abs(p_grid.x_max))
    bounds = [
        hx * p.m / p_max,
        hp * hp / (2.0 * p.b * theta_max),
        hp * p.m / (p.b * p_max),
    ]
    if not model.potential.dv_is_zero:
        dv_max = float(np.max(np.abs(model.potential.dv(x_grid.nodes))))
        if dv_max > 0:
            bounds.append(hp / dv_max)
    if p.hbar > 0.0 and model.variant != "classical" and not model.potential.d3v_is_zero:
        d3v_max = float(np.max(np.abs(model.potential.d3v(x_grid.nodes))))
        if d3v_max > 0:
            bounds.append(24.0 * hp**3 / (p.hbar**2 * d3v_max))
    return CFL_SAFETY * min(bounds)


def _rk4(model, values, x_grid, p_grid, t, dt):
    k1 = _total_rate(model, values, x_grid, p_grid, t)
    k2 = _total_rate(model, values + 0.5 * dt * k1, x_grid, p_grid, t + 0.5 * dt)
    k3 = _total_rate(model, values + 0.5 * dt * k2, x_grid, p_grid, t + 0.5 * dt)
    k4 = _total_rate(model, values + dt * k3, x_grid, p_grid, t + dt)
    return values + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_kk(model, w, t, dt):
    """One stability-checked RK4 step; returns a new WignerField."""
    bound = stable_dt_kk(model, w, t)
    if dt > bound * (1.0 + 1e-12):
        raise StabilityError(f"dt = {dt!r} exceeds the stability bound {bound!r}")
    new = _rk4(model, w.values, w.x_grid, w.p_grid, t, dt)
    if not np.all(np.isfinite(new)):
        raise IntegrityError("step produced non-finite Wigner values")
    return WignerField.from_values(w.x_grid, w.p_grid, new, normalize=False)


@dataclass(frozen=True)
class KKRunResult:
    final_field: WignerField
    times: np.ndarray
    sigma2_x: np.ndarray
    sigma2_p: np.ndarray
    mass: np.ndarray
    label: str

    @property
    def x_dispersion(self):
        return DispersionCurve(self.times, self.sigma2_x, self.label + "-x")


def run_kk(model, w0, t0, t1, output_every=100, dt=None):
    """Fixed-step RK4 march recording marginal dispersions and mass.

    An explicit dt below the stability bound may be given so that runs of
    different models can share identical output times.
    """
    if not t1 > t0:
        raise DomainError("run requires t1 > t0")
    x_grid, p_grid = w0.x_grid, w0.p_grid
    bound = stable_dt_kk(model, w0, t0)
    if dt is None:
        dt = bound
    elif dt > bound * (1.0 + 1e-12):
        raise StabilityError(f"dt = {dt!r} exceeds the stability bound {bound!r}")
    n_steps = max(1, math.ceil((t1 - t0) / dt))
    dt = (t1 - t0) / n_steps

    values = w0.values.copy()
    times, s2x, s2p, masses = [], [], [], []

    def record(t, v):
        f = WignerField.from_values(x_grid, p_grid, v, normalize=False)
        _, sx, _ = moments(marginal_x(f))
        _, sp, _ = moments(marginal_p(f))
        times.append(t)
        s2x.append(sx)
        s2p.append(sp)
        masses.append(f.mass())

    record(t0, values)
    mass_prev = masses[0]
    t = t0
    for i in range(n_steps):
        values = _rk4(model, values, x_grid, p_grid, t, dt)
        t = t0 + (i + 1) * dt
        if not np.all(np.isfinite(values)):
            raise IntegrityError(f"non-finite Wigner values at t = {t!r}")
        mass_now = trapezoid(trapezoid(values, p_grid.h, axis=1), x_grid.h)
        if abs(mass_now - mass_prev) > 1e-10:
            raise IntegrityError(
                f"mass changed by {mass_now - mass_prev!r} in one step at t = {t!r}"
            )
        mass_prev = mass_now
        if (i + 1) % output_every == 0 or i == n_steps - 1:
            record(t, values)

    masses = np.asarray(masses)
    if np.any(np.abs(masses - 1.0) > 1e-7):
        raise IntegrityError("mass drifted beyond 1e-7 during the run")
    return KKRunResult(
        final_field=WignerField.from_values(x_grid, p_grid, values, normalize=False),
        times=np.asarray(times),
        sigma2_x=np.asarray(s2x),
        sigma2_p=np.asarray(s2p),
        mass=masses,
        label=model.variant,
    )


def stationarity_residual(model, w, t=None):
    """Dimensionless smallness of dW/dt on a candidate stationary field.

    The L2 norm of the full rate is normalized by the L2 norm of the
    collision rate of a copy of W whose momentum temperature is dilated
    by 10%, so 'small' means small against the scale of a generic
    nonequilibrium relaxation rate on the same grid.
    """
    rate = _total_rate(model, w.values, w.x_grid, w.p_grid, t)
    p2 = (w.p_grid.nodes[None, :] ** 2) / (model.params.m * model.params.kT)
    heated = w.values * np.exp(-0.05 * p2)
    heated /= trapezoid(trapezoid(heated, w.p_grid.h, axis=1), w.x_grid.h)
    marg = trapezoid(heated, w.p_grid.h, axis=1)
    ref = _collision_values(model, heated, w.x_grid, w.p_grid, t, marg)

    def l2(a):
        return math.sqrt(float(np.sum(a * a)))

    return l2(rate) / l2(ref)
