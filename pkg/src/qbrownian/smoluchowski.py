"""Conservative 1D finite-difference solvers for the position-space
diffusion equations of free and semiclassical quantum Brownian motion.

Variants:
  classical      d_t rho = D d_x^2 rho
  reference      d_t rho = d_x^2 [ (D - hbar^2/(12 m b) d_x^2 ln rho_ref) rho ]
  semiclassical  d_t rho = D (1 + lam^2 / 6 D t) d_x^2 rho      (t > lam^2/2D)
  nonlinear      d_t rho = d_x (D d_x rho + rho d_x Q / 3 b)

All variants are stepped in flux form with zero-flux boundaries, so the
discrete total mass is conserved structurally.  Time stepping is explicit
with dt bounded by the largest eigenvalue of the linearized update
(diffusive 4 D/h^2, plus a quartic 16 hbar^2/(12 m b h^4) term for the
nonlinear variant); time-dependent coefficients are evaluated at the
step midpoint.
"""

from dataclasses import dataclass
import math

import numpy as np

from .core import (
    DensityProfile,
    DispersionCurve,
    DomainError,
    IntegrityError,
    ReferenceDensity,
    StabilityError,
    moments,
    trapezoid,
)
from .functionals import DEFAULT_FLOOR, FieldOnGrid, log_curvature_values

VARIANTS = ("classical", "reference", "semiclassical", "nonlinear")

CFL_SAFETY = 0.4


@dataclass(frozen=True)
class SmoluchowskiModel:
    variant: str
    params: object
    reference: ReferenceDensity = None
    floor: float = DEFAULT_FLOOR

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown variant {self.variant!r}")
        if self.variant == "reference" and self.reference is None:
            raise DomainError("reference variant requires a ReferenceDensity")

    def validity_start(self):
        """Earliest admissible start time for the variant."""
        if self.variant == "semiclassical" and self.params.hbar > 0:
            return self.params.lambda_T**2 / (2.0 * self.params.D)
        return 0.0


@dataclass(frozen=True)
class RunResult:
    final_density: DensityProfile
    times: np.ndarray
    sigma2: np.ndarray
    kurtosis: np.ndarray
    mass: np.ndarray
    label: str

    @property
    def moments_trace(self):
        return DispersionCurve(self.times, self.sigma2, self.label)


def _quantum_temperature_values(values, h, params, floor):
    return -params.hbar**2 / (4.0 * params.m) * log_curvature_values(values, h, floor)


def effective_diffusivity(model, rho, t=None):
    """Pointwise diffusion coefficient of the variant (diagnostic field).

    Raises when the coefficient goes nonpositive anywhere (a sign that the
    regularization failed and the scheme would run backwards).
    """
    p = model.params
    grid = rho.grid
    n = grid.n
    if model.variant == "classical" or p.hbar == 0.0:
        d = np.full(n, p.D)
    elif model.variant == "reference":
        ref = model.reference.evaluate(grid.nodes, t)
        curv = log_curvature_values(ref, grid.h, model.floor)
        d = p.D - p.hbar**2 / (12.0 * p.m * p.b) * curv
    elif model.variant == "semiclassical":
        if t is None or not t > model.validity_start():
            raise DomainError(
                "semiclassical variant needs t above the validity bound "
                f"{model.validity_start()!r}"
            )
        d = np.full(n, p.D * (1.0 + p.lambda_T**2 / (6.0 * p.D * t)))
    else:  # nonlinear: D + k_B T_Q / (3 b) with T_Q from the current density
        curv = log_curvature_values(rho.values, grid.h, model.floor)
        d = p.D + (-p.hbar**2 / (4.0 * p.m) * curv) / (3.0 * p.b)
    if np.any(d <= 0.0):
        i = int(np.argmin(d))
        raise StabilityError(
            f"nonpositive effective diffusivity {d[i]!r} at x = {grid.nodes[i]!r} "
            f"({model.variant} variant)"
        )
    return FieldOnGrid(grid, d)


def _rate(model, values, t, grid):
    """Flux-form time derivative of rho (zero-flux boundaries)."""
    p = model.params
    h = grid.h
    if model.variant == "nonlinear" and p.hbar > 0.0:
        # rho dQ/dx = d(rho T_Q)/dx identically (both equal
        # -(hbar^2/4m) rho (u''' + u' u'') for u = ln rho), and the
        # right-hand side is far better conditioned in the tails: it
        # multiplies the log-curvature by rho instead of dividing a
        # second derivative by sqrt(rho).
        tq = _quantum_temperature_values(values, h, p, model.floor)
        # The one-sided log-curvature stencils at the walls feed back on
        # themselves through the outermost flux faces and destabilize the
        # last node; constant extrapolation of T_Q there is second-order
        # harmless (T_Q is slowly varying at a zero-flux wall) and kills
        # the feedback.
        tq[0] = tq[1]
        tq[-1] = tq[-2]
        prod = values * tq
        flux = p.D * (values[1:] - values[:-1]) / h
        flux += (prod[1:] - prod[:-1]) / (3.0 * p.b * h)
    else:
        if model.variant == "reference" and p.hbar > 0.0:
            ref = model.reference.evaluate(grid.nodes, t)
            curv = log_curvature_values(ref, grid.h, model.floor)
            a = p.D - p.hbar**2 / (12.0 * p.m * p.b) * curv
            if np.any(a <= 0.0):
                raise StabilityError("nonpositive effective diffusivity (reference variant)")
            prod = a * values
        elif model.variant == "semiclassical" and p.hbar > 0.0:
            prod = (p.D * (1.0 + p.lambda_T**2 / (6.0 * p.D * t))) * values
        else:
            prod = p.D * values
        flux = (prod[1:] - prod[:-1]) / h
    rate = np.empty_like(values)
    # Node-centered grid: the wall nodes own half-width cells, which makes
    # the update conserve the trapezoidal mass exactly.
    rate[0] = 2.0 * flux[0] / h
    rate[-1] = -2.0 * flux[-1] / h
    rate[1:-1] = (flux[1:] - flux[:-1]) / h
    return rate


def stable_dt(model, rho, t):
    """Explicit-Euler step bound.

    The quantum term of the nonlinear variant linearizes to a fourth-order
    hyperdiffusion -(hbar^2/12 m b) d^4 (delta rho)/dx^4 about any smooth
    state, so its largest discrete eigenvalue 16/h^4 enters the bound
    alongside the usual diffusive 4 D/h^2.
    """
    p = model.params
    h = rho.grid.h
    d_max = float(np.max(effective_diffusivity(model, rho, t).values))
    lam = 4.0 * d_max / h**2
    if model.variant == "nonlinear" and p.hbar > 0.0:
        lam += 16.0 * p.hbar**2 / (12.0 * p.m * p.b) / h**4
    return 2.0 * CFL_SAFETY / lam


def step_values(model, values, t, dt, grid):
    """One explicit conservative update on raw density values.

    The flux form makes the discrete mass change per step pure round-off;
    tiny negatives in the tails are tolerated here (clipping would break
    conservation) and only clipped when a DensityProfile is emitted.
    """
    t_coeff = t + 0.5 * dt if model.variant in ("semiclassical", "reference") else t
    new = values + dt * _rate(model, values, t_coeff, grid)
    if not np.all(np.isfinite(new)):
        raise IntegrityError("step produced non-finite density values")
    if np.any(new < -1e-10 * float(np.max(new))):
        raise IntegrityError("step produced negative density beyond the clip tolerance")
    return new


def step(model, rho, t, dt):
    """Public single step: stability-checked, returns a DensityProfile."""
    t_bound = t if model.variant != "semiclassical" else max(t, np.nextafter(model.validity_start(), np.inf))
    bound = stable_dt(model, rho, t_bound)
    if dt > bound * (1.0 + 1e-12):
        raise StabilityError(f"dt = {dt!r} exceeds the stability bound {bound!r}")
    return DensityProfile.from_values(rho.grid, step_values(model, rho.values, t, dt, rho.grid))


def run(model, rho0, t0, t1, output_every=50):
    """Fixed-step explicit march recording moments, kurtosis and mass.

    The step size comes from the stability rule at the worst-case
    diffusivity over the run (the initial state for every variant here:
    coefficients decay as the density spreads).  The configuration is
    refused when the classical prediction of the final width exceeds an
    eighth of the domain (tail truncation would corrupt kurtosis).
    """
    if not t1 > t0:
        raise DomainError("run requires t1 > t0")
    p = model.params
    grid = rho0.grid
    if model.variant == "semiclassical" and not t0 > model.validity_start():
        raise DomainError(
            f"semiclassical variant requires t0 > {model.validity_start()!r}, got {t0!r}"
        )
    _, sigma2_0, _ = moments(rho0)
    predicted = math.sqrt(sigma2_0 + 2.0 * p.D * (t1 - t0))
    if predicted > grid.width / 8.0:
        raise DomainError(
            f"domain too small: predicted final sigma {predicted!r} exceeds width/8 "
            f"= {grid.width / 8.0!r}"
        )
    t_worst = t0 if model.variant != "semiclassical" else max(t0, model.validity_start() * (1 + 1e-12))
    dt = stable_dt(model, rho0, t_worst)
    n_steps = max(1, math.ceil((t1 - t0) / dt))
    dt = (t1 - t0) / n_steps

    values = rho0.values.copy()
    times, sig2s, kurts, masses = [], [], [], []

    def record(t, v):
        prof = DensityProfile.from_values(grid, v)
        _, s2, k = moments(prof)
        times.append(t)
        sig2s.append(s2)
        kurts.append(k)
        masses.append(trapezoid(v, grid.h))

    record(t0, values)
    t = t0
    for i in range(n_steps):
        values = step_values(model, values, t, dt, grid)
        t = t0 + (i + 1) * dt
        if (i + 1) % output_every == 0 or i == n_steps - 1:
            record(t, values)

    masses = np.asarray(masses)
    if np.any(np.abs(masses - 1.0) > 1e-8):
        raise IntegrityError("mass drifted beyond 1e-8 during the run")
    return RunResult(
        final_density=DensityProfile.from_values(grid, values),
        times=np.asarray(times),
        sigma2=np.asarray(sig2s),
        kurtosis=np.asarray(kurts),
        mass=masses,
        label=model.variant,
    )
