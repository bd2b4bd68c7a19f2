"""Self-similar reduction of the enhanced nonlinear dispersion law.

The scaled variance y(x) (with x = sqrt(D t) / 2 lam and
y = sigma^2 / (hbar sqrt(t / m b))) obeys the singular nonlinear ODE

    y y'' - y'^2 - y^2/x^2 + 4 y' + 1/x^2 = 0,

with y(0) = 1 and y'(inf) = 2.  Near the singular origin the solution
has the series y = 1 + c2 x^2 - 2 c2 x^3 + ... with the quadratic
coefficient c2 free; shooting on c2 against y'(x_max) = 2 selects the
physical solution.  In scaled coordinates s = 2 D t / lam^2 and
u = sigma^2 / lam^2 the solution maps to s = 8 x^2, u = 4 x y(x).
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.integrate import solve_ivp

from .core import DispersionCurve, DomainError, StabilityError
from .dispersion import scaled_lambert_dispersion

DEFAULT_X0 = 1e-3
DEFAULT_XMAX = 20.0
Y_FLOOR = 1e-12


class ShootingFailure(RuntimeError):
    """The trajectory left the admissible region (y dropped to zero)."""


def ode_residual(x, y, y_prime, y_second):
    """Left-hand side of the self-similar ODE, exactly as written."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("the self-similar coordinate must be positive")
    return y * y_second - y_prime**2 - (y / x) ** 2 + 4.0 * y_prime + 1.0 / x**2


def _rhs(x, state):
    y, yp = state
    # y'' = (y'^2 + (y^2 - 1)/x^2 - 4 y') / y; the form with y^2 - 1 keeps
    # the constant solution y = 1 exact in floating point.
    return (yp, (yp * yp + (y * y - 1.0) / (x * x) - 4.0 * yp) / y)


def series_start(c2, x0):
    """Truncated series values (y, y') at the small start point x0.

    The x^-1 singularity forces the linear coefficient to vanish and ties
    the cubic one to -2 c2, leaving c2 as the only free parameter.
    """
    if not 0.0 < x0 <= 0.1:
        raise DomainError("series start requires x0 in (0, 0.1]")
    y = 1.0 + c2 * x0**2 - 2.0 * c2 * x0**3
    yp = 2.0 * c2 * x0 - 6.0 * c2 * x0**2
    return y, yp


def _default_mesh(x0, x_max):
    # Geometric refinement near the singular origin, fine uniform spacing
    # beyond; dense enough that finite differences of y' resolve the
    # residual audit tolerance.
    head = np.geomspace(x0, 0.1, 400, endpoint=False)
    mid = np.arange(0.1, 1.0, 1e-3)
    tail = np.arange(1.0, x_max + 1e-9, 2e-3)
    return np.concatenate([head, mid, tail])


@dataclass(frozen=True)
class AutomodelSolution:
    """Shooting solution of the self-similar ODE on an output mesh."""

    x: np.ndarray
    y: np.ndarray
    y_prime: np.ndarray
    c2: float
    _interp: object = field(repr=False, compare=False, default=None)

    def y_second(self):
        """y'' recovered from the ODE itself at the stored nodes."""
        return (self.y_prime**2 + (self.y**2 - 1.0) / self.x**2 - 4.0 * self.y_prime) / self.y

    def residuals(self):
        """Scaled ODE residual with y'' taken from finite differences of y'.

        Differencing the stored derivative keeps the audit independent of
        the right-hand-side evaluation used during integration.
        """
        ypp = np.gradient(self.y_prime, self.x, edge_order=2)
        res = ode_residual(self.x, self.y, self.y_prime, ypp)
        return res / (1.0 + (self.y / self.x) ** 2)

    def evaluate(self, x):
        """Dense-output (y, y') at arbitrary points inside the mesh span."""
        x = np.asarray(x, dtype=float)
        if np.any(x < self.x[0]) or np.any(x > self.x[-1]):
            raise DomainError("evaluation point outside the integrated range")
        out = self._interp(x)
        return out[0], out[1]


def integrate_from(c2, x0=DEFAULT_X0, x_max=DEFAULT_XMAX, rtol=1e-9, atol=1e-12, mesh=None):
    """Integrate the ODE from the series start with an adaptive RK45 pair."""
    if not 0.0 < x0 <= 0.01:
        raise DomainError("integration requires x0 in (0, 0.01]")
    if not x_max >= 10.0:
        raise DomainError("integration requires x_max >= 10")
    if mesh is None:
        mesh = _default_mesh(x0, x_max)

    def floor_event(x, state):
        return state[0] - Y_FLOOR

    floor_event.terminal = True
    floor_event.direction = -1

    sol = solve_ivp(
        _rhs,
        (x0, x_max),
        series_start(c2, x0),
        method="RK45",
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=floor_event,
    )
    if sol.t_events[0].size:
        raise ShootingFailure(f"y reached the floor at x = {sol.t_events[0][0]!r} (c2 = {c2!r})")
    if not sol.success:
        raise StabilityError(f"adaptive integration failed: {sol.message}")
    y, yp = sol.sol(mesh)
    return AutomodelSolution(mesh, y, yp, float(c2), sol.sol)


def _endpoint_slope(c2, x0, x_max, rtol, atol):
    def floor_event(x, state):
        return state[0] - Y_FLOOR

    floor_event.terminal = True
    floor_event.direction = -1
    sol = solve_ivp(
        _rhs, (x0, x_max), series_start(c2, x0), method="RK45",
        rtol=rtol, atol=atol, events=floor_event,
    )
    if sol.t_events[0].size:
        raise ShootingFailure(f"y reached the floor (c2 = {c2!r})")
    if not sol.success:
        raise StabilityError(f"adaptive integration failed: {sol.message}")
    return sol.y[1, -1]


def shoot(x0=DEFAULT_X0, x_max=DEFAULT_XMAX, tol=1e-3, rtol=1e-9, atol=1e-12):
    """Bisection on c2 against y'(x_max) = 2; returns (c2*, solution).

    y'(x_max) is monotone increasing in c2 over the bracket, which is
    checked as the bisection proceeds.
    """
    lo, f_lo = 0.0, _endpoint_slope(0.0, x0, x_max, rtol, atol) - 2.0
    hi = 64.0
    f_hi = _endpoint_slope(hi, x0, x_max, rtol, atol) - 2.0
    doublings = 0
    while f_hi < 0.0:
        hi *= 2.0
        doublings += 1
        if doublings > 6:
            raise AssertionError("shooting bracket not found up to c2 = %r" % hi)
        f_hi = _endpoint_slope(hi, x0, x_max, rtol, atol) - 2.0
    if not f_lo < 0.0 <= f_hi:
        raise AssertionError(f"shooting objective not bracketed: f(0)={f_lo!r}, f({hi!r})={f_hi!r}")

    c2 = hi
    f_mid = f_hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = _endpoint_slope(mid, x0, x_max, rtol, atol) - 2.0
        if not f_lo <= f_mid <= f_hi:
            raise AssertionError(
                "endpoint slope is not monotone in c2: "
                f"f({lo!r})={f_lo!r}, f({mid!r})={f_mid!r}, f({hi!r})={f_hi!r}"
            )
        if f_mid < 0.0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        c2 = mid
        if abs(f_mid) < tol:
            break
    else:
        raise AssertionError("shooting bisection did not converge")
    return c2, integrate_from(c2, x0, x_max, rtol, atol)


def figure1_curves(s_max, n_samples, solution=None):
    """Three universal dispersion curves in scaled coordinates.

    Returns (numeric, lambert, classical) DispersionCurve records over
    s in (0, s_max]: the shooting solution mapped through s = 8 x^2,
    u = 4 x y(x); the Lambert-branch approximation; and u = s.
    """
    if not s_max > 0:
        raise DomainError("s_max must be positive")
    if n_samples < 16:
        raise DomainError("need at least 16 samples")
    if solution is None:
        _, solution = shoot()
    if s_max > 8.0 * solution.x[-1] ** 2:
        raise DomainError(
            f"s_max = {s_max!r} exceeds the integrated range; extend x_max beyond "
            f"{np.sqrt(s_max / 8.0)!r} first"
        )
    # Sample uniformly in the self-similar coordinate x (quadratically in
    # s), so the first sample sits deep in the common sqrt(2 s) regime of
    # all three curves; s = 0 itself maps to the singular origin.
    x = np.linspace(0.0, math.sqrt(s_max / 8.0), n_samples)[1:]
    s = 8.0 * x**2
    inside = x >= solution.x[0]
    y = np.empty_like(x)
    y[inside] = solution.evaluate(x[inside])[0]
    y[~inside] = 1.0  # below the series start y -> 1
    u_numeric = 4.0 * x * y
    u_lambert = np.array([scaled_lambert_dispersion(si) for si in s])
    return (
        DispersionCurve(s, u_numeric, "numeric"),
        DispersionCurve(s, u_lambert, "lambert"),
        DispersionCurve(s, s.copy(), "classical"),
    )
