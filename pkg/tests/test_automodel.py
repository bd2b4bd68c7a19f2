import numpy as np
import pytest

from qbrownian.automodel import (
    AutomodelSolution,
    figure1_curves,
    integrate_from,
    ode_residual,
    series_start,
    shoot,
)
from qbrownian.core import DomainError


@pytest.fixture(scope="module")
def solution():
    c2, sol = shoot()
    return c2, sol


def test_constant_solution_satisfies_ode():
    x = np.linspace(0.1, 10.0, 50)
    res = ode_residual(x, np.ones_like(x), np.zeros_like(x), np.zeros_like(x))
    # round-off from the 1/x^2 cancellation only
    np.testing.assert_allclose(res, 0.0, atol=1e-13)


def test_series_start_validation():
    with pytest.raises(DomainError):
        series_start(1.0, 0.0)
    with pytest.raises(DomainError):
        series_start(1.0, 0.5)
    y, yp = series_start(3.0, 1e-3)
    assert y == pytest.approx(1.0 + 3e-6 - 6e-9)
    assert yp == pytest.approx(6e-3 - 1.8e-5)


def test_zero_c2_control_stays_flat():
    sol = integrate_from(0.0)
    np.testing.assert_allclose(sol.y, 1.0, atol=1e-12)
    np.testing.assert_allclose(sol.y_prime, 0.0, atol=1e-12)


def test_shooting_converges(solution):
    c2, sol = solution
    assert abs(sol.y_prime[-1] - 2.0) < 1e-3
    assert c2 > 0


def test_residual_audit(solution):
    _, sol = solution
    assert float(np.max(np.abs(sol.residuals()))) < 1e-6


def test_dense_output_matches_mesh(solution):
    _, sol = solution
    y, yp = sol.evaluate(sol.x[::500])
    np.testing.assert_allclose(y, sol.y[::500], rtol=1e-10)
    np.testing.assert_allclose(yp, sol.y_prime[::500], rtol=1e-8)
    with pytest.raises(DomainError):
        sol.evaluate(sol.x[-1] * 2.0)


def test_figure1_curve_structure(solution):
    _, sol = solution
    numeric, lambert, classical = figure1_curves(50.0, 64, solution=sol)
    assert numeric.t.shape == (63,)
    np.testing.assert_allclose(lambert.t, numeric.t)
    np.testing.assert_allclose(classical.sigma2, classical.t)
    # upper-limit property of the Lambert branch
    assert np.all(lambert.sigma2 >= numeric.sigma2 - 1e-6)
    with pytest.raises(DomainError):
        figure1_curves(-1.0, 64, solution=sol)
    with pytest.raises(DomainError):
        figure1_curves(10.0, 4, solution=sol)
    with pytest.raises(DomainError):
        figure1_curves(1e5, 64, solution=sol)
