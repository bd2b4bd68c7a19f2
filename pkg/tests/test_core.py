import math

import numpy as np
import pytest

from qbrownian.core import (
    DensityProfile,
    DispersionCurve,
    DomainError,
    IntegrityError,
    Potential,
    ReferenceDensity,
    SpatialGrid,
    WignerField,
    derive_params,
    marginal_p,
    marginal_x,
    moments,
    trapezoid,
)


def test_derived_parameters():
    p = derive_params(2.0, 4.0, 0.5, 1.5)
    assert p.D == pytest.approx(0.125)
    assert p.lambda_T == pytest.approx(1.5 / (2.0 * math.sqrt(1.0)))
    assert p.beta == pytest.approx(2.0)
    assert not p.is_classical
    assert derive_params(1, 1, 1, 0).is_classical


@pytest.mark.parametrize("bad", [dict(m=0), dict(b=-1), dict(kT=0), dict(hbar=-0.1)])
def test_parameter_validation(bad):
    kwargs = dict(m=1.0, b=1.0, kT=1.0, hbar=1.0)
    kwargs.update(bad)
    with pytest.raises(DomainError):
        derive_params(**kwargs)


def test_grid_geometry():
    g = SpatialGrid(-2.0, 2.0, 9)
    assert g.h == pytest.approx(0.5)
    assert g.width == pytest.approx(4.0)
    np.testing.assert_allclose(g.nodes, np.linspace(-2, 2, 9))
    with pytest.raises(DomainError):
        SpatialGrid(-2.0, 2.0, 5)
    with pytest.raises(DomainError):
        SpatialGrid(2.0, -2.0, 9)


def test_trapezoid_matches_numpy():
    v = np.random.default_rng(0).random(33)
    assert trapezoid(v, 0.1) == pytest.approx(np.trapezoid(v, dx=0.1))


def test_gaussian_profile_mass_and_moments():
    g = SpatialGrid(-10.0, 10.0, 401)
    rho = DensityProfile.gaussian(g, 1.7)
    assert rho.mass() == pytest.approx(1.0, abs=1e-10)
    mean, s2, kurt = moments(rho)
    assert mean == pytest.approx(0.0, abs=1e-12)
    assert s2 == pytest.approx(1.7, rel=1e-8)
    assert kurt == pytest.approx(0.0, abs=1e-8)


def test_density_rejects_significant_negatives():
    g = SpatialGrid(-1.0, 1.0, 11)
    v = np.ones(11)
    v[3] = -0.5
    with pytest.raises(IntegrityError):
        DensityProfile.from_values(g, v)


def test_potential_derivatives_are_exact():
    pot = Potential((1.0, -2.0, 0.5, 3.0, 0.0, 0.25))
    x = np.linspace(-2, 2, 7)
    h = 1e-5
    num_d1 = (pot.v(x + h) - pot.v(x - h)) / (2 * h)
    np.testing.assert_allclose(pot.dv(x), num_d1, rtol=1e-8, atol=1e-7)
    num_d3 = (pot.dv(x + h) - 2 * pot.dv(x) + pot.dv(x - h)) / h**2
    np.testing.assert_allclose(pot.d3v(x), num_d3, rtol=1e-4, atol=1e-4)


def test_potential_special_forms():
    assert Potential.zero().dv_is_zero
    harm = Potential.harmonic(2.0, 3.0)
    assert harm.d2v(0.7) == pytest.approx(2.0 * 9.0)
    assert harm.d3v_is_zero


def test_free_reference_density():
    p = derive_params(1, 1, 1, 1)
    ref = ReferenceDensity("free", p)
    g = SpatialGrid(-12, 12, 301)
    _, s2, _ = moments(ref.profile(g, t=0.8))
    assert s2 == pytest.approx(2 * p.D * 0.8, rel=1e-6)
    with pytest.raises(DomainError):
        ref.evaluate(g.nodes, 0.0)


def test_boltzmann_reference_requires_potential():
    p = derive_params(1, 1, 1, 1)
    with pytest.raises(DomainError):
        ReferenceDensity("boltzmann", p)
    ref = ReferenceDensity("boltzmann", p, Potential.harmonic(1.0, 1.0))
    g = SpatialGrid(-10, 10, 401)
    _, s2, _ = moments(ref.profile(g))
    assert s2 == pytest.approx(1.0, rel=1e-6)


def test_wigner_marginals():
    xg = SpatialGrid(-10, 10, 201)
    pg = SpatialGrid(-8, 8, 161)
    w = WignerField.gaussian_product(xg, pg, 1.5, 0.8)
    assert w.mass() == pytest.approx(1.0, abs=1e-10)
    _, s2x, _ = moments(marginal_x(w))
    _, s2p, _ = moments(marginal_p(w))
    assert s2x == pytest.approx(1.5, rel=1e-6)
    assert s2p == pytest.approx(0.8, rel=1e-6)


def test_dispersion_curve_validation():
    with pytest.raises(DomainError):
        DispersionCurve(np.array([0.0, 0.0]), np.array([1.0, 2.0]), "x")
    with pytest.raises(IntegrityError):
        DispersionCurve(np.array([0.0, 1.0]), np.array([1.0, -2.0]), "x")
