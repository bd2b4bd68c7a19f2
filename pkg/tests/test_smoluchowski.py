import numpy as np
import pytest

from qbrownian.core import (
    DensityProfile,
    DomainError,
    ReferenceDensity,
    SpatialGrid,
    StabilityError,
    derive_params,
)
from qbrownian.smoluchowski import (
    SmoluchowskiModel,
    effective_diffusivity,
    run,
    stable_dt,
    step,
)

P = derive_params(1.0, 1.0, 1.0, 1.0)


def test_variant_validation():
    with pytest.raises(DomainError):
        SmoluchowskiModel("quantum", P)
    with pytest.raises(DomainError):
        SmoluchowskiModel("reference", P)  # needs a reference density


def test_classical_diffusivity_is_constant():
    g = SpatialGrid(-8, 8, 128)
    rho = DensityProfile.gaussian(g, 1.0)
    d = effective_diffusivity(SmoluchowskiModel("classical", P), rho).values
    np.testing.assert_allclose(d, P.D)


def test_step_rejects_unstable_dt():
    g = SpatialGrid(-8, 8, 128)
    rho = DensityProfile.gaussian(g, 1.0)
    model = SmoluchowskiModel("classical", P)
    bound = stable_dt(model, rho, 0.0)
    with pytest.raises(StabilityError):
        step(model, rho, 0.0, 2.0 * bound)
    step(model, rho, 0.0, 0.5 * bound)  # admissible


def test_classical_spreading_matches_einstein():
    g = SpatialGrid(-12, 12, 256)
    rho0 = DensityProfile.gaussian(g, 1.0)
    result = run(SmoluchowskiModel("classical", P), rho0, 0.0, 1.0, output_every=500)
    np.testing.assert_allclose(result.sigma2, 1.0 + 2.0 * P.D * result.times, rtol=2e-4)
    np.testing.assert_allclose(result.mass, 1.0, atol=1e-12)
    assert np.all(np.abs(result.kurtosis) < 1e-3)


def test_semiclassical_needs_valid_start():
    g = SpatialGrid(-8, 8, 128)
    rho0 = DensityProfile.gaussian(g, 1.0)
    model = SmoluchowskiModel("semiclassical", P)
    with pytest.raises(DomainError):
        run(model, rho0, 0.0, 1.0)


def test_reference_equals_semiclassical_for_free_spreading():
    # with a free-particle reference the effective diffusivity reduces to
    # the large-time form, so both variants march identically
    g = SpatialGrid(-8, 8, 128)
    rho0 = DensityProfile.gaussian(g, 1.0)
    ref = SmoluchowskiModel("reference", P, reference=ReferenceDensity("free", P), floor=1e-15)
    semi = SmoluchowskiModel("semiclassical", P)
    r1 = run(ref, rho0, 0.5, 0.9, output_every=50)
    r2 = run(semi, rho0, 0.5, 0.9, output_every=50)
    np.testing.assert_allclose(r1.sigma2, r2.sigma2, rtol=1e-10)


def test_run_refuses_undersized_domain():
    g = SpatialGrid(-4, 4, 64)
    rho0 = DensityProfile.gaussian(g, 0.5)
    with pytest.raises(DomainError):
        run(SmoluchowskiModel("classical", P), rho0, 0.0, 10.0)


def test_nonlinear_spreads_faster_than_classical():
    g = SpatialGrid(-9.3, 9.3, 256)
    rho0 = DensityProfile.gaussian(g, 2.7)
    r_nl = run(SmoluchowskiModel("nonlinear", P), rho0, 0.0, 0.3, output_every=1000)
    r_cl = run(SmoluchowskiModel("classical", P), rho0, 0.0, 0.3, output_every=1000)
    assert r_nl.sigma2[-1] > r_cl.sigma2[-1]
    assert r_nl.moments_trace.label == "nonlinear"
