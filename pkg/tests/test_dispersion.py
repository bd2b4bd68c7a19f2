import math

import numpy as np
import pytest
from scipy.special import lambertw

from qbrownian.core import DomainError, derive_params
from qbrownian.dispersion import (
    DispersionLaw,
    LAW_NAMES,
    lambert_w_minus1,
    scaled_lambert_dispersion,
    semiclassical_time_bound,
    sigma2_classical,
    sigma2_implicit,
    sigma2_improved,
    sigma2_semiclassical,
    sigma2_short_time,
)

P = derive_params(1.0, 1.0, 1.0, 1.0)


def test_classical_is_einstein_linear():
    assert sigma2_classical(P, 0.0) == 0.0
    assert sigma2_classical(P, 3.0) == pytest.approx(6.0)
    with pytest.raises(DomainError):
        sigma2_classical(P, -1.0)


def test_semiclassical_validity_window():
    bound = semiclassical_time_bound(P)
    assert bound == pytest.approx(P.lambda_T**2 / (2.0 * P.D))
    with pytest.raises(DomainError):
        sigma2_semiclassical(P, bound)
    assert sigma2_semiclassical(P, 2.0) > sigma2_classical(P, 2.0)


def test_improved_brackets_classical_and_semiclassical():
    for t in np.logspace(-3, 2, 12):
        imp = sigma2_improved(P, t)
        assert imp > sigma2_classical(P, t)
        if t > 10.0 * semiclassical_time_bound(P):
            assert imp > sigma2_semiclassical(P, t)


def test_lambert_branch_against_scipy():
    for z in -np.logspace(math.log10(math.exp(-1.0) * 0.999), -12, 25):
        w = lambert_w_minus1(z)
        ref = float(lambertw(z, k=-1).real)
        assert w == pytest.approx(ref, rel=1e-12, abs=1e-12)
        assert abs(w * math.exp(w) - z) <= 1e-12 * abs(z)
    assert lambert_w_minus1(-math.exp(-1.0)) == -1.0
    with pytest.raises(DomainError):
        lambert_w_minus1(0.0)
    with pytest.raises(DomainError):
        lambert_w_minus1(-0.5)


def test_scaled_lambert_solves_its_relation():
    for s in np.logspace(-6, 3, 10):
        u = scaled_lambert_dispersion(s)
        assert u - math.log1p(u) == pytest.approx(s, rel=1e-10)
    # underflow regime falls back to Newton
    u = scaled_lambert_dispersion(800.0)
    assert u - math.log1p(u) == pytest.approx(800.0, rel=1e-12)


def test_implicit_residual_across_decades():
    lam2 = P.lambda_T**2
    for t in np.logspace(-6, 4, 11):
        s2 = sigma2_implicit(P, t)
        res = s2 - lam2 * math.log1p(3.0 * s2 / lam2) / 3.0 - 2.0 * P.D * t
        assert abs(res) < 1e-10 * max(1.0, 2.0 * P.D * t)


def test_implicit_small_time_limit():
    t = 1e-8 * (P.m * P.b / P.hbar**2) * P.lambda_T**4
    ratio = sigma2_implicit(P, t) / sigma2_short_time(P, t, "third")
    assert 0.999 < ratio < 1.001


def test_classical_limit_of_quantum_laws():
    p0 = derive_params(1.0, 1.0, 1.0, 0.0)
    for law in ("semiclassical", "improved", "implicit", "lambert"):
        assert DispersionLaw(law, p0)(1.7) == pytest.approx(2.0 * p0.D * 1.7)


def test_law_catalogue():
    with pytest.raises(DomainError):
        DispersionLaw("einstein", P)
    for law in LAW_NAMES:
        times = np.linspace(0.2, 2.0, 9)
        curve = DispersionLaw(law, P).curve(times)
        assert np.all(np.diff(curve.sigma2) > 0)
