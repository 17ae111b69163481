import math

import numpy as np
import pytest
from scipy import special

from ensembles import (
    ClosedFormFamily,
    case1_mean,
    case2_expected,
    case2_mean,
    christoffel_darboux_kernel,
    closed_form_density,
    closed_form_expected,
    dirichlet_mean_coefficient,
    ensemble_for,
    kac_asymptotic,
    kac_constant,
    kac_density,
    kac_expected,
    monic_ensemble,
    noncentral_asymptotic,
    rational_fixed_points_mc_target,
    spijker_length,
)
from errors import DomainError, UnsupportedFamilyError
from kernel_engine import density, density_central, expected_zeros, mean_projection
from numerics import Interval, Poly


def test_kac_density_symmetries():
    for t in (0.2, 0.55, 0.9, 1.5, 3.0):
        assert kac_density(6, -t) == pytest.approx(kac_density(6, t), rel=1e-14)
        assert kac_density(6, 1.0 / t) == pytest.approx(t * t * kac_density(6, t), rel=1e-12)


def test_kac_density_near_unit_circle():
    e = ensemble_for(ClosedFormFamily.kac(8))
    for t in (1.0 - 6e-4, 1.0 - 4e-4, 1.0, 1.0 + 5e-3):
        assert kac_density(8, t) == pytest.approx(density_central(e, t), rel=1e-8)


def test_kac_expected_small_degrees():
    assert kac_expected(1) == pytest.approx(1.0, abs=1e-12)
    e = ensemble_for(ClosedFormFamily.kac(3))
    assert kac_expected(3) == pytest.approx(expected_zeros(e).value, abs=1e-8)


def test_kac_constant():
    assert kac_constant() == pytest.approx(0.6257358072, abs=1e-8)


def test_kac_asymptotic_expansion():
    n = 100
    result = kac_asymptotic(n)
    assert [name for name, _ in result.terms] == ["(2/pi) log n", "C1", "2/(n pi)"]
    assert kac_expected(n) == pytest.approx(result.value, abs=5.0 / n**2)


def test_noncentral_asymptotic_terms():
    m = 1.5
    e = special.erf(m / math.sqrt(2.0))
    result = noncentral_asymptotic(1000, m)
    assert result.positive_zeros == pytest.approx(0.5 - 0.5 * e * e + special.exp1(m * m) / math.pi, rel=1e-12)
    shift = noncentral_asymptotic(10000, m).expected - result.expected
    assert shift == pytest.approx(math.log(10.0) / math.pi, rel=1e-12)
    base = noncentral_asymptotic(1000, 1.0).expected
    assert base == pytest.approx(math.log(1000) / math.pi + kac_constant() / 2 + 0.5 - np.euler_gamma / math.pi,
                                 rel=1e-12)
    with pytest.raises(DomainError):
        noncentral_asymptotic(1000, 0.0)


def test_closed_forms_match_engine():
    cases = (
        (ClosedFormFamily.kostlan(7), (-2.0, 0.0, 1.3)),
        (ClosedFormFamily.correlated_power_series(0.3), (-0.6, 0.0, 0.5)),
        (ClosedFormFamily.trig_sum((1.0, 2.0), (0.5, 3.0)), (0.0, 1.0)),
        (ClosedFormFamily.entire(), (-2.0, 0.5)),
    )
    for family, points in cases:
        e = ensemble_for(family)
        for t in points:
            assert closed_form_density(family, t) == pytest.approx(density_central(e, t), rel=1e-9)


def test_closed_form_expected():
    assert closed_form_expected(ClosedFormFamily.kostlan(9), Interval.real_line()) == 3.0
    half = closed_form_expected(ClosedFormFamily.kostlan(4), Interval(0.0, math.inf))
    assert half == pytest.approx(1.0, rel=1e-15)
    series = closed_form_expected(ClosedFormFamily.power_series(), Interval(-0.5, 0.5))
    assert series == pytest.approx(2.0 * math.atanh(0.5) / math.pi, rel=1e-14)
    trig = closed_form_expected(ClosedFormFamily.trig_sum((1.0,), (2.0,)), Interval(0.0, math.pi))
    assert trig == pytest.approx(2.0, rel=1e-14)
    with pytest.raises(UnsupportedFamilyError):
        closed_form_expected(ClosedFormFamily.kac(3), Interval(0.0, 1.0))


def test_odd_kostlan_has_no_constant_projection_mean():
    with pytest.raises(UnsupportedFamilyError):
        case1_mean(ClosedFormFamily.kostlan(3), 1.0)


def test_entire_constant_projection_density():
    family = ClosedFormFamily.entire()
    e = ensemble_for(family, case1_mean(family, 1.0))
    for t in (-1.0, 0.5, 2.0):
        assert density(e, t) == pytest.approx(math.exp(-0.5) / math.pi, rel=1e-6)


def test_self_similar_power_series_count():
    family = ClosedFormFamily.power_series()
    mean = case2_mean(family, 1.0)
    interval = Interval(0.0, 0.9)
    numeric = expected_zeros(ensemble_for(family, mean), interval, 1e-12).value
    assert numeric == pytest.approx(case2_expected(mean, interval), abs=1e-7)


def test_self_similar_mean_has_equal_projections():
    family = ClosedFormFamily.power_series()
    e = ensemble_for(family, case2_mean(family, 1.0))
    for t in (-0.5, 0.2, 0.7):
        projection = mean_projection(e, t)
        assert abs(projection.m0 - projection.m1) <= 1e-6


def test_correlation_lowers_power_series_density():
    plain = ClosedFormFamily.correlated_power_series(0.0)
    for r in (0.1, 0.3):
        correlated = ensemble_for(ClosedFormFamily.correlated_power_series(r))
        for t in np.linspace(0.05, 0.95, 19):
            assert density_central(correlated, t) < closed_form_density(plain, t)


def test_self_similar_mean_is_anchored():
    mean = case2_mean(ClosedFormFamily.entire(), 2.0, anchor=0.5)
    assert mean.m0(0.5) == 2.0
    with pytest.raises(UnsupportedFamilyError):
        case2_mean(ClosedFormFamily.kac(3), 1.0)


def test_dirichlet_mean_coefficients():
    assert dirichlet_mean_coefficient(1, 2.0) == 2.0
    assert dirichlet_mean_coefficient(2, 1.0) == 0.0
    assert dirichlet_mean_coefficient(4, 1.0) == 0.5
    assert dirichlet_mean_coefficient(16, 1.0) == 3.0 / 8.0
    assert dirichlet_mean_coefficient(36, 1.0) == 0.25


def test_identity_map_traces_a_great_circle():
    t, zero, one = Poly((0.0, 1.0)), Poly((0.0,)), Poly((1.0,))
    assert spijker_length(t, zero, one, zero) == pytest.approx(2.0 * math.pi, abs=1e-7)


def test_rational_fixed_point_target():
    assert rational_fixed_points_mc_target(3) == 2.0


def test_monic_ensemble_needs_degree_two():
    with pytest.raises(DomainError):
        monic_ensemble(1)
    e = monic_ensemble(3)
    assert not e.is_central


def test_christoffel_darboux_matches_direct_sum():
    n = 5
    kernel = christoffel_darboux_kernel(n)
    for x, y in ((0.3, -0.6), (0.25, 0.25), (-0.9, 0.1)):
        direct = 1.0 + 2.0 * sum(special.eval_chebyt(k, x) * special.eval_chebyt(k, y) for k in range(1, n + 1))
        assert kernel(x, y) == pytest.approx(direct, rel=1e-12)


def test_family_validation():
    with pytest.raises(DomainError):
        ClosedFormFamily.kac(0)
    with pytest.raises(DomainError):
        ClosedFormFamily.correlated_power_series(0.7)
    with pytest.raises(DomainError):
        ClosedFormFamily.trig_sum((1.0, 2.0), (1.0,))
    with pytest.raises(DomainError):
        closed_form_density(ClosedFormFamily.dirichlet(), 0.4)
