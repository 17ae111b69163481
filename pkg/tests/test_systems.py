import math

import pytest

from ensembles import kac_expected
from errors import DomainError
from systems import (
    SystemFamily,
    family_kernel,
    harmonic_coeffs,
    hypercube_kac_asymptotic,
    integrate_plane,
    projective_constant,
    systems_density,
    systems_density_general,
    systems_expected,
)

POINTS = ((0.0, 0.0), (0.3, -0.2), (-0.7, 0.1))


def test_projective_constant():
    assert projective_constant(1) == pytest.approx(1.0 / math.pi, rel=1e-15)
    assert projective_constant(2) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-15)


def test_kostlan_system_count():
    assert systems_expected(SystemFamily.kostlan((2, 3))) == pytest.approx(math.sqrt(6.0), rel=1e-15)
    assert systems_expected(SystemFamily.kostlan((9,))) == 3.0


def test_harmonic_counts():
    assert systems_expected(SystemFamily.harmonic(2, 2)) == pytest.approx(3.0, rel=1e-15)
    # one harmonic form in two homogeneous variables always has d real roots
    assert systems_expected(SystemFamily.harmonic(5, 1)) == pytest.approx(5.0, rel=1e-15)


def test_single_hypercube_equation_is_kac():
    assert systems_expected(SystemFamily.hypercube_kac(5, 1)) == pytest.approx(kac_expected(5), rel=1e-12)


def test_hypercube_approaches_asymptotic():
    def ratio(d):
        return systems_expected(SystemFamily.hypercube_kac(d, 2)) / hypercube_kac_asymptotic(d, 2)

    assert abs(ratio(1000) - 1.0) < abs(ratio(10) - 1.0)


def test_series_systems_have_infinite_counts():
    assert systems_expected(SystemFamily.power_series(2)) == math.inf
    assert systems_expected(SystemFamily.entire(3)) == math.inf
    assert systems_density(SystemFamily.entire(2), (5.0, -3.0)) == pytest.approx(1.0 / (2.0 * math.pi))
    with pytest.raises(DomainError):
        integrate_plane(SystemFamily.entire(2))


def test_harmonic_coefficients():
    coeffs = harmonic_coeffs(2, 1)
    assert coeffs.beta == pytest.approx((1.0, -0.5))
    for d in range(1, 11):
        for m in range(1, 6):
            assert all(r == 0 for r in harmonic_coeffs(d, m).residuals)


def test_harmonic_coefficients_in_log_space():
    exact = harmonic_coeffs(20, 3)
    approx = harmonic_coeffs(20, 3, exact=False)
    assert approx.exact is None
    assert approx.beta == pytest.approx(exact.beta, rel=1e-12)
    assert max(abs(r) for r in approx.residuals) < 1e-12
    with pytest.raises(DomainError):
        harmonic_coeffs(31, 2, exact=True)


def test_general_density_matches_closed_forms():
    families = (
        SystemFamily.kostlan((3, 3)),
        SystemFamily.harmonic(3, 2),
        SystemFamily.hypercube_kac(3, 2),
        SystemFamily.power_series(2),
        SystemFamily.entire(2),
    )
    for family in families:
        kernel = family_kernel(family)
        for p in POINTS:
            assert systems_density_general(kernel, p, 2) == pytest.approx(systems_density(family, p), abs=1e-5)


def test_general_density_one_variable():
    family = SystemFamily.kostlan((4,))
    kernel = family_kernel(family)
    assert systems_density_general(kernel, 0.5, 1) == pytest.approx(2.0 / (math.pi * 1.25), abs=1e-6)


def test_general_density_dimension_limit():
    with pytest.raises(DomainError):
        systems_density_general(family_kernel(SystemFamily.entire(4)), (0.0, 0.0, 0.0, 0.0), 4)


def test_plane_integral():
    assert integrate_plane(SystemFamily.kostlan((2, 2))) == pytest.approx(2.0, abs=1e-4)


def test_point_shape_checked():
    with pytest.raises(DomainError):
        systems_density(SystemFamily.kostlan((2, 2)), (0.0, 0.0, 0.0))
    with pytest.raises(DomainError):
        systems_density(SystemFamily.power_series(2), (0.0, 1.0))
