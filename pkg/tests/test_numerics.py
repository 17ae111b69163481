import math

import numpy as np
import pytest
from scipy import special, stats

from errors import ConvergenceError, DomainError, EvaluationError
from numerics import (
    Interval,
    Poly,
    double_factorial,
    double_factorial_ratio,
    erf,
    euler_gamma,
    exp_integral_gamma0,
    gaussian_stream,
    integrate_2d,
    integrate_adaptive,
    log_double_factorial,
    log_gamma,
    poly_add,
    poly_arith,
    poly_det,
    poly_diff,
    poly_eval,
    poly_eval_with_deriv,
    poly_mul,
    zeta_derivs,
    zeta_tail,
)


# --- special functions -----------------------------------------------------


def test_erf_values():
    assert erf(1.0) == pytest.approx(0.8427007929497149, rel=1e-15)
    assert erf(0.0) == 0.0
    assert erf(10.0) == 1.0


def test_erf_is_odd():
    for x in (1e-8, 0.3, 1.7, 4.2):
        assert erf(-x) == -erf(x)


def test_erf_rejects_non_finite():
    with pytest.raises(DomainError):
        erf(math.inf)


def test_exp_integral():
    assert exp_integral_gamma0(1.0) == pytest.approx(0.21938393439552, rel=1e-12)
    x = 1e-3
    assert exp_integral_gamma0(x) == pytest.approx(-np.euler_gamma - math.log(x) + x - x * x / 4, abs=1e-9)
    with pytest.raises(DomainError):
        exp_integral_gamma0(0.0)


def test_log_gamma():
    assert log_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-15)
    assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-15)
    with pytest.raises(DomainError):
        log_gamma(0.0)


def test_zeta_values():
    assert zeta_derivs(2.0) == pytest.approx(math.pi**2 / 6, rel=1e-13)
    assert zeta_derivs(4.0) == pytest.approx(math.pi**4 / 90, rel=1e-13)
    assert zeta_derivs(2.0, 1) == pytest.approx(-0.93754825431584, abs=1e-12)


def test_zeta_near_pole_matches_scipy():
    assert zeta_derivs(1.1) == pytest.approx(special.zeta(1.1), rel=1e-11)


def test_zeta_tail_matches_direct_sum():
    s, n = 3.0, 20
    k = np.arange(n, 200000, dtype=float)
    direct = math.fsum(k**-s)
    assert zeta_tail(s, n) == pytest.approx(direct, rel=1e-7)


def test_zeta_rejects_pole():
    with pytest.raises(DomainError):
        zeta_derivs(1.0)
    with pytest.raises(DomainError):
        zeta_derivs(2.0, 3)


def test_euler_gamma():
    assert euler_gamma() == pytest.approx(np.euler_gamma, abs=1e-13)


def test_double_factorials():
    assert double_factorial(-1) == 1
    assert double_factorial(0) == 1
    assert double_factorial(7) == 105
    assert double_factorial(8) == 384
    assert math.exp(log_double_factorial(9)) == pytest.approx(945, rel=1e-12)


def test_double_factorial_ratio():
    assert double_factorial_ratio(3, 4) == 3 / 8
    # (2k-1)!!/(2k)!! = Gamma(k + 1/2) / (sqrt(pi) Gamma(k + 1))
    k = 201
    expected = math.exp(special.gammaln(k + 0.5) - special.gammaln(k + 1)) / math.sqrt(math.pi)
    assert double_factorial_ratio(2 * k - 1, 2 * k) == pytest.approx(expected, rel=1e-10)


# --- quadrature ------------------------------------------------------------


def test_integrate_polynomial():
    result = integrate_adaptive(lambda x: x * x, Interval(0.0, 1.0))
    assert result.value == pytest.approx(1.0 / 3.0, abs=1e-14)
    assert result.evaluations >= 15


def test_integrate_over_real_line():
    assert integrate_adaptive(lambda x: math.exp(-x * x), Interval.real_line()).value == pytest.approx(
        math.sqrt(math.pi), abs=1e-10)
    assert integrate_adaptive(lambda x: 1.0 / (1.0 + x * x), Interval.real_line()).value == pytest.approx(
        math.pi, abs=1e-10)


def test_integrate_half_line():
    result = integrate_adaptive(lambda x: math.exp(-x), Interval(0.0, math.inf))
    assert result.value == pytest.approx(1.0, abs=1e-10)


def test_breakpoints_handle_kinks():
    result = integrate_adaptive(abs, Interval(-1.0, 1.0), points=(0.0,))
    assert result.value == pytest.approx(1.0, abs=1e-14)


def test_budget_exhaustion_raises():
    with pytest.raises(ConvergenceError) as info:
        integrate_adaptive(lambda x: math.sin(50 * x), Interval(0.0, 10.0), tol=1e-14, max_evals=30)
    assert info.value.evaluations == 15


def test_integral_is_additive_over_splits():
    def f(x):
        return math.exp(-x) * math.cos(3.0 * x)

    tol = 1e-10
    whole = integrate_adaptive(f, Interval(0.0, 5.0), tol=tol).value
    left = integrate_adaptive(f, Interval(0.0, 2.1), tol=tol).value
    right = integrate_adaptive(f, Interval(2.1, 5.0), tol=tol).value
    assert abs(whole - (left + right)) <= 2 * tol
    tail = integrate_adaptive(lambda x: 1.0 / (1.0 + x * x), Interval(1.0, math.inf), tol=tol).value
    head = integrate_adaptive(lambda x: 1.0 / (1.0 + x * x), Interval(0.0, 1.0), tol=tol).value
    assert abs(head + tail - math.pi / 2) <= 2 * tol


def test_non_finite_integrand_raises():
    with pytest.raises(EvaluationError):
        integrate_adaptive(lambda x: math.nan, Interval(0.0, 1.0))


def test_integrate_2d_gaussian():
    line = Interval.real_line()
    result = integrate_2d(lambda x, y: math.exp(-x * x - y * y), line, line)
    assert result.value == pytest.approx(math.pi, abs=1e-5)


# --- intervals and polynomials ----------------------------------------------


def test_interval_validation_and_parse():
    with pytest.raises(DomainError):
        Interval(1.0, 0.0)
    with pytest.raises(DomainError):
        Interval(math.nan, 1.0)
    interval = Interval.parse("-inf:0")
    assert interval.lo_infinite and not interval.hi_infinite
    assert Interval(0.0, 1.0).within(Interval.real_line())
    assert not Interval.real_line().within(Interval(0.0, 1.0))


def test_poly_trims_trailing_zeros():
    p = Poly((1.0, 2.0, 0.0, 0.0))
    assert p.coeffs == (1.0, 2.0)
    assert p.degree == 1
    assert Poly((0.0, 0.0)).is_zero


def test_poly_from_roots_and_eval():
    p = Poly.from_roots([1.0, 2.0])
    assert p.coeffs == (2.0, -3.0, 1.0)
    assert p(3.0) == 2.0


def test_poly_eval_with_deriv():
    p = Poly((1.0, 2.0, 3.0))
    assert poly_eval_with_deriv(p, 2.0) == (17.0, 14.0)
    value, deriv = poly_eval_with_deriv(p, 1j)
    assert value == pytest.approx(-2 + 2j)
    assert deriv == pytest.approx(2 + 6j)


def test_poly_arith_dispatch():
    p, q = Poly((1.0, 1.0)), Poly((-1.0, 1.0))
    assert poly_arith("mul", p, q) == poly_mul(p, q) == Poly((-1.0, 0.0, 1.0))
    assert poly_arith("diff", Poly((0.0, 0.0, 1.0))) == Poly((0.0, 2.0))
    with pytest.raises(DomainError):
        poly_arith("divide", p, q)


def test_product_rule_on_random_polynomials():
    xs = np.linspace(-1.0, 1.0, 7)
    for index in range(20):
        stream = gaussian_stream(77, index)
        z, stream = stream.take(42)
        deg_p, deg_q = index % 21, (3 * index + 5) % 21
        p, q = Poly(tuple(z[: deg_p + 1])), Poly(tuple(z[21 : 22 + deg_q]))
        lhs = poly_diff(poly_mul(p, q))
        rhs = poly_add(poly_mul(poly_diff(p), q), poly_mul(p, poly_diff(q)))
        assert poly_eval(lhs, xs) == pytest.approx(poly_eval(rhs, xs), rel=1e-10, abs=1e-9)


def test_poly_det_constant_entries_matches_numpy():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((3, 3))
    det = poly_det([[Poly((float(v),)) for v in row] for row in a])
    assert det.degree == 0
    assert det.coeffs[0] == pytest.approx(np.linalg.det(a), rel=1e-12)


def test_poly_det_linear_entries():
    # det [[t, 1], [1, t]] = t^2 - 1
    t, one = Poly((0.0, 1.0)), Poly((1.0,))
    assert poly_det([[t, one], [one, t]]) == Poly((-1.0, 0.0, 1.0))


# --- Gaussian streams --------------------------------------------------------


def test_stream_is_reproducible():
    a = gaussian_stream(42, 7).normals(10)
    b = gaussian_stream(42, 7).normals(10)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, gaussian_stream(42, 8).normals(10))
    assert not np.array_equal(a, gaussian_stream(42, 7, retry=1).normals(10))


def test_take_splits_consistently():
    stream = gaussian_stream(1, 0)
    first, rest = stream.take(3)
    second, _ = rest.take(6)
    assert np.array_equal(np.concatenate([first, second]), stream.normals(9))
    assert stream.position == 0
    assert rest.position == 3


def test_stream_moments():
    z = gaussian_stream(20260101, 0).normals(10**6)
    assert abs(z.mean()) < 0.004
    assert abs(z.var() - 1.0) < 0.005
    u = gaussian_stream(20260101, 1).uniforms(1000)
    assert np.all((u > 0) & (u < 1))


def test_stream_passes_kolmogorov_smirnov():
    n = 10**4
    # 0.999 quantile of the limiting Kolmogorov distribution
    critical = 1.9495 / math.sqrt(n)
    z = gaussian_stream(20260101, 2).normals(n)
    assert stats.kstest(z, "norm").statistic < critical
