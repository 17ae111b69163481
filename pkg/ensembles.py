"""
Named random-function families with closed-form zero densities, the
constructions of means with constant or self-similar projections, and a
few special ensembles built on top of the kernel engine.

The closed forms here are evaluated independently of kernel_engine so the
two can be checked against each other.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from numpy.polynomial import chebyshev as ncheb

from errors import DomainError, UnsupportedFamilyError, require
from kernel_engine import BasisSpec, CovarianceSpec, Ensemble, MeanSpec, density_central, expected_zeros
from numerics import (
    Interval,
    double_factorial_ratio,
    erf,
    euler_gamma,
    exp_integral_gamma0,
    integrate_adaptive,
    poly_add,
    poly_mul,
    poly_scale,
    poly_sub,
    zeta_derivs,
)

logger = logging.getLogger(__name__)

FAMILY_TAGS = ("kac", "kostlan", "power_series", "correlated_power_series", "entire", "trig_sum", "dirichlet")

# closed form is 0/0 on the unit circle; fall back to direct summation there
KAC_UNIT_WINDOW = 1e-3


@dataclass(frozen=True)
class ClosedFormFamily:
    tag: str
    n: int = 0
    r: float = 0.0
    sigmas: tuple = ()
    nus: tuple = ()

    def __post_init__(self):
        require(self.tag in FAMILY_TAGS, f"unknown family {self.tag!r}")
        if self.tag in ("kac", "kostlan"):
            require(self.n >= 1, f"{self.tag} family needs degree n >= 1, got {self.n}")
        if self.tag == "correlated_power_series":
            require(abs(self.r) <= 0.5, f"correlation needs |r| <= 1/2, got {self.r}")
        if self.tag == "trig_sum":
            require(len(self.sigmas) == len(self.nus) and len(self.sigmas) > 0,
                    "trig sum needs matching nonempty sigma and nu lists")
            require(all(math.isfinite(v) for v in self.sigmas + self.nus), "trig parameters must be finite")

    @classmethod
    def kac(cls, n):
        return cls("kac", n=int(n))

    @classmethod
    def kostlan(cls, n):
        return cls("kostlan", n=int(n))

    @classmethod
    def power_series(cls):
        return cls("power_series")

    @classmethod
    def correlated_power_series(cls, r):
        return cls("correlated_power_series", r=float(r))

    @classmethod
    def entire(cls):
        return cls("entire")

    @classmethod
    def trig_sum(cls, sigmas, nus):
        return cls("trig_sum", sigmas=tuple(float(s) for s in sigmas), nus=tuple(float(v) for v in nus))

    @classmethod
    def dirichlet(cls):
        return cls("dirichlet")

    @property
    def natural_domain(self):
        if self.tag in ("power_series", "correlated_power_series"):
            return Interval(-1.0, 1.0)
        if self.tag == "dirichlet":
            return Interval(0.5, math.inf)
        return Interval.real_line()


class AsymptoticResult(NamedTuple):
    value: float
    terms: list


class NoncentralAsymptotic(NamedTuple):
    expected: float
    positive_zeros: float


# ---------------------------------------------------------------------------
# Ensembles for the named families
# ---------------------------------------------------------------------------


def ensemble_for(family, mean=None):
    """Kernel-engine ensemble realizing a closed-form family"""
    mean = MeanSpec() if mean is None else mean
    tag = family.tag
    if tag == "kac":
        return Ensemble(BasisSpec.monomial(family.n), mean=mean)
    if tag == "kostlan":
        return Ensemble(BasisSpec.kostlan(family.n), mean=mean)
    if tag == "power_series":
        return Ensemble(BasisSpec.power_series(), mean=mean)
    if tag == "correlated_power_series":
        return Ensemble(BasisSpec.power_series(), CovarianceSpec.tridiagonal_correlation(family.r), mean)
    if tag == "entire":
        return Ensemble(BasisSpec.entire(), mean=mean)
    if tag == "trig_sum":
        return Ensemble(BasisSpec.trig(family.nus, family.sigmas), mean=mean)
    return Ensemble(BasisSpec.dirichlet(), mean=mean)


def sin_exp_ensemble():
    """a0 + a1 sin t + a2 e^|t|"""
    return Ensemble(BasisSpec.sin_exp())


def chebyshev_ensemble(n):
    return Ensemble(BasisSpec.chebyshev(n))


def monic_ensemble(n):
    """t^n + a_{n-1} t^{n-1} + ... + a_0 with standard normal a_k"""
    require(n >= 2, f"monic ensemble needs degree >= 2, got {n}")
    return Ensemble(
        BasisSpec.monomial(n),
        CovarianceSpec.diag([1.0] * n + [0.0]),
        MeanSpec.vector([0.0] * n + [1.0]),
    )


def christoffel_darboux_kernel(n):
    """Closed kernel 1 + 2 sum_{k=1..n} T_k(x) T_k(y) of the normalized Chebyshev basis"""
    e_n = np.eye(n + 2)[n]
    e_n1 = np.eye(n + 2)[n + 1]
    d_n = ncheb.chebder(e_n)
    d_n1 = ncheb.chebder(e_n1)

    def kernel(x, y):
        tn_x, tn1_x = ncheb.chebval(x, e_n), ncheb.chebval(x, e_n1)
        if x == y:
            return float(ncheb.chebval(x, d_n1) * tn_x - ncheb.chebval(x, d_n) * tn1_x)
        tn_y, tn1_y = ncheb.chebval(y, e_n), ncheb.chebval(y, e_n1)
        return float((tn1_x * tn_y - tn_x * tn1_y) / (x - y))

    return kernel


# ---------------------------------------------------------------------------
# Closed-form densities
# ---------------------------------------------------------------------------


def _kac_density_inside(n, t):
    """Kac density for |t| < 1 away from the unit circle"""
    if t == 0.0:
        return 1.0 / math.pi
    log_x = 2.0 * math.log(abs(t))
    one_minus_x = (1.0 - t) * (1.0 + t)
    one_minus_xn1 = -math.expm1((n + 1) * log_x)
    ratio = (n + 1) * math.exp(0.5 * n * log_x) / one_minus_xn1
    first = 1.0 / one_minus_x
    # difference of squares, factored
    value = (first - ratio) * (first + ratio)
    return math.sqrt(max(value, 0.0)) / math.pi


def kac_density(n, t):
    t = float(t)
    if abs(t * t - 1.0) < KAC_UNIT_WINDOW:
        return density_central(Ensemble(BasisSpec.monomial(n)), t)
    if abs(t) > 1.0:
        s = 1.0 / t
        return _kac_density_inside(n, s) * s * s
    return _kac_density_inside(n, t)


def _dirichlet_density(t):
    s = 2.0 * t
    z0, z1, z2 = zeta_derivs(s, 0), zeta_derivs(s, 1), zeta_derivs(s, 2)
    return math.sqrt(max(z0 * z2 - z1 * z1, 0.0)) / z0 / math.pi


def _trig_rate(family):
    sig2 = [s * s for s in family.sigmas]
    return math.sqrt(math.fsum(v * v * w for v, w in zip(family.nus, sig2)) / math.fsum(sig2))


def closed_form_density(family, t):
    """Expected density of real zeros at t from the family's closed form"""
    t = float(t)
    tag = family.tag
    if tag == "kac":
        return kac_density(family.n, t)
    if tag == "kostlan":
        return math.sqrt(family.n) / (math.pi * (1.0 + t * t))
    if tag == "entire":
        return 1.0 / math.pi
    if tag == "trig_sum":
        return _trig_rate(family) / math.pi
    if tag in ("power_series", "correlated_power_series"):
        require(abs(t) < 1.0, f"power series density needs |t| < 1, got {t}")
        first = 1.0 / ((1.0 - t) * (1.0 + t))
        if family.r == 0.0:
            return first / math.pi
        second = abs(family.r) / (1.0 + 2.0 * family.r * t)
        return math.sqrt((first - second) * (first + second)) / math.pi
    require(t > 0.5, f"Dirichlet density needs t > 1/2, got {t}")
    return _dirichlet_density(t)


def closed_form_expected(family, interval):
    """Expected number of real zeros on the interval, for families with a closed integral"""
    a, b = interval.lo, interval.hi
    tag = family.tag
    if tag == "kostlan":
        if interval == Interval.real_line():
            return math.sqrt(family.n)
        return math.sqrt(family.n) / math.pi * (math.atan(b) - math.atan(a))
    if tag == "power_series":
        require(-1.0 <= a and b <= 1.0, f"power series interval must lie in [-1, 1], got {interval}")
        lo = -math.inf if a == -1.0 else math.atanh(a)
        hi = math.inf if b == 1.0 else math.atanh(b)
        return (hi - lo) / math.pi
    if tag == "trig_sum":
        return (b - a) / math.pi * _trig_rate(family)
    if tag == "entire":
        return (b - a) / math.pi
    raise UnsupportedFamilyError(f"no closed-form integral for the {tag} family")


def kac_expected(n, tol=1e-12):
    """Expected real zeros of the degree-n Kac polynomial, 4 x integral over [0, 1]"""
    require(n >= 1, f"Kac degree must be >= 1, got {n}")
    result = integrate_adaptive(lambda t: kac_density(n, t), Interval(0.0, 1.0), tol / 4.0,
                                points=(math.sqrt(1.0 - KAC_UNIT_WINDOW),))
    return 4.0 * result.value


# ---------------------------------------------------------------------------
# Asymptotics
# ---------------------------------------------------------------------------


def _c1_integrand(x):
    if x < 1e-2:
        x2 = x * x
        inside = 1.0 / 3.0 - x2 / 15.0 + 2.0 * x2 * x2 / 189.0
    else:
        em = -math.expm1(-2.0 * x)
        inside = 1.0 / (x * x) - 4.0 * math.exp(-2.0 * x) / (em * em)
    return math.sqrt(inside) - 1.0 / (x + 1.0)


@lru_cache(maxsize=1)
def kac_constant():
    """Constant term of the Kac expected-count expansion, computed by quadrature"""
    integral = integrate_adaptive(_c1_integrand, Interval(0.0, math.inf), 1e-13).value
    value = 2.0 / math.pi * (math.log(2.0) + integral)
    logger.debug(f"Kac constant: {value:.15g}")
    return value


def kac_asymptotic(n):
    require(n >= 1, f"Kac degree must be >= 1, got {n}")
    terms = [
        ("(2/pi) log n", 2.0 / math.pi * math.log(n)),
        ("C1", kac_constant()),
        ("2/(n pi)", 2.0 / (n * math.pi)),
    ]
    return AsymptoticResult(math.fsum(v for _, v in terms), terms)


def noncentral_asymptotic(n, m):
    """Expected real and positive zeros of a degree-n polynomial with iid N(m, 1) coefficients"""
    require(n >= 2, f"degree must be >= 2, got {n}")
    if m == 0:
        raise DomainError("mean must be nonzero; use kac_asymptotic for m = 0")
    expected = math.fsum((
        math.log(n) / math.pi,
        kac_constant() / 2.0,
        0.5,
        -euler_gamma() / math.pi,
        -2.0 / math.pi * math.log(abs(m)),
    ))
    e = erf(abs(m) / math.sqrt(2.0))
    positive = 0.5 - 0.5 * e * e + exp_integral_gamma0(m * m) / math.pi
    return NoncentralAsymptotic(expected, positive)


def noncentral_kac_ensemble(n, m):
    return Ensemble(BasisSpec.monomial(n), mean=MeanSpec.vector([m] * (n + 1)))


# ---------------------------------------------------------------------------
# Mean constructions
# ---------------------------------------------------------------------------


def _prime_exponents(k):
    exponents = {}
    p = 2
    while p * p <= k:
        while k % p == 0:
            exponents[p] = exponents.get(p, 0) + 1
            k //= p
        p += 1 if p == 2 else 2
    if k > 1:
        exponents[k] = exponents.get(k, 0) + 1
    return exponents


def dirichlet_mean_coefficient(k, m):
    """Coefficient of k^-t in m sqrt(zeta(2t))"""
    require(1 <= k <= 10**12, f"coefficient index must be in [1, 1e12], got {k}")
    root = math.isqrt(k)
    if root * root != k:
        return 0.0
    value = m
    for exponent in _prime_exponents(root).values():
        value *= double_factorial_ratio(2 * exponent - 1, 2 * exponent)
    return value


DIRICHLET_MEAN_TERMS = 1024


def case1_mean(family, m):
    """Mean whose projection m0(t) is the constant m"""
    m = float(m)
    tag = family.tag
    if tag == "kostlan":
        n = family.n
        if n % 2:
            raise UnsupportedFamilyError(f"(1+t^2)^(n/2) is not a polynomial for odd n={n}")
        coeffs = [0.0] * (n + 1)
        for j in range(n // 2 + 1):
            coeffs[2 * j] = m * math.comb(n // 2, j) / math.sqrt(math.comb(n, 2 * j))
        return MeanSpec("case1", scale=m, coefficients=tuple(coeffs),
                        mu=lambda t: m * (1.0 + t * t) ** (n / 2.0))
    if tag == "trig_sum":
        level = math.sqrt(math.fsum(s * s for s in family.sigmas))
        coeffs = None
        if 0.0 in family.nus:
            k = family.nus.index(0.0)
            coeffs = [0.0] * (2 * len(family.nus))
            coeffs[k] = m * level / family.sigmas[k]
            coeffs = tuple(coeffs)
        return MeanSpec("case1", scale=m, coefficients=coeffs, mu=lambda t: m * level)
    if tag == "power_series":
        return MeanSpec("case1", scale=m, mu=lambda t: m / math.sqrt((1.0 - t) * (1.0 + t)))
    if tag == "entire":
        return MeanSpec("case1", scale=m, mu=lambda t: m * math.exp(t * t / 2.0))
    if tag == "dirichlet":
        coeffs = tuple(dirichlet_mean_coefficient(k, m) for k in range(1, DIRICHLET_MEAN_TERMS + 1))
        return MeanSpec("case1", scale=m, coefficients=coeffs,
                        mu=lambda t: m * math.sqrt(zeta_derivs(2.0 * t, 0)))
    raise UnsupportedFamilyError(f"no constant-projection mean for the {tag} family")


def _dirichlet_speed_integral(lo, hi):
    value = integrate_adaptive(lambda x: math.pi * _dirichlet_density(x), Interval(min(lo, hi), max(lo, hi)),
                               1e-12).value
    return value if hi >= lo else -value


def case2_mean(family, m, anchor=None):
    """Mean with m0(t) = m1(t), normalized so that m0(anchor) = m"""
    m = float(m)
    K = float(anchor) if anchor is not None else (1.0 if family.tag == "dirichlet" else 0.0)
    tag = family.tag
    if tag == "power_series":
        require(abs(K) < 1.0, f"anchor must satisfy |K| < 1, got {K}")
        c = math.sqrt((1.0 - K) / (1.0 + K))
        return MeanSpec("case2", scale=m, anchor=K,
                        mu=lambda t: m * c / (1.0 - t),
                        m0=lambda t: m * c * math.sqrt((1.0 + t) / (1.0 - t)))
    if tag == "entire":
        return MeanSpec("case2", scale=m, anchor=K,
                        mu=lambda t: m * math.exp(t * t / 2.0 + t - K),
                        m0=lambda t: m * math.exp(t - K))
    if tag == "dirichlet":
        require(K > 0.5, f"Dirichlet anchor must exceed 1/2, got {K}")

        def m0(t):
            return m * math.exp(_dirichlet_speed_integral(K, t))

        return MeanSpec("case2", scale=m, anchor=K,
                        mu=lambda t: m0(t) * math.sqrt(zeta_derivs(2.0 * t, 0)), m0=m0)
    raise UnsupportedFamilyError(f"no self-similar mean for the {tag} family")


def case2_expected(mean, interval):
    """Closed-form zero count on [a, b] for a Case II mean"""
    require(mean.kind == "case2" and mean.m0 is not None, "closed form needs a case2 mean with m0")

    def antiderivative(t):
        m0 = mean.m0(t)
        e = erf(m0 / math.sqrt(2.0))
        return 0.25 * e * e - exp_integral_gamma0(m0 * m0) / (2.0 * math.pi)

    return antiderivative(interval.hi) - antiderivative(interval.lo)


# ---------------------------------------------------------------------------
# Rational maps
# ---------------------------------------------------------------------------


def spijker_basis(a, b, c, d):
    """Basis whose projective curve is the stereographic image of (a + ib)/(c + id)"""
    require(not (c.is_zero and d.is_zero), "denominator c + id must not vanish identically")
    f0 = poly_scale(poly_add(poly_mul(a, c), poly_mul(b, d)), 2.0)
    f1 = poly_scale(poly_sub(poly_mul(b, c), poly_mul(a, d)), 2.0)
    f2 = poly_sub(poly_add(poly_mul(a, a), poly_mul(b, b)), poly_add(poly_mul(c, c), poly_mul(d, d)))
    if f0.is_zero and f1.is_zero and f2.is_zero:
        raise DomainError("degenerate rational map: all curve components vanish")
    return BasisSpec.polynomials([f0, f1, f2])


def spijker_length(a, b, c, d, tol=1e-10):
    """Length of the image of the real line on the unit sphere"""
    e = Ensemble(spijker_basis(a, b, c, d))
    return math.pi * expected_zeros(e, tol=tol).value


def rational_fixed_points_mc_target(n):
    require(n >= 0, f"degree must be >= 0, got {n}")
    return math.sqrt(n + 1)
