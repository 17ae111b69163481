"""
Expected real roots of m random equations in m unknowns.

Closed forms cover the hypercube (Kac in every variable), Kostlan/Shub-Smale,
harmonic, power-series and entire families; the general density takes the
Hessian of log K(x, y) by finite differences for small m.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ensembles import kac_density, kac_expected
from errors import DomainError, EvaluationError, require
from numerics import Interval, double_factorial, integrate_2d, log_double_factorial, log_gamma

logger = logging.getLogger(__name__)

SYSTEM_TAGS = ("hypercube_kac", "kostlan_multihomogeneous", "harmonic", "power_series", "entire")
HESSIAN_STEP = 1e-4
HESSIAN_SLACK = 1e-8
EXACT_HARMONIC_LIMIT = 30


@dataclass(frozen=True)
class SystemFamily:
    tag: str
    m: int
    d: int = 0
    degrees: tuple = ()

    def __post_init__(self):
        require(self.tag in SYSTEM_TAGS, f"unknown system family {self.tag!r}")
        require(self.m >= 1, f"system needs m >= 1, got {self.m}")
        if self.tag == "kostlan_multihomogeneous":
            require(len(self.degrees) == self.m and all(d >= 1 for d in self.degrees),
                    "Kostlan system needs m degrees, each >= 1")
        elif self.tag in ("hypercube_kac", "harmonic"):
            require(self.d >= 1, f"{self.tag} system needs degree >= 1, got {self.d}")

    @classmethod
    def hypercube_kac(cls, d, m):
        return cls("hypercube_kac", m=int(m), d=int(d))

    @classmethod
    def kostlan(cls, degrees):
        degrees = tuple(int(d) for d in degrees)
        return cls("kostlan_multihomogeneous", m=len(degrees), degrees=degrees)

    @classmethod
    def harmonic(cls, d, m):
        return cls("harmonic", m=int(m), d=int(d))

    @classmethod
    def power_series(cls, m):
        return cls("power_series", m=int(m))

    @classmethod
    def entire(cls, m):
        return cls("entire", m=int(m))


@dataclass(frozen=True)
class HarmonicCoeffs:
    beta: tuple
    exact: tuple = None
    residuals: tuple = ()


def projective_constant(m):
    """pi^-(m+1)/2 Gamma((m+1)/2): density of a uniform point on real projective m-space"""
    return math.exp(log_gamma((m + 1) / 2.0) - (m + 1) / 2.0 * math.log(math.pi))


def _harmonic_rate(d, m):
    return (d * (d + m - 1) / m) ** (m / 2.0)


def systems_expected(family):
    tag, m = family.tag, family.m
    if tag == "kostlan_multihomogeneous":
        return math.sqrt(math.prod(family.degrees))
    if tag == "harmonic":
        return _harmonic_rate(family.d, m)
    if tag == "hypercube_kac":
        return projective_constant(m) * (math.pi * kac_expected(family.d)) ** m
    return math.inf


def hypercube_kac_asymptotic(d, m):
    require(d >= 2 and m >= 1, "hypercube asymptotic needs d >= 2, m >= 1")
    return projective_constant(m) * (2.0 * math.log(d)) ** m


def systems_density(family, t):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    m = family.m
    require(t.shape == (m,), f"point must have {m} coordinates, got shape {t.shape}")
    c = projective_constant(m)
    tag = family.tag
    if tag == "entire":
        return c
    if tag == "power_series":
        require(bool(np.all(np.abs(t) < 1.0)), "power series system needs |t_k| < 1")
        return c * float(np.prod(1.0 / ((1.0 - t) * (1.0 + t))))
    if tag == "hypercube_kac":
        return c * math.pi**m * math.prod(kac_density(family.d, tk) for tk in t)
    shell = (1.0 + float(np.dot(t, t))) ** ((m + 1) / 2.0)
    if tag == "kostlan_multihomogeneous":
        return c * math.sqrt(math.prod(family.degrees)) / shell
    return c * _harmonic_rate(family.d, m) / shell


def systems_density_general(kernel, t, m):
    """Zero density from det of the mixed Hessian of log K(x, y) at x = y = t"""
    require(1 <= m <= 3, f"general system density supports m <= 3, got {m}")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    require(t.shape == (m,), f"point must have {m} coordinates")
    h = HESSIAN_STEP
    eye = np.eye(m)

    def logk(x, y):
        value = kernel(x, y)
        if not value > 0.0:
            raise EvaluationError(f"kernel is not positive at {x}, {y}")
        return math.log(value)

    hess = np.empty((m, m))
    for i in range(m):
        for j in range(m):
            xi, yj = h * eye[i], h * eye[j]
            hess[i, j] = math.fsum((
                logk(t + xi, t + yj), -logk(t + xi, t - yj), -logk(t - xi, t + yj), logk(t - xi, t - yj),
            )) / (4.0 * h * h)
    hess = 0.5 * (hess + hess.T)
    lowest = float(np.linalg.eigvalsh(hess).min())
    if lowest < -HESSIAN_SLACK:
        raise EvaluationError(f"log-kernel Hessian is not positive semidefinite (eigenvalue {lowest:.3g})")
    det = max(float(np.linalg.det(hess)), 0.0)
    return projective_constant(m) * math.sqrt(det)


def _exact_beta(d, m, k):
    return Fraction(
        (-1) ** k * math.factorial(d) * double_factorial(m + 2 * d - 2 * k - 3),
        2**k * math.factorial(k) * math.factorial(d - 2 * k) * double_factorial(m + 2 * d - 3),
    )


def _log_beta(d, m, k):
    return (log_gamma(d + 1) + log_double_factorial(m + 2 * d - 2 * k - 3)
            - k * math.log(2.0) - log_gamma(k + 1) - log_gamma(d - 2 * k + 1)
            - log_double_factorial(m + 2 * d - 3))


def harmonic_coeffs(d, m, exact=None):
    """Coefficients of the orthogonally invariant harmonic kernel, beta_0 = 1"""
    require(d >= 1 and m >= 1, f"harmonic coefficients need d, m >= 1, got ({d}, {m})")
    exact = d <= EXACT_HARMONIC_LIMIT if exact is None else exact
    if exact and d > EXACT_HARMONIC_LIMIT:
        raise DomainError(f"exact harmonic coefficients limited to d <= {EXACT_HARMONIC_LIMIT}, got {d}")
    ks = range(d // 2 + 1)
    if exact:
        betas = [_exact_beta(d, m, k) for k in ks]
        residuals = tuple(
            2 * k * (m + 2 * d - 2 * k - 1) * betas[k] + (d - 2 * k + 2) * (d - 2 * k + 1) * betas[k - 1]
            for k in ks if k >= 1
        )
        return HarmonicCoeffs(tuple(float(b) for b in betas), tuple(betas), residuals)
    betas = [(-1) ** k * math.exp(_log_beta(d, m, k)) for k in ks]
    residuals = []
    for k in ks:
        if k == 0:
            continue
        a = 2 * k * (m + 2 * d - 2 * k - 1) * betas[k]
        b = (d - 2 * k + 2) * (d - 2 * k + 1) * betas[k - 1]
        residuals.append((a + b) / max(abs(a), abs(b), 1e-300))
    return HarmonicCoeffs(tuple(betas), None, tuple(residuals))


def harmonic_kernel(d, m):
    """K(x, y) = sum_k beta_k |X|^2k |Y|^2k (X.Y)^(d-2k) with X = (1, x)"""
    beta = harmonic_coeffs(d, m).beta

    def kernel(x, y):
        xx = 1.0 + float(np.dot(x, x))
        yy = 1.0 + float(np.dot(y, y))
        xy = 1.0 + float(np.dot(x, y))
        return math.fsum(b * (xx * yy) ** k * xy ** (d - 2 * k) for k, b in enumerate(beta))

    return kernel


def family_kernel(family):
    """Kernel v(x).Cv(y) of a single equation of the family"""
    tag, d = family.tag, family.d
    if tag == "entire":
        return lambda x, y: math.exp(float(np.dot(x, y)))
    if tag == "power_series":
        return lambda x, y: float(np.prod(1.0 / (1.0 - np.asarray(x) * np.asarray(y))))
    if tag == "hypercube_kac":
        return lambda x, y: float(np.prod([sum((a * b) ** j for j in range(d + 1)) for a, b in zip(x, y)]))
    if tag == "harmonic":
        return harmonic_kernel(d, family.m)
    degrees = set(family.degrees)
    require(len(degrees) == 1, "a single kernel exists only for equal Kostlan degrees")
    d = degrees.pop()
    return lambda x, y: (1.0 + float(np.dot(x, y))) ** d


def integrate_plane(family, tol=1e-6):
    """Nested quadrature of a two-variable density over the plane"""
    require(family.m == 2, "plane integration needs m = 2")
    require(math.isfinite(systems_expected(family)), f"{family.tag} system has infinitely many expected roots")
    line = Interval.real_line()
    return integrate_2d(lambda x, y: systems_density(family, (x, y)), line, line, tol).value
