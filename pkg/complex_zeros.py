"""
Complex zeros of random series f(z) = sum a_k z^k whose coefficients have
independent real and imaginary Gaussian parts with variance sigma_k^2.

With phi(x) = sum sigma_k^2 x^k, the expected number of zeros in |z| < r is
n(r) = r^2 phi'(r^2) / phi(r^2), which is the mean of k under the weights
sigma_k^2 r^(2k). Its radial derivative is 2 Var[k] / r.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special

from errors import DomainError, require
from numerics import zeta_derivs

logger = logging.getLogger(__name__)

VGF_TAGS = ("kac_complex", "kostlan_complex", "entire_order_type", "custom")
KAC_UNIT_WINDOW = 1e-3
SERIES_CHUNK = 256
SERIES_MAX_TERMS = 10**6
# log of the relative weight below which series terms are dropped
SERIES_LOG_TAIL = math.log(1e-18)


@dataclass(frozen=True)
class VarianceGeneratingFunction:
    """phi(z) = sum sigma_k^2 z^k"""

    tag: str
    n: int = 0
    rho: float = 0.0
    tau: float = 0.0
    coefficients: Optional[tuple] = None
    log_variances: Optional[Callable] = field(default=None, compare=False)
    radius: float = math.inf

    def __post_init__(self):
        require(self.tag in VGF_TAGS, f"unknown variance generating function {self.tag!r}")
        if self.tag in ("kac_complex", "kostlan_complex"):
            require(self.n >= 1, f"{self.tag} needs degree >= 1, got {self.n}")
        if self.tag == "entire_order_type":
            require(self.rho > 0 and self.tau > 0, "order and type must be positive")
        if self.tag == "custom":
            require((self.coefficients is None) != (self.log_variances is None),
                    "custom phi needs exactly one of coefficients or log_variances")
            if self.coefficients is not None:
                require(all(c >= 0 for c in self.coefficients) and any(self.coefficients),
                        "variances must be nonnegative and not all zero")
            require(self.radius > 0, "radius of convergence must be positive")

    @classmethod
    def kac_complex(cls, n):
        return cls("kac_complex", n=int(n))

    @classmethod
    def kostlan_complex(cls, n):
        return cls("kostlan_complex", n=int(n))

    @classmethod
    def entire_order_type(cls, rho, tau):
        return cls("entire_order_type", rho=float(rho), tau=float(tau))

    @classmethod
    def custom(cls, coefficients=None, log_variances=None, radius=math.inf):
        coefficients = None if coefficients is None else tuple(float(c) for c in coefficients)
        return cls("custom", coefficients=coefficients, log_variances=log_variances, radius=float(radius))

    @property
    def degree(self):
        if self.tag in ("kac_complex", "kostlan_complex"):
            return self.n
        if self.coefficients is not None:
            return len(self.coefficients) - 1
        return None

    def variances(self):
        """sigma_k^2 for finite-degree families"""
        if self.tag == "kac_complex":
            return np.ones(self.n + 1)
        if self.tag == "kostlan_complex":
            return np.array([math.comb(self.n, k) for k in range(self.n + 1)], dtype=float)
        if self.coefficients is not None:
            return np.asarray(self.coefficients, dtype=float)
        raise DomainError(f"{self.tag} variance generating function has infinite degree")


@dataclass(frozen=True)
class RadialProfile:
    radii: tuple
    n_of_r: tuple

    def __post_init__(self):
        require(len(self.radii) == len(self.n_of_r), "radii and counts must have equal length")
        require(all(b >= a for a, b in zip(self.radii, self.radii[1:])), "radii must be sorted")
        require(all(b >= a - 1e-12 for a, b in zip(self.n_of_r, self.n_of_r[1:])),
                "n(r) must be nondecreasing")
        require(all(c == 0.0 for r, c in zip(self.radii, self.n_of_r) if r == 0.0), "n(0) must be 0")


def _log_weights(phi, x):
    """log(sigma_k^2 x^k) and k, truncated where the geometric tail is negligible"""
    log_x = math.log(x)
    if phi.log_variances is None:
        var = phi.variances()
        k = np.arange(len(var), dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(var) + k * log_x, k
    chunks, ks = [], []
    start, best = 0, -math.inf
    while start < SERIES_MAX_TERMS:
        k = np.arange(start, start + SERIES_CHUNK, dtype=float)
        lw = np.asarray(phi.log_variances(k), dtype=float) + k * log_x
        chunks.append(lw)
        ks.append(k)
        best = max(best, float(lw.max()))
        # geometric domination: the chunk is decreasing and already negligible
        if lw[-1] < best + SERIES_LOG_TAIL and lw[-1] < lw[-2]:
            return np.concatenate(chunks), np.concatenate(ks)
        start += SERIES_CHUNK
    raise DomainError(f"series for phi did not converge at x={x}")


def _moments(phi, r):
    lw, k = _log_weights(phi, r * r)
    w = np.exp(lw - lw.max())
    total = math.fsum(w)
    mean = math.fsum(k * w) / total
    var = math.fsum((k - mean) ** 2 * w) / total
    return mean, var


def _check_radius(phi, r):
    require(r >= 0, f"radius must be nonnegative, got {r}")
    require(r * r < phi.radius, f"r^2 = {r * r} is outside the radius of convergence {phi.radius}")


def _kac_count(n, r):
    x = r * r
    if x < 1.0:
        return x / (1.0 - x) - (n + 1) * x ** (n + 1) / -math.expm1((n + 1) * math.log(x))
    y = 1.0 / x
    return -1.0 / (1.0 - y) + (n + 1) / -math.expm1((n + 1) * math.log(y))


def radial_count(phi, r):
    """Expected number of zeros in the disk |z| < r"""
    r = float(r)
    _check_radius(phi, r)
    if r == 0.0:
        return 0.0
    if phi.tag == "entire_order_type":
        return phi.tau * phi.rho * r**phi.rho
    if phi.tag == "kostlan_complex":
        x = r * r
        return phi.n * x / (1.0 + x)
    if phi.tag == "kac_complex" and abs(r - 1.0) >= KAC_UNIT_WINDOW:
        return _kac_count(phi.n, r)
    return _moments(phi, r)[0]


def radial_density(phi, r):
    """d n(r) / dr"""
    r = float(r)
    _check_radius(phi, r)
    if phi.tag == "entire_order_type":
        return phi.tau * phi.rho**2 * r ** (phi.rho - 1.0) if r > 0 else 0.0
    if r == 0.0:
        return 0.0
    if phi.tag == "kostlan_complex":
        return 2.0 * phi.n * r / (1.0 + r * r) ** 2
    return 2.0 * _moments(phi, r)[1] / r


def areal_density(phi, r):
    """Expected zeros per unit area at |z| = r"""
    require(r > 0, "areal density needs r > 0")
    return radial_density(phi, r) / (2.0 * math.pi * r)


def radial_profile(phi, radii):
    radii = tuple(float(r) for r in radii)
    return RadialProfile(radii, tuple(radial_count(phi, r) for r in radii))


def order_type_profile(rho, tau, radii):
    return radial_profile(VarianceGeneratingFunction.entire_order_type(rho, tau), radii)


def factorial_weights():
    """phi(x) = e^x, i.e. sigma_k^2 = 1/k!"""
    return VarianceGeneratingFunction.custom(log_variances=lambda k: -special.gammaln(k + 1.0))


def dirichlet_strip_count(x1, x2, y1, y2):
    """Expected zeros of a random Dirichlet series in [x1, x2] x [y1, y2]"""
    require(x1 > 0.5, f"strip must lie right of the critical line, got x1={x1}")
    require(x1 <= x2 and y1 <= y2, "strip bounds must be ordered")
    if x1 == x2 or y1 == y2:
        return 0.0

    def log_deriv(x):
        s = 2.0 * x
        return zeta_derivs(s, 1) / zeta_derivs(s, 0)

    return (log_deriv(x2) - log_deriv(x1)) * (y2 - y1) / (2.0 * math.pi)
