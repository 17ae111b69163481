"""
Expected real-zero densities for random functions sum a_k f_k(t) with
Gaussian coefficients a ~ N(m, C).

The central density is (1/pi) sqrt(A D - B^2) / A with A = v.Cv, B = v'.Cv,
D = v'.Cv' evaluated at the point; a second path takes the mixed partial
of log K(x, y), K(x, y) = v(x).Cv(y), by finite differences. Basis
evaluators may return values scaled by a positive per-point factor
exp(-log_scale); the density does not depend on it, which keeps
evaluation finite far from the origin.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, NamedTuple, Optional

import numpy as np
from numpy.polynomial import chebyshev as ncheb
from scipy import special

from config import load_defaults
from errors import DomainError, EvaluationError, UnsupportedFamilyError, require
from numerics import (
    Interval,
    Poly,
    erf,
    integrate_adaptive,
    poly_add,
    poly_scale,
    zeta_tail,
    zeta_truncation,
)

logger = logging.getLogger(__name__)

CAUCHY_SCHWARZ_SLACK = 1e-10


class BasisValues(NamedTuple):
    values: np.ndarray
    derivs: np.ndarray
    log_scale: float


# ---------------------------------------------------------------------------
# Basis evaluators
# ---------------------------------------------------------------------------


def _scaled_powers(t, degree):
    """t^j and j t^(j-1), j=0..degree, divided by |t|^degree when |t| > 1"""
    j = np.arange(degree + 1, dtype=float)
    if abs(t) <= 1.0:
        powers = np.power(t, j)
        derivs = np.zeros(degree + 1)
        if degree >= 1:
            derivs[1:] = j[1:] * np.power(t, j[1:] - 1.0)
        return powers, derivs, 0.0
    sign = 1.0 if t > 0 else -1.0
    x = 1.0 / abs(t)
    signs = np.power(sign, j)
    powers = signs * np.power(x, degree - j)
    derivs = np.zeros(degree + 1)
    if degree >= 1:
        derivs[1:] = j[1:] * signs[1:] * sign * np.power(x, degree - j[1:] + 1.0)
    return powers, derivs, degree * math.log(abs(t))


def _coefficient_matrix_evaluator(matrix):
    """Basis f_k(t) = sum_j matrix[k, j] t^j"""
    matrix = np.asarray(matrix, dtype=float)
    degree = matrix.shape[1] - 1

    def evaluate(t, size=None):
        powers, derivs, log_scale = _scaled_powers(t, degree)
        return BasisValues(matrix @ powers, matrix @ derivs, log_scale)

    return evaluate


@lru_cache(maxsize=64)
def _chebyshev_derivative_matrix(n):
    return ncheb.chebder(np.eye(n + 1), axis=0)


def _chebyshev_weights(n):
    weights = np.full(n + 1, math.sqrt(2.0))
    weights[0] = 1.0
    return weights


def _chebyshev_evaluator(n):
    weights = _chebyshev_weights(n)

    def evaluate(t, size=None):
        values = ncheb.chebvander(t, n).reshape(-1)
        if n == 0:
            derivs = np.zeros(1)
        else:
            derivs = ncheb.chebvander(t, n - 1).reshape(-1) @ _chebyshev_derivative_matrix(n)
        return BasisValues(weights * values, weights * derivs, 0.0)

    return evaluate


def _trig_evaluator(frequencies, scales):
    nu = np.asarray(frequencies, dtype=float)
    sigma = np.asarray(scales, dtype=float)

    def evaluate(t, size=None):
        c = np.cos(nu * t)
        s = np.sin(nu * t)
        values = np.concatenate([sigma * c, sigma * s])
        derivs = np.concatenate([-sigma * nu * s, sigma * nu * c])
        return BasisValues(values, derivs, 0.0)

    return evaluate


def _power_series_truncation(t, cap, tail_tol):
    a = abs(t)
    if a < 1e-3:
        return 8
    lt = -math.log(a)
    n = 8
    for _ in range(4):
        n = math.ceil((-math.log(tail_tol) + 2.0 * math.log(n + 1.0)) / (2.0 * lt))
    if n > cap:
        raise DomainError(f"power series at t={t} needs {n} terms (cap {cap})")
    return max(n, 8)


def _entire_truncation(t, cap):
    n = math.ceil(t * t + 12.0 * max(abs(t), 1.0) + 30.0)
    if n > cap:
        raise DomainError(f"entire series at t={t} needs {n} terms (cap {cap})")
    return n


def _power_series_evaluator(t, size):
    k = np.arange(size, dtype=float)
    values = np.power(t, k)
    derivs = np.zeros(size)
    derivs[1:] = k[1:] * np.power(t, k[1:] - 1.0)
    return BasisValues(values, derivs, 0.0)


def _entire_evaluator(t, size):
    # f_k = t^k / sqrt(k!), f_k' = sqrt(k) f_{k-1}
    values = np.zeros(size)
    if t == 0.0:
        values[0] = 1.0
        log_scale = 0.0
    else:
        k = np.arange(size, dtype=float)
        logs = k * math.log(abs(t)) - 0.5 * special.gammaln(k + 1.0)
        log_scale = float(logs.max())
        values = np.exp(logs - log_scale)
        if t < 0:
            values[1::2] *= -1.0
    derivs = np.zeros(size)
    derivs[1:] = np.sqrt(np.arange(1, size, dtype=float)) * values[:-1]
    return BasisValues(values, derivs, log_scale)


def _dirichlet_evaluator(t, size):
    logk = np.log(np.arange(1, size, dtype=float))
    values = np.exp(-t * logk)
    return BasisValues(values, -logk * values, 0.0)


def _dirichlet_tail(s, n, order):
    return zeta_tail(s, n, order)


def _sin_exp_evaluator(t, size=None):
    # {1, sin t, e^|t|} scaled by e^-|t|
    decay = math.exp(-abs(t))
    sign = math.copysign(1.0, t) if t != 0.0 else 0.0
    values = np.array([decay, math.sin(t) * decay, 1.0])
    derivs = np.array([0.0, math.cos(t) * decay, sign])
    return BasisValues(values, derivs, abs(t))


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BasisSpec:
    """
    A differentiable basis f_0..f_n (or an infinite series truncated per point).

    `evaluator(t, size)` returns scaled values and derivatives; `truncation`
    is set for series bases and maps t to the number of terms to keep.
    `tail(s, n, order)` adds the analytic remainder of the kernel diagonal
    beyond the truncation (Dirichlet series).
    """

    kind: str
    dimension: Optional[int]
    evaluator: Callable = field(compare=False)
    domain: Interval = Interval.real_line()
    breakpoints: tuple = ()
    truncation: Optional[Callable] = field(default=None, compare=False)
    tail: Optional[Callable] = field(default=None, compare=False)
    polys: Optional[tuple] = None
    params: tuple = ()

    def __post_init__(self):
        require(self.dimension is None or self.dimension >= 1, "basis dimension must be at least 1")
        require(self.dimension is not None or self.truncation is not None,
                "series bases need a truncation rule")

    @property
    def is_series(self):
        return self.dimension is None

    @property
    def is_polynomial(self):
        return self.polys is not None

    def size_at(self, t):
        return self.dimension if self.dimension is not None else self.truncation(t)

    def evaluate(self, t, size=None):
        size = self.size_at(t) if size is None else size
        out = self.evaluator(float(t), size)
        if not (np.all(np.isfinite(out.values)) and np.all(np.isfinite(out.derivs))):
            raise EvaluationError(f"{self.kind} basis is not finite at t={t!r}")
        return out

    def to_poly(self, coefficients):
        """Polynomial sum_k a_k f_k(t) for polynomial bases"""
        if self.polys is None:
            raise UnsupportedFamilyError(f"{self.kind} basis is not polynomial")
        total = Poly((0.0,))
        for a, p in zip(coefficients, self.polys):
            total = poly_add(total, poly_scale(p, a))
        return total

    def sample_function(self, coefficients):
        """t -> sum_k a_k f_k(t) up to a positive factor (sign-correct)"""
        a = np.asarray(coefficients, dtype=float)

        def f(t):
            values = self.evaluate(t, size=len(a)).values
            return float(np.dot(a[: len(values)], values))

        return f

    # constructors -----------------------------------------------------

    @classmethod
    def monomial(cls, n):
        require(n >= 1, f"monomial basis needs degree >= 1, got {n}")
        polys = tuple(Poly((0.0,) * k + (1.0,)) for k in range(n + 1))
        return cls("monomial", n + 1, _coefficient_matrix_evaluator(np.eye(n + 1)),
                   polys=polys, params=(("n", n),))

    @classmethod
    def weighted_monomial(cls, variances):
        variances = tuple(float(v) for v in variances)
        require(len(variances) >= 2, "weighted monomial basis needs at least two variances")
        require(all(v >= 0 for v in variances), "variances must be nonnegative")
        scales = np.sqrt(variances)
        polys = tuple(Poly((0.0,) * k + (float(s),)) for k, s in enumerate(scales))
        return cls("weighted_monomial", len(variances),
                   _coefficient_matrix_evaluator(np.diag(scales)),
                   polys=polys, params=(("variances", variances),))

    @classmethod
    def kostlan(cls, n):
        return cls.weighted_monomial([math.comb(n, k) for k in range(n + 1)])

    @classmethod
    def polynomials(cls, polys):
        polys = tuple(polys)
        require(len(polys) >= 1, "polynomial basis needs at least one polynomial")
        degree = max(p.degree for p in polys)
        matrix = np.zeros((len(polys), degree + 1))
        for k, p in enumerate(polys):
            matrix[k, : p.degree + 1] = p.coeffs
        return cls("polynomials", len(polys), _coefficient_matrix_evaluator(matrix), polys=polys)

    @classmethod
    def trig(cls, frequencies, scales):
        frequencies = tuple(float(v) for v in frequencies)
        scales = tuple(float(s) for s in scales)
        require(len(frequencies) == len(scales) and frequencies,
                "trig basis needs matching nonempty frequency and scale lists")
        return cls("trig", 2 * len(frequencies), _trig_evaluator(frequencies, scales),
                   params=(("frequencies", frequencies), ("scales", scales)))

    @classmethod
    def chebyshev(cls, n):
        require(n >= 1, f"chebyshev basis needs degree >= 1, got {n}")
        weights = _chebyshev_weights(n)
        polys = tuple(
            Poly.from_array(ncheb.cheb2poly(np.eye(n + 1)[k]) * weights[k]) for k in range(n + 1)
        )
        return cls("chebyshev", n + 1, _chebyshev_evaluator(n), domain=Interval(-1.0, 1.0),
                   polys=polys, params=(("n", n),))

    @classmethod
    def power_series(cls, clip=None):
        defaults = load_defaults()
        clip = defaults.domain_clip if clip is None else clip
        cap, tol = defaults.series_cap, defaults.series_tail_tol * 1e-3
        return cls("power_series", None, _power_series_evaluator,
                   domain=Interval(-1.0 + clip, 1.0 - clip),
                   truncation=lambda t: _power_series_truncation(t, cap, tol))

    @classmethod
    def entire(cls):
        cap = load_defaults().series_cap
        return cls("entire", None, _entire_evaluator, truncation=lambda t: _entire_truncation(t, cap))

    @classmethod
    def dirichlet(cls, clip=None):
        clip = load_defaults().domain_clip if clip is None else clip
        return cls("dirichlet", None, _dirichlet_evaluator,
                   domain=Interval(0.5 + clip, math.inf),
                   truncation=lambda t: zeta_truncation(2.0 * t),
                   tail=_dirichlet_tail)

    @classmethod
    def sin_exp(cls):
        return cls("sin_exp", 3, _sin_exp_evaluator, breakpoints=(0.0,))

    @classmethod
    def custom(cls, evaluator, dimension, domain=None, breakpoints=()):
        """Wrap evaluator(t) -> (values, derivs) or BasisValues"""

        def evaluate(t, size=None):
            out = evaluator(t)
            if isinstance(out, BasisValues):
                return out
            values, derivs = out[0], out[1]
            return BasisValues(np.asarray(values, dtype=float), np.asarray(derivs, dtype=float), 0.0)

        return cls("custom", dimension, evaluate, domain=domain or Interval.real_line(),
                   breakpoints=tuple(breakpoints))


@lru_cache(maxsize=32)
def _bidiagonal_factor(r, n):
    """Cholesky of the tridiagonal correlation matrix: (diagonal, subdiagonal)"""
    diag = np.empty(n)
    sub = np.zeros(n)
    diag[0] = 1.0
    for k in range(1, n):
        sub[k] = r / diag[k - 1]
        diag[k] = math.sqrt(1.0 - sub[k] ** 2)
    return diag, sub


def _bucket(n):
    return 1 << max(4, (n - 1).bit_length())


@dataclass(frozen=True)
class CovarianceSpec:
    """Coefficient covariance C with its square-root factor L (C = L L^T)"""

    kind: str
    diagonal: Optional[tuple] = None
    r: float = 0.0
    dense: Optional[tuple] = None
    gain: float = 1.0

    def __post_init__(self):
        require(self.gain > 0, "covariance scale must be positive")
        if self.kind == "diagonal":
            require(self.diagonal is not None and all(d >= 0 for d in self.diagonal),
                    "diagonal covariance needs nonnegative entries")
        elif self.kind == "tridiagonal_correlation":
            require(abs(self.r) <= 0.5, f"tridiagonal correlation needs |r| <= 1/2, got {self.r}")
        elif self.kind == "dense_spd":
            mat = np.asarray(self.dense, dtype=float)
            require(mat.ndim == 2 and mat.shape[0] == mat.shape[1], "dense covariance must be square")
            require(np.allclose(mat, mat.T, atol=1e-12), "dense covariance must be symmetric")
        else:
            require(self.kind == "identity", f"unknown covariance kind {self.kind!r}")

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def diag(cls, values):
        return cls("diagonal", diagonal=tuple(float(v) for v in values))

    @classmethod
    def tridiagonal_correlation(cls, r):
        return cls("tridiagonal_correlation", r=float(r))

    @classmethod
    def dense_spd(cls, matrix):
        mat = np.asarray(matrix, dtype=float)
        return cls("dense_spd", dense=tuple(tuple(row) for row in mat.tolist()))

    def scaled(self, lam):
        return CovarianceSpec(self.kind, self.diagonal, self.r, self.dense, self.gain * lam)

    @property
    def dimension(self):
        if self.kind == "diagonal":
            return len(self.diagonal)
        if self.kind == "dense_spd":
            return len(self.dense)
        return None

    @cached_property
    def _dense_factor(self):
        mat = np.asarray(self.dense, dtype=float)
        try:
            return np.linalg.cholesky(mat)
        except np.linalg.LinAlgError:
            # semidefinite: symmetric square root
            vals, vecs = np.linalg.eigh(mat)
            require(vals.min() >= -1e-12 * max(1.0, abs(vals).max()),
                    "dense covariance is not positive semidefinite")
            logger.debug("covariance is singular; using symmetric square root")
            return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T

    def matrix(self, n=None):
        n = self.dimension if n is None else n
        if self.kind == "identity":
            mat = np.eye(n)
        elif self.kind == "diagonal":
            mat = np.diag(self.diagonal)
        elif self.kind == "tridiagonal_correlation":
            mat = np.eye(n) + self.r * (np.eye(n, k=1) + np.eye(n, k=-1))
        else:
            mat = np.asarray(self.dense, dtype=float)
        return self.gain * mat

    def factor(self, n=None):
        n = self.dimension if n is None else n
        root = math.sqrt(self.gain)
        if self.kind == "identity":
            return root * np.eye(n)
        if self.kind == "diagonal":
            return root * np.diag(np.sqrt(self.diagonal))
        if self.kind == "tridiagonal_correlation":
            diag, sub = _bidiagonal_factor(self.r, _bucket(n))
            return root * (np.diag(diag[:n]) + np.diag(sub[1:n], k=-1))
        return root * self._dense_factor

    def apply_factor_t(self, v):
        """w = L^T v, so that w.w = v.Cv"""
        n = len(v)
        root = math.sqrt(self.gain)
        if self.kind == "identity":
            return root * v
        if self.kind == "diagonal":
            return root * np.sqrt(self.diagonal) * v
        if self.kind == "tridiagonal_correlation":
            diag, sub = _bidiagonal_factor(self.r, _bucket(n))
            w = diag[:n] * v
            w[:-1] += sub[1:n] * v[1:]
            return root * w
        return root * (self._dense_factor.T @ v)

    def sample(self, z):
        """a = L z for standard normal z"""
        n = len(z)
        root = math.sqrt(self.gain)
        if self.kind == "identity":
            return root * z
        if self.kind == "diagonal":
            return root * np.sqrt(self.diagonal) * z
        if self.kind == "tridiagonal_correlation":
            diag, sub = _bidiagonal_factor(self.r, _bucket(n))
            a = diag[:n] * z
            a[1:] += sub[1:n] * z[:-1]
            return root * a
        return root * (self._dense_factor @ z)


@dataclass(frozen=True)
class MeanSpec:
    """
    Coefficient mean.

    ``coefficient_vector`` gives m directly. ``case1`` and ``case2`` are the
    constructions with m0 constant or m0 = m1; they may carry the mean
    function `mu`, a closed form `m0`, and a finite coefficient vector
    when one exists (needed for sampling).
    """

    kind: str = "zero"
    scale: float = 0.0
    anchor: float = 0.0
    coefficients: Optional[tuple] = None
    mu: Optional[Callable] = field(default=None, compare=False)
    m0: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        require(self.kind in ("zero", "coefficient_vector", "case1", "case2"),
                f"unknown mean kind {self.kind!r}")
        if self.kind == "coefficient_vector":
            require(self.coefficients is not None, "coefficient_vector mean needs coefficients")

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def vector(cls, coefficients):
        return cls("coefficient_vector", coefficients=tuple(float(c) for c in coefficients))

    @property
    def is_zero(self):
        if self.kind == "zero":
            return True
        if self.kind == "coefficient_vector":
            return not any(self.coefficients)
        return self.scale == 0.0

    def coefficient_array(self, size):
        if self.is_zero:
            return np.zeros(size)
        if self.coefficients is None:
            raise UnsupportedFamilyError(f"{self.kind} mean has no finite coefficient vector")
        out = np.zeros(size)
        out[: len(self.coefficients)] = self.coefficients
        return out


@dataclass(frozen=True)
class Ensemble:
    basis: BasisSpec
    covariance: CovarianceSpec = CovarianceSpec.identity()
    mean: MeanSpec = MeanSpec()
    domain: Optional[Interval] = None

    def __post_init__(self):
        if self.domain is None:
            object.__setattr__(self, "domain", self.basis.domain)
        require(self.domain.within(self.basis.domain),
                f"ensemble domain {self.domain} outside basis domain {self.basis.domain}")
        cov_dim = self.covariance.dimension
        if cov_dim is not None:
            require(self.basis.dimension == cov_dim,
                    f"covariance dimension {cov_dim} != basis dimension {self.basis.dimension}")
        if self.basis.tail is not None:
            require(self.covariance.kind == "identity", "series with analytic tail need identity covariance")
        if self.mean.kind == "coefficient_vector" and self.basis.dimension is not None:
            require(len(self.mean.coefficients) == self.basis.dimension,
                    "mean vector length must equal basis dimension")

    @property
    def is_central(self):
        return self.mean.is_zero


@dataclass(frozen=True)
class KernelJet:
    """A = v.Cv, B = v'.Cv, D = v'.Cv', all multiplied by exp(-2 log_scale)"""

    A: float
    B: float
    D: float
    t: float
    log_scale: float = 0.0
    discriminant: float = 0.0

    @property
    def gamma_speed(self):
        return math.sqrt(self.discriminant) / self.A


@dataclass(frozen=True)
class MeanProjection:
    m0: float
    m1: float
    gamma_speed: float


# ---------------------------------------------------------------------------
# Central density
# ---------------------------------------------------------------------------


def _clamped_discriminant(A, B, D, t):
    disc = A * D - B * B
    if disc < 0.0:
        if disc < -CAUCHY_SCHWARZ_SLACK * A * D:
            raise EvaluationError(f"Cauchy-Schwarz violated at t={t!r}: AD-B^2={disc:.3g}")
        logger.debug(f"clamping AD-B^2={disc:.3g} to 0 at t={t!r}")
        disc = 0.0
    return disc


def _weighted(e, t, size=None):
    vals = e.basis.evaluate(t, size)
    w = e.covariance.apply_factor_t(vals.values)
    dw = e.covariance.apply_factor_t(vals.derivs)
    return w, dw, vals.log_scale


def kernel_jet(e, t):
    """Quadratic forms at t by compensated summation against the covariance factor"""
    t = float(t)
    require(e.domain.contains(t), f"t={t} outside ensemble domain {e.domain}")
    size = e.basis.size_at(t)
    w, dw, log_scale = _weighted(e, t, size)
    A = math.fsum(w * w)
    B = math.fsum(dw * w)
    D = math.fsum(dw * dw)
    if e.basis.tail is not None:
        A += e.basis.tail(2.0 * t, size, 0)
        B += e.basis.tail(2.0 * t, size, 1)
        D += e.basis.tail(2.0 * t, size, 2)
        disc = _clamped_discriminant(A, B, D, t)
    elif A > 0.0:
        # A D - B^2 = A |w' - (B/A) w|^2, free of cancellation
        r = dw - (B / A) * w
        disc = A * math.fsum(r * r)
    else:
        disc = 0.0
    if not A > 0.0:
        raise EvaluationError(f"kernel diagonal underflowed to {A!r} at t={t!r}")
    return KernelJet(A=A, B=B, D=D, t=t, log_scale=log_scale, discriminant=disc)


def density_central(e, t):
    require(e.is_central, "density_central needs a zero-mean ensemble")
    return kernel_jet(e, t).gamma_speed / math.pi


def log_kernel(e, x, y, size):
    """log K(x, y) up to terms separable in x and y"""
    vx = _weighted(e, x, size)[0]
    vy = _weighted(e, y, size)[0]
    k = math.fsum(vx * vy)
    if e.basis.tail is not None:
        k += e.basis.tail(x + y, size, 0)
    if not k > 0.0:
        raise EvaluationError(f"kernel is not positive at ({x!r}, {y!r})")
    return math.log(k)


def density_central_logderiv(e, t, h=None, kernel=None):
    """
    Density from the mixed partial of log K at (t, t) with a 4-point stencil.

    `kernel(x, y)` replaces the direct sum when a closed kernel is known.
    """
    require(e.is_central, "density_central_logderiv needs a zero-mean ensemble")
    h = load_defaults().logderiv_step if h is None else float(h)
    require(h > 0, "finite-difference step must be positive")
    t = float(t)
    if kernel is None:
        size = e.basis.size_at(t)

        def logk(x, y):
            return log_kernel(e, x, y, size)
    else:
        def logk(x, y):
            value = kernel(x, y)
            if not value > 0.0:
                raise EvaluationError(f"kernel is not positive at ({x!r}, {y!r})")
            return math.log(value)

    mixed = math.fsum((logk(t + h, t + h), -logk(t + h, t - h), -logk(t - h, t + h), logk(t - h, t - h)))
    mixed /= 4.0 * h * h
    if mixed < 0.0:
        if mixed < -1e-6:
            raise EvaluationError(f"log-kernel mixed partial is negative ({mixed:.3g}) at t={t!r}")
        mixed = 0.0
    return math.sqrt(mixed) / math.pi


# ---------------------------------------------------------------------------
# Non-central density
# ---------------------------------------------------------------------------


def _case2_numeric_m0(e, t):
    mean = e.mean
    anchor = mean.anchor
    if t == anchor:
        return mean.scale
    central = Ensemble(e.basis, e.covariance, MeanSpec(), e.domain)
    lo, hi = (anchor, t) if anchor < t else (t, anchor)
    speed = integrate_adaptive(lambda x: kernel_jet(central, x).gamma_speed, Interval(lo, hi), 1e-12).value
    return mean.scale * math.exp(speed if t > anchor else -speed)


def _m0_function(e):
    mean = e.mean
    if mean.m0 is not None:
        return mean.m0
    if mean.kind == "case1" and mean.mu is None:
        return lambda t: mean.scale
    if mean.kind == "case2" and mean.mu is None:
        return lambda t: _case2_numeric_m0(e, t)

    def m0(t):
        jet = kernel_jet(e, t)
        if mean.mu is not None:
            mu = mean.mu(t) * math.exp(-jet.log_scale)
        else:
            size = e.basis.size_at(t)
            values = e.basis.evaluate(t, size).values
            coeffs = mean.coefficient_array(len(values))
            mu = math.fsum(coeffs * values)
        return mu / math.sqrt(jet.A)

    return m0


def mean_projection(e, t):
    """m0 = mu/|w| and m1 = m0'/|gamma'| at t"""
    require(not e.is_central, "mean_projection needs a nonzero mean")
    t = float(t)
    jet = kernel_jet(e, t)
    speed = jet.gamma_speed
    if speed == 0.0:
        raise EvaluationError(f"|gamma'(t)| vanishes at t={t!r}; m1 is undefined")
    m0 = _m0_function(e)
    h = max(1e-6, 1e-6 * abs(t))
    lo, hi = t - h, t + h
    if not e.domain.contains(lo):
        lo = t
    if not e.domain.contains(hi):
        hi = t
    m0_t = m0(t)
    derivative = (m0(hi) - m0(lo)) / (hi - lo)
    return MeanProjection(m0=m0_t, m1=derivative / speed, gamma_speed=speed)


def density_noncentral(e, t):
    if e.is_central:
        return density_central(e, t)
    p = mean_projection(e, t)
    bracket = math.exp(-p.m1 * p.m1 / 2.0) + math.sqrt(math.pi / 2.0) * p.m1 * erf(p.m1 / math.sqrt(2.0))
    return p.gamma_speed * math.exp(-p.m0 * p.m0 / 2.0) * bracket / math.pi


def density(e, t):
    return density_central(e, t) if e.is_central else density_noncentral(e, t)


# ---------------------------------------------------------------------------
# Integrated quantities
# ---------------------------------------------------------------------------


def expected_zeros(e, interval=None, tol=None):
    """Expected number of real zeros of the ensemble on the interval"""
    interval = e.domain if interval is None else interval
    require(interval.within(e.domain), f"interval {interval} outside ensemble domain {e.domain}")
    f = (lambda t: density_central(e, t)) if e.is_central else (lambda t: density_noncentral(e, t))
    result = integrate_adaptive(f, interval, tol, points=e.basis.breakpoints)
    logger.debug(f"expected zeros of {e.basis.kind} on {interval}: {result.value:.12g}")
    return result


def _unit_curve(e, t, size):
    w = _weighted(e, t, size)[0]
    return w / math.sqrt(math.fsum(w * w))


def projected_arclength(e, interval=None, tol=None):
    """Length of t -> w(t)/|w(t)| on the unit sphere, by finite-difference speed"""
    require(e.is_central, "projected_arclength needs a zero-mean ensemble")
    require(e.basis.tail is None, f"{e.basis.kind} basis has no finite curve representation")
    interval = e.domain if interval is None else interval

    def speed(t):
        size = e.basis.size_at(t)
        h = 1e-5 * max(1.0, abs(t))
        lo, hi = t - h, t + h
        if not e.domain.contains(lo):
            lo = t
        if not e.domain.contains(hi):
            hi = t
        diff = _unit_curve(e, hi, size) - _unit_curve(e, lo, size)
        return math.sqrt(math.fsum(diff * diff)) / (hi - lo)

    return integrate_adaptive(speed, interval, tol, points=e.basis.breakpoints).value
