"""
Numerical building blocks: special functions, adaptive quadrature,
polynomial arithmetic and a reproducible Gaussian sampler.

Everything here is pure; the sampler is an immutable value that hands back
a new value when advanced.
"""
import heapq
import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import special

from config import load_defaults
from errors import ConvergenceError, DomainError, EvaluationError, require

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    """Integration/counting domain; either end may be infinite"""

    lo: float
    hi: float

    def __post_init__(self):
        require(not (math.isnan(self.lo) or math.isnan(self.hi)), "interval endpoints must not be NaN")
        require(self.lo < self.hi, f"interval needs lo < hi, got ({self.lo}, {self.hi})")

    @property
    def lo_infinite(self):
        return math.isinf(self.lo)

    @property
    def hi_infinite(self):
        return math.isinf(self.hi)

    @property
    def finite(self):
        return not (self.lo_infinite or self.hi_infinite)

    def contains(self, t):
        return self.lo <= t <= self.hi

    def within(self, other):
        return other.lo <= self.lo and self.hi <= other.hi

    @classmethod
    def real_line(cls):
        return cls(-math.inf, math.inf)

    @classmethod
    def parse(cls, text):
        """Parse ``lo:hi`` with ``inf`` allowed on either side"""
        lo, hi = text.split(":")
        return cls(float(lo), float(hi))


@dataclass(frozen=True)
class Poly:
    """Real polynomial, coefficients in ascending degree"""

    coeffs: tuple

    def __post_init__(self):
        c = [float(x) for x in self.coeffs]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        if not c:
            c = [0.0]
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def is_zero(self):
        return self.degree == 0 and self.coeffs[0] == 0.0

    @property
    def array(self):
        return np.asarray(self.coeffs, dtype=float)

    @property
    def leading(self):
        return self.coeffs[-1]

    def __call__(self, x):
        return poly_eval(self, x)

    @classmethod
    def from_array(cls, arr):
        return cls(tuple(np.asarray(arr, dtype=float).tolist()))

    @classmethod
    def from_roots(cls, roots):
        return cls.from_array(npoly.polyfromroots(roots).real)


@dataclass(frozen=True)
class QuadResult:
    value: float
    err_estimate: float
    evaluations: int


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------


def erf(x):
    """Error function, odd to the last bit"""
    x = float(x)
    require(math.isfinite(x), "erf needs a finite argument")
    return math.copysign(float(special.erf(abs(x))), x)


def exp_integral_gamma0(x):
    """Upper incomplete gamma at order zero, Γ(0, x) = E1(x)"""
    x = float(x)
    require(x > 0, f"Γ(0, x) requires x > 0, got {x}")
    return float(special.exp1(x))


def log_gamma(x):
    x = float(x)
    require(x > 0, f"log Γ(x) requires x > 0, got {x}")
    return float(special.gammaln(x))


def _zeta_terms(s, n_terms, order):
    k = np.arange(1, n_terms, dtype=float)
    terms = np.exp(-s * np.log(k))
    if order:
        terms = terms * (-np.log(k)) ** order
    return math.fsum(terms)


def zeta_tail(s, n, order=0):
    """Euler-Maclaurin value of sum_{k >= n} (-ln k)^order k^(-s), through the B4 term"""
    require(s > 1, f"zeta tail needs s > 1, got {s}")
    require(order in (0, 1, 2), f"zeta derivative order must be 0, 1 or 2, got {order}")
    L = math.log(n)
    sm1 = s - 1.0
    u = n ** (1.0 - s)
    e1 = n ** (-s - 1.0)
    e3 = n ** (-s - 3.0)
    p = s**3 + 3 * s**2 + 2 * s
    dp = 3 * s**2 + 6 * s + 2
    d2p = 6 * s + 6
    half = (-L) ** order * n ** (-s) / 2.0
    if order == 0:
        integral = u / sm1
        b2 = s * e1 / 12.0
        b4 = -p * e3 / 720.0
    elif order == 1:
        integral = -u * (L / sm1 + 1.0 / sm1**2)
        b2 = e1 * (1.0 - s * L) / 12.0
        b4 = -e3 * (dp - p * L) / 720.0
    else:
        integral = u * (L**2 / sm1 + 2.0 * L / sm1**2 + 2.0 / sm1**3)
        b2 = e1 * (s * L**2 - 2.0 * L) / 12.0
        b4 = -e3 * (d2p - 2.0 * dp * L + p * L**2) / 720.0
    return math.fsum((integral, half, b2, b4))


def zeta_truncation(s):
    return int(min(max(math.ceil(10.0 / (s - 1.0)), 50), 10**6))


def zeta_derivs(s, order=0):
    """ζ(s), ζ'(s) or ζ''(s) for real s > 1"""
    s = float(s)
    require(s > 1, f"ζ needs s > 1, got {s}")
    require(order in (0, 1, 2), f"zeta derivative order must be 0, 1 or 2, got {order}")
    n = zeta_truncation(s)
    return _zeta_terms(s, n, order) + zeta_tail(s, n, order)


@lru_cache(maxsize=1)
def euler_gamma():
    """Euler's constant from an Euler-Maclaurin corrected harmonic sum"""
    n = 1000
    harmonic = math.fsum(1.0 / k for k in range(1, n + 1))
    return harmonic - math.log(n) - 1.0 / (2 * n) + 1.0 / (12 * n**2) - 1.0 / (120 * n**4)


def double_factorial(n):
    """Exact n!! for n >= -1"""
    require(n >= -1, f"double factorial needs n >= -1, got {n}")
    out = 1
    for k in range(n, 0, -2):
        out *= k
    return out


def log_double_factorial(n):
    require(n >= -1, f"double factorial needs n >= -1, got {n}")
    if n <= 0:
        return 0.0
    if n % 2 == 0:
        k = n // 2
        return k * math.log(2.0) + log_gamma(k + 1)
    k = (n + 1) // 2
    return log_gamma(2 * k + 1) - k * math.log(2.0) - log_gamma(k + 1)


EXACT_DOUBLE_FACTORIAL_LIMIT = 300


def double_factorial_ratio(a, b):
    """a!!/b!!; exact rational arithmetic below the limit, log space above"""
    require(a >= -1 and b >= -1, f"double factorial needs arguments >= -1, got ({a}, {b})")
    if max(a, b) <= EXACT_DOUBLE_FACTORIAL_LIMIT:
        return float(Fraction(double_factorial(a), double_factorial(b)))
    return math.exp(log_double_factorial(a) - log_double_factorial(b))


# ---------------------------------------------------------------------------
# Adaptive Gauss-Kronrod quadrature
# ---------------------------------------------------------------------------

# 15-point Kronrod abscissae (positive half) and weights, with the embedded
# 7-point Gauss weights at every second node
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[1:7:2] = _WG[:3]
_GAUSS[7] = _WG[3]
_GAUSS[13:7:-2] = _WG[:3]

_EPS = np.finfo(float).eps


def _check_value(y, x):
    if not math.isfinite(y):
        raise EvaluationError(f"integrand is not finite at x={x!r}")
    return y


def _gauss_kronrod(g, a, b):
    """One G7/K15 panel; returns (value, error, |value| bound)"""
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fx = np.array([g(center + half * z) for z in _NODES])
    kronrod = float(np.dot(_KRONROD, fx)) * half
    gauss = float(np.dot(_GAUSS, fx)) * half
    resabs = float(np.dot(_KRONROD, np.abs(fx))) * abs(half)
    mean = kronrod / (2.0 * half) if half else 0.0
    resasc = float(np.dot(_KRONROD, np.abs(fx - mean))) * abs(half)
    err = abs(kronrod - gauss)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    return kronrod, err, resabs


def _mapped(f, domain):
    """Return (g, lo, hi, transform) with g finite-interval integrable"""
    if domain.finite:
        def g(x):
            return _check_value(float(f(x)), x)
        return g, domain.lo, domain.hi, lambda x: x

    def g(theta):
        x = math.tan(theta)
        sec2 = 1.0 + x * x
        y = float(f(x))
        if y == 0.0:
            return 0.0
        return _check_value(y * sec2, x)

    return g, math.atan(domain.lo), math.atan(domain.hi), math.atan


def integrate_adaptive(f, domain, tol=None, max_evals=None, points=()):
    """
    Integrate scalar f over domain with adaptive G7/K15 bisection.

    Infinite ends are mapped with x = tan(theta). Optional `points` are
    interior breakpoints where the integrand may have a kink.
    """
    defaults = load_defaults()
    tol = defaults.quad_tol if tol is None else float(tol)
    max_evals = defaults.quad_budget if max_evals is None else int(max_evals)
    require(tol > 0, "quadrature tolerance must be positive")

    g, lo, hi, transform = _mapped(f, domain)
    cuts = [lo] + sorted(transform(p) for p in points if domain.lo < p < domain.hi) + [hi]

    heap = []
    evaluations = 0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= a:
            continue
        value, err, resabs = _gauss_kronrod(g, a, b)
        evaluations += 15
        heapq.heappush(heap, (-err, a, b, value, resabs))

    total_err = math.fsum(-item[0] for item in heap)
    resabs_sum = math.fsum(item[4] for item in heap)
    while True:
        if total_err <= tol or total_err <= 50.0 * _EPS * resabs_sum:
            # running sums drift; confirm with exact ones
            total_err = math.fsum(-item[0] for item in heap)
            resabs_sum = math.fsum(item[4] for item in heap)
            if total_err <= tol or total_err <= 50.0 * _EPS * resabs_sum:
                break
        neg_err, a, b, value, resabs = heap[0]
        mid = 0.5 * (a + b)
        if not (a < mid < b) or (b - a) <= 4.0 * _EPS * max(abs(a), abs(b)):
            # cannot split further; report what we have
            logger.debug(f"quadrature hit interval resolution at [{a!r}, {b!r}]")
            break
        if evaluations + 30 > max_evals:
            raise ConvergenceError(
                f"quadrature budget of {max_evals} evaluations exhausted "
                f"(error estimate {total_err:.3g} > {tol:.3g})",
                evaluations=evaluations,
            )
        heapq.heappop(heap)
        total_err += neg_err
        resabs_sum -= resabs
        for left, right in ((a, mid), (mid, b)):
            v, e, r = _gauss_kronrod(g, left, right)
            heapq.heappush(heap, (-e, left, right, v, r))
            total_err += e
            resabs_sum += r
        evaluations += 30

    total = math.fsum(item[3] for item in heap)
    logger.debug(f"quadrature: {len(heap)} panels, {evaluations} evaluations, err {total_err:.3g}")
    return QuadResult(value=total, err_estimate=total_err, evaluations=evaluations)


def integrate_2d(f, x_domain, y_domain, tol=1e-6):
    """Nested adaptive quadrature of f(x, y)"""

    def inner(x):
        return integrate_adaptive(lambda y: f(x, y), y_domain, tol).value

    return integrate_adaptive(inner, x_domain, tol)


# ---------------------------------------------------------------------------
# Polynomial arithmetic
# ---------------------------------------------------------------------------


def poly_add(p, q):
    return Poly.from_array(npoly.polyadd(p.array, q.array))


def poly_sub(p, q):
    return Poly.from_array(npoly.polysub(p.array, q.array))


def poly_scale(p, c):
    return Poly.from_array(p.array * c)


def poly_mul(p, q):
    return Poly.from_array(npoly.polymul(p.array, q.array))


def poly_diff(p):
    if p.degree == 0:
        return Poly((0.0,))
    return Poly.from_array(npoly.polyder(p.array))


def poly_eval(p, x):
    """Horner evaluation; x may be real, complex or an array"""
    return npoly.polyval(x, p.array)


def poly_eval_with_deriv(p, x):
    """Simultaneous Horner for (p(x), p'(x))"""
    value = p.coeffs[-1] * (x * 0 + 1)
    deriv = 0 * value
    for c in reversed(p.coeffs[:-1]):
        deriv = deriv * x + value
        value = value * x + c
    return value, deriv


def poly_arith(kind, p, q_or_x=None):
    """Dispatch over the polynomial operations by name"""
    if kind == "mul":
        return poly_mul(p, q_or_x)
    if kind == "diff":
        return poly_diff(p)
    if kind == "eval":
        return poly_eval(p, q_or_x)
    if kind == "eval_with_deriv":
        return poly_eval_with_deriv(p, q_or_x)
    raise DomainError(f"unknown polynomial operation {kind!r}")


def poly_det(matrix):
    """Determinant of a square matrix of Poly entries by cofactor expansion"""
    size = len(matrix)
    require(all(len(row) == size for row in matrix), "polynomial determinant needs a square matrix")
    if size == 1:
        return matrix[0][0]
    if size == 2:
        return poly_sub(poly_mul(matrix[0][0], matrix[1][1]), poly_mul(matrix[0][1], matrix[1][0]))
    total = Poly((0.0,))
    for j in range(size):
        minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
        term = poly_mul(matrix[0][j], poly_det(minor))
        total = poly_add(total, term) if j % 2 == 0 else poly_sub(total, term)
    return total


# ---------------------------------------------------------------------------
# Reproducible Gaussian streams
# ---------------------------------------------------------------------------

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class GaussianStream:
    """
    Standard normals from a Philox counter-based generator.

    The Philox key comes from ``SeedSequence(master_seed, spawn_key=(index, retry))``;
    deviate number k uses raw word k of the counter sequence, mapped to a
    uniform in (0, 1) by ``((raw >> 11) + 0.5) / 2**53`` and then through
    the inverse normal CDF. The stream never mutates: ``take`` returns the
    deviates together with the advanced stream.
    """

    master_seed: int
    stream_index: int
    retry: int = 0
    position: int = 0
    key: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        seq = np.random.SeedSequence(
            entropy=int(self.master_seed) & _SEED_MASK,
            spawn_key=(int(self.stream_index), int(self.retry)),
        )
        object.__setattr__(self, "key", tuple(int(k) for k in seq.generate_state(2, np.uint64)))

    def _raw(self, n):
        block, skip = divmod(self.position, 4)
        bitgen = np.random.Philox(key=np.array(self.key, dtype=np.uint64), counter=block)
        raw = bitgen.random_raw(skip + n)
        return np.asarray(raw, dtype=np.uint64)[skip:]

    def take(self, n):
        n = int(n)
        require(n >= 0, "cannot take a negative number of deviates")
        if n == 0:
            return np.empty(0), self
        raw = self._raw(n)
        uniform = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
        return special.ndtri(uniform), replace(self, position=self.position + n)

    def normals(self, n):
        return self.take(n)[0]

    def uniforms(self, n):
        raw = self._raw(int(n))
        return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def gaussian_stream(master_seed, stream_index, retry=0):
    return GaussianStream(master_seed=int(master_seed), stream_index=int(stream_index), retry=int(retry))
