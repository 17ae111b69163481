"""
Monte Carlo oracles for the analytic zero counts.

Every sample i draws its Gaussian deviates from ``gaussian_stream(seed, i)``,
so an estimate depends only on (seed, samples) and never on how the work is
split across joblib workers. Samples whose counter fails (collapsed Sturm
chain, stalled root finder) are redrawn from the retry substreams of the
same index and reported in the estimate.
"""
import logging
import math
from dataclasses import asdict, dataclass

import numpy as np
from joblib import Parallel, delayed
from numpy.polynomial import polynomial as npoly
from scipy import optimize

from complex_zeros import RadialProfile
from config import load_defaults
from errors import ConvergenceError, DegenerateChainError, DomainError, UnsupportedFamilyError, require
from kernel_engine import BasisSpec, Ensemble
from matrices import char_poly
from numerics import Interval, Poly, gaussian_stream, poly_det

logger = logging.getLogger(__name__)

ENDPOINT_SHIFT = 1e-12
CHAIN_TRIM = 1e-11
SCAN_GRID = 20000
SCAN_ZERO_RATIO = 1e-3
ABERTH_MAX_ITER = 200
ABERTH_TOL = 1e-10
ABERTH_STEP_TOL = 1e-14
MAX_RETRIES = 3
EIGEN_MAX_ORDER = 8
RADIAL_MAX_DEGREE = 100
CHUNK_LIMIT = 2000


@dataclass(frozen=True)
class MCConfig:
    samples: int
    master_seed: int
    workers_hint: int = 1

    def __post_init__(self):
        require(int(self.samples) >= 1, f"need at least one sample, got {self.samples}")
        require(int(self.workers_hint) != 0, "workers_hint must be nonzero")

    @classmethod
    def from_defaults(cls, samples=None, seed=None, workers=None):
        defaults = load_defaults()
        return cls(
            samples=int(defaults.mc_samples if samples is None else samples),
            master_seed=int(defaults.seed if seed is None else seed),
            workers_hint=int(defaults.workers if workers is None else workers),
        )


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    n: int
    seed: int
    resampled: int = 0
    infinity_hits: int = 0

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class RadialEstimate:
    """Per-radius Monte Carlo estimates of the expected zeros in |z| < r"""

    radii: tuple
    estimates: tuple

    @property
    def profile(self):
        return RadialProfile(self.radii, tuple(e.mean for e in self.estimates))


# ---------------------------------------------------------------------------
# Root counters
# ---------------------------------------------------------------------------


def _trimmed(rem):
    scale = float(np.abs(rem).max())
    if scale <= CHAIN_TRIM:
        return None
    rem = rem / scale
    keep = np.nonzero(np.abs(rem) > CHAIN_TRIM)[0][-1]
    return rem[: keep + 1]


def sturm_chain(p):
    """Sturm sequence of p with every member scaled to unit max coefficient"""
    require(not p.is_zero, "Sturm chain of the zero polynomial")
    c = p.array / float(np.abs(p.array).max())
    chain = [c]
    if len(c) == 1:
        return chain
    d = npoly.polyder(c)
    chain.append(d / float(np.abs(d).max()))
    while len(chain[-1]) > 1:
        _, rem = npoly.polydiv(chain[-2], chain[-1])
        rem = _trimmed(-rem)
        if rem is None:
            raise DegenerateChainError(f"Sturm chain collapsed at degree {len(chain[-1]) - 1} of {p.degree}")
        chain.append(rem)
    return chain


def _sign_at(c, x):
    if math.isinf(x):
        deg = len(c) - 1
        return math.copysign(1.0, c[-1]) * (-1.0 if x < 0 and deg % 2 else 1.0)
    return float(np.sign(npoly.polyval(x, c)))


def _variations(chain, x):
    signs = [s for s in (_sign_at(c, x) for c in chain) if s != 0.0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def sturm_count(p, interval=None):
    """Number of distinct real roots of p in the open interval"""
    interval = Interval.real_line() if interval is None else interval
    chain = sturm_chain(p)
    if len(chain) == 1:
        return 0
    lo, hi = interval.lo, interval.hi
    if not interval.lo_infinite and npoly.polyval(lo, chain[0]) == 0.0:
        lo += ENDPOINT_SHIFT * max(1.0, abs(lo))
    if not interval.hi_infinite and npoly.polyval(hi, chain[0]) == 0.0:
        hi -= ENDPOINT_SHIFT * max(1.0, abs(hi))
    return _variations(chain, lo) - _variations(chain, hi)


def scan_grid(interval, grid):
    if interval.finite:
        return np.linspace(interval.lo, interval.hi, grid), None
    theta_lo = -math.pi / 2 if interval.lo_infinite else math.atan(interval.lo)
    theta_hi = math.pi / 2 if interval.hi_infinite else math.atan(interval.hi)
    theta = np.linspace(theta_lo, theta_hi, grid + 2)
    if interval.lo_infinite:
        theta = theta[1:]
    if interval.hi_infinite:
        theta = theta[:-1]
    return np.tan(theta), theta


def sign_scan_count(f, interval, grid=SCAN_GRID, values=None):
    """
    Count sign changes of f over a grid, each confirmed by Brent's method.

    A bracket only counts when |f| at Brent's point has collapsed relative to
    the bracket ends, so jumps and poles are rejected. Pairs of roots closer
    than the grid step are missed. Infinite intervals are scanned on a
    uniform grid in arctan(t). ``values`` may carry f already evaluated on
    that grid.
    """
    require(grid >= 2, f"sign scan needs a grid of at least 2 points, got {grid}")
    xs, _ = scan_grid(interval, int(grid))
    if values is None:
        values = np.array([f(x) for x in xs], dtype=float)
    else:
        values = np.asarray(values, dtype=float)
        require(values.shape == xs.shape, f"expected {len(xs)} grid values, got {values.shape}")
    nonzero = np.nonzero(values)[0]
    signs = np.sign(values[nonzero])
    changes = np.nonzero(signs[:-1] != signs[1:])[0]
    count = 0
    for k in changes:
        i, j = nonzero[k], nonzero[k + 1]
        if j > i + 1:
            count += 1
            continue
        root = optimize.brentq(f, xs[i], xs[j], xtol=1e-14, rtol=4 * np.finfo(float).eps)
        if abs(f(root)) <= SCAN_ZERO_RATIO * max(abs(values[i]), abs(values[j])):
            count += 1
    return count


def _newton_ratio(c, dc, rev, drev, z):
    """p(z)/p'(z), evaluated through the reversed polynomial outside the unit disk"""
    n = len(c) - 1
    out = np.empty_like(z)
    inner = np.abs(z) <= 1.0
    zi = z[inner]
    out[inner] = npoly.polyval(zi, c) / npoly.polyval(zi, dc)
    zo = z[~inner]
    w = 1.0 / zo
    q = npoly.polyval(w, rev)
    out[~inner] = zo * q / (n * q - w * npoly.polyval(w, drev))
    return out


def _residuals(c, rev, z):
    norm = float(np.abs(c).sum())
    out = np.empty(len(z))
    inner = np.abs(z) <= 1.0
    out[inner] = np.abs(npoly.polyval(z[inner], c)) / norm
    out[~inner] = np.abs(npoly.polyval(1.0 / z[~inner], rev)) / norm
    return out


def aberth_roots(p, jitter=None, max_iter=ABERTH_MAX_ITER, tol=ABERTH_TOL):
    """
    All roots of a real or complex polynomial by simultaneous Aberth iteration.

    `p` is a Poly or an ascending coefficient array. Starting points sit on
    the Cauchy bound circle, with angles offset by `jitter` (values in [0, 1),
    one per root) when given. The returned roots satisfy
    |p(z)| <= tol * ||p||_1 * max(1, |z|)^deg.
    """
    c = np.asarray(p.coeffs if isinstance(p, Poly) else p, dtype=complex)
    require(len(c) >= 2, "root finding needs degree >= 1")
    require(c[-1] != 0, "leading coefficient must be nonzero")
    c = c / c[-1]
    n = len(c) - 1
    if n == 1:
        return np.array([-c[0]])
    radius = 1.0 + float(np.abs(c[:-1]).max())
    offsets = np.full(n, 0.5) if jitter is None else np.asarray(jitter, dtype=float)[:n]
    z = radius * np.exp(2j * np.pi * (np.arange(n) + 0.5 * offsets) / n)
    dc, rev = npoly.polyder(c), c[::-1]
    drev = npoly.polyder(rev)
    iterations = 0
    with np.errstate(all="ignore"):
        for iterations in range(1, max_iter + 1):
            ratio = _newton_ratio(c, dc, rev, drev, z)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            delta = ratio / (1.0 - ratio * inv.sum(axis=1))
            stuck = ~np.isfinite(delta)
            if stuck.any():
                # critical point hit: nudge off it
                delta[stuck] = 1e-3 * (1.0 + np.abs(z[stuck])) * np.exp(1j * np.arange(stuck.sum()))
            z = z - delta
            if float(np.max(np.abs(delta) / np.maximum(1.0, np.abs(z)))) <= ABERTH_STEP_TOL:
                break
    residuals = _residuals(c, rev, z)
    if not np.all(residuals <= tol):
        raise ConvergenceError(
            f"Aberth iteration did not converge for degree {n} (max residual {residuals.max():.3g})",
            evaluations=iterations, residuals=tuple(residuals.tolist()),
        )
    return z


# ---------------------------------------------------------------------------
# Sampling machinery
# ---------------------------------------------------------------------------


def _evaluate_sample(sample, seed, index):
    failure = None
    for retry in range(MAX_RETRIES + 1):
        try:
            return sample(gaussian_stream(seed, index, retry)), retry
        except (DegenerateChainError, ConvergenceError) as exc:
            failure = exc
            logger.debug(f"sample {index} retry {retry} failed: {exc}")
    raise failure


def _run_chunk(sample, seed, start, stop):
    return [_evaluate_sample(sample, seed, i) for i in range(start, stop)]


def _chunks(cfg):
    workers = max(1, abs(int(cfg.workers_hint)))
    size = min(CHUNK_LIMIT, max(1, math.ceil(cfg.samples / (4 * workers))))
    return [(start, min(start + size, cfg.samples)) for start in range(0, cfg.samples, size)]


def _collect(sample, cfg, label):
    """Per-sample results in index order plus the number of resampled indices"""
    logger.info(f"{label}: {cfg.samples} samples, seed {cfg.master_seed}, workers {cfg.workers_hint}")
    results = Parallel(n_jobs=cfg.workers_hint)(
        delayed(_run_chunk)(sample, cfg.master_seed, start, stop) for start, stop in _chunks(cfg)
    )
    values = [value for chunk in results for value, _ in chunk]
    resampled = sum(1 for chunk in results for _, retry in chunk if retry)
    if resampled:
        logger.warning(f"{label}: {resampled} of {cfg.samples} samples were redrawn after counter failures")
    return values, resampled


def _estimate(values, cfg, resampled=0, infinity_hits=0):
    values = np.asarray(values, dtype=float)
    n = len(values)
    mean = math.fsum(values) / n
    stderr = float(np.std(values, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return MCEstimate(mean, stderr, n, int(cfg.master_seed), resampled, infinity_hits)


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------


def _coefficient_sampler(e):
    size = e.basis.dimension
    if size is None:
        raise UnsupportedFamilyError(f"{e.basis.kind} series cannot be sampled; use a finite basis")
    offset = e.mean.coefficient_array(size)

    def draw(stream):
        return offset + e.covariance.sample(stream.normals(size))

    return draw


def mc_real_zeros(e, interval=None, cfg=None, grid=SCAN_GRID):
    """Average number of real zeros of sampled sum a_k f_k(t) over the interval"""
    require(isinstance(e, Ensemble), "mc_real_zeros needs an Ensemble")
    cfg = MCConfig.from_defaults() if cfg is None else cfg
    interval = e.domain if interval is None else interval
    draw = _coefficient_sampler(e)
    basis = e.basis

    if basis.is_polynomial:
        def sample(stream):
            p = basis.to_poly(draw(stream))
            return 0 if p.is_zero else sturm_count(p, interval)
    else:
        # basis values on the scan grid are shared by every sample
        xs, _ = scan_grid(interval, int(grid))
        table = np.array([basis.evaluate(x).values for x in xs])

        def sample(stream):
            a = draw(stream)
            return sign_scan_count(basis.sample_function(a), interval, grid, values=table @ a)

    values, resampled = _collect(sample, cfg, f"real zeros of {basis.kind}")
    return _estimate(values, cfg, resampled)


def _fixed_point_poly(a, b, n):
    """p(t) - t q(t) for coefficient vectors a, b of p and q"""
    h = np.zeros(n + 2)
    h[: n + 1] += a
    h[1:] -= b
    return h


def mc_fixed_points(n, cfg=None):
    """Real fixed points of t -> p(t)/q(t) on the projective line, p and q Kostlan of degree n"""
    require(n >= 1, f"fixed points need degree n >= 1, got {n}")
    cfg = MCConfig.from_defaults() if cfg is None else cfg
    weights = BasisSpec.kostlan(n).to_poly(np.ones(n + 1)).array

    def sample(stream):
        z = stream.normals(2 * (n + 1))
        a, b = weights * z[: n + 1], weights * z[n + 1:]
        h = Poly.from_array(_fixed_point_poly(a, b, n))
        # q of lower degree makes infinity a fixed point
        at_infinity = 1 if b[-1] == 0.0 else 0
        return sturm_count(h) + at_infinity, at_infinity

    results, resampled = _collect(sample, cfg, f"fixed points of degree {n}")
    hits = sum(hit for _, hit in results)
    if hits:
        logger.warning(f"fixed points: {hits} samples hit the point at infinity")
    return _estimate([count for count, _ in results], cfg, resampled, hits)


def mc_real_eigenvalues(n, cfg=None):
    """Average number of real eigenvalues of n x n standard Gaussian matrices"""
    require(1 <= n <= EIGEN_MAX_ORDER,
            f"eigenvalue counting via characteristic polynomials supports 1 <= n <= {EIGEN_MAX_ORDER}, got {n}")
    cfg = MCConfig.from_defaults() if cfg is None else cfg

    def sample(stream):
        a = stream.normals(n * n).reshape(n, n)
        bound = 1.0 + float(np.linalg.norm(a))
        return sturm_count(char_poly(a), Interval(-bound, bound))

    values, resampled = _collect(sample, cfg, f"real eigenvalues of order {n}")
    return _estimate(values, cfg, resampled)


def mc_matrix_poly(n, p, cfg=None):
    """Average number of real t with det(A_0 + A_1 t + ... + A_n t^n) = 0 for p x p Gaussian A_k"""
    require(1 <= n <= 4, f"matrix polynomial degree must be in 1..4, got {n}")
    require(1 <= p <= 3, f"block size must be in 1..3, got {p}")
    cfg = MCConfig.from_defaults() if cfg is None else cfg

    def sample(stream):
        z = stream.normals((n + 1) * p * p).reshape(n + 1, p, p)
        entries = [[Poly(tuple(z[:, i, j].tolist())) for j in range(p)] for i in range(p)]
        det = poly_det(entries)
        return 0 if det.is_zero else sturm_count(det)

    values, resampled = _collect(sample, cfg, f"matrix polynomial n={n} p={p}")
    return _estimate(values, cfg, resampled)


def mc_complex_radial(phi, radii, cfg=None):
    """Average number of complex zeros in |z| < r for each radius"""
    degree = phi.degree
    if degree is None:
        raise UnsupportedFamilyError(f"{phi.tag} has infinite degree; Monte Carlo needs a polynomial")
    require(1 <= degree <= RADIAL_MAX_DEGREE, f"degree must be in 1..{RADIAL_MAX_DEGREE}, got {degree}")
    radii = tuple(float(r) for r in radii)
    require(radii and all(r >= 0 for r in radii), "radii must be nonnegative")
    require(all(b >= a for a, b in zip(radii, radii[1:])), "radii must be sorted")
    sigma = np.sqrt(phi.variances())
    require(sigma[-1] > 0, "leading variance must be positive")
    cfg = MCConfig.from_defaults() if cfg is None else cfg
    bounds = np.asarray(radii)

    def sample(stream):
        z, rest = stream.take(2 * (degree + 1))
        coeffs = sigma * (z[: degree + 1] + 1j * z[degree + 1:])
        roots = aberth_roots(coeffs, jitter=rest.uniforms(degree))
        moduli = np.abs(roots)
        return (moduli[None, :] < bounds[:, None]).sum(axis=1)

    values, resampled = _collect(sample, cfg, f"complex zeros of {phi.tag}")
    counts = np.asarray(values, dtype=float).reshape(cfg.samples, len(radii))
    return RadialEstimate(radii, tuple(_estimate(counts[:, k], cfg, resampled) for k in range(len(radii))))


def eigenvalue_scatter(n, count, seed=None):
    """Eigenvalues / sqrt(n) of `count` Gaussian n x n matrices, for scatter plots"""
    require(1 <= n <= 12, f"eigenvalue scatter supports 1 <= n <= 12, got {n}")
    require(count >= 1, f"need at least one matrix, got {count}")
    seed = load_defaults().seed if seed is None else int(seed)
    out = []
    for i in range(count):
        z, rest = gaussian_stream(seed, i).take(n * n)
        roots = aberth_roots(char_poly(z.reshape(n, n)), jitter=rest.uniforms(n))
        out.append(roots / math.sqrt(n))
    return np.concatenate(out)


def estimate_to_row(label, estimate, target=None):
    """Flat dict for tabular output"""
    row = {"quantity": label, **estimate.as_dict()}
    if target is not None:
        row["target"] = float(target)
        row["z_score"] = (estimate.mean - target) / estimate.stderr if estimate.stderr > 0 else 0.0
    return row


def check_within(estimate, target, k=3.0):
    if estimate.stderr == 0.0:
        return math.isclose(estimate.mean, target, rel_tol=1e-12, abs_tol=1e-12)
    if not math.isfinite(target):
        raise DomainError("Monte Carlo target must be finite")
    return abs(estimate.mean - target) <= k * estimate.stderr
