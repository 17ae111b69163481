#!/usr/bin/env python3
"""
Command-line front end for the random-zeros toolkit.

Scalar results are printed as JSON, curves as CSV. Every run carries the
numeric defaults it used: a "meta" key in JSON output, or a single
``# meta {...}`` line on stderr for CSV output.
"""
import argparse
import json
import logging
import math
import os
import re
import sys
from typing import NamedTuple

import numpy as np
import pandas as pd

from complex_zeros import (
    VarianceGeneratingFunction,
    areal_density,
    dirichlet_strip_count,
    factorial_weights,
    radial_count,
    radial_density,
)
from config import load_defaults
from ensembles import (
    FAMILY_TAGS,
    ClosedFormFamily,
    case1_mean,
    case2_expected,
    case2_mean,
    chebyshev_ensemble,
    closed_form_density,
    closed_form_expected,
    ensemble_for,
    kac_asymptotic,
    kac_constant,
    kac_expected,
    monic_ensemble,
    noncentral_asymptotic,
    noncentral_kac_ensemble,
    rational_fixed_points_mc_target,
    sin_exp_ensemble,
)
from errors import RandomZerosError, UnsupportedFamilyError, require
from kernel_engine import density, density_central_logderiv, expected_zeros, mean_projection
from matrices import matrix_poly_factor, real_eigen_asymptotic, real_eigen_expected
from mc_oracle import (
    MCConfig,
    eigenvalue_scatter,
    mc_complex_radial,
    mc_fixed_points,
    mc_matrix_poly,
    mc_real_eigenvalues,
    mc_real_zeros,
)
from numerics import Interval
from systems import (
    SYSTEM_TAGS,
    SystemFamily,
    family_kernel,
    hypercube_kac_asymptotic,
    systems_density,
    systems_density_general,
    systems_expected,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'
KEEP_LOG_LINES = 30
REAL_FAMILIES = FAMILY_TAGS + ("sin_exp", "chebyshev", "monic")
COMPLEX_FAMILIES = ("kac_complex", "kostlan_complex", "entire_order_type", "factorial")
CLOSED_EXPECTED = ("kostlan", "power_series", "trig_sum", "entire")
# options whose values may legitimately start with a minus sign
RANGE_OPTIONS = ("--grid", "--interval", "--radii", "--point", "--strip")
_NEGATIVE_VALUE = re.compile(r"^-(\d|\.\d|inf)")


class Outcome(NamedTuple):
    payload: object
    ok: bool = True


def setup_logging(verbose=False, log_dir=None):
    """Log to stderr; with a log directory keep the last 30 lines in current_log.txt, the rest in archived_logs.txt"""
    handlers = [logging.StreamHandler(sys.stderr)]
    log_dir = load_defaults().log_dir if log_dir is None else log_dir
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
        current_log_path = os.path.join(log_dir, 'current_log.txt')
        archive_log_path = os.path.join(log_dir, 'archived_logs.txt')

        if os.path.exists(current_log_path):
            with open(current_log_path, 'r') as f:
                lines = f.readlines()
            if len(lines) > KEEP_LOG_LINES:
                with open(archive_log_path, 'a') as archive:
                    archive.writelines(lines[:-KEEP_LOG_LINES])
                with open(current_log_path, 'w') as current:
                    current.writelines(lines[-KEEP_LOG_LINES:])

        handlers.append(logging.FileHandler(current_log_path, mode='a'))

    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )
    return logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Argument parsing helpers
# ---------------------------------------------------------------------------


def parse_grid(text):
    """``lo:hi:count`` -> evenly spaced points, endpoints included"""
    parts = text.split(":")
    require(len(parts) == 3, f"grid must look like lo:hi:count, got {text!r}")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    require(count >= 1, f"grid needs at least one point, got {count}")
    require(math.isfinite(lo) and math.isfinite(hi) and lo <= hi, f"grid bounds must be finite and ordered: {text!r}")
    if count == 1:
        return np.array([lo])
    return np.linspace(lo, hi, count)


def parse_floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _attach_negative_values(argv):
    """Turn ``--grid -3:3:11`` into ``--grid=-3:3:11`` so argparse keeps the value"""
    out, i = [], 0
    while i < len(argv):
        token = argv[i]
        if token in RANGE_OPTIONS and i + 1 < len(argv) and _NEGATIVE_VALUE.match(argv[i + 1]):
            out.append(f"{token}={argv[i + 1]}")
            i += 2
            continue
        out.append(token)
        i += 1
    return out


def _interval_text(interval):
    return f"{interval.lo:g}:{interval.hi:g}"


def _closed_family(args):
    tag = args.family
    if tag not in FAMILY_TAGS:
        return None
    if tag in ("kac", "kostlan"):
        require(args.n is not None, f"--n is required for the {tag} family")
        return ClosedFormFamily(tag, n=args.n)
    if tag == "correlated_power_series":
        return ClosedFormFamily.correlated_power_series(args.r)
    if tag == "trig_sum":
        require(args.sigmas is not None and args.nus is not None, "trig_sum needs --sigmas and --nus")
        return ClosedFormFamily.trig_sum(parse_floats(args.sigmas), parse_floats(args.nus))
    return ClosedFormFamily(tag)


def _ensemble(args, mean=None):
    family = _closed_family(args)
    if family is not None:
        return ensemble_for(family, mean)
    require(mean is None, f"the {args.family} ensemble carries its own mean")
    if args.family == "sin_exp":
        return sin_exp_ensemble()
    require(args.n is not None, f"--n is required for the {args.family} family")
    if args.family == "chebyshev":
        return chebyshev_ensemble(args.n)
    return monic_ensemble(args.n)


def _noncentral_ensemble(args):
    if args.case == "constant":
        require(args.family == "kac", "iid N(m, 1) coefficients are defined for the kac family")
        require(args.n is not None, "--n is required for the kac family")
        return noncentral_kac_ensemble(args.n, args.m)
    family = _closed_family(args)
    require(family is not None, f"{args.family} has no mean constructions")
    if args.case == "case1":
        return ensemble_for(family, case1_mean(family, args.m))
    return ensemble_for(family, case2_mean(family, args.m, args.anchor))


def _interval_or_domain(args, e):
    return e.domain if args.interval is None else Interval.parse(args.interval)


def _check_grid(grid, domain):
    bad = [t for t in grid if not domain.contains(t)]
    require(not bad, f"grid point {bad[0] if bad else None} lies outside the domain {_interval_text(domain)}")


# ---------------------------------------------------------------------------
# Subcommands: each validates its arguments and returns the computation
# ---------------------------------------------------------------------------


def prepare_density(args):
    e = _ensemble(args)
    grid = parse_grid(args.grid)
    _check_grid(grid, e.domain)
    if args.method == "closed":
        family = _closed_family(args)
        require(family is not None, f"{args.family} has no closed-form density")
        rho = lambda t: closed_form_density(family, t)  # noqa: E731
    elif args.method == "logderiv":
        rho = lambda t: density_central_logderiv(e, t)  # noqa: E731
    else:
        rho = lambda t: density(e, t)  # noqa: E731

    def run():
        return Outcome(pd.DataFrame({"t": grid, "rho": [rho(t) for t in grid]}))

    return run


def _closed_expected(family, interval):
    """Closed-form expected count, or None when the family has none on this interval"""
    if family is None:
        return None
    if family.tag == "kac" and interval == Interval.real_line():
        return lambda: kac_expected(family.n)
    if family.tag in CLOSED_EXPECTED:
        return lambda: closed_form_expected(family, interval)
    return None


def prepare_expect(args):
    e = _ensemble(args)
    family = _closed_family(args)
    explicit = None if args.interval is None else Interval.parse(args.interval)
    if args.method != "engine":
        interval = explicit or (family.natural_domain if family is not None else e.domain)
        closed = _closed_expected(family, interval)
        if closed is not None:
            return lambda: Outcome({"expected": closed(), "method": "closed", "interval": _interval_text(interval)})
        if args.method == "closed":
            raise UnsupportedFamilyError(f"no closed-form count for {args.family} on {_interval_text(interval)}")
    interval = explicit or e.domain
    require(interval.within(e.domain),
            f"interval {_interval_text(interval)} outside the domain {_interval_text(e.domain)}")

    def run():
        value = expected_zeros(e, interval, args.tol).value
        return Outcome({"expected": value, "method": "engine", "interval": _interval_text(interval)})

    return run


def prepare_asymptotic(args):
    require(args.n >= 1, f"--n must be >= 1, got {args.n}")
    if args.m is not None:
        require(args.n >= 2 and args.m != 0, "the non-central expansion needs n >= 2 and m != 0")

        def run():
            result = noncentral_asymptotic(args.n, args.m)
            return Outcome({"expected": result.expected, "positive_zeros": result.positive_zeros,
                            "n": args.n, "m": args.m})

        return run

    def run():
        result = kac_asymptotic(args.n)
        out = {"asymptotic": result.value, "terms": dict(result.terms), "C1": kac_constant(), "n": args.n}
        if args.exact:
            out["exact"] = kac_expected(args.n)
            out["error"] = out["exact"] - result.value
        return Outcome(out)

    return run


def prepare_noncentral(args):
    e = _noncentral_ensemble(args)
    if args.grid is not None:
        grid = parse_grid(args.grid)
        _check_grid(grid, e.domain)

        def run():
            rows = []
            for t in grid:
                p = mean_projection(e, t)
                rows.append({"t": t, "rho": density(e, t), "m0": p.m0, "m1": p.m1})
            return Outcome(pd.DataFrame(rows))

        return run

    interval = _interval_or_domain(args, e)
    require(interval.within(e.domain), f"interval {_interval_text(interval)} outside the domain {_interval_text(e.domain)}")

    def run():
        out = {"expected": expected_zeros(e, interval, args.tol).value, "interval": _interval_text(interval),
               "case": args.case, "m": args.m}
        if args.case == "case2" and e.mean.m0 is not None:
            out["closed_form"] = case2_expected(e.mean, interval)
        return Outcome(out)

    return run


def _system_family(args):
    tag = args.family
    if tag == "kostlan_multihomogeneous":
        require(args.degrees is not None, "kostlan_multihomogeneous needs --degrees")
        return SystemFamily.kostlan(int(d) for d in parse_floats(args.degrees))
    require(args.m is not None, f"--m is required for the {tag} system")
    if tag in ("hypercube_kac", "harmonic"):
        require(args.d is not None, f"--d is required for the {tag} system")
        return SystemFamily(tag, m=args.m, d=args.d)
    return SystemFamily(tag, m=args.m)


def prepare_systems(args):
    family = _system_family(args)
    point = None
    if args.point is not None:
        point = np.array(parse_floats(args.point))
        require(point.shape == (family.m,), f"--point needs {family.m} coordinates")

    def run():
        out = {"family": family.tag, "m": family.m, "expected": systems_expected(family)}
        if family.tag == "hypercube_kac" and family.d >= 2:
            out["asymptotic"] = hypercube_kac_asymptotic(family.d, family.m)
        if point is not None:
            out["density"] = systems_density(family, point)
            if family.m <= 3:
                out["density_general"] = systems_density_general(family_kernel(family), point, family.m)
        return Outcome(out)

    return run


def prepare_matrix(args):
    require(args.n >= 1, f"--n must be >= 1, got {args.n}")
    if args.scatter is not None:
        require(args.scatter >= 1, "--scatter needs a positive matrix count")
        seed = load_defaults().seed if args.seed is None else args.seed

        def run():
            values = eigenvalue_scatter(args.n, args.scatter, seed)
            return Outcome(pd.DataFrame({"re": values.real, "im": values.imag}))

        return run
    if args.block is not None:
        require(args.block >= 1, "--block must be >= 1")

    def run():
        expected = real_eigen_expected(args.n)
        asymptotic = real_eigen_asymptotic(args.n)
        out = {"n": args.n, "expected": expected, "asymptotic": asymptotic, "ratio": expected / asymptotic}
        if args.block is not None:
            out["block"] = args.block
            out["block_factor"] = matrix_poly_factor(args.block)
        return Outcome(out)

    return run


def _phi(args):
    if args.family in ("kac_complex", "kostlan_complex"):
        require(args.n is not None, f"--n is required for {args.family}")
        return VarianceGeneratingFunction(args.family, n=args.n)
    if args.family == "entire_order_type":
        require(args.rho is not None and args.tau is not None, "entire_order_type needs --rho and --tau")
        return VarianceGeneratingFunction.entire_order_type(args.rho, args.tau)
    return factorial_weights()


def prepare_complex(args):
    if args.strip is not None:
        bounds = parse_floats(args.strip)
        require(len(bounds) == 4, "--strip needs x1,x2,y1,y2")
        require(bounds[0] > 0.5, "--strip needs x1 > 1/2")
        return lambda: Outcome({"strip": list(bounds), "expected": dirichlet_strip_count(*bounds)})
    phi = _phi(args)
    radii = parse_grid(args.radii)
    require(bool(np.all(radii >= 0)), "radii must be nonnegative")

    def run():
        rows = [{"r": r, "count": radial_count(phi, r), "density": radial_density(phi, r),
                 "areal": areal_density(phi, r) if r > 0 else math.nan} for r in radii]
        return Outcome(pd.DataFrame(rows))

    return run


def _mc_config(args):
    return MCConfig.from_defaults(args.samples, args.seed, args.workers)


def _mc_payload(estimate, target):
    out = estimate.as_dict()
    out["target"] = target
    return out


def prepare_mc_expect(args):
    cfg = _mc_config(args)
    e = _noncentral_ensemble(args) if args.m is not None else _ensemble(args)
    interval = _interval_or_domain(args, e)
    require(interval.within(e.domain), f"interval {_interval_text(interval)} outside the domain {_interval_text(e.domain)}")
    require(e.basis.dimension is not None, f"{args.family} has no finite coefficient vector to sample")

    def run():
        estimate = mc_real_zeros(e, interval, cfg)
        return Outcome(_mc_payload(estimate, expected_zeros(e, interval, args.tol).value))

    return run


def prepare_mc_fixed_points(args):
    cfg = _mc_config(args)
    require(args.n >= 1, "--n must be >= 1")
    return lambda: Outcome(_mc_payload(mc_fixed_points(args.n, cfg), rational_fixed_points_mc_target(args.n)))


def prepare_mc_eigen(args):
    cfg = _mc_config(args)
    require(1 <= args.n <= 8, "--n must be between 1 and 8")
    return lambda: Outcome(_mc_payload(mc_real_eigenvalues(args.n, cfg), real_eigen_expected(args.n)))


def prepare_mc_matrix_poly(args):
    cfg = _mc_config(args)
    require(1 <= args.n <= 4 and 1 <= args.p <= 3, "matrix polynomials need 1 <= n <= 4 and 1 <= p <= 3")
    return lambda: Outcome(_mc_payload(mc_matrix_poly(args.n, args.p, cfg),
                                       kac_expected(args.n) * matrix_poly_factor(args.p)))


def prepare_mc_radial(args):
    cfg = _mc_config(args)
    require(args.family in ("kac_complex", "kostlan_complex"), "Monte Carlo radial counts need a polynomial family")
    phi = _phi(args)
    radii = parse_grid(args.radii)

    def run():
        result = mc_complex_radial(phi, radii, cfg)
        rows = [{"r": r, "mean": est.mean, "stderr": est.stderr,
                 "target": radial_count(phi, r)}
                for r, est in zip(result.radii, result.estimates)]
        return Outcome(pd.DataFrame(rows))

    return run


def prepare_selftest(args):
    from acceptance import run_acceptance

    def run():
        report = run_acceptance(quick=args.quick)
        return Outcome(report, bool(report["passed"].all()))

    return run


# ---------------------------------------------------------------------------
# Parser and output
# ---------------------------------------------------------------------------


def _common_parent():
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--format", choices=("csv", "json"), help="output encoding (default: csv for curves, json otherwise)")
    parent.add_argument("--tol", type=float, default=None, help="quadrature tolerance")
    parent.add_argument("--verbose", action="store_true", help="debug logging")
    return parent


def _real_family_args(p, families=REAL_FAMILIES):
    p.add_argument("--family", required=True, choices=families)
    p.add_argument("--n", type=int, help="degree")
    p.add_argument("--r", type=float, default=0.0, help="correlation for correlated_power_series")
    p.add_argument("--sigmas", help="comma-separated trig scales")
    p.add_argument("--nus", help="comma-separated trig frequencies")


def _mean_args(p, required):
    p.add_argument("--case", choices=("case1", "case2", "constant"), default="case1")
    p.add_argument("--m", type=float, required=required, help="mean level")
    p.add_argument("--anchor", type=float, default=None, help="point where m0 equals m (case2)")


def _mc_args(p):
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)


def build_parser():
    parent = _common_parent()
    parser = argparse.ArgumentParser(prog="randz", description="Expected zeros of random functions")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", parents=[parent], help="density of real zeros on a grid")
    _real_family_args(p)
    p.add_argument("--grid", required=True, help="lo:hi:count")
    p.add_argument("--method", choices=("engine", "logderiv", "closed"), default="engine")
    p.set_defaults(prepare=prepare_density, parser=p)

    p = sub.add_parser("expect", parents=[parent], help="expected number of real zeros")
    _real_family_args(p)
    p.add_argument("--interval", help="lo:hi (default: natural domain)")
    p.add_argument("--method", choices=("auto", "closed", "engine"), default="auto")
    p.set_defaults(prepare=prepare_expect, parser=p)

    p = sub.add_parser("asymptotic", parents=[parent], help="large-n expansion of the Kac count")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=float, default=None, help="iid N(m, 1) coefficients")
    p.add_argument("--exact", action="store_true", help="also integrate the exact count")
    p.set_defaults(prepare=prepare_asymptotic, parser=p)

    p = sub.add_parser("noncentral", parents=[parent], help="zeros of random functions with nonzero mean")
    _real_family_args(p, FAMILY_TAGS)
    _mean_args(p, required=True)
    p.add_argument("--grid", help="lo:hi:count for a density curve")
    p.add_argument("--interval", help="lo:hi for the expected count")
    p.set_defaults(prepare=prepare_noncentral, parser=p)

    p = sub.add_parser("systems", parents=[parent], help="real roots of random systems")
    p.add_argument("--family", required=True, choices=SYSTEM_TAGS)
    p.add_argument("--m", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--degrees", help="comma-separated degrees")
    p.add_argument("--point", help="comma-separated coordinates for the density")
    p.set_defaults(prepare=prepare_systems, parser=p)

    p = sub.add_parser("matrix", parents=[parent], help="real eigenvalues of Gaussian matrices")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--block", type=int, help="block size of a matrix polynomial")
    p.add_argument("--scatter", type=int, help="emit eigenvalues/sqrt(n) of this many matrices")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(prepare=prepare_matrix, parser=p)

    p = sub.add_parser("complex", parents=[parent], help="complex zeros in disks and strips")
    p.add_argument("--family", choices=COMPLEX_FAMILIES, default="kac_complex")
    p.add_argument("--n", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--radii", default="0:2:21", help="lo:hi:count")
    p.add_argument("--strip", help="x1,x2,y1,y2 for random Dirichlet series")
    p.set_defaults(prepare=prepare_complex, parser=p)

    mc = sub.add_parser("mc", help="Monte Carlo oracles")
    mc_sub = mc.add_subparsers(dest="target", required=True)

    p = mc_sub.add_parser("expect", parents=[parent], help="sampled real-zero count")
    _real_family_args(p)
    _mean_args(p, required=False)
    p.add_argument("--interval", help="lo:hi (default: ensemble domain)")
    _mc_args(p)
    p.set_defaults(prepare=prepare_mc_expect, parser=p)

    p = mc_sub.add_parser("fixed-points", parents=[parent], help="real fixed points of random rational maps")
    p.add_argument("--n", type=int, required=True)
    _mc_args(p)
    p.set_defaults(prepare=prepare_mc_fixed_points, parser=p)

    p = mc_sub.add_parser("eigen", parents=[parent], help="real eigenvalues of sampled matrices")
    p.add_argument("--n", type=int, required=True)
    _mc_args(p)
    p.set_defaults(prepare=prepare_mc_eigen, parser=p)

    p = mc_sub.add_parser("matrix-poly", parents=[parent], help="real zeros of det of a random matrix polynomial")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    _mc_args(p)
    p.set_defaults(prepare=prepare_mc_matrix_poly, parser=p)

    p = mc_sub.add_parser("radial", parents=[parent], help="sampled complex zeros in disks")
    p.add_argument("--family", choices=("kac_complex", "kostlan_complex"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--radii", default="0:2:5", help="lo:hi:count")
    _mc_args(p)
    p.set_defaults(prepare=prepare_mc_radial, parser=p)

    p = sub.add_parser("selftest", parents=[parent], help="run the acceptance checks")
    p.add_argument("--quick", action="store_true", help="tenfold fewer Monte Carlo samples")
    p.set_defaults(prepare=prepare_selftest, parser=p)

    return parser


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    return value


def _meta(args):
    meta = {"command": args.command, "defaults": load_defaults().as_dict()}
    for key in ("target", "tol", "seed", "samples", "workers"):
        if getattr(args, key, None) is not None:
            meta[key] = getattr(args, key)
    return meta


def emit(payload, args, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    fmt = args.format or ("csv" if isinstance(payload, pd.DataFrame) else "json")
    meta = _meta(args)
    if fmt == "json":
        if isinstance(payload, pd.DataFrame):
            payload = {"rows": payload.to_dict(orient="records")}
        document = {**payload, "meta": meta}
        out.write(json.dumps(_jsonable(document), allow_nan=False) + "\n")
        return
    frame = payload if isinstance(payload, pd.DataFrame) else pd.DataFrame([_flatten(payload)])
    err.write("# meta " + json.dumps(_jsonable(meta), allow_nan=False) + "\n")
    frame.to_csv(out, index=False, float_format="%.17g", lineterminator="\n")


def _flatten(payload, prefix=""):
    row = {}
    for key, value in payload.items():
        if isinstance(value, dict):
            row.update(_flatten(value, f"{prefix}{key}."))
        else:
            row[f"{prefix}{key}"] = value
    return row


def dispatch(argv=None):
    """Run one command; returns the process exit code"""
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_attach_negative_values(argv))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    setup_logging(args.verbose)
    try:
        job = args.prepare(args)
    except (RandomZerosError, ValueError) as exc:
        try:
            args.parser.error(str(exc))
        except SystemExit as usage_exit:
            return usage_exit.code

    try:
        outcome = job()
    except RandomZerosError as exc:
        logger.error(f"{args.command} failed: {exc}")
        return 1

    emit(outcome.payload, args)
    return 0 if outcome.ok else 1


if __name__ == "__main__":
    sys.exit(dispatch())
