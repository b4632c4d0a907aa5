"""Command-line front end.

Every subcommand validates its parameters, computes, and only then writes
its output files (all or none). A JSON report is also printed on stdout.
Exit codes: 0 ok, 2 bad parameters, 3 size guard, 4 no crossing,
5 unreliable estimate, 6 quadrature divergence.
"""
from __future__ import annotations

import argparse
import math
import sys
from typing import Callable

import numpy as np

from asdkit import io as fio
from asdkit.curvature.decomposition import asd_sf_residuals
from asdkit.curvature.falloff import falloff_exponent
from asdkit.curvature.quadrature import integrate_topology
from asdkit.errors import (
    DivergenceError, DomainError, NoCrossingError, ParameterError, SizeGuardError,
    UnreliableEstimateError,
)
from asdkit.kleinian.coordinates import t_from_z, z_from_t
from asdkit.kleinian.dimension import (
    MIN_POINTS, DimensionEstimate, auto_scales, box_dimension, group_dimension, ray_path, scan_dimension_crossing,
)
from asdkit.kleinian.groups import build_deformed, build_naive, limit_points
from asdkit.kleinian.hierarchy import hausdorff_upper_bound
from asdkit.metrics import atlas_from_name, generic_samples, metric_from_name
from asdkit.mobius import InvalidMapError
from asdkit.yamabe import (
    constant_field, cutoff_test_function, negativity_budget, rayleigh_quotient, s4_harmonic,
    scalar_sign_from_limit_set,
)

EXIT_OK, EXIT_PARAMS, EXIT_SIZE, EXIT_NO_CROSSING, EXIT_UNRELIABLE, EXIT_DIVERGENCE = 0, 2, 3, 4, 5, 6
EXIT_CODES = [
    (SizeGuardError, EXIT_SIZE),
    (NoCrossingError, EXIT_NO_CROSSING),
    (UnreliableEstimateError, EXIT_UNRELIABLE),
    (DivergenceError, EXIT_DIVERGENCE),
    (ParameterError, EXIT_PARAMS),
    (DomainError, EXIT_PARAMS),
    (InvalidMapError, EXIT_PARAMS),
    (ValueError, EXIT_PARAMS),
]


class UsageError(Exception):
    pass


def parse_complex(text: str) -> complex:
    s = str(text).strip().replace(" ", "").replace("i", "j")
    try:
        if "," in s:
            re_, im = s.split(",")
            return complex(float(re_), float(im))
        return complex(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def parse_window(text: str) -> tuple[float, float, float, float]:
    try:
        vals = tuple(float(v) for v in str(text).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("window must be xmin,xmax,ymin,ymax") from None
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("window must be xmin,xmax,ymin,ymax")
    return vals


def _sign_text(sign) -> str:
    return sign if isinstance(sign, str) else f"{sign:+d}"


# ---------------------------------------------------------------- commands

def _group_from(args):
    if args.mode == "naive":
        return build_naive(args.ell, args.eps)
    if args.z is not None and args.t is not None:
        raise ParameterError("give either --z or --t, not both")
    if args.t is not None:
        z = z_from_t(args.t)
    elif args.z is not None:
        z = args.z
    else:
        raise ParameterError("deformed mode needs --z or --t")
    return build_deformed(args.ell, z)


def cmd_limit_set(args) -> tuple[dict, dict]:
    """Render the orbit cloud to a PPM and dump it as CSV."""
    group = _group_from(args)
    window = args.window
    if args.size < 1 or args.size > 16384:
        raise ParameterError("--size must be in 1..16384")
    if not (window[1] > window[0] and window[3] > window[2]):
        raise ParameterError("window must have xmax > xmin and ymax > ymin")
    cloud = limit_points(group, args.depth)
    # bare seeds are elliptic fixed points, not limit points; leave them out of the image
    orbit = cloud.points[cloud.lengths >= 1]
    mask = fio.rasterize(orbit, window, args.size)
    report = {"command": "limit-set", "mode": group.construction, "ell": group.ell,
              "params": group.params, "depth": args.depth, "points": len(cloud),
              "word_count": cloud.word_count, "hits_infinity": cloud.hits_infinity,
              "window": list(window), "size": args.size, "lit_pixels": int(mask.sum()),
              "image": args.image, "csv": args.csv}
    files = {args.image: fio.ppm_bytes(mask), args.csv: fio.cloud_csv(cloud.points, cloud.lengths)}
    return report, files


def cmd_dim(args) -> tuple[dict, dict]:
    """Box-counting dimension with the sign it predicts for the scalar curvature."""
    if args.min_points < 1:
        raise ParameterError("--min-points must be positive")
    report: dict = {"command": "dim"}
    if args.cloud:
        pts = fio.read_cloud_csv(args.cloud)
        pts = pts[np.isfinite(pts)]
        if len(pts) < args.min_points:
            raise UnreliableEstimateError(f"{len(pts)} points; at least {args.min_points} required")
        if args.scale_min is not None and args.scale_max is not None:
            smin, smax = args.scale_min, args.scale_max
        else:
            pts, smin, smax = auto_scales(pts)
        est = box_dimension(pts, smin, smax, args.n_scales, min_points=args.min_points)
        sign = scalar_sign_from_limit_set(est)
        report.update(mode="cloud", source=args.cloud, dimension=est.as_dict(),
                      sign=_sign_text(sign.sign), sign_rule=sign.rule)
        return report, _json_file(args, report)

    group = _group_from(args)
    depth = args.depth or (10 if group.construction == "naive" else 24)
    report.update(mode=group.construction, ell=group.ell, params=group.params, depth=depth)
    if group.construction == "naive":
        bound = hausdorff_upper_bound(group.ell, group.params["epsilon"])
        report["upper_bound"] = bound
        try:
            est = group_dimension(group, depth, args.n_scales, min_points=args.min_points)
            report["dimension"] = est.as_dict()
        except UnreliableEstimateError as exc:
            report["dimension"] = None
            report["dimension_error"] = str(exc)
        # the covering bound certifies the sign without relying on the box count
        if bound < 1:
            report.update(sign="+1", sign_rule="hausdorff upper bound < 1")
        else:
            report.update(sign="undetermined", sign_rule="hausdorff upper bound >= 1")
        return report, _json_file(args, report)

    est = group_dimension(group, depth, args.n_scales, min_points=args.min_points)
    sign = scalar_sign_from_limit_set(est)
    report.update(t=t_from_z(group.params["z"]), dimension=est.as_dict(),
                  sign=_sign_text(sign.sign), sign_rule=sign.rule)
    return report, _json_file(args, report)


def _oracle_from(spec: str) -> Callable[[float], float]:
    kind, _, shift = spec.partition(":")
    if kind != "linear":
        raise ParameterError(f"unknown test oracle {spec!r}")
    c = float(shift) if shift else 0.0
    return lambda u: u - c


def cmd_scan(args) -> tuple[dict, dict]:
    """Bisect along the ray t = r e^{i theta} for the parameter where the dimension crosses 1."""
    if not (1 < args.r_start and 1 < args.r_end and args.r_start != args.r_end):
        raise ParameterError("--r-start and --r-end must differ and exceed 1")
    if not 0 < args.tol < 1:
        raise ParameterError("--tol must lie in (0, 1)")
    build_deformed(args.ell, z_from_t(args.r_start * complex(math.cos(args.theta), math.sin(args.theta))))
    path = ray_path(args.theta, args.r_start, args.r_end)
    oracle = _oracle_from(args.test_oracle) if args.test_oracle else None
    res = scan_dimension_crossing(args.ell, path, args.depth, args.tol, oracle=oracle)
    report = {"command": "scan", "ell": args.ell, "theta": args.theta,
              "r_range": [args.r_start, args.r_end], "depth": args.depth, "tol": args.tol,
              "t_at_u0": path(res.u0), **res.as_dict()}
    return report, _json_file(args, report)


def cmd_verify_metric(args) -> tuple[dict, dict]:
    """ASD / scalar-flat residuals of a catalog metric at random interior points."""
    chart = metric_from_name(args.metric)
    if args.samples < 1:
        raise ParameterError("--samples must be positive")
    X = generic_samples(chart, args.samples, np.random.default_rng(args.seed))
    rep = asd_sf_residuals(chart, X)
    report = {"command": "verify-metric", "metric": args.metric, "seed": args.seed, **rep.as_dict()}
    files = _json_file(args, report)
    if args.csv:
        files[args.csv] = rep.to_csv()
    return report, files


def cmd_gauss_bonnet(args) -> tuple[dict, dict]:
    """Euler characteristic and signature from the curvature integrals."""
    if args.resolution < 8:
        raise ParameterError("--resolution must be >= 8")
    atlas = atlas_from_name(args.metric)
    res = integrate_topology(atlas, args.resolution, threads=args.threads)
    report = {"command": "gauss-bonnet", "metric": args.metric,
              "compact": bool(atlas[0][0].meta.get("compact", False)),
              "charts": len(atlas), "resolution": args.resolution,
              "chi_estimate": res["chi"].value, "tau_estimate": res["tau"].value,
              "errors": {"chi": res["chi"].estimated_error, "tau": res["tau"].estimated_error},
              "sample_count": res["chi"].sample_count, "rule": res["chi"].rule,
              "dropped_nodes": res["chi"].dropped}
    return report, _json_file(args, report)


def cmd_falloff(args) -> tuple[dict, dict]:
    """Fitted exponent p in |g - g_flat| ~ radius^p."""
    if not (0 < args.r_min < args.r_max) or args.n_radii < 2:
        raise ParameterError("need 0 < r_min < r_max and at least two radii")
    chart = metric_from_name(args.metric)
    radii = np.geomspace(args.r_min, args.r_max, args.n_radii)
    p = falloff_exponent(chart, radii, n=args.samples, seed=args.seed)
    report = {"command": "falloff", "metric": args.metric, "radii": radii, "exponent": p}
    return report, _json_file(args, report)


def cmd_yamabe(args) -> tuple[dict, dict]:
    """Rayleigh quotient of 6 Delta + s for a test function, plus optional sign reports."""
    if args.resolution < 8:
        raise ParameterError("--resolution must be >= 8")
    budget = None
    if args.budget:
        try:
            vol, c_ball, eps = (float(v) for v in args.budget.split(","))
        except ValueError:
            raise ParameterError("--budget must be volume,c_ball,eps") from None
        budget = negativity_budget(vol, c_ball, eps)
    estimate = None
    if args.dim_value is not None:
        estimate = DimensionEstimate(args.dim_value, [], args.dim_residual, 0)
        sign = scalar_sign_from_limit_set(estimate)
    atlas = atlas_from_name(args.metric)
    chart = atlas[0][0]
    if args.test_fn == "const":
        u = constant_field(1.0)
    elif args.test_fn == "harmonic":
        if not chart.name.startswith("s4:"):
            raise ParameterError("the harmonic test function is defined for s4 metrics only")
        u = s4_harmonic(chart.scale)
    else:
        center = (chart.lo_arr + chart.hi_arr) / 2
        u = cutoff_test_function([center], args.cutoff_eps)
    q = rayleigh_quotient(atlas, u, args.resolution, threads=args.threads)
    report = {"command": "yamabe", "metric": args.metric, "test_fn": args.test_fn,
              "resolution": args.resolution, "rayleigh": q,
              "certifies_negative": bool(q < 0)}
    if budget is not None:
        report["negativity_budget"] = budget
    if estimate is not None:
        report["sign_report"] = {**sign.as_dict(), "sign": _sign_text(sign.sign)}
    return report, _json_file(args, report)


def _json_file(args, report) -> dict:
    return {args.json: fio.json_text(report)} if getattr(args, "json", None) else {}


# ---------------------------------------------------------------- parser

COMMANDS = {
    "limit-set": cmd_limit_set, "dim": cmd_dim, "scan": cmd_scan,
    "verify-metric": cmd_verify_metric, "gauss-bonnet": cmd_gauss_bonnet,
    "falloff": cmd_falloff, "yamabe": cmd_yamabe,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser, json_out: bool = True) -> None:
    p.add_argument("--config", metavar="FILE", help="text file of 'key = value' lines; flags override it")
    p.add_argument("--threads", type=int, default=1, help="worker threads (outputs do not depend on it)")
    if json_out:
        p.add_argument("--json", metavar="FILE", help="also write the JSON report here")


def _group_flags(p, depth_default):
    p.add_argument("--mode", choices=["naive", "deformed"], default="naive", help="group construction")
    p.add_argument("--ell", type=int, default=3, help="order of the elliptic generator (integer >= 3)")
    p.add_argument("--eps", type=float, default=0.05, help="naive mode: disk radius epsilon (dimensionless)")
    p.add_argument("--z", type=parse_complex, help="deformed mode: negative fixed point of beta (complex)")
    p.add_argument("--t", type=parse_complex, help="deformed mode: t-coordinate, |t| > 1 (complex)")
    p.add_argument("--depth", type=int, default=depth_default, help="maximum word length in syllables")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="asdkit", description=__doc__.splitlines()[0], formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    subs = {}

    p = sub.add_parser("limit-set", help="render a limit set (PPM + CSV)", formatter_class=fmt)
    _group_flags(p, 10)
    p.add_argument("--window", type=parse_window, default=(-2.0, 2.0, -2.0, 2.0),
                   help="complex-plane window xmin,xmax,ymin,ymax (plane units)")
    p.add_argument("--size", type=int, default=1024, help="image width and height (pixels)")
    p.add_argument("--image", default="limit_set.ppm", help="output PPM path")
    p.add_argument("--csv", default="limit_set.csv", help="output CSV path (re, im, syllables)")
    _common(p, json_out=False)
    subs["limit-set"] = p

    p = sub.add_parser("dim", help="box-counting dimension and scalar-curvature sign", formatter_class=fmt)
    _group_flags(p, None)
    p.add_argument("--cloud", metavar="CSV", help="estimate from a CSV point cloud instead of a group")
    p.add_argument("--n-scales", type=int, default=8, help="number of box sizes in the fit")
    p.add_argument("--scale-min", type=float, help="cloud mode: smallest box side (plane units)")
    p.add_argument("--scale-max", type=float, help="cloud mode: largest box side (plane units)")
    p.add_argument("--min-points", type=int, default=MIN_POINTS, help="refuse clouds with fewer points")
    _common(p)
    subs["dim"] = p

    p = sub.add_parser("scan", help="locate the dimension-1 crossing along a ray in t", formatter_class=fmt)
    p.add_argument("--ell", type=int, default=3, help="order of the elliptic generator")
    p.add_argument("--theta", type=float, default=1.0, help="argument of t along the ray (radians)")
    p.add_argument("--r-start", type=float, default=1.5, help="|t| at u = -1")
    p.add_argument("--r-end", type=float, default=2.3, help="|t| at u = +1")
    p.add_argument("--depth", type=int, default=24, help="maximum word length in syllables")
    p.add_argument("--tol", type=float, default=1e-3, help="bracket width at which bisection stops (u units)")
    p.add_argument("--test-oracle", help=argparse.SUPPRESS)
    _common(p)
    subs["scan"] = p

    for name, helptext in (("verify-metric", "ASD and scalar-flat residuals"),
                           ("gauss-bonnet", "Euler characteristic and signature integrals"),
                           ("falloff", "asymptotic fall-off exponent"),
                           ("yamabe", "Rayleigh quotient of the Yamabe operator")):
        p = sub.add_parser(name, help=helptext, formatter_class=fmt)
        p.add_argument("--metric", default="s4:r=1",
                       help="catalog name: euclidean, torus, s4:r=R, s2h2, h4, fs, gh:centers=LIST, lebrun:ell=N")
        subs[name] = p
    p = subs["verify-metric"]
    p.add_argument("--samples", type=int, default=20, help="number of random sample points")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--csv", help="per-point table output path")
    _common(p)
    p = subs["gauss-bonnet"]
    p.add_argument("--resolution", type=int, default=16, help="Gauss-Legendre nodes per axis")
    _common(p)
    p = subs["falloff"]
    p.add_argument("--r-min", type=float, default=10.0, help="smallest radius (asymptotic radial units)")
    p.add_argument("--r-max", type=float, default=100.0, help="largest radius (asymptotic radial units)")
    p.add_argument("--n-radii", type=int, default=6, help="number of radii, geometrically spaced")
    p.add_argument("--samples", type=int, default=64, help="sphere samples per radius")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    _common(p)
    p = subs["yamabe"]
    p.add_argument("--test-fn", choices=["const", "harmonic", "cutoff"], default="const",
                   help="test function: constant, first spherical harmonic, or cutoff")
    p.add_argument("--cutoff-eps", type=float, default=0.1, help="cutoff radius epsilon (chart units)")
    p.add_argument("--resolution", type=int, default=16, help="Gauss-Legendre nodes per axis")
    p.add_argument("--budget", metavar="VOL,C,EPS", help="also evaluate the negativity budget")
    p.add_argument("--dim-value", type=float, help="limit-set dimension estimate for a sign report")
    p.add_argument("--dim-residual", type=float, default=0.05, help="fit residual of --dim-value")
    _common(p)
    return parser, subs


def read_config(path: str) -> dict[str, str]:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ParameterError(f"cannot read config {path}: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{n}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def parse_args(argv) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        p = subs[args.command]
        known = {a.dest for a in p._actions}
        unknown = sorted(set(cfg) - known - {"config"})
        if unknown:
            raise ParameterError(f"unknown config keys: {', '.join(unknown)}")
        cfg.pop("config", None)
        p.set_defaults(**cfg)
        args = parser.parse_args(argv)
        for a in p._actions:
            if a.choices is not None and getattr(args, a.dest, None) not in a.choices:
                raise ParameterError(f"{a.dest} must be one of {', '.join(map(str, a.choices))}")
    if getattr(args, "threads", 1) < 1:
        raise ParameterError("--threads must be >= 1")
    return args


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
        report, files = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except Exception as exc:  # map library failures to documented exit codes
        for kind, code in EXIT_CODES:
            if isinstance(exc, kind):
                print(f"error: {exc}", file=sys.stderr)
                return code
        raise
    fio.write_outputs(files)
    sys.stdout.write(fio.json_text(report))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
