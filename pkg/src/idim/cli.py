"""``idim`` command line: generate datasets, compute dimensions, emit plot data.

Single values come out as JSON reports on stdout; tables and plot data as CSV
(stdout or ``--out``). Exit codes: 0 success, 2 usage error, 3 data error.
"""

import argparse
import csv
import io
import secrets
import sys
import time
import warnings

import numpy as np

from . import chavez, concentration, features, gromov
from .errors import DataError, ParameterError
from .io import load_dataset, save_dataset
from .report import DimensionReport
from .space import FAMILIES, Equilateral, ParetoRay, build_equilateral, sample_analytic, sample_pair_distances
from .values import encode_value

EXIT_USAGE = 2
EXIT_DATA = 3

DIM_METHODS = {
    "chavez": "dim_dist",
    "conc": "dim_alpha",
    "obs-diam": "obs_diam",
    "char-size": "char_size",
    "singleton": "dist_to_singleton",
}


# ---------------------------------------------------------------------------
# helpers


def _resolve_seed(args):
    if args.seed is None:
        args.seed = secrets.randbelow(2**31)
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def _family(args, dim=None):
    name = args.space
    dim = args.dim if dim is None else dim
    if name == "pareto":
        if args.truncation is None:
            raise ParameterError("--space pareto needs --truncation T (T > 1)")
        return ParetoRay(args.truncation)
    if dim is None:
        raise ParameterError(f"--space {name} needs --dim")
    if name == "equilateral":
        return Equilateral(dim, args.eps)
    return FAMILIES[name](dim)


def _emit_csv(rows, header, out, comments=()):
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(x) for x in row])
    text = buf.getvalue()
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, (str, int, np.integer)):
        return x
    v = encode_value(x)
    return repr(v) if isinstance(v, float) else v


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args):
    seed = _resolve_seed(args)
    fam = _family(args)
    if isinstance(fam, Equilateral) and args.points is None:
        space = build_equilateral(fam.N, fam.eps)
    else:
        space = sample_analytic(fam, args.points or 1000, seed)
    save_dataset(space, args.out)
    print(f"wrote {len(space)} points ({fam.family}, metric {space.metric}) to {args.out}")
    return 0


def cmd_dim(args):
    seed = _resolve_seed(args)
    space = load_dataset(args.input, metric=args.metric)
    method = DIM_METHODS[args.method]
    convention = mode = None
    uncertainty = None
    budgets = {}
    start = time.perf_counter()
    if args.method == "chavez":
        convention = args.convention
        if args.pairs is None and len(space) ** 2 <= chavez.EXACT_PAIR_LIMIT:
            mom = chavez.distance_moments_exact(space)
            budgets["pairs"] = mom.pairs_used
        else:
            pairs = args.pairs or 100_000
            mom = chavez.distance_moments_sampled(space, pairs, seed)
            uncertainty = chavez.dim_dist_stderr(mom, convention)
            budgets["pairs"] = pairs
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            value = chavez.dim_dist(mom, convention)
    elif args.method == "conc":
        mode = args.mode
        curve = concentration.concentration_curve(space, mode, args.features, seed)
        value = concentration.dim_alpha(curve, mode)
        budgets["engine"] = curve.kind
        if curve.kind == "feature-lower-bound":
            budgets["features"] = args.features
    elif args.method == "obs-diam":
        pairs = args.pairs or 100_000
        value = features.obs_diam(space, args.kappa, args.features, pairs, seed)
        budgets.update(features=args.features, pairs=pairs, kappa=args.kappa)
    elif args.method == "char-size":
        pairs = args.pairs or 100_000
        value = features.char_size(space, pairs, seed)
        budgets["pairs"] = pairs
    else:
        value = gromov.dist_to_singleton(space, args.restarts, seed)
        budgets["restarts"] = args.restarts
    report = DimensionReport(
        space.descriptor(),
        method,
        convention,
        mode,
        value,
        uncertainty,
        seed,
        budgets,
        round((time.perf_counter() - start) * 1000.0, 3),
    )
    print(report.to_json())
    return 0


def cmd_curve(args):
    seed = _resolve_seed(args)
    if args.input:
        space = load_dataset(args.input, metric=args.metric)
        curve = concentration.concentration_curve(space, args.mode, args.features, seed, args.grid)
    else:
        fam = _family(args)
        try:
            curve = concentration.concentration_curve(fam, args.mode, points=args.grid)
        except ParameterError:
            warnings.warn(
                f"no closed form for {fam.family}; using the feature lower bound on {args.sample} sampled points",
                stacklevel=1,
            )
            space = sample_analytic(fam, args.sample, seed)
            curve = concentration.concentration_curve(space, args.mode, args.features, seed, args.grid)
    rows = [(float(e), float(a), curve.kind) for e, a in zip(curve.grid, curve.alpha)]
    _emit_csv(rows, ["eps", "alpha", "kind"], args.out)
    return 0


def cmd_hist(args):
    seed = _resolve_seed(args)
    if args.input:
        space = load_dataset(args.input, metric=args.metric)
    else:
        space = _family(args)
    d = sample_pair_distances(space, args.pairs, seed)
    counts, edges = np.histogram(d, bins=args.bins)
    total = counts.sum()
    rows = [(float(lo), float(hi), int(c), float(c / total)) for lo, hi, c in zip(edges, edges[1:], counts)]
    comments = [f"pairs={len(d)} seed={seed} mean={float(d.mean())!r} median={float(np.median(d))!r}"]
    _emit_csv(rows, ["bin_lo", "bin_hi", "count", "fraction"], args.out, comments)
    return 0


def _parse_dims(text):
    try:
        if ":" in text:
            lo, hi = (int(x) for x in text.split(":"))
            dims = list(range(lo, hi + 1))
        else:
            dims = [int(x) for x in text.split(",")]
    except ValueError:
        raise ParameterError(f"--dims must look like 2:101 or 3,10,100, got {text!r}") from None
    if not dims:
        raise ParameterError("--dims is empty")
    return dims


def cmd_sweep(args):
    seed = _resolve_seed(args)
    dims = _parse_dims(args.dims)
    rows = []
    children = np.random.SeedSequence(seed).spawn(len(dims))
    for n, ss in zip(dims, children):
        fam = _family(args, n)
        if args.method == "conc":
            curve = concentration.concentration_curve(fam, args.mode, points=args.grid)
            rows.append((n, concentration.dim_alpha(curve, args.mode), None))
        else:
            mom = chavez.distance_moments_sampled(fam, args.pairs, ss)
            rows.append((n, chavez.dim_dist(mom, args.convention), chavez.dim_dist_stderr(mom, args.convention)))
    _emit_csv(rows, ["n", "dimension", "stderr"], args.out)
    return 0


def cmd_table1(args):
    seed = _resolve_seed(args)
    rows = chavez.table1(args.pairs, seed, convention=args.convention)
    keys = ["n", "pairs", "mean", "sigma2", "dim_no_half", "dim_eq4", "stderr"]
    out = [[r[k] for k in keys] for r in rows]
    out.append(["limit", None, None, None, chavez.TWO_SPHERES_LIMIT_NO_HALF, chavez.TWO_SPHERES_LIMIT_EQ4, None])
    comments = [chavez.TABLE1_NOTE, f"seed={seed} stderr convention={args.convention}"]
    _emit_csv(out, keys, args.out, comments)
    return 0


# ---------------------------------------------------------------------------
# parser


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _family_flags(p):
    p.add_argument("--space", choices=sorted(FAMILIES))
    p.add_argument("--dim", type=_positive_int)
    p.add_argument("--truncation", type=float, help="cut-off T > 1 for the Pareto ray")
    p.add_argument("--eps", type=float, default=1.0, help="pair distance of the equilateral space")


def build_parser():
    parser = argparse.ArgumentParser(prog="idim", description="Intrinsic dimension of datasets and model spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="sample a model space into a CSV file")
    _family_flags(p)
    p.add_argument("--points", type=_positive_int, help="sample size (equilateral: omit for the exact N-point space)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen, needs_space=True)

    p = sub.add_parser("dim", help="compute one dimension-like value of a dataset (JSON)")
    p.add_argument("--input", required=True)
    p.add_argument("--metric", choices=["euclidean", "hamming", "precomputed"])
    p.add_argument("--method", choices=sorted(DIM_METHODS), required=True)
    p.add_argument("--convention", choices=chavez.CONVENTIONS, default="eq4")
    p.add_argument("--mode", choices=["unit", "full"], default="unit")
    p.add_argument("--pairs", type=_positive_int)
    p.add_argument("--features", type=_positive_int, default=64)
    p.add_argument("--kappa", type=float, default=0.1)
    p.add_argument("--restarts", type=_positive_int, default=8)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("curve", help="concentration function as eps,alpha CSV")
    _family_flags(p)
    p.add_argument("--input")
    p.add_argument("--metric", choices=["euclidean", "hamming", "precomputed"])
    p.add_argument("--mode", choices=["unit", "full"], default="full", help="full: whole distance range (default); unit: [0, 1]")
    p.add_argument("--grid", type=_positive_int, default=concentration.DEFAULT_GRID_POINTS)
    p.add_argument("--features", type=_positive_int, default=64)
    p.add_argument("--sample", type=_positive_int, default=2000)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_curve, needs_space="or-input")

    p = sub.add_parser("hist", help="histogram of sampled pair distances as CSV")
    _family_flags(p)
    p.add_argument("--input")
    p.add_argument("--metric", choices=["euclidean", "hamming", "precomputed"])
    p.add_argument("--pairs", type=_positive_int, default=10_000)
    p.add_argument("--bins", type=_positive_int, default=50)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_hist, needs_space="or-input")

    p = sub.add_parser("sweep", help="dimension across a range of model dimensions as CSV")
    _family_flags(p)
    p.add_argument("--dims", required=True, help="range lo:hi (inclusive) or a comma list")
    p.add_argument("--method", choices=["conc", "chavez"], default="conc")
    p.add_argument("--mode", choices=["unit", "full"], default="unit")
    p.add_argument("--convention", choices=chavez.CONVENTIONS, default="eq4")
    p.add_argument("--pairs", type=_positive_int, default=100_000)
    p.add_argument("--grid", type=_positive_int, default=concentration.DEFAULT_GRID_POINTS)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep, needs_space=True)

    p = sub.add_parser("table1", help="two-spheres dimensions, both conventions, as CSV")
    p.add_argument("--pairs", type=_positive_int, default=300_000)
    p.add_argument("--convention", choices=chavez.CONVENTIONS, default="no-half")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_table1)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    need = getattr(args, "needs_space", False)
    if need is True and args.space is None:
        parser.error("--space is required")
    if need == "or-input" and args.space is None and args.input is None:
        parser.error("one of --space or --input is required")
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"idim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"idim: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
