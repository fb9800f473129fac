"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 data error, 4 internal invariant
violation.

Seeds: every subcommand takes ``--seed``. Where a run fans out into tasks
(bootstrap pairs, benchmark cells), task ``(a, b, ...)`` draws from
``numpy.random.SeedSequence([seed, a, b, ...])``, so results do not depend
on execution order.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from . import bench as bench_mod
from .clustering import DEFAULT_GRID_POINTS, Method, ari, cluster
from .core import Column, DataError, fit, load_model, save_model
from .correlation import correlate, disagreement_table
from .data_io import BENCHMARK_MIXTURES, load_csv, load_mixture_json, sample_mixture, write_csv
from .fast_eval import R_MAX, EvalPlan, Strategy
from .kernels import KernelSpec

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4
MAX_AUTO_PAIRS_COLUMNS = 32


class UsageError(Exception):
    pass


class InvariantError(Exception):
    pass


@dataclass
class CliConfig:
    command: str
    seed: int = 0
    alpha: float = 1.0
    kernel: str = "polyexp"
    strategy: str = "dp"
    grid_size: int = R_MAX

    def validate(self):
        if not (self.alpha > 0 and np.isfinite(self.alpha)):
            raise UsageError(f"--alpha must be positive, got {self.alpha}")
        if self.grid_size < 2:
            raise UsageError(f"--grid-size must be >= 2, got {self.grid_size}")
        ok = {"dp": ("polyexp",), "grid": ("gaussian",), "exact": ("gaussian", "polyexp")}
        if self.kernel not in ok[self.strategy]:
            raise UsageError(
                f"--strategy {self.strategy} cannot be used with --kernel {self.kernel} "
                "(dp needs polyexp, grid needs gaussian)"
            )
        return self

    @property
    def kernel_spec(self) -> KernelSpec:
        return KernelSpec.gaussian() if self.kernel == "gaussian" else KernelSpec.polyexp()

    @property
    def plan(self) -> EvalPlan:
        return EvalPlan(Strategy(self.strategy), self.grid_size)


def _config(args) -> CliConfig:
    kernel = getattr(args, "kernel", "polyexp")
    strategy = getattr(args, "strategy", None) or ("dp" if kernel == "polyexp" else "grid")
    return CliConfig(args.command, args.seed, getattr(args, "alpha", 1.0), kernel, strategy,
                     getattr(args, "grid_size", R_MAX)).validate()


def _csv_list(s):
    return [p.strip() for p in s.split(",") if p.strip()] if s else None


def _info(msg):
    print(msg, file=sys.stderr)


# -- transform ------------------------------------------------------------

def cmd_transform(args) -> int:
    cfg = _config(args)
    if args.apply and args.model_out:
        raise UsageError("--apply and --model-out are mutually exclusive")
    if args.apply:
        models = load_model(args.apply)
        names = _csv_list(args.columns) or list(models)
        missing = [n for n in names if n not in models]
        if missing:
            raise DataError(f"model {args.apply} has no column(s) {missing}")
        table = load_csv(args.input, names)
    else:
        table = load_csv(args.input, _csv_list(args.columns))
        names = table.names
        models = {}
        for n in names:
            v = table[n]
            finite = v[np.isfinite(v)]
            if table.nan_counts[n]:
                _info(f"{n}: fitting on {finite.size} numeric cells, "
                      f"{table.nan_counts[n]} non-numeric cell(s) skipped")
            models[n] = fit(Column(n, finite, provenance=f"{args.input}:{n}"),
                            cfg.alpha, cfg.kernel_spec, cfg.plan)
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for n in names:
            out[n] = models[n].transform(table[n])
    for n in names:
        t = out[n]
        ok = t[~np.isnan(t)]
        if ok.size and (ok.min() < 0 or ok.max() > 1):
            raise InvariantError(f"transform of {n} left [0, 1]")
    write_csv(args.output, names, out)
    if args.model_out:
        save_model(models, args.model_out)
    return EXIT_OK


# -- corr -----------------------------------------------------------------

def _parse_pairs(spec, names):
    if spec in (None, "all"):
        if spec is None and len(names) > MAX_AUTO_PAIRS_COLUMNS:
            raise UsageError(f"{len(names)} columns: pass --pairs all or an explicit list")
        return None
    pairs = []
    for item in spec.split(","):
        try:
            a, b = item.split(":")
            pairs.append((names.index(a.strip()), names.index(b.strip())))
        except ValueError:
            raise UsageError(f"bad --pairs entry {item!r}; use name_a:name_b") from None
    return pairs


def cmd_corr(args) -> int:
    cfg = _config(args)
    if args.n_boot < 0:
        raise UsageError("--n-boot must be >= 0")
    table = load_csv(args.input, _csv_list(args.columns))
    names = table.names
    pairs = _parse_pairs(args.pairs, names)
    pairs = pairs or [(i, j) for i in range(len(names)) for j in range(i + 1, len(names))]
    reports = []
    for i, j in pairs:
        x, y = table[names[i]], table[names[j]]
        keep = np.isfinite(x) & np.isfinite(y)
        reports.append(correlate(x[keep], y[keep], cfg.alpha, args.n_boot,
                                 np.random.SeedSequence([args.seed, i, j]), cfg.kernel_spec,
                                 cfg.plan, names=(names[i], names[j])))
    rows = [r.row() for r in reports]
    cols = list(rows[0]) if rows else ["x", "y"]
    write_csv(args.output, cols, {c: [r[c] for r in rows] for c in cols})
    by_p, by_s = disagreement_table(reports)
    if args.gap_table:
        gcols = ["ranking", "rank", "x", "y", "pearson", "spearman", "kdi", "gap"]
        grows = []
        for label, ranked, key in (("pearson", by_p, "pearson"), ("spearman", by_s, "spearman")):
            for k, r in enumerate(ranked, 1):
                grows.append([label, k, r.pair[0], r.pair[1], r.pearson, r.spearman, r.kdi,
                              abs(r.kdi - getattr(r, key))])
        write_csv(args.gap_table, gcols, {c: [g[i] for g in grows] for i, c in enumerate(gcols)})
    for label, ranked in (("Pearson", by_p), ("Spearman", by_s)):
        top = ", ".join(f"({r.pair[0]}, {r.pair[1]})" for r in ranked[: args.top])
        _info(f"top disagreements with {label}: {top}")
    return EXIT_OK


# -- cluster --------------------------------------------------------------

def cmd_cluster(args) -> int:
    cfg = _config(args)
    if (args.input is None) == (args.mixture is None):
        raise UsageError("give either an input CSV or --mixture")
    truth = None
    if args.mixture is not None:
        spec = _mixture_spec(args.mixture)
        if args.n is None or args.n <= 0:
            raise UsageError("--mixture needs a positive --n")
        x, truth = sample_mixture(spec, args.n, args.seed)
        col = Column(f"mixture{args.mixture}", x, provenance=f"mixture {args.mixture} seed {args.seed}")
    else:
        table = load_csv(args.input, [args.column] if args.column else None)
        name = table.names[0]
        v = table[name]
        col = Column(name, v[np.isfinite(v)], provenance=f"{args.input}:{name}")
    kw = {} if args.method == "raw" else {"kernel": cfg.kernel_spec, "plan": cfg.plan}
    res = cluster(col, args.method, cfg.alpha, args.grid_points, **kw)
    if np.any(np.diff(res.boundaries_x) <= 0) or set(np.unique(res.labels)) != set(range(res.k_hat)):
        raise InvariantError("cluster boundaries/labels inconsistent")
    data = {"value": col.values, "label": res.labels}
    names = ["value", "label"]
    summary = {"column": col.name, "n": len(col), "alpha": cfg.alpha, **res.summary()}
    if truth is not None:
        data["true_label"] = truth
        names.append("true_label")
        summary["k_true"] = spec.k
        summary["ari"] = ari(truth, res.labels)
    write_csv(args.output, names, data)
    text = json.dumps(summary, indent=1)
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK


def _mixture_spec(m):
    if isinstance(m, int):
        if m not in BENCHMARK_MIXTURES:
            raise UsageError(f"--mixture must be 1..5 or a JSON file, got {m}")
        return BENCHMARK_MIXTURES[m]
    return load_mixture_json(m)


def _mixture_arg(s):
    try:
        return int(s)
    except ValueError:
        return s


def run_cluster_bench(mixtures, ns, n_seeds, seed, methods, alpha=1.0, grid_points=DEFAULT_GRID_POINTS):
    rows = []
    for m in mixtures:
        spec = BENCHMARK_MIXTURES[m]
        for n in ns:
            for method in methods:
                hits, aris = [], []
                for r in range(n_seeds):
                    x, truth = sample_mixture(spec, n, np.random.SeedSequence([seed, m, n, r]))
                    res = cluster(x, method, alpha, grid_points)
                    hits.append(res.k_hat == spec.k)
                    aris.append(ari(truth, res.labels))
                rows.append({"mixture": m, "N": n, "method": method, "k_true": spec.k,
                             "k_recovery": float(np.mean(hits)), "mean_ari": float(np.mean(aris)),
                             "n_seeds": n_seeds})
    return rows


def cmd_cluster_bench(args) -> int:
    mixtures = [int(m) for m in _csv_list(args.mixtures)]
    if any(m not in BENCHMARK_MIXTURES for m in mixtures):
        raise UsageError("--mixtures must be drawn from 1..5")
    ns = [int(n) for n in _csv_list(args.n_list)]
    methods = _csv_list(args.methods)
    if any(m not in ("kdi", "raw") for m in methods) or any(n < 2 for n in ns) or args.seeds < 1:
        raise UsageError("bad --methods/--n-list/--seeds")
    rows = run_cluster_bench(mixtures, ns, args.seeds, args.seed, methods, args.alpha, args.grid_points)
    cols = list(rows[0])
    write_csv(args.output, cols, {c: [r[c] for r in rows] for c in cols})
    return EXIT_OK


# -- bench ----------------------------------------------------------------

def cmd_bench(args) -> int:
    strategies = tuple(_csv_list(args.strategies))
    if any(s not in ("exact", "grid", "dp") for s in strategies):
        raise UsageError("--strategies must be drawn from exact,grid,dp")
    sizes = tuple(int(r) for r in _csv_list(args.r_list))
    alphas = tuple(float(a) for a in _csv_list(args.alphas))
    if any(r < 2 for r in sizes) or any(a <= 0 for a in alphas) or args.n < 2 or args.n_test < 1:
        raise UsageError("bad --r-list/--alphas/--n/--n-test")
    cfg = bench_mod.BenchConfig(args.n, args.n_test, alphas, sizes, strategies, args.repeats, args.seed)
    rows = bench_mod.run(cfg)
    write_csv(args.output, list(bench_mod.COLUMNS), bench_mod.rows_as_columns(rows))
    return EXIT_OK


# -- parser ---------------------------------------------------------------

def _common(p, kernel=True):
    p.add_argument("--seed", type=int, default=0, help="master random seed (default 0)")
    p.add_argument("--alpha", type=float, default=1.0,
                   help="bandwidth factor; bandwidth = alpha * sample std (default 1)")
    if kernel:
        p.add_argument("--kernel", choices=("gaussian", "polyexp"), default="polyexp",
                       help="kernel family (default polyexp)")
        p.add_argument("--strategy", choices=("exact", "grid", "dp"), default=None,
                       help="evaluation strategy: dp (polyexp), grid (gaussian) or exact; "
                            "default dp for polyexp, grid for gaussian")
        p.add_argument("--grid-size", type=int, default=R_MAX,
                       help=f"max reference grid size R (default {R_MAX}); R = min(this, N)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kdi", description="Kernel density integral transform tools.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="fit and apply the KDI transform to CSV columns")
    p.add_argument("input", help="headered CSV file")
    p.add_argument("--columns", help="comma-separated column names (default: all)")
    p.add_argument("-o", "--output", default="/dev/stdout", help="output CSV (default stdout)")
    p.add_argument("--model-out", help="write the fitted transforms to this JSON model file")
    p.add_argument("--apply", metavar="MODEL", help="transform with a saved model instead of fitting")
    _common(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("corr", help="Pearson / Spearman / KDI correlations for column pairs")
    p.add_argument("input", help="headered CSV file")
    p.add_argument("--columns", help="comma-separated column names (default: all)")
    p.add_argument("--pairs", help="'all' or a list like a:b,c:d (default all when <= 32 columns)")
    p.add_argument("--n-boot", type=int, default=0, help="bootstrap resamples for SDs (default 0)")
    p.add_argument("-o", "--output", default="/dev/stdout", help="long-format coefficient CSV")
    p.add_argument("--gap-table", help="write pairs ranked by |kdi-pearson| and |kdi-spearman|")
    p.add_argument("--top", type=int, default=2, help="disagreements listed on stderr (default 2)")
    _common(p)
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("cluster", help="univariate clustering at KDE valleys")
    p.add_argument("input", nargs="?", help="headered CSV file (or use --mixture)")
    p.add_argument("--column", help="column to cluster (default: first)")
    p.add_argument("--mixture", type=_mixture_arg,
                   help="generate data from benchmark mixture 1..5 or a mixture JSON file")
    p.add_argument("--n", type=int, help="sample size for --mixture")
    p.add_argument("--method", choices=[m.value for m in Method], default="kdi",
                   help="kdi (default) or raw (KDE on untransformed values)")
    p.add_argument("--grid-points", type=int, default=DEFAULT_GRID_POINTS,
                   help=f"density grid resolution (default {DEFAULT_GRID_POINTS})")
    p.add_argument("-o", "--output", default="/dev/null", help="CSV of value,label")
    p.add_argument("--summary", help="write the JSON summary here as well as stdout")
    _common(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("cluster-bench", help="K-recovery and ARI over mixtures x N x seeds")
    p.add_argument("--mixtures", default="1,2,3,4,5", help="mixture ids (default 1,2,3,4,5)")
    p.add_argument("--n-list", default="100,200,500,1000,2000,5000", help="sample sizes")
    p.add_argument("--seeds", type=int, default=20, help="simulations per cell (default 20)")
    p.add_argument("--methods", default="kdi,raw", help="kdi,raw (default both)")
    p.add_argument("--grid-points", type=int, default=DEFAULT_GRID_POINTS,
                   help=f"density grid resolution (default {DEFAULT_GRID_POINTS})")
    p.add_argument("-o", "--output", default="/dev/stdout", help="output CSV")
    _common(p, kernel=False)
    p.set_defaults(func=cmd_cluster_bench)

    p = sub.add_parser("bench", help="precision vs fit-time table for exact/grid/dp")
    p.add_argument("--strategies", default="exact,grid,dp", help="subset of exact,grid,dp")
    p.add_argument("--r-list", default="125,250,500,1000", help="grid sizes R")
    p.add_argument("--alphas", default="0.1,1,10", help="bandwidth factors")
    p.add_argument("--n", type=int, default=10_000, help="training points (default 10000)")
    p.add_argument("--n-test", type=int, default=10_000, help="test points (default 10000)")
    p.add_argument("--repeats", type=int, default=3, help="timing repeats, best kept (default 3)")
    p.add_argument("-o", "--output", default="/dev/stdout", help="output CSV")
    p.add_argument("--seed", type=int, default=0, help="master random seed (default 0)")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except UsageError as e:
        _info(f"kdi {args.command}: usage error: {e}")
        return EXIT_USAGE
    except (DataError, FileNotFoundError, ValueError) as e:
        _info(f"kdi {args.command}: data error: {e}")
        return EXIT_DATA
    except InvariantError as e:
        _info(f"kdi {args.command}: internal invariant violated: {e}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
