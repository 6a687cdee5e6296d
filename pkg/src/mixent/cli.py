"""``mixent`` command line: fit, threshold, oracle, experiment, sample.

Results go to stdout (or ``--output``) as JSON or CSV. Floats in JSON carry
17 significant digits. Exit codes are listed in :data:`EXIT_CODES`.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import kernels
from .config import ConfigError, family_hyper, float_list, int_list, load_config, search_config
from .data_model import EmptySampleError, SampleError, ingest, read_csv_column
from .experiments import DEFAULT_SEEDS, TABLE1_FACTORS, TABLE2_FACTORS, merge_tables, run_table
from .families import FAMILIES, get_family
from .oracles import GuardExceededError, brute_force_min, gaussian_split_test
from .search import SearchConfig, compact, search
from .synth import TWO_SQRT3, MixtureSpec, sample, spec_r2, spec_r7

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PARSE = 4
EXIT_EMPTY = 5
EXIT_GUARD = 6
EXIT_CODES = {
    "ok": EXIT_OK,
    "usage": EXIT_USAGE,
    "io": EXIT_IO,
    "parse": EXIT_PARSE,
    "empty sample": EXIT_EMPTY,
    "guard": EXIT_GUARD,
}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# -- JSON with fixed float precision ------------------------------------------


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    return s if any(c in s for c in ".en") else s + ".0"


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj.tolist() if isinstance(obj, np.ndarray) else obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


# -- helpers --------------------------------------------------------------------


def _read_values(path: str) -> list[float]:
    try:
        if path == "-":
            return read_csv_column(sys.stdin)
        return read_csv_column(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None
    except SampleError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from None


def _ingest(raw, tol: float = 0.0):
    try:
        return ingest(raw, tol)
    except EmptySampleError:
        raise CliError("empty sample", EXIT_EMPTY) from None
    except SampleError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None


def _load_raw_config(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    try:
        return load_config(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None
    except ConfigError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from None


def _search_config(raw: dict[str, str], args) -> SearchConfig:
    try:
        cfg = search_config(raw)
    except ConfigError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None
    if args.seed is not None:
        cfg = SearchConfig(**{**cfg.to_dict(), "seed": args.seed})
    return cfg


def _family(name: str, raw: dict[str, str]):
    try:
        hyper = family_hyper(raw)
    except ConfigError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None
    fam = get_family(name)
    allowed = {k: v for k, v in hyper.items() if hasattr(fam, k)}
    return get_family(name, **allowed)


def _emit(text: str, output: str | None) -> None:
    if output and output != "-":
        try:
            Path(output).write_text(text)
        except OSError as exc:
            raise CliError(f"cannot write {output}: {exc.strerror or exc}", EXIT_IO) from None
    else:
        sys.stdout.write(text)


# -- subcommands ----------------------------------------------------------------


def cmd_fit(args) -> int:
    raw_cfg = _load_raw_config(args.config)
    family = args.family or raw_cfg.get("family", "gaussian")
    cfg = _search_config(raw_cfg, args)
    tol = float(raw_cfg.get("grouping_tolerance", 0.0))
    values = _read_values(args.input)
    w = _ingest(values, tol)
    fam = _family(family, raw_cfg)
    res = search(w, fam, cfg)

    h = compact(res.best_assignment)
    keep = np.unique(res.best_assignment.labels)
    nu = res.model.nu.weights[keep]
    params = [fam.describe(res.model.params[x]) for x in keep]
    row_labels = h.labels[w.index_of(values, tol)]
    per_order: dict[int, float] = {}
    for rec in res.restarts_log:
        per_order[rec.r] = rec.best_H
    out = {
        "family": fam.name,
        "best_H": res.best_H,
        "r_n": res.r_n,
        "nu": nu,
        "params": params,
        "labels": row_labels,
        "tie": res.tie,
        "tie_orders": list(res.tie_orders),
        "restarts": {
            "count": len(res.restarts_log),
            "r_searched": res.r_searched,
            "guard_hit": res.guard_hit,
            "best_H_after_order": {str(k): v for k, v in sorted(per_order.items())},
        },
        "n": w.n,
        "distinct_values": w.m,
        "config": cfg.to_dict(),
        "backend": kernels.BACKEND,
    }
    _emit(dumps(out) + "\n", args.output)
    if res.guard_hit:
        print(f"warning: order guard r_max_guard={cfg.r_max_guard} reached", file=sys.stderr)
        return EXIT_GUARD
    return EXIT_OK


def cmd_threshold(args) -> int:
    try:
        rep = gaussian_split_test(args.nu1, args.mu1, args.sigma1, args.nu2, args.mu2, args.sigma2)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None
    out = {
        "lhs": rep.lhs,
        "rhs": rep.rhs,
        "margin": rep.margin,
        "split_is_strictly_better": rep.split_is_strictly_better,
        "sigma_star2": rep.sigma_star2,
        "merged_H": rep.merged_H,
        "split_H": rep.split_H,
    }
    _emit(dumps(out) + "\n", args.output)
    return EXIT_OK


def cmd_oracle(args) -> int:
    raw_cfg = _load_raw_config(args.config)
    values = _read_values(args.input)
    w = _ingest(values)
    fam = _family(args.family, raw_cfg)
    try:
        res = brute_force_min(w, fam, args.r, allow_degenerate=args.allow_degenerate)
    except GuardExceededError as exc:
        raise CliError(str(exc), EXIT_GUARD) from None
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None
    out = {
        "family": fam.name,
        "r": args.r,
        "min_H": res.min_H,
        "orders": list(res.orders),
        "tie": res.tie,
        "values": w.values,
        "counts": w.counts,
        "optima": [h.labels for h in res.optima],
        "degenerate_allowed": res.allow_degenerate,
    }
    _emit(dumps(out) + "\n", args.output)
    return EXIT_OK


def cmd_experiment(args) -> int:
    raw_cfg = _load_raw_config(args.config)
    cfg = _search_config(raw_cfg, args)
    try:
        if args.families:
            fams = [f.strip() for f in args.families.split(",") if f.strip()]
        else:
            fams = [f.strip() for f in raw_cfg.get("families", "gaussian,biexp").split(",") if f.strip()]
        default = TABLE1_FACTORS if args.table == "table1" else TABLE2_FACTORS
        factors = float_list(args.mu_factors or raw_cfg["mu_factors"]) if (args.mu_factors or "mu_factors" in raw_cfg) else list(default)
        seeds = int_list(args.seeds or raw_cfg["seeds"]) if (args.seeds or "seeds" in raw_cfg) else list(DEFAULT_SEEDS)
        n = int(args.n or raw_cfg.get("n", 10_000))
    except (ConfigError, ValueError) as exc:
        raise CliError(str(exc), EXIT_PARSE) from None
    for f in fams:
        if f not in FAMILIES:
            raise CliError(f"unknown family {f!r}", EXIT_USAGE)
    tables = [run_table(args.table, _family(f, raw_cfg), factors, n, seeds, cfg, args.jobs) for f in fams]
    table = merge_tables(*tables)
    _emit(table.to_csv(), args.output)
    if args.summary:
        _emit(table.summary_csv(), args.summary)
    unstable = [c for c in table.cells if c.unstable]
    for c in unstable:
        print(f"unstable cell: {c.family} mu_factor={c.mu_factor} orders={c.orders}", file=sys.stderr)
    return EXIT_OK


def cmd_sample(args) -> int:
    raw_cfg = _load_raw_config(args.config)
    try:
        if args.mixture in ("r2", "r7"):
            if args.mu_star is not None:
                mu = args.mu_star
            else:
                mu = (args.mu_factor if args.mu_factor is not None else 1.0) * TWO_SQRT3
            spec = spec_r2(mu) if args.mixture == "r2" else spec_r7(mu)
        else:
            if not raw_cfg:
                raise CliError("--mixture config needs --config", EXIT_USAGE)
            spec = MixtureSpec.from_config(raw_cfg)
    except (KeyError, ValueError) as exc:
        raise CliError(f"invalid mixture: {exc}", EXIT_PARSE) from None
    seed = args.seed if args.seed is not None else int(raw_cfg.get("seed", 0))
    n = args.n if args.n is not None else int(raw_cfg.get("n", 10_000))
    try:
        values, labels = sample(spec, n, seed=seed)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["value", "label"] if args.labels else ["value"])
    for v, lab in zip(values, labels):
        out.writerow([repr(float(v)), int(lab)] if args.labels else [repr(float(v))])
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mixent", description="Minimum mixing entropy clustering and order estimation.")
    p.add_argument("--seed", type=int, default=None, help="overrides any seed from the config file (default 0)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for independent jobs")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="search the minimum criterion and the order of a sample")
    f.add_argument("input", help="CSV file with one value per line, or - for stdin")
    f.add_argument("--family", choices=sorted(FAMILIES), default=None)
    f.add_argument("--config", help="flat key=value config file")
    f.add_argument("--output", "-o", help="write JSON here instead of stdout")
    f.set_defaults(func=cmd_fit)

    t = sub.add_parser("threshold", help="split-vs-merge test for two Gaussian components")
    for name in ("nu1", "mu1", "sigma1", "nu2", "mu2", "sigma2"):
        t.add_argument(name, type=float)
    t.add_argument("--output", "-o")
    t.set_defaults(func=cmd_threshold)

    o = sub.add_parser("oracle", help="exhaustive minimum on a small sample")
    o.add_argument("input")
    o.add_argument("--family", choices=sorted(FAMILIES), default="bernoulli")
    o.add_argument("--r", type=int, default=2)
    o.add_argument("--allow-degenerate", action="store_true")
    o.add_argument("--config")
    o.add_argument("--output", "-o")
    o.set_defaults(func=cmd_oracle)

    e = sub.add_parser("experiment", help="reproduce an order-estimation table")
    e.add_argument("table", choices=("table1", "table2"))
    e.add_argument("--config")
    e.add_argument("--families", help="comma-separated, default gaussian,biexp")
    e.add_argument("--mu-factors", help="comma-separated multiples of 2*sqrt(3)")
    e.add_argument("--seeds", help="comma-separated sample seeds")
    e.add_argument("--n", type=int, default=None)
    e.add_argument("--output", "-o", help="per-seed CSV")
    e.add_argument("--summary", help="also write the majority-vote table here")
    e.set_defaults(func=cmd_experiment)

    s = sub.add_parser("sample", help="draw a synthetic sample as CSV")
    s.add_argument("--mixture", choices=("r2", "r7", "config"), default="r2")
    s.add_argument("--mu-factor", type=float, default=None, help="mean spacing in units of 2*sqrt(3)")
    s.add_argument("--mu-star", type=float, default=None, help="mean spacing (overrides --mu-factor)")
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--labels", action="store_true", help="include the true component label")
    s.add_argument("--config", help="mixture spec as key=value (kind, weights, means, variances, p_one)")
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_sample)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"mixent: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
