"""Reproduction harness for the two synthetic order-estimation tables.

Each cell is one (mu factor, family) pair; every seed draws a fresh sample
of the mixture and runs the order search on it. Cells report the per-seed
orders next to the majority so unstable cells stay visible.
"""

from __future__ import annotations

import csv
import io
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .cem import FitResult
from .data_model import WeightedSample, ingest
from .families import Family, get_family
from .search import SearchConfig, compact, search
from .synth import TWO_SQRT3, sample, spec_r2, spec_r7

TABLE1_FACTORS = (0.70, 0.75, 0.9, 1.0, 1.1)
TABLE2_FACTORS = (0.50, 0.60, 0.70, 1.0)
DEFAULT_SEEDS = (0, 1, 2, 3, 4)
STABLE_AGREEMENT = 0.8
CSV_HEADER = ("mu_factor", "family", "seed", "r_n", "best_H", "wallclock_ms")


@dataclass(frozen=True)
class SeedRun:
    mu_factor: float
    family: str
    seed: int
    r_n: int
    best_H: float
    wallclock_ms: float


@dataclass(frozen=True)
class Cell:
    mu_factor: float
    family: str
    runs: tuple

    @property
    def orders(self) -> tuple:
        return tuple(run.r_n for run in self.runs)

    @property
    def majority(self) -> int:
        """Most frequent order; ties go to the smaller order."""
        counts = Counter(self.orders)
        top = max(counts.values())
        return min(k for k, v in counts.items() if v == top)

    @property
    def agreement(self) -> float:
        return self.orders.count(self.majority) / len(self.runs)

    @property
    def unstable(self) -> bool:
        return self.agreement < STABLE_AGREEMENT


@dataclass(frozen=True)
class Table:
    name: str
    cells: tuple

    def cell(self, mu_factor: float, family: str) -> Cell:
        for c in self.cells:
            if abs(c.mu_factor - mu_factor) < 1e-12 and c.family == family:
                return c
        raise KeyError((mu_factor, family))

    def to_csv(self) -> str:
        """One row per (cell, seed)."""
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(CSV_HEADER)
        for c in self.cells:
            for run in c.runs:
                out.writerow(
                    [repr(run.mu_factor), run.family, run.seed, run.r_n, repr(run.best_H), f"{run.wallclock_ms:.1f}"]
                )
        return buf.getvalue()

    def summary_csv(self) -> str:
        """Majority order per factor (rows) and family (columns), with agreement."""
        fams = list(dict.fromkeys(c.family for c in self.cells))
        factors = list(dict.fromkeys(c.mu_factor for c in self.cells))
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        header = ["mu_factor"]
        for f in fams:
            header += [f"{f}_r_n", f"{f}_per_seed", f"{f}_unstable"]
        out.writerow(header)
        for mf in factors:
            row = [repr(mf)]
            for f in fams:
                c = self.cell(mf, f)
                row += [c.majority, " ".join(map(str, c.orders)), int(c.unstable)]
            out.writerow(row)
        return buf.getvalue()


def _family_name(family: str | Family) -> str:
    return get_family(family).name


def _one_run(args) -> SeedRun:
    table, mu_factor, family, n, seed, cfg = args
    mu_star = mu_factor * TWO_SQRT3
    spec = spec_r2(mu_star) if table == "table1" else spec_r7(mu_star)
    values, _ = sample(spec, n, seed=seed)
    w = ingest(values)
    t0 = time.perf_counter()
    res = search(w, family, replace(cfg, seed=seed))
    ms = (time.perf_counter() - t0) * 1000.0
    return SeedRun(float(mu_factor), _family_name(family), int(seed), res.r_n, res.best_H, ms)


def run_table(
    table: str,
    family: str | Family,
    mu_factors,
    n: int = 10_000,
    seeds=DEFAULT_SEEDS,
    cfg: SearchConfig | None = None,
    jobs: int = 1,
) -> Table:
    """Run every (factor, seed) job of ``table`` ("table1" or "table2")."""
    if table not in ("table1", "table2"):
        raise ValueError(f"unknown table {table!r}")
    cfg = cfg or SearchConfig()
    jobs_list = [(table, float(mf), family, n, int(s), cfg) for mf in mu_factors for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_one_run, jobs_list))
    else:
        runs = [_one_run(j) for j in jobs_list]
    cells = []
    per = len(tuple(seeds))
    for i, mf in enumerate(mu_factors):
        chunk = tuple(runs[i * per : (i + 1) * per])
        cells.append(Cell(float(mf), _family_name(family), chunk))
    return Table(table, tuple(cells))


def run_table1(family, mu_factors=TABLE1_FACTORS, n=10_000, seeds=DEFAULT_SEEDS, cfg=None, jobs=1) -> Table:
    """Two-component mixture: N(0,1) and N(mu, 1) with equal weights."""
    return run_table("table1", family, mu_factors, n, seeds, cfg, jobs)


def run_table2(family, mu_factors=TABLE2_FACTORS, n=10_000, seeds=DEFAULT_SEEDS, cfg=None, jobs=1) -> Table:
    """Seven equally weighted unit normals at 0, mu, ..., 6 mu."""
    return run_table("table2", family, mu_factors, n, seeds, cfg, jobs)


def merge_tables(*tables: Table) -> Table:
    """Concatenate cells of tables built for different families."""
    if not tables:
        raise ValueError("nothing to merge")
    return Table(tables[0].name, tuple(c for t in tables for c in t.cells))


@dataclass(frozen=True)
class ClassHistograms:
    """Per-class counts on common bins; ``counts[x, b]`` for class x, bin b."""

    edges: np.ndarray
    counts: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["bin_left", "bin_right"] + [f"class_{x}" for x in range(self.counts.shape[0])])
        for b in range(self.edges.size - 1):
            out.writerow([repr(float(self.edges[b])), repr(float(self.edges[b + 1]))] + self.counts[:, b].tolist())
        return buf.getvalue()


def class_histograms(result: FitResult, w: WeightedSample, bins: int = 50) -> ClassHistograms:
    """Histogram of the sample split by the classes of ``result`` (occupied ones only)."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    h = compact(result.best_assignment)
    edges = np.histogram_bin_edges(w.values, bins=bins)
    counts = np.zeros((h.r, bins), dtype=np.int64)
    for x in range(h.r):
        sel = h.labels == x
        counts[x], _ = np.histogram(w.values[sel], bins=edges, weights=w.counts[sel])
    return ClassHistograms(edges, counts)


__all__ = [
    "TABLE1_FACTORS",
    "TABLE2_FACTORS",
    "DEFAULT_SEEDS",
    "CSV_HEADER",
    "SeedRun",
    "Cell",
    "Table",
    "run_table",
    "run_table1",
    "run_table2",
    "merge_tables",
    "ClassHistograms",
    "class_histograms",
]
