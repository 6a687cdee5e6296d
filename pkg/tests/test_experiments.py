import csv
import io

import numpy as np
import pytest

from mixent.data_model import ingest
from mixent.experiments import (
    CSV_HEADER,
    Cell,
    SeedRun,
    class_histograms,
    merge_tables,
    run_table1,
    run_table2,
)
from mixent.search import SearchConfig, search
from mixent.synth import TWO_SQRT3, sample, spec_r2

FAST = SearchConfig(n_init=3)


def _run(r_n, seed=0):
    return SeedRun(1.0, "gaussian", seed, r_n, 0.0, 0.0)


def test_majority_and_agreement():
    c = Cell(1.0, "gaussian", tuple(_run(k, i) for i, k in enumerate([2, 2, 1, 2, 3])))
    assert c.majority == 2 and c.agreement == 0.6 and c.unstable
    tie = Cell(1.0, "gaussian", tuple(_run(k, i) for i, k in enumerate([1, 2, 2, 1])))
    assert tie.majority == 1
    stable = Cell(1.0, "gaussian", tuple(_run(k, i) for i, k in enumerate([2, 2, 2, 2, 1])))
    assert not stable.unstable


def test_small_table_csv_layout():
    t = run_table1("gaussian", mu_factors=(0.5, 2.0), n=300, seeds=(0, 1), cfg=FAST)
    rows = list(csv.reader(io.StringIO(t.to_csv())))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 1 + 4
    assert {r[1] for r in rows[1:]} == {"gaussian"}
    assert t.cell(0.5, "gaussian").majority == 1
    assert t.cell(2.0, "gaussian").majority == 2
    summary = list(csv.reader(io.StringIO(t.summary_csv())))
    assert summary[0] == ["mu_factor", "gaussian_r_n", "gaussian_per_seed", "gaussian_unstable"]


def test_table_seed_deterministic():
    a = run_table2("gaussian", mu_factors=(1.5,), n=400, seeds=(3,), cfg=FAST)
    b = run_table2("gaussian", mu_factors=(1.5,), n=400, seeds=(3,), cfg=FAST)
    assert a.cells[0].orders == b.cells[0].orders
    assert a.cells[0].runs[0].best_H == b.cells[0].runs[0].best_H


def test_parallel_matches_sequential():
    seq = run_table1("gaussian", mu_factors=(1.5,), n=300, seeds=(0, 1), cfg=FAST)
    par = run_table1("gaussian", mu_factors=(1.5,), n=300, seeds=(0, 1), cfg=FAST, jobs=2)
    assert [r.best_H for r in seq.cells[0].runs] == [r.best_H for r in par.cells[0].runs]


def test_merge_tables():
    a = run_table1("gaussian", mu_factors=(2.0,), n=200, seeds=(0,), cfg=FAST)
    b = run_table1("biexp", mu_factors=(2.0,), n=200, seeds=(0,), cfg=FAST)
    m = merge_tables(a, b)
    assert [c.family for c in m.cells] == ["gaussian", "biexp"]
    assert m.cell(2.0, "biexp") is b.cells[0]
    with pytest.raises(ValueError):
        merge_tables()


def test_unknown_table():
    from mixent.experiments import run_table

    with pytest.raises(ValueError):
        run_table("table3", "gaussian", (1.0,))


def test_histograms_one_class_equals_full():
    x, _ = sample(spec_r2(1.0), 500, seed=0)
    w = ingest(x)
    res = search(w, "gaussian", SearchConfig(n_init=2, r_max_guard=1))
    hist = class_histograms(res, w, bins=20)
    full, edges = np.histogram(x, bins=20)
    assert np.array_equal(hist.counts[0], full)
    assert np.allclose(hist.edges, edges)


def test_histograms_two_clumps_disjoint():
    x, _ = sample(spec_r2(1.5 * TWO_SQRT3 * 2), 2000, seed=1)
    w = ingest(x)
    res = search(w, "gaussian", SearchConfig(n_init=4))
    hist = class_histograms(res, w, bins=40)
    assert hist.counts.sum() == w.n
    assert hist.counts.shape[0] == 2
    overlap = np.minimum(hist.counts[0], hist.counts[1]).sum()
    assert overlap / w.n < 0.05
    rows = list(csv.reader(io.StringIO(hist.to_csv())))
    assert rows[0] == ["bin_left", "bin_right", "class_0", "class_1"]
    assert len(rows) == 41


def test_histograms_bins_validated():
    w = ingest([0.0, 1.0])
    res = search(w, "gaussian", SearchConfig(n_init=1, r_max_guard=1))
    with pytest.raises(ValueError):
        class_histograms(res, w, bins=0)
