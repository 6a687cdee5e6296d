import math

import numpy as np
import pytest

from _instances import tiny_instance
from mixent.cem import run_cem
from mixent.data_model import HardAssignment, ingest
from mixent.entropy import criterion_of_assignment
from mixent.oracles import brute_force_min
from mixent.search import SearchConfig, compact, random_initial_assignment, search
from mixent.synth import make_rng, sample, spec_r2


def test_random_init_single_class():
    w = ingest([0.0, 1.0, 2.0])
    assert np.all(random_initial_assignment(1, w, make_rng(0)).phi == 1.0)


def test_random_init_reproducible():
    w = ingest(np.arange(20.0))
    for method in ("dirichlet", "voronoi", "kmeanspp"):
        a = random_initial_assignment(4, w, make_rng(5, 4, 0), method).phi
        b = random_initial_assignment(4, w, make_rng(5, 4, 0), method).phi
        assert np.array_equal(a, b)


def test_random_init_rows_sum_to_one():
    x, _ = sample(spec_r2(3.0), 10000, seed=1)
    phi = random_initial_assignment(7, ingest(x), make_rng(1)).phi
    assert phi.shape == (10000, 7)
    assert np.max(np.abs(phi.sum(axis=1) - 1.0)) <= 1e-12


def test_random_init_rejects_bad_input():
    w = ingest([0.0, 1.0])
    with pytest.raises(ValueError):
        random_initial_assignment(0, w, make_rng(0))
    with pytest.raises(ValueError):
        random_initial_assignment(2, w, make_rng(0), "bogus")


@pytest.mark.parametrize(
    "kwargs",
    [dict(n_init=0), dict(stop_em=0), dict(stop_r=0), dict(r_start=3, r_max_guard=2), dict(init="x"), dict(inner_reference="x")],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SearchConfig(**kwargs)


def test_binary_70_30(frozen):
    w = ingest([0.0] * 70 + [1.0] * 30)
    res = search(w, "bernoulli", SearchConfig(seed=0))
    assert res.best_H == pytest.approx(frozen["h_07_03"], abs=1e-12)
    assert res.r_n in (1, 2)
    assert res.tie
    assert sorted({res.r_n, *res.tie_orders}) == [1, 2]


def _two_clumps(seed=3, n=400):
    x, _ = sample(spec_r2(6.0), n, seed=seed)
    return ingest(x)


def test_result_invariants():
    w = _two_clumps()
    res = search(w, "gaussian", SearchConfig(seed=1, n_init=6))
    assert res.r_n <= res.r_searched
    crit = criterion_of_assignment(res.best_assignment, w, "gaussian").value
    assert res.best_H == pytest.approx(crit, abs=1e-12)
    hist = [rec.best_H for rec in res.restarts_log]
    assert all(b <= a for a, b in zip(hist, hist[1:]))
    assert res.r_n == 2


def test_seed_determinism():
    w = _two_clumps()
    cfg = SearchConfig(seed=9, n_init=4)
    a, b = search(w, "gaussian", cfg), search(w, "gaussian", cfg)
    assert a.best_H == b.best_H
    assert a.best_assignment == b.best_assignment
    assert a.restarts_log == b.restarts_log


def test_extra_class_stays_empty():
    w = _two_clumps()
    res = search(w, "gaussian", SearchConfig(seed=2, n_init=6))
    r = res.r_n
    again = search(w, "gaussian", SearchConfig(seed=2, n_init=6, r_start=r, r_max_guard=r + 1))
    assert again.best_H == pytest.approx(res.best_H, abs=1e-9)
    assert again.r_n == r
    # the optimum padded with an empty class is a fixed point of the engine
    padded = HardAssignment(compact(res.best_assignment).labels, r + 1)
    fit, _ = run_cem(padded, w, "gaussian")
    assert fit.best_H == pytest.approx(res.best_H, abs=1e-12)
    assert fit.r_n == r


def test_guard_flag():
    x, _ = sample(spec_r2(8.0), 300, seed=0)
    res = search(ingest(x), "gaussian", SearchConfig(seed=0, n_init=3, r_max_guard=1))
    assert res.guard_hit and res.r_searched == 1 and res.r_n == 1


def test_compact_drops_empty_classes():
    h = compact(HardAssignment(np.array([3, 0, 3]), 5))
    assert h.r == 2 and h.labels.tolist() == [1, 0, 1]


@pytest.mark.parametrize("seed", range(12))
def test_search_never_beats_brute_force(seed):
    fam, x = tiny_instance(seed)
    w = ingest(x)
    bf = brute_force_min(w, fam, 3)
    res = search(w, fam, SearchConfig(seed=seed, r_max_guard=3))
    assert res.best_H >= bf.min_H - 1e-9
    assert math.isfinite(res.best_H)
