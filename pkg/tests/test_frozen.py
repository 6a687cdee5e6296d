"""The independent reference code still reproduces the stored values,
and the package agrees with the references it was not checked against elsewhere."""

import math

import numpy as np
import pytest

import _independent as ind
from freeze_values import compute
from mixent.data_model import ingest
from mixent.families import BiExpFamily, BiExpParams, GaussianFamily, WeightedSubsample, log_density

scipy = pytest.importorskip("scipy")


def _close(a, b):
    if isinstance(a, dict):
        return a.keys() == b.keys() and all(_close(a[k], b[k]) for k in a)
    if isinstance(a, list):
        return len(a) == len(b) and all(_close(x, y) for x, y in zip(a, b))
    if isinstance(a, float):
        return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-9)
    return a == b


def test_reference_reproduces_frozen(frozen):
    fresh = compute()
    assert fresh.keys() == frozen.keys()
    for k in fresh:
        assert _close(fresh[k], frozen[k]), k


def test_gaussian_fit_matches_numeric(frozen):
    case = frozen["gauss_fit_sample"]
    w = ingest(case["values"])
    fam = GaussianFamily().bind(w)
    _, val = fam.fit(WeightedSubsample(np.array(case["values"]), np.array(case["weights"])))
    assert val == pytest.approx(case["value"], abs=1e-8)


def test_biexp_fit_matches_numeric(frozen):
    v = np.array([0.0, 1.0, 2.0, 3.0])
    fam = BiExpFamily().bind(ingest(v))
    _, val = fam.fit(WeightedSubsample(v, np.ones(4)))
    assert val == pytest.approx(frozen["biexp_fit_0123"], abs=1e-8)


def test_biexp_log_density_matches_reference(frozen):
    got = log_density("biexp", BiExpParams(0.7, 0.0, 1.0, 1.0, 1.0), np.array([1.0]))[0]
    assert got == pytest.approx(frozen["biexp_logpdf_p07"], abs=1e-15)


@pytest.mark.parametrize("seed", range(15))
def test_biexp_fit_random_supports(seed):
    rng = np.random.default_rng(seed)
    v = np.sort(np.unique(np.round(rng.normal(size=int(rng.integers(3, 12))) * 4, 2)))
    wts = rng.random(v.size) + 0.05
    fam = BiExpFamily().bind(ingest(v))
    _, val = fam.fit(WeightedSubsample(v, wts))
    assert val == pytest.approx(ind.biexp_ce_numeric(v, wts), abs=1e-7)


@pytest.mark.parametrize("seed", range(10))
def test_gaussian_fit_random(seed):
    rng = np.random.default_rng(100 + seed)
    v = np.sort(rng.normal(size=8) * 3)
    wts = rng.random(8) + 0.1
    fam = GaussianFamily().bind(ingest(v))
    _, val = fam.fit(WeightedSubsample(v, wts))
    assert val == pytest.approx(ind.gaussian_ce_numeric(v, wts), abs=1e-7)
