import math

import numpy as np
import pytest

from mixent.data_model import HardAssignment, ProbVector, decomposition_from_assignment, ingest
from mixent.entropy import (
    classification_loglik,
    criterion_of_assignment,
    criterion_of_labels,
    cross_entropy,
    mixing_entropy,
    shannon_entropy,
)
from mixent.families import BernoulliParams, BiExpParams, GaussianParams
from mixent.synth import TWO_SQRT3, sample, spec_r2


def test_shannon_entropy_examples(frozen):
    assert shannon_entropy(ProbVector([1.0, 0.0])) == 0.0
    assert shannon_entropy(ProbVector([0.5, 0.5])) == pytest.approx(math.log(2), abs=1e-15)
    assert shannon_entropy(ProbVector([0.7, 0.3])) == pytest.approx(frozen["h_07_03"], abs=1e-15)


def test_cross_entropy_examples():
    assert cross_entropy(np.array([1.0]), np.array([0.0]), "gaussian", GaussianParams(0, 1)) == pytest.approx(
        0.5 * math.log(2 * math.pi)
    )
    g = np.array([0.7, 0.3])
    assert cross_entropy(g, np.array([0.0, 1.0]), "bernoulli", BernoulliParams(0.7, 0.3)) == pytest.approx(
        shannon_entropy(g), abs=1e-15
    )
    gap = BiExpParams(0.5, 0.0, 1.0, 1.0, 1.0)
    assert cross_entropy(np.array([1.0]), np.array([0.5]), "biexp", gap) == math.inf


def test_mixing_entropy_merged_gaussian():
    x, _ = sample(spec_r2(0.1), 5000, seed=3)
    w = ingest(x)
    d = decomposition_from_assignment(HardAssignment(np.zeros(w.m, dtype=int), 1), w)
    crit = mixing_entropy(d, w, "gaussian")
    var = float(np.var(x))
    assert crit.value == pytest.approx(0.5 * (math.log(var) + math.log(2 * math.pi) + 1), abs=1e-10)
    assert crit.value == pytest.approx(crit.nu_entropy + float(crit.nu @ crit.per_class_cross_entropy), abs=1e-12)


def test_mixing_entropy_binary_split():
    w = ingest([0.0] * 3 + [1.0] * 2)
    crit = criterion_of_assignment(HardAssignment(np.array([0, 1]), 2), w, "bernoulli")
    assert crit.value == pytest.approx(shannon_entropy(np.array([0.6, 0.4])), abs=1e-15)


def test_midpoint_split_near_population_value(frozen):
    x, _ = sample(spec_r2(TWO_SQRT3), 10000, seed=0)
    w = ingest(x)
    lab = (w.values > TWO_SQRT3 / 2).astype(int)
    val = criterion_of_labels(lab, 2, w, "gaussian")
    # truncation at the midpoint shrinks each class a little below the population value
    assert abs(val - frozen["split_H_2sqrt3"]) < 0.1


def test_criterion_merged_equals_mixing_entropy():
    w = ingest([0.3, 1.2, 1.9, 4.4])
    a = criterion_of_assignment(HardAssignment(np.zeros(4, dtype=int), 1), w, "gaussian").value
    b = mixing_entropy(decomposition_from_assignment(HardAssignment(np.zeros(4, dtype=int), 1), w), w, "gaussian").value
    assert a == b


def test_cml_matches_independent_pointwise(frozen):
    case = frozen["cml_example"]
    raw = np.array(case["raw"])
    w = ingest(raw)
    lab = np.empty(w.m, dtype=int)
    lab[w.index_of(raw)] = case["labels"]
    h = HardAssignment(lab, 3)
    crit = criterion_of_assignment(h, w, "gaussian")
    assert -raw.size * crit.value == pytest.approx(case["loglik"], abs=1e-10 * raw.size)
    assert classification_loglik(h, w, "gaussian") == pytest.approx(case["loglik"], abs=1e-9)


def test_permuted_labels_same_value():
    w = ingest([0.1, 0.5, 2.0, 2.2, 7.0])
    lab = np.array([0, 0, 1, 1, 2])
    perm = np.array([2, 0, 1])
    for fam in ("gaussian", "biexp"):
        assert criterion_of_labels(lab, 3, w, fam) == pytest.approx(criterion_of_labels(perm[lab], 3, w, fam), abs=1e-12)


def test_zero_weight_padding_is_exact():
    w = ingest([0.1, 0.5, 2.0, 2.2, 7.0])
    lab = np.array([0, 0, 1, 1, 1])
    assert criterion_of_labels(lab, 2, w, "gaussian") == criterion_of_labels(lab, 5, w, "gaussian")


def test_merging_two_classes_decomposes():
    w = ingest([0.0, 0.4, 1.0, 5.0, 5.3, 6.1])
    split = criterion_of_assignment(HardAssignment(np.array([0, 0, 0, 1, 1, 1]), 2), w, "gaussian")
    merged = criterion_of_assignment(HardAssignment(np.zeros(6, dtype=int), 1), w, "gaussian")
    delta = merged.value - split.value
    nu_loss = -split.nu_entropy
    ce_gain = merged.per_class_cross_entropy[0] - float(split.nu @ split.per_class_cross_entropy)
    assert delta == pytest.approx(nu_loss + ce_gain, abs=1e-12)
