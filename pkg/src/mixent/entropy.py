"""Entropy kernels and the mixing-entropy criterion.

All logarithms are natural. ``0 log 0`` is taken as 0 throughout, which is
what makes zero-weight classes inert.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data_model import (
    Decomposition,
    HardAssignment,
    ProbVector,
    SoftAssignment,
    WeightedSample,
    decomposition_from_assignment,
    soft_from_hard,
)
from .families import Family, FamilyParams, WeightedSubsample, get_family


@dataclass(frozen=True, eq=False)
class CriterionValue:
    """``value = nu_entropy + sum_x nu[x] * per_class_cross_entropy[x]``.

    Extinct classes carry a cross entropy of 0 and ``params[x] is None``.
    """

    value: float
    nu: np.ndarray
    nu_entropy: float
    per_class_cross_entropy: np.ndarray
    params: tuple
    degenerate: bool = False

    @property
    def r(self) -> int:
        return int(self.nu.size)


def shannon_entropy(nu: ProbVector | np.ndarray) -> float:
    w = nu.weights if isinstance(nu, ProbVector) else np.asarray(nu, dtype=float)
    pos = w[w > 0]
    return float(-(pos * np.log(pos)).sum())


def cross_entropy(g: np.ndarray, values: np.ndarray, family: str | Family, params: FamilyParams) -> float:
    """``-sum_z g(z) log g_theta(z)``; ``+inf`` if mass sits on a zero-density point."""
    fam = get_family(family)
    g = np.asarray(g, dtype=float)
    sel = g > 0
    logd = fam.log_density(params, np.asarray(values, dtype=float)[sel])
    if np.any(np.isneginf(logd)):
        return math.inf
    return float(-(g[sel] * logd).sum())


def _assemble(nu: np.ndarray, fam: Family, values: np.ndarray, class_weights) -> CriterionValue:
    r = nu.size
    ce = np.zeros(r)
    params: list = [None] * r
    degenerate = False
    for x in range(r):
        if nu[x] > 0:
            p, val = fam.fit(WeightedSubsample(values, class_weights[x]))
            params[x] = p
            ce[x] = val
            degenerate = degenerate or fam.is_degenerate(p)
    h_nu = shannon_entropy(nu)
    pos = nu > 0
    value = h_nu + float((nu[pos] * ce[pos]).sum())
    ce.setflags(write=False)
    return CriterionValue(value, nu, h_nu, ce, tuple(params), degenerate)


def mixing_entropy(d: Decomposition, w: WeightedSample, family: str | Family) -> CriterionValue:
    """Mixing entropy of a decomposition of ``w``'s empirical distribution,
    with each component's cross entropy minimized over the family."""
    fam = get_family(family).bind(w)
    nu = np.array(d.nu.weights)
    nu.setflags(write=False)
    return _assemble(nu, fam, w.values, d.components)


def criterion_of_soft(s: SoftAssignment, w: WeightedSample, family: str | Family) -> CriterionValue:
    """Mixing entropy of the decomposition induced by a soft assignment."""
    return mixing_entropy(decomposition_from_assignment(s, w), w, family)


def criterion_of_assignment(h: HardAssignment, w: WeightedSample, family: str | Family) -> CriterionValue:
    """Criterion of a hard classification rule.

    Equals ``-loglik / n`` where ``loglik`` is the classification likelihood;
    see :func:`classification_loglik`.
    """
    if h.m != w.m:
        raise ValueError(f"assignment covers {h.m} values, sample has {w.m}")
    fam = get_family(family).bind(w)
    nx = np.bincount(h.labels, weights=w.counts, minlength=h.r)
    nu = nx / w.n
    nu.setflags(write=False)
    onehot = h.labels[None, :] == np.arange(h.r)[:, None]
    class_weights = onehot * w.counts[None, :].astype(float)
    return _assemble(nu, fam, w.values, class_weights)


def criterion_of_labels(labels, r: int, w: WeightedSample, family: str | Family) -> float:
    return criterion_of_assignment(HardAssignment(labels, r), w, family).value


def classification_loglik(h: HardAssignment, w: WeightedSample, family: str | Family) -> float:
    """Maximized classification log-likelihood of a hard assignment.

    ``sum_k log nu(x_k) + sum_k log g_{theta_{x_k}}(Z_k)`` with per-class
    MLE parameters, summed point by point through ``log_density``.
    """
    fam = get_family(family).bind(w)
    total = 0.0
    for x in np.unique(h.labels):
        sel = h.labels == x
        cnt = w.counts[sel]
        params, _ = fam.fit(WeightedSubsample(w.values[sel], cnt.astype(float)))
        nx = int(cnt.sum())
        logd = fam.log_density(params, w.values[sel])
        total += nx * math.log(nx / w.n) + float((cnt * logd).sum())
    return total


def soft_objective(phi: np.ndarray, w: WeightedSample, family: Family, nu: np.ndarray, params) -> float:
    """``H_theta(nu, (G_x^phi))``: criterion with parameters held fixed.

    Used to verify the inequalities chaining E-, C- and M-steps.
    """
    fam = family.bind(w)
    total = 0.0
    joint = w.weights[:, None] * phi
    for x in range(nu.size):
        col = joint[:, x]
        if not np.any(col > 0):
            continue
        if nu[x] <= 0:
            return math.inf
        logd = fam.log_density(params[x], w.values)
        sel = col > 0
        total -= float((col[sel] * (math.log(nu[x]) + logd[sel])).sum())
    return total


__all__ = [
    "CriterionValue",
    "shannon_entropy",
    "cross_entropy",
    "mixing_entropy",
    "criterion_of_soft",
    "criterion_of_assignment",
    "criterion_of_labels",
    "classification_loglik",
    "soft_objective",
    "soft_from_hard",
]
