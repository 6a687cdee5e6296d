"""Ground-truth solvers used to check the heuristic search.

* :func:`brute_force_min` enumerates every hard assignment of the distinct
  values of a small sample.
* :func:`binary_closed_form` gives the exact optimum for 0/1 data.
* :func:`gaussian_split_test` compares the population criterion of a
  two-component Gaussian mixture split into its components against the
  same mixture merged into one normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .data_model import HardAssignment, WeightedSample
from .entropy import criterion_of_assignment, shannon_entropy
from .families import BernoulliFamily, BernoulliParams, BiExpFamily, Family, GaussianFamily, get_family

BRUTE_FORCE_GUARD = 2_000_000
TIE_TOL = 1e-12
LOG_2PI = math.log(2.0 * math.pi)


class GuardExceededError(ValueError):
    """The requested enumeration is larger than the configured guard."""

    def __init__(self, count: int, guard: int):
        super().__init__(f"enumeration needs {count} assignments, guard is {guard}")
        self.count = count
        self.guard = guard


@dataclass(frozen=True, eq=False)
class BruteForceResult:
    """Exhaustive minimum over assignments into at most ``r`` classes.

    ``optima`` holds one canonical representative per label permutation
    class, each compacted to its occupied classes.
    """

    min_H: float
    optima: tuple
    r: int
    allow_degenerate: bool

    @property
    def orders(self) -> tuple:
        """Occupied-class counts attained by the optima, ascending."""
        return tuple(sorted({h.r for h in self.optima}))

    @property
    def r_n(self) -> int:
        return self.orders[0]

    @property
    def tie(self) -> bool:
        return len(self.orders) > 1


def _kind_args(fam: Family) -> tuple[int, float, float, float, bool]:
    if isinstance(fam, GaussianFamily):
        return kernels.KIND_GAUSSIAN, float(fam.sigma2_floor), 0.0, 0.0, True
    if isinstance(fam, BernoulliFamily):
        return kernels.KIND_BERNOULLI, 0.0, 0.0, 0.0, True
    if isinstance(fam, BiExpFamily):
        return kernels.KIND_BIEXP, 0.0, float(fam.alpha), float(fam.lambda_cap), bool(fam.exclude_flat)
    raise ValueError(f"no enumeration kernel for family {fam.name!r}")


def brute_force_min(
    w: WeightedSample,
    family: str | Family,
    r: int,
    allow_degenerate: bool = False,
    guard: int = BRUTE_FORCE_GUARD,
) -> BruteForceResult:
    """Minimize the criterion over every assignment of distinct values to ``r`` classes.

    Labelings are enumerated as restricted-growth strings, so each partition
    is visited once. Candidates near the kernel's minimum are recomputed with
    :func:`criterion_of_assignment`; those within ``TIE_TOL`` of the exact
    minimum form the argmin set. Unless ``allow_degenerate``, assignments with a
    class on the variance floor or rate cap are skipped, falling back to all
    assignments when none remains.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    count = r**w.m
    if count > guard:
        raise GuardExceededError(count, guard)
    fam = get_family(family).bind(w)
    if isinstance(fam, BernoulliFamily) and np.any((w.values != 0.0) & (w.values != 1.0)):
        raise ValueError("bernoulli family needs 0/1 observations")
    kind, floor, alpha, cap, flat = _kind_args(fam)
    best, cands = kernels.enumerate_min(
        w.values, w.counts, r, kind, floor, alpha, cap, 1e-9, not allow_degenerate, flat
    )
    used_degenerate = allow_degenerate
    if not math.isfinite(best):
        best, cands = kernels.enumerate_min(w.values, w.counts, r, kind, floor, alpha, cap, 1e-9, False, flat)
        used_degenerate = True

    exact = []
    for lab in cands:
        h = HardAssignment(lab, r)
        crit = criterion_of_assignment(h, w, fam)
        if crit.degenerate and not used_degenerate:
            continue
        exact.append((crit.value, h))
    min_H = min(v for v, _ in exact)
    optima = {}
    for v, h in exact:
        if v <= min_H + TIE_TOL:
            c = h.canonical()
            occ = int(c.labels.max()) + 1
            c = HardAssignment(c.labels, occ)
            optima[tuple(c.labels.tolist())] = c
    ordered = tuple(optima[k] for k in sorted(optima))
    return BruteForceResult(min_H, ordered, r, used_degenerate)


# -- binary closed form ------------------------------------------------------


@dataclass(frozen=True)
class BinarySolution:
    """Exact optimum for a distribution on {0, 1}.

    ``optimal_decompositions`` lists ``(nu, components)`` pairs with nu a
    tuple of weights and components a tuple of :class:`BernoulliParams`.
    ``r_nu`` is the pivot class index shared by all optima.
    """

    min_H: float
    optimal_decompositions: tuple
    r_nu: int

    def canonical_labelings(self) -> set:
        """Optima as labelings of the observed values (sorted, 0 before 1),
        up to label permutation."""
        mu0 = self.optimal_decompositions[0][1][0].mu0
        present = 1 if mu0 in (0.0, 1.0) else 2
        out = set()
        for nu, comps in self.optimal_decompositions:
            if len(nu) == 1:
                out.add((0,) * present)
            else:
                out.add((0, 1))
        return out


def _binary_entropy(q: float) -> float:
    h = 0.0
    for t in (q, 1.0 - q):
        if t > 0:
            h -= t * math.log(t)
    return h


def pivot_fill(nu, mu_star: float) -> tuple[int, np.ndarray]:
    """Pivot index (1-based) and per-class fill levels minimizing the
    criterion for fixed weights ``nu``.

    Classes before the pivot put all their mass on the majority value, the
    pivot is filled partially and later classes get none.
    """
    nu = np.asarray(nu, dtype=float)
    cum = np.cumsum(nu)
    hit = np.nonzero(cum >= mu_star - TIE_TOL)[0]
    r_nu = int(hit[0]) + 1 if hit.size else nu.size
    p = np.zeros(nu.size)
    p[: r_nu - 1] = 1.0
    before = cum[r_nu - 2] if r_nu > 1 else 0.0
    p[r_nu - 1] = min(1.0, max(0.0, (mu_star - before) / nu[r_nu - 1]))
    return r_nu, p


def binary_value_given_nu(nu, mu_star: float) -> float:
    """Minimum of the criterion over components for fixed weights ``nu``."""
    nu = np.asarray(nu, dtype=float)
    r_nu, p = pivot_fill(nu, mu_star)
    return shannon_entropy(nu) + float(nu[r_nu - 1]) * _binary_entropy(float(p[r_nu - 1]))


def binary_closed_form(mu0: float, mu1: float) -> BinarySolution:
    """Optimal decompositions of ``mu0 delta_0 + mu1 delta_1``."""
    mu0, mu1 = float(mu0), float(mu1)
    if not (0.0 <= mu0 <= 1.0 and 0.0 <= mu1 <= 1.0) or abs(mu0 + mu1 - 1.0) > TIE_TOL:
        raise ValueError(f"({mu0}, {mu1}) is not a distribution on {{0, 1}}")
    target = BernoulliParams(mu0, mu1)
    merged = ((1.0,), (target,))
    if mu0 in (0.0, 1.0):
        return BinarySolution(0.0, (merged,), 1)
    decomps = (
        merged,
        ((mu0, mu1), (BernoulliParams(1.0, 0.0), BernoulliParams(0.0, 1.0))),
        ((mu1, mu0), (BernoulliParams(0.0, 1.0), BernoulliParams(1.0, 0.0))),
    )
    return BinarySolution(_binary_entropy(mu1), decomps, 1)


# -- Gaussian two-component threshold ---------------------------------------


@dataclass(frozen=True)
class GaussianThresholdReport:
    """Both sides of the split condition and the two population criteria.

    The split beats the merge exactly when ``lhs > rhs``, which is the same
    as ``merged_H > split_H``.
    """

    lhs: float
    rhs: float
    split_is_strictly_better: bool
    sigma_star2: float
    merged_H: float
    split_H: float

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs


def gaussian_split_test(nu1, mu1, sigma1, nu2, mu2, sigma2) -> GaussianThresholdReport:
    """Compare ``nu1 N(mu1, sigma1^2) + nu2 N(mu2, sigma2^2)`` split vs merged.

    ``sigma1`` and ``sigma2`` are standard deviations.
    """
    nu1, mu1, sigma1, nu2, mu2, sigma2 = map(float, (nu1, mu1, sigma1, nu2, mu2, sigma2))
    if nu1 <= 0 or nu2 <= 0 or abs(nu1 + nu2 - 1.0) > TIE_TOL:
        raise ValueError("weights must be positive and sum to 1")
    if sigma1 <= 0 or sigma2 <= 0:
        raise ValueError("standard deviations must be positive")
    d = mu1 - mu2
    s2 = nu1 * sigma1 * sigma1 + nu2 * sigma2 * sigma2 + nu1 * nu2 * d * d
    lhs = 0.5 * math.log(s2)
    rhs = nu1 * math.log(sigma1 / nu1) + nu2 * math.log(sigma2 / nu2)
    merged = 0.5 * (math.log(s2) + LOG_2PI + 1.0)
    split = (
        shannon_entropy(np.array([nu1, nu2]))
        + nu1 * 0.5 * (2.0 * math.log(sigma1) + LOG_2PI + 1.0)
        + nu2 * 0.5 * (2.0 * math.log(sigma2) + LOG_2PI + 1.0)
    )
    return GaussianThresholdReport(lhs, rhs, lhs > rhs, s2, merged, split)


__all__ = [
    "BRUTE_FORCE_GUARD",
    "GuardExceededError",
    "BruteForceResult",
    "brute_force_min",
    "BinarySolution",
    "pivot_fill",
    "binary_value_given_nu",
    "binary_closed_form",
    "GaussianThresholdReport",
    "gaussian_split_test",
]
