"""E-, C- and M-steps and the classification EM loop."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .data_model import HardAssignment, ProbVector, SoftAssignment, WeightedSample, soft_from_hard
from .entropy import CriterionValue, criterion_of_assignment, criterion_of_soft, soft_objective
from .families import Family, get_family

IMPROVE_TOL = 1e-12


class UnexplainablePointError(ValueError):
    """Every class gives zero density (or zero weight) at some observed value."""


@dataclass(frozen=True, eq=False)
class ModelState:
    nu: ProbVector
    params: tuple

    def __post_init__(self):
        if len(self.params) != self.nu.r:
            raise ValueError("nu and params disagree on the number of classes")

    @property
    def r(self) -> int:
        return self.nu.r

    def same_as(self, other: "ModelState") -> bool:
        return np.array_equal(self.nu.weights, other.nu.weights) and self.params == other.params


@dataclass
class IterationTrace:
    """Per-iteration records of one CEM run.

    ``hard_H[i]`` is the criterion of the MAP assignment built at iteration i;
    ``soft_H[i]`` the criterion of the posterior it was hardened from;
    ``em_map_H[i]`` the criterion of the MAP assignment obtained after an EM
    update from that posterior (bounded above by ``soft_H[i]``);
    ``fixed_param_H[i]`` the criterion of the new MAP assignment evaluated at
    the previous parameters (bounded above by ``hard_H[i-1]``).
    """

    hard_H: list[float] = field(default_factory=list)
    soft_H: list[float] = field(default_factory=list)
    em_map_H: list[float] = field(default_factory=list)
    fixed_param_H: list[float] = field(default_factory=list)
    occupancy: list[list[int]] = field(default_factory=list)
    stop_reason: str = ""

    def __len__(self) -> int:
        return len(self.hard_H)

    def is_monotone(self, tol: float = 1e-9) -> bool:
        h = np.asarray(self.hard_H)
        return bool(np.all(np.diff(h) <= tol))


@dataclass(frozen=True, eq=False)
class FitResult:
    """Outcome of a CEM run or an order search.

    ``r_n`` counts the occupied classes of ``best_assignment``; it estimates
    the empirical relative entropic order.
    """

    best_H: float
    best_assignment: HardAssignment
    model: ModelState
    r_searched: int
    r_n: int
    restarts_log: tuple = ()
    guard_hit: bool = False
    criterion: CriterionValue | None = None

    @property
    def nu(self) -> np.ndarray:
        return self.model.nu.weights


def _log_joint(state: ModelState, w: WeightedSample, fam: Family) -> np.ndarray:
    logp = np.full((w.m, state.r), -np.inf)
    for x in range(state.r):
        if state.nu.weights[x] > 0:
            logp[:, x] = math.log(state.nu.weights[x]) + fam.log_density(state.params[x], w.values)
    return logp


def posterior(state: ModelState, w: WeightedSample, family: str | Family) -> tuple[np.ndarray, np.ndarray]:
    """Posterior matrix and per-value log normalizer (raw arrays)."""
    fam = get_family(family).bind(w)
    phi, lse = kernels.log_normalize_rows(_log_joint(state, w, fam))
    bad = ~np.isfinite(lse)
    if np.any(bad):
        z = w.values[np.argmax(bad)]
        raise UnexplainablePointError(f"unexplainable point z={z!r}: zero density under every class")
    return phi, lse


def e_step(state: ModelState, w: WeightedSample, family: str | Family) -> SoftAssignment:
    phi, _ = posterior(state, w, family)
    # renormalize so rows sum to 1 after the division's last rounding
    phi = np.clip(phi, 0.0, 1.0)
    return SoftAssignment(phi / phi.sum(axis=1, keepdims=True))


def c_step(s: SoftAssignment | np.ndarray) -> HardAssignment:
    """MAP hardening; ties go to the smallest class index."""
    phi = s.phi if isinstance(s, SoftAssignment) else np.asarray(s)
    return HardAssignment(np.argmax(phi, axis=1), phi.shape[1])


def _state_from(crit: CriterionValue, fam: Family) -> ModelState:
    params = tuple(p if p is not None else fam.placeholder() for p in crit.params)
    return ModelState(ProbVector(crit.nu), params)


def m_step(
    assignment: HardAssignment | SoftAssignment, w: WeightedSample, family: str | Family
) -> tuple[ModelState, CriterionValue]:
    """Refit class weights and per-class parameters; empty classes go extinct."""
    fam = get_family(family).bind(w)
    if isinstance(assignment, HardAssignment):
        crit = criterion_of_assignment(assignment, w, fam)
    else:
        crit = criterion_of_soft(assignment, w, fam)
    return _state_from(crit, fam), crit


def _record(trace: IterationTrace, hard, soft, em_map, fixed, h: HardAssignment, w: WeightedSample, r: int):
    trace.hard_H.append(hard)
    trace.soft_H.append(soft)
    trace.em_map_H.append(em_map)
    trace.fixed_param_H.append(fixed)
    trace.occupancy.append(np.bincount(h.labels, weights=w.counts, minlength=r).astype(int).tolist())


def run_cem(
    init: ModelState | SoftAssignment | HardAssignment,
    w: WeightedSample,
    family: str | Family,
    stop_em: int = 5,
    max_iter: int = 1000,
) -> tuple[FitResult, IterationTrace]:
    """Alternate E, C and M steps from ``init``.

    Stops when the MAP assignment repeats, when the refitted state equals the
    previous one, or after ``stop_em`` consecutive iterations without an
    improvement of the best hard criterion.
    """
    if stop_em < 1:
        raise ValueError("stop_em must be >= 1")
    fam = get_family(family).bind(w)
    trace = IterationTrace()

    prev_h: HardAssignment | None = None
    if isinstance(init, ModelState):
        state = init
    else:
        if isinstance(init, HardAssignment):
            prev_h = init
        state, _ = m_step(init, w, fam)

    r = state.r
    if r == 1:
        h = HardAssignment(np.zeros(w.m, dtype=np.int64), 1)
        st, crit = m_step(h, w, fam)
        trace.hard_H.append(crit.value)
        trace.soft_H.append(crit.value)
        trace.em_map_H.append(crit.value)
        trace.fixed_param_H.append(crit.value)
        trace.occupancy.append([w.n])
        trace.stop_reason = "single class"
        return FitResult(crit.value, h, st, 1, 1, (1,), criterion=crit), trace

    best_H = math.inf
    best_h = best_state = best_crit = None
    if prev_h is not None:
        best_state, best_crit = m_step(prev_h, w, fam)
        best_H, best_h = best_crit.value, prev_h
        _record(trace, best_H, math.nan, math.nan, math.nan, prev_h, w, r)

    idle = 0
    it = 0
    while it < max_iter:
        it += 1
        try:
            phi, _ = posterior(state, w, fam)
        except UnexplainablePointError:
            if best_h is None:
                raise
            trace.stop_reason = "unexplainable point"
            break
        h = c_step(phi)
        if prev_h is not None and h == prev_h:
            trace.stop_reason = "assignment repeated"
            break

        # criterion of the posterior itself, and of the MAP after an EM update from it
        soft = SoftAssignment(phi / phi.sum(axis=1, keepdims=True))
        em_state, soft_crit = m_step(soft, w, fam)
        try:
            em_phi, _ = posterior(em_state, w, fam)
            em_map = criterion_of_assignment(c_step(em_phi), w, fam).value
        except UnexplainablePointError:
            em_map = math.nan

        fixed = soft_objective(soft_from_hard(h).phi, w, fam, state.nu.weights, state.params)
        new_state, crit = m_step(h, w, fam)
        _record(trace, crit.value, soft_crit.value, em_map, fixed, h, w, r)

        if crit.value < best_H - IMPROVE_TOL:
            best_H, best_h, best_state, best_crit = crit.value, h, new_state, crit
            idle = 0
        else:
            idle += 1
        if new_state.same_as(state):
            trace.stop_reason = "state repeated"
            break
        if idle >= stop_em:
            trace.stop_reason = "no improvement"
            break
        prev_h = h
        state = new_state
    else:
        trace.stop_reason = "max_iter"

    r_n = int(np.count_nonzero(np.bincount(best_h.labels, minlength=r)))
    result = FitResult(best_H, best_h, best_state, r, r_n, (len(trace),), criterion=best_crit)
    return result, trace
