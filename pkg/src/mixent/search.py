"""Multi-restart, order-growing search for the minimum mixing entropy.

For r = r_start, r_start + 1, ... the search runs ``n_init`` EM sequences
from random soft assignments, hardens every iterate by MAP and keeps the
best hard assignment seen. It stops once ``stop_r`` consecutive orders bring
no improvement. The number of occupied classes of the winner is ``r_n``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .cem import FitResult, _state_from
from .data_model import HardAssignment, SoftAssignment, WeightedSample
from .entropy import criterion_of_assignment
from .families import Family, GaussianFamily, GaussianParams, WeightedSubsample, get_family
from .synth import flat_dirichlet_rows, make_rng, uniforms

IMPROVE_TOL = 1e-12
LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class SearchConfig:
    n_init: int = 20
    stop_em: int = 5
    stop_r: int = 2
    r_start: int = 1
    r_max_guard: int = 32
    seed: int = 0
    max_inner_iter: int = 10_000
    allow_degenerate: bool = False
    inner_reference: str = "global"
    init: str = "mixed"
    polish: bool = False
    relocate_max_m: int = 64
    pair_moves_max_m: int = 12

    def __post_init__(self):
        for name in ("n_init", "stop_em", "stop_r", "r_start", "r_max_guard", "max_inner_iter"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.r_max_guard < self.r_start:
            raise ValueError("r_max_guard must be >= r_start")
        if self.init not in ("dirichlet", "voronoi", "kmeanspp", "mixed"):
            raise ValueError(f"unknown init method {self.init!r}")
        if self.inner_reference not in ("global", "restart"):
            raise ValueError(f"unknown inner_reference {self.inner_reference!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RestartRecord:
    r: int
    restart: int
    iterations: int
    improvements: int
    best_H: float
    best_r_n: int


def random_initial_assignment(
    r: int, w: WeightedSample, rng: np.random.Generator, method: str = "dirichlet"
) -> SoftAssignment:
    """Random starting point in the set of soft assignments.

    ``"dirichlet"`` draws every row independently from the flat Dirichlet.
    ``"voronoi"`` picks ``r`` distinct observed values uniformly as centres and
    assigns each value to its nearest centre; ``"kmeanspp"`` picks the centres
    by D^2 seeding instead. ``"mixed"`` is resolved per restart by the search.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if method == "dirichlet" or r == 1:
        return SoftAssignment(flat_dirichlet_rows(rng, w.m, r))
    k = min(r, w.m)
    if method == "voronoi":
        keys = uniforms(rng, w.m)
        centres = w.values[np.sort(np.argsort(keys, kind="stable")[:k])]
    elif method == "kmeanspp":
        centres = _kmeanspp_centres(w, k, rng)
    else:
        raise ValueError(f"unknown init method {method!r}")
    labels = np.argmin(np.abs(w.values[:, None] - centres[None, :]), axis=1)
    phi = np.zeros((w.m, r))
    phi[np.arange(w.m), labels] = 1.0
    return SoftAssignment(phi)


def _kmeanspp_centres(w: WeightedSample, k: int, rng: np.random.Generator) -> np.ndarray:
    weights = w.counts.astype(float)
    cum = np.cumsum(weights)
    first = int(np.searchsorted(cum, uniforms(rng, 1)[0] * cum[-1], side="right"))
    centres = [w.values[min(first, w.m - 1)]]
    d2 = (w.values - centres[0]) ** 2
    for _ in range(1, k):
        p = weights * d2
        cum = np.cumsum(p)
        if cum[-1] <= 0:
            break
        j = int(np.searchsorted(cum, uniforms(rng, 1)[0] * cum[-1], side="right"))
        centres.append(w.values[min(j, w.m - 1)])
        d2 = np.minimum(d2, (w.values - centres[-1]) ** 2)
    return np.sort(np.unique(centres))


class _Engine:
    """Array-level E/M/C steps; vectorized across classes for the Gaussian family."""

    def __init__(self, w: WeightedSample, fam: Family):
        self.w = w
        self.fam = fam
        self.gauss = isinstance(fam, GaussianFamily)
        self.counts = w.counts.astype(float)

    def m_step_soft(self, phi: np.ndarray):
        """(nu, params) minimizing the criterion at the decomposition induced by ``phi``.

        A class whose fit is degenerate is made extinct, so that a component
        collapsed onto one value cannot trap the iteration.
        """
        w = self.w
        joint = self.counts[:, None] * phi  # (m, r)
        mass = joint.sum(axis=0)
        nu = mass / mass.sum()
        if self.gauss:
            floor = self.fam.sigma2_floor
            with np.errstate(invalid="ignore", divide="ignore"):
                mu = (w.values @ joint) / mass
                var = ((w.values[:, None] - mu[None, :]) ** 2 * joint).sum(axis=0) / mass
            params = [
                GaussianParams(float(mu[x]), float(max(var[x], floor)), bool(var[x] < floor))
                if nu[x] > 0
                else self.fam.placeholder()
                for x in range(nu.size)
            ]
        else:
            params = [
                self.fam.fit(WeightedSubsample(w.values, joint[:, x]))[0] if nu[x] > 0 else self.fam.placeholder()
                for x in range(nu.size)
            ]
        dead = np.array([nu[x] > 0 and self.fam.is_degenerate(params[x]) for x in range(nu.size)])
        if dead.any() and not dead[nu > 0].all():
            nu = np.where(dead, 0.0, nu)
            nu = nu / nu.sum()
            params = [self.fam.placeholder() if dead[x] else params[x] for x in range(nu.size)]
        return nu, params

    def log_joint(self, nu, params) -> np.ndarray:
        w = self.w
        r = nu.size
        if self.gauss:
            mu = np.array([p.mu for p in params])
            s2 = np.array([p.sigma2 for p in params])
            with np.errstate(divide="ignore"):
                lognu = np.log(nu)
            out = lognu[None, :] - 0.5 * (LOG_2PI + np.log(s2))[None, :] - (w.values[:, None] - mu[None, :]) ** 2 / (
                2.0 * s2[None, :]
            )
            out[:, nu <= 0] = -np.inf
            return out
        out = np.full((w.m, r), -np.inf)
        for x in range(r):
            if nu[x] > 0:
                out[:, x] = math.log(nu[x]) + self.fam.log_density(params[x], w.values)
        return out

    def hard_value(self, labels: np.ndarray, r: int) -> tuple[float, bool]:
        """Criterion of a MAP labeling and whether some class hit the floor/cap."""
        w = self.w
        if self.gauss:
            nx = np.bincount(labels, weights=self.counts, minlength=r)
            occ = nx > 0
            sx = np.bincount(labels, weights=self.counts * w.values, minlength=r)
            mean = np.zeros(r)
            mean[occ] = sx[occ] / nx[occ]
            qx = np.bincount(labels, weights=self.counts * (w.values - mean[labels]) ** 2, minlength=r)
            nu = nx[occ] / w.n
            var = qx[occ] / nx[occ]
            s2 = np.maximum(var, self.fam.sigma2_floor)
            ce = 0.5 * (LOG_2PI + np.log(s2) + var / s2)
            value = float(-(nu * np.log(nu)).sum() + (nu * ce).sum())
            return value, bool(np.any(var < self.fam.sigma2_floor))
        crit = criterion_of_assignment(HardAssignment(labels, r), w, self.fam)
        return crit.value, crit.degenerate


class _Tracker:
    """Best hard assignment seen so far, plus the best value per occupied-class count."""

    def __init__(self, allow_degenerate: bool):
        self.allow_degenerate = allow_degenerate
        self.best_H = math.inf
        self.labels: np.ndarray | None = None
        self.r = 1
        self.by_occupancy: dict[int, float] = {}
        # best degenerate snapshot, used only if nothing else was ever seen
        self.fallback: tuple[float, np.ndarray | None, int] = (math.inf, None, 1)

    def offer(self, labels: np.ndarray, r: int, val: float, degenerate: bool) -> tuple[float, bool]:
        """Score a snapshot; returns its value and whether it improved the best."""
        if degenerate and not self.allow_degenerate:
            if val < self.fallback[0]:
                self.fallback = (val, labels, r)
            return math.inf, False
        occ = int(np.count_nonzero(np.bincount(labels, minlength=r)))
        if val < self.by_occupancy.get(occ, math.inf):
            self.by_occupancy[occ] = val
        if val < self.best_H - IMPROVE_TOL:
            self.best_H, self.labels, self.r = val, labels, r
            return val, True
        return val, False

    @property
    def best_r_n(self) -> int:
        if self.labels is None:
            return 0
        return int(np.count_nonzero(np.bincount(self.labels, minlength=self.r)))

    def result(self) -> tuple[np.ndarray, int]:
        if self.labels is None:
            return self.fallback[1], self.fallback[2]
        return self.labels, self.r


def _polish(eng: _Engine, trk: _Tracker, labels: np.ndarray, r: int, max_iter: int) -> tuple[int, int]:
    """Hard C/M iterations from ``labels`` until an assignment repeats.

    Returns the number of iterations and of improvements of the best.
    """
    seen = {labels.tobytes()}
    gained = 0
    for it in range(1, max_iter + 1):
        onehot = np.zeros((eng.w.m, r))
        onehot[np.arange(eng.w.m), labels] = 1.0
        nu, params = eng.m_step_soft(onehot)
        logp = eng.log_joint(nu, params)
        if not np.all(np.isfinite(logp.max(axis=1))):
            return it, gained
        labels = np.argmax(logp, axis=1)
        key = labels.tobytes()
        if key in seen:
            return it, gained
        seen.add(key)
        gained += trk.offer(labels, r, *eng.hard_value(labels, r))[1]
    return max_iter, gained


def _relocate(eng: _Engine, trk: _Tracker, labels: np.ndarray, r: int, pairs: bool = False) -> int:
    """Move single distinct values between classes (empty ones included) while
    that strictly lowers the criterion. Returns the number of accepted moves."""
    labels = labels.copy()
    if labels.max() >= r:
        return 0
    current = eng.hard_value(labels, r)[0]
    moves = 0
    improved = True
    while improved:
        improved = False
        for j in range(eng.w.m):
            home = labels[j]
            for x in range(r):
                if x == home:
                    continue
                labels[j] = x
                val, degenerate = eng.hard_value(labels, r)
                if (not degenerate or trk.allow_degenerate) and val < current - IMPROVE_TOL:
                    current = val
                    trk.offer(labels.copy(), r, val, degenerate)
                    moves += 1
                    improved = True
                    break
                labels[j] = home
            if improved:
                break
        if improved or not pairs:
            continue
        # pairs of values moved together
        for j in range(eng.w.m):
            for k in range(j + 1, eng.w.m):
                hj, hk = labels[j], labels[k]
                for x in range(r):
                    for y in range(r):
                        if x == hj and y == hk:
                            continue
                        labels[j], labels[k] = x, y
                        val, degenerate = eng.hard_value(labels, r)
                        if (not degenerate or trk.allow_degenerate) and val < current - IMPROVE_TOL:
                            current = val
                            trk.offer(labels.copy(), r, val, degenerate)
                            moves += 1
                            improved = True
                            break
                        labels[j], labels[k] = hj, hk
                    if improved:
                        break
                if improved:
                    break
            if improved:
                break
    return moves


def search(w: WeightedSample, family: str | Family, cfg: SearchConfig | None = None) -> FitResult:
    """Estimate the minimum mixing entropy and the relative entropic order of ``w``."""
    cfg = cfg or SearchConfig()
    fam = get_family(family).bind(w)
    eng = _Engine(w, fam)

    trk = _Tracker(cfg.allow_degenerate)
    log: list[RestartRecord] = []

    r = cfg.r_start
    ind_r = 0
    guard_hit = False
    while ind_r < cfg.stop_r:
        if r > cfg.r_max_guard:
            guard_hit = True
            break
        ind_r += 1
        for restart in range(cfg.n_init):
            rng = make_rng(cfg.seed, r, restart)
            method = cfg.init
            if method == "mixed":
                method = "kmeanspp" if restart % 2 == 0 else "dirichlet"
            phi = random_initial_assignment(r, w, rng, method).phi
            i = 0
            ind_em = 0
            improvements = 0
            local_best = math.inf
            while ind_em < cfg.stop_em and i < cfg.max_inner_iter:
                ind_em += 1
                i += 1
                nu, params = eng.m_step_soft(phi)
                phi, _ = kernels.log_normalize_rows(eng.log_joint(nu, params))
                labels = np.argmax(phi, axis=1)
                val, improved = trk.offer(labels, r, *eng.hard_value(labels, r))
                if improved:
                    improvements += 1
                    ind_em = 0
                    ind_r = 0
                if cfg.inner_reference == "restart" and val < local_best - IMPROVE_TOL:
                    ind_em = 0
                local_best = min(local_best, val)
            if cfg.polish and r > 1:
                labels = np.argmax(phi, axis=1)
                n_hard, gained = _polish(eng, trk, labels, r, cfg.max_inner_iter)
                i += n_hard
                if gained:
                    improvements += gained
                    ind_r = 0
            log.append(RestartRecord(r, restart, i, improvements, trk.best_H, trk.best_r_n))
            if r == 1:
                # every restart is identical at a single class
                break
        if r > 1 and w.m <= cfg.relocate_max_m and trk.labels is not None:
            if _relocate(eng, trk, trk.labels, r, pairs=w.m <= cfg.pair_moves_max_m):
                ind_r = 0
        r += 1

    best_labels, best_r = trk.result()
    h = HardAssignment(best_labels, best_r)
    crit = criterion_of_assignment(h, w, fam)
    state = _state_from(crit, fam)
    r_n = int(np.count_nonzero(np.bincount(h.labels, minlength=best_r)))
    tie_orders = sorted(k for k, v in trk.by_occupancy.items() if k != r_n and v <= crit.value + IMPROVE_TOL)
    return SearchResult(
        best_H=crit.value,
        best_assignment=h,
        model=state,
        r_searched=r - 1 if not guard_hit else cfg.r_max_guard,
        r_n=r_n,
        restarts_log=tuple(log),
        guard_hit=guard_hit,
        criterion=crit,
        tie_orders=tuple(tie_orders),
    )


@dataclass(frozen=True, eq=False)
class SearchResult(FitResult):
    """:class:`FitResult` plus orders whose best seen criterion ties the optimum."""

    tie_orders: tuple = field(default=())

    @property
    def tie(self) -> bool:
        return bool(self.tie_orders)


def compact(h: HardAssignment) -> HardAssignment:
    """Drop empty classes, keeping the order of the occupied ones."""
    occ = np.unique(h.labels)
    remap = np.full(h.r, -1)
    remap[occ] = np.arange(occ.size)
    return HardAssignment(remap[h.labels], int(occ.size))


__all__ = [
    "SearchConfig",
    "SearchResult",
    "RestartRecord",
    "random_initial_assignment",
    "search",
    "compact",
]
