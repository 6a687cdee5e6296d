"""Parametric density families and their weighted maximum-likelihood fits.

A family knows how to evaluate ``log g_theta(z)`` and how to solve
``min_theta -sum_z G(z) log g_theta(z)`` for a weighted discrete ``G``.
Families are selected by string id: ``"gaussian"``, ``"biexp"``,
``"bernoulli"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from . import kernels
from .data_model import WeightedSample

LOG_2PI = math.log(2.0 * math.pi)


class EmptyClassError(ValueError):
    """A fit was requested on a class with no mass."""


@dataclass(frozen=True)
class GaussianParams:
    mu: float
    sigma2: float
    floored: bool = False


@dataclass(frozen=True)
class BiExpParams:
    p: float
    a_left: float
    a_right: float
    lambda_left: float
    lambda_right: float


@dataclass(frozen=True)
class BernoulliParams:
    mu0: float
    mu1: float


FamilyParams = Union[GaussianParams, BiExpParams, BernoulliParams]


@dataclass(frozen=True, eq=False)
class WeightedSubsample:
    """Per-class weighted support: values with non-negative (unnormalized) weights."""

    values: np.ndarray
    weights: np.ndarray

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))

    @classmethod
    def from_class(cls, w: WeightedSample, phi_col: np.ndarray) -> "WeightedSubsample":
        return cls(w.values, w.counts * np.asarray(phi_col, dtype=float))


@dataclass(frozen=True)
class Family:
    name: str = field(init=False, default="")

    def bind(self, w: WeightedSample) -> "Family":
        """Return a copy with sample-dependent settings resolved."""
        return self

    def log_density(self, params, z):
        raise NotImplementedError

    def fit(self, sub: WeightedSubsample):
        raise NotImplementedError

    def placeholder(self) -> FamilyParams:
        """Parameters stored for an extinct class."""
        raise NotImplementedError

    def is_degenerate(self, params) -> bool:
        """True when the fit sits on the floor/cap guarding against collapse."""
        return False

    def describe(self, params) -> dict:
        return {k: float(v) if not isinstance(v, bool) else v for k, v in params.__dict__.items()}


@dataclass(frozen=True)
class GaussianFamily(Family):
    """Normal densities with a variance floor.

    The floor is ``sigma2_floor_scale * range**2 + 1e-300`` where ``range``
    is that of the sample passed to :meth:`bind`.
    """

    name: str = field(init=False, default="gaussian")
    sigma2_floor_scale: float = 1e-12
    sigma2_floor: float | None = None

    def bind(self, w: WeightedSample) -> "GaussianFamily":
        return replace(self, sigma2_floor=self.sigma2_floor_scale * w.value_range**2 + 1e-300)

    def _floor(self, values) -> float:
        if self.sigma2_floor is not None:
            return self.sigma2_floor
        v = np.asarray(values, dtype=float)
        return self.sigma2_floor_scale * float(v.max() - v.min()) ** 2 + 1e-300

    def log_density(self, params: GaussianParams, z):
        z = np.asarray(z, dtype=float)
        return -0.5 * (LOG_2PI + math.log(params.sigma2)) - (z - params.mu) ** 2 / (2.0 * params.sigma2)

    def fit(self, sub: WeightedSubsample):
        mass = sub.mass
        if not mass > 0:
            raise EmptyClassError("empty class")
        v = np.asarray(sub.values, dtype=float)
        q = np.asarray(sub.weights, dtype=float) / mass
        mu = float(q @ v)
        var = float(q @ (v - mu) ** 2)
        floor = self._floor(v)
        floored = var < floor
        s2 = floor if floored else var
        value = 0.5 * (LOG_2PI + math.log(s2) + var / s2)
        return GaussianParams(mu, s2, floored), value

    def placeholder(self) -> GaussianParams:
        return GaussianParams(0.0, 1.0)

    def is_degenerate(self, params: GaussianParams) -> bool:
        return params.floored


@dataclass(frozen=True)
class BiExpFamily(Family):
    """Two-sided exponential with a zero-density gap between its anchors.

    ``g(z) = p l_R exp(-l_R (z - A_R)) 1{z >= A_R}
           + (1 - p) l_L exp(-l_L (A_L - z)) 1{z <= A_L}``
    with ``p`` in ``[alpha, 1 - alpha]`` and rates capped at ``lambda_cap``.

    With ``exclude_flat`` (default) the fit skips splits that leave a side
    holding a single distinct value, unless no other split exists. That keeps
    small classes off the rate cap, but the admissible splits then depend on
    the class, so the M-step is no longer a minimizer over one fixed
    parameter set. ``exclude_flat=False`` gives the exact fit.
    """

    name: str = field(init=False, default="biexp")
    alpha: float = 0.005
    lambda_cap: float = 1e8
    exclude_flat: bool = True

    def log_density(self, params: BiExpParams, z):
        z = np.asarray(z, dtype=float)
        right = np.where(
            z >= params.a_right,
            params.p * params.lambda_right * np.exp(-params.lambda_right * np.maximum(z - params.a_right, 0.0)),
            0.0,
        )
        left = np.where(
            z <= params.a_left,
            (1.0 - params.p) * params.lambda_left * np.exp(-params.lambda_left * np.maximum(params.a_left - z, 0.0)),
            0.0,
        )
        dens = right + left
        with np.errstate(divide="ignore"):
            out = np.log(dens)
        # exact branch logs where only one side contributes, to avoid underflow
        only_r = (z >= params.a_right) & (z > params.a_left)
        only_l = (z <= params.a_left) & (z < params.a_right)
        out = np.where(
            only_r,
            math.log(params.p) + math.log(params.lambda_right) - params.lambda_right * (z - params.a_right),
            out,
        )
        out = np.where(
            only_l,
            math.log1p(-params.p) + math.log(params.lambda_left) - params.lambda_left * (params.a_left - z),
            out,
        )
        return out

    def fit(self, sub: WeightedSubsample):
        mass = sub.mass
        if not mass > 0:
            raise EmptyClassError("empty class")
        w = np.asarray(sub.weights, dtype=float)
        keep = w > 0
        v = np.asarray(sub.values, dtype=float)[keep]
        w = w[keep]
        order = np.argsort(v, kind="stable")
        if np.any(np.diff(v[order]) <= 0):
            v, inv = np.unique(v, return_inverse=True)
            w = np.bincount(inv, weights=w)
        else:
            v, w = v[order], w[order]
        _, value, p, a_l, a_r, lam_l, lam_r = kernels.biexp_scan(v, w, self.alpha, self.lambda_cap, self.exclude_flat)
        return BiExpParams(p, a_l, a_r, lam_l, lam_r), value

    def placeholder(self) -> BiExpParams:
        return BiExpParams(0.5, 0.0, 0.0, 1.0, 1.0)

    def is_degenerate(self, params: BiExpParams) -> bool:
        return params.lambda_left >= self.lambda_cap or params.lambda_right >= self.lambda_cap


@dataclass(frozen=True)
class BernoulliFamily(Family):
    """Distributions on {0, 1}: ``g = mu0 delta_0 + mu1 delta_1``."""

    name: str = field(init=False, default="bernoulli")

    def log_density(self, params: BernoulliParams, z):
        z = np.asarray(z, dtype=float)
        with np.errstate(divide="ignore"):
            l0 = math.log(params.mu0) if params.mu0 > 0 else -math.inf
            l1 = math.log(params.mu1) if params.mu1 > 0 else -math.inf
        return np.where(z == 0.0, l0, np.where(z == 1.0, l1, -np.inf))

    def fit(self, sub: WeightedSubsample):
        mass = sub.mass
        if not mass > 0:
            raise EmptyClassError("empty class")
        v = np.asarray(sub.values, dtype=float)
        w = np.asarray(sub.weights, dtype=float)
        if np.any((v != 0.0) & (v != 1.0) & (w > 0)):
            raise ValueError("bernoulli family needs 0/1 observations")
        mu1 = float(w[v == 1.0].sum() / mass)
        mu0 = 1.0 - mu1
        value = 0.0
        for q in (mu0, mu1):
            if q > 0:
                value -= q * math.log(q)
        return BernoulliParams(mu0, mu1), value

    def placeholder(self) -> BernoulliParams:
        return BernoulliParams(0.5, 0.5)


FAMILIES = {
    "gaussian": GaussianFamily,
    "biexp": BiExpFamily,
    "bernoulli": BernoulliFamily,
}


def get_family(family: str | Family, **hyper) -> Family:
    """Resolve a family id (or pass through an instance)."""
    if isinstance(family, Family):
        return replace(family, **hyper) if hyper else family
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; expected one of {sorted(FAMILIES)}") from None
    return cls(**hyper)


def log_density(family: str | Family, params: FamilyParams, z):
    return get_family(family).log_density(params, z)


def fit_weighted(family: str | Family, sub: WeightedSubsample):
    """Weighted MLE: ``argmin_theta -sum (w/mass) log g_theta`` and the attained value."""
    return get_family(family).fit(sub)
