"""Seeded generators for synthetic Gaussian and Bernoulli mixtures.

Randomness comes only from uniform doubles drawn from a PCG64 bit generator,
whose output stream is fixed across platforms and numpy versions; normal
deviates are produced here with Marsaglia's polar method rather than with
numpy's distribution samplers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data_model import ProbVector
from .families import BernoulliParams, GaussianParams

TWO_SQRT3 = 2.0 * math.sqrt(3.0)


def make_rng(*key: int) -> np.random.Generator:
    """PCG64 stream keyed by an integer tuple (e.g. ``(seed, r, restart)``)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(k) & (2**64 - 1) for k in key])))


def uniforms(rng: np.random.Generator, size: int) -> np.ndarray:
    """Doubles in [0, 1) built from 53 raw bits each."""
    raw = rng.bit_generator.random_raw(size)
    return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def standard_normals(rng: np.random.Generator, size: int) -> np.ndarray:
    """Marsaglia polar method, vectorized with rejection."""
    out = np.empty(size)
    filled = 0
    while filled < size:
        need = size - filled
        batch = max(16, int(need * 0.66) + 8)
        u = 2.0 * uniforms(rng, 2 * batch).reshape(batch, 2) - 1.0
        s = (u * u).sum(axis=1)
        ok = (s > 0) & (s < 1)
        u, s = u[ok], s[ok]
        f = np.sqrt(-2.0 * np.log(s) / s)
        z = (u * f[:, None]).ravel()
        take = min(need, z.size)
        out[filled : filled + take] = z[:take]
        filled += take
    return out


def flat_dirichlet_rows(rng: np.random.Generator, m: int, r: int) -> np.ndarray:
    """``m`` independent draws from the flat Dirichlet on ``r`` classes."""
    if r == 1:
        return np.ones((m, 1))
    e = -np.log1p(-uniforms(rng, m * r)).reshape(m, r)
    return e / e.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class MixtureSpec:
    weights: ProbVector
    components: tuple

    def __post_init__(self):
        if len(self.components) != self.weights.r:
            raise ValueError("weights and components must have the same length")
        kinds = {type(c) for c in self.components}
        if len(kinds) != 1 or not kinds <= {GaussianParams, BernoulliParams}:
            raise ValueError("components must all be GaussianParams or all BernoulliParams")

    @property
    def kind(self) -> str:
        return "gaussian" if isinstance(self.components[0], GaussianParams) else "bernoulli"

    def to_config(self) -> dict:
        cfg = {"kind": self.kind, "weights": ",".join(repr(float(x)) for x in self.weights.weights)}
        if self.kind == "gaussian":
            cfg["means"] = ",".join(repr(c.mu) for c in self.components)
            cfg["variances"] = ",".join(repr(c.sigma2) for c in self.components)
        else:
            cfg["p_one"] = ",".join(repr(c.mu1) for c in self.components)
        return cfg

    @classmethod
    def from_config(cls, cfg: dict) -> "MixtureSpec":
        weights = ProbVector([float(x) for x in str(cfg["weights"]).split(",")])
        if cfg.get("kind", "gaussian") == "gaussian":
            means = [float(x) for x in str(cfg["means"]).split(",")]
            var = [float(x) for x in str(cfg.get("variances", ",".join(["1"] * len(means)))).split(",")]
            comps = tuple(GaussianParams(m, v) for m, v in zip(means, var))
        else:
            comps = tuple(BernoulliParams(1.0 - float(q), float(q)) for q in str(cfg["p_one"]).split(","))
        return cls(weights, comps)


def gaussian_mixture(weights, means, variances=None) -> MixtureSpec:
    variances = [1.0] * len(means) if variances is None else variances
    return MixtureSpec(ProbVector(weights), tuple(GaussianParams(float(m), float(v)) for m, v in zip(means, variances)))


def spec_r2(mu_star: float) -> MixtureSpec:
    """Equal-weight mixture of N(0, 1) and N(mu_star, 1)."""
    if not mu_star > 0:
        raise ValueError("mu_star must be positive")
    return gaussian_mixture([0.5, 0.5], [0.0, mu_star])


def spec_r7(mu_star: float) -> MixtureSpec:
    """Uniform mixture of seven unit-variance normals at 0, mu_star, ..., 6 mu_star."""
    if not mu_star > 0:
        raise ValueError("mu_star must be positive")
    return gaussian_mixture([1.0 / 7.0] * 7, [x * mu_star for x in range(7)])


def bernoulli_spec(p_one: float) -> MixtureSpec:
    return MixtureSpec(ProbVector([1.0]), (BernoulliParams(1.0 - p_one, p_one),))


def sample(spec: MixtureSpec, n: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` observations; returns ``(values, true_labels)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = make_rng(seed)
    cum = np.cumsum(spec.weights.weights)
    cum[-1] = 1.0
    labels = np.searchsorted(cum, uniforms(rng, n), side="right")
    labels = np.minimum(labels, len(spec.components) - 1)
    if spec.kind == "gaussian":
        mu = np.array([c.mu for c in spec.components])
        sd = np.sqrt([c.sigma2 for c in spec.components])
        values = mu[labels] + sd[labels] * standard_normals(rng, n)
    else:
        p1 = np.array([c.mu1 for c in spec.components])
        values = (uniforms(rng, n) < p1[labels]).astype(float)
    return values, labels
