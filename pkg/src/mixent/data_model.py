"""Empirical distributions, probability vectors and class assignments.

Every object here is immutable after construction. Arrays are stored as
read-only numpy views so they can be shared between workers.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

PROB_TOL = 1e-12
ROUNDTRIP_TOL = 1e-10


class SampleError(ValueError):
    """Raised for invalid raw data (empty input, unparsable rows)."""


class EmptySampleError(SampleError):
    """No observations at all."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class WeightedSample:
    """Distinct observed values with their multiplicities.

    ``values`` is strictly increasing; ``counts[i]`` is how many raw
    observations were grouped onto ``values[i]``.
    """

    values: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values)
        counts = np.array(self.counts, dtype=np.int64, copy=True)
        if values.ndim != 1 or counts.shape != values.shape:
            raise SampleError("values and counts must be 1-D of equal length")
        if values.size == 0:
            raise EmptySampleError("empty sample")
        if np.any(counts < 1):
            raise SampleError("every count must be >= 1")
        if values.size > 1 and np.any(np.diff(values) <= 0):
            raise SampleError("values must be strictly increasing")
        counts.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def m(self) -> int:
        """Number of distinct values."""
        return int(self.values.size)

    @property
    def weights(self) -> np.ndarray:
        return self.counts / self.n

    @property
    def value_range(self) -> float:
        return float(self.values[-1] - self.values[0])

    def __len__(self) -> int:
        return self.m

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedSample):
            return NotImplemented
        return np.array_equal(self.values, other.values) and np.array_equal(
            self.counts, other.counts
        )

    def __hash__(self) -> int:
        return hash((self.values.tobytes(), self.counts.tobytes()))

    def index_of(self, raw: Sequence[float], grouping_tolerance: float = 0.0) -> np.ndarray:
        """Map raw observations back to positions in ``values``."""
        keys = _group_keys(np.asarray(raw, dtype=float), grouping_tolerance)
        pos = np.searchsorted(self.values, keys)
        pos = np.clip(pos, 0, self.m - 1)
        if not np.array_equal(self.values[pos], keys):
            raise SampleError("raw values not present in sample")
        return pos


def _group_keys(raw: np.ndarray, tol: float) -> np.ndarray:
    if tol == 0:
        return raw
    return np.round(raw / tol) * tol


def ingest(raw: Iterable[float], grouping_tolerance: float = 0.0) -> WeightedSample:
    """Group raw observations into a :class:`WeightedSample`.

    With ``grouping_tolerance == 0`` values are grouped only when bit-equal;
    otherwise each value is snapped to the nearest multiple of the tolerance
    first.
    """
    if grouping_tolerance < 0:
        raise SampleError("grouping_tolerance must be >= 0")
    arr = np.asarray(list(raw) if not isinstance(raw, np.ndarray) else raw, dtype=float)
    if arr.size == 0:
        raise EmptySampleError("empty sample")
    if not np.all(np.isfinite(arr)):
        raise SampleError("non-finite observation")
    keys = _group_keys(arr.ravel(), grouping_tolerance)
    values, counts = np.unique(keys, return_counts=True)
    return WeightedSample(values, counts)


def read_csv_column(source: str | Path | io.TextIOBase) -> list[float]:
    """Read one numeric value per line; a non-numeric first line is a header.

    Raises :class:`SampleError` naming the offending line otherwise.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_csv_column(fh)
    out: list[float] = []
    for lineno, row in enumerate(csv.reader(source), start=1):
        if not row or not "".join(row).strip():
            continue
        cell = row[0].strip()
        try:
            val = float(cell)
        except ValueError:
            if lineno == 1:
                continue
            raise SampleError(f"line {lineno}: not a number: {cell!r}") from None
        if not math.isfinite(val):
            raise SampleError(f"line {lineno}: non-finite value: {cell!r}")
        out.append(val)
    return out


@dataclass(frozen=True, eq=False)
class ProbVector:
    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("probability vector must be non-empty and 1-D")
        if np.any(w < 0) or abs(w.sum() - 1.0) > PROB_TOL * max(1, w.size):
            raise ValueError(f"not a probability vector: {w}")
        object.__setattr__(self, "weights", w)

    @property
    def r(self) -> int:
        return int(self.weights.size)

    def __len__(self) -> int:
        return self.r

    def __getitem__(self, i):
        return self.weights[i]


@dataclass(frozen=True, eq=False)
class SoftAssignment:
    """Row-stochastic matrix ``phi[value_index, class]``."""

    phi: np.ndarray

    def __post_init__(self):
        phi = _frozen(self.phi)
        if phi.ndim != 2 or phi.shape[1] < 1:
            raise ValueError("phi must be a (m, r) matrix with r >= 1")
        if np.any(phi < 0) or np.any(phi > 1 + PROB_TOL):
            raise ValueError("phi entries must lie in [0, 1]")
        if np.any(np.abs(phi.sum(axis=1) - 1.0) > PROB_TOL * max(1, phi.shape[1])):
            raise ValueError("phi rows must sum to 1")
        object.__setattr__(self, "phi", phi)

    @property
    def r(self) -> int:
        return int(self.phi.shape[1])

    @property
    def m(self) -> int:
        return int(self.phi.shape[0])


@dataclass(frozen=True, eq=False)
class HardAssignment:
    """One class per distinct value. Labels are 0-based internally."""

    labels: np.ndarray
    r: int

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64, copy=True)
        if labels.ndim != 1:
            raise ValueError("labels must be 1-D")
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if labels.size and (labels.min() < 0 or labels.max() >= self.r):
            raise ValueError("label out of range")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_one_based(cls, labels: Sequence[int], r: int) -> "HardAssignment":
        return cls(np.asarray(labels, dtype=np.int64) - 1, r)

    @property
    def m(self) -> int:
        return int(self.labels.size)

    def occupied(self) -> np.ndarray:
        return np.unique(self.labels)

    def canonical(self) -> "HardAssignment":
        """Relabel classes in order of first appearance (label-permutation normal form)."""
        mapping: dict[int, int] = {}
        out = np.empty_like(self.labels)
        for i, lab in enumerate(self.labels):
            if lab not in mapping:
                mapping[int(lab)] = len(mapping)
            out[i] = mapping[int(lab)]
        return HardAssignment(out, self.r)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HardAssignment):
            return NotImplemented
        return self.r == other.r and np.array_equal(self.labels, other.labels)

    def __hash__(self) -> int:
        return hash((self.r, self.labels.tobytes()))


def soft_from_hard(h: HardAssignment) -> SoftAssignment:
    phi = np.zeros((h.m, h.r))
    phi[np.arange(h.m), h.labels] = 1.0
    return SoftAssignment(phi)


@dataclass(frozen=True, eq=False)
class Decomposition:
    """A mixture decomposition ``(nu, G_1..G_r)`` of an empirical distribution.

    ``components[x]`` is a distribution over the sample's values. Classes with
    ``nu[x] == 0`` carry a uniform placeholder and are flagged in ``empty``.
    """

    nu: ProbVector
    components: np.ndarray
    empty: np.ndarray

    @property
    def r(self) -> int:
        return self.nu.r

    def mixture(self) -> np.ndarray:
        return self.nu.weights @ self.components

    def class_masses(self, n: int) -> np.ndarray:
        """Unnormalized per-class weights ``n * nu[x] * G_x(z)``, shape (r, m)."""
        return n * self.nu.weights[:, None] * self.components


def decomposition_from_assignment(s: SoftAssignment | HardAssignment, w: WeightedSample) -> Decomposition:
    if isinstance(s, HardAssignment):
        s = soft_from_hard(s)
    if s.m != w.m:
        raise ValueError(f"assignment covers {s.m} values, sample has {w.m}")
    joint = w.weights[:, None] * s.phi  # (m, r)
    nu = joint.sum(axis=0)
    nu = np.clip(nu, 0.0, None)
    nu = nu / nu.sum()
    empty = nu <= 0
    comps = np.empty((s.r, s.m))
    for x in range(s.r):
        if empty[x]:
            comps[x] = 1.0 / s.m
        else:
            col = joint[:, x]
            comps[x] = col / col.sum()
    comps.setflags(write=False)
    empty.setflags(write=False)
    return Decomposition(ProbVector(nu), comps, empty)
