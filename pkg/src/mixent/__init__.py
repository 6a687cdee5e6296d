"""Clustering and order estimation by minimum mixing entropy.

The mixing entropy of a decomposition ``P = sum_x nu(x) G_x`` is
``H(nu) + sum_x nu(x) min_theta H(G_x || g_theta)``. Minimizing it over hard
assignments of a sample is classification maximum likelihood; the number of
occupied classes of the minimizer estimates how many clumps the data has
relative to the density family ``g_theta``.
"""

from .cem import FitResult, IterationTrace, ModelState, run_cem
from .data_model import (
    Decomposition,
    EmptySampleError,
    HardAssignment,
    ProbVector,
    SampleError,
    SoftAssignment,
    WeightedSample,
    ingest,
    read_csv_column,
)
from .entropy import classification_loglik, criterion_of_assignment, criterion_of_soft, mixing_entropy
from .families import BernoulliFamily, BiExpFamily, GaussianFamily, get_family
from .kernels import BACKEND
from .oracles import binary_closed_form, brute_force_min, gaussian_split_test
from .search import SearchConfig, search

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BernoulliFamily",
    "BiExpFamily",
    "Decomposition",
    "EmptySampleError",
    "FitResult",
    "GaussianFamily",
    "HardAssignment",
    "IterationTrace",
    "ModelState",
    "ProbVector",
    "SampleError",
    "SearchConfig",
    "SoftAssignment",
    "WeightedSample",
    "binary_closed_form",
    "brute_force_min",
    "classification_loglik",
    "criterion_of_assignment",
    "criterion_of_soft",
    "gaussian_split_test",
    "get_family",
    "ingest",
    "mixing_entropy",
    "read_csv_column",
    "run_cem",
    "search",
]
