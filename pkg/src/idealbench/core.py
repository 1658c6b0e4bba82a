"""Shared domain types: dominance relations, box bounds, and the RNG contract.

Everything in this module is pure and operates on plain ``numpy`` arrays of
float64.  Decision vectors are 1-D arrays of length ``n``; objective vectors
are 1-D arrays of length ``m``.  Batches are 2-D arrays with one row per
vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Create the run-level random source.

    PCG64 is used because its stream is fully specified by the seed and
    reproduces bit-identically across processes and platforms.  One generator
    is created per run and passed explicitly; every component of a run draws
    from the same stream so interleaving stays reproducible.
    """
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class BoxBounds:
    """Axis-aligned box constraints on the decision space."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("bounds must be 1-D arrays of equal length")
        if not np.all(lower < upper):
            raise ValueError("each lower bound must be strictly below its upper bound")

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    def contains(self, x: np.ndarray, atol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(
            np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol)
        )

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform samples inside the box, shape (count, n)."""
        u = rng.random((count, self.n))
        return self.lower + u * (self.upper - self.lower)


@dataclass(frozen=True)
class Solution:
    """A decision vector together with its cached objective vector."""

    x: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "f", np.asarray(self.f, dtype=float))


class ProblemInstance(Protocol):
    """An evaluable m-objective problem over a box-bounded decision space."""

    m: int
    n: int
    bounds: BoxBounds

    def evaluate(self, x: np.ndarray) -> np.ndarray: ...

    def evaluate_batch(self, xs: np.ndarray) -> np.ndarray: ...


def dominates(u: np.ndarray, v: np.ndarray) -> bool:
    """Pareto dominance: u is no worse everywhere and strictly better somewhere."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    return bool(np.all(u <= v) and np.any(u < v))


def non_dominated_filter(objs: np.ndarray) -> np.ndarray:
    """Indices of the non-dominated members of a set, in stable input order.

    A vectorized all-pairs check; fine for the set sizes this package deals
    with (populations of a few hundred).
    """
    objs = np.asarray(objs, dtype=float)
    if objs.ndim != 2 or objs.shape[0] == 0:
        raise ValueError("expected a non-empty 2-D array of objective vectors")
    k = objs.shape[0]
    le = np.all(objs[:, None, :] <= objs[None, :, :], axis=2)
    lt = np.any(objs[:, None, :] < objs[None, :, :], axis=2)
    dominated_by = le & lt  # [i, j] True when i dominates j
    is_dominated = dominated_by.any(axis=0)
    return np.flatnonzero(~is_dominated)


def clamp_to_bounds(x: np.ndarray, bounds: BoxBounds) -> np.ndarray:
    """Project a decision vector (or a batch of rows) into the box."""
    x = np.asarray(x, dtype=float)
    return np.clip(x, bounds.lower, bounds.upper)


@dataclass
class EvaluationBudget:
    """Shared function-evaluation account for one run.

    The host, the estimation component, and the initialization all charge the
    same account; the run stops when it is exhausted no matter which side
    consumed the last evaluation.
    """

    limit: int
    used: int = 0
    _eval: Callable[[np.ndarray], np.ndarray] = field(default=None, repr=False)

    @property
    def remaining(self) -> int:
        return max(0, self.limit - self.used)

    @property
    def exhausted(self) -> bool:
        return self.used >= self.limit

    def evaluate(self, xs: np.ndarray) -> np.ndarray:
        """Evaluate as many rows of ``xs`` as the budget allows.

        Returns the objective matrix for the evaluated prefix; the caller
        detects truncation by comparing row counts.
        """
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        take = min(xs.shape[0], self.remaining)
        if take == 0:
            return np.empty((0, 0))
        out = self._eval(xs[:take])
        self.used += take
        return out
