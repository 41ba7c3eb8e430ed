"""Single-issue DeGroot opinion dynamics and the reflected-appraisal update.

Two routes to the next self-weight vector are provided and must agree on
every non-vertex input: the eigenvector route builds the influence matrix
``W = diag(x) + (I - diag(x)) C`` and takes its dominant left eigenvector;
the closed-form route evaluates ``x_i <- alpha(x) c_i / (1 - x_i)`` with
``alpha(x) = 1 / sum_j c_j / (1 - x_j)``, where ``c`` is the dominant left
eigenvector of ``C``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, SingularityError
from .matrixcore import (
    SUM_TOL,
    VERTEX_TOL,
    InteractionMatrix,
    SimplexVector,
    dominant_left_eigenvector,
    left_stationary_vector,
    vertex_index,
)

__all__ = [
    "InfluenceMatrix",
    "ConsensusOutcome",
    "FriedkinMap",
    "build_influence_matrix",
    "degroot_step",
    "degroot_consensus",
    "alpha",
    "friedkin_map",
    "issue_update_via_eigenvector",
]


def _simplex_array(x, n: int | None = None, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise PreconditionError(f"{name} must be a vector, got shape {x.shape}")
    if n is not None and x.size != n:
        raise PreconditionError(f"{name} has length {x.size}, expected {n}")
    if not np.all(np.isfinite(x)) or x.min() < 0.0 or abs(x.sum() - 1.0) > SUM_TOL:
        raise PreconditionError(f"{name} is not a point of the simplex")
    return x


@dataclass(frozen=True, eq=False)
class InfluenceMatrix:
    """The within-issue weight matrix ``W`` together with the ``(x, C)`` that built it."""

    entries: np.ndarray
    x: np.ndarray
    source_id: str

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)


def build_influence_matrix(x, C: InteractionMatrix) -> InfluenceMatrix:
    """``W = diag(x) + (I - diag(x)) C``.

    ``x`` must be a simplex point; the all-zero vector is also accepted and
    yields ``W = C``.
    """
    a = np.asarray(C, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape != (a.shape[0],):
        raise PreconditionError(f"x has shape {x.shape}, matrix is {a.shape[0]}x{a.shape[0]}")
    if np.any(x != 0.0):
        x = _simplex_array(x, a.shape[0])
    w = (1.0 - x)[:, None] * a
    w[np.diag_indices_from(w)] = x
    w.setflags(write=False)
    x = x.copy()
    x.setflags(write=False)
    return InfluenceMatrix(w, x, getattr(C, "id", "C"))


def degroot_step(W, y) -> np.ndarray:
    """One opinion update ``y(t+1) = W y(t)``."""
    w = np.asarray(W, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.shape != (w.shape[1],):
        raise PreconditionError(f"opinion vector has shape {y.shape}, W is {w.shape}")
    return w @ y


@dataclass(frozen=True)
class ConsensusOutcome:
    opinions: np.ndarray
    steps: int
    converged: bool
    last_change: float


def degroot_consensus(W, y0, tol: float = 1e-12, max_steps: int = 10**6) -> ConsensusOutcome:
    """Iterate ``y <- W y`` until successive opinions differ by at most ``tol``.

    Non-convergence within ``max_steps`` is reported through
    ``ConsensusOutcome.converged`` rather than raised.
    """
    w = np.asarray(W, dtype=float)
    y = np.asarray(y0, dtype=float)
    if y.shape != (w.shape[1],):
        raise PreconditionError(f"opinion vector has shape {y.shape}, W is {w.shape}")
    change = float("inf")
    for step in range(1, max_steps + 1):
        nxt = w @ y
        change = float(np.max(np.abs(nxt - y)))
        y = nxt
        if change <= tol:
            return ConsensusOutcome(y, step, True, change)
    return ConsensusOutcome(y, max_steps, False, change)


def alpha(x, c) -> float:
    """Normalizer ``1 / sum_i c_i / (1 - x_i)`` of the closed-form map.

    Raises
    ------
    SingularityError
        If some ``x_i >= 1 - 1e-9``.
    """
    x = np.asarray(x, dtype=float)
    c = np.asarray(c, dtype=float)
    if np.any(x >= 1.0 - VERTEX_TOL):
        raise SingularityError("alpha is singular: a self-weight is (numerically) 1")
    return float(1.0 / np.sum(c / (1.0 - x)))


def _map(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    i = vertex_index(x)
    if i is not None:
        e = np.zeros_like(x)
        e[i] = 1.0
        return e
    v = c / (1.0 - x)
    return v / v.sum()


def friedkin_map(x, c) -> SimplexVector:
    """Next self-weights from the closed form; vertices ``e_i`` map to themselves exactly.

    ``c`` is the dominant left eigenvector (centrality) of the interaction
    matrix in force during the issue.
    """
    c = np.asarray(c, dtype=float)
    x = _simplex_array(x, c.size)
    return SimplexVector(_map(x, c))


@dataclass(frozen=True, eq=False)
class FriedkinMap:
    """The closed-form map for one interaction matrix, as a plain array -> array callable.

    No validation happens on call; this is the hot path for simulation and
    fixed-point iteration.
    """

    c: np.ndarray
    matrix_id: str = "C"

    @classmethod
    def from_matrix(cls, C: InteractionMatrix) -> "FriedkinMap":
        return cls(np.asarray(dominant_left_eigenvector(C)), C.id)

    @property
    def n(self) -> int:
        return self.c.size

    def __call__(self, x) -> np.ndarray:
        return _map(np.asarray(x, dtype=float), self.c)


def issue_update_via_eigenvector(x, C: InteractionMatrix) -> SimplexVector:
    """Next self-weights as the dominant left eigenvector of ``W(x)``.

    Raises
    ------
    EigenvectorError
        If the eigenvector solver cannot reach its residual tolerance.
    """
    x = _simplex_array(x, np.asarray(C).shape[0])
    w = build_influence_matrix(x, C)
    return SimplexVector(left_stationary_vector(w.entries))
