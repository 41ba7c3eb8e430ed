"""Relative interaction matrices, simplex points and dominant left eigenvectors.

A relative interaction matrix ``C`` is nonnegative, has a zero diagonal and
unit row sums. Entry ``c_ij`` is the weight individual ``i`` places on the
opinion of individual ``j``; the associated digraph has an edge ``j -> i``
whenever ``c_ij > 0``. Irreducibility and star topology only depend on the
off-diagonal sparsity pattern, so the direction convention does not matter
for either test.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    EigenvectorError,
    GenerationError,
    MatrixFormatError,
    MatrixStructureError,
    PreconditionError,
)

SUM_TOL = 1e-12        # row/column/simplex sums
ZERO_TOL = 1e-15       # entries at or below are structural zeros for the graph
VERTEX_TOL = 1e-9      # distance to a basis vector that counts as a vertex
EIG_TOL = 1e-14        # successive-iterate L-inf difference in power iteration
EIG_MAX_ITER = 100_000
EIG_RESIDUAL_TOL = 1e-12

__all__ = [
    "InteractionMatrix",
    "SimplexVector",
    "ValidationReport",
    "validate",
    "is_irreducible",
    "has_star_topology",
    "is_doubly_stochastic",
    "dominant_left_eigenvector",
    "left_stationary_vector",
    "random_interaction_matrix",
    "vertex_index",
    "load_matrix",
    "save_matrix",
    "format_float",
    "dump_json",
]


def format_float(value: float) -> str:
    """Render ``value`` with 17 significant digits (round-trip exact)."""
    return format(float(value), ".17g")


def _finite_json(obj):
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _finite_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite_json(v) for v in obj]
    return obj


def dump_json(obj) -> str:
    """Indented JSON; floats keep their exact repr, non-finite floats become strings."""
    return json.dumps(_finite_json(obj), indent=2) + "\n"


# ---------------------------------------------------------------------------
# simplex points

def vertex_index(x, tol: float = VERTEX_TOL) -> int | None:
    """Index ``i`` if ``x`` is within ``tol`` of the basis vector ``e_i``, else None."""
    x = np.asarray(x, dtype=float)
    i = int(np.argmax(x))
    if x[i] < 1.0 - tol:
        return None
    others = np.delete(x, i)
    if others.size and np.max(others) > tol:
        return None
    return i


@dataclass(frozen=True, eq=False)
class SimplexVector:
    """A point of the probability simplex, classified as vertex, boundary or interior.

    Behaves like a read-only 1-d array under ``np.asarray``.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise PreconditionError(f"simplex point must be a nonempty 1-d vector, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise PreconditionError("simplex point has non-finite entries")
        if v.min() < 0.0:
            raise PreconditionError(f"simplex point has negative entry {v.min():.3e}")
        if abs(v.sum() - 1.0) > SUM_TOL:
            raise PreconditionError(f"simplex point sums to {v.sum():.17g}, not 1")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def vertex(self) -> int | None:
        return vertex_index(self.values)

    @property
    def kind(self) -> str:
        """One of ``"vertex"``, ``"interior"`` or ``"boundary"``."""
        if self.vertex is not None:
            return "vertex"
        if np.all(self.values > 0.0):
            return "interior"
        return "boundary"

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    def __len__(self):
        return self.values.size

    def __getitem__(self, item):
        return self.values[item]

    def __iter__(self):
        return iter(self.values)

    def __repr__(self):
        return f"SimplexVector({np.array2string(self.values, precision=6)}, kind={self.kind!r})"

    def tolist(self) -> list[float]:
        return self.values.tolist()


# ---------------------------------------------------------------------------
# structure

def _as_square(raw) -> np.ndarray:
    a = np.array(raw, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise MatrixStructureError(f"matrix must be square, got shape {a.shape}")
    if a.shape[0] < 1:
        raise MatrixStructureError("matrix must have at least one row")
    bad = ~np.isfinite(a)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise MatrixStructureError(f"non-finite entry at row {i + 1}, column {j + 1}")
    if (a < 0).any():
        i, j = np.argwhere(a < 0)[0]
        raise MatrixStructureError(f"negative entry {a[i, j]!r} at row {i + 1}, column {j + 1}")
    return a


def _pattern(a: np.ndarray) -> np.ndarray:
    p = a > ZERO_TOL
    np.fill_diagonal(p, False)
    return p


def _strongly_connected(pattern: np.ndarray) -> bool:
    if pattern.shape[0] == 1:
        return True
    ncomp, _ = connected_components(csr_matrix(pattern), directed=True, connection="strong")
    return ncomp == 1


def _star(pattern: np.ndarray) -> bool:
    rows, cols = np.nonzero(pattern)
    for i in range(pattern.shape[0]):
        if np.all((rows == i) | (cols == i)):
            return True
    return False


def _primitive(pattern: np.ndarray) -> bool:
    # Wielandt: an irreducible pattern is primitive iff its ((n-1)^2+1)-th power is positive.
    n = pattern.shape[0]
    b = pattern.astype(np.int64)
    power = 1
    target = (n - 1) ** 2 + 1
    while power < target:
        b = np.minimum(b @ b, 1)
        power *= 2
    return bool(b.all())


@dataclass(frozen=True)
class ValidationReport:
    n: int
    row_stochastic: bool
    zero_diagonal: bool
    irreducible: bool
    doubly_stochastic: bool
    star_topology: bool

    @property
    def satisfies_assumption_1(self) -> bool:
        """Row-stochastic, zero diagonal, irreducible, not a star, and ``n >= 3``."""
        return (
            self.row_stochastic
            and self.zero_diagonal
            and self.irreducible
            and not self.star_topology
            and self.n >= 3
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "row_stochastic": self.row_stochastic,
            "zero_diagonal": self.zero_diagonal,
            "irreducible": self.irreducible,
            "doubly_stochastic": self.doubly_stochastic,
            "star_topology": self.star_topology,
            "satisfies_assumption_1": self.satisfies_assumption_1,
        }


def validate(matrix) -> ValidationReport:
    """Compute every structural flag of a raw square matrix.

    Raises
    ------
    MatrixStructureError
        If the input is not square or has NaN, infinite or negative entries.
    """
    a = _as_square(matrix)
    pattern = _pattern(a)
    row_ok = bool(np.all(np.abs(a.sum(axis=1) - 1.0) <= SUM_TOL))
    return ValidationReport(
        n=a.shape[0],
        row_stochastic=row_ok,
        zero_diagonal=bool(np.all(np.diag(a) == 0.0)),
        irreducible=_strongly_connected(pattern),
        doubly_stochastic=row_ok and bool(np.all(np.abs(a.sum(axis=0) - 1.0) <= SUM_TOL)),
        star_topology=_star(pattern),
    )


@dataclass(frozen=True, eq=False)
class InteractionMatrix:
    """Validated relative interaction matrix (row-stochastic, zero diagonal).

    Irreducibility and the star test are not enforced here; dynamics entry
    points check them through :attr:`report`.
    """

    entries: np.ndarray
    id: str = "C"

    def __post_init__(self):
        a = _as_square(self.entries)
        if not np.all(np.diag(a) == 0.0):
            raise MatrixStructureError(f"matrix {self.id!r} has a nonzero diagonal entry")
        sums = a.sum(axis=1)
        worst = int(np.argmax(np.abs(sums - 1.0)))
        if abs(sums[worst] - 1.0) > SUM_TOL:
            raise MatrixStructureError(
                f"matrix {self.id!r} row {worst + 1} sums to {sums[worst]:.17g}, not 1"
            )
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def report(self) -> ValidationReport:
        return validate(self.entries)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    def __repr__(self):
        return f"InteractionMatrix(id={self.id!r}, n={self.n})"


def is_irreducible(C) -> bool:
    """True iff the off-diagonal sparsity pattern of ``C`` is strongly connected."""
    return _strongly_connected(_pattern(_as_square(C)))


def has_star_topology(C) -> bool:
    """True iff some node is an endpoint of every edge."""
    return _star(_pattern(_as_square(C)))


def is_doubly_stochastic(C) -> bool:
    a = _as_square(C)
    return bool(
        np.all(np.abs(a.sum(axis=1) - 1.0) <= SUM_TOL)
        and np.all(np.abs(a.sum(axis=0) - 1.0) <= SUM_TOL)
    )


# ---------------------------------------------------------------------------
# eigenvectors

def _residual(a: np.ndarray, v: np.ndarray) -> float:
    return float(np.max(np.abs(v @ a - v)))


def _solve_stationary(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    system = np.vstack([a.T - np.eye(n), np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    v, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    return v


def _clean(v: np.ndarray) -> np.ndarray:
    v = np.where(v < 0.0, 0.0, v)
    return v / v.sum()


def left_stationary_vector(a, tol: float = EIG_TOL, max_iter: int = EIG_MAX_ITER) -> np.ndarray:
    """Normalized nonnegative left eigenvector for eigenvalue 1 of a row-stochastic matrix.

    Power iteration on the transpose, stopping when successive iterates differ
    by at most ``tol`` in L-inf. Irreducible imprimitive patterns (where 1 is
    not strictly dominant in modulus) and runs that hit ``max_iter`` fall back
    to a least-squares solve of the stationary system. The caller is
    responsible for uniqueness; for reducible inputs with several closed
    classes the result is the limit from the uniform start.

    Raises
    ------
    EigenvectorError
        If the final residual ``||v^T A - v^T||_inf`` exceeds 1e-12.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    pattern = a > ZERO_TOL
    diag_positive = bool(np.any(np.diag(pattern)))
    periodic = False
    if not diag_positive and _strongly_connected(pattern):
        periodic = not _primitive(pattern)

    v = np.full(n, 1.0 / n)
    converged = False
    if not periodic:
        at = a.T
        for _ in range(max_iter):
            nxt = at @ v
            nxt /= nxt.sum()
            diff = abs(nxt - v).max()
            v = nxt
            if diff <= tol:
                converged = True
                break
    if converged:
        v = _clean(v)
        res = _residual(a, v)
        if res <= EIG_RESIDUAL_TOL:
            return v
    v = _clean(_solve_stationary(a))
    res = _residual(a, v)
    if res > EIG_RESIDUAL_TOL:
        raise EigenvectorError("stationary vector did not reach tolerance", res)
    return v


def dominant_left_eigenvector(C) -> SimplexVector:
    """Dominant left eigenvector ``c`` of an irreducible row-stochastic matrix.

    ``c^T C = c^T``, ``c > 0`` componentwise and ``sum(c) == 1``.

    Raises
    ------
    PreconditionError
        If ``C`` is reducible, so that the eigenvector is not unique.
    """
    a = _as_square(C)
    if not _strongly_connected(_pattern(a)):
        raise PreconditionError("matrix is reducible; dominant left eigenvector is not unique")
    return SimplexVector(left_stationary_vector(a))


# ---------------------------------------------------------------------------
# generation

def _random_derangement(rng: np.random.Generator, n: int) -> np.ndarray:
    while True:
        perm = rng.permutation(n)
        if not np.any(perm == np.arange(n)):
            return perm


def random_interaction_matrix(
    n: int,
    density: float = 0.5,
    seed: int = 0,
    doubly_stochastic: bool = False,
    id: str | None = None,
    max_tries: int = 1000,
) -> InteractionMatrix:
    """Random matrix that is irreducible, non-star, zero-diagonal and row-stochastic.

    In the general case each off-diagonal entry is present with probability
    ``density`` (at least one per row) and weights are uniform on (0, 1]
    before row normalization. With ``doubly_stochastic`` the matrix is a
    Dirichlet-weighted convex combination of ``max(1, round(density*(n-1)))``
    random derangement matrices. Candidates are redrawn until the result
    satisfies every structural requirement.
    """
    if n < 3:
        raise PreconditionError(f"need n >= 3, got {n}")
    if not 0.0 < density <= 1.0:
        raise PreconditionError(f"density must lie in (0, 1], got {density}")
    rng = np.random.default_rng(seed)
    label = id if id is not None else f"random-n{n}-s{seed}"
    eye = np.eye(n, dtype=bool)
    for _ in range(max_tries):
        if doubly_stochastic:
            k = max(1, int(round(density * (n - 1))))
            weights = rng.dirichlet(np.ones(k))
            a = np.zeros((n, n))
            for w in weights:
                a[np.arange(n), _random_derangement(rng, n)] += w
        else:
            mask = (rng.random((n, n)) < density) & ~eye
            for i in np.flatnonzero(~mask.any(axis=1)):
                j = rng.choice([k for k in range(n) if k != i])
                mask[i, j] = True
            a = (1.0 - rng.random((n, n))) * mask
            a /= a.sum(axis=1, keepdims=True)
        pattern = _pattern(a)
        if _strongly_connected(pattern) and not _star(pattern):
            return InteractionMatrix(a, id=label)
    raise GenerationError(f"no valid matrix after {max_tries} draws (n={n}, density={density})")


# ---------------------------------------------------------------------------
# files

def _matrix_from_rows(rows, id: str, source: str) -> InteractionMatrix:
    try:
        return InteractionMatrix(np.array(rows, dtype=float), id=id)
    except ValueError as exc:
        raise MatrixFormatError(f"{source}: {exc}") from exc


def load_matrix(path) -> InteractionMatrix:
    """Read a matrix from JSON ``{"id", "n", "rows"}`` or headerless CSV.

    CSV files take their id from the file stem.
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MatrixFormatError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
        if not isinstance(doc, dict) or not {"id", "n", "rows"} <= doc.keys():
            raise MatrixFormatError(f"{path}: expected an object with keys id, n, rows")
        rows = doc["rows"]
        n = doc["n"]
        if not isinstance(rows, list) or len(rows) != n:
            raise MatrixFormatError(f"{path}: 'n' is {n} but {len(rows)} rows are given")
        for k, row in enumerate(rows, start=1):
            if not isinstance(row, list) or len(row) != n:
                raise MatrixFormatError(f"{path}: row {k} must have {n} entries")
            if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in row):
                raise MatrixFormatError(f"{path}: row {k} has a non-numeric entry")
        return _matrix_from_rows(rows, str(doc["id"]), str(path))

    rows = []
    for lineno, fields in enumerate(csv.reader(text.splitlines()), start=1):
        if not fields or all(not f.strip() for f in fields):
            continue
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise MatrixFormatError(f"{path}: line {lineno}: {exc}") from exc
        if len(rows[-1]) != len(rows[0]):
            raise MatrixFormatError(
                f"{path}: line {lineno}: expected {len(rows[0])} values, got {len(rows[-1])}"
            )
    if not rows:
        raise MatrixFormatError(f"{path}: empty file")
    if len(rows) != len(rows[0]):
        raise MatrixFormatError(f"{path}: {len(rows)} rows but {len(rows[0])} columns")
    return _matrix_from_rows(rows, path.stem, str(path))


def save_matrix(C: InteractionMatrix, path) -> None:
    """Write ``C`` as JSON with 17 significant digits per entry."""
    rows = ",\n    ".join(
        "[" + ", ".join(format_float(v) for v in row) + "]" for row in C.entries
    )
    Path(path).write_text(
        '{\n  "id": %s,\n  "n": %d,\n  "rows": [\n    %s\n  ]\n}\n' % (json.dumps(C.id), C.n, rows)
    )

