"""Issue-dependent topologies: schedules, simulation, cycle maps and periodic orbits.

Issues are numbered from 1. Under a periodic schedule with matrices
``C_1..C_M`` the matrix in force at issue ``s`` is ``C_((s-1) mod M + 1)``,
and the self-weights obey ``x(s+1) = F_sigma(s)(x(s))``. Sampling the
trajectory once per period turns it into a time-invariant system whose
block maps are the cycle compositions ``G_p = F_(p-1) o ... o F_(p+1) o F_p``
(indices mod ``M``); for ``M = 2`` these are ``F_2 o F_1`` and ``F_1 o F_2``.
"""
from __future__ import annotations

import csv
import io
import itertools
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .dynamics import FriedkinMap
from .errors import PreconditionError, ScheduleError
from .matrixcore import SUM_TOL, InteractionMatrix, dump_json, format_float, vertex_index

__all__ = [
    "Schedule",
    "Trajectory",
    "StackedState",
    "OrbitReport",
    "CycleMap",
    "InvariantSetReport",
    "simulate",
    "composed_cycle_map",
    "lift",
    "unlift",
    "stacked_step",
    "find_fixed_point",
    "find_periodic_orbit",
    "detect_periodic_orbit",
    "invariant_set_extreme_points",
    "verify_invariant_set",
    "verify_cross_fixed_point_relation",
]

FIXED_POINT_TOL = 1e-12
FIXED_POINT_MAX_ITER = 100_000
ORBIT_TOL = 1e-9
ORBIT_WINDOW = 10

CONSTANT, PERIODIC, ARBITRARY = "constant", "periodic", "arbitrary"


def _sup(a) -> float:
    return float(np.max(np.abs(a)))


def _start_point(x, n: int) -> np.ndarray:
    x = np.array(x, dtype=float)
    if x.shape != (n,):
        raise PreconditionError(f"initial state has shape {x.shape}, expected ({n},)")
    if not np.all(np.isfinite(x)) or x.min() < 0.0 or abs(x.sum() - 1.0) > SUM_TOL:
        raise PreconditionError("initial state is not a point of the simplex")
    if vertex_index(x) is not None:
        raise PreconditionError("initial state is a vertex (autocratic configuration)")
    return x


# ---------------------------------------------------------------------------
# schedules

@dataclass(frozen=True, eq=False)
class Schedule:
    """Which interaction matrix is in force at each issue.

    Build with :meth:`constant`, :meth:`periodic` or :meth:`arbitrary`.
    ``ids`` is the single id (constant), the cycle (periodic) or the choice
    set (arbitrary). Arbitrary schedules either replay an explicit
    ``sequence`` or draw uniformly from ``ids`` with ``seed``.
    """

    kind: str
    catalog: Mapping[str, InteractionMatrix]
    ids: tuple[str, ...]
    sequence: tuple[str, ...] | None = None
    seed: int | None = None
    democratic: bool = False

    def __post_init__(self):
        if self.kind not in (CONSTANT, PERIODIC, ARBITRARY):
            raise ScheduleError(f"unknown schedule kind {self.kind!r}")
        catalog = dict(self.catalog)
        object.__setattr__(self, "catalog", catalog)
        object.__setattr__(self, "ids", tuple(self.ids))
        if self.sequence is not None:
            object.__setattr__(self, "sequence", tuple(self.sequence))
        if not self.ids:
            raise ScheduleError("schedule references no matrices")
        if self.kind == CONSTANT and len(self.ids) != 1:
            raise ScheduleError("constant schedule takes exactly one id")
        if self.kind == PERIODIC and len(self.ids) < 2:
            raise ScheduleError("periodic schedule needs a cycle of length M >= 2")
        used = set(self.ids) | set(self.sequence or ())
        missing = sorted(used - catalog.keys())
        if missing:
            raise ScheduleError(f"schedule references unknown matrix ids {missing}")
        sizes = {catalog[i].n for i in used}
        if len(sizes) != 1:
            raise ScheduleError(f"matrices in a schedule must share n, got sizes {sorted(sizes)}")
        if self.democratic:
            if self.kind != ARBITRARY:
                raise ScheduleError("democratic (doubly stochastic) mode applies to arbitrary schedules")
            bad = [i for i in sorted(used)
                   if not (catalog[i].report.doubly_stochastic and catalog[i].report.irreducible)]
            if bad:
                raise ScheduleError(f"democratic mode needs doubly stochastic irreducible matrices; {bad} are not")

    @classmethod
    def constant(cls, catalog, id: str | None = None) -> "Schedule":
        catalog = _as_catalog(catalog)
        if id is None:
            if len(catalog) != 1:
                raise ScheduleError("constant schedule over a multi-matrix catalog needs an id")
            id = next(iter(catalog))
        return cls(CONSTANT, catalog, (id,))

    @classmethod
    def periodic(cls, catalog, ids: Sequence[str] | None = None) -> "Schedule":
        catalog = _as_catalog(catalog)
        return cls(PERIODIC, catalog, tuple(ids) if ids is not None else tuple(catalog))

    @classmethod
    def arbitrary(cls, catalog, ids: Sequence[str] | None = None, sequence: Sequence[str] | None = None,
                  seed: int | None = 0, democratic: bool = False) -> "Schedule":
        catalog = _as_catalog(catalog)
        if ids is None:
            ids = sorted(set(sequence)) if sequence is not None else tuple(catalog)
        return cls(ARBITRARY, catalog, tuple(ids), sequence if sequence is None else tuple(sequence),
                   None if sequence is not None else seed, democratic)

    @property
    def n(self) -> int:
        return self.catalog[self.ids[0]].n

    @property
    def period(self) -> int | None:
        """``M`` for periodic schedules, 1 for constant ones, None for arbitrary."""
        if self.kind == ARBITRARY:
            return None
        return len(self.ids)

    @cached_property
    def maps(self) -> dict[str, FriedkinMap]:
        used = set(self.ids) | set(self.sequence or ())
        return {i: FriedkinMap.from_matrix(self.catalog[i]) for i in sorted(used)}

    def realize(self, num_issues: int) -> tuple[str, ...]:
        """Matrix ids for issues ``1..num_issues``; seeded arbitrary draws are prefix-stable."""
        if self.kind == CONSTANT:
            return self.ids * num_issues
        if self.kind == PERIODIC:
            m = len(self.ids)
            return tuple(self.ids[s % m] for s in range(num_issues))
        if self.sequence is not None:
            if len(self.sequence) < num_issues:
                raise ScheduleError(
                    f"explicit sequence has {len(self.sequence)} entries, {num_issues} issues requested"
                )
            return self.sequence[:num_issues]
        picks = np.random.default_rng(self.seed).integers(len(self.ids), size=num_issues)
        return tuple(self.ids[k] for k in picks)

    def describe(self) -> dict:
        out = {"kind": self.kind, "ids": list(self.ids)}
        if self.sequence is not None:
            out["sequence"] = list(self.sequence)
        if self.seed is not None and self.kind == ARBITRARY:
            out["seed"] = self.seed
        if self.democratic:
            out["democratic"] = True
        return out


def _as_catalog(catalog) -> dict[str, InteractionMatrix]:
    if isinstance(catalog, InteractionMatrix):
        return {catalog.id: catalog}
    if isinstance(catalog, Mapping):
        return dict(catalog)
    out = {}
    for C in catalog:
        if C.id in out:
            raise ScheduleError(f"duplicate matrix id {C.id!r} in catalog")
        out[C.id] = C
    return out


# ---------------------------------------------------------------------------
# trajectories

@dataclass(frozen=True, eq=False)
class Trajectory:
    """Self-weights ``x(1)..x(S)`` with the matrix id in force at each issue.

    Row ``k`` of ``states`` is ``x(k+1)``; ``matrix_ids[k]`` is the matrix
    discussed at issue ``k+1`` (it produced ``x(k+2)``).
    """

    states: np.ndarray
    matrix_ids: tuple[str, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        st = np.array(self.states, dtype=float)
        st.setflags(write=False)
        object.__setattr__(self, "states", st)
        object.__setattr__(self, "matrix_ids", tuple(self.matrix_ids))
        if st.ndim != 2 or st.shape[0] != len(self.matrix_ids):
            raise PreconditionError("trajectory needs one matrix id per recorded state")

    def __len__(self):
        return self.states.shape[0]

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def issues(self) -> np.ndarray:
        return np.arange(1, len(self) + 1)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def x(self, s: int) -> np.ndarray:
        """State at issue ``s`` (1-based)."""
        if not 1 <= s <= len(self):
            raise IndexError(f"issue {s} outside 1..{len(self)}")
        return self.states[s - 1]

    def records(self):
        for k, (mid, x) in enumerate(zip(self.matrix_ids, self.states), start=1):
            yield k, mid, x

    def to_csv(self, target=None) -> str:
        """``issue,matrix_id,x_1,...,x_n`` with 17 significant digits; writes to ``target`` if given."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["issue", "matrix_id"] + [f"x_{i}" for i in range(1, self.n + 1)])
        for s, mid, x in self.records():
            w.writerow([s, mid] + [format_float(v) for v in x])
        text = buf.getvalue()
        if target is not None:
            Path(target).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        ids = [r[1] for r in rows[1:]]
        states = [[float(v) for v in r[2:]] for r in rows[1:]]
        return cls(np.array(states), tuple(ids))


def simulate(schedule: Schedule, x1, num_issues: int) -> Trajectory:
    """Run ``num_issues`` issues starting from ``x1`` (which must not be a vertex).

    Every matrix the schedule uses must be irreducible, non-star and have
    ``n >= 3``.
    """
    if num_issues < 1:
        raise PreconditionError("num_issues must be positive")
    x = _start_point(x1, schedule.n)
    ids = schedule.realize(num_issues)
    for mid in sorted(set(ids)):
        if not schedule.catalog[mid].report.satisfies_assumption_1:
            raise PreconditionError(
                f"matrix {mid!r} must be irreducible, non-star, zero-diagonal and row-stochastic with n >= 3"
            )
    maps = schedule.maps
    states = np.empty((num_issues, schedule.n))
    states[0] = x
    for k in range(num_issues - 1):
        x = maps[ids[k]](x)
        states[k + 1] = x
    meta = {"schedule": schedule.describe(), "num_issues": num_issues}
    if schedule.kind == ARBITRARY:
        meta["realized_sequence"] = list(ids)
    return Trajectory(states, ids, meta)


# ---------------------------------------------------------------------------
# cycle maps and the stacked lift

@dataclass(frozen=True, eq=False)
class CycleMap:
    """Composition of per-issue maps over one full period, applied in stored order."""

    steps: tuple[FriedkinMap, ...]
    phase: int = 1

    @property
    def n(self) -> int:
        return self.steps[0].n

    @property
    def matrix_ids(self) -> tuple[str, ...]:
        return tuple(f.matrix_id for f in self.steps)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        for f in self.steps:
            x = f(x)
        return x


def composed_cycle_map(schedule: Schedule, phase: int = 1) -> CycleMap:
    """``G_phase``: apply the maps of phases ``phase, phase+1, ..., phase+M-1`` (cyclically).

    A constant schedule is treated as period 1, giving the single map ``F``.
    """
    if schedule.kind == ARBITRARY:
        raise ScheduleError("cycle maps are defined for constant or periodic schedules only")
    m = len(schedule.ids)
    if not 1 <= phase <= m:
        raise PreconditionError(f"phase must lie in 1..{m}, got {phase}")
    maps = schedule.maps
    order = [schedule.ids[(phase - 1 + k) % m] for k in range(m)]
    return CycleMap(tuple(maps[i] for i in order), phase)


@dataclass(frozen=True, eq=False)
class StackedState:
    """``M`` consecutive self-weight vectors packed as one state in ``R^(M n)``."""

    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        blocks = []
        for b in self.blocks:
            b = np.array(b, dtype=float)
            if b.ndim != 1 or b.min() < 0.0 or abs(b.sum() - 1.0) > SUM_TOL:
                raise PreconditionError("every stacked block must be a simplex point")
            b.setflags(write=False)
            blocks.append(b)
        if not blocks or len({b.size for b in blocks}) != 1:
            raise PreconditionError("stacked blocks must be nonempty and share length")
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def M(self) -> int:
        return len(self.blocks)

    def as_vector(self) -> np.ndarray:
        return np.concatenate(self.blocks)


def lift(segment: Sequence, M: int | None = None) -> StackedState:
    """Pack ``x(M(s-1)+1), ..., x(Ms)`` into one stacked state."""
    segment = list(segment)
    if M is not None and len(segment) != M:
        raise PreconditionError(f"segment has {len(segment)} states, expected M={M}")
    return StackedState(tuple(segment))


def unlift(y: StackedState) -> list[np.ndarray]:
    return [b.copy() for b in y.blocks]


def stacked_step(schedule: Schedule, y: StackedState) -> StackedState:
    """Advance the lifted state by one period: block ``p`` goes through ``G_p``."""
    if y.M != len(schedule.ids):
        raise PreconditionError(f"state has {y.M} blocks, schedule period is {len(schedule.ids)}")
    return StackedState(tuple(composed_cycle_map(schedule, p + 1)(b) for p, b in enumerate(y.blocks)))


# ---------------------------------------------------------------------------
# fixed points and orbits

@dataclass(frozen=True)
class OrbitReport:
    converged: bool
    orbit: tuple[np.ndarray, ...]
    residual: float
    iterations: int
    phase: int = 1

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "residual": self.residual,
            "iterations": self.iterations,
            "phase": self.phase,
            "orbit": [[float(v) for v in p] for p in self.orbit],
        }

    def to_json(self) -> str:
        return dump_json(self.to_dict())


def find_fixed_point(mapping: Callable, x0, tol: float = FIXED_POINT_TOL,
                     max_iter: int = FIXED_POINT_MAX_ITER) -> OrbitReport:
    """Picard iteration ``x <- map(x)`` until ``||map(x) - x||_inf <= tol``.

    The reported residual is measured at the returned point. Vertices are
    rejected as starting points since every vertex is already fixed.
    """
    x = np.array(x0, dtype=float)
    _start_point(x, x.size)
    res = float("inf")
    for it in range(max_iter + 1):
        fx = mapping(x)
        res = _sup(fx - x)
        if res <= tol:
            return OrbitReport(True, (x,), res, it, getattr(mapping, "phase", 1))
        x = fx
    return OrbitReport(False, (x,), res, max_iter, getattr(mapping, "phase", 1))


def find_periodic_orbit(schedule: Schedule, x0, phase: int = 1, tol: float = FIXED_POINT_TOL,
                        max_iter: int = FIXED_POINT_MAX_ITER) -> OrbitReport:
    """Fixed point of ``G_phase`` plus its companion points for every other phase.

    The companions are generated by the per-issue maps (``y_(q+1) = F_q(y_q)``);
    the orbit is returned in phase order ``1..M`` and ``residual`` is the
    worst ``||G_q(y_q) - y_q||_inf`` over the cycle.
    """
    g = composed_cycle_map(schedule, phase)
    report = find_fixed_point(g, x0, tol, max_iter)
    m = len(schedule.ids)
    points = {phase: report.orbit[0]}
    y = report.orbit[0]
    for k in range(m - 1):
        q = (phase - 1 + k) % m
        y = schedule.maps[schedule.ids[q]](y)
        points[(q + 1) % m + 1] = y
    orbit = tuple(points[p] for p in range(1, m + 1))
    residual = max(_sup(composed_cycle_map(schedule, p)(orbit[p - 1]) - orbit[p - 1])
                   for p in range(1, m + 1))
    converged = report.converged and residual <= tol
    return OrbitReport(converged, orbit, residual, report.iterations, phase)


def detect_periodic_orbit(traj: Trajectory, M: int, tol: float = ORBIT_TOL,
                          burn_in: int | None = None, window: int = ORBIT_WINDOW) -> OrbitReport:
    """Decide whether a trajectory has settled onto a period-``M`` orbit.

    The first ``max(50, 10 M)`` issues are discarded. Over the last ``window``
    full periods, converged iff ``max_s ||x(s+M) - x(s)||_inf <= tol``. The
    orbit entry for phase ``p`` is the window average of ``x(s)`` with
    ``(s-1) mod M == p-1``.
    """
    if M < 1:
        raise PreconditionError("period must be positive")
    if burn_in is None:
        burn_in = max(50, 10 * M)
    avail = len(traj) - burn_in
    if avail < 2 * M:
        raise PreconditionError(
            f"trajectory has {len(traj)} issues; need at least {burn_in + 2 * M} for period {M}"
        )
    periods = min(window, avail // M - 1)
    start = len(traj) - (periods + 1) * M
    tail = traj.states[start:]
    diffs = np.abs(tail[M:] - tail[:-M]).max(axis=1)
    residual = float(diffs.max())
    span = tail[M:]
    issues = np.arange(start + M + 1, len(traj) + 1)
    orbit = tuple(span[(issues - 1) % M == p].mean(axis=0) for p in range(M))
    return OrbitReport(residual <= tol, orbit, residual, len(traj))


# ---------------------------------------------------------------------------
# invariant set and companion relation

def invariant_set_extreme_points(n: int, r: float) -> np.ndarray:
    """Extreme points of ``{y in simplex : y_i <= 1 - r}``.

    Each has ``k = floor(1/(1-r))`` coordinates at ``1 - r``, at most one
    coordinate holding the remainder, and zeros elsewhere.
    """
    cap = 1.0 - r
    k = int(np.floor(1.0 / cap + 1e-12))
    rest = 1.0 - k * cap
    if rest < 1e-12:
        rest = 0.0
    with_rest = rest > 0.0
    if k + with_rest > n:
        raise PreconditionError(f"r={r} leaves the invariant set empty for n={n}")
    points = []
    for tops in itertools.combinations(range(n), k):
        others = [i for i in range(n) if i not in tops] if with_rest else [None]
        for j in others:
            p = np.zeros(n)
            p[list(tops)] = cap
            if j is not None:
                p[j] = rest
            points.append(p)
    return np.array(points)


@dataclass(frozen=True)
class InvariantSetReport:
    passed: bool
    r: float
    num_checked: int
    worst_margin: float                 # max_i F_i(y) - (1 - r) over all samples; < 0 required
    counterexample: np.ndarray | None = None
    image: np.ndarray | None = None


def _sample_invariant_set(n: int, r: float, count: int, rng: np.random.Generator,
                          extremes: np.ndarray) -> np.ndarray:
    cap = 1.0 - r
    out = []
    # half uniform on the simplex (rejecting points outside the set) ...
    tries = 0
    while len(out) < count // 2 and tries < 50 * count:
        batch = rng.dirichlet(np.ones(n), size=max(count, 64))
        tries += batch.shape[0]
        out.extend(batch[batch.max(axis=1) <= cap][: count // 2 - len(out)])
    # ... the rest as random convex combinations of extreme points, which reach the faces
    m = count - len(out)
    for _ in range(m):
        k = min(len(extremes), int(rng.integers(1, n + 1)))
        idx = rng.choice(len(extremes), size=k, replace=False)
        w = rng.dirichlet(np.full(k, 0.3))
        out.append(w @ extremes[idx])
    return np.array(out[:count])


def verify_invariant_set(mapping: Callable, n: int, r: float, num_samples: int = 10_000,
                         seed: int = 0, include_extremes: bool | None = None,
                         strict: bool = True) -> InvariantSetReport:
    """Check ``F(A) subset A`` with strict margin for ``A = {y in simplex : y_i <= 1 - r}``.

    Samples ``num_samples`` points of ``A``; its extreme points are always
    included for ``n <= 5`` and whenever they number at most ``num_samples``.
    Passes iff every image is a simplex point with all components ``< 1 - r``
    (``<= 1 - r`` up to rounding when ``strict`` is false, which lets maps such as the
    identity that touch the boundary of ``A`` pass). The first violating
    sample is returned as the counterexample.
    """
    if not 0.0 < r <= 1.0 - 1.0 / n:
        raise PreconditionError(f"r must lie in (0, 1 - 1/n] = (0, {1 - 1 / n}], got {r}")
    rng = np.random.default_rng(seed)
    extremes = invariant_set_extreme_points(n, r)
    if include_extremes is None:
        include_extremes = n <= 5 or len(extremes) <= num_samples
    pts = [extremes] if include_extremes else []
    remaining = num_samples - (len(extremes) if include_extremes else 0)
    if remaining > 0:
        pts.append(_sample_invariant_set(n, r, remaining, rng, extremes))
    samples = np.vstack(pts)
    cap = 1.0 - r
    worst = -np.inf
    counter = image = None
    for y in samples:
        fy = np.asarray(mapping(y), dtype=float)
        margin = float(fy.max() - cap)
        in_simplex = fy.min() >= 0.0 and abs(fy.sum() - 1.0) <= 1e-9
        if not in_simplex:
            margin = max(margin, 0.0)
        if margin > worst:
            worst = margin
        bad = margin >= 0.0 if strict else margin > SUM_TOL
        if counter is None and (bad or not in_simplex):
            counter, image = y.copy(), fy
    return InvariantSetReport(counter is None, r, len(samples), worst, counter, image)


def verify_cross_fixed_point_relation(y1_star, f1: Callable, f2: Callable, tol: float = 1e-10) -> bool:
    """Companion check for a two-matrix cycle.

    With ``z = f1(y1_star)``: true iff ``z`` is fixed by ``f1 o f2`` and
    ``f2(z)`` returns to ``y1_star``, both within ``tol`` (L-inf).
    """
    y1 = np.asarray(y1_star, dtype=float)
    z = f1(y1)
    back = f2(z)
    return _sup(f1(back) - z) <= tol and _sup(back - y1) <= tol
