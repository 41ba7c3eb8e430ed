"""Executable checks of the structural results on maps and trajectories.

Every check returns a :class:`CheckResult`. ``worst_violation`` is the
largest amount by which the checked property fails (0 when it holds
everywhere) and ``passed`` is ``worst_violation <= tolerance``. A failing
result always carries a witness.
"""
from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import FriedkinMap, _map, issue_update_via_eigenvector
from .matrixcore import InteractionMatrix
from .switching import (
    CycleMap,
    Schedule,
    Trajectory,
    composed_cycle_map,
    find_fixed_point,
    find_periodic_orbit,
    simulate,
    verify_cross_fixed_point_relation,
    verify_invariant_set,
)

__all__ = [
    "CheckResult",
    "check_simplex",
    "check_simplex_preservation",
    "check_vertex_fixed_points",
    "check_continuity_sampling",
    "lipschitz_bound",
    "check_ordering",
    "check_equivalence",
    "check_invariant_set",
    "check_cross_relation",
    "check_positivity",
    "democratic_limit_check",
    "constant_fixed_point",
    "run_suite",
]

DEFAULT_TOLERANCES = {
    "fixed_point": 1e-12,
    "orbit": 1e-9,
    "democratic": 1e-8,
    "equivalence": 1e-10,
    "cross_relation": 1e-10,
    "simplex": 1e-12,
    "ordering": 1e-9,
    "invariant_r": 0.05,
}


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst_violation: float
    tolerance: float = 0.0
    witness: object = None
    details: dict = field(default_factory=dict)

    @classmethod
    def from_violation(cls, name, worst, tolerance=0.0, witness=None, **details) -> "CheckResult":
        worst = float(worst)
        passed = worst <= tolerance
        return cls(name, passed, worst, tolerance, None if passed else witness, details)

    def to_dict(self) -> dict:
        return _jsonable({
            "name": self.name,
            "passed": self.passed,
            "worst_violation": self.worst_violation,
            "tolerance": self.tolerance,
            "witness": self.witness,
            "details": self.details,
        })


def check_simplex(x, tol: float = 1e-12) -> CheckResult:
    x = np.asarray(x, dtype=float)
    worst = max(0.0, -float(x.min()), abs(float(x.sum()) - 1.0))
    return CheckResult.from_violation("simplex", worst, tol, x)


def _simplex_samples(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform simplex points, a share of them pushed toward vertices and faces."""
    pts = rng.dirichlet(np.ones(n), size=count)
    k = count // 4
    if k:
        eps = 10.0 ** rng.uniform(-8, -1, size=k)
        idx = rng.integers(n, size=k)
        near = pts[:k] * eps[:, None]
        near[np.arange(k), idx] += 1.0 - eps
        pts[:k] = near
        sparse = rng.dirichlet(np.full(n, 0.1), size=k)
        pts[k:2 * k] = sparse / sparse.sum(axis=1, keepdims=True)
    return pts


def check_simplex_preservation(mapping: Callable, n: int, num_samples: int = 1000,
                               seed: int = 0, tol: float = 1e-12) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst, witness = 0.0, None
    for x in _simplex_samples(n, num_samples, rng):
        fx = np.asarray(mapping(x), dtype=float)
        v = max(0.0, -float(fx.min()), abs(float(fx.sum()) - 1.0))
        if v > worst:
            worst, witness = v, {"x": x, "image": fx}
    return CheckResult.from_violation("simplex_preservation", worst, tol, witness, samples=num_samples)


def check_vertex_fixed_points(mapping: Callable, n: int, tol: float = 0.0) -> CheckResult:
    """``map(e_i) == e_i`` for every basis vector; exact by default."""
    worst, witness = 0.0, None
    for i, e in enumerate(np.eye(n)):
        d = float(np.max(np.abs(np.asarray(mapping(e), dtype=float) - e)))
        if not math.isfinite(d):
            d = math.inf
        if d > worst:
            worst, witness = d, {"vertex": i}
    return CheckResult.from_violation("vertex_fixed_points", worst, tol, witness)


def lipschitz_bound(mapping) -> float:
    """Product over the composed steps of ``2 sqrt(2) / min_i c_i``."""
    steps = mapping.steps if isinstance(mapping, CycleMap) else (mapping,)
    return math.prod(2.0 * math.sqrt(2.0) / float(np.min(f.c)) for f in steps)


def _pair_samples(n: int, num_pairs: int, delta: float, rng: np.random.Generator):
    half = num_pairs // 2
    base = rng.dirichlet(np.ones(n), size=num_pairs)
    # half the base points within 1e-3 of a vertex, some exactly on it
    eps = rng.uniform(0.0, 1e-3, size=half)
    eps[: half // 10] = 0.0
    idx = rng.integers(n, size=half)
    d = rng.dirichlet(np.ones(n - 1), size=half)
    for k in range(half):
        p = np.insert(d[k], idx[k], 0.0) * eps[k]
        p[idx[k]] = 1.0 - eps[k]
        base[k] = p
    for x in base:
        z = rng.dirichlet(np.ones(n))
        gap = np.linalg.norm(z - x)
        t = min(1.0, delta * rng.uniform(0.0, 1.0) / gap) if gap > 0 else 0.0
        yield x, (1.0 - t) * x + t * z


def check_continuity_sampling(mapping: Callable, n: int, num_pairs: int = 2000,
                              delta: float = 1e-3, L_bound: float | None = None,
                              seed: int = 0) -> CheckResult:
    """Sampled Lipschitz check ``||F(x) - F(x')||_2 <= L ||x - x'||_2`` for ``||x - x'|| <= delta``.

    Half the pairs sit within 1e-3 of a vertex. ``L_bound`` defaults to
    :func:`lipschitz_bound` of the mapping.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if L_bound is None:
        L_bound = lipschitz_bound(mapping)
    rng = np.random.default_rng(seed)
    worst, witness, ratio = 0.0, None, 0.0
    for x, xp in _pair_samples(n, num_pairs, delta, rng):
        dx = float(np.linalg.norm(x - xp))
        df = float(np.linalg.norm(np.asarray(mapping(x)) - np.asarray(mapping(xp))))
        if dx > 0:
            ratio = max(ratio, df / dx)
        v = df - L_bound * dx
        if v > worst:
            worst, witness = v, {"x": x, "x_prime": xp, "ratio": df / dx if dx else math.inf}
    return CheckResult.from_violation("continuity", worst, 0.0, witness,
                                      L_bound=L_bound, max_observed_ratio=ratio)


def check_ordering(x_star, c, tol: float = 1e-9) -> CheckResult:
    """Pairwise order agreement between a constant-topology fixed point and centralities.

    ``c_i < c_j - tol`` requires ``x_i <= x_j`` (violation ``x_i - x_j``);
    ``|c_i - c_j| <= tol`` requires ``|x_i - x_j| <= tol``.
    """
    x = np.asarray(x_star, dtype=float)
    c = np.asarray(c, dtype=float)
    worst, witness = 0.0, None
    for i in range(x.size):
        for j in range(x.size):
            if i == j:
                continue
            if c[i] < c[j] - tol:
                v = x[i] - x[j]
            elif abs(c[i] - c[j]) <= tol and i < j:
                v = abs(x[i] - x[j]) - tol
            else:
                continue
            if v > worst:
                worst, witness = v, {"i": i, "j": j, "x_i": x[i], "x_j": x[j], "c_i": c[i], "c_j": c[j]}
    return CheckResult.from_violation("ordering", worst, 0.0, witness)


def check_equivalence(C: InteractionMatrix, num_samples: int = 200, seed: int = 0,
                      tol: float = 1e-10) -> CheckResult:
    """Eigenvector route vs closed form on random non-vertex simplex points."""
    f = FriedkinMap.from_matrix(C)
    rng = np.random.default_rng(seed)
    worst, witness = 0.0, None
    for x in rng.dirichlet(np.ones(C.n), size=num_samples):
        a = np.asarray(issue_update_via_eigenvector(x, C))
        d = float(np.max(np.abs(a - _map(x, f.c))))
        if d > worst:
            worst, witness = d, {"x": x}
    return CheckResult.from_violation(f"equivalence[{C.id}]", worst, tol, witness, samples=num_samples)


def check_invariant_set(mapping: Callable, n: int, r: float = 0.05, num_samples: int = 10_000,
                        seed: int = 0, name: str = "invariant_set") -> CheckResult:
    rep = verify_invariant_set(mapping, n, r, num_samples, seed)
    if rep.passed:
        worst = 0.0
    else:
        # inf: the image left the simplex or touched the cap exactly
        worst = rep.worst_margin if rep.worst_margin > 0.0 else math.inf
    witness = None if rep.passed else {"point": rep.counterexample, "image": rep.image}
    return CheckResult.from_violation(name, worst, 0.0, witness, r=r, samples=rep.num_checked,
                                      worst_margin=rep.worst_margin)


def check_cross_relation(schedule: Schedule, orbit, tol: float = 1e-10) -> CheckResult:
    """Companion relations of a periodic orbit given in phase order.

    Each ``y_p`` must be fixed by ``G_p`` and mapped by the phase-``p``
    matrix onto ``y_(p+1)`` (cyclically). For two matrices this is the
    statement that ``F_1(y_1*)`` is fixed by ``F_1 o F_2`` and returns to
    ``y_1*`` under ``F_2``.
    """
    m = len(schedule.ids)
    worst, witness = 0.0, None
    for p in range(m):
        y = np.asarray(orbit[p], dtype=float)
        nxt = np.asarray(orbit[(p + 1) % m], dtype=float)
        step = schedule.maps[schedule.ids[p]](y)
        fixed = composed_cycle_map(schedule, p + 1)(y)
        for label, d in (("companion", step - nxt), ("fixed", fixed - y)):
            v = float(np.max(np.abs(d)))
            if v > worst:
                worst, witness = v, {"phase": p + 1, "relation": label}
    details = {}
    if m == 2:
        f1, f2 = (schedule.maps[i] for i in schedule.ids)
        details["two_step_relation"] = verify_cross_fixed_point_relation(orbit[0], f1, f2, tol)
        if not details["two_step_relation"]:
            worst = max(worst, math.inf)
    return CheckResult.from_violation("cross_fixed_point_relation", worst, tol, witness, **details)


def check_positivity(traj: Trajectory) -> CheckResult:
    """Every self-weight strictly positive at every issue."""
    low = float(traj.states.min())
    s, i = np.unravel_index(int(np.argmin(traj.states)), traj.states.shape)
    worst = 0.0 if low > 0.0 else (math.inf if low == 0.0 else -low)
    return CheckResult.from_violation("positivity", worst, 0.0,
                                      {"issue": int(s) + 1, "individual": int(i) + 1}, min_self_weight=low)


def democratic_limit_check(traj: Trajectory, tol: float = 1e-8) -> CheckResult:
    """Final state within ``tol`` (L-inf) of the democratic point ``1/n``."""
    d = float(np.max(np.abs(traj.final - 1.0 / traj.n)))
    return CheckResult.from_violation("democratic_limit", d, tol, {"final": traj.final,
                                                                   "issue": len(traj)})


def constant_fixed_point(C: InteractionMatrix, tol: float = 1e-12, x0=None):
    """Fixed point of the single-matrix map from ``x0`` (uniform by default)."""
    f = FriedkinMap.from_matrix(C)
    if x0 is None:
        x0 = np.full(C.n, 1.0 / C.n)
    return find_fixed_point(f, x0, tol), f.c


def _named(result: CheckResult, name: str) -> CheckResult:
    return replace(result, name=name)


def run_suite(schedule: Schedule, x1, num_issues: int = 200, tolerances: dict | None = None,
              samples: int = 2000, seed: int = 0) -> list[CheckResult]:
    """Run every applicable check for a schedule and starting point.

    Per matrix: structural assumptions, vertex fixed points, simplex
    preservation, eigenvector/closed-form equivalence, invariant set and the
    ordering of the constant-topology fixed point. Per cycle map (constant or
    periodic schedules): vertex fixed points, invariant set, sampled
    continuity, and the orbit's fixed-point and companion relations. On the
    simulated trajectory: positivity, plus the democratic limit when the
    schedule is in democratic mode.
    """
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    n = schedule.n
    r = tol["invariant_r"]
    results = []
    for k, mid in enumerate(sorted(schedule.maps)):
        C, f = schedule.catalog[mid], schedule.maps[mid]
        rep = C.report
        results.append(CheckResult.from_violation(
            f"assumption_1[{mid}]", 0.0 if rep.satisfies_assumption_1 else 1.0, 0.0,
            rep.to_dict(), **rep.to_dict()))
        results.append(_named(check_vertex_fixed_points(f, n), f"vertex_fixed_points[F:{mid}]"))
        results.append(_named(check_simplex_preservation(f, n, samples, seed + k, tol["simplex"]),
                              f"simplex_preservation[F:{mid}]"))
        results.append(check_equivalence(C, min(samples, 200), seed + k, tol["equivalence"]))
        results.append(check_invariant_set(f, n, r, samples, seed + k, f"invariant_set[F:{mid}]"))
        fp, c = constant_fixed_point(C, tol["fixed_point"])
        order = check_ordering(fp.orbit[0], c, tol["ordering"])
        if not fp.converged:
            order = CheckResult.from_violation("ordering", math.inf, 0.0, {"residual": fp.residual})
        results.append(_named(order, f"ordering[{mid}]"))

    if schedule.kind != "arbitrary":
        m = len(schedule.ids)
        for p in range(1, m + 1):
            g = composed_cycle_map(schedule, p)
            label = f"G{p}:" + "->".join(g.matrix_ids)
            results.append(_named(check_vertex_fixed_points(g, n), f"vertex_fixed_points[{label}]"))
            results.append(check_invariant_set(g, n, r, samples, seed + 100 + p, f"invariant_set[{label}]"))
            results.append(_named(check_continuity_sampling(g, n, max(samples // 2, 10), seed=seed + 200 + p),
                                  f"continuity[{label}]"))
        orbit = find_periodic_orbit(schedule, x1, 1, tol["fixed_point"])
        results.append(CheckResult.from_violation(
            "periodic_orbit", orbit.residual if orbit.converged else math.inf, tol["fixed_point"],
            {"iterations": orbit.iterations}, iterations=orbit.iterations,
            orbit=[list(map(float, y)) for y in orbit.orbit]))
        if m >= 2:
            results.append(check_cross_relation(schedule, orbit.orbit, tol["cross_relation"]))

    traj = simulate(schedule, x1, num_issues)
    results.append(check_positivity(traj))
    if schedule.democratic:
        results.append(democratic_limit_check(traj, tol["democratic"]))
    return results
