import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degroot_friedkin.dynamics import FriedkinMap, friedkin_map
from degroot_friedkin.errors import PreconditionError, ScheduleError
from degroot_friedkin.matrixcore import InteractionMatrix, dominant_left_eigenvector, random_interaction_matrix
from degroot_friedkin.switching import (
    Schedule,
    StackedState,
    Trajectory,
    composed_cycle_map,
    detect_periodic_orbit,
    find_fixed_point,
    find_periodic_orbit,
    invariant_set_extreme_points,
    lift,
    simulate,
    stacked_step,
    unlift,
    verify_cross_fixed_point_relation,
    verify_invariant_set,
)

from conftest import ASYM3, STAR


def interior(n, seed):
    return np.random.default_rng(seed).dirichlet(np.ones(n))


@pytest.fixture(scope="module")
def pair(catalog):
    return Schedule.periodic(catalog, ["C1", "C2"])


@pytest.fixture(scope="module")
def pair_orbit(pair):
    return find_periodic_orbit(pair, interior(8, 1))


# -- schedules ----------------------------------------------------------------

def test_schedule_rejects_unknown_id(catalog):
    with pytest.raises(ScheduleError, match="unknown"):
        Schedule.periodic(catalog, ["C1", "C9"])


def test_schedule_rejects_mixed_sizes(catalog):
    with pytest.raises(ScheduleError, match="share n"):
        Schedule.periodic(catalog, ["C1", "S1"])


def test_schedule_shape_rules(catalog):
    with pytest.raises(ScheduleError):
        Schedule.periodic(catalog, ["C1"])
    with pytest.raises(ScheduleError):
        Schedule("constant", catalog, ("C1", "C2"))
    with pytest.raises(ScheduleError):
        Schedule("sometimes", catalog, ("C1",))
    with pytest.raises(ScheduleError):
        Schedule.constant(catalog)


def test_democratic_mode_gate(catalog):
    Schedule.arbitrary(catalog, ["C4", "C5"], democratic=True)
    with pytest.raises(ScheduleError, match="doubly stochastic"):
        Schedule.arbitrary(catalog, ["C1", "C4"], democratic=True)
    with pytest.raises(ScheduleError):
        Schedule("periodic", catalog, ("C4", "C5"), democratic=True)


def test_realize_periodic_and_arbitrary(catalog):
    per = Schedule.periodic(catalog, ["C1", "C2", "C3"])
    assert per.realize(7) == ("C1", "C2", "C3", "C1", "C2", "C3", "C1")
    assert per.period == 3
    arb = Schedule.arbitrary(catalog, ["C4", "C5"], seed=9)
    assert arb.period is None
    long = arb.realize(50)
    assert arb.realize(20) == long[:20]
    assert set(long) == {"C4", "C5"}
    seq = Schedule.arbitrary(catalog, sequence=["C5", "C4", "C4"])
    assert seq.realize(3) == ("C5", "C4", "C4")
    with pytest.raises(ScheduleError):
        seq.realize(4)


def test_schedule_from_matrix_list(asym3):
    other = InteractionMatrix(asym3.entries, id="asym3")
    with pytest.raises(ScheduleError, match="duplicate"):
        Schedule.periodic([asym3, other])
    assert Schedule.constant(asym3).ids == ("asym3",)


# -- simulate -------------------------------------------------------------------

def test_simulate_records_from_first_issue(pair):
    x1 = interior(8, 4)
    traj = simulate(pair, x1, 5)
    assert len(traj) == 5
    np.testing.assert_array_equal(traj.x(1), x1)
    assert traj.matrix_ids == ("C1", "C2", "C1", "C2", "C1")
    F1, F2 = pair.maps["C1"], pair.maps["C2"]
    np.testing.assert_array_equal(traj.x(2), F1(x1))
    np.testing.assert_array_equal(traj.x(3), F2(F1(x1)))
    assert list(traj.issues) == [1, 2, 3, 4, 5]
    with pytest.raises(IndexError):
        traj.x(6)


def test_simulate_preconditions(pair, catalog):
    with pytest.raises(PreconditionError):
        simulate(pair, np.eye(8)[0], 10)
    with pytest.raises(PreconditionError):
        simulate(pair, np.full(8, 0.2), 10)
    with pytest.raises(PreconditionError):
        simulate(pair, interior(8, 0), 0)
    star = InteractionMatrix(STAR, id="star")
    with pytest.raises(PreconditionError, match="star"):
        simulate(Schedule.constant(star), [0.2, 0.3, 0.5], 3)


def test_constant_doubly_stochastic_converges_monotonically(catalog):
    traj = simulate(Schedule.constant(catalog, "C4"), interior(8, 6), 60)
    dev = np.abs(traj.states - 1 / 8).max(axis=1)
    assert np.all(np.diff(dev) <= 1e-15)
    assert dev[-1] <= 1e-12


def test_degenerate_period_matches_constant(catalog):
    x1 = interior(8, 7)
    a = simulate(Schedule.periodic(catalog, ["C1", "C1"]), x1, 80)
    b = simulate(Schedule.constant(catalog, "C1"), x1, 80)
    np.testing.assert_array_equal(a.states, b.states)


def test_arbitrary_doubly_stochastic_is_democratic(catalog):
    sched = Schedule.arbitrary(catalog, ["C4", "C5"], seed=3, democratic=True)
    traj = simulate(sched, interior(8, 3), 200)
    after = np.abs(traj.states[99:] - 1 / 8).max()
    assert after <= 1e-8
    assert traj.metadata["realized_sequence"] == list(traj.matrix_ids)


def test_trajectory_csv_roundtrip(tmp_path, pair):
    traj = simulate(pair, interior(8, 2), 12)
    path = tmp_path / "t.csv"
    text = traj.to_csv(path)
    assert text.splitlines()[0] == "issue,matrix_id," + ",".join(f"x_{i}" for i in range(1, 9))
    back = Trajectory.from_csv(path)
    np.testing.assert_array_equal(back.states, traj.states)
    assert back.matrix_ids == traj.matrix_ids


# -- composed maps ----------------------------------------------------------------

def test_cycle_map_order(pair):
    F1, F2 = pair.maps["C1"], pair.maps["C2"]
    x = interior(8, 11)
    G1, G2 = composed_cycle_map(pair, 1), composed_cycle_map(pair, 2)
    assert G1.matrix_ids == ("C1", "C2") and G2.matrix_ids == ("C2", "C1")
    np.testing.assert_array_equal(G1(x), F2(F1(x)))
    np.testing.assert_array_equal(G2(x), F1(F2(x)))
    with pytest.raises(PreconditionError):
        composed_cycle_map(pair, 3)
    with pytest.raises(PreconditionError):
        composed_cycle_map(pair, 0)


def test_cycle_map_vertices(pair):
    for p in (1, 2):
        G = composed_cycle_map(pair, p)
        for i in range(8):
            assert np.array_equal(G(np.eye(8)[i]), np.eye(8)[i])


def test_degenerate_doubly_stochastic_cycle_fixes_uniform(catalog):
    G = composed_cycle_map(Schedule.periodic(catalog, ["C4", "C4"]), 1)
    np.testing.assert_allclose(G(np.full(8, 1 / 8)), 1 / 8, atol=1e-15)


def test_three_cycle_against_explicit_calls(catalog):
    sched = Schedule.periodic(catalog, ["C1", "C2", "C3"])
    cs = [dominant_left_eigenvector(catalog[i]).values for i in ("C1", "C2", "C3")]
    for seed in range(5):
        x = interior(8, seed)
        for p in (1, 2, 3):
            y = x
            for k in range(3):
                y = friedkin_map(y, cs[(p - 1 + k) % 3]).values
            np.testing.assert_allclose(composed_cycle_map(sched, p)(x), y, atol=1e-15)


def test_arbitrary_schedule_has_no_cycle_map(catalog):
    with pytest.raises(ScheduleError):
        composed_cycle_map(Schedule.arbitrary(catalog, ["C4", "C5"]), 1)


# -- lift ---------------------------------------------------------------------------

def test_lift_blocks(pair):
    traj = simulate(pair, interior(8, 5), 2)
    y = lift([traj.x(1), traj.x(2)], M=2)
    assert y.M == 2
    np.testing.assert_array_equal(y.blocks[0], traj.x(1))
    np.testing.assert_array_equal(y.as_vector(), np.concatenate([traj.x(1), traj.x(2)]))
    with pytest.raises(PreconditionError):
        lift([traj.x(1)], M=2)
    with pytest.raises(PreconditionError):
        StackedState((np.full(3, 0.5),))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.integers(3, 9), st.integers(0, 2**31 - 1))
def test_lift_roundtrip(M, n, seed):
    rng = np.random.default_rng(seed)
    seg = [rng.dirichlet(np.ones(n)) for _ in range(M)]
    back = unlift(lift(seg, M))
    for a, b in zip(seg, back):
        assert np.array_equal(a, b)


@pytest.mark.parametrize("ids", [["C1", "C2"], ["C1", "C2", "C3"]])
def test_stacked_step_commutes_with_simulation(catalog, ids):
    sched = Schedule.periodic(catalog, ids)
    M = len(ids)
    traj = simulate(sched, interior(8, 8), 4 * M)
    for s in range(3):
        y = lift([traj.x(M * s + k + 1) for k in range(M)], M)
        later = lift([traj.x(M * (s + 1) + k + 1) for k in range(M)], M)
        stepped = stacked_step(sched, y)
        assert np.max(np.abs(stepped.as_vector() - later.as_vector())) <= 1e-12


# -- fixed points and orbits --------------------------------------------------------

def test_fixed_point_doubly_stochastic(catalog):
    F = FriedkinMap.from_matrix(catalog["C5"])
    rep = find_fixed_point(F, interior(8, 1))
    assert rep.converged and rep.residual <= 1e-12
    np.testing.assert_allclose(rep.orbit[0], 1 / 8, atol=1e-12)


def test_fixed_point_degenerate_cycle_matches_constant(catalog):
    F = FriedkinMap.from_matrix(catalog["C1"])
    G = composed_cycle_map(Schedule.periodic(catalog, ["C1", "C1"]), 1)
    a = find_fixed_point(F, interior(8, 2))
    b = find_fixed_point(G, interior(8, 3))
    assert a.converged and b.converged
    assert np.max(np.abs(a.orbit[0] - b.orbit[0])) <= 1e-11


def test_fixed_point_independent_of_start(pair):
    G = composed_cycle_map(pair, 1)
    a = find_fixed_point(G, interior(8, 1))
    b = find_fixed_point(G, interior(8, 2))
    assert a.converged and b.converged
    assert a.residual <= 1e-12
    assert np.max(np.abs(a.orbit[0] - b.orbit[0])) <= 1e-8


def test_fixed_point_rejects_vertex_and_reports_failure(pair):
    G = composed_cycle_map(pair, 1)
    with pytest.raises(PreconditionError):
        find_fixed_point(G, np.eye(8)[3])
    rep = find_fixed_point(G, interior(8, 1), max_iter=2)
    assert not rep.converged and rep.iterations == 2


def test_fixed_point_value_against_frozen_reference(pair_orbit):
    # reference from an independent run: first two decimals of y1*
    y1 = pair_orbit.orbit[0]
    np.testing.assert_allclose(
        y1, [0.1119, 0.1046, 0.2281, 0.2325, 0.0266, 0.2768, 0.0072, 0.0123], atol=1e-4
    )


def test_periodic_orbit_companions(pair, pair_orbit):
    y1, y2 = pair_orbit.orbit
    F1, F2 = pair.maps["C1"], pair.maps["C2"]
    assert pair_orbit.converged
    np.testing.assert_array_equal(y2, F1(y1))
    assert np.max(np.abs(F2(y2) - y1)) <= 1e-12
    assert np.all(y1 > 0) and np.all(y2 > 0)
    # orbit from phase 2 lists the same points in phase order
    rep2 = find_periodic_orbit(pair, interior(8, 9), phase=2)
    assert rep2.converged
    assert np.max(np.abs(rep2.orbit[0] - y1)) <= 1e-10
    assert np.max(np.abs(rep2.orbit[1] - y2)) <= 1e-10


def test_orbit_report_json(pair_orbit):
    import json

    doc = json.loads(pair_orbit.to_json())
    assert doc["converged"] is True
    assert len(doc["orbit"]) == 2 and len(doc["orbit"][0]) == 8


def test_detect_orbit_at_constant_fixed_point(catalog):
    F = FriedkinMap.from_matrix(catalog["C2"])
    x_star = find_fixed_point(F, interior(8, 0)).orbit[0]
    traj = simulate(Schedule.constant(catalog, "C2"), x_star, 80)
    rep = detect_periodic_orbit(traj, 1)
    assert rep.converged
    assert np.max(np.abs(rep.orbit[0] - x_star)) <= 1e-11


def test_detect_orbit_period_two(pair):
    traj = simulate(pair, interior(8, 10), 150)
    rep = detect_periodic_orbit(traj, 2)
    assert rep.converged and rep.residual <= 1e-9
    y1, y2 = rep.orbit
    F1, F2 = pair.maps["C1"], pair.maps["C2"]
    assert np.max(np.abs(F1(y1) - y2)) <= 1e-9
    assert np.max(np.abs(F2(y2) - y1)) <= 1e-9


def test_detect_orbit_arbitrary_democratic(catalog):
    sched = Schedule.arbitrary(catalog, ["C4", "C5"], seed=1, democratic=True)
    traj = simulate(sched, interior(8, 1), 200)
    rep = detect_periodic_orbit(traj, 1)
    assert rep.converged
    np.testing.assert_allclose(rep.orbit[0], 1 / 8, atol=1e-9)


def test_detect_orbit_rejects_short_trajectory(pair):
    traj = simulate(pair, interior(8, 1), 52)
    with pytest.raises(PreconditionError):
        detect_periodic_orbit(traj, 2)


def test_detect_orbit_not_converged_for_random_switching(catalog):
    traj = simulate(Schedule.arbitrary(catalog, ["C1", "C2", "C3"], seed=5), interior(8, 1), 200)
    rep = detect_periodic_orbit(traj, 2)
    assert not rep.converged and rep.residual > 1e-3


def test_phase_consistency(pair, pair_orbit):
    y1, y2 = pair_orbit.orbit
    traj = simulate(pair, y1, 100)
    odd = traj.states[0::2]
    even = traj.states[1::2]
    assert np.abs(odd - y1).max() <= 1e-11
    assert np.abs(even - y2).max() <= 1e-11


# -- invariant set -------------------------------------------------------------------

def test_extreme_points():
    pts = invariant_set_extreme_points(4, 0.1)
    # one coordinate at 0.9, one at 0.1: 4 * 3 arrangements
    assert pts.shape == (12, 4)
    np.testing.assert_allclose(pts.sum(axis=1), 1.0)
    assert np.allclose(np.sort(pts, axis=1)[:, -2:], [0.1, 0.9])
    assert invariant_set_extreme_points(4, 0.75).shape == (1, 4)
    assert invariant_set_extreme_points(3, 0.5).shape == (3, 3)


def test_invariant_set_doubly_stochastic_small_r(catalog):
    F = FriedkinMap.from_matrix(catalog["S3"])
    rep = verify_invariant_set(F, 4, 0.1, num_samples=2000)
    assert rep.passed and rep.worst_margin < 0 and rep.counterexample is None


def test_invariant_set_absurd_r_fails(catalog):
    F = FriedkinMap.from_matrix(catalog["S1"])
    rep = verify_invariant_set(F, 4, 0.75, num_samples=10)
    assert not rep.passed
    np.testing.assert_allclose(rep.counterexample, 0.25)
    assert rep.image.max() > 0.25


def test_invariant_set_identity():
    for r in (0.05, 0.3, 0.8):
        assert verify_invariant_set(lambda y: y, 5, r, num_samples=500, strict=False).passed
    # the identity keeps extreme points on the boundary of the set, so the strict margin fails
    rep = verify_invariant_set(lambda y: y, 5, 0.3, num_samples=500)
    assert not rep.passed and rep.worst_margin == pytest.approx(0.0, abs=1e-15)
    assert verify_invariant_set(lambda y: 0.5 * y + 0.1, 5, 0.3, num_samples=500).passed


def test_invariant_set_bad_r():
    with pytest.raises(PreconditionError):
        verify_invariant_set(lambda y: y, 4, 0.0)
    with pytest.raises(PreconditionError):
        verify_invariant_set(lambda y: y, 4, 0.8)


def _grid_margin(F, r, step=0.0025):
    # brute-force sup of max_i F_i - (1 - r) over a grid of the n=3 set
    cap = 1.0 - r
    worst = -np.inf
    for a in np.arange(0.0, cap + 1e-12, step):
        for b in np.arange(0.0, min(cap, 1.0 - a) + 1e-12, step):
            y = np.array([a, b, 1.0 - a - b])
            if y[2] <= cap + 1e-12 and y[2] >= 0:
                worst = max(worst, float(F(y).max() - cap))
    return worst


@pytest.mark.parametrize("r", [0.05, 0.15, 0.3, 0.45, 0.6])
def test_invariant_set_against_grid_oracle(r):
    F = FriedkinMap.from_matrix(InteractionMatrix(ASYM3, id="a"))
    oracle = _grid_margin(F, r)
    rep = verify_invariant_set(F, 3, r, num_samples=2000)
    assert abs(oracle) > 1e-3  # r values sit away from the threshold
    assert rep.passed == (oracle < 0)
    if rep.passed:
        assert rep.worst_margin <= oracle + 1e-3


# -- cross relation --------------------------------------------------------------------

def test_cross_relation_pair(pair, pair_orbit):
    F1, F2 = pair.maps["C1"], pair.maps["C2"]
    y1 = pair_orbit.orbit[0]
    assert verify_cross_fixed_point_relation(y1, F1, F2)
    # the other companion candidate F2(y1) is not an F4 fixed point
    z_wrong = F2(y1)
    assert np.max(np.abs(F1(F2(z_wrong)) - z_wrong)) > 1e-3


def test_cross_relation_degenerate(catalog):
    F = FriedkinMap.from_matrix(catalog["C3"])
    x_star = find_fixed_point(F, interior(8, 0)).orbit[0]
    assert verify_cross_fixed_point_relation(x_star, F, F)


def test_cross_relation_vertex(pair):
    F1, F2 = pair.maps["C1"], pair.maps["C2"]
    assert verify_cross_fixed_point_relation(np.eye(8)[5], F1, F2, tol=0.0)


def test_cross_relation_fails_off_orbit(pair):
    F1, F2 = pair.maps["C1"], pair.maps["C2"]
    assert not verify_cross_fixed_point_relation(interior(8, 0), F1, F2)


# -- properties -------------------------------------------------------------------------

@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 7))
def test_positivity_along_random_trajectories(seed, n):
    cat = {f"R{k}": random_interaction_matrix(n, 0.5, seed * 3 + k, id=f"R{k}") for k in range(3)}
    sched = Schedule.arbitrary(cat, seed=seed)
    traj = simulate(sched, interior(n, seed), 100)
    assert traj.states.min() > 0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_democratic_limit_any_sequence(seed):
    cat = {f"D{k}": random_interaction_matrix(6, 0.5, seed + 17 * k, doubly_stochastic=True, id=f"D{k}")
           for k in range(3)}
    sched = Schedule.arbitrary(cat, seed=seed, democratic=True)
    traj = simulate(sched, interior(6, seed), 200)
    assert np.abs(traj.final - 1 / 6).max() <= 1e-8
