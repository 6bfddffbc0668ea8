import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greeneq import CompactSet, ExternalField, FieldPiece, GreenDomain, Segment
from greeneq.errors import GridTooSmall, ProblemTooLarge
from greeneq.freesolve import FreeProblem, brute_force_free, energy_scaling_trace, solve_free
from greeneq.measure import discrete_energy

LOG3 = math.log(3.0)
HP = GreenDomain.half_plane()
K = CompactSet.intervals([[1, 2]])


def const(c):
    return ExternalField.constant(K, c)


def test_two_particles_move_to_endpoints():
    p = FreeProblem(HP, np.linspace(1, 2, 41), const(-1.0), 2, 1.0)
    s = solve_free(p, restarts=4, seed=1)
    assert sorted(s.configuration.points.real) == [1.0, 2.0]
    np.testing.assert_array_equal(s.configuration.masses, [1, 1])
    assert s.objective == pytest.approx(2 * LOG3 - 8, abs=1e-12)
    assert brute_force_free(FreeProblem(HP, np.linspace(1, 2, 15), const(-1.0), 2, 1.0), 2).objective \
        == pytest.approx(2 * LOG3 - 8, abs=1e-12)


def test_nonnegative_field_gives_zero():
    p = FreeProblem(HP, np.linspace(1, 2, 21), const(1.0), 4, 1.0)
    s = solve_free(p, restarts=3, seed=0)
    assert s.objective == 0.0
    assert np.count_nonzero(s.configuration.masses) <= 1
    assert brute_force_free(FreeProblem(HP, [1, 1.5, 2], const(0.5), 2, 1.0), 10).objective == 0.0


def test_three_point_grid_matches_oracle():
    p = FreeProblem(HP, [1, 1.5, 2], const(-1.0), 3, 1.0)
    s = solve_free(p, restarts=4, seed=0)
    bf = brute_force_free(p, 20)
    assert s.objective == pytest.approx(bf.objective, abs=1e-9)


def test_oracle_guards():
    with pytest.raises(GridTooSmall):
        FreeProblem(HP, [1.5], const(-1.0), 2, 1.0)
    with pytest.raises(ProblemTooLarge):
        brute_force_free(FreeProblem(HP, np.linspace(1, 2, 16), const(-1.0), 2, 1.0), 5)
    with pytest.raises(ProblemTooLarge):
        brute_force_free(FreeProblem(HP, np.linspace(1, 2, 10), const(-1.0), 4, 1.0), 5)


def test_positive_masses_distinct_and_deterministic():
    p = FreeProblem(HP, np.linspace(1, 2, 64), const(-1.0), 12, 1.0)
    a = solve_free(p, restarts=3, seed=5)
    b = solve_free(p, restarts=3, seed=5)
    assert a.objective == b.objective
    np.testing.assert_array_equal(a.indices, b.indices)
    pos = a.configuration.masses > 0
    pts = a.configuration.points[pos]
    assert len(set(pts.tolist())) == len(pts)
    assert a.objective <= 0.0
    assert a.objective == pytest.approx(discrete_energy(HP, p.f, a.configuration), rel=1e-12)
    assert all(b <= a_ + 1e-9 * (1 + abs(a_)) for a_, b in zip(a.trace, a.trace[1:]))
    assert 0 in a.near_optimal(1e30)


def test_trace_examples():
    grid = np.linspace(1, 2, 33)
    rows, _ = energy_scaling_trace(HP, const(0.5), 1.0, [2, 4, 8], grid, restarts=2, seed=0)
    assert [r.e_N for r in rows] == [0.0, 0.0, 0.0]
    rows, _ = energy_scaling_trace(HP, const(-1.0), 1.0, [4], grid, restarts=2, seed=0)
    assert len(rows) == 1 and rows[0].e_N_over_N2 <= 0
    with pytest.raises(GridTooSmall):
        energy_scaling_trace(HP, const(-1.0), 1.0, [4, 9], grid)


def test_monotone_in_N_for_nonpositive_field():
    grid = np.linspace(1, 2, 64)
    rows, _ = energy_scaling_trace(HP, const(-1.0), 1.0, list(range(4, 17)), grid, restarts=2, seed=2)
    e = [r.e_N for r in rows]
    assert all(b <= a + 1e-6 for a, b in zip(e, e[1:]))


def test_infinite_field_points_get_no_mass():
    f = ExternalField(K, [FieldPiece(Segment(1, 1.4), value=-1.0)])
    p = FreeProblem(HP, np.linspace(1, 2, 11), f, 3, 1.0)
    s = solve_free(p, restarts=4, seed=0)
    bf = brute_force_free(p, 4)
    assert s.objective == pytest.approx(bf.objective, abs=1e-9)
    on = s.configuration.masses > 0
    assert np.all(s.configuration.points[on].real <= 1.4 + 1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(3, 12), st.lists(st.floats(-3, 1), min_size=2, max_size=2),
       st.sampled_from([0.5, 1.0, 2.0]), st.integers(0, 10_000))
def test_free_matches_oracle(N, n, vals, R, seed):
    n = max(n, N)
    f = ExternalField(K, [FieldPiece(Segment(1, 1.5), value=vals[0]),
                          FieldPiece(Segment(1.5, 2), value=vals[1])])
    p = FreeProblem(HP, np.linspace(1, 2, n), f, N, R)
    s = solve_free(p, restarts=8, seed=seed)
    bf = brute_force_free(p, 2)
    assert s.objective == pytest.approx(bf.objective, abs=1e-9)
