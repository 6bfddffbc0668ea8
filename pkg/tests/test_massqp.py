import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greeneq import CompactSet, ExternalField, FieldPiece, GreenDomain, Segment
from greeneq.kernel import KernelMatrix
from greeneq.errors import ProblemTooLarge, SingularMatrix
from greeneq.massqp import (Infeasible, MassProblem, brute_force_masses, coordinate_descent,
                           interior_linear_solve, kkt_residual, mass_partial, solve_masses)

LOG3 = math.log(3.0)
K = CompactSet.intervals([[1, 2]])
HP = GreenDomain.half_plane()


def prob(c=-1.0, R=1.0, nodes=(1, 2)):
    return MassProblem.from_nodes(HP, list(nodes), ExternalField.constant(K, c), R)


def test_partial_examples():
    p = prob()
    assert mass_partial(p, [0, 0], 0) == pytest.approx(-4.0)
    assert mass_partial(p, [0, 1], 0) == pytest.approx(2 * LOG3 - 4)
    assert mass_partial(prob(0.0), [0, 0], 1) == 0.0


def test_solve_examples():
    s = solve_masses(prob())
    np.testing.assert_array_equal(s.masses, [1, 1])
    assert s.objective == pytest.approx(2 * LOG3 - 8, abs=1e-14)
    assert s.kkt_residual == 0.0
    s0 = solve_masses(prob(0.0))
    np.testing.assert_array_equal(s0.masses, [0, 0])
    assert s0.objective == 0.0


def test_R5_global_minimum_is_a_vertex():
    # the interior stationary point is a saddle; a vertex does strictly better
    p = prob(R=5.0)
    s = solve_masses(p, starts=8, seed=3)
    bf = brute_force_masses(p, 200)
    assert s.objective == pytest.approx(-20.0)
    assert sorted(s.masses) == [0.0, 5.0]
    assert bf.objective == pytest.approx(-20.0)
    v = interior_linear_solve(p)
    assert p.objective(v) == pytest.approx(-8 / LOG3)
    assert s.objective < p.objective(v)


def test_kkt_examples():
    p5 = prob(R=5.0)
    v = np.full(2, 2 / LOG3)
    assert kkt_residual(p5, v)[1] <= 1e-8
    assert kkt_residual(prob(), [1, 1])[1] == 0.0
    assert kkt_residual(prob(1.0), [0, 0])[1] == 0.0
    res, mx = kkt_residual(prob(), [0, 0])
    np.testing.assert_allclose(res, [4, 4])


def test_interior_linear_solve_examples():
    v = interior_linear_solve(prob(R=5.0))
    np.testing.assert_allclose(v, 2 / LOG3, rtol=1e-14)
    out = interior_linear_solve(prob(R=1.0))
    assert isinstance(out, Infeasible) and out.indices == (0, 1)
    out = interior_linear_solve(prob(0.0))
    assert isinstance(out, Infeasible)
    np.testing.assert_array_equal(out.v, 0)


def test_singular_matrix():
    G = np.zeros((2, 2))
    p = MassProblem(KernelMatrix(np.array([1, 2], dtype=complex), G), [-1.0, -1.0], 2, 1.0)
    with pytest.raises(SingularMatrix):
        interior_linear_solve(p)


def test_brute_force_examples():
    assert brute_force_masses(prob(), 100).objective == pytest.approx(2 * LOG3 - 8, abs=1e-3)
    assert brute_force_masses(prob(0.0), 20).objective == 0.0
    with pytest.raises(ProblemTooLarge):
        brute_force_masses(prob(nodes=(1, 1.2, 1.4, 1.6, 1.8)), 5)


def test_infinite_field_freezes_mass():
    f = ExternalField(K, [FieldPiece(Segment(1, 1.5), value=-1.0)])
    p = MassProblem.from_nodes(HP, [1.2, 1.8], f, 1.0)
    s = solve_masses(p)
    assert s.masses[1] == 0.0 and s.masses[0] == 1.0
    assert s.objective == pytest.approx(-4.0)
    assert brute_force_masses(p, 10).objective == pytest.approx(-4.0)


def test_multistart_is_deterministic():
    nodes = np.linspace(1, 2, 12)
    p = MassProblem.from_nodes(HP, nodes, ExternalField.constant(K, -1.0), 2.0)
    a = solve_masses(p, starts=5, seed=11)
    b = solve_masses(p, starts=5, seed=11)
    np.testing.assert_array_equal(a.masses, b.masses)
    assert a.objective <= min(a.local_objectives)


def test_sweep_assertion_holds_with_inf_entries():
    G = np.array([[0, math.inf, 1.0], [math.inf, 0, 1.0], [1.0, 1.0, 0]])
    F = np.array([-3.0, -3.0, -0.5])
    m, sweeps, ok = coordinate_descent(G, F, 1.0, np.zeros(3), 1e-12, 20)
    assert ok
    assert m[0] * m[1] == 0.0


problems = st.tuples(
    st.lists(st.floats(1.0, 2.0), min_size=1, max_size=3, unique=True),
    st.floats(-3.0, 1.0),
    st.floats(0.2, 4.0),
)


@settings(max_examples=60, deadline=None)
@given(problems)
def test_solver_vs_brute_force(data):
    nodes, c, R = data
    if len(nodes) > 1 and np.min(np.diff(np.sort(nodes))) < 1e-3:
        return
    p = prob(c, R, nodes)
    s = solve_masses(p, starts=4, seed=0)
    bf = brute_force_masses(p, 200 if len(nodes) <= 2 else 40)
    assert s.objective <= 0.0
    assert s.objective <= bf.objective + 1e-2 * (1 + abs(bf.objective))
    assert s.kkt_residual <= 1e-6 * (1 + p.F_norm())


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(1.0, 2.0), min_size=2, max_size=10, unique=True), st.floats(-3, 3), st.floats(0.2, 4.0),
       st.integers(0, 1000))
def test_solver_first_order_and_nonpositive(nodes, c, R, seed):
    if np.min(np.diff(np.sort(nodes))) < 1e-3:
        return
    rng = np.random.default_rng(seed)
    f = ExternalField(K, [FieldPiece(Segment(1, 2), poly=(c, rng.normal()))])
    p = MassProblem.from_nodes(HP, nodes, f, R)
    s = solve_masses(p, starts=2, seed=seed)
    assert s.objective <= 0.0
    if s.converged:
        assert s.kkt_residual <= 1e-6 * (1 + p.F_norm())
    v = interior_linear_solve(p) if np.linalg.cond(p.G.entries) < 1e12 else None
    if isinstance(v, np.ndarray):
        assert kkt_residual(p, v)[1] <= 1e-8 * (1 + p.F_norm())
        assert s.objective <= p.objective(v) + 1e-9
