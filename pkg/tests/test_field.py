import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greeneq import CompactSet, ExternalField, FieldPiece, Segment, field_eval, field_min
from greeneq.errors import AllInfinite, PointOutsideK


@pytest.fixture
def split_field():
    K = CompactSet.intervals([[0, 1], [2, 3]])
    return ExternalField(K, [FieldPiece(Segment(0, 1), value=0.0), FieldPiece(Segment(2, 3), value=-1.0)])


def test_constant_field(f_minus1):
    assert field_eval(f_minus1, 1.5) == -1.0


def test_split_field_value(split_field):
    assert field_eval(split_field, 2.5) == -1.0
    assert field_eval(split_field, 0.5) == 0.0


def test_default_infinite_outside_pieces(K12):
    f = ExternalField(K12, [FieldPiece(Segment(1, 1.5), value=0.0)])
    assert field_eval(f, 1.8) == math.inf
    assert field_eval(f, 1.5) == 0.0


def test_point_off_K_rejected(f_minus1):
    with pytest.raises(PointOutsideK):
        field_eval(f_minus1, 2.5)


def test_field_min_examples(f_minus1, split_field, K12):
    grid = K12.uniform_grid(11)
    assert field_min(f_minus1, grid) == (-1.0, grid[0])
    g2 = np.concatenate([np.linspace(0, 1, 11), np.linspace(2, 3, 11)])
    beta, arg = field_min(split_field, g2)
    assert beta == -1.0 and arg == 2.0
    lin = ExternalField(K12, [FieldPiece(Segment(1, 2), poly=(-0.5, 1.0))])
    beta, arg = field_min(lin, np.linspace(1, 2, 101))
    assert beta == pytest.approx(-0.5) and arg == 1.0


def test_all_infinite_grid(K12):
    f = ExternalField(K12, [FieldPiece(Segment(1, 1.5), value=0.0)])
    with pytest.raises(AllInfinite):
        field_min(f, [1.7, 1.8, 1.9])


def test_junction_takes_smaller_value(split_field):
    K = CompactSet.intervals([[0, 2]])
    f = ExternalField(K, [FieldPiece(Segment(0, 1), value=2.0), FieldPiece(Segment(1, 2), value=-3.0)])
    assert field_eval(f, 1.0) == -3.0


def test_not_admissible(K12):
    with pytest.raises(ValueError):
        ExternalField(K12, [FieldPiece(Segment(1, 2), value=math.inf)])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=5), st.integers(3, 40))
def test_refinement_lowers_min(coeffs, n):
    K = CompactSet.intervals([[1, 2]])
    f = ExternalField(K, [FieldPiece(Segment(1, 2), poly=tuple(coeffs))])
    coarse = np.linspace(1, 2, n)
    fine = np.linspace(1, 2, 2 * n - 1)  # contains the coarse grid
    assert field_min(f, fine)[0] <= field_min(f, coarse)[0]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=4), st.integers(0, 20))
def test_piecewise_constant_exact_min(values, extra):
    bounds = [[2 * i + 1, 2 * i + 2] for i in range(len(values))]
    K = CompactSet.intervals(bounds)
    f = ExternalField(K, [FieldPiece(Segment(a, b), value=v) for (a, b), v in zip(bounds, values)])
    grid = np.concatenate([[a + 0.5 for a, _ in bounds], K.uniform_grid(extra + 2)])
    assert field_min(f, grid)[0] == min(values)
