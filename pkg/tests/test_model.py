import numpy as np
import pytest

from stlsynth.model import EQ, LE, MilpModel


def small():
    m = MilpModel()
    x = m.add_var("x", 0, 2)
    b = m.add_binary("b")
    m.add_constraint({x: 1.0, b: 1.0}, LE, 2.0, "cap")
    m.add_constraint({x: 1.0}, ">=", 0.5, "floor")
    m.set_objective({x: -1.0}, constant=3.0)
    return m, x, b


def test_counts_and_lookup():
    m, x, b = small()
    assert (m.num_vars, m.binary_count(), m.continuous_count(), m.constraint_count()) == (2, 1, 1, 2)
    assert m.var("b") == b and m.has_var("x") and not m.has_var("y")
    assert m.binary_ids() == [b]


def test_ge_rows_are_stored_negated():
    m, x, _ = small()
    con = m.constraints[1]
    assert con.sense == LE and con.coeffs == ((x, -1.0),) and con.rhs == -0.5


def test_duplicates_and_bad_input_rejected():
    m, x, _ = small()
    with pytest.raises(ValueError):
        m.add_var("x")
    with pytest.raises(ValueError):
        m.add_constraint({x: 1}, EQ, 0, "cap")
    with pytest.raises(ValueError):
        m.add_constraint({x: 1}, "<", 0)
    with pytest.raises(KeyError):
        m.add_constraint({7: 1}, EQ, 0)
    with pytest.raises(ValueError):
        m.add_var("z", 2, 1)
    with pytest.raises(ValueError):
        m.add_var("w", role="nonsense")


def test_violations_and_objective():
    m, x, b = small()
    assert m.objective_value([1.0, 0.0]) == 2.0
    assert m.violations([1.9, 1.0]) == [("cap", pytest.approx(0.9))]
    assert m.violations([0.2, 0.0])[0][0] == "floor"
    assert m.bound_violations([3.0, 0.0]) == [("x", 1.0)]


def test_dense_arrays():
    m, x, b = small()
    d = m.dense()
    np.testing.assert_array_equal(d.A, [[1, 1], [-1, 0]])
    np.testing.assert_array_equal(d.b, [2, -0.5])
    assert not d.is_eq.any() and d.offset == 3.0
    assert d.binaries.tolist() == [b]
    m.set_objective({x: 1.0}, {x: 1.0})
    assert not m.is_linear()
    with pytest.raises(ValueError):
        m.dense()
