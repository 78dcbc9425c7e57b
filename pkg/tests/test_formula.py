import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stlsynth.formula import (
    AND, OR, Always, And, Eventually, Or, Pred, Predicate, SignalTooShortError, Until,
    build_tree, count_disjunctions, flatten, horizon, leaf_count, log_binaries, node_robustness,
    predicates, predicted_binaries, robustness, tree_robustness,
)

from .conftest import formulas

A = Pred(Predicate((1.0,), 2.0, "a"))  # y <= 2
B = Pred(Predicate((-1.0,), -1.0, "b"))  # y >= 1


def test_predicate_value_and_negation():
    p = Predicate((1.0, -2.0), 3.0, "p")
    assert p.g((5.0, 1.0)) == 0.0
    n = p.negate()
    assert n.a == (-1.0, 2.0) and n.b == -3.0 and n.name == "!p"
    assert n.negate() == p


def test_predicate_equality_ignores_name():
    assert Predicate((1.0,), 0.0, "x") == Predicate((1,), 0, "y")


def test_interval_validation():
    with pytest.raises(ValueError):
        Always(3, 2, A)
    with pytest.raises(TypeError):
        Eventually(0.5, 2, A)
    with pytest.raises(ValueError):
        And(())


def test_horizon_cases():
    assert horizon(A) == 0
    assert horizon(Always(1, 4, Eventually(0, 2, A))) == 6
    assert horizon(Until(0, 3, A, Always(0, 2, B))) == 5
    assert horizon(And((A, Eventually(2, 7, B)))) == 7


def test_predicates_are_deduplicated_in_order():
    f = And((B, Or((A, B)), Always(0, 2, A)))
    assert predicates(f) == [B.pred, A.pred]


def test_robustness_by_hand():
    y = np.array([[0.0], [1.5], [3.0]])
    assert robustness(A, y) == 2.0
    assert robustness(B, y, 1) == 0.5
    assert robustness(Always(0, 2, A), y) == -1.0
    assert robustness(Eventually(0, 2, B), y) == 2.0
    # B holds from t=1 on, A holds before, so A U B holds with min(2, 0.5)
    assert robustness(Until(0, 2, A, B), y) == 0.5


def test_until_ignores_left_at_the_witness_time():
    y = np.array([[5.0], [1.5]])
    # at t'=0 nothing is required of the left operand
    assert robustness(Until(0, 1, A, Pred(Predicate((1.0,), 10.0))), y) == 5.0


def test_signal_too_short():
    with pytest.raises(SignalTooShortError):
        robustness(Always(0, 3, A), np.zeros((3, 1)))


def test_tree_shape_for_until():
    tree = build_tree(Until(0, 2, A, B))
    assert tree.combination == OR
    assert [len(c.children) for c in tree.children] == [1, 2, 3]
    assert tree.child_times == (0, 1, 2)
    assert all(c.combination == AND for c in tree.children)


def test_node_ids_are_preorder():
    tree = build_tree(And((A, Eventually(0, 2, B))))
    ids = [n.node_id for n in tree.walk()]
    assert ids == list(range(tree.size()))


def test_leaf_times_shift_with_t0():
    tree = build_tree(Eventually(1, 2, A), t0=3)
    assert sorted(n.leaf[1] for n in tree.leaves()) == [4, 5]


def test_disjunction_counts_follow_children():
    tree = build_tree(And((Always(0, 3, A), Eventually(0, 3, B))))
    assert count_disjunctions(tree) == [4]
    assert predicted_binaries(tree) == 3
    assert leaf_count(tree) == 8


@pytest.mark.parametrize("n, bits", [(1, 1), (2, 2), (3, 2), (4, 3), (7, 3), (8, 4)])
def test_log_binaries(n, bits):
    assert log_binaries(n) == bits == math.ceil(math.log2(n + 1))


def test_flatten_splices_same_type_children():
    nested = build_tree(Or((A, Or((B, A)))))
    assert count_disjunctions(nested) == [2, 2]
    assert count_disjunctions(flatten(nested)) == [3]


def test_flatten_keeps_mixed_nesting():
    tree = build_tree(Or((A, And((A, Or((B, A)))))))
    assert count_disjunctions(flatten(tree)) == count_disjunctions(tree)


@given(formulas(), st.integers(0, 2**31))
def test_tree_robustness_matches_recursion(f, seed):
    y = np.random.default_rng(seed).uniform(-5, 5, size=(horizon(f) + 1, 2))
    tree = build_tree(f)
    assert tree_robustness(tree, y) == robustness(f, y)
    assert node_robustness(tree, y)[tree.node_id] == robustness(f, y)


@given(formulas(), st.integers(0, 2**31))
def test_flatten_preserves_robustness_exactly(f, seed):
    y = np.random.default_rng(seed).uniform(-5, 5, size=(horizon(f) + 1, 2))
    tree = build_tree(f)
    assert tree_robustness(flatten(tree), y) == tree_robustness(tree, y)


@given(formulas())
def test_flatten_is_idempotent_and_never_adds_binaries(f):
    tree = build_tree(f)
    flat = flatten(tree)
    assert flatten(flat) == flat
    assert predicted_binaries(flat) <= predicted_binaries(tree)
    assert leaf_count(flat) == leaf_count(tree)
