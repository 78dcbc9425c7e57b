import numpy as np
import pytest

from stlsynth.encoder import EncoderConfig, encode, leaf_constants
from stlsynth.formula import build_tree, flatten, node_robustness, robustness
from stlsynth.solver.bounds import node_bounds, robustness_bound
from stlsynth.solver.solve import INFEASIBLE, OPTIMAL, branch_and_bound
from stlsynth.system import double_integrator, output_boxes, rollout

from .acceptance_lib import random_instance

SYS = double_integrator()


def _random_rollout(rng, x0, T):
    u = rng.uniform(-0.5, 0.5, size=(T + 1, 2))
    traj = rollout(SYS, x0, u)
    if np.any(np.abs(traj.x[:, 2:]) > 1) or np.any(traj.y < 0) or np.any(traj.y > 15):
        return None
    return traj


@pytest.mark.parametrize("seed", range(10))
def test_boxes_enclose_rollouts(seed):
    rng = np.random.default_rng(seed)
    x0 = np.array([*rng.uniform(2, 13, size=2), 0.0, 0.0])
    boxes = output_boxes(SYS, x0, 8)
    for _ in range(50):
        traj = _random_rollout(rng, x0, 8)
        if traj is None:
            continue
        for t, (lo, hi) in enumerate(boxes):
            assert np.all(traj.y[t] >= lo - 1e-12) and np.all(traj.y[t] <= hi + 1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_node_bounds_dominate_sampled_robustness(seed):
    rng = np.random.default_rng(seed)
    _, f, x0, T = random_instance(rng, max_T=8)
    tree = flatten(build_tree(f))
    ub = node_bounds(tree, output_boxes(SYS, x0, T))
    for _ in range(30):
        traj = _random_rollout(rng, x0, T)
        if traj is None:
            continue
        for node_id, value in node_robustness(tree, traj.y).items():
            assert value <= ub[node_id] + 1e-9
        assert robustness(f, traj.y) <= robustness_bound(tree, SYS, x0, T) + 1e-9


def test_infinite_boxes_give_infinite_bound():
    from stlsynth.formula import Pred, Predicate
    from stlsynth.system import LinearSystem

    sys = LinearSystem(np.eye(1), np.eye(1), np.eye(1), np.zeros((1, 1)))
    tree = build_tree(Pred(Predicate((1.0,), 0.0)))
    assert robustness_bound(tree, sys, [0.0], 0) == pytest.approx(0.0, abs=1e-8)
    later = build_tree(Pred(Predicate((1.0,), 0.0)), 1)
    assert node_bounds(later, output_boxes(sys, [0.0], 1))[later.node_id] == np.inf


@pytest.mark.parametrize("seed", range(8))
def test_reach_leaf_constants_keep_the_optimum(seed):
    _, f, x0, T = random_instance(np.random.default_rng(40 + seed), max_T=6)
    results = {}
    for rule in ("global", "reach"):
        cfg = EncoderConfig(flatten=True, rho_max=1.0, leaf_M=rule)
        model, stats = encode(f, SYS, x0, T, cfg)
        results[rule] = branch_and_bound(model, stats=stats, tighten=False)
    assert results["global"].status == results["reach"].status
    if results["global"].status == OPTIMAL:
        assert results["global"].objective == pytest.approx(results["reach"].objective, abs=1e-6)


def test_reach_leaf_constants_never_exceed_global_M():
    _, f, x0, T = random_instance(np.random.default_rng(2), max_T=8)
    model, _ = encode(f, SYS, x0, T, EncoderConfig(rho_max=1.0))
    M, rho_max = model.meta["M"], model.meta["rho_max"]
    rule = leaf_constants(EncoderConfig(leaf_M="reach"), SYS, x0, T, M, rho_max)
    for node in model.meta["tree"].leaves():
        assert 0.0 <= rule(*node.leaf) <= M


def test_tightening_alone_can_prove_infeasibility():
    from stlsynth.parser import RegionDef, parse

    far = {"R": RegionDef.box("R", 12, 14, 12, 14)}
    f = parse("F[0,3] in(R)", far)
    model, stats = encode(f, SYS, [1, 1, 0, 0], 3, EncoderConfig(rho_max=1.0))
    res = branch_and_bound(model, stats=stats)
    assert res.status == INFEASIBLE and res.nodes == 0
