import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from treehash import CostParams, absorb_finish_time, call_count
from treehash.scheduler import (
    SimulationError,
    critical_path,
    simulate,
    stream_finish_times,
    stream_items,
)
from treehash.topology import (
    InputRef,
    NodeType,
    TreeNode,
    TreeTopology,
    build_bounded,
    build_height2,
    build_same_depth_base,
    build_single_node,
    build_unrestricted,
    from_nested,
)


def is_tight(tree, params, node):
    base = max(stream_finish_times(tree, params))
    return max(stream_finish_times(tree, params, delay={node: 1})) > base


def test_eight_blocks():
    s = simulate(build_unrestricted(8, 1, 2), CostParams(1))
    assert (s.makespan, s.processor_count, s.total_calls) == (4, 4, 11)
    # round-by-round picture: the root absorbs c1 in round 3, c3 in round 4
    assert s.matrix() == [
        ["m3", "m7", "m5", "m1"],
        ["m4", "m8", "m6", "m2"],
        ["", "", "c1", "c0"],
        ["", "", "", "c2"],
    ]


def test_height2_22():
    s = simulate(build_height2(22), CostParams(1))
    assert (s.makespan, s.processor_count) == (7, 6)


def test_single_node_five_blocks():
    s = simulate(build_single_node(5, 1), CostParams(1))
    assert (s.makespan, s.processor_count) == (5, 1)


def test_d_mismatch():
    with pytest.raises(SimulationError):
        simulate(build_unrestricted(8, 2), CostParams(1))


def test_cyclic_reference_is_reported():
    # skip validation to hand the simulator a graph it must refuse
    tree = object.__new__(TreeTopology)
    nodes = (
        TreeNode(0, (InputRef.block(1), InputRef.node(1))),
        TreeNode(1, (InputRef.block(2), InputRef.node(0)), NodeType.ROOT),
    )
    for name, value in dict(l=2, d=1, nodes=nodes, level_arities=(), levels=None).items():
        object.__setattr__(tree, name, value)
    with pytest.raises(SimulationError, match="cyclic"):
        simulate(tree, CostParams(1))


def random_tree(rng):
    l = rng.randint(1, 400)
    d = rng.randint(1, 4)
    kind = rng.choice("uhbs")
    if kind == "u":
        return build_unrestricted(l, d, rng.choice([2, 3]))
    if kind == "h":
        return build_height2(max(l, 2), rng.random() < 0.5, d)
    if kind == "b":
        return build_bounded(l, d, rng.randint(1, 40))
    return build_same_depth_base(l, rng.randint(2, 5), d)


@given(st.randoms(use_true_random=False))
def test_simulation_invariants(rng):
    tree = random_tree(rng)
    params = CostParams(tree.d)
    s = simulate(tree, params)
    assert s.makespan == max(s.node_finish.values()) == s.node_finish[tree.root.id]
    assert s.processor_count == len(tree.nodes)
    for node in tree.nodes:
        rounds = s.call_rounds[node.id]
        # one call per round per processor, and the node ends at its last call
        assert rounds == sorted(set(rounds))
        assert rounds[-1] == s.node_finish[node.id]
        items = stream_items(tree, node.id, params, s.node_finish)
        assert len(rounds) == call_count(items, params)
        assert absorb_finish_time(items, params) == s.node_finish[node.id]
    assert s.total_calls == sum(
        call_count(stream_items(tree, n.id, params, s.node_finish), params) for n in tree.nodes
    )


@given(st.randoms(use_true_random=False))
def test_chaining_value_read_only_after_its_round(rng):
    tree = random_tree(rng)
    s = simulate(tree, CostParams(tree.d))
    for node in tree.nodes:
        for j, rnd in enumerate(s.call_rounds[node.id], start=1):
            for idx, _, _ in s.call_spans(node.id, j):
                ref = node.input[idx]
                if not ref.is_block:
                    assert s.node_finish[ref.value] <= rnd - 1


def test_short_last_block():
    p = CostParams(2)
    tree = build_unrestricted(5, 2, 2)
    full = simulate(tree, p)
    short = simulate(tree, p, last_block_bits=8)
    assert short.makespan == full.makespan
    assert short.total_calls == full.total_calls


def test_critical_path_eight_blocks():
    tree = build_unrestricted(8, 1, 2)
    p = CostParams(1)
    path = critical_path(simulate(tree, p), tree)
    assert path == [3, 2, 1]
    assert all(is_tight(tree, p, n) for n in path)


def test_critical_path_single_node():
    tree = build_single_node(3, 1)
    assert critical_path(simulate(tree, CostParams(1)), tree) == [0]


def test_bounded_16_over_4_every_node_tight():
    tree = build_bounded(16, 1, 4)
    p = CostParams(1)
    s = simulate(tree, p)
    assert s.makespan == 6
    assert sorted(s.node_finish.values()) == [4, 4, 5, 6]
    assert all(is_tight(tree, p, n.id) for n in tree.nodes)


@given(st.randoms(use_true_random=False))
def test_critical_path_is_a_tight_chain(rng):
    tree = random_tree(rng)
    p = CostParams(tree.d)
    s = simulate(tree, p)
    path = critical_path(s, tree)
    assert path[0] == tree.root.id
    for parent, child in zip(path, path[1:]):
        assert child in tree.nodes[parent].children
    for node in path:
        assert is_tight(tree, p, node)


def test_gantt_and_json():
    s = simulate(build_unrestricted(8), CostParams(1))
    lines = s.gantt().splitlines()
    assert len(lines) == 1 + 4
    assert lines[-1].split()[1:] == ["m1", "m2", "c0", "c2"]
    data = json.loads(s.to_json())
    assert data["makespan"] == 4 and len(data["rounds"]) == 4
    assert s.timelines[3][2] == (3, 3, [(2, 0, 128)])


def test_witness_trees_simulate():
    tree = from_nested(["m", ["m"], ["m"]], d=2)
    assert simulate(tree, CostParams(2)).makespan == 2


def test_simulation_is_deterministic():
    rng = random.Random(5)
    for _ in range(20):
        tree = random_tree(rng)
        p = CostParams(tree.d)
        assert simulate(tree, p).to_json() == simulate(tree, p).to_json()
