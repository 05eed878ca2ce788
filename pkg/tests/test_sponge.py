import json
import random
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from treehash import CostParams, call_count
from treehash.scheduler import stream_items
from treehash.sponge import (
    ALL_TYPE_CODES,
    MASK64,
    CountingPermutation,
    IncrementalVil,
    NodeTypeCode,
    SpongeError,
    SpongeParams,
    first_block,
    hash_node,
    permute,
    permute_inverse,
    precompute_prefix_states,
    vil_hash,
    xor_block,
)
from treehash.topology import build_bounded, build_height2, build_single_node, build_unrestricted, from_nested
from treehash.verify import build_tree

DATA = Path(__file__).parent / "data"


def sponge(d=1):
    sp = SpongeParams.for_cost(CostParams(d))
    return sp, precompute_prefix_states(sp)


def reference_vil(data: bytes, code: NodeTypeCode, sp: SpongeParams):
    """Format the whole message as one big integer and absorb every block,
    the first one included; the first call is the one the table saves."""
    rate = sp.rate_bits
    prefix = code.bits  # rate - 2 bits, only the last two set
    nbits = 8 * len(data)
    msg = (prefix << nbits) | int.from_bytes(data, "big")
    total = rate - 2 + nbits
    pad = rate - total % rate
    if pad < 2:
        pad += rate
    msg = (msg << pad) | (1 << (pad - 1)) | 1
    total += pad
    state = sp.zero_state()
    calls = 0
    for k in range(total // rate):
        block = (msg >> (total - (k + 1) * rate)) & ((1 << rate) - 1)
        state = permute(xor_block(state, block, sp), sp.rounds)
        calls += 1
    raw = b"".join(w.to_bytes(8, "little") for w in state)
    return raw[: sp.digest_bytes], calls - 1


words = st.lists(st.integers(0, MASK64), min_size=6, max_size=6).map(tuple)


@given(words)
def test_permutation_is_invertible(state):
    assert permute_inverse(permute(state)) == state
    assert permute(permute_inverse(state)) == state


def test_permutation_moves_zero():
    sp, _ = sponge(1)
    assert permute(sp.zero_state()) != sp.zero_state()


def test_counter():
    perm = CountingPermutation()
    state = (0,) * 6
    for n in range(1, 4):
        state = perm(state)
        assert perm.calls == n


def test_params_checks():
    with pytest.raises(SpongeError):
        SpongeParams(rate_bits=100)
    with pytest.raises(SpongeError):
        SpongeParams(rate_bits=128, capacity_bits=128)
    sp = SpongeParams(rate_bits=384)
    assert sp.words == (384 + 256) // 64 and sp.d == 3


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_prefix_table(d):
    sp, table = sponge(d)
    assert len(table.states) == 16 == len(set(table.states))
    for code in ALL_TYPE_CODES:
        for bits in range(4):
            direct = permute(xor_block(sp.zero_state(), first_block(code, bits), sp), sp.rounds)
            assert table.lookup(code, bits) == direct
    assert precompute_prefix_states(sp).to_bytes() == table.to_bytes()


@pytest.mark.parametrize("d", [1, 2, 3])
def test_whole_blocks_cost_one_call_each(d):
    sp, table = sponge(d)
    rng = random.Random(d)
    for code in ALL_TYPE_CODES:
        for s in (1, 2, 3, 10):
            _, calls = vil_hash(rng.randbytes(s * sp.rate_bytes), code, sp, table)
            assert calls == s


@given(st.binary(min_size=1, max_size=200), st.sampled_from(ALL_TYPE_CODES), st.integers(1, 3))
def test_matches_reference_formatting(data, code, d):
    sp, table = sponge(d)
    assert vil_hash(data, code, sp, table) == reference_vil(data, code, sp)


@given(st.binary(min_size=1, max_size=300), st.lists(st.integers(0, 40), max_size=30))
def test_incremental_equals_one_shot(data, steps):
    sp, table = sponge(2)
    code = ALL_TYPE_CODES[1]
    h = IncrementalVil(code, len(data), sp, table)
    pos = 0
    for step in steps:
        h.update(data[pos:pos + step])
        pos += step
    h.update(data[pos:])
    assert (h.digest(), h.calls) == vil_hash(data, code, sp, table)


def test_incremental_errors():
    sp, table = sponge(1)
    h = IncrementalVil(ALL_TYPE_CODES[0], 4, sp, table)
    with pytest.raises(SpongeError):
        h.update(b"12345")
    h.update(b"12")
    with pytest.raises(SpongeError):
        h.digest()


def test_empty_input():
    sp, table = sponge(1)
    with pytest.raises(SpongeError, match="empty node input"):
        vil_hash(b"", ALL_TYPE_CODES[0], sp, table)


@given(st.binary(min_size=1, max_size=100))
def test_type_code_bits_separate_domains(data):
    sp, table = sponge(1)
    digests = {vil_hash(data, code, sp, table)[0] for code in ALL_TYPE_CODES}
    assert len(digests) == 4


def test_hash_node_examples():
    sp, table = sponge(1)
    msg = bytes(range(256))[: 8 * 16]
    tree = build_single_node(2, 1)
    digest, calls = hash_node(tree.root, {}, msg[:32], sp, table)
    assert calls == 2
    assert digest == vil_hash(msg[:32], NodeTypeCode(True, True), sp, table)[0]
    tree = build_unrestricted(8, 1)
    digests = {}
    for node in tree.nodes[:-1]:
        digests[node.id], _ = hash_node(node, digests, msg, sp, table)
    digest, calls = hash_node(tree.root, digests, msg, sp, table)
    joined = msg[:32] + digests[0] + digests[2]
    assert calls == 4
    assert digest == vil_hash(joined, NodeTypeCode(True, True), sp, table)[0]


def test_interior_node_with_block_and_chaining_value():
    sp, table = sponge(2)
    tree = from_nested(["m", ["m", ["m"]]], d=2)
    node = tree.nodes[1]
    assert [str(r) for r in node.input] == ["m2", "c0"]
    msg = bytes(3 * sp.rate_bytes)
    child, _ = hash_node(tree.nodes[0], {}, msg, sp, table)
    _, calls = hash_node(node, {0: child}, msg, sp, table)
    assert calls == 2 == call_count(stream_items(tree, 1, CostParams(2), {0: 1}), CostParams(2))


def test_missing_child_digest():
    sp, table = sponge(1)
    tree = build_unrestricted(8, 1)
    with pytest.raises(SpongeError, match="missing child digest"):
        hash_node(tree.root, {}, bytes(128), sp, table)


def test_rate_law_on_built_trees():
    rng = random.Random(3)
    for _ in range(40):
        d = rng.randint(1, 4)
        l = rng.randint(1, 120)
        p = CostParams(d)
        sp, table = sponge(d)
        tree = rng.choice([
            lambda: build_unrestricted(l, d, rng.choice([2, 3])),
            lambda: build_height2(max(l, 2), d=d),
            lambda: build_bounded(l, d, rng.randint(1, 12)),
        ])()
        msg = rng.randbytes(tree.l * sp.rate_bytes)
        digests = {}
        for node in tree.nodes:
            digests[node.id], calls = hash_node(node, digests, msg, sp, table)
            assert calls == call_count(stream_items(tree, node.id, p, {n: 0 for n in range(node.id)}), p)


def test_different_topologies_give_different_digests():
    rng = random.Random(17)
    seen = 0
    for _ in range(120):
        d = rng.randint(1, 3)
        l = rng.randint(4, 80)
        sp, table = sponge(d)
        msg = rng.randbytes(l * sp.rate_bytes)
        a = build_unrestricted(l, d, 2)
        b = build_bounded(l, d, rng.randint(1, 3))
        if a == b:
            continue
        seen += 1
        da = _root_digest(a, msg, sp, table)
        db = _root_digest(b, msg, sp, table)
        assert da != db
    assert seen >= 100


def _root_digest(tree, msg, sp, table):
    digests = {}
    for node in tree.nodes:
        digests[node.id], _ = hash_node(node, digests, msg, sp, table)
    return digests[tree.root.id]


def test_golden_vectors():
    vectors = json.loads((DATA / "golden_vectors.json").read_text())
    assert len(vectors) >= 8
    for vec in vectors:
        sp, table = sponge(vec["d"])
        tree = build_tree(vec["builder"], vec["l"], vec["d"], vec.get("P"), vec.get("b"))
        msg = bytes.fromhex(vec["message"])
        assert _root_digest(tree, msg, sp, table).hex() == vec["digest"]
