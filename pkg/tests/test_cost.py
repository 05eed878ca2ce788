import pytest
from hypothesis import given
from hypothesis import strategies as st

from treehash.cost import CostParams, ItemKind, StreamError, StreamItem, absorb_finish_time, call_count


def blocks(p, n):
    return [StreamItem.block(p) for _ in range(n)]


def cvs(p, *ready):
    return [StreamItem.cv(p, r) for r in ready]


def test_params_derived_block_size():
    p = CostParams(3, 128)
    assert p.block_bits == 384
    assert p.block_bytes == 48 and p.digest_bytes == 16


@pytest.mark.parametrize("d, bits", [(0, 128), (1, 4), (1, 12), (-2, 128)])
def test_params_rejects_bad_values(d, bits):
    with pytest.raises(ValueError):
        CostParams(d, bits)


def test_two_blocks_take_two_units():
    p = CostParams(1)
    assert absorb_finish_time(blocks(p, 2), p) == 2


def test_root_of_eight_block_tree():
    p = CostParams(1)
    assert absorb_finish_time(blocks(p, 2) + cvs(p, 2, 3), p) == 4


def test_three_chaining_values_share_a_call_when_d_is_3():
    p = CostParams(3)
    # calls 1, 2 absorb the blocks; call 3 the three CVs ready at 2; call 4 those ready at 3
    assert absorb_finish_time(blocks(p, 2) + cvs(p, 2, 2, 2, 3, 3, 3), p) == 4


def test_call_counts():
    assert call_count(blocks(CostParams(1), 5), CostParams(1)) == 5
    p2 = CostParams(2)
    assert call_count(blocks(p2, 1) + cvs(p2, 0), p2) == 2
    assert call_count(blocks(CostParams(1), 1), CostParams(1)) == 1


def test_short_final_block_costs_one_call():
    p = CostParams(1)
    items = blocks(p, 2) + [StreamItem.block(p, 40)]
    assert call_count(items, p) == 3
    assert absorb_finish_time(items, p) == 3


def test_chaining_value_straddling_two_calls_gates_both():
    p = CostParams(2)
    # bits: block (2 units) | cv@5 (1) | cv@0 (1) -> call 2 holds cv@5 and cv@0
    items = blocks(p, 1) + cvs(p, 5, 0)
    assert absorb_finish_time(items, p) == 6
    # a CV across a call boundary: cv@0, block, cv@4 -> calls [cv,half block] [half block, cv@4]
    items = cvs(p, 0) + blocks(p, 1) + cvs(p, 4)
    assert absorb_finish_time(items, p) == 5


def test_errors():
    p = CostParams(1)
    with pytest.raises(StreamError, match="empty node input"):
        absorb_finish_time([], p)
    with pytest.raises(StreamError, match="malformed stream"):
        absorb_finish_time([StreamItem(ItemKind.CV, 64, 0)], p)
    with pytest.raises(StreamError, match="malformed stream"):
        call_count([StreamItem.block(CostParams(2))], p)


items_strategy = st.lists(
    st.one_of(st.just(("b", 0)), st.tuples(st.just("c"), st.integers(0, 20))), min_size=1, max_size=12
)


def make(p, spec):
    return [StreamItem.block(p) if kind == "b" else StreamItem.cv(p, r) for kind, r in spec]


@given(st.integers(1, 4), items_strategy, st.data())
def test_later_ready_never_finishes_earlier(d, spec, data):
    p = CostParams(d)
    base = absorb_finish_time(make(p, spec), p)
    idx = data.draw(st.integers(0, len(spec) - 1))
    kind, r = spec[idx]
    if kind == "c":
        bumped = list(spec)
        bumped[idx] = ("c", r + data.draw(st.integers(1, 5)))
        assert absorb_finish_time(make(p, bumped), p) >= base


@given(st.integers(1, 4), items_strategy)
def test_lower_bounds(d, spec):
    p = CostParams(d)
    items = make(p, spec)
    t = absorb_finish_time(items, p)
    assert t >= call_count(items, p)
    assert t >= 1 + max(it.ready_time for it in items)


@given(st.integers(1, 4), st.integers(1, 50))
def test_pure_block_streams(d, n):
    p = CostParams(d)
    assert absorb_finish_time(blocks(p, n), p) == call_count(blocks(p, n), p) == n


@given(st.integers(1, 4), items_strategy, st.lists(st.sampled_from("bc"), min_size=1, max_size=8), st.randoms())
def test_shuffling_an_equal_ready_suffix(d, spec, kinds, rnd):
    # blocks and chaining values that are all ready at 0, in any order
    p = CostParams(d)
    head = make(p, spec)
    tail = make(p, [(k, 0) for k in kinds])
    shuffled = list(tail)
    rnd.shuffle(shuffled)
    assert absorb_finish_time(head + tail, p) == absorb_finish_time(head + shuffled, p)
