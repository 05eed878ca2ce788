"""Brute-force minimum parallel time over all tree shapes, for small messages.

Processors are unlimited, so the subtrees under a node run independently
and each can be replaced by an optimal one. ``T(n)`` is then the minimum,
over every node input made of ``q`` blocks and child subtrees of sizes
``n_1 + ... + n_k = n - q``, of that input's finish time when child ``j``
is ready at ``T(n_j)``.

The search only considers inputs with the blocks first and the chaining
values in ascending ready order. :func:`full_enumeration_check` drops that
restriction and tries every ordering, for ``l <= 8``.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass
from typing import Iterator

from .cost import call_requirements, finish_from_requirements
from .topology import TreeTopology, from_nested

DEFAULT_CAP_D1 = 24
DEFAULT_CAP = 18


class OracleCapExceeded(ValueError):
    pass


def oracle_cap(d: int) -> int:
    if d == 1:
        return int(os.environ.get("TREEHASH_ORACLE_CAP_D1", DEFAULT_CAP_D1))
    return int(os.environ.get("TREEHASH_ORACLE_CAP", DEFAULT_CAP))


@dataclass(frozen=True)
class OracleResult:
    l: int
    d: int
    optimal_time: int
    # nested node description: "m" for a block, a list for a child node
    witness: tuple

    def witness_tree(self) -> TreeTopology:
        return from_nested(_as_lists(self.witness), self.d)


def _as_lists(w):
    return [item if isinstance(item, str) else _as_lists(item) for item in w]


def _finish(q: int, readies, d: int) -> int:
    # in digest-sized units a block is d units and a chaining value 1
    items = [(d, 0)] * q + [(1, r) for r in readies]
    calls, need = call_requirements(items, d)
    return finish_from_requirements(calls, need)


def _partitions(n: int, largest: int | None = None) -> Iterator[list[int]]:
    """Partitions of ``n`` into non-increasing positive parts."""
    if n == 0:
        yield []
        return
    top = n if largest is None else min(n, largest)
    for first in range(top, 0, -1):
        for rest in _partitions(n - first, first):
            yield [first] + rest


_memo: dict[tuple[int, int], tuple[int, tuple]] = {}
_memo_lock = threading.Lock()


def _best(n: int, d: int) -> tuple[int, tuple]:
    key = (n, d)
    hit = _memo.get(key)
    if hit is not None:
        return hit
    best_time = None
    best_witness = None
    for q in range(n, -1, -1):
        for parts in _partitions(n - q):
            if q == 0 and parts == [n]:
                continue
            subs = sorted((_best(p, d) for p in parts), key=lambda s: s[0])
            t = _finish(q, [s[0] for s in subs], d)
            if best_time is None or t < best_time:
                best_time = t
                best_witness = ("m",) * q + tuple(s[1] for s in subs)
    result = (best_time, best_witness)
    with _memo_lock:
        _memo.setdefault(key, result)
    return _memo[key]


def optimal_time_bruteforce(l: int, d: int = 1, cap: int | None = None) -> OracleResult:
    if l < 1 or d < 1:
        raise ValueError("need l >= 1 and d >= 1")
    if l > (oracle_cap(d) if cap is None else cap):
        raise OracleCapExceeded("oracle cap exceeded")
    time, witness = _best(l, d)
    return OracleResult(l=l, d=d, optimal_time=time, witness=witness)


def _sequences(n: int) -> Iterator[tuple[int, ...]]:
    """Every ordered input summing to ``n``: 0 stands for a block, k > 0 for
    a child subtree of k blocks. A lone child of size ``n`` is excluded."""

    def rec(left: int) -> Iterator[tuple[int, ...]]:
        if left == 0:
            yield ()
            return
        for rest in rec(left - 1):
            yield (0,) + rest
        for k in range(1, min(left, n - 1) + 1):
            for rest in rec(left - k):
                yield (k,) + rest

    return rec(n)


def _enumerate_min(n: int, d: int, memo: dict[int, int]) -> int:
    if n in memo:
        return memo[n]
    best = None
    for seq in _sequences(n):
        items = [(d, 0) if k == 0 else (1, _enumerate_min(k, d, memo)) for k in seq]
        calls, need = call_requirements(items, d)
        t = finish_from_requirements(calls, need)
        if best is None or t < best:
            best = t
    memo[n] = best
    return best


def full_enumeration_min(l: int, d: int = 1) -> int:
    if l > 8:
        raise ValueError("full enumeration is limited to l <= 8")
    return _enumerate_min(l, d, {})


def full_enumeration_check(l: int, d: int = 1) -> bool:
    """True when unrestricted input orderings find nothing better than the
    blocks-first, ascending-ready search."""
    return full_enumeration_min(l, d) == optimal_time_bruteforce(l, d, cap=max(l, 1)).optimal_time
