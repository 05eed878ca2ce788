"""Closed-form running times and processor counts.

Everything is evaluated with integer arithmetic; see :mod:`treehash.intmath`.
"""

from __future__ import annotations

from dataclasses import dataclass

from .intmath import ceil_div, ceil_half_root, ceil_log


class FormulaMismatch(AssertionError):
    pass


@dataclass(frozen=True)
class Height2Plan:
    l: int
    k: int
    i: int  # blocks absorbed by the root processor before any chaining value
    processors: int
    time: int
    allocation: tuple[int, ...]  # block counts, root first


@dataclass(frozen=True)
class UnrestrictedPlan:
    l: int
    d: int
    b: int
    time: int
    processors: int


@dataclass(frozen=True)
class BoundedPlan:
    l: int
    d: int
    P: int
    a: int
    b_count: int
    time: int
    requested_P: int

    @property
    def clamped(self) -> bool:
        return self.P != self.requested_P

    @property
    def large_chunk(self) -> int:
        return ceil_div(self.l, self.P)

    @property
    def small_chunk(self) -> int:
        return self.l // self.P

    def chunks(self) -> list[int]:
        return [self.large_chunk] * self.a + [self.small_chunk] * self.b_count


def _check_l(l: int, minimum: int = 2) -> None:
    if l < minimum:
        raise ValueError("message too short for a tree")


def height2_allocation(l: int, i: int, k: int) -> tuple[int, ...]:
    """Root takes ``i`` blocks, then children take ``i, i+1, ..., k`` blocks.

    The last child may get fewer; if it would get a single block, that block
    goes to the root instead and the child disappears.
    """
    sizes = [min(i, l)]
    left = l - sizes[0]
    run = i
    while left > 0:
        if run > k:
            raise FormulaMismatch(f"allocation for l={l}, i={i}, k={k} does not cover the message")
        take = min(run, left)
        sizes.append(take)
        left -= take
        run += 1
    if len(sizes) > 1 and sizes[-1] == 1:
        sizes.pop()
        sizes[0] += 1
    return tuple(sizes)


def _plan(l: int, i: int, k: int) -> Height2Plan:
    alloc = height2_allocation(l, i, k)
    return Height2Plan(l=l, k=k, i=alloc[0], processors=len(alloc), time=k + 1, allocation=alloc)


def height2_k(l: int) -> Height2Plan:
    """Height-2 plan where the first two processors take 2 blocks each and
    processor ``j >= 3`` takes ``j``."""
    _check_l(l)
    return _plan(l, 2, ceil_half_root(8 * l - 7))


def _k_for(l: int, j: int) -> int:
    return ceil_half_root(4 * j * j - 12 * j + 8 * l + 1)


def _below_search_bound(l: int, j: int) -> bool:
    # j < (sqrt(4 + 4 sqrt(8l - 8)) + 3) / 2, squared out twice
    t = 2 * j - 3
    if t < 0:
        return True
    u = t * t - 4
    if u < 0:
        return True
    return u * u < 16 * (8 * l - 8)


def height2_optimized(l: int) -> Height2Plan:
    """Same running time as :func:`height2_k` with fewer processors: the root
    keeps ``i`` blocks and children take ``i, ..., k`` blocks."""
    _check_l(l)
    best_k = None
    best_j = None
    j = 1
    while _below_search_bound(l, j):
        k = _k_for(l, j)
        if best_k is None or k < best_k or (k == best_k and j > best_j):
            best_k, best_j = k, j
        j += 1
    if best_k != ceil_half_root(8 * l - 8):
        raise FormulaMismatch(f"formula mismatch for l={l}: search gives k={best_k}")
    return _plan(l, best_j, best_k)


def predict_unrestricted(l: int, d: int = 1, b: int = 2) -> tuple[int, int]:
    """``(time, processors)`` for the leaves-at-all-levels tree with ``b``
    blocks per node."""
    if b not in (2, 3):
        raise ValueError(f"leaf arity must be 2 or 3, got {b}")
    if d < 1:
        raise ValueError("d must be >= 1")
    _check_l(l, 1)
    if l <= b:
        return l, 1
    return ceil_log(l, d + 1, b) + b, ceil_div(l, b)


def select_leaf_arity(l: int, d: int = 1) -> UnrestrictedPlan:
    """Use 3 blocks per node whenever it does not cost time."""
    _check_l(l)
    base = d + 1
    b = 2
    if l > 2:
        i = 0
        while 2 * base ** (i + 1) < l:
            i += 1
        if l <= 3 * base**i:
            b = 3
    time, _ = predict_unrestricted(l, d, 2)
    if b == 3 and predict_unrestricted(l, d, 3)[0] != time:
        raise FormulaMismatch(f"ternary leaves slower than binary for l={l}, d={d}")
    return UnrestrictedPlan(l=l, d=d, b=b, time=time, processors=ceil_div(l, b))


def predict_bounded(l: int, d: int = 1, P: int = 1) -> BoundedPlan:
    _check_l(l, 1)
    if P < 1 or d < 1:
        raise ValueError("P and d must be >= 1")
    requested = P
    P = min(P, l)
    r = l % P
    a, b_count = (P, 0) if r == 0 else (r, P - r)
    time = ceil_div(l, P) + ceil_log(P, d + 1)
    return BoundedPlan(l=l, d=d, P=P, a=a, b_count=b_count, time=time, requested_P=requested)


def best_bounded_time(l: int, d: int = 1, P: int = 1) -> int:
    """Best predicted time using at most ``P`` processors."""
    return min(predict_bounded(l, d, p).time for p in range(1, min(P, l) + 1))


def ternary_derivation_time(l: int) -> int:
    _check_l(l)
    return 2 * ceil_log(l, 3) + 1
