"""Timing semantics of a node's input stream.

A node absorbs its input ``block_bits`` at a time, one underlying call per
rate block. Message blocks are ready at time 0; a chaining value is ready
once the child that produces it has finished. Call ``j`` starts as soon as
call ``j - 1`` is done and every item contributing a bit to call ``j`` is
ready, and lasts exactly one unit.

The type-encoding prefix is never charged: its state is looked up in a
precomputed table (see :mod:`treehash.sponge`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .intmath import ceil_div


class StreamError(ValueError):
    pass


@dataclass(frozen=True)
class CostParams:
    d: int = 1
    digest_bits: int = 128
    block_bits: int = field(init=False)

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d!r}")
        if self.digest_bits < 8 or self.digest_bits % 8:
            raise ValueError(f"digest_bits must be a positive multiple of 8, got {self.digest_bits!r}")
        object.__setattr__(self, "block_bits", self.d * self.digest_bits)

    @property
    def block_bytes(self) -> int:
        return self.block_bits // 8

    @property
    def digest_bytes(self) -> int:
        return self.digest_bits // 8


class ItemKind(enum.Enum):
    BLOCK = "block"
    CV = "cv"


@dataclass(frozen=True)
class StreamItem:
    kind: ItemKind
    bit_len: int
    ready_time: int = 0

    @classmethod
    def block(cls, params: CostParams, bit_len: int | None = None) -> "StreamItem":
        return cls(ItemKind.BLOCK, params.block_bits if bit_len is None else bit_len, 0)

    @classmethod
    def cv(cls, params: CostParams, ready_time: int) -> "StreamItem":
        return cls(ItemKind.CV, params.digest_bits, ready_time)


def _check(items: Sequence[StreamItem], params: CostParams) -> None:
    if not items:
        raise StreamError("empty node input")
    for item in items:
        if item.ready_time < 0:
            raise StreamError("malformed stream: negative ready time")
        if item.kind is ItemKind.BLOCK:
            # a short final block is allowed, a long one never
            if not 0 < item.bit_len <= params.block_bits or item.ready_time != 0:
                raise StreamError("malformed stream: bad message block")
        elif item.bit_len != params.digest_bits:
            raise StreamError("malformed stream: chaining value length")


def call_count(items: Sequence[StreamItem], params: CostParams) -> int:
    _check(items, params)
    return ceil_div(sum(item.bit_len for item in items), params.block_bits)


def call_requirements(items: Iterable[tuple[int, int]], block_bits: int) -> tuple[int, dict[int, int]]:
    """Map ``(bit_len, ready_time)`` pairs onto calls.

    Returns the total call count and, for every call that waits on
    something ready after time 0, the latest ready time among the items it
    touches (calls are numbered from 1).
    """
    need: dict[int, int] = {}
    pos = 0
    for bit_len, ready in items:
        end = pos + bit_len
        if ready > 0:
            for j in range(pos // block_bits + 1, (end - 1) // block_bits + 2):
                if need.get(j, 0) < ready:
                    need[j] = ready
        pos = end
    return ceil_div(pos, block_bits), need


def finish_from_requirements(calls: int, need: dict[int, int]) -> int:
    t = 0
    last = 0
    for j in sorted(need):
        t += j - last - 1
        t = max(t, need[j]) + 1
        last = j
    return t + calls - last


def absorb_finish_time(items: Sequence[StreamItem], params: CostParams) -> int:
    """Finish time of a node whose input is ``items``, in order."""
    _check(items, params)
    calls, need = call_requirements(((i.bit_len, i.ready_time) for i in items), params.block_bits)
    return finish_from_requirements(calls, need)
