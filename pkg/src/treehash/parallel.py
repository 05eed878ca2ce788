"""Run a hash tree on real bytes: sequentially, on a worker pool, or in lockstep.

Worker pool
    One task per node, submitted children first to a FIFO thread pool. A task
    absorbs its own blocks straight away and blocks on each chaining value in
    input order; a chaining value is handed over through a one-shot future.
    Because every child is queued before its parent, any task that blocks is
    waiting on work that is already running or finished, so the pool cannot
    deadlock whatever its size.

Lockstep
    A barrier separates unit rounds. In each round every node performs at most
    one call, and only if the rate block it is due to absorb is complete in
    the timing model. The sponge reads two bits past the end of each such
    block (its input is shifted by the 2-bit type prefix); when those bits
    belong to a chaining value that is not out yet, the node evaluates all four
    candidates and keeps the right one once the value arrives. Those extra
    evaluations are reported separately as ``speculative_calls``.
"""

from __future__ import annotations

import enum
import random
import threading
import time
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field

from .cost import CostParams
from .sponge import (
    CountingPermutation,
    IncrementalVil,
    NodeTypeCode,
    PrefixStateTable,
    SpongeParams,
    block_count,
    hash_node,
    last_block,
    precompute_prefix_states,
    shifted_block,
    squeeze,
    xor_block,
)
from .topology import TreeTopology


class Mode(enum.Enum):
    SEQUENTIAL = "sequential"
    WORKER_POOL = "workerpool"
    LOCKSTEP = "lockstep"


@dataclass
class ExecutionReport:
    digest: bytes
    mode: Mode
    total_calls: int
    workers_used: int
    node_calls: dict[int, int] = field(default_factory=dict)
    lockstep_rounds: int | None = None
    speculative_calls: int = 0

    @property
    def hexdigest(self) -> str:
        return self.digest.hex()


class SizeMismatch(ValueError):
    pass


def _setup(message: bytes, tree: TreeTopology, params: CostParams,
           sponge: SpongeParams | None, table: PrefixStateTable | None):
    if tree.d != params.d:
        raise ValueError(f"tree built for d={tree.d} but params have d={params.d}")
    B = params.block_bytes
    if not (tree.l - 1) * B < len(message) <= tree.l * B:
        raise SizeMismatch(f"size mismatch: {len(message)} bytes is not {tree.l} blocks of {B} bytes")
    sponge = sponge or SpongeParams.for_cost(params)
    if sponge.rate_bits != params.block_bits or sponge.digest_bits != params.digest_bits:
        raise ValueError("sponge parameters do not match the cost parameters")
    table = table or precompute_prefix_states(sponge)
    return sponge, table


def last_block_bits(message: bytes, params: CostParams) -> int:
    """Bit length of the final (possibly short) message block."""
    rem = len(message) % params.block_bytes
    return 8 * (rem or params.block_bytes)


def _input_layout(node, message: bytes, params: SpongeParams):
    """Per input item: (kind, value, first byte, end byte) within the node input."""
    B = params.rate_bytes
    D = params.digest_bytes
    layout = []
    pos = 0
    for kind, value in node.input:
        size = len(message[(value - 1) * B:value * B]) if kind == "block" else D
        layout.append((kind, value, pos, pos + size))
        pos += size
    return layout, pos


def hash_sequential(message: bytes, tree: TreeTopology, params: CostParams,
                    sponge: SpongeParams | None = None, table: PrefixStateTable | None = None) -> ExecutionReport:
    sponge, table = _setup(message, tree, params, sponge, table)
    digests: dict[int, bytes] = {}
    node_calls: dict[int, int] = {}
    for node in tree.nodes:  # post-order: children first
        digests[node.id], node_calls[node.id] = hash_node(node, digests, message, sponge, table)
    return ExecutionReport(
        digest=digests[tree.root.id],
        mode=Mode.SEQUENTIAL,
        total_calls=sum(node_calls.values()),
        workers_used=1,
        node_calls=node_calls,
    )


def hash_workerpool(message: bytes, tree: TreeTopology, params: CostParams, workers: int = 4,
                    jitter: float = 0.0, seed: int = 0, sponge: SpongeParams | None = None,
                    table: PrefixStateTable | None = None) -> ExecutionReport:
    """``jitter`` > 0 sleeps a random time up to that many seconds before each
    input item, to shake up the interleaving."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    sponge, table = _setup(message, tree, params, sponge, table)
    handoff: list[Future] = [Future() for _ in tree.nodes]
    node_calls: dict[int, int] = {}

    def run(node) -> None:
        try:
            rng = random.Random(seed * 1_000_003 + node.id)
            layout, total = _input_layout(node, message, sponge)
            h = IncrementalVil(NodeTypeCode.for_node(node), total, sponge, table)
            for kind, value, start, end in layout:
                if jitter:
                    time.sleep(rng.uniform(0, jitter))
                if kind == "block":
                    h.update(message[(value - 1) * sponge.rate_bytes:value * sponge.rate_bytes])
                else:
                    h.update(handoff[value].result())
            digest = h.digest()
            node_calls[node.id] = h.calls
            handoff[node.id].set_result(digest)
        except BaseException as exc:  # parents must not wait forever
            handoff[node.id].set_exception(exc)

    used = min(workers, len(tree.nodes))
    with ThreadPoolExecutor(max_workers=used) as pool:
        for node in tree.nodes:
            pool.submit(run, node)
    digest = handoff[tree.root.id].result()
    return ExecutionReport(
        digest=digest,
        mode=Mode.WORKER_POOL,
        total_calls=sum(node_calls.values()),
        workers_used=used,
        node_calls=node_calls,
    )


class _LockstepNode:
    def __init__(self, node, message: bytes, sponge: SpongeParams, table: PrefixStateTable, perm):
        self.node = node
        self.sponge = sponge
        self.table = table
        self.perm = perm
        self.code = NodeTypeCode.for_node(node)
        self.layout, self.total = _input_layout(node, message, sponge)
        self.calls = block_count(self.total, sponge)
        B = sponge.rate_bytes
        self.buf = bytearray(self.total)
        self.have = [False] * len(self.layout)
        for idx, (kind, value, start, end) in enumerate(self.layout):
            if kind == "block":
                self.buf[start:end] = message[(value - 1) * B:value * B]
                self.have[idx] = True
        # items each call needs complete, and the item holding its look-ahead byte
        self.needs: list[list[int]] = []
        self.lookahead_item: list[int | None] = []
        for j in range(1, self.calls + 1):
            lo, hi = (j - 1) * B, min(j * B, self.total)
            self.needs.append([i for i, (_, _, s, e) in enumerate(self.layout) if s < hi and e > lo])
            if j < self.calls:
                self.lookahead_item.append(next(i for i, (_, _, s, e) in enumerate(self.layout) if s <= j * B < e))
            else:
                self.lookahead_item.append(None)
        self.done = 0
        self.state = None
        self.pending: list[tuple[int, ...]] | None = None
        self.committed = 0
        self.speculative = 0
        self.finish: int | None = None
        self.digest: bytes | None = None

    def _available(self, idx: int, rnd: int, nodes) -> bool:
        if self.have[idx]:
            return True
        kind, value, start, end = self.layout[idx]
        child = nodes[value]
        if child.finish is None or child.finish > rnd - 1:
            return False
        self.buf[start:end] = child.digest
        self.have[idx] = True
        return True

    def step(self, rnd: int, nodes) -> None:
        if self.finish is not None:
            return
        j = self.done + 1
        if not all([self._available(i, rnd, nodes) for i in self.needs[j - 1]]):
            return
        sp = self.sponge
        B = sp.rate_bytes
        if j == 1:
            self.state = self.table.lookup(self.code, self.buf[0] >> 6)
        if self.pending is not None:
            self.state = self.pending[self.buf[(j - 1) * B] >> 6]
            self.pending = None
        if j == self.calls:
            self.state = self.perm(xor_block(self.state, last_block(self.buf, self.total, sp), sp))
            self.committed += 1
            self.digest = squeeze(self.state, sp)
            self.done = j
            self.finish = rnd
            return
        if self._available(self.lookahead_item[j - 1], rnd, nodes):
            self.state = self.perm(xor_block(self.state, shifted_block(self.buf, j, sp), sp))
        else:
            self.pending = [
                self.perm(xor_block(self.state, shifted_block(self.buf, j, sp, lookahead=x), sp))
                for x in range(4)
            ]
            self.speculative += 3
        self.committed += 1
        self.done = j


def hash_lockstep(message: bytes, tree: TreeTopology, params: CostParams, workers: int | None = None,
                  sponge: SpongeParams | None = None, table: PrefixStateTable | None = None) -> ExecutionReport:
    """Barrier-synchronized execution; ``workers`` threads share the node
    processors round-robin (default: one thread per node, at most 64)."""
    sponge, table = _setup(message, tree, params, sponge, table)
    perm = CountingPermutation(sponge.rounds)
    nodes = [_LockstepNode(node, message, sponge, table, perm) for node in tree.nodes]
    root = nodes[-1]
    used = min(workers or 64, len(nodes))
    max_rounds = sum(n.calls for n in nodes) + 1
    errors: list[BaseException] = []
    # decided once per round while every thread is parked at the barrier, so
    # no thread can see the root finish a round early
    stop = [False]

    def end_of_round() -> None:
        stop[0] = root.finish is not None

    barrier = threading.Barrier(used, action=end_of_round)

    def worker(t: int) -> None:
        mine = nodes[t::used]
        try:
            for rnd in range(1, max_rounds + 1):
                for n in mine:
                    n.step(rnd, nodes)
                barrier.wait()
                if stop[0]:
                    return
            raise RuntimeError("lockstep execution made no progress")
        except threading.BrokenBarrierError:
            pass
        except BaseException as exc:
            errors.append(exc)
            barrier.abort()

    threads = [threading.Thread(target=worker, args=(t,), daemon=True) for t in range(used)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    if errors:
        raise errors[0]
    node_calls = {n.node.id: n.committed for n in nodes}
    total = sum(node_calls.values())
    speculative = sum(n.speculative for n in nodes)
    assert perm.calls == total + speculative
    return ExecutionReport(
        digest=root.digest,
        mode=Mode.LOCKSTEP,
        total_calls=total,
        workers_used=used,
        node_calls=node_calls,
        lockstep_rounds=root.finish,
        speculative_calls=speculative,
    )
