"""Lockstep PRAM simulation of a hash tree.

One processor per node. In round ``r`` (the unit interval ``[r-1, r)``) a
processor performs its next call if the previous one is done and every
item the call reads is available: a chaining value produced in round ``t``
can be read from round ``t + 1`` on. Processors are visited in ascending id
order each round, so the recorded timelines are reproducible.

The round-by-round result is checked against the closed stream rule of
:func:`treehash.cost.absorb_finish_time` applied bottom-up.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from .cost import CostParams, StreamItem, call_requirements, finish_from_requirements
from .topology import TreeTopology


class SimulationError(RuntimeError):
    pass


def _item_lengths(tree: TreeTopology, params: CostParams, last_block_bits: int | None) -> list[list[int]]:
    bb, db = params.block_bits, params.digest_bits
    lengths = [[bb if kind == "block" else db for kind, _ in node.input] for node in tree.nodes]
    if last_block_bits is not None and last_block_bits != bb:
        for node in tree.nodes:
            for pos, ref in enumerate(node.input):
                if ref == ("block", tree.l):
                    lengths[node.id][pos] = last_block_bits
    return lengths


def stream_items(tree: TreeTopology, node_id: int, params: CostParams, finish: Mapping[int, int],
                 last_block_bits: int | None = None) -> list[StreamItem]:
    """The node's input as timed stream items, chaining values ready at
    their producer's finish time."""
    items = []
    for ref in tree.nodes[node_id].input:
        if ref.is_block:
            bits = last_block_bits if (ref.value == tree.l and last_block_bits is not None) else None
            items.append(StreamItem.block(params, bits))
        else:
            items.append(StreamItem.cv(params, finish[ref.value]))
    return items


def stream_finish_times(tree: TreeTopology, params: CostParams, last_block_bits: int | None = None,
                        delay: Mapping[int, int] | None = None) -> list[int]:
    """Finish time of every node from the stream rule, children first.

    ``delay`` adds extra units to the finish of selected nodes; used to probe
    which nodes the makespan depends on.
    """
    return _stream_finish(tree, params.block_bits, _item_lengths(tree, params, last_block_bits), delay)


def _stream_finish(tree: TreeTopology, block_bits: int, lengths: list[list[int]],
                   delay: Mapping[int, int] | None = None) -> list[int]:
    finish = [0] * len(tree.nodes)
    for node in tree.nodes:
        pairs = (
            (bits, 0 if kind == "block" else finish[value])
            for (kind, value), bits in zip(node.input, lengths[node.id])
        )
        calls, need = call_requirements(pairs, block_bits)
        finish[node.id] = finish_from_requirements(calls, need) + (delay or {}).get(node.id, 0)
    return finish


@dataclass
class Schedule:
    makespan: int
    processor_count: int
    node_finish: dict[int, int]
    # round of every call, per node; call_index is position + 1
    call_rounds: dict[int, list[int]]
    item_bits: list[list[int]] = field(repr=False)
    inputs: tuple = field(repr=False)
    block_bits: int = 0

    @property
    def total_calls(self) -> int:
        return sum(len(rounds) for rounds in self.call_rounds.values())

    def call_spans(self, node_id: int, call_index: int) -> list[tuple[int, int, int]]:
        """``(item_index, first_bit, end_bit)`` of every item slice read by a call."""
        lo = (call_index - 1) * self.block_bits
        hi = call_index * self.block_bits
        spans = []
        pos = 0
        for idx, bits in enumerate(self.item_bits[node_id]):
            start, end = max(lo, pos), min(hi, pos + bits)
            if start < end:
                spans.append((idx, start - pos, end - pos))
            pos += bits
        return spans

    @property
    def timelines(self) -> dict[int, list[tuple[int, int, list[tuple[int, int, int]]]]]:
        return {
            node: [(rnd, j, self.call_spans(node, j)) for j, rnd in enumerate(rounds, start=1)]
            for node, rounds in self.call_rounds.items()
        }

    def call_label(self, node_id: int, call_index: int) -> str:
        refs = self.inputs[node_id]
        return "+".join(str(refs[idx]) for idx, _, _ in self.call_spans(node_id, call_index))

    def matrix(self) -> list[list[str]]:
        """Rounds by processors; empty string for an idle processor."""
        grid = [[""] * self.processor_count for _ in range(self.makespan)]
        for node, rounds in self.call_rounds.items():
            for j, rnd in enumerate(rounds, start=1):
                grid[rnd - 1][node] = self.call_label(node, j)
        return grid

    def to_json(self) -> str:
        return json.dumps(
            {
                "makespan": self.makespan,
                "processor_count": self.processor_count,
                "total_calls": self.total_calls,
                "node_finish": {str(k): v for k, v in sorted(self.node_finish.items())},
                "rounds": self.matrix(),
            },
            indent=2,
        )

    def gantt(self) -> str:
        grid = self.matrix()
        width = max([len(cell) for row in grid for cell in row] + [len(str(self.makespan)), 1])
        head = "     " + " ".join(str(r).rjust(width) for r in range(1, self.makespan + 1))
        lines = [head]
        for p in range(self.processor_count):
            cells = " ".join((grid[r][p] or ".").rjust(width) for r in range(self.makespan))
            lines.append(f"P{p:<3} {cells}")
        return "\n".join(lines)


def simulate(tree: TreeTopology, params: CostParams, last_block_bits: int | None = None) -> Schedule:
    if params.d != tree.d:
        raise SimulationError(f"tree built for d={tree.d} but params have d={params.d}")
    bb = params.block_bits
    lengths = _item_lengths(tree, params, last_block_bits)
    n = len(tree.nodes)

    # children read by each call that reads any chaining value (0-based calls)
    calls: list[int] = []
    deps: list[dict[int, list[int]]] = []
    for node in tree.nodes:
        pos = 0
        per_call: dict[int, list[int]] = {}
        for ref, bits in zip(node.input, lengths[node.id]):
            if ref[0] != "block":
                for j in range(pos // bb, (pos + bits - 1) // bb + 1):
                    per_call.setdefault(j, []).append(ref.value)
            pos += bits
        calls.append(-(-pos // bb))
        deps.append(per_call)
    # calls that need nothing are fired as a run, one per round
    gates = [sorted(per_call) + [c] for c, per_call in zip(calls, deps)]
    gate_pos = [0] * n

    finish: list[int | None] = [None] * n
    rounds: list[list[int]] = [[] for _ in range(n)]
    done = [0] * n
    due: dict[int, list[int]] = {1: list(range(n))}
    waiting: list[int] = []
    remaining = n
    rnd = 0
    while remaining:
        rnd += 1
        candidates = sorted(due.pop(rnd, []) + waiting)
        waiting = []
        fired = False
        for node in candidates:
            j = done[node]
            ok = True
            for child in deps[node].get(j, ()):
                f = finish[child]
                if f is None or f > rnd - 1:
                    ok = False
                    break
            if not ok:
                waiting.append(node)
                continue
            fired = True
            # fire call j now, then every following call up to the next gated one
            g = gate_pos[node]
            node_gates = gates[node]
            while node_gates[g] <= j:
                g += 1
            gate_pos[node] = g
            upto = node_gates[g]
            run = upto - j
            rounds[node].extend(range(rnd, rnd + run))
            done[node] = upto
            if upto == calls[node]:
                finish[node] = rnd + run - 1
                remaining -= 1
            else:
                due.setdefault(rnd + run, []).append(node)
        if not fired and not due and waiting:
            # a child whose last run is already booked still counts as progress
            if all(finish[c] is None for node in waiting for c in deps[node].get(done[node], ())):
                raise SimulationError("no processor can progress: cyclic reference")

    expected = _stream_finish(tree, bb, lengths)
    if expected != finish:
        bad = next(i for i in range(n) if expected[i] != finish[i])
        raise SimulationError(f"lockstep and stream rule disagree on node {bad}: {finish[bad]} vs {expected[bad]}")

    return Schedule(
        makespan=max(finish),
        processor_count=n,
        node_finish=dict(enumerate(finish)),
        call_rounds=dict(enumerate(rounds)),
        item_bits=lengths,
        inputs=tuple(node.input for node in tree.nodes),
        block_bits=bb,
    )


def critical_path(schedule: Schedule, tree: TreeTopology) -> list[int]:
    """Chain of nodes, root first, along which any extra unit of delay would
    push the makespan back.

    At every node we walk its calls backwards; a call that started exactly
    when a chaining value became ready hands the path to that child (ties
    with the previous call go to the child).
    """
    node = tree.root.id
    path = [node]
    while True:
        rounds = schedule.call_rounds[node]
        nxt = None
        for j in range(len(rounds), 0, -1):
            start = rounds[j - 1] - 1
            children = [
                tree.nodes[node].input[idx].value
                for idx, _, _ in schedule.call_spans(node, j)
                if not tree.nodes[node].input[idx].is_block
            ]
            tight = [c for c in children if schedule.node_finish[c] == start]
            if tight:
                nxt = tight[-1]
                break
        if nxt is None:
            return path
        path.append(nxt)
        node = nxt
