"""Hash tree data model and the builders for every shape we analyse.

A node's input is an ordered list of references: message blocks (1-based
indices) and child nodes, whose chaining values are absorbed at that spot.
Node ids are assigned in post-order, so children always have smaller ids
than their parent and the root has the largest id.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

from .formulas import height2_k, height2_optimized, predict_bounded


class TopologyError(ValueError):
    pass


class NodeType(enum.Enum):
    ROOT = "root"
    INTERIOR = "interior"


class InputRef(NamedTuple):
    kind: str  # "block" or "node"
    value: int

    @classmethod
    def block(cls, index: int) -> "InputRef":
        return cls("block", index)

    @classmethod
    def node(cls, node_id: int) -> "InputRef":
        return cls("node", node_id)

    @property
    def is_block(self) -> bool:
        return self.kind == "block"

    def __str__(self):
        return f"m{self.value}" if self.is_block else f"c{self.value}"


class TreeNode(NamedTuple):
    id: int
    input: tuple[InputRef, ...]
    node_type: NodeType = NodeType.INTERIOR

    @property
    def has_message_blocks(self) -> bool:
        return any(ref.kind == "block" for ref in self.input)

    @property
    def is_root(self) -> bool:
        return self.node_type is NodeType.ROOT

    @property
    def blocks(self) -> list[int]:
        return [ref.value for ref in self.input if ref.kind == "block"]

    @property
    def children(self) -> list[int]:
        return [ref.value for ref in self.input if ref.kind != "block"]


@dataclass(frozen=True)
class TreeTopology:
    l: int
    d: int
    nodes: tuple[TreeNode, ...]
    # arity of each level of the same-depth tree this one was built from
    level_arities: tuple[int, ...] = ()
    # node ids per level, left to right; only for same-depth trees
    levels: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        self.validate()

    @property
    def root(self) -> TreeNode:
        return self.nodes[-1]

    @property
    def processor_count(self) -> int:
        return len(self.nodes)

    @property
    def height(self) -> int:
        depth = [1] * len(self.nodes)
        for node in self.nodes:
            for child in node.children:
                depth[node.id] = max(depth[node.id], depth[child] + 1)
        return depth[-1]

    @property
    def level_sizes(self) -> tuple[int, ...]:
        return tuple(len(level) for level in self.levels or ())

    def validate(self) -> None:
        if self.l < 1 or self.d < 1:
            raise TopologyError("l and d must be positive")
        if not self.nodes:
            raise TopologyError("a tree needs at least one node")
        seen = bytearray(self.l + 1)
        parents = [0] * len(self.nodes)
        for pos, node in enumerate(self.nodes):
            if node.id != pos:
                raise TopologyError("node ids must be 0..n-1 in order")
            if not node.input:
                raise TopologyError(f"node {pos} has an empty input")
            for kind, value in node.input:
                if kind == "block":
                    if not 1 <= value <= self.l or seen[value]:
                        raise TopologyError(f"block m{value} out of range or used twice")
                    seen[value] = 1
                elif kind == "node":
                    # post-order ids make any cycle impossible
                    if not 0 <= value < pos:
                        raise TopologyError(f"node {pos} references node {value}")
                    parents[value] += 1
                else:
                    raise TopologyError(f"unknown input kind {kind!r}")
        if seen.count(1) != self.l:
            raise TopologyError("every block must be referenced exactly once")
        for node in self.nodes[:-1]:
            if parents[node.id] != 1 or node.is_root:
                raise TopologyError(f"node {node.id} must have exactly one parent")
        if parents[-1] != 0 or not self.nodes[-1].is_root:
            raise TopologyError("the last node must be the unique root")


# -- builders --------------------------------------------------------------

_new_ref = tuple.__new__


class _Proto:
    """Mutable node used while building; items are block indices or _Protos."""

    __slots__ = ("items", "nid")

    def __init__(self, items: list):
        self.items = items
        self.nid = -1


def _finalize(root: _Proto, l: int, d: int, level_arities=(), levels=None) -> TreeTopology:
    nodes: list[TreeNode] = []

    def visit(proto: _Proto) -> int:
        refs = []
        for item in proto.items:
            if type(item) is int:
                refs.append(_new_ref(InputRef, ("block", item)))
            else:
                refs.append(_new_ref(InputRef, ("node", visit(item))))
        proto.nid = len(nodes)
        nodes.append(_new_ref(TreeNode, (proto.nid, tuple(refs), NodeType.INTERIOR)))
        return proto.nid

    visit(root)
    nodes[-1] = nodes[-1]._replace(node_type=NodeType.ROOT)
    if levels is not None:
        levels = tuple(tuple(p.nid for p in level) for level in levels)
    return TreeTopology(l=l, d=d, nodes=tuple(nodes), level_arities=tuple(level_arities), levels=levels)


def _level_protos(l: int, leaf_arity: int, upper_arity: int) -> tuple[list[list[_Proto]], list[int]]:
    """Levels of a same-depth tree, bottom first, and the arity of each."""
    if leaf_arity < 1 or upper_arity < 2:
        raise ValueError("arity too small")
    level = [_Proto(list(range(s, min(s + leaf_arity, l + 1)))) for s in range(1, l + 1, leaf_arity)]
    levels = [level]
    arities = [min(leaf_arity, l)]
    while len(level) > 1:
        arities.append(min(upper_arity, len(level)))
        level = [_Proto(level[s:s + upper_arity]) for s in range(0, len(level), upper_arity)]
        levels.append(level)
    return levels, arities


def build_same_depth_base(l: int, arity: int = 2, d: int = 1) -> TreeTopology:
    """Classic tree with every block at depth ``h = ceil(log_arity l)``.

    Level ``i`` has ``ceil(l / arity**i)`` nodes; the rightmost node of a
    level may be smaller.
    """
    if l < 1 or arity < 2:
        raise ValueError("need l >= 1 and arity >= 2")
    levels, arities = _level_protos(l, arity, arity)
    return _finalize(levels[-1][0], l, d, arities, levels)


def _inline_leftmost(levels: list[list[_Proto]]) -> None:
    for level in levels[1:]:
        for proto in level:
            proto.items = proto.items[0].items + proto.items[1:]


def _require_same_depth(tree: TreeTopology) -> None:
    levels = tree.levels
    if not levels:
        raise TopologyError("transform requires same-depth input")
    level_of = {}
    for depth, level in enumerate(levels, start=1):
        for node_id in level:
            level_of[node_id] = depth
    if len(level_of) != len(tree.nodes) or level_of.get(tree.root.id) != len(levels):
        raise TopologyError("transform requires same-depth input")
    for node in tree.nodes:
        depth = level_of[node.id]
        for ref in node.input:
            ok = ref.is_block if depth == 1 else (not ref.is_block and level_of[ref.value] == depth - 1)
            if not ok:
                raise TopologyError("transform requires same-depth input")


def inline_leftmost_transform(tree: TreeTopology) -> TreeTopology:
    """Level by level from level 2 upwards, replace every node's leftmost
    child by that child's own input.

    A single child counts as the leftmost one. The result has one node per
    level-1 node of the input tree and blocks at every level.
    """
    _require_same_depth(tree)
    protos: list[_Proto] = []
    for node in tree.nodes:
        protos.append(_Proto([ref.value if ref.is_block else protos[ref.value] for ref in node.input]))
    levels = [[protos[i] for i in level] for level in tree.levels]
    _inline_leftmost(levels)
    return _finalize(levels[-1][0], tree.l, tree.d, tree.level_arities)


def build_single_node(l: int, d: int) -> TreeTopology:
    return _finalize(_Proto(list(range(1, l + 1))), l, d)


def build_unrestricted(l: int, d: int = 1, b: int = 2) -> TreeTopology:
    """Leaves-at-all-levels tree: ``b`` blocks per level-1 node, ``(d+1)``-ary
    above, then every leftmost child inlined."""
    if b not in (2, 3):
        raise ValueError(f"leaf arity must be 2 or 3, got {b}")
    if l < 1 or d < 1:
        raise ValueError("need l >= 1 and d >= 1")
    if l <= b:
        return build_single_node(l, d)
    levels, arities = _level_protos(l, b, d + 1)
    _inline_leftmost(levels)
    return _finalize(levels[-1][0], l, d, arities)


def build_height2(l: int, optimize_processors: bool = False, d: int = 1) -> TreeTopology:
    """Root absorbs its own blocks and then one chaining value per child;
    child ``j`` holds a consecutive run of blocks sized by the plan."""
    plan = height2_optimized(l) if optimize_processors else height2_k(l)
    alloc = plan.allocation
    items: list = list(range(1, alloc[0] + 1))
    start = alloc[0] + 1
    for size in alloc[1:]:
        items.append(_Proto(list(range(start, start + size))))
        start += size
    return _finalize(_Proto(items), l, d)


def build_bounded(l: int, d: int = 1, P: int = 1) -> TreeTopology:
    """Unrestricted tree for ``2P`` blocks, with each node's two blocks
    replaced by a run of ``ceil(l/P)`` or ``floor(l/P)`` blocks."""
    plan = predict_bounded(l, d, P)
    if plan.P == 1:
        return build_single_node(l, d)
    chunks = plan.chunks()
    starts = [1]
    for size in chunks:
        starts.append(starts[-1] + size)

    levels, arities = _level_protos(2 * plan.P, 2, d + 1)
    _inline_leftmost(levels)
    # whichever node now starts with virtual blocks 2c+1, 2c+2 takes chunk c
    for level in levels:
        for proto in level:
            first = proto.items[0]
            if type(first) is int:
                chunk = (first - 1) // 2
                proto.items = list(range(starts[chunk], starts[chunk + 1])) + proto.items[2:]
    return _finalize(levels[-1][0], l, d, (max(chunks),) + tuple(arities[1:]))


NestedSpec = Sequence[Union[str, "NestedSpec"]]


def from_nested(spec: NestedSpec, d: int = 1) -> TreeTopology:
    """Build a tree from a nested description such as ``["m", "m", ["m", "m"]]``.

    ``"m"`` is a message block and a nested list is a child node. Blocks are
    numbered in depth-first order of appearance.
    """
    counter = [0]

    def make(items) -> _Proto:
        out = []
        for item in items:
            if isinstance(item, str):
                if item != "m":
                    raise TopologyError(f"unknown item {item!r}")
                counter[0] += 1
                out.append(counter[0])
            else:
                out.append(make(item))
        return _Proto(out)

    root = make(spec)
    return _finalize(root, counter[0], d)


# -- export ----------------------------------------------------------------


def _to_dict(tree: TreeTopology) -> dict:
    return {
        "l": tree.l,
        "d": tree.d,
        "nodes": [
            {
                "id": node.id,
                "input": [{"block": r.value} if r.is_block else {"node": r.value} for r in node.input],
                "node_type": node.node_type.value,
            }
            for node in tree.nodes
        ],
        "level_arities": list(tree.level_arities),
        "levels": None if tree.levels is None else [list(level) for level in tree.levels],
    }


def _to_dot(tree: TreeTopology) -> str:
    lines = [f"digraph tree_l{tree.l}_d{tree.d} {{", "  rankdir=BT;"]
    for node in tree.nodes:
        label = f"N{node.id}" + (" (root)" if node.is_root else "")
        lines.append(f'  n{node.id} [shape=ellipse, label="{label}"];')
    for node in tree.nodes:
        for j in node.blocks:
            lines.append(f'  m{j} [shape=box, label="m{j}"];')
    for node in tree.nodes:
        for pos, ref in enumerate(node.input, start=1):
            src = f"m{ref.value}" if ref.is_block else f"n{ref.value}"
            lines.append(f'  {src} -> n{node.id} [label="{pos}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_topology(tree: TreeTopology, fmt: str = "json") -> bytes:
    fmt = fmt.lower()
    if fmt == "json":
        return (json.dumps(_to_dict(tree), indent=2) + "\n").encode()
    if fmt == "dot":
        return _to_dot(tree).encode()
    raise ValueError(f"unknown format {fmt!r}")


def parse_topology(data: bytes | str) -> TreeTopology:
    raw = json.loads(data)
    nodes = []
    for entry in raw["nodes"]:
        refs = []
        for ref in entry["input"]:
            if "block" in ref:
                refs.append(InputRef.block(int(ref["block"])))
            else:
                refs.append(InputRef.node(int(ref["node"])))
        nodes.append(TreeNode(int(entry["id"]), tuple(refs), NodeType(entry["node_type"])))
    levels = raw.get("levels")
    return TreeTopology(
        l=int(raw["l"]),
        d=int(raw["d"]),
        nodes=tuple(nodes),
        level_arities=tuple(raw.get("level_arities", ())),
        levels=None if levels is None else tuple(tuple(level) for level in levels),
    )


def block_counts(tree: TreeTopology) -> list[int]:
    return [len(node.blocks) for node in tree.nodes]


def describe(tree: TreeTopology) -> str:
    """One line per node, e.g. ``N3 root: m1 m2 c0 c2``."""
    return "\n".join(
        f"N{node.id}{' root' if node.is_root else ''}: " + " ".join(str(r) for r in node.input)
        for node in tree.nodes
    )


__all__ = [
    "InputRef",
    "NodeType",
    "TopologyError",
    "TreeNode",
    "TreeTopology",
    "block_counts",
    "build_bounded",
    "build_height2",
    "build_same_depth_base",
    "build_single_node",
    "build_unrestricted",
    "describe",
    "export_topology",
    "from_nested",
    "inline_leftmost_transform",
    "parse_topology",
]
