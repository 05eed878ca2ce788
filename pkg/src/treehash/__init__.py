"""Tree hash modes with message blocks at every level of the tree.

Builders for the optimal topologies, closed-form running-time predictors,
a lockstep PRAM simulator, a brute-force optimality oracle and a toy sponge
inner function whose cost per block matches the idealized rate.
"""

from .cost import CostParams, ItemKind, StreamItem, absorb_finish_time, call_count
from .formulas import (
    BoundedPlan,
    Height2Plan,
    UnrestrictedPlan,
    height2_k,
    height2_optimized,
    predict_bounded,
    predict_unrestricted,
    select_leaf_arity,
    ternary_derivation_time,
)
from .topology import (
    InputRef,
    NodeType,
    TreeNode,
    TreeTopology,
    build_bounded,
    build_height2,
    build_same_depth_base,
    build_single_node,
    build_unrestricted,
    export_topology,
    inline_leftmost_transform,
    parse_topology,
)
from .scheduler import Schedule, critical_path, simulate
from .parallel import ExecutionReport, Mode, hash_lockstep, hash_sequential, hash_workerpool

__version__ = "0.1.0"

__all__ = [
    "BoundedPlan",
    "CostParams",
    "ExecutionReport",
    "Height2Plan",
    "InputRef",
    "ItemKind",
    "Mode",
    "NodeType",
    "Schedule",
    "StreamItem",
    "TreeNode",
    "TreeTopology",
    "UnrestrictedPlan",
    "absorb_finish_time",
    "build_bounded",
    "build_height2",
    "build_same_depth_base",
    "build_single_node",
    "build_unrestricted",
    "call_count",
    "critical_path",
    "export_topology",
    "hash_lockstep",
    "hash_sequential",
    "hash_workerpool",
    "height2_k",
    "height2_optimized",
    "inline_leftmost_transform",
    "parse_topology",
    "predict_bounded",
    "predict_unrestricted",
    "select_leaf_arity",
    "simulate",
    "ternary_derivation_time",
]
