"""Command-line front end: predict, build, simulate, hash and verify.

Exit codes: 0 success, 1 usage error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .cost import CostParams
from .formulas import height2_k, height2_optimized, predict_bounded, predict_unrestricted, select_leaf_arity
from .intmath import ceil_div
from .scheduler import critical_path, simulate
from .topology import TreeTopology, build_single_node, describe, export_topology, parse_topology
from .verify import CHECKS, build_tree, run_check

BUILDERS = ("unrestricted", "height2", "height2-opt", "bounded", "same-depth")
EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class CliConfig:
    d: int = 1
    digest_bits: int = 128
    b: int | None = None
    P: int | None = None
    input: Path | None = None
    fmt: str = "text"

    def params(self) -> CostParams:
        try:
            return CostParams(self.d, self.digest_bits)
        except ValueError as exc:
            raise UsageError(str(exc)) from None


def _config(args) -> CliConfig:
    d = getattr(args, "d", None)
    cfg = CliConfig(
        d=1 if d is None else d,
        digest_bits=args.digest_bits,
        b=getattr(args, "b", None),
        P=getattr(args, "P", None),
        input=getattr(args, "file", None),
        fmt=getattr(args, "format", "text"),
    )
    if cfg.d < 1:
        raise UsageError("--d must be >= 1")
    if cfg.P is not None and cfg.P < 1:
        raise UsageError("--P must be >= 1")
    if cfg.b is not None and cfg.b not in (2, 3):
        raise UsageError("--b must be 2 or 3")
    return cfg


def _emit(obj, as_json: bool, text: str) -> None:
    print(json.dumps(obj, indent=2) if as_json else text)


def cmd_predict(args) -> int:
    cfg = _config(args)
    l, d = args.l, cfg.d
    if l < 2:
        raise UsageError("--l must be >= 2")
    t2, p2 = predict_unrestricted(l, d, 2)
    auto = select_leaf_arity(l, d)
    report = {"l": l, "d": d, "height2": None, "height2_optimized": None}
    lines = [f"l={l} d={d}"]
    if d == 1:
        # the height-2 plans are worked out for block-sized chaining values only
        h2, h2o = height2_k(l), height2_optimized(l)
        report["height2"] = {"time": h2.time, "processors": h2.processors, "k": h2.k, "i": h2.i,
                             "allocation": list(h2.allocation)}
        report["height2_optimized"] = {"time": h2o.time, "processors": h2o.processors, "k": h2o.k,
                                       "i": h2o.i, "allocation": list(h2o.allocation)}
        lines += [
            f"height-2:            time {h2.time} procs {h2.processors} (k={h2.k})",
            f"height-2 optimized:  time {h2o.time} procs {h2o.processors} (k={h2o.k}, i={h2o.i})",
        ]
    else:
        lines.append("height-2:            only defined for d=1")
    report["unrestricted"] = {"b": 2, "time": t2, "processors": p2}
    report["unrestricted_auto"] = {"b": auto.b, "time": auto.time, "processors": auto.processors}
    lines += [
        f"unrestricted b=2:    time {t2} procs {p2}",
        f"unrestricted b={auto.b} (auto): time {auto.time} procs {auto.processors}",
    ]
    if cfg.P is not None:
        bp = predict_bounded(l, d, cfg.P)
        report["bounded"] = {"P": bp.P, "requested_P": bp.requested_P, "a": bp.a, "b_count": bp.b_count,
                             "time": bp.time}
        note = f" (P clamped to {bp.P})" if bp.clamped else ""
        lines.append(f"bounded P={cfg.P}:    time {bp.time} ({bp.a} x {bp.large_chunk} + "
                     f"{bp.b_count} x {bp.small_chunk} blocks){note}")
    _emit(report, args.json, "\n".join(lines))
    return EXIT_OK


def _tree_from_args(args, cfg: CliConfig) -> TreeTopology:
    if getattr(args, "topology", None):
        tree = parse_topology(Path(args.topology).read_bytes())
        if tree.d != cfg.d:
            raise UsageError(f"topology file is for d={tree.d}, not d={cfg.d}")
        return tree
    if args.l is None:
        raise UsageError("--l is required")
    return _build(args.builder, args.l, cfg)


def _build(builder: str, l: int, cfg: CliConfig) -> TreeTopology:
    if l == 1:
        return build_single_node(1, cfg.d)
    if l < 1:
        raise UsageError("--l must be >= 1")
    if builder == "bounded" and cfg.P is None:
        raise UsageError("the bounded builder needs --P")
    return build_tree(builder, l, cfg.d, cfg.P, cfg.b)


def cmd_build(args) -> int:
    cfg = _config(args)
    tree = _tree_from_args(args, cfg)
    if cfg.fmt == "text":
        out = describe(tree).encode() + b"\n"
    else:
        out = export_topology(tree, cfg.fmt)
    if args.output:
        Path(args.output).write_bytes(out)
    else:
        sys.stdout.write(out.decode())
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config(args)
    tree = _tree_from_args(args, cfg)
    sched = simulate(tree, cfg.params())
    path = critical_path(sched, tree)
    if cfg.fmt == "json":
        data = json.loads(sched.to_json())
        data["critical_path"] = path
        print(json.dumps(data, indent=2))
    else:
        print(sched.gantt())
        print(f"makespan {sched.makespan}, {sched.processor_count} processors, {sched.total_calls} calls")
        print("critical path: " + " <- ".join(f"N{n}" for n in path))
    return EXIT_OK


def _predicted_time(builder: str, l: int, cfg: CliConfig) -> int | None:
    if l == 1:
        return 1
    if builder == "unrestricted":
        return predict_unrestricted(l, cfg.d, cfg.b or select_leaf_arity(l, cfg.d).b)[0]
    if builder == "height2":
        return height2_k(l).time if cfg.d == 1 else None
    if builder == "height2-opt":
        return height2_optimized(l).time if cfg.d == 1 else None
    if builder == "bounded":
        return predict_bounded(l, cfg.d, cfg.P).time
    return None


def cmd_hash(args) -> int:
    from .parallel import hash_lockstep, hash_sequential, hash_workerpool, last_block_bits

    cfg = _config(args)
    params = cfg.params()
    try:
        message = Path(args.file).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    if not message:
        raise UsageError("empty file")
    l = ceil_div(len(message), params.block_bytes)
    tree = _build(args.builder, l, cfg)
    if args.mode == "sequential":
        report = hash_sequential(message, tree, params)
    elif args.mode == "workerpool":
        report = hash_workerpool(message, tree, params, workers=args.workers or 4)
    else:
        report = hash_lockstep(message, tree, params, workers=args.workers)
    sched = simulate(tree, params, last_block_bits=last_block_bits(message, params))
    predicted = _predicted_time(args.builder, l, cfg)
    out = {
        "digest": report.hexdigest,
        "bytes": len(message),
        "l": l,
        "d": cfg.d,
        "builder": args.builder if l > 1 else "single-node",
        "nodes": tree.processor_count,
        "height": tree.height,
        "mode": report.mode.value,
        "total_calls": report.total_calls,
        "predicted_time": predicted,
        "simulated_time": sched.makespan,
        "lockstep_rounds": report.lockstep_rounds,
    }
    lines = [
        report.hexdigest,
        f"{len(message)} bytes, l={l} blocks, d={cfg.d}, {out['builder']} tree: "
        f"{tree.processor_count} nodes, height {tree.height}",
        f"predicted {predicted if predicted is not None else '-'}, simulated {sched.makespan}, "
        f"lockstep {report.lockstep_rounds if report.lockstep_rounds is not None else '-'} rounds; "
        f"{report.total_calls} calls",
    ]
    _emit(out, args.json, "\n".join(lines))
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.theorem not in CHECKS:
        raise UsageError(f"unknown theorem id {args.theorem!r}; choose from {', '.join(CHECKS)}")
    ds = args.d
    if args.theorem == "oracle" and not ds:
        ds = [1]
    try:
        result = run_check(args.theorem, l_min=args.l_min, l_max=args.l_max, ds=ds, p_max=args.P_max)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.json:
        print(json.dumps(result.to_dict(), indent=2, default=str))
    else:
        print(result.summary())
        for note in result.notes:
            print(f"  {note}")
    return EXIT_OK if result.passed else EXIT_FAILED


def make_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--digest-bits", type=int, default=128, help="chaining value size N_o")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    tree_opts = _Parser(add_help=False)
    tree_opts.add_argument("--l", type=int, help="message length in blocks")
    tree_opts.add_argument("--d", type=int, default=1, help="block size over digest size")
    tree_opts.add_argument("--builder", choices=BUILDERS, default="unrestricted")
    tree_opts.add_argument("--b", type=int, help="blocks per node (unrestricted / same-depth arity)")
    tree_opts.add_argument("--P", type=int, help="processor bound for the bounded builder")
    tree_opts.add_argument("--topology", help="read the tree from a JSON export instead")

    parser = _Parser(prog="treehash", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("predict", parents=[common], help="closed-form times and processor counts")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--P", type=int)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("build", parents=[common, tree_opts], help="build and export a topology")
    p.add_argument("--format", choices=("json", "dot", "text"), default="json")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("simulate", parents=[common, tree_opts], help="lockstep schedule of a topology")
    p.add_argument("--format", choices=("gantt", "json"), default="gantt")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("hash", parents=[common], help="hash a file with a tree mode")
    p.add_argument("file")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--builder", choices=BUILDERS, default="unrestricted")
    p.add_argument("--b", type=int)
    p.add_argument("--P", type=int)
    p.add_argument("--mode", choices=("lockstep", "workerpool", "sequential"), default="lockstep")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_hash)

    p = sub.add_parser("verify", parents=[common], help="run a theorem sweep")
    p.add_argument("--theorem", required=True)
    p.add_argument("--l-min", type=int)
    p.add_argument("--l-max", type=int)
    p.add_argument("--d", type=int, action="append", help="repeat for several values")
    p.add_argument("--P-max", type=int)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.json:
        args.format = "json"
    if args.command == "build" and args.json:
        args.format = "json"
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"treehash: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"treehash: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
