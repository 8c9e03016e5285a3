"""Command-line front end: ``ntisp <command> ...``.

Exit status is 0 for sat/accept/holds/ok, 1 for unsat/reject/fails and 2
for usage, parse or validation errors. ``--json`` prints one report object
(sorted keys, no timings, so identical inputs give identical bytes).
"""
from __future__ import annotations

import argparse
import json
import math
import random
import sys
from typing import Optional

import numpy as np

from . import eso, eso2lc, lc, nram, nram2eso
from .errors import NtispError, ParseError, TooLargeError, ValidationError
from .structures import load_structure, serialize

OK, FAIL, USAGE = 0, 1, 2
GOOD = {"sat", "accept", "holds", "ok"}
INVALID = "invalid"
PAD_WRITE_CAP = 10 ** 7


class _Usage(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise _Usage(f"cannot read {path}: {exc.strerror}") from None


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _ints(path: str) -> list:
    return nram.load_certificate(_read(path))


def _emit(args, report: dict) -> int:
    verdict = report.get("verdict", "ok")
    if args.json:
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        for key in sorted(report):
            val = report[key]
            if isinstance(val, (dict, list)):
                val = json.dumps(val, sort_keys=True)
            print(f"{key}: {val}")
    if verdict == INVALID:
        return USAGE
    return OK if verdict in GOOD else FAIL


def _meter_row(instance, size, verdict, peak, steps=None, content=None) -> dict:
    return {"instance": instance, "size": size, "verdict": verdict, "steps": steps,
            "peak_live": peak, "peak_content": content}


# ------------------------------------------------------------------ nram

def _budget(args, n: int):
    if args.budget:
        return nram.Budget.parse(args.budget)
    if args.c:
        return nram2eso.theorem_budget(n, args.c)
    raise _Usage("give --budget steps=..,addr=..,content=.. or --c")


def cmd_nram(args) -> int:
    prog = nram.assemble(_read(args.program), source=args.program)
    s = load_structure(_read(args.input), source=args.input)
    budget = _budget(args, s.n)
    if args.action == "run":
        cert = _ints(args.cert) if args.cert else []
        res = nram.run(prog, s, cert, budget)
        report = {"verdict": res.verdict, **res.meter.as_dict()}
        if args.meter_report:
            report["meter"] = [_meter_row(args.input, s.n, res.verdict, res.meter.max_address,
                                          res.meter.steps, res.meter.max_content)]
        return _emit(args, report)
    bound = args.guess_bound or budget.max_content + 1
    cert = nram.search_certificate(prog, s, budget, bound)
    report = {"verdict": "accept" if cert is not None else "reject", "certificate": cert}
    if cert is not None and args.output:
        _write(args.output, "".join(f"{v}\n" for v in cert))
    return _emit(args, report)


# ------------------------------------------------------------------- eso

def cmd_eso(args) -> int:
    phi = eso.parse_eso(_read(args.formula), source=args.formula)
    if args.action == "validate":
        problems = eso.validate_restricted(phi)
        report = {"verdict": "ok" if not problems else INVALID,
                  "s": phi.s, "r": phi.r, "violations": [str(v) for v in problems]}
        return _emit(args, report)
    if not args.structure:
        raise _Usage("eso check needs --structure")
    s = load_structure(_read(args.structure), source=args.structure)
    if args.mode == "brute":
        res = eso.brute_force_check(s, phi)
    else:
        witness = None
        if args.witness:
            w = eso.load_witness(_read(args.witness), source=args.witness)
            witness = dict(w.tables)
        res = eso.streaming_check(s, phi, witness=witness, search=witness is None)
    report = {"verdict": "holds" if res.holds else "fails", "mode": args.mode,
              "peak_live": res.peak_live, "blocks_checked": res.blocks_checked}
    if res.witness is not None and args.output:
        _write(args.output, serialize(res.witness, header="witness"))
    return _emit(args, report)


# --------------------------------------------------------------- compile

def cmd_compile(args) -> int:
    prog = nram.assemble(_read(args.program), source=args.program)
    c = args.c
    if args.auto_c:
        if not args.input:
            raise _Usage("--auto-c needs --input")
        s = load_structure(_read(args.input), source=args.input)
        c, _ = nram2eso.auto_c(prog, s)
        if c is None:
            return _emit(args, {"verdict": "fails", "reason": "no accepting run up to the c cap"})
    if not c:
        raise _Usage("give --c or --auto-c")
    cf = nram2eso.compile(prog, c)
    formula = cf.formula
    if args.fold:
        if not args.n:
            raise _Usage("--fold needs --n")
        formula = nram2eso.fold_domain(cf, args.n).formula
    _write(args.output, str(formula) + "\n")
    return OK


def cmd_witness(args) -> int:
    prog = nram.assemble(_read(args.program), source=args.program)
    s = load_structure(_read(args.input), source=args.input)
    cert = _ints(args.cert) if args.cert else []
    cf = nram2eso.compile(prog, args.c)
    tables = nram2eso.build_witness(prog, s, cert, args.c)
    M = args.c * s.n
    _write(args.output, serialize(eso.witness_structure(M, cf.formula, tables), header="witness"))
    if args.structure_out:
        _write(args.structure_out, serialize(nram2eso.extended_structure(s, args.c)))
    return OK


# ---------------------------------------------------------------- reduce

def cmd_reduce(args) -> int:
    if args.kind == "eso2lc":
        phi = eso.parse_eso(_read(args.phi), source=args.phi)
        s = load_structure(_read(args.structure), source=args.structure)
        u = eso2lc.unfold(phi, s.n)
        inst = eso2lc.unpadded_instance(u, s) if args.unpadded else eso2lc.pad_to_lc(u, s)
        stages = {"n": s.n, "k": u.k, "N": u.N}
    else:
        prog = nram.assemble(_read(args.program), source=args.program)
        s = load_structure(_read(args.input), source=args.input)
        red = eso2lc.reduce_problem(s, prog, args.c)
        stages = {k: v for k, v in red.stages.items() if k != "sigma"}
        inst = (eso2lc.unpadded_instance(red.unfolded, red.stages["sigma"])
                if args.unpadded else red.instance)
    entries = sum(len(t) for t in inst.op.values())
    if args.stats or (args.output is None and entries > PAD_WRITE_CAP):
        stages["op_entries"] = entries
        return _emit(args, {"verdict": "ok", "stages": stages})
    if entries > PAD_WRITE_CAP:
        raise TooLargeError(f"instance has {entries} operator entries over N={inst.n}; "
                            "use --unpadded or --stats")
    _write(args.output, lc.serialize(inst))
    return OK


# -------------------------------------------------------------------- lc

def cmd_lc(args) -> int:
    if args.action == "gen":
        rng = random.Random(args.seed)
        if args.chain:
            inst = lc.chain_instance(args.chain, args.n)
        else:
            inst = lc.random_instance(rng, n=args.n, t=args.t, s=args.s, l=args.l)
        _write(args.output, lc.serialize(inst))
        return OK
    inst = lc.load_instance(_read(args.instance), source=args.instance)
    if args.action == "validate":
        problems = lc.validate_instance(inst)
        return _emit(args, {"verdict": "ok" if not problems else INVALID,
                            "violations": [str(p) for p in problems]})
    if args.action == "verify":
        if not args.cert:
            raise _Usage("lc verify needs --cert")
        cert = lc.load_certificate(_read(args.cert), source=args.cert)
        res = lc.solve_stream(inst, cert=cert)
    elif args.method == "stream":
        res = lc.solve_stream(inst, search=True)
    elif args.method == "brute":
        res = lc.solve_brute(inst)
    else:
        res = lc.solve_sat(inst)
    report = {"verdict": res.verdict, "peak_live": res.peak_live,
              "comparisons": res.comparisons, "reason": res.reason}
    if args.meter_report:
        report["meter"] = [_meter_row(args.instance, inst.size(), res.verdict, res.peak_live)]
    if res.verdict == "sat" and args.output:
        cert = res.certificate or lc.certificate_from_assignment(inst, res.assignment)
        _write(args.output, cert.dump())
    return _emit(args, report)


# ---------------------------------------------------------------- planar

def cmd_planar(args) -> int:
    from .sublinear import graphstream, planar, separator, septree
    g = planar.load_graph(_read(args.graph), source=args.graph)
    if args.action == "sep":
        sep = separator.planar_separator(g)
        return _emit(args, {"verdict": "ok", "A": sorted(sep.A), "B": sorted(sep.B),
                            "C": sorted(sep.C), "bound_C": round(separator.separator_bound(g.n), 6)})
    tree = septree.build_separating_tree(g)
    if args.action == "tree":
        report = {"verdict": "ok", "depth": tree.depth(), "max_branch_weight": tree.max_branch_weight(),
                  "leaf_threshold": septree.leaf_threshold(g.n),
                  "branch_ratio": round(tree.max_branch_weight() / math.sqrt(max(g.n, 1)), 6)}
        if args.full:
            report["tree"] = septree.dump_tree(tree)
        return _emit(args, report)
    cert = _ints(args.cert) if args.mode == "verify" and args.cert else None
    if args.mode == "verify" and cert is None:
        raise _Usage("verify mode needs --cert")
    if args.action == "3col":
        res = graphstream.stream_3color(g, tree, args.mode, cert)
    else:
        if args.k is None:
            raise _Usage("vc needs --k")
        res = graphstream.stream_vertex_cover(g, tree, args.k, args.mode, cert)
    report = {"verdict": res.verdict, "peak_live": res.peak_live, "reason": res.reason}
    if res.certificate is not None and args.output:
        _write(args.output, "".join(f"{v}\n" for v in res.certificate))
    if args.meter_report:
        report["meter"] = [_meter_row(args.graph, g.n, res.verdict, res.peak_live)]
    return _emit(args, report)


# --------------------------------------------------------------- numeric

def cmd_numeric(args) -> int:
    from .sublinear import numeric
    cert = _ints(args.cert) if args.mode == "verify" and args.cert else None
    if args.mode == "verify" and cert is None:
        raise _Usage("verify mode needs --cert")
    if args.problem == "partition":
        nums, base = numeric.load_numbers(_read(args.file), source=args.file)
        res = numeric.stream_partition(nums, base, args.mode, cert)
    else:
        items, B, K, base = numeric.load_knapsack(_read(args.file), source=args.file)
        res = numeric.stream_knapsack(items, B, K, base, args.mode, cert)
    report = {"verdict": res.verdict, "peak_registers": res.peak_registers, "size": res.size,
              "base": base, "reason": res.reason}
    if res.certificate is not None and args.output:
        _write(args.output, "".join(f"{v}\n" for v in res.certificate))
    if args.meter_report:
        report["meter"] = [_meter_row(args.file, res.size, res.verdict, res.peak_registers)]
    return _emit(args, report)


# ---------------------------------------------------------------- tiling

def cmd_tiling(args) -> int:
    from .sublinear import tiling
    t = tiling.load_tiling(_read(args.file), source=args.file)
    cert = _ints(args.cert) if args.mode == "verify" and args.cert else None
    if args.mode == "verify" and cert is None:
        raise _Usage("verify mode needs --cert")
    res = tiling.stream_tiling(t, args.mode, cert)
    report = {"verdict": res.verdict, "peak_live": res.peak_live, "reason": res.reason,
              "slice_cells": len(t.slices()[0])}
    if res.certificate is not None and args.output:
        _write(args.output, "".join(f"{v}\n" for v in res.certificate))
    if args.meter_report:
        report["meter"] = [_meter_row(args.file, t.size, res.verdict, res.peak_live)]
    return _emit(args, report)


# ----------------------------------------------------------------- meter

def _family_run(job):
    family, size, seed = job
    from .sublinear import graphstream, numeric, planar, septree, tiling
    if family in ("3col", "vc"):
        g = planar.random_triangulation(size, np.random.default_rng([seed, size]))
        tree = septree.build_separating_tree(g)
        if family == "3col":
            import networkx as nx
            col = nx.greedy_color(g.nx(), strategy="largest_first")
            cert = [min(col[v], 2) for v in range(g.n)]
            res = graphstream.stream_3color(g, tree, "verify", cert, full_pass=True)
        else:
            res = graphstream.stream_vertex_cover(g, tree, g.n, "verify", [1] * g.n)
        return _meter_row(f"{family}-n{size}", size, res.verdict, res.peak_live), math.sqrt(size)
    if family == "partition":
        nums, base = partition_family(size, random.Random(seed))
        bits = [random.Random(seed + i).randint(0, 1) for i in range(len(nums))]
        res = numeric.stream_partition(nums, base, "verify", bits)
        return _meter_row(f"partition-n{res.size}", res.size, res.verdict, res.peak_registers), math.sqrt(res.size)
    if family == "tiling":
        t = tiling.GridTiling(2, (size, size), {(i, j): ((0, 0, 0, 0),) for i in range(size) for j in range(size)})
        res = tiling.stream_tiling(t, "verify", [0] * t.size)
        return _meter_row(f"tiling-{size}x{size}", t.size, res.verdict, res.peak_live), math.sqrt(t.size)
    if family == "lc-chain":
        inst = lc.chain_instance(size)
        cert = lc.solve_stream(inst, search=True).certificate
        res = lc.solve_stream(inst, cert=cert)
        return _meter_row(f"chain-l{size}", inst.size(), res.verdict, res.peak_live), 1.0
    raise _Usage(f"unknown family {family!r}")


def partition_family(n: int, rng: random.Random) -> tuple:
    """About n digits in base n, half of them in numbers just below the
    small/large boundary and half in numbers just above it."""
    from .sublinear.numeric import small_limit
    base = max(2, n)
    q = small_limit(n) + 1
    nums, total, flip = [], 0, False
    while total < n:
        length = max(1, q - 1) if flip else q
        length = min(length, n - total)
        nums.append((rng.randrange(1, base),) + tuple(rng.randrange(base) for _ in range(length - 1)))
        total += length
        flip = not flip
    return nums, base


def cmd_meter(args) -> int:
    sizes = [int(x) for x in args.sizes.split(",")]
    jobs = [(args.family, size, args.seed) for size in sizes]
    if args.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(args.jobs) as ex:
            results = list(ex.map(_family_run, jobs))
    else:
        results = [_family_run(j) for j in jobs]
    rows = [r for r, _ in results]
    ratios = [r["peak_live"] / env for r, env in results]
    report = {"verdict": "ok", "family": args.family, "seed": args.seed, "rows": rows,
              "ratios": [round(x, 6) for x in ratios]}
    if len(rows) >= 3:
        fit = max(ratios) / min(ratios) if min(ratios) > 0 else float("inf")
        report["fit_ratio"] = round(fit, 6)
        if fit > args.max_fit:
            report["verdict"] = "fails"
    else:
        report["fit_ratio"] = None
    return _emit(args, report)


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable report")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized generators")
    common.add_argument("--meter-report", action="store_true", help="append a meter row")
    common.add_argument("-o", "--output", help="output file ('-' for stdout)")

    p = argparse.ArgumentParser(prog="ntisp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("nram", parents=[common], help="run or search an NRAM program")
    q.add_argument("action", choices=["run", "search"])
    q.add_argument("--program", required=True)
    q.add_argument("--input", required=True)
    q.add_argument("--cert")
    q.add_argument("--budget")
    q.add_argument("--c", type=int)
    q.add_argument("--guess-bound", type=int)
    q.set_defaults(fn=cmd_nram)

    q = sub.add_parser("eso", parents=[common], help="validate or model-check a formula")
    q.add_argument("action", choices=["validate", "check"])
    q.add_argument("formula")
    q.add_argument("--structure")
    q.add_argument("--mode", choices=["brute", "stream"], default="brute")
    q.add_argument("--witness")
    q.set_defaults(fn=cmd_eso)

    q = sub.add_parser("compile", parents=[common], help="NRAM program to ESO formula")
    q.add_argument("--program", required=True)
    q.add_argument("--c", type=int)
    q.add_argument("--auto-c", action="store_true")
    q.add_argument("--input")
    q.add_argument("--fold", action="store_true")
    q.add_argument("--n", type=int)
    q.set_defaults(fn=cmd_compile)

    q = sub.add_parser("witness", parents=[common], help="witness tables from an accepting run")
    q.add_argument("--program", required=True)
    q.add_argument("--input", required=True)
    q.add_argument("--cert")
    q.add_argument("--c", type=int, required=True)
    q.add_argument("--structure-out")
    q.set_defaults(fn=cmd_witness)

    q = sub.add_parser("reduce", parents=[common], help="reductions to Layered-Constraints")
    q.add_argument("kind", choices=["eso2lc", "p2lc"])
    q.add_argument("--phi")
    q.add_argument("--structure")
    q.add_argument("--program")
    q.add_argument("--input")
    q.add_argument("--c", type=int, default=2)
    q.add_argument("--unpadded", action="store_true")
    q.add_argument("--stats", action="store_true")
    q.set_defaults(fn=cmd_reduce)

    q = sub.add_parser("lc", parents=[common], help="Layered-Constraints instances")
    q.add_argument("action", choices=["validate", "verify", "solve", "gen"])
    q.add_argument("instance", nargs="?")
    q.add_argument("--cert")
    q.add_argument("--method", choices=["stream", "brute", "sat"], default="stream")
    q.add_argument("--n", type=int, default=3)
    q.add_argument("--t", type=int, default=2)
    q.add_argument("--s", type=int, default=1)
    q.add_argument("--l", type=int, default=3)
    q.add_argument("--chain", type=int)
    q.set_defaults(fn=cmd_lc)

    q = sub.add_parser("planar", parents=[common], help="separators, trees and streaming solvers")
    q.add_argument("action", choices=["sep", "tree", "3col", "vc"])
    q.add_argument("graph")
    q.add_argument("--mode", choices=["verify", "search"], default="search")
    q.add_argument("--cert")
    q.add_argument("--k", type=int)
    q.add_argument("--full", action="store_true", help="include the tree itself")
    q.set_defaults(fn=cmd_planar)

    q = sub.add_parser("numeric", parents=[common], help="digit-streaming Partition/Knapsack")
    q.add_argument("problem", choices=["partition", "knapsack"])
    q.add_argument("file")
    q.add_argument("--mode", choices=["verify", "search"], default="search")
    q.add_argument("--cert")
    q.set_defaults(fn=cmd_numeric)

    q = sub.add_parser("tiling", parents=[common], help="slice-streaming tiling")
    q.add_argument("action", choices=["solve"])
    q.add_argument("file")
    q.add_argument("--mode", choices=["verify", "search"], default="search")
    q.add_argument("--cert")
    q.set_defaults(fn=cmd_tiling)

    q = sub.add_parser("meter", parents=[common], help="envelope fit over a size family")
    q.add_argument("family", choices=["3col", "vc", "partition", "tiling", "lc-chain"])
    q.add_argument("--sizes", required=True, help="comma-separated sizes")
    q.add_argument("--jobs", type=int, default=1)
    q.add_argument("--max-fit", type=float, default=3.0)
    q.set_defaults(fn=cmd_meter)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "lc" and args.action != "gen" and not args.instance:
        parser.error("lc needs an instance file")
    try:
        return args.fn(args)
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except (ParseError, ValidationError, TooLargeError, NtispError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
