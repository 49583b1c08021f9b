"""``pcfdp`` command line: static solves and dynamic trace replays.

Usage: ``pcfdp PROBLEM ACTION [options]`` with PROBLEM one of
``knapsack``, ``knapsack-fast``, ``partition``, ``ssl``, ``necklace`` and
ACTION one of ``solve``, ``replay``.

Input files are whitespace separated, one record per line, with ``#``
starting a comment.  Exit status is 0 on success, 2 for unreadable or
malformed input (including operations the instance rejects) and 3 when
an instance has no feasible solution.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .dpengine import identity_sparsifier, piece_count
from .errors import Infeasible, PcfdpError
from .knapsack import FastKnapsack, KnapsackTree
from .necklace import DynamicNecklace, neck_static
from .partition import DynamicPartition, PartitionDP
from .source_location import SSLDP, DynamicSSL

PROBLEMS = ("knapsack", "knapsack-fast", "partition", "ssl", "necklace")
ACTIONS = ("solve", "replay")


class InputError(Exception):
    """Malformed input, reported with its file and line."""


@dataclass
class Line:
    path: str
    number: int
    tokens: list

    def where(self) -> str:
        return f"{self.path}:{self.number}"

    def fail(self, msg: str) -> "InputError":
        return InputError(f"{self.where()}: {msg}")

    def arity(self, n: int) -> None:
        if len(self.tokens) != n:
            raise self.fail(f"expected {n} fields, got {len(self.tokens)}")

    def num(self, i: int) -> float:
        try:
            x = float(self.tokens[i])
        except ValueError:
            raise self.fail(f"{self.tokens[i]!r} is not a number") from None
        if math.isnan(x):
            raise self.fail("NaN is not allowed")
        return x

    def int(self, i: int) -> int:
        try:
            return int(self.tokens[i])
        except ValueError:
            raise self.fail(f"{self.tokens[i]!r} is not an integer") from None


def read_lines(path: str) -> list[Line]:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read().splitlines()
    except OSError as e:
        raise InputError(f"{path}: cannot read ({e.strerror or e})") from None
    out = []
    for i, text in enumerate(raw, 1):
        tokens = text.split("#", 1)[0].split()
        if tokens:
            out.append(Line(path, i, tokens))
    return out


def _take_header(lines: list[Line], path: str, arity: int) -> Line:
    if not lines:
        raise InputError(f"{path}: empty instance file")
    lines[0].arity(arity)
    return lines[0]


# ----------------------------------------------------------------------
# report


@dataclass
class RunReport:
    problem: str
    action: str
    mode: str
    seed: Optional[int]
    results: list = field(default_factory=list)
    recomputed: list = field(default_factory=list)
    elapsed: list = field(default_factory=list)
    max_pieces: int = 0
    infeasible: bool = False

    def to_json(self, timings: bool) -> str:
        body = {
            "schema": 1,
            "problem": self.problem,
            "action": self.action,
            "mode": self.mode,
            "seed": self.seed,
            "results": self.results,
            "rows_recomputed": self.recomputed,
            "max_pieces": self.max_pieces,
        }
        if timings:
            body["elapsed"] = self.elapsed
        return json.dumps(body, sort_keys=True)

    def to_text(self) -> str:
        out = []
        for r in self.results:
            out.append(" ".join(f"{k}={_fmt(v)}" for k, v in r.items()))
        return "\n".join(out)


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, (list, tuple, set, frozenset)):
        return ",".join(str(x) for x in sorted(v, key=repr))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, (set, frozenset)):
        return sorted(v, key=repr)
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return v


class Recorder:
    """Collects per-operation timings, recompute counts and query results."""

    def __init__(self, report: RunReport):
        self.report = report

    def op(self, fn: Callable[[], Optional[list]]) -> None:
        t0 = time.perf_counter()
        touched = fn()
        self.report.elapsed.append(time.perf_counter() - t0)
        if touched is not None:
            self.report.recomputed.append(touched)

    def query(self, fn: Callable[[], dict]) -> None:
        t0 = time.perf_counter()
        try:
            res = fn()
        except Infeasible:
            res = {"value": "infeasible"}
            self.report.infeasible = True
        self.report.elapsed.append(time.perf_counter() - t0)
        self.report.results.append({k: _jsonable(v) for k, v in res.items()})

    def pieces(self, table, rows=None) -> None:
        rows = table.rows() if rows is None else rows
        best = max((piece_count(table[r]) for r in rows), default=0)
        self.report.max_pieces = max(self.report.max_pieces, best)


# ----------------------------------------------------------------------
# knapsack


def _knapsack_instance(args, lines: list[Line]):
    head = _take_header(lines, args.file, 3)
    n, B, eps = head.int(0), head.num(1), head.num(2)
    if args.eps is not None:
        eps = args.eps
    body = lines[1:]
    if len(body) != n:
        raise head.fail(f"header announces {n} items, file has {len(body)}")
    items = []
    for ln in body:
        ln.arity(2)
        items.append((ln.num(0), ln.num(1)))
    return B, eps, items


def _knapsack_trace(args) -> list[Line]:
    ops = read_lines(args.trace) if args.trace else []
    for ln in ops:
        kind = ln.tokens[0]
        if kind == "insert":
            ln.arity(3)
            ln.num(1), ln.num(2)
        elif kind == "delete":
            ln.arity(2)
            ln.int(1)
        elif kind == "query":
            ln.arity(1)
        else:
            raise ln.fail(f"unknown operation {kind!r}")
    return ops


def run_knapsack(args, rec: Recorder, fast: bool) -> None:
    if not args.file:
        raise InputError("knapsack needs --file")
    B, eps, items = _knapsack_instance(args, read_lines(args.file))
    ops = _knapsack_trace(args) if args.action == "replay" else []
    # W and the domain must cover every item the trace will ever add
    W = max(1.0, sum(p for p, _ in items) + sum(ln.num(1) for ln in ops if ln.tokens[0] == "insert"))
    heaviest = max([w for _, w in items] + [ln.num(2) for ln in ops if ln.tokens[0] == "insert"] + [1.0])
    if fast:
        if args.mode == "exact":
            raise InputError("knapsack-fast has no exact mode")
        state = FastKnapsack(B, eps, items, W=W)
        table = lambda: state.core.table  # noqa: E731
        ask = lambda: {"value": state.value(), "solution": state.solution()}  # noqa: E731
    else:
        state = KnapsackTree(B, eps, items, W=W, exact=args.mode == "exact", t_cap=B + heaviest)
        table = lambda: state.table  # noqa: E731
        ask = lambda: {"value": state.value(), "solution": state.solution()}  # noqa: E731
    rec.pieces(table())
    if args.action == "solve":
        rec.query(ask)
        return
    for ln in ops:
        kind = ln.tokens[0]
        try:
            if kind == "insert":
                rec.op(lambda: _touched(table(), lambda: state.insert(ln.num(1), ln.num(2))))
                rec.pieces(table(), table().last_recomputed)
            elif kind == "delete":
                rec.op(lambda: _touched(table(), lambda: state.delete(ln.int(1))))
                rec.pieces(table(), table().last_recomputed)
            else:
                rec.query(ask)
        except (PcfdpError, KeyError) as e:
            raise ln.fail(_describe(e)) from None


def _touched(table, fn) -> int:
    fn()
    return len(table.last_recomputed)


# ----------------------------------------------------------------------
# partition


def _partition_instance(args, lines: list[Line]):
    head = _take_header(lines, args.file, 4)
    n, k = head.int(0), head.int(1)
    eps, eps_bar = head.tokens[2], head.tokens[3]
    if args.k is not None:
        k = args.k
    if args.eps is not None:
        eps = str(args.eps)
    if args.eps_bar is not None:
        eps_bar = str(args.eps_bar)
    try:
        eps_f, eps_bar_f = Fraction(eps), Fraction(eps_bar)
    except (ValueError, ZeroDivisionError):
        raise head.fail("eps and eps_bar must be numbers") from None
    edges, weight = [], {}
    for ln in lines[1:]:
        if ln.tokens[0] == "w":
            ln.arity(3)
            v, w = ln.int(1), ln.int(2)
            _vertex(ln, v, n)
            if w not in (0, 1):
                raise ln.fail(f"vertex weights are 0 or 1, got {w}")
            weight[v] = w
        else:
            ln.arity(3)
            u, v = ln.int(0), ln.int(1)
            _vertex(ln, u, n)
            _vertex(ln, v, n)
            edges.append((u, v, ln.num(2)))
    return n, k, eps_f, eps_bar_f, edges, {v: weight.get(v, 1) for v in range(n)}


def _vertex(ln: Line, v: int, n: int) -> None:
    if not 0 <= v < n:
        raise ln.fail(f"vertex {v} outside 0..{n - 1}")


def run_partition(args, rec: Recorder) -> None:
    if not args.file:
        raise InputError("partition needs --file")
    lines = read_lines(args.file)
    n, k, eps, eps_bar, edges, weight = _partition_instance(args, lines)
    try:
        if args.action == "solve":
            sparsifier = identity_sparsifier(range(n), edges)
            dp = PartitionDP(sparsifier.tree, weight, k, eps, eps_bar, mode=args.mode)
            rec.pieces(dp.table)
            rec.query(lambda: {"value": dp.query().value, "quality": sparsifier.quality})
            return
        dyn = DynamicPartition(range(n), edges, k, eps, eps_bar, height_bound=2 * n, mode=args.mode, weight=weight)
    except PcfdpError as e:
        raise InputError(f"{args.file}: {_describe(e)}") from None
    rec.pieces(dyn.dp.table)
    for ln in read_lines(args.trace) if args.trace else []:
        kind = ln.tokens[0]
        try:
            if kind == "link":
                ln.arity(4)
                rec.op(lambda: len(dyn.link(ln.int(1), ln.int(2), ln.num(3))))
                rec.pieces(dyn.dp.table, dyn.dp.table.last_recomputed)
            elif kind == "cut":
                ln.arity(3)
                rec.op(lambda: len(dyn.cut(ln.int(1), ln.int(2))))
                rec.pieces(dyn.dp.table, dyn.dp.table.last_recomputed)
            elif kind == "query":
                ln.arity(1)
                rec.query(lambda: {"value": dyn.query(), "quality": 1.0})
            else:
                raise ln.fail(f"unknown operation {kind!r}")
        except (PcfdpError, KeyError) as e:
            raise ln.fail(_describe(e)) from None


# ----------------------------------------------------------------------
# source location


def _ssl_instance(args, lines: list[Line]):
    head = _take_header(lines, args.file, 2)
    n, eps = head.int(0), head.num(1)
    if args.eps is not None:
        eps = args.eps
    body = lines[1:]
    if len(body) != 2 * n - 1:
        raise head.fail(f"expected {n - 1} edge lines and {n} vertex lines, got {len(body)} lines")
    edges, demand, allowed = [], {}, {}
    for ln in body[: n - 1]:
        ln.arity(3)
        u, v = ln.int(0), ln.int(1)
        _vertex(ln, u, n)
        _vertex(ln, v, n)
        edges.append((u, v, ln.num(2)))
    for ln in body[n - 1 :]:
        ln.arity(3)
        v = ln.int(0)
        _vertex(ln, v, n)
        d = ln.num(1)
        if not math.isfinite(d) or d < 0:
            raise ln.fail(f"demands must be finite and non-negative, got {d}")
        flag = ln.int(2)
        if flag not in (0, 1):
            raise ln.fail(f"source_allowed is 0 or 1, got {flag}")
        demand[v], allowed[v] = d, bool(flag)
    return n, eps, edges, demand, allowed


def run_ssl(args, rec: Recorder) -> None:
    if not args.file:
        raise InputError("ssl needs --file")
    n, eps, edges, demand, allowed = _ssl_instance(args, read_lines(args.file))
    try:
        if args.action == "solve":
            dp = SSLDP(identity_sparsifier(range(n), edges).tree, demand, allowed, eps, args.mode)
            rec.pieces(dp.table)

            def ask():
                r = dp.query()
                return {"value": r.value, "sources": r.sources}

            rec.query(ask)
            return
        dyn = DynamicSSL(range(n), edges, demand, allowed, eps, height_bound=2 * n, mode=args.mode)
    except PcfdpError as e:
        raise InputError(f"{args.file}: {_describe(e)}") from None
    table = dyn.dp.table
    rec.pieces(table)
    for ln in read_lines(args.trace) if args.trace else []:
        kind = ln.tokens[0]
        try:
            if kind == "setdemand":
                ln.arity(3)
                rec.op(lambda: len(dyn.set_demand(ln.int(1), ln.num(2))))
            elif kind == "setcap":
                ln.arity(4)
                rec.op(lambda: len(dyn.set_capacity(ln.int(1), ln.int(2), ln.num(3))))
            elif kind == "remove":
                ln.arity(3)
                rec.op(lambda: len(dyn.remove(ln.int(1), ln.int(2))))
            elif kind == "insert":
                ln.arity(4)
                rec.op(lambda: len(dyn.insert(ln.int(1), ln.int(2), ln.num(3))))
            elif kind == "query":
                ln.arity(1)
                rec.query(lambda: {"value": dyn.query()})
                continue
            else:
                raise ln.fail(f"unknown operation {kind!r}")
            rec.pieces(table, table.last_recomputed)
        except (PcfdpError, KeyError) as e:
            raise ln.fail(_describe(e)) from None


# ----------------------------------------------------------------------
# necklace


def _necklace_instance(args, lines: list[Line]):
    head = _take_header(lines, args.file, 2)
    n, eps = head.int(0), head.num(1)
    if args.eps is not None:
        eps = args.eps
    body = lines[1:]
    if len(body) != n:
        raise head.fail(f"header announces {n} bead pairs, file has {len(body)}")
    x, y = [], []
    for ln in body:
        ln.arity(2)
        x.append(ln.num(0))
        y.append(ln.num(1))
    return eps, x, y


def _alignment(r) -> dict:
    return {"value": r.value, "c": r.offset, "s": r.shift}


def run_necklace(args, rec: Recorder) -> None:
    if args.mode == "exact":
        raise InputError("necklace has no exact mode")
    if args.file:
        lines = read_lines(args.file)
        eps, x, y = _necklace_instance(args, lines)
    elif args.action == "replay":
        eps, x, y = args.eps if args.eps is not None else 0.05, [], []
    else:
        raise InputError("necklace solve needs --file")
    try:
        if args.action == "solve":
            rec.query(lambda: _alignment(neck_static(x, y, eps)))
            return
        state = DynamicNecklace(eps)
        for i, (a, b) in enumerate(zip(x, y)):
            state.insert(i, a, b)
    except PcfdpError as e:
        raise InputError(f"{args.file}: {_describe(e)}") from None
    rec.report.max_pieces = max(state.piece_counts())
    for ln in read_lines(args.trace) if args.trace else []:
        kind = ln.tokens[0]
        try:
            if kind == "insert":
                ln.arity(4)
                rec.op(lambda: state.insert(ln.int(1), ln.num(2), ln.num(3)))
            elif kind == "delete":
                ln.arity(2)
                rec.op(lambda: state.delete(ln.int(1)))
            elif kind == "query":
                ln.arity(1)
                rec.query(lambda: _alignment(state.query()))
                continue
            else:
                raise ln.fail(f"unknown operation {kind!r}")
            rec.report.max_pieces = max(rec.report.max_pieces, *state.piece_counts())
        except PcfdpError as e:
            raise ln.fail(_describe(e)) from None


# ----------------------------------------------------------------------
# entry point


def _describe(e: BaseException) -> str:
    detail = str(e)
    return f"{type(e).__name__}: {detail}" if detail else type(e).__name__


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pcfdp", description="Dynamic DP over piecewise constant functions.")
    p.add_argument("problem", choices=PROBLEMS)
    p.add_argument("action", choices=ACTIONS)
    p.add_argument("--file", help="instance file")
    p.add_argument("--trace", help="operation trace for replay")
    p.add_argument("--eps", type=float, help="accuracy parameter (overrides the file)")
    p.add_argument("--k", type=int, help="number of parts for partition (overrides the file)")
    p.add_argument("--eps-bar", type=float, dest="eps_bar", help="balance slack for partition (overrides the file)")
    p.add_argument("--mode", choices=("exact", "approx"), default="approx")
    p.add_argument("--report", choices=("json", "text"), default="text")
    p.add_argument("--seed", type=int, help="recorded in the report; all algorithms are deterministic")
    p.add_argument("--timings", action="store_true", help="include per-operation wall-clock times in JSON")
    return p


RUNNERS = {
    "knapsack": lambda a, r: run_knapsack(a, r, fast=False),
    "knapsack-fast": lambda a, r: run_knapsack(a, r, fast=True),
    "partition": run_partition,
    "ssl": run_ssl,
    "necklace": run_necklace,
}


def main(argv: Optional[list] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    report = RunReport(args.problem, args.action, args.mode, args.seed)
    try:
        RUNNERS[args.problem](args, Recorder(report))
    except InputError as e:
        print(f"pcfdp: {e}", file=sys.stderr)
        return 2
    except Infeasible as e:
        print(f"pcfdp: infeasible: {e}", file=sys.stderr)
        return 3
    except PcfdpError as e:
        print(f"pcfdp: {_describe(e)}", file=sys.stderr)
        return 2
    text = report.to_json(args.timings) if args.report == "json" else report.to_text()
    if text:
        print(text)
    return 3 if report.infeasible else 0


if __name__ == "__main__":
    sys.exit(main())
