"""Acceptance criteria, one test per criterion.

Every test prints a single ``PASS``/``FAIL`` line (collected again in the
terminal summary by ``conftest.py``) and then asserts the hard part of its
criterion.  Run alone with ``pytest tests/test_acceptance.py -v -s``.
"""

import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from gen import random_pcf, random_tree, sorted_beads
from pcfdp.dpengine import identity_sparsifier, piece_count
from pcfdp.errors import Infeasible
from pcfdp.knapsack import FastKnapsack, KnapsackTree
from pcfdp.necklace import DynamicNecklace, neck_static
from pcfdp.noi import NOISet
from pcfdp.oracles import (
    oracle_convolution,
    oracle_knapsack,
    oracle_necklace,
    oracle_partition,
    oracle_ssl,
    oracle_ssl_feasible,
    oracle_ssl_least_inflow,
)
from pcfdp.partition import DynamicPartition, PartitionDP, build_topology, solve as partition_solve
from pcfdp.pcf import INF, RoundingConfig, add, convolve_general, convolve_monotone, eval_at, min2, round_up_pow, shift
from pcfdp.source_location import SSLDP, DynamicSSL, solve as ssl_solve

TOL = 1e-9
RESULTS: dict = {}


def verdict(number: int, title: str, failures: list, detail: str = "", elapsed: float = None) -> None:
    ok = not failures
    extra = f"; {detail}" if detail else ""
    timing = f" in {elapsed:.1f}s" if elapsed is not None else ""
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}{timing}{extra}"
    if failures:
        line += f"; {len(failures)} violation(s), first: {failures[0]}"
    RESULTS[number] = line
    print(line)
    assert ok, line


def try_value(f):
    try:
        return f()
    except Infeasible:
        return None


# 1 ----------------------------------------------------------------------


def test_criterion_1_convolution_matches_oracle():
    rng = random.Random(1001)
    t0 = time.perf_counter()
    failures = []
    for trial in range(500):
        f1 = random_pcf(rng, 100, rng.randint(1, 20))
        f2 = random_pcf(rng, 100, rng.randint(1, 20))
        h, _ = convolve_monotone(f1, f2)
        xs = list(range(int(h.hi) + 1))
        if h.at(xs).tolist() != oracle_convolution(f1, f2, xs):
            failures.append(f"pair {trial}: monotone convolution differs from the oracle")
            continue
        g = convolve_general(f1, f2)
        probes = sorted(set(xs) | {(a + b) / 2 for a, b in zip(g.starts.tolist(), g.ends.tolist())})
        if (g.lo, g.hi) != (h.lo, h.hi) or g.at(probes).tolist() != h.at(probes).tolist():
            failures.append(f"pair {trial}: general convolution differs from monotone")
    elapsed = time.perf_counter() - t0
    verdict(1, "convolution equals oracle on 500 pairs", failures, "budget 10s", elapsed)


# 2 ----------------------------------------------------------------------


def test_criterion_2_piece_bounds_and_rounding_sandwich():
    rng = random.Random(1002)
    t0 = time.perf_counter()
    failures = []
    W = 1e6
    for trial in range(1000):
        dec = trial % 2 == 0
        hi = rng.randint(1, 100)
        g = random_pcf(rng, hi, rng.randint(1, 20), decreasing=dec, allow_inf=dec)
        h = random_pcf(rng, hi, rng.randint(1, 20), decreasing=dec, allow_inf=dec)
        if len(min2(g, h)) > len(g) + len(h):
            failures.append(f"#{trial} min2")
        if len(add(g, h)) > len(g) + len(h):
            failures.append(f"#{trial} add")
        if len(shift(g, rng.uniform(0, hi))) > len(g):
            failures.append(f"#{trial} shift")
        delta = rng.choice([0.01, 0.05, 0.1, 0.5, 1.0])
        cfg = RoundingConfig(delta, W)
        r = round_up_pow(g, cfg)
        if len(r) > 2 + math.ceil(math.log(W) / math.log1p(delta)):
            failures.append(f"#{trial} round_up_pow has {len(r)} pieces")
        probes = np.array([rng.uniform(0, hi) for _ in range(1000)])
        y, ry = g.at(probes), r.at(probes)
        finite = y < INF
        if not np.all(y <= ry) or not np.all(ry[finite] <= (1 + delta) * y[finite] * (1 + 1e-12)):
            failures.append(f"#{trial} rounding sandwich")
    elapsed = time.perf_counter() - t0
    verdict(2, "piece bounds and rounding sandwich on 1,000 PCFs", failures, "1,000 probes each", elapsed)


# 3 ----------------------------------------------------------------------


def _check_knapsack(kt, fk, live, fast_live, B, eps, where, failures):
    items = list(live.values())
    opt = oracle_knapsack(items, B)
    v = kt.value()
    if not opt - TOL <= v <= (1 + eps) * opt + TOL:
        failures.append(f"{where}: tree value {v} vs OPT {opt}")
    sol = kt.solution()
    if sum(live[i][1] for i in sol) > B or sum(live[i][0] for i in sol) * (1 + eps) < opt - TOL:
        failures.append(f"{where}: tree solution {sorted(sol)} vs OPT {opt}")
    fv = fk.value()
    if not opt / (1 + eps) ** 4 - TOL <= fv <= (1 + eps) * opt + TOL:
        failures.append(f"{where}: fast value {fv} vs OPT {opt}")
    fsol = fk.solution()
    if sum(fast_live[i][1] for i in fsol) > B:
        failures.append(f"{where}: fast solution overweight")


def test_criterion_3_knapsack():
    rng = random.Random(1003)
    t0 = time.perf_counter()
    failures = []
    for trial in range(200):
        n = rng.randint(1, 16)
        items = [(rng.uniform(1, 100), rng.randint(1, 30)) for _ in range(n)]
        B = rng.randint(0, sum(w for _, w in items))
        eps = rng.choice([0.1, 0.25])
        kt, fk = KnapsackTree(B, eps, items), FastKnapsack(B, eps, items)
        by_id = dict(enumerate(items, 1))
        _check_knapsack(kt, fk, by_id, by_id, B, eps, f"instance {trial}", failures)

    worst_path = 0
    for trace in range(3):
        eps = [0.1, 0.25, 0.1][trace]
        B = rng.randint(20, 80)
        W = 100 * 16
        kt, fk = KnapsackTree(B, eps, W=W), FastKnapsack(B, eps, W=W)
        live, fast_id = {}, {}
        for op in range(200):
            before = len(live)
            if live and (rng.random() < 0.45 or len(live) >= 12):
                i = rng.choice(sorted(live))
                kt.delete(i)
                fk.delete(fast_id.pop(i))
                del live[i]
            else:
                p, w = rng.uniform(1, 100), rng.randint(1, 30)
                i = kt.insert(p, w)
                fast_id[i] = fk.insert(p, w)
                live[i] = (p, w)
            n = max(before, len(live), 2)
            if not kt.last_update_rebuilt:
                worst_path = max(worst_path, kt.last_recomputed)
                if kt.last_recomputed > math.ceil(math.log2(n)) + 1:
                    failures.append(f"trace {trace} op {op}: {kt.last_recomputed} rows recomputed at n={n}")
            # the fast structure numbers items itself
            fast_live = {fast_id[i]: live[i] for i in live}
            _check_knapsack(kt, fk, live, fast_live, B, eps, f"trace {trace} op {op}", failures)
    elapsed = time.perf_counter() - t0
    detail = f"200 instances, 3 traces of 200 ops, longest update path {worst_path} rows; budget 60s"
    verdict(3, "knapsack values, solutions and recompute counts", failures, detail, elapsed)


# 4 ----------------------------------------------------------------------


def _partition_case(rng):
    n = rng.randint(1, 10)
    edges = random_tree(rng, n, rng.choice([2, 3, 4]), [1, 1, 2, 3])
    weight = {v: 1 for v in range(n)} if rng.random() < 0.5 else {v: rng.choice([0, 1, 1]) for v in range(n)}
    weight[0] = 1
    return n, edges, weight, rng.choice([2, 3]), rng.choice([Fraction(1, 2), Fraction(1, 3)])


def test_criterion_4_partitioning():
    rng = random.Random(1004)
    t0 = time.perf_counter()
    failures = []
    eps_bar = Fraction(1, 2)
    for trial in range(60):
        n, edges, w, k, eps = _partition_case(rng)
        opt = oracle_partition(range(n), edges, k, w)
        exact = PartitionDP(build_topology(range(n), edges), w, k, eps, eps_bar, mode="exact")
        res = try_value(exact.query)
        if res is None:
            if opt < INF:
                failures.append(f"tree {trial}: exact infeasible but OPT={opt}")
            continue
        if res.value > opt + TOL:
            failures.append(f"tree {trial}: exact {res.value} > OPT {opt}")
        bound = (1 + eps_bar) * (1 + eps) * -(-sum(w.values()) // k)
        if res.schedule.bound != bound or max(res.schedule.loads) > bound:
            failures.append(f"tree {trial}: balance witness {res.schedule.loads} over {bound}")
        approx = PartitionDP(build_topology(range(n), edges), w, k, eps, eps_bar)
        expected_delta = math.log1p(float(eps)) / (approx.h + 1)
        av = approx.query().value
        if approx.delta != expected_delta or not res.value - TOL <= av <= (1 + eps) * res.value + TOL:
            failures.append(f"tree {trial}: approx {av} vs exact {res.value}")
        zero = PartitionDP(build_topology(range(n), edges), w, k, eps, eps_bar, delta=0)
        grid = np.arange(exact.space.n_w + 2)
        for v in range(n):
            a, b = exact.rows(v), zero.rows(v)
            same = set(a.uncut) == set(b.uncut) and a.cut == b.cut
            same = same and all(b.uncut[g].at(grid).tolist() == a.uncut[g].tolist() for g in a.uncut)
            if not same:
                failures.append(f"tree {trial}: delta=0 rows differ at vertex {v}")
                break

    for trace in range(3):
        n = 10
        edges = random_tree(rng, n, 3, [1, 2])
        k, eps = 2 + trace % 2, [Fraction(1, 2), Fraction(1, 3)][trace % 2]
        dyn = DynamicPartition(range(n), edges, k, eps, eps_bar, height_bound=2 * n)
        present = {frozenset((u, v)): c for u, v, c in edges}
        for op in range(30):
            if present and rng.random() < 0.5:
                e = rng.choice(sorted(present, key=sorted))
                del present[e]
                dyn.cut(*sorted(e))
            else:
                u, v = rng.sample(range(n), 2)
                if dyn.topology.root_of(u) != dyn.topology.root_of(v):
                    c = rng.choice([1, 2])
                    dyn.link(u, v, c)
                    present[frozenset((u, v))] = c
            fresh_edges = [(*sorted(e), c) for e, c in present.items()]
            fresh = try_value(
                lambda: partition_solve(range(n), fresh_edges, k, eps, eps_bar, delta=dyn.dp.delta).value
            )
            if try_value(dyn.query) != fresh:
                failures.append(f"trace {trace} op {op}: dynamic differs from a fresh solve")
    elapsed = time.perf_counter() - t0
    verdict(4, "partitioning exact, approx, delta=0 and dynamic", failures, "60 trees, 3 traces; budget 120s", elapsed)


# 5 ----------------------------------------------------------------------


def _ssl_case(rng, n, max_children=2):
    edges = random_tree(rng, n, max_children, (0, 1, 2, 3, 4))
    demand = {v: rng.randint(0, 3) for v in range(n)}
    allowed = {v: rng.random() < 0.6 for v in range(n)}
    return edges, demand, allowed


def test_criterion_5_source_location():
    rng = random.Random(1005)
    t0 = time.perf_counter()
    failures = []
    for trial in range(100):
        n = rng.randint(1, 12)
        edges, demand, allowed = _ssl_case(rng, n)
        opt = try_value(lambda: oracle_ssl(range(n), edges, demand, allowed))
        ex = try_value(lambda: ssl_solve(range(n), edges, demand, allowed, mode="exact"))
        ap = try_value(lambda: ssl_solve(range(n), edges, demand, allowed, eps=0.1))
        if opt is None:
            if ex is not None or ap is not None:
                failures.append(f"tree {trial}: solved an infeasible instance")
            continue
        if ex is None or ex.value != opt:
            failures.append(f"tree {trial}: exact {ex and ex.value} vs OPT {opt}")
        if ap is None or not opt <= ap.value <= math.ceil(1.1 * opt):
            failures.append(f"tree {trial}: approx {ap and ap.value} vs OPT {opt}")
        for r in (ex, ap):
            if r is not None and not (
                len(r.sources) <= r.value and oracle_ssl_feasible(range(n), edges, demand, r.sources)
            ):
                failures.append(f"tree {trial}: extracted sources overload an edge")

    for trial in range(40):
        n = rng.randint(1, 8)
        edges, demand, allowed = _ssl_case(rng, n)
        topo = identity_sparsifier(range(n), edges).tree
        dp = SSLDP(topo, demand, allowed, mode="exact")
        ch = {v: topo.children[v] for v in range(n)}
        cap = {(topo.parent[v], v): topo.parent_cap(v) for v in range(n) if topo.parent[v] is not None}
        for v in range(n):
            pc = topo.parent_cap(v) or 0.0
            inflow = [oracle_ssl_least_inflow(ch, cap, demand, allowed, v, i, pc) for i in range(n + 1)]
            for x in [k / 2 for k in range(int(-2 * pc - 2), int(2 * pc + 3))]:
                want = min((i for i in range(n + 1) if inflow[i] <= x), default=INF)
                if eval_at(dp.row(v), x) != want:
                    failures.append(f"inverse tree {trial} vertex {v} x={x}")

    for trace in range(3):
        n = 10
        edges, demand, allowed = _ssl_case(rng, n, 3)
        dyn = DynamicSSL(range(n), edges, demand, allowed, 0.1, height_bound=2 * n)
        present = {(u, v): c for u, v, c in edges}
        for op in range(50):
            r = rng.random()
            if r < 0.25:
                v = rng.randrange(n)
                demand[v] = rng.randint(0, 3)
                dyn.set_demand(v, demand[v])
            elif r < 0.5 and present:
                e = rng.choice(sorted(present))
                present[e] = rng.randint(0, 4)
                dyn.set_capacity(*e, present[e])
            elif r < 0.75 and present:
                e = rng.choice(sorted(present))
                del present[e]
                dyn.remove(*e)
            else:
                u, v = rng.sample(range(n), 2)
                if dyn.topology.root_of(u) != dyn.topology.root_of(v):
                    present[(u, v)] = rng.randint(0, 4)
                    dyn.insert(u, v, present[(u, v)])
            fresh_edges = [(u, v, c) for (u, v), c in present.items()]
            fresh = try_value(lambda: ssl_solve(range(n), fresh_edges, demand, allowed, delta=dyn.dp.delta).value)
            if try_value(dyn.query) != fresh:
                failures.append(f"trace {trace} op {op}: dynamic differs from a fresh solve")
    elapsed = time.perf_counter() - t0
    verdict(5, "source location exact, approx, inverse rows and dynamic", failures, "budget 60s", elapsed)


# 6 ----------------------------------------------------------------------


def test_criterion_6_necklace():
    rng = random.Random(1006)
    t0 = time.perf_counter()
    failures = []
    for trial in range(200):
        n, eps = rng.randint(0, 10), rng.choice([0.05, 0.01])
        x, y = sorted_beads(rng, n), sorted_beads(rng, n)
        err = abs(neck_static(x, y, eps).value - oracle_necklace(x, y))
        if err > eps + TOL:
            failures.append(f"instance {trial}: error {err} > {eps}")
    worst_pieces = 0
    for trace in range(4):
        eps = [0.05, 0.01][trace % 2]
        state, xs, ys = DynamicNecklace(eps), [], []
        for op in range(100):
            if xs and (rng.random() < 0.4 or len(xs) >= 10):
                i = rng.randrange(len(xs))
                state.delete(i)
                del xs[i], ys[i]
            else:
                i = rng.randint(0, len(xs))
                lo_x, hi_x = (xs[i - 1] if i else 0.0), (xs[i] if i < len(xs) else 1.0)
                lo_y, hi_y = (ys[i - 1] if i else 0.0), (ys[i] if i < len(ys) else 1.0)
                a, b = rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y)
                a, b = min(a, math.nextafter(1.0, 0.0)), min(b, math.nextafter(1.0, 0.0))
                state.insert(i, a, b)
                xs.insert(i, a)
                ys.insert(i, b)
            err = abs(state.query().value - oracle_necklace(xs, ys))
            if err > eps + TOL:
                failures.append(f"trace {trace} op {op}: error {err} > {eps}")
            pieces = max(state.piece_counts())
            worst_pieces = max(worst_pieces, pieces)
            if pieces > math.ceil(2 / eps) + 2:
                failures.append(f"trace {trace} op {op}: {pieces} stored pieces")
    elapsed = time.perf_counter() - t0
    detail = f"most stored pieces {worst_pieces}; budget 30s"
    verdict(6, "necklace additive error and stored piece counts", failures, detail, elapsed)


# 7 ----------------------------------------------------------------------


def _naive_union(raw):
    merged = []
    for a, b in sorted(raw):
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return merged


def test_criterion_7_noi_structure():
    rng = random.Random(1007)
    t0 = time.perf_counter()
    failures = []
    s, raw = NOISet(), []
    for _ in range(10_000):
        a = rng.uniform(0, 100_000)
        b = a + rng.uniform(0.1, 30)
        s.insert(a, b)
        raw.append((a, b))
    lo = np.array([a for a, _ in raw])
    hi = np.array([b for _, b in raw])
    for _ in range(1000):
        z = rng.uniform(-10, 100_050)
        if s.contains(z) != bool(np.any((lo <= z) & (z <= hi))):
            failures.append(f"membership of {z}")
    union = _naive_union(raw)
    if [tuple(iv) for iv in union] != list(s):
        failures.append("stored intervals differ from the naive union")
    ends = np.array([b for _, b in union])
    for _ in range(10_000):
        z = rng.uniform(-10, 100_050)
        idx = np.nonzero(ends >= z)[0]
        want = tuple(union[idx[0]]) if len(idx) else None
        if s.closest_larger(z) != want:
            failures.append(f"closest larger of {z}")
    elapsed = time.perf_counter() - t0
    verdict(7, "NOI membership and closest-larger queries", failures, f"{len(union)} merged intervals; budget 5s", elapsed)


# 8 ----------------------------------------------------------------------


def _update_latency(n, rng, updates=60):
    items = [(rng.uniform(1, 100), rng.randint(1, 30)) for _ in range(n)]
    kt = KnapsackTree(30, 0.5, items, W=200.0 * n)
    bound = 2 + math.ceil(math.log(kt.W) / math.log1p(kt.delta))
    worst = max(piece_count(kt.table[r]) for r in kt.table.rows())
    times = []
    for _ in range(updates):
        i = rng.choice(sorted(kt.items))
        t0 = time.perf_counter()
        kt.delete(i)
        kt.insert(rng.uniform(1, 100), rng.randint(1, 30))
        times.append((time.perf_counter() - t0) / 2)
        worst = max(worst, max(piece_count(kt.table[r]) for r in kt.table.last_recomputed))
    return float(np.median(times)), worst, bound


@pytest.mark.slow
def test_criterion_8_scaling_sanity():
    rng = random.Random(1008)
    t_small, worst_small, bound_small = _update_latency(2**10, rng)
    t_big, worst_big, bound_big = _update_latency(2**16, rng)
    ratio = t_big / t_small
    failures = []
    for n, worst, bound in ((2**10, worst_small, bound_small), (2**16, worst_big, bound_big)):
        if worst > bound:
            failures.append(f"n={n}: {worst} pieces > bound {bound}")
    soft = "within" if ratio < 10 else "OVER"
    detail = (
        f"latency n=2^16 / n=2^10 = {ratio:.2f} ({soft} the soft 10x target, reported only); "
        f"max pieces {worst_small}/{bound_small} and {worst_big}/{bound_big}"
    )
    verdict(8, "knapsack scaling sanity, piece bound hard", failures, detail)
