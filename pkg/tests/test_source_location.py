import math
import random

import pytest

from gen import random_tree
from pcfdp.dpengine import identity_sparsifier
from pcfdp.errors import BadEpsilon, CodomainError, Infeasible
from pcfdp.oracles import oracle_ssl, oracle_ssl_feasible, oracle_ssl_least_inflow
from pcfdp.pcf import INF, eval_at
from pcfdp.source_location import SSLDP, DynamicSSL, _Recurrence, solve, solve_value

CAPS = (0, 1, 2, 3, 4)


def random_instance(rng, n, max_children=2):
    edges = random_tree(rng, n, max_children, CAPS)
    demand = {v: rng.randint(0, 3) for v in range(n)}
    allowed = {v: rng.random() < 0.6 for v in range(n)}
    return edges, demand, allowed


def try_value(f):
    try:
        return f()
    except Infeasible:
        return None


# leaf rows -------------------------------------------------------------


def test_source_leaf_with_zero_demand():
    f = _Recurrence(None).leaf(0.0, True, 3.0, "v").row
    for x in (-4, -3.5):
        assert eval_at(f, x) == INF
    for x in (-3, -1, -0.5):
        assert eval_at(f, x) == 1
    for x in (0, 2, 4):
        assert eval_at(f, x) == 0


def test_non_source_leaf_beyond_capacity_is_infinite():
    f = _Recurrence(None).leaf(6.0, False, 5.0, "v").row
    assert f.pieces == [(6.0, INF)]


def test_non_source_leaf_within_capacity():
    f = _Recurrence(None).leaf(2.0, False, 5.0, "v").row
    assert eval_at(f, 1.99) == INF and eval_at(f, 2) == 0 and eval_at(f, 6) == 0


# static solves ---------------------------------------------------------


def test_zero_demands_need_no_sources():
    edges = [(0, 1, 1), (1, 2, 1)]
    zeros = {v: 0 for v in range(3)}
    assert solve_value(range(3), edges, zeros, {v: True for v in range(3)}) == 0
    assert solve_value(range(3), edges, zeros, {v: False for v in range(3)}, mode="exact") == 0


def test_star_needs_three_leaf_sources():
    edges = [(0, c, 1) for c in (1, 2, 3)]
    demand = {0: 3, 1: 0, 2: 0, 3: 0}
    allowed = {0: False, 1: True, 2: True, 3: True}
    assert oracle_ssl(range(4), edges, demand, allowed) == 3
    for mode in ("exact", "approx"):
        r = solve(range(4), edges, demand, allowed, mode=mode)
        assert r.value == 3 and r.sources == {1, 2, 3}


def test_unreachable_demand_is_infeasible():
    with pytest.raises(Infeasible):
        solve([0, 1], [(0, 1, 1)], {0: 0, 1: 2}, {0: True, 1: False})


def test_input_validation():
    with pytest.raises(CodomainError):
        solve([0], [], {0: INF}, {0: True})
    with pytest.raises(CodomainError):
        solve([0], [], {0: -1}, {0: True})
    with pytest.raises(BadEpsilon):
        solve([0], [], {0: 0}, {0: True}, eps=0)


@pytest.mark.parametrize("seed", range(20))
def test_solutions_against_enumeration(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 10)
    edges, demand, allowed = random_instance(rng, n, 2 if seed % 2 else 4)
    opt = try_value(lambda: oracle_ssl(range(n), edges, demand, allowed))
    for mode in ("exact", "approx"):
        r = try_value(lambda: solve(range(n), edges, demand, allowed, mode=mode))
        if opt is None:
            assert r is None
            continue
        assert oracle_ssl_feasible(range(n), edges, demand, r.sources)
        assert all(allowed[v] for v in r.sources)
        assert len(r.sources) <= r.value
        if mode == "exact":
            assert r.value == opt
        else:
            assert opt <= r.value <= math.ceil(1.1 * opt)


@pytest.mark.parametrize("seed", range(10))
def test_rows_are_inverse_of_least_inflow(seed):
    rng = random.Random(50 + seed)
    n = rng.randint(1, 8)
    edges, demand, allowed = random_instance(rng, n)
    topo = identity_sparsifier(range(n), edges).tree
    dp = SSLDP(topo, demand, allowed, mode="exact")
    ch = {v: topo.children[v] for v in range(n)}
    cap = {(topo.parent[v], v): topo.parent_cap(v) for v in range(n) if topo.parent[v] is not None}
    for v in range(n):
        pc = topo.parent_cap(v) or 0.0
        inflow = [oracle_ssl_least_inflow(ch, cap, demand, allowed, v, i, pc) for i in range(n + 1)]
        for x in [k / 2 for k in range(int(-2 * pc - 2), int(2 * pc + 3))]:
            want = min((i for i in range(n + 1) if inflow[i] <= x), default=INF)
            assert eval_at(dp.row(v), x) == want


# dynamic -------------------------------------------------------------


def test_no_op_demand_and_remove_insert_round_trip():
    edges = [(0, 1, 2), (1, 2, 1), (1, 3, 1)]
    demand = {0: 1, 1: 2, 2: 1, 3: 0}
    allowed = {v: v != 1 for v in range(4)}
    dyn = DynamicSSL(range(4), edges, demand, allowed, 0.1, height_bound=8)
    before = dyn.query()
    dyn.set_demand(1, 2)
    assert dyn.query() == before
    dyn.remove(1, 2)
    dyn.insert(1, 2, 1)
    assert dyn.query() == before


def test_dynamic_trace_matches_fresh_solves():
    rng = random.Random(21)
    n = 10
    edges, demand, allowed = random_instance(rng, n, 3)
    dyn = DynamicSSL(range(n), edges, demand, allowed, 0.1, height_bound=2 * n)
    present = {(u, v): c for u, v, c in edges}
    for _ in range(40):
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
            if dyn.topology.root_of(u) == dyn.topology.root_of(v):
                continue
            present[(u, v)] = rng.randint(0, 4)
            dyn.insert(u, v, present[(u, v)])
        fresh_edges = [(u, v, c) for (u, v), c in present.items()]
        fresh = try_value(lambda: solve(range(n), fresh_edges, demand, allowed, delta=dyn.dp.delta).value)
        assert try_value(dyn.query) == fresh
