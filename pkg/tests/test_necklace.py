import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gen import sorted_beads
from pcfdp.errors import BadEpsilon, CodomainError, IndexOutOfRange, LengthMismatch, UnsortedBeads, WouldUnsort
from pcfdp.necklace import DynamicNecklace, Runs, neck_delete, neck_insert, neck_query, neck_static
from pcfdp.oracles import oracle_necklace, oracle_shift_cost

TOL = 1e-12


def beads(n):
    return st.lists(st.floats(0, 1, exclude_max=True), min_size=n, max_size=n).map(sorted)


def test_identical_necklaces():
    x = [0.1, 0.4, 0.4, 0.9]
    r = neck_static(x, x, 0.05)
    assert oracle_necklace(x, x) == 0
    assert 0 <= r.value <= 0.05
    assert oracle_shift_cost(x, x, 0.0, 0) == 0


def test_single_bead_is_aligned_by_the_offset():
    # one bead on each side: the offset alone closes the gap
    r = neck_static([0.2], [0.7], 0.05)
    assert oracle_necklace([0.2], [0.7]) == 0
    assert 0 <= r.value <= 0.05
    assert oracle_shift_cost([0.2], [0.7], r.offset, r.shift) == pytest.approx(0, abs=0.05)


def test_empty_necklaces():
    assert neck_static([], [], 0.1).value == 0


def test_rotation_invariance_of_oracle():
    rng = random.Random(5)
    for _ in range(20):
        n = rng.randint(1, 7)
        x, y = sorted_beads(rng, n), sorted_beads(rng, n)
        k = rng.randrange(n)
        # rotating both necklaces by the same amount keeps every shift's spread
        assert oracle_necklace(x[k:] + x[:k], y[k:] + y[:k]) == pytest.approx(oracle_necklace(x, y))


def test_validation():
    with pytest.raises(LengthMismatch):
        neck_static([0.1], [0.1, 0.2], 0.1)
    with pytest.raises(UnsortedBeads):
        neck_static([0.3, 0.1], [0.1, 0.2], 0.1)
    with pytest.raises(CodomainError):
        neck_static([1.0], [0.1], 0.1)
    with pytest.raises(BadEpsilon):
        neck_static([0.1], [0.1], 0)


@given(st.integers(0, 10).flatmap(lambda n: st.tuples(beads(n), beads(n))), st.sampled_from([0.05, 0.01, 0.2]))
def test_static_value_within_additive_eps(xy, eps):
    x, y = xy
    r = neck_static(x, y, eps)
    opt = oracle_necklace(x, y)
    assert opt - TOL <= r.value <= opt + eps + TOL
    if x:
        assert oracle_shift_cost(x, y, r.offset, r.shift) <= opt + eps + TOL


def test_runs_bookkeeping():
    r = Runs.from_rounded([0.0, 0.0, 0.5, 0.5, 0.5, 0.75])
    assert r.values == [0.0, 0.5, 0.75] and r.counts == [2, 3, 1]
    assert r.span(0.5) == (2, 5) and r.span(0.6) == (5, 5)
    r.delete_at(3)
    assert r.expand() == [0.0, 0.0, 0.5, 0.5, 0.75]
    with pytest.raises(IndexOutOfRange):
        r.delete_at(9)


def test_insert_then_delete_restores_state():
    st_ = DynamicNecklace(0.1)
    for i, (a, b) in enumerate([(0.1, 0.2), (0.4, 0.5), (0.8, 0.9)]):
        neck_insert(st_, i, a, b)
    before = (st_.x.copy().__dict__, st_.y.copy().__dict__)
    neck_insert(st_, 1, 0.3, 0.3)
    neck_delete(st_, 1)
    assert (st_.x.__dict__, st_.y.__dict__) == before


def test_queries_are_deterministic():
    st_ = DynamicNecklace(0.1)
    neck_insert(st_, 0, 0.3, 0.6)
    neck_insert(st_, 1, 0.5, 0.7)
    assert neck_query(st_) == neck_query(st_)


def test_dynamic_rejects_out_of_order_and_bad_positions():
    st_ = DynamicNecklace(0.1)
    neck_insert(st_, 0, 0.5, 0.5)
    with pytest.raises(WouldUnsort):
        st_.insert(0, 0.9, 0.1)
    with pytest.raises(IndexOutOfRange):
        st_.insert(3, 0.9, 0.9)
    with pytest.raises(IndexOutOfRange):
        st_.delete(1)


@pytest.mark.parametrize("eps", [0.05, 0.01])
def test_dynamic_trace_against_oracle(eps):
    rng = random.Random(int(1 / eps))
    state, xs, ys = DynamicNecklace(eps), [], []
    for _ in range(100):
        if xs and (rng.random() < 0.4 or len(xs) >= 10):
            i = rng.randrange(len(xs))
            state.delete(i)
            del xs[i], ys[i]
        else:
            a, b, i = rng.random(), rng.random(), rng.randint(0, len(xs))
            fits = all(
                (i == 0 or v[i - 1] <= new) and (i == len(v) or new <= v[i]) for v, new in ((xs, a), (ys, b))
            )
            if not fits:
                continue
            state.insert(i, a, b)
            xs.insert(i, a)
            ys.insert(i, b)
        q, opt = state.query(), oracle_necklace(xs, ys)
        assert opt - TOL <= q.value <= opt + eps + TOL
        assert max(state.piece_counts()) <= state.piece_bound
        assert q == neck_static(xs, ys, eps)
