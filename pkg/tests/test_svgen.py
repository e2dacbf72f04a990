import random
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from roabp_pit import PrimeField
from roabp_pit.field import AnchorSet, FieldError
from roabp_pit.oracle import CapExceeded, SparseMultilinear
from roabp_pit.svgen import (PointSet, SVGenerator, generator_image, low_weight_set,
                             nullstellensatz_grid, sum_set)

F7 = PrimeField(7)
F = PrimeField(101)


def test_single_input_selects_anchor():
    G = SVGenerator.default(1, 5, F)
    for i in range(1, 6):
        out = G.eval_map([i - 1], [9])
        assert out == tuple(9 if j == i else 0 for j in range(1, 6))
        assert G.eval_component(i, [i - 1], [9]).value == 9


def test_zero_z_gives_zero():
    G = SVGenerator.default(3, 4, F)
    assert G.eval_map([5, 17, 2], [0, 0, 0]) == (0, 0, 0, 0)


def test_repeated_anchor_adds():
    G = SVGenerator.default(2, 3, F)
    assert G.eval_map([0, 0], [1, 1]) == (2, 0, 0)


def test_eval_map_examples():
    assert SVGenerator.default(1, 3, F).eval_map([1], [5]) == (0, 5, 0)
    assert SVGenerator.default(1, 2, F7).eval_map([2], [1]) == (6, 2)
    with pytest.raises(ValueError):
        SVGenerator.default(0, 3, F)
    with pytest.raises(ValueError):
        SVGenerator.default(2, 3, F).eval_map([1], [1])
    with pytest.raises(IndexError):
        SVGenerator.default(1, 3, F).eval_component(4, [0], [1])


def test_low_weight_sizes_and_order():
    assert low_weight_set(3, 0).to_list() == [(0, 0, 0)]
    assert len(low_weight_set(3, 1)) == 4
    assert len(low_weight_set(4, 2).to_list()) == 11
    assert low_weight_set(3, 1).to_list() == [(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0)]
    assert low_weight_set(3, 2).to_list()[4:] == [(0, 1, 1), (1, 0, 1), (1, 1, 0)]


@given(st.integers(min_value=0, max_value=9), st.integers(min_value=0, max_value=9))
def test_low_weight_size_is_binomial_sum(n, w):
    w = min(w, n)
    pts = low_weight_set(n, w).to_list()
    assert len(pts) == sum(comb(n, i) for i in range(w + 1)) == len(set(pts))
    assert all(sum(q) <= w for q in pts)


def test_generator_image_examples():
    G = SVGenerator(1, AnchorSet([0, 1], F7))
    assert generator_image(G, [3]).to_list() == [G.eval_map([3], [3])]
    assert generator_image(SVGenerator.default(2, 4, F), [0]).to_list() == [(0, 0, 0, 0)]
    img = generator_image(G, [0, 1]).to_list()
    # odometer over (y, z): (0,0), (0,1), (1,0), (1,1)
    assert img == [(0, 0), (1, 0), (0, 0), (0, 1)]


def test_generator_image_is_lazy_and_capped():
    G = SVGenerator.default(3, 6, F)
    img = generator_image(G, range(20))
    assert len(img) == 20**6
    first = next(iter(img))
    assert first == G.eval_map([0, 0, 0], [0, 0, 0])
    with pytest.raises(CapExceeded, match="--cap-probes"):
        generator_image(G, range(20), cap=1000)


def test_generator_image_consistent(rng):
    G = SVGenerator.default(2, 3, F)
    V = [0, 4, 9]
    from itertools import product
    for a, pt in zip(product(V, repeat=4), generator_image(G, V)):
        assert pt == G.eval_map(a[:2], a[2:])


def test_sum_set_examples():
    P = PointSet(2, "t", lambda: iter([(1, 0), (3, 4)]), 2, F)
    Z = PointSet(2, "t", lambda: iter([(0, 0)]), 1, F)
    Q = PointSet(2, "t", lambda: iter([(0, 1), (1, 1), (100, 0)]), 3, F)
    assert sum_set(P, Z).to_list() == P.to_list()
    s = sum_set(P, Q).to_list()
    assert len(s) == 6 and s[:3] == [(1, 1), (2, 1), (0, 0)]
    one = PointSet(2, "t", lambda: iter([(1, 0)]), 1, F)
    two = PointSet(2, "t", lambda: iter([(0, 1)]), 1, F)
    assert sum_set(one, two).to_list() == [(1, 1)]
    with pytest.raises(ValueError):
        sum_set(P, low_weight_set(3, 1))


def test_nullstellensatz_grid():
    assert list(nullstellensatz_grid([0, 0, 0], F)) == [(0, 0, 0)]
    assert list(nullstellensatz_grid([2], F)) == [(0,), (1,), (2,)]
    assert len(list(nullstellensatz_grid([1, 2], F))) == 6
    with pytest.raises(FieldError):
        nullstellensatz_grid([7], F7)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_grid_hits_bounded_degree_polynomials(seed):
    # a random nonzero polynomial with per-variable degree bounds is nonzero on the grid
    rng = random.Random(seed)
    t = rng.randint(1, 3)
    bounds = [rng.randint(0, 3) for _ in range(t)]
    roots = [[rng.sample(range(101), r) for r in bounds]]
    c = rng.randrange(1, 101)

    def f(pt):
        v = c
        for x, rs in zip(pt, roots[0]):
            for r in rs:
                v = v * (x - r) % 101
        return v

    assert any(f(pt) for pt in nullstellensatz_grid(bounds, F))


def test_substitution_identity():
    """Setting y_k to anchor a_i adds z_k to coordinate i on top of G_{k-1}."""
    n, k = 4, 2
    G2 = SVGenerator.default(k, n, F)
    G1 = SVGenerator.default(k - 1, n, F)
    rng = random.Random(3)
    # a multilinear polynomial, compared through evaluation at generator outputs
    f = SparseMultilinear(n, F, {(1, 2): 3, (3,): 1, (2, 4): 5, (): 7})
    for _ in range(50):
        y, z, zk = rng.randrange(101), rng.randrange(101), rng.randrange(101)
        for i in range(1, n + 1):
            lhs = f(G2.eval_map([y, i - 1], [z, zk]))
            base = list(G1.eval_map([y], [z]))
            base[i - 1] = (base[i - 1] + zk) % 101
            assert lhs == f(base)
