import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roabp_pit import PrimeField
from roabp_pit.formula import build_chain, build_fn
from roabp_pit.oracle import SparseMultilinear, from_roabp
from roabp_pit.randgen import random_roabp, random_zero_roabp
from roabp_pit.roabp import (Const, ROABP, ROABPError, Var, constant_path_sum, evaluate,
                             evaluate_batch, make_program, normalize, partial_derivative,
                             present_vars, restrict, validate, zero_program)

seeds = st.integers(min_value=0, max_value=2**32)
F = PrimeField(101)


def single(i, n, field=F):
    return make_program(n, field, [["s"], ["t"]], [("s", "t", Var(i))])


def poly(n, terms, field=F):
    return SparseMultilinear(n, field, terms)


def test_single_edge_is_valid():
    A = single(1, 1)
    validate(A)
    assert (A.depth, A.node_count, A.edge_count, A.size) == (1, 2, 1, 3)


def test_rejects_double_read():
    with pytest.raises(ROABPError, match="more than one edge"):
        make_program(2, F, [["s"], ["a"], ["t"]], [("s", "a", Var(1)), ("a", "t", Var(1))])


def test_rejects_level_skip():
    with pytest.raises(ROABPError, match="level"):
        make_program(2, F, [["s"], ["a"], ["t"]], [("s", "t", Var(1)), ("s", "a", Const(1))])


def test_rejects_two_sources_or_unknown_vars():
    with pytest.raises(ROABPError):
        make_program(2, F, [["s", "s2"], ["t"]], [("s", "t", Var(1))])
    with pytest.raises(ROABPError):
        make_program(2, F, [["s"], ["t"]], [("s", "t", Var(3))])
    with pytest.raises(ROABPError):
        validate(ROABP(1, F, ((0,), (1,)), ()).__class__(1, F, ((0,), (0,)), ()))


def test_parallel_edges_allowed():
    A = make_program(1, F, [["s"], ["t"]], [("s", "t", Const(2)), ("s", "t", Var(1))])
    assert from_roabp(A) == poly(1, {(): 2, (1,): 1})


def test_evaluate_examples():
    chain = build_chain(2, F)
    assert evaluate(chain, [1, 1, 1, 1]).value == 3
    assert evaluate(build_fn(2, F), [1, 1, 1, 1]).value == 4
    with pytest.raises(ValueError):
        evaluate(chain, [1, 1])


def test_zero_point_gives_constant_term(rng):
    for _ in range(50):
        A = random_roabp(rng, 5, F)
        assert evaluate(A, [0] * 5).value == from_roabp(A).coefficient(())


@settings(max_examples=60, deadline=None)
@given(seeds, st.sampled_from([101, 2147483647, 2305843009213693951]))
def test_evaluate_agrees_with_expansion(seed, p):
    rng = random.Random(seed)
    field = PrimeField(p)
    n = rng.randint(1, 8)
    A = random_roabp(rng, n, field, small_consts=rng.random() < 0.5)
    f = from_roabp(A)
    pts = [[rng.randrange(p) for _ in range(n)] for _ in range(100)]
    batch = evaluate_batch(A, np.array(pts, dtype=object))
    for q, b in zip(pts, batch):
        assert evaluate(A, q).value == f.evaluate(q).value == int(b)


def test_normalize_splits_multivariable_layer():
    A = make_program(2, F, [["s"], ["a", "b"], ["t"]],
                     [("s", "a", Var(1)), ("s", "b", Var(2)), ("a", "t", Const(1)), ("b", "t", Const(3))])
    N = normalize(A)
    assert all(sum(isinstance(e.label, Var) for e in layer) <= 1 for layer in N.layer_edges)
    assert N.depth == 3
    assert from_roabp(N) == from_roabp(A)


def test_normalize_fixed_points(F101):
    A = normalize(build_fn(2, F101))
    assert normalize(A) is A
    Z = zero_program(3, F101)
    assert normalize(Z) is Z


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_normalize_preserves_polynomial(seed):
    rng = random.Random(seed)
    A = random_roabp(rng, rng.randint(1, 8), F, max_width=4)
    N = normalize(A)
    assert from_roabp(N) == from_roabp(A)
    assert all(sum(isinstance(e.label, Var) for e in layer) <= 1 for layer in N.layer_edges)
    assert present_vars(N) == present_vars(A)


def test_derivative_examples():
    chain = build_chain(2, F)
    assert from_roabp(partial_derivative(chain, 2)) == poly(4, {(1,): 1, (3,): 1})
    assert partial_derivative(single(1, 3), 2) == zero_program(3, F)
    assert from_roabp(partial_derivative(single(1, 1), 1)) == poly(1, {(): 1})
    with pytest.raises(IndexError):
        partial_derivative(chain, 5)


def test_restrict_examples():
    assert from_roabp(restrict(single(1, 1), 1, 0)).is_zero()
    assert from_roabp(restrict(build_chain(2, F), 2, 1)) == poly(4, {(1,): 1, (3,): 1, (3, 4): 1})
    A = single(1, 3)
    assert restrict(A, 2, 5) is A


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_derivative_is_difference_of_restrictions(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 7)
    A = random_roabp(rng, n, F) if rng.random() < 0.8 else random_zero_roabp(rng, n, F)
    for i in range(1, n + 1):
        D = partial_derivative(A, i)
        validate(D)
        expected = from_roabp(restrict(A, i, 1)) - from_roabp(restrict(A, i, 0))
        assert from_roabp(D) == expected == from_roabp(A).derivative(i)


def test_constant_path_sum_examples():
    A = make_program(0, F, [["u"], ["a", "b"], ["v"]],
                     [("u", "a", Const(1)), ("u", "b", Const(-1)), ("a", "v", Const(1)), ("b", "v", Const(1))])
    u, v = A.source, A.sink
    assert constant_path_sum(A, u, u).value == 1
    assert constant_path_sum(A, u, v).value == 0
    assert constant_path_sum(A, v, u).value == 0
    B = make_program(0, F, [["u"], ["v"]], [("u", "v", Const(5))])
    assert constant_path_sum(B, B.source, B.sink).value == 5


def test_present_vars(F101):
    assert present_vars(single(3, 4)) == {3}
    assert present_vars(make_program(2, F, [["s"], ["t"]], [("s", "t", Const(4))])) == set()
    assert present_vars(build_chain(2, F101)) == {1, 2, 3, 4}
