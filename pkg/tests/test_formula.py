import random

import pytest
from hypothesis import given, settings, strategies as st

from roabp_pit import PrimeField
from roabp_pit.formula import (FormulaNode, FormulaSyntaxError, ReadOnceViolation, build_chain,
                               build_fn, max_path3_free, parse, product_program, to_roabp)
from roabp_pit.oracle import SparseMultilinear, from_roabp, is_aligned, is_decent
from roabp_pit.randgen import random_formula
from roabp_pit.roabp import validate

F = PrimeField(101)
V, C = FormulaNode.var, FormulaNode.const


def test_parse_examples():
    assert parse("x1*x2 + x3") == FormulaNode.add(FormulaNode.mul(V(1), V(2)), V(3))
    assert parse("3*(x1 + 2)") == FormulaNode.mul(C(3), FormulaNode.add(V(1), C(2)))
    with pytest.raises(ReadOnceViolation, match="x1"):
        parse("x1 + x1")


def test_minus_is_negated_term():
    assert parse("x1 - x2*x3") == FormulaNode.add(
        V(1), FormulaNode.mul(C(-1), FormulaNode.mul(V(2), V(3))))


@pytest.mark.parametrize("text,pos", [("x1 +", 4), ("(x1", 3), ("x1 $ x2", 3), ("x0", 0), ("", 0),
                                      ("x1 x2", 3)])
def test_syntax_errors_carry_position(text, pos):
    with pytest.raises(FormulaSyntaxError) as err:
        parse(text)
    assert err.value.pos == pos


def test_compile_examples():
    leaf = to_roabp(V(1), F)
    assert (leaf.depth, leaf.edge_count) == (1, 1)
    path = to_roabp(parse("x1*x2"), F)
    assert (path.depth, path.edge_count) == (2, 2)
    two = from_roabp(to_roabp(parse("x1*x2 + x3*x4"), F))
    assert two == SparseMultilinear(4, F, {(1, 2): 1, (3, 4): 1})


def test_compile_pads_shallow_summands():
    A = to_roabp(parse("x1*x2*x3 + x4 + 5"), F)
    validate(A)
    assert from_roabp(A) == SparseMultilinear(4, F, {(1, 2, 3): 1, (4,): 1, (): 5})


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_compiled_program_matches_formula(seed):
    rng = random.Random(seed)
    tree = random_formula(rng, rng.randint(1, 8))
    A = to_roabp(tree, F)
    validate(A)
    for _ in range(20):
        pt = [rng.randrange(101) for _ in range(A.num_vars)]
        assert A(pt).value == tree.evaluate(pt, 101)


def test_compiled_size_grows_with_tree(rng):
    ratios = []
    for _ in range(200):
        tree = random_formula(rng, 8)
        ratios.append(to_roabp(tree, F).node_count / tree.size)
    assert max(ratios) < 4


def test_fn_family():
    assert from_roabp(build_fn(1, F)) == SparseMultilinear(2, F, {(1, 2): 1})
    f2 = from_roabp(build_fn(2, F))
    assert f2 == SparseMultilinear(4, F, {(1, 2): 1, (1, 4): 1, (2, 3): 1, (3, 4): 1})
    f3 = from_roabp(build_fn(3, F))
    assert len(f3) == 9 and set(f3.terms.values()) == {1}
    assert build_fn(2, F).edge_count == 8


def test_chain_family():
    assert from_roabp(build_chain(1, F)) == SparseMultilinear(2, F, {(1, 2): 1})
    assert from_roabp(build_chain(2, F)) == SparseMultilinear(4, F, {(1, 2): 1, (2, 3): 1, (3, 4): 1})
    f3 = from_roabp(build_chain(3, F))
    assert sorted(tuple(sorted(m)) for m in f3.terms) == [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6)]


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_family_term_counts(n):
    assert len(from_roabp(build_fn(n, F))) == n * n
    assert len(from_roabp(build_chain(n, F))) == 2 * n - 1
    for A in (build_fn(n, F), build_chain(n, F)):
        validate(A)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_fn_is_decent_after_unit_shift(n):
    f = from_roabp(build_fn(n, F)).shift([1] * (2 * n))
    assert is_decent(f)
    assert is_aligned(f)


def test_product_program():
    assert from_roabp(product_program(3, F)) == SparseMultilinear(3, F, {(1, 2, 3): 1})


def test_path3_free_values():
    assert max_path3_free(1) == 1
    assert max_path3_free(2) == 2
    assert max_path3_free(3) == 4
    with pytest.raises(ValueError):
        max_path3_free(5)
