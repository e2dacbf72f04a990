"""Seeded random instances for tests and experiments: programs, zero programs, formulas."""

from __future__ import annotations

import random
from typing import Hashable, Sequence

from .field import PrimeField
from .formula import FormulaNode
from .roabp import ROABP, Const, EdgeLabel, Var, make_program


def _const(rng: random.Random, field: PrimeField, small: bool) -> Const:
    if small:
        return Const(rng.choice([1, 1, 2, 3, -1, -2]))
    return Const(rng.randrange(1, field.modulus))


def random_roabp(rng: random.Random, n: int, field: PrimeField, *, max_width: int = 3,
                 var_prob: float = 0.6, density: float = 0.75, small_consts: bool = True,
                 num_read: int | None = None, connected: bool = True) -> ROABP:
    """A random program over x_1..x_n reading a random subset of the variables.

    Layers may carry several variable edges. Constants are drawn from a small
    set by default so that cancellations actually happen; ``connected`` adds
    constant edges until no node is a dead end.
    """
    if num_read is None:
        num_read = rng.randint(0, n)
    pool = rng.sample(range(1, n + 1), num_read)
    depth = max(1, rng.randint(max(1, (num_read + 1) // 2), num_read + 2))
    widths = [1] + [rng.randint(1, max_width) for _ in range(depth - 1)] + [1]
    levels = [[(lvl, j) for j in range(w)] for lvl, w in enumerate(widths)]
    edges: list[tuple[Hashable, Hashable, EdgeLabel]] = []
    for lvl in range(depth):
        remaining_layers = depth - lvl
        for u in levels[lvl]:
            for v in levels[lvl + 1]:
                if rng.random() > density:
                    continue
                # spend variables so the pool tends to run out by the last layer
                want_var = pool and (rng.random() < var_prob or len(pool) >= remaining_layers * 2)
                edges.append((u, v, Var(pool.pop()) if want_var else _const(rng, field, small_consts)))
        while pool and len(pool) > (remaining_layers - 1) * len(levels[lvl]) * len(levels[lvl + 1]):
            u, v = rng.choice(levels[lvl]), rng.choice(levels[lvl + 1])
            edges.append((u, v, Var(pool.pop())))
        if connected:
            # no dead ends: every node gets an outgoing and an incoming edge
            tails = {e[0] for e in edges}
            for u in levels[lvl]:
                if u not in tails:
                    edges.append((u, rng.choice(levels[lvl + 1]), _const(rng, field, small_consts)))
            heads = {e[1] for e in edges}
            for v in levels[lvl + 1]:
                if v not in heads:
                    edges.append((rng.choice(levels[lvl]), v, _const(rng, field, small_consts)))
    return make_program(n, field, levels, edges)


def series(programs: Sequence[ROABP]) -> ROABP:
    """The product program: each sink glued to the next source. Variable sets must be disjoint."""
    first = programs[0]
    levels: list[list[Hashable]] = []
    edges: list[tuple[Hashable, Hashable, EdgeLabel]] = []
    for idx, A in enumerate(programs):
        name = {v: (idx, v) for lvl in A.levels for v in lvl}
        if idx > 0:
            name[A.source] = levels[-1][0]
            rows = A.levels[1:]
        else:
            rows = A.levels
        levels.extend([name[v] for v in row] for row in rows)
        edges.extend((name[e.src], name[e.dst], e.label) for e in A.edges)
    return make_program(first.num_vars, first.field, levels, edges)


def cancellation_gadget(n: int, field: PrimeField, c: int = 1) -> ROABP:
    """Parallel constant paths c and -c: a program computing 0 with nonzero edges."""
    return make_program(n, field, [["s"], ["a", "b"], ["t"]],
                        [("s", "a", Const(c)), ("s", "b", Const(-c)),
                         ("a", "t", Const(1)), ("b", "t", Const(1))])


def random_zero_roabp(rng: random.Random, n: int, field: PrimeField, **kw) -> ROABP:
    """A program computing 0 whose structure is otherwise random."""
    kind = rng.choice(["gadget", "gadget", "cut"])
    if kind == "cut":
        # every edge into some middle level removed: the sink is unreachable
        A = random_roabp(rng, n, field, **kw)
        if A.depth < 2:
            return series([A, cancellation_gadget(n, field)])
        cut = rng.randint(1, A.depth - 1)
        kept = [(e.src, e.dst, e.label) for e in A.edges if A.level_of[e.dst] != cut]
        return make_program(n, field, A.levels, kept)
    vars_ = list(range(1, n + 1))
    rng.shuffle(vars_)
    split = rng.randint(0, n)
    parts = []
    if split:
        parts.append(_confined(rng, n, field, vars_[:split], **kw))
    parts.append(cancellation_gadget(n, field, rng.randint(1, 5)))
    if split < n:
        parts.append(_confined(rng, n, field, vars_[split:], **kw))
    if rng.random() < 0.5:
        parts.reverse()
    return series(parts)


def _confined(rng: random.Random, n: int, field: PrimeField, allowed: Sequence[int], **kw) -> ROABP:
    """A random program reading only variables from ``allowed``."""
    m = len(allowed)
    kw.pop("num_read", None)
    B = random_roabp(rng, m, field, num_read=rng.randint(0, m), **kw)
    edges = [(e.src, e.dst, Var(allowed[e.label.index - 1]) if isinstance(e.label, Var) else e.label)
             for e in B.edges]
    return make_program(n, field, B.levels, edges)


def random_formula(rng: random.Random, n: int, max_const: int = 5) -> FormulaNode:
    """A random read-once formula using a random nonempty subset of x_1..x_n plus constants."""
    k = rng.randint(1, n)
    leaves = [FormulaNode.var(i) for i in rng.sample(range(1, n + 1), k)]
    leaves += [FormulaNode.const(rng.randint(-max_const, max_const)) for _ in range(rng.randint(0, 2))]
    rng.shuffle(leaves)

    def build(items):
        if len(items) == 1:
            return items[0]
        cut = rng.randint(1, len(items) - 1)
        left, right = build(items[:cut]), build(items[cut:])
        return FormulaNode.add(left, right) if rng.random() < 0.5 else FormulaNode.mul(left, right)

    return build(leaves)
