"""Read-once algebraic branching programs.

A program is a layered DAG whose edges carry either a variable x_i or a field
constant; it computes the sum over source-to-sink paths of the product of the
edge labels. Variables are 1-based (x_1 .. x_n); an evaluation point is a
length-n sequence whose entry ``i - 1`` is the value of x_i.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Sequence, Union

import numpy as np

from .field import FieldError, PrimeField, Scalar


class ROABPError(ValueError):
    """A program violates the layering or read-once constraints."""


@dataclass(frozen=True)
class Var:
    index: int

    def __repr__(self):
        return f"x{self.index}"


@dataclass(frozen=True)
class Const:
    value: int

    def __repr__(self):
        return str(self.value)


EdgeLabel = Union[Var, Const]


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    label: EdgeLabel


@dataclass(frozen=True)
class ROABP:
    num_vars: int
    field: PrimeField
    levels: tuple[tuple[int, ...], ...]
    edges: tuple[Edge, ...]

    @property
    def source(self) -> int:
        return self.levels[0][0]

    @property
    def sink(self) -> int:
        return self.levels[-1][0]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def node_count(self) -> int:
        return sum(len(level) for level in self.levels)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def size(self) -> int:
        """Nodes plus edges, the size figure reported in diagnostics."""
        return self.node_count + self.edge_count

    @cached_property
    def level_of(self) -> dict[int, int]:
        return {v: i for i, level in enumerate(self.levels) for v in level}

    @cached_property
    def layer_edges(self) -> tuple[tuple[Edge, ...], ...]:
        """Edges grouped by layer: entry j holds the edges from L_j to L_{j+1}."""
        groups: list[list[Edge]] = [[] for _ in range(self.depth)]
        lvl = self.level_of
        for e in self.edges:
            groups[lvl[e.src]].append(e)
        return tuple(tuple(g) for g in groups)

    @cached_property
    def var_edges(self) -> dict[int, Edge]:
        return {e.label.index: e for e in self.edges if isinstance(e.label, Var)}

    def __call__(self, point):
        return evaluate(self, point)


def validate(A: ROABP) -> None:
    """Raise ROABPError describing the first violated program invariant."""
    if A.num_vars < 0:
        raise ROABPError("negative variable count")
    if len(A.levels) < 2:
        raise ROABPError("a program needs at least two levels")
    if len(A.levels[0]) != 1:
        raise ROABPError(f"level 0 must hold exactly one node (the source), has {len(A.levels[0])}")
    if len(A.levels[-1]) != 1:
        raise ROABPError(f"last level must hold exactly one node (the sink), has {len(A.levels[-1])}")
    seen: dict[int, int] = {}
    for i, level in enumerate(A.levels):
        for v in level:
            if v in seen:
                raise ROABPError(f"node {v} appears in levels {seen[v]} and {i}")
            seen[v] = i
    read: set[int] = set()
    p = A.field.modulus
    for e in A.edges:
        if e.src not in seen or e.dst not in seen:
            raise ROABPError(f"edge {e} references an unknown node")
        if seen[e.dst] != seen[e.src] + 1:
            raise ROABPError(
                f"edge {e.src}->{e.dst} goes from level {seen[e.src]} to level {seen[e.dst]}")
        lab = e.label
        if isinstance(lab, Var):
            if not 1 <= lab.index <= A.num_vars:
                raise ROABPError(f"variable x{lab.index} outside x1..x{A.num_vars}")
            if lab.index in read:
                raise ROABPError(f"variable x{lab.index} labels more than one edge")
            read.add(lab.index)
        elif isinstance(lab, Const):
            if not 0 <= lab.value < p:
                raise ROABPError(f"constant {lab.value} is not a residue mod {p}")
        else:
            raise ROABPError(f"bad edge label {lab!r}")


def make_program(num_vars: int, field: PrimeField, levels: Sequence[Sequence[Hashable]],
                 edges: Iterable[tuple[Hashable, Hashable, EdgeLabel]]) -> ROABP:
    """Build and validate a program from arbitrary hashable node keys.

    Nodes are renumbered densely in level-major order and constants reduced mod p.
    """
    ids: dict[Hashable, int] = {}
    new_levels = []
    for level in levels:
        row = []
        for key in level:
            if key in ids:
                raise ROABPError(f"node {key!r} listed twice")
            ids[key] = len(ids)
            row.append(ids[key])
        new_levels.append(tuple(row))
    p = field.modulus
    new_edges = []
    for u, v, lab in edges:
        if u not in ids or v not in ids:
            raise ROABPError(f"edge ({u!r}, {v!r}) references an unknown node")
        if isinstance(lab, Const):
            lab = Const(lab.value % p)
        new_edges.append(Edge(ids[u], ids[v], lab))
    A = ROABP(num_vars, field, tuple(new_levels), tuple(new_edges))
    validate(A)
    return A


def zero_program(num_vars: int, field: PrimeField) -> ROABP:
    """Two single-node levels and no edges."""
    return ROABP(num_vars, field, ((0,), (1,)), ())


def constant_program(num_vars: int, field: PrimeField, c: int) -> ROABP:
    return make_program(num_vars, field, [["s"], ["t"]], [("s", "t", Const(c))])


def _raw_point(A: ROABP, point) -> list[int]:
    if len(point) != A.num_vars:
        raise ValueError(f"point has {len(point)} coordinates, program has {A.num_vars} variables")
    out = []
    for a in point:
        if isinstance(a, Scalar):
            if a.field != A.field:
                raise FieldError("modulus mismatch between point and program")
            out.append(a.value)
        else:
            out.append(int(a) % A.field.modulus)
    return out


def evaluate(A: ROABP, point) -> Scalar:
    """Value of the program at ``point`` by one forward pass over the layers."""
    x = _raw_point(A, point)
    p = A.field.modulus
    val = {A.source: 1}
    for layer in A.layer_edges:
        nxt: dict[int, int] = {}
        for e in layer:
            a = val.get(e.src)
            if not a:
                continue
            w = e.label.value if isinstance(e.label, Const) else x[e.label.index - 1]
            nxt[e.dst] = (nxt.get(e.dst, 0) + a * w) % p
        val = nxt
    return A.field(val.get(A.sink, 0))


def array_dtype(p: int):
    """int64 keeps a*b exact for residues below 2^31; larger moduli fall back to objects."""
    return np.int64 if p < 2**31 else object


def evaluate_batch(A: ROABP, points: np.ndarray) -> np.ndarray:
    """Evaluate at every row of a (B, n) array of residues."""
    p = A.field.modulus
    dt = array_dtype(p)
    points = np.asarray(points, dtype=dt)
    if points.ndim != 2 or points.shape[1] != A.num_vars:
        raise ValueError(f"expected shape (B, {A.num_vars}), got {points.shape}")
    B = points.shape[0]
    val = {A.source: np.ones(B, dtype=dt)}
    for layer in A.layer_edges:
        nxt: dict[int, np.ndarray] = {}
        for e in layer:
            a = val.get(e.src)
            if a is None:
                continue
            if isinstance(e.label, Const):
                if e.label.value == 0:
                    continue
                term = a * e.label.value % p
            else:
                term = a * points[:, e.label.index - 1] % p
            if e.dst in nxt:
                nxt[e.dst] = (nxt[e.dst] + term) % p
            else:
                nxt[e.dst] = term
        val = nxt
    out = val.get(A.sink)
    return np.zeros(B, dtype=dt) if out is None else out


def present_vars(A: ROABP) -> set[int]:
    return set(A.var_edges)


def normalize(A: ROABP) -> ROABP:
    """Equivalent program with at most one variable edge per layer.

    A layer with t > 1 variable edges becomes t sub-layers. The intermediate
    levels hold a "pending" copy of every tail node and an "arrived" copy of
    every head node; variable edge number j fires in sub-layer j, constant
    edges fire in the first one, and identity edges carry everything else.
    """
    if all(sum(isinstance(e.label, Var) for e in layer) <= 1 for layer in A.layer_edges):
        return A
    one = Const(1)
    levels: list[list[Hashable]] = [list(A.levels[0])]
    edges: list[tuple[Hashable, Hashable, EdgeLabel]] = []
    for j, layer in enumerate(A.layer_edges):
        tails, heads = A.levels[j], A.levels[j + 1]
        var_e = [e for e in layer if isinstance(e.label, Var)]
        t = len(var_e)
        if t <= 1:
            levels.append(list(heads))
            edges.extend((e.src, e.dst, e.label) for e in layer)
            continue
        con_e = [e for e in layer if isinstance(e.label, Const)]

        def pend(sub, u, j=j):
            return u if sub == 0 else ("pend", j, sub, u)

        def arr(sub, w, j=j):
            return w if sub == t else ("arr", j, sub, w)

        for sub in range(1, t):
            levels.append([pend(sub, u) for u in tails] + [arr(sub, w) for w in heads])
        levels.append(list(heads))
        for sub in range(1, t + 1):
            e = var_e[sub - 1]
            edges.append((pend(sub - 1, e.src), arr(sub, e.dst), e.label))
            if sub == 1:
                edges.extend((e.src, arr(1, e.dst), e.label) for e in con_e)
            else:
                edges.extend((arr(sub - 1, w), arr(sub, w), one) for w in heads)
            if sub < t:
                edges.extend((pend(sub - 1, u), pend(sub, u), one) for u in tails)
    return make_program(A.num_vars, A.field, levels, edges)


def _relabel(A: ROABP, edges: Iterable[Edge]) -> ROABP:
    B = ROABP(A.num_vars, A.field, A.levels, tuple(edges))
    validate(B)
    return B


def _check_index(A: ROABP, i: int) -> None:
    if not 1 <= i <= A.num_vars:
        raise IndexError(f"variable index {i} outside 1..{A.num_vars}")


def restrict(A: ROABP, i: int, c) -> ROABP:
    """The program for f with x_i fixed to c."""
    _check_index(A, i)
    if isinstance(c, Scalar):
        if c.field != A.field:
            raise FieldError("modulus mismatch")
        c = c.value
    c = int(c) % A.field.modulus
    if i not in A.var_edges:
        return A
    target = Var(i)
    return _relabel(A, (Edge(e.src, e.dst, Const(c)) if e.label == target else e for e in A.edges))


def partial_derivative(A: ROABP, i: int) -> ROABP:
    """The program for f|_{x_i=1} - f|_{x_i=0}.

    After normalizing, the x_i edge becomes a constant 1 and every other edge of
    its layer is dropped, leaving f_{s,begin(x_i)} * f_{end(x_i),t}.
    """
    _check_index(A, i)
    if i not in A.var_edges:
        return zero_program(A.num_vars, A.field)
    N = normalize(A)
    e_i = N.var_edges[i]
    layer = N.level_of[e_i.src]
    kept = []
    for e in N.edges:
        if e is e_i:
            kept.append(Edge(e.src, e.dst, Const(1)))
        elif N.level_of[e.src] != layer:
            kept.append(e)
    return _relabel(N, kept)


def scale(A: ROABP, c) -> ROABP:
    """The program for c * f: a new source feeding the old one through an edge labeled c."""
    if isinstance(c, Scalar):
        c = c.value
    levels = [["scale-src"]] + [list(level) for level in A.levels]
    edges = [("scale-src", A.source, Const(int(c)))] + [(e.src, e.dst, e.label) for e in A.edges]
    return make_program(A.num_vars, A.field, levels, edges)


def constant_sums_from(A: ROABP, u: int) -> dict[int, int]:
    """Constant-path sums from u to every node reachable by constant edges (nonzero entries only)."""
    p = A.field.modulus
    start = A.level_of[u]
    val = {u: 1}
    out = {u: 1}
    for layer in A.layer_edges[start:]:
        nxt: dict[int, int] = {}
        for e in layer:
            if isinstance(e.label, Const) and e.src in val:
                nxt[e.dst] = (nxt.get(e.dst, 0) + val[e.src] * e.label.value) % p
        val = {k: v for k, v in nxt.items() if v}
        if not val:
            break
        out.update(val)
    return out


def constant_path_sum(A: ROABP, u: int, v: int) -> Scalar:
    """Sum over u->v paths using only constant edges of the label products.

    This is the constant term of the subprogram from u to v; it is 1 when
    u == v and 0 when v is not after u.
    """
    if u not in A.level_of or v not in A.level_of:
        raise ROABPError("unknown node")
    if A.level_of[v] < A.level_of[u]:
        return A.field.zero
    return A.field(constant_sums_from(A, u).get(v, 0))
