"""Read-once formulas: parsing, compilation to layered programs, and example families.

Grammar (whitespace is ignored)::

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := 'x' INT | INT | '(' expr ')'

``a - b`` is read as ``a + (-1)*b``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import combinations
from typing import Hashable

from .field import PrimeField
from .roabp import ROABP, Const, EdgeLabel, Var, make_program


class FormulaError(ValueError):
    pass


class FormulaSyntaxError(FormulaError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class ReadOnceViolation(FormulaError):
    def __init__(self, index: int):
        super().__init__(f"variable x{index} occurs more than once")
        self.index = index


@dataclass(frozen=True)
class FormulaNode:
    """kind is 'add', 'mul', 'var' or 'const'; leaves carry ``value``."""

    kind: str
    children: tuple["FormulaNode", ...] = ()
    value: int = 0

    @classmethod
    def var(cls, i: int) -> "FormulaNode":
        return cls("var", (), i)

    @classmethod
    def const(cls, c: int) -> "FormulaNode":
        return cls("const", (), c)

    @classmethod
    def add(cls, *children: "FormulaNode") -> "FormulaNode":
        return cls("add", tuple(children))

    @classmethod
    def mul(cls, *children: "FormulaNode") -> "FormulaNode":
        return cls("mul", tuple(children))

    def __str__(self):
        if self.kind == "var":
            return f"x{self.value}"
        if self.kind == "const":
            return str(self.value)
        op = " + " if self.kind == "add" else "*"
        return "(" + op.join(map(str, self.children)) + ")"

    @property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children)

    def variables(self) -> list[int]:
        if self.kind == "var":
            return [self.value]
        return [i for c in self.children for i in c.variables()]

    def evaluate(self, point, p: int) -> int:
        """Direct evaluation; x_i reads point[i - 1]."""
        if self.kind == "var":
            return int(point[self.value - 1]) % p
        if self.kind == "const":
            return self.value % p
        vals = [c.evaluate(point, p) for c in self.children]
        acc = 0 if self.kind == "add" else 1
        for v in vals:
            acc = (acc + v) % p if self.kind == "add" else acc * v % p
        return acc


def check_read_once(node: FormulaNode) -> None:
    seen = set()
    for i in node.variables():
        if i in seen:
            raise ReadOnceViolation(i)
        seen.add(i)


_TOKEN = re.compile(r"\s*(?:(x\d+)|(\d+)|(.))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m.group(0).strip() == "":
            break
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("var", m.group(1), start))
        elif m.group(2):
            tokens.append(("int", m.group(2), start))
        elif m.group(3) in "+-*()":
            tokens.append((m.group(3), m.group(3), start))
        else:
            raise FormulaSyntaxError(f"unexpected character {m.group(3)!r}", start)
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind: str):
        tok = self.tokens[self.i]
        if tok[0] != kind:
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            raise FormulaSyntaxError(f"expected {kind!r}, found {what}", tok[2])
        self.i += 1
        return tok

    def expr(self) -> FormulaNode:
        terms = [self.term()]
        while self.peek()[0] in "+-":
            op = self.take(self.peek()[0])[0]
            t = self.term()
            terms.append(t if op == "+" else FormulaNode.mul(FormulaNode.const(-1), t))
        return terms[0] if len(terms) == 1 else FormulaNode.add(*terms)

    def term(self) -> FormulaNode:
        factors = [self.factor()]
        while self.peek()[0] == "*":
            self.take("*")
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else FormulaNode.mul(*factors)

    def factor(self) -> FormulaNode:
        kind, text, pos = self.peek()
        if kind == "var":
            self.i += 1
            index = int(text[1:])
            if index < 1:
                raise FormulaSyntaxError("variables are numbered from x1", pos)
            return FormulaNode.var(index)
        if kind == "int":
            self.i += 1
            return FormulaNode.const(int(text))
        if kind == "(":
            self.take("(")
            node = self.expr()
            self.take(")")
            return node
        what = "end of input" if kind == "end" else repr(text)
        raise FormulaSyntaxError(f"expected a variable, integer or '(', found {what}", pos)


def parse(text: str) -> FormulaNode:
    p = _Parser(text)
    node = p.expr()
    p.take("end")
    check_read_once(node)
    return node


# ---------------------------------------------------------------------------
# compilation


class _Builder:
    """Accumulates levels and edges; a fragment is (levels, source, sink) with levels as node lists."""

    def __init__(self):
        self.edges: list[tuple[Hashable, Hashable, EdgeLabel]] = []
        self.alias: dict[int, int] = {}
        self.count = 0

    def node(self) -> int:
        self.count += 1
        return self.count

    def compile(self, node: FormulaNode) -> list[list[int]]:
        if node.kind in ("var", "const"):
            s, t = self.node(), self.node()
            lab = Var(node.value) if node.kind == "var" else Const(node.value)
            self.edges.append((s, t, lab))
            return [[s], [t]]
        parts = [self.compile(c) for c in node.children]
        if node.kind == "mul":
            levels = parts[0]
            for nxt in parts[1:]:
                # glue: the next fragment's source becomes the current sink
                self._merge(nxt[0][0], levels[-1][0])
                levels = levels[:-1] + [[levels[-1][0]]] + nxt[1:]
            return levels
        depth = max(len(f) - 1 for f in parts)
        s, t = self.node(), self.node()
        # one shared padding chain from each shorter child's sink depth down to t
        chain: dict[int, int] = {}
        levels: list[list[int]] = [[] for _ in range(depth + 1)]
        levels[0], levels[depth] = [s], [t]
        for frag in parts:
            d = len(frag) - 1
            self._merge(frag[0][0], s)
            end = t if d == depth else chain.setdefault(d, self.node())
            self._merge(frag[-1][0], end)
            for lvl in range(1, d):
                levels[lvl].extend(frag[lvl])
        for d in sorted(chain):
            levels[d].append(chain[d])
        marks = sorted(chain) + [depth]
        for a, b in zip(marks, marks[1:]):
            prev = chain[a]
            for lvl in range(a + 1, b):
                mid = self.node()
                levels[lvl].append(mid)
                self.edges.append((prev, mid, Const(1)))
                prev = mid
            self.edges.append((prev, chain[b] if b in chain else t, Const(1)))
        return levels

    def _merge(self, old: int, new: int) -> None:
        if old != new:
            self.alias[old] = new

    def find(self, v: int) -> int:
        while v in self.alias:
            v = self.alias[v]
        return v

    def resolved(self, levels: list[list[int]]):
        out_levels = []
        for level in levels:
            row = list(dict.fromkeys(self.find(v) for v in level))
            out_levels.append(row)
        edges = [(self.find(u), self.find(v), lab) for u, v, lab in self.edges]
        return out_levels, edges


def to_roabp(formula: FormulaNode, field: PrimeField, num_vars: int | None = None) -> ROABP:
    """Compile a read-once formula: products in series, sums in parallel with
    constant-1 padding so every source-sink path has the same length."""
    check_read_once(formula)
    used = formula.variables()
    n = max(used, default=0) if num_vars is None else num_vars
    if used and max(used) > n:
        raise FormulaError(f"formula uses x{max(used)} but only {n} variables were requested")
    b = _Builder()
    levels, edges = b.resolved(b.compile(formula))
    return make_program(n, field, levels, edges)


# ---------------------------------------------------------------------------
# example families


def build_fn(n: int, field: PrimeField) -> ROABP:
    """Sum over odd i and even j in [2n] of x_i x_j.

    Levels s | u_1..u_n | w_1..w_n | t; s->u_i reads x_{2i-1}, u_i->w_j is a
    complete bipartite layer of 1s, w_j->t reads x_{2j}.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    u = [("u", i) for i in range(1, n + 1)]
    w = [("w", j) for j in range(1, n + 1)]
    edges = [("s", u[i - 1], Var(2 * i - 1)) for i in range(1, n + 1)]
    edges += [(a, b, Const(1)) for a in u for b in w]
    edges += [(w[j - 1], "t", Var(2 * j)) for j in range(1, n + 1)]
    return make_program(2 * n, field, [["s"], u, w, ["t"]], edges)


def build_chain(n: int, field: PrimeField) -> ROABP:
    """x_1x_2 + x_2x_3 + ... + x_{2n-1}x_{2n}.

    Reading the variables in their natural order cannot work read-once, so the
    odd variables come first: a skip track picks exactly one odd x_{2i-1} and
    moves to track pending_i. Then for each j a collector gathers pending_j and
    pending_{j+1}, reads x_{2j}, and hands over to a done track ending at the sink.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    one = Const(1)
    levels: list[list] = [["skip"]]
    edges: list = []
    pend = lambda i, lvl: ("pend", i, lvl)
    for i in range(1, n + 1):
        prev_lvl = i - 1
        row = []
        if i < n:
            row.append(("skip", i))
            edges.append((levels[-1][0], ("skip", i), one))
        for h in range(1, i):
            row.append(pend(h, i))
            edges.append((pend(h, prev_lvl), pend(h, i), one))
        row.append(pend(i, i))
        edges.append((levels[-1][0], pend(i, i), Var(2 * i - 1)))
        levels.append(row)
    lvl = n
    done = None
    for j in range(1, n + 1):
        collector = ("collect", j)
        row = [collector]
        edges.append((pend(j, lvl), collector, one))
        if j < n:
            edges.append((pend(j + 1, lvl), collector, one))
        for h in range(j + 1, n + 1):
            row.append(pend(h, lvl + 1))
            edges.append((pend(h, lvl), pend(h, lvl + 1), one))
        if done is not None:
            row.append(("carry", j))
            edges.append((done, ("carry", j), one))
        levels.append(row)
        lvl += 1
        new_done = ("done", j)
        row = [new_done]
        edges.append((collector, new_done, Var(2 * j)))
        if done is not None:
            edges.append((("carry", j), new_done, one))
        for h in range(j + 1, n + 1):
            row.append(pend(h, lvl + 1))
            edges.append((pend(h, lvl), pend(h, lvl + 1), one))
        levels.append(row)
        lvl += 1
        done = new_done
    return make_program(2 * n, field, levels, edges)


def product_program(n: int, field: PrimeField, num_vars: int | None = None) -> ROABP:
    """x_1 x_2 ... x_n as a single path."""
    levels = [[k] for k in range(n + 1)]
    edges = [(k - 1, k, Var(k)) for k in range(1, n + 1)]
    return make_program(n if num_vars is None else num_vars, field, levels, edges)


def max_path3_free(n: int, limit: int = 4) -> int:
    """Largest edge set of K_{n,n} without a path of three edges, by exhaustive search.

    An edge set has such a path iff some edge joins two vertices of degree >= 2.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > limit:
        raise ValueError(f"exhaustive search limited to n <= {limit}")
    E = [(a, b) for a in range(n) for b in range(n)]
    best = 0
    for mask in range(1 << len(E)):
        size = bin(mask).count("1")
        if size <= best:
            continue
        ldeg, rdeg = [0] * n, [0] * n
        chosen = [E[k] for k in range(len(E)) if mask >> k & 1]
        for a, b in chosen:
            ldeg[a] += 1
            rdeg[b] += 1
        if all(ldeg[a] < 2 or rdeg[b] < 2 for a, b in chosen):
            best = size
    return best
