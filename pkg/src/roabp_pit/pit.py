"""Identity tests for single RO-ABPs and for sums of k RO-ABPs.

Engines:

* ``pit_single_structural`` - reachability in the constant-term graph of a program.
* ``pit_single_blackbox``   - exhaustive sweep of f composed with the SV generator
  over the grid points indexed by the exponents the composition can have.
* ``find_alignment``        - greedy coordinate shift making every nonzero second
  partial of every summand nonzero at the shift.
* ``sum_pit_nonblackbox`` / ``sum_pit_semiblackbox`` / ``sum_pit_blackbox`` -
  the three access models for sums; all finish with a sweep of the low-weight
  cube translated by a (candidate) alignment.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field as dc_field
from itertools import combinations
from math import prod
from typing import Callable, Iterator, Sequence

import numpy as np

from .field import AnchorSet, FieldError, PrimeField, Scalar
from .oracle import CapExceeded
from .roabp import (ROABP, array_dtype, constant_sums_from, evaluate, evaluate_batch,
                    partial_derivative, restrict, validate)
from .svgen import SVGenerator, ceil_log2, low_weight_set

DEFAULT_PROBE_CAP = 10**7
MAX_CHUNK = 1 << 14


@dataclass
class PITReport:
    is_zero: bool
    witness: tuple[int, ...] | None = None
    stats: dict = dc_field(default_factory=dict)
    params: dict = dc_field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [f"verdict: {'zero' if self.is_zero else 'nonzero'}"]
        out += [f"{k}: {v}" for k, v in self.params.items()]
        out += [f"{k}: {v}" for k, v in self.stats.items()]
        if self.witness is not None:
            out.append("witness: " + ",".join(map(str, self.witness)))
        return out


class BlackBox:
    """Point-query access to a polynomial over F^n.

    ``batch_fn`` maps a (B, n) array of residues to B values. ``free`` lists the
    (1-based) coordinates the function may depend on; derived views pin
    coordinates and shrink it. ``queries`` counts rows answered by this box.
    """

    def __init__(self, dimension: int, field: PrimeField,
                 batch_fn: Callable[[np.ndarray], np.ndarray],
                 free: Sequence[int] | None = None, name: str = "box"):
        self.dimension = dimension
        self.field = field
        self.free = tuple(sorted(range(1, dimension + 1) if free is None else set(free)))
        self.name = name
        self.queries = 0
        self._batch_fn = batch_fn
        self._dtype = array_dtype(field.modulus)

    def __repr__(self):
        return f"BlackBox({self.name}, n={self.dimension}, free={len(self.free)})"

    @classmethod
    def from_roabp(cls, A: ROABP, name: str = "roabp") -> "BlackBox":
        return cls(A.num_vars, A.field, lambda pts: evaluate_batch(A, pts), name=name)

    @classmethod
    def from_function(cls, dimension: int, field: PrimeField, fn: Callable[[tuple], int],
                      name: str = "function") -> "BlackBox":
        """Wrap a scalar function of a tuple of residues."""
        dt = array_dtype(field.modulus)

        def batch(pts):
            return np.array([int(fn(tuple(int(a) for a in row))) % field.modulus for row in pts],
                            dtype=dt)

        return cls(dimension, field, batch, name=name)

    @classmethod
    def zero(cls, dimension: int, field: PrimeField) -> "BlackBox":
        dt = array_dtype(field.modulus)
        return cls(dimension, field, lambda pts: np.zeros(len(pts), dtype=dt), free=(), name="zero")

    @classmethod
    def sum(cls, boxes: Sequence["BlackBox"], name: str = "sum") -> "BlackBox":
        n, field = _common(boxes)
        p = field.modulus

        def batch(pts):
            total = boxes[0].query_batch(pts)
            for b in boxes[1:]:
                total = (total + b.query_batch(pts)) % p
            return total

        free = set().union(*(b.free for b in boxes))
        return cls(n, field, batch, free=free, name=name)

    def query_batch(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=self._dtype).reshape(-1, self.dimension)
        self.queries += len(pts)
        return np.asarray(self._batch_fn(pts)) % self.field.modulus

    def query(self, point) -> Scalar:
        if len(point) != self.dimension:
            raise ValueError(f"point has {len(point)} coordinates, box has {self.dimension}")
        p = self.field.modulus
        row = [a.value if isinstance(a, Scalar) else int(a) % p for a in point]
        return self.field(int(self.query_batch([row])[0]))

    def __call__(self, point):
        return self.query(point)

    def restrict(self, i: int, c) -> "BlackBox":
        """View of f with x_i pinned to c."""
        self._check(i)
        c = int(c.value if isinstance(c, Scalar) else c) % self.field.modulus

        def batch(pts):
            pts = pts.copy()
            pts[:, i - 1] = c
            return self.query_batch(pts)

        return BlackBox(self.dimension, self.field, batch, set(self.free) - {i},
                        name=f"{self.name}|x{i}={c}")

    def second_partial(self, a: int, b: int) -> "BlackBox":
        """View of d^2 f / dx_a dx_b; each probe costs 4 queries to this box."""
        self._check(a)
        self._check(b)
        if a == b:
            raise ValueError("second partial needs two distinct variables")
        p = self.field.modulus

        def batch(pts):
            B = len(pts)
            stacked = np.concatenate([pts, pts, pts, pts])
            for blk, (va, vb) in enumerate(((1, 1), (1, 0), (0, 1), (0, 0))):
                stacked[blk * B:(blk + 1) * B, a - 1] = va
                stacked[blk * B:(blk + 1) * B, b - 1] = vb
            v = self.query_batch(stacked)
            return (v[:B] - v[B:2 * B] - v[2 * B:3 * B] + v[3 * B:]) % p

        return BlackBox(self.dimension, self.field, batch, set(self.free) - {a, b},
                        name=f"d2({self.name})/dx{a}dx{b}")

    def shift(self, v) -> "BlackBox":
        """View of f(x + v)."""
        if len(v) != self.dimension:
            raise ValueError("shift vector has the wrong length")
        p = self.field.modulus
        vec = np.array([a.value if isinstance(a, Scalar) else int(a) % p for a in v],
                       dtype=self._dtype)

        def batch(pts):
            return self.query_batch((pts + vec) % p)

        return BlackBox(self.dimension, self.field, batch, self.free, name=f"{self.name}(x+v)")

    def _check(self, i: int) -> None:
        if not 1 <= i <= self.dimension:
            raise IndexError(f"variable index {i} outside 1..{self.dimension}")


def _common(items) -> tuple[int, PrimeField]:
    if not items:
        raise ValueError("need at least one polynomial")
    dims = {getattr(x, "num_vars", getattr(x, "dimension", None)) for x in items}
    fields = {x.field for x in items}
    if len(dims) != 1:
        raise ValueError(f"summands disagree on the variable count: {sorted(dims)}")
    if len(fields) != 1:
        raise FieldError("summands disagree on the modulus")
    return dims.pop(), fields.pop()


# ---------------------------------------------------------------------------
# chunked enumeration helpers


def _unravel(idx: np.ndarray, shape: Sequence[int]) -> list[np.ndarray]:
    """Mixed-radix digits of flat indices, last axis fastest. Works when prod(shape) overflows int64."""
    digits = []
    rest = idx.copy()
    for size in reversed(shape):
        digits.append(rest % size)
        rest //= size
    return digits[::-1]


def _chunks(total: int, limit: int | None = None) -> Iterator[tuple[int, int]]:
    """Geometrically growing [start, stop) ranges so an early hit stays cheap."""
    stop_all = total if limit is None else min(total, limit)
    start, size = 0, 1
    while start < stop_all:
        stop = min(stop_all, start + size)
        yield start, stop
        start = stop
        size = min(size * 4, MAX_CHUNK)


def _first_nonzero(vals: np.ndarray) -> int | None:
    nz = np.flatnonzero(vals)
    return int(nz[0]) if len(nz) else None


# ---------------------------------------------------------------------------
# single-program engines


def constant_term_graph(A: ROABP) -> dict:
    """Adjacency of the graph on {s, t, x_i}: an arc wherever the constant term between the
    corresponding program nodes is nonzero. Variables are ordered by the layer that reads them."""
    var_e = sorted(A.var_edges.values(), key=lambda e: (A.level_of[e.src], e.label.index))
    from_s = constant_sums_from(A, A.source)
    after = {e.label.index: constant_sums_from(A, e.dst) for e in var_e}
    adj: dict = {"s": [], "t": []}
    for e in var_e:
        adj[e.label.index] = []
    if from_s.get(A.sink):
        adj["s"].append("t")
    for pos, e in enumerate(var_e):
        i = e.label.index
        if from_s.get(e.src):
            adj["s"].append(i)
        for f in var_e[pos + 1:]:
            if after[i].get(f.src):
                adj[i].append(f.label.index)
        if after[i].get(A.sink):
            adj[i].append("t")
    return adj


def _bfs_path(adj: dict, start, goal) -> list | None:
    parent = {start: None}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        if u == goal:
            path = []
            while u is not None:
                path.append(u)
                u = parent[u]
            return path[::-1]
        for w in adj[u]:
            if w not in parent:
                parent[w] = u
                queue.append(w)
    return None


def pit_single_structural(A: ROABP) -> PITReport:
    """Zero test for one program via s-t reachability in its constant-term graph.

    Paths s -> x_{i_1} -> ... -> x_{i_k} -> t correspond exactly to the monomials
    with nonzero coefficient. A shortest path gives a monomial of minimum size,
    so its 0/1 indicator vector is a witness: no other monomial fits inside it.
    """
    validate(A)
    adj = constant_term_graph(A)
    path = _bfs_path(adj, "s", "t")
    stats = {"graph_vertices": len(adj), "graph_arcs": sum(map(len, adj.values())),
             "program_nodes": A.node_count, "program_edges": A.edge_count}
    params = {"modulus": A.field.modulus, "n": A.num_vars}
    if path is None:
        return PITReport(True, None, stats, params)
    support = [v for v in path if isinstance(v, int)]
    point = [0] * A.num_vars
    for i in support:
        point[i - 1] = 1
    evaluations = 1
    if not evaluate(A, point):
        # unreachable for a valid program; fall back to the cube on the support
        for w in low_weight_set(len(support), len(support)):
            point = [0] * A.num_vars
            for i, bit in zip(support, w):
                point[i - 1] = bit
            evaluations += 1
            if evaluate(A, point):
                break
        else:
            raise RuntimeError("constant-term graph has an s-t path but no witness was found")
    stats["evaluations"] = evaluations
    stats["monomial"] = "*".join(f"x{i}" for i in support) or "1"
    return PITReport(False, tuple(point), stats, params)


def _axis_pairs(a: int, slope: int) -> list[tuple[int, int]]:
    """(z index, y index) pairs whose smallest admissible z-degree is exactly a."""
    if a == 0:
        return [(0, 0)]
    out = []
    for alpha in range(a + 1):
        top = a * slope
        low = 0 if alpha == a else (a - 1) * slope + 1
        out.extend((alpha, beta) for beta in range(low, top + 1))
    return out


def _degree_blocks(order: int, d: int) -> Iterator[tuple[int, ...]]:
    """All a in N^order with sum(a) <= d, by total then lexicographically."""
    for total in range(d + 1):
        for cut in combinations(range(total + order - 1), order - 1):
            parts, prev = [], -1
            for c in cut + (total + order - 1,):
                parts.append(c - prev - 1)
                prev = c
            yield tuple(parts)


def pit_single_blackbox(f: BlackBox, var_bound: int | None = None) -> PITReport:
    """Zero test for a black box promised to compute an RO-ABP polynomial.

    With d = var_bound (default: the number of free coordinates n') and
    m = ceil(log2 max(d, 2)), g = f(G_{m+1}) is nonzero for every nonzero f
    depending on at most d variables. Since f is multilinear of degree <= d and
    the generator is linear in z with y-degree n'-1, every monomial z^a y^b of g
    has |a| <= d and b_j <= (n'-1) a_j. The grid points indexed by the downward
    closure of that exponent set are unisolvent for it, so g vanishes on them
    only if g = 0. A promise violation goes undetected.
    """
    p = f.field.modulus
    free = f.free
    nf = len(free)
    d = nf if var_bound is None else min(var_bound, nf)
    params = {"modulus": p, "n": f.dimension, "free": nf, "var_bound": d}
    before = f.queries
    dt = array_dtype(p)
    if d == 0:
        point = [0] * f.dimension
        val = int(f.query_batch([point])[0])
        stats = {"grid_points": 1, "queries": f.queries - before}
        return PITReport(val == 0, None if val == 0 else tuple(point), stats, params)

    m = ceil_log2(max(d, 2))
    order = m + 1
    slope = nf - 1
    ry, rz = slope * d, d
    if p <= max(ry, rz, nf):
        raise FieldError(f"GF({p}) too small: the grid needs {max(ry, rz, nf) + 1} distinct elements")
    G = SVGenerator(order, AnchorSet.default(nf, f.field))
    table = G.basis_table(range(ry + 1))
    # y from the top of its range (non-anchor values first); z index 0 is the value 1
    y_axis = np.arange(ry, -1, -1, dtype=np.int64)
    z_axis = np.array(list(range(1, rz + 1)) + [0], dtype=np.int64)
    pairs = [np.array(_axis_pairs(a, slope), dtype=np.int64) for a in range(d + 1)]
    cols = np.array(free, dtype=np.int64) - 1
    params.update({"order": order, "y_bound": ry, "z_bound": rz})
    probed = 0
    for block in _degree_blocks(order, d):
        shape = [len(pairs[a]) for a in block]
        for start, stop in _chunks(prod(shape)):
            digits = _unravel(np.arange(start, stop, dtype=np.int64), shape)
            img = np.zeros((stop - start, nf), dtype=dt)
            for j, a in enumerate(block):
                alpha, beta = pairs[a][digits[j]].T
                zv = z_axis[alpha].astype(dt)
                img = (img + table[y_axis[beta]] * zv[:, None]) % p
            pts = np.zeros((stop - start, f.dimension), dtype=dt)
            pts[:, cols] = img
            vals = f.query_batch(pts)
            hit = _first_nonzero(vals)
            if hit is not None:
                probed += hit + 1
                stats = {"grid_points": probed, "queries": f.queries - before}
                return PITReport(False, tuple(int(a) for a in pts[hit]), stats, params)
            probed += stop - start
    return PITReport(True, None, {"grid_points": probed, "queries": f.queries - before}, params)


# ---------------------------------------------------------------------------
# simultaneous alignment


class StructuralHandle:
    """Alignment-search access to an explicit program: surgery plus the structural test."""

    def __init__(self, program: ROABP):
        validate(program)
        self.program = program
        self.field = program.field
        self.n = program.num_vars
        self.pit_calls = 0

    def second_partial(self, a: int, b: int) -> ROABP:
        return partial_derivative(partial_derivative(self.program, a), b)

    def restrict(self, g: ROABP, j: int, c: int) -> ROABP:
        return restrict(g, j, c)

    def is_zero(self, g: ROABP) -> bool:
        self.pit_calls += 1
        return pit_single_structural(g).is_zero

    def value(self, g: ROABP, point) -> int:
        return evaluate(g, point).value


class BlackBoxHandle:
    """Alignment-search access through point queries: derivative and restriction views,
    tested with the generator-grid engine."""

    def __init__(self, box: BlackBox):
        self.box = box
        self.field = box.field
        self.n = box.dimension
        self.pit_calls = 0

    def second_partial(self, a: int, b: int) -> BlackBox:
        return self.box.second_partial(a, b)

    def restrict(self, g: BlackBox, j: int, c: int) -> BlackBox:
        return g.restrict(j, c)

    def is_zero(self, g: BlackBox) -> bool:
        self.pit_calls += 1
        return pit_single_blackbox(g).is_zero

    def value(self, g: BlackBox, point) -> int:
        return g.query(point).value


@dataclass
class AlignmentResult:
    """``choices`` holds (coordinate, chosen value, candidates tried) per coordinate;
    ``constraints`` the (summand, a, b) of every nonzero second partial, and
    ``constraint_values`` their values at the shift."""

    shift: tuple[int, ...]
    constraints: list[tuple[int, int, int]]
    choices: list[tuple[int, int, int]]
    constraint_values: list[int]
    pit_calls: int = 0

    @property
    def constraint_count(self) -> int:
        return len(self.constraints)


def find_alignment(handles: Sequence, n: int | None = None,
                   V: Sequence[int] | None = None) -> AlignmentResult:
    """Shift v at which every nonzero second partial of every summand is nonzero.

    Coordinates are fixed one at a time to the smallest candidate in V keeping
    all (partially restricted) constraints nonzero. With |V| = k n^2 + 1 some
    candidate always works, since each of the <= k n^2 multilinear constraints
    has at most one bad value per coordinate.
    """
    if not handles:
        raise ValueError("need at least one handle")
    field = handles[0].field
    if any(h.field != field for h in handles):
        raise FieldError("handles disagree on the modulus")
    n = handles[0].n if n is None else n
    k = len(handles)
    p = field.modulus
    if p <= k * n * n:
        raise FieldError(f"alignment needs p > k*n^2 = {k * n * n}, got p = {p}")
    V = list(range(k * n * n + 1)) if V is None else [int(c) % p for c in V]

    L = []
    for idx, h in enumerate(handles):
        for a, b in combinations(range(1, n + 1), 2):
            g = h.second_partial(a, b)
            if not h.is_zero(g):
                L.append((idx, a, b, g))
    originals = [(idx, g) for idx, _, _, g in L]
    current = [g for *_, g in L]
    shift, choices = [], []
    for j in range(1, n + 1):
        for tried, c in enumerate(V, 1):
            restricted = []
            for (idx, _, _, _), g in zip(L, current):
                h = handles[idx]
                r = h.restrict(g, j, c)
                if h.is_zero(r):
                    break
                restricted.append(r)
            else:
                current = restricted
                shift.append(c)
                choices.append((j, c, tried))
                break
        else:
            raise RuntimeError(f"no candidate in V keeps all constraints nonzero at x{j}; "
                               "a handle does not behave like an RO-ABP")
    values = [handles[idx].value(g, shift) for idx, g in originals]
    return AlignmentResult(tuple(shift), [(idx, a, b) for idx, a, b, _ in L], choices, values,
                           sum(h.pit_calls for h in handles))


# ---------------------------------------------------------------------------
# sums of k programs


def _cube_sweep(fn: Callable[[np.ndarray], np.ndarray], n: int, weight: int, shift: Sequence[int],
                p: int) -> tuple[tuple[int, ...] | None, int]:
    """Probe fn on W_weight^n + shift; returns (first nonzero point or None, probes)."""
    dt = array_dtype(p)
    vec = np.array(shift, dtype=dt)
    probes = 0
    batch = []

    def flush():
        nonlocal probes
        pts = (np.array(batch, dtype=dt).reshape(-1, n) + vec) % p
        vals = fn(pts)
        hit = _first_nonzero(vals)
        if hit is not None:
            probes += hit + 1
            return tuple(int(a) for a in pts[hit])
        probes += len(pts)
        return None

    for w in low_weight_set(n, weight):
        batch.append(w)
        if len(batch) >= 4096:
            found = flush()
            if found is not None:
                return found, probes
            batch = []
    if batch:
        found = flush()
        if found is not None:
            return found, probes
    return None, probes


def sum_pit_nonblackbox(programs: Sequence[ROABP]) -> PITReport:
    """Sum of k explicitly given programs: align structurally, then sweep W_{7k}^n + v."""
    n, field = _common(programs)
    for A in programs:
        validate(A)
    k = len(programs)
    p = field.modulus
    if p <= k * n * n:
        raise FieldError(f"needs p > k*n^2 = {k * n * n}, got p = {p}")
    al = find_alignment([StructuralHandle(A) for A in programs], n)

    def fn(pts):
        total = evaluate_batch(programs[0], pts)
        for A in programs[1:]:
            total = (total + evaluate_batch(A, pts)) % p
        return total

    witness, probes = _cube_sweep(fn, n, 7 * k, al.shift, p)
    return _sum_report(witness, probes, al, p, n, k)


def sum_pit_semiblackbox(boxes: Sequence[BlackBox]) -> PITReport:
    """Sum of k black boxes queried individually: align through derivative views, then sweep."""
    n, field = _common(boxes)
    k = len(boxes)
    p = field.modulus
    if p <= k * n * n:
        raise FieldError(f"needs p > k*n^2 = {k * n * n}, got p = {p}")
    before = sum(b.queries for b in boxes)
    al = find_alignment([BlackBoxHandle(b) for b in boxes], n)

    def fn(pts):
        total = boxes[0].query_batch(pts)
        for b in boxes[1:]:
            total = (total + b.query_batch(pts)) % p
        return total

    witness, probes = _cube_sweep(fn, n, 7 * k, al.shift, p)
    rep = _sum_report(witness, probes, al, p, n, k)
    rep.stats["base_queries"] = sum(b.queries for b in boxes) - before
    return rep


def _sum_report(witness, probes, al: AlignmentResult, p, n, k) -> PITReport:
    params = {"modulus": p, "n": n, "k": k, "weight": 7 * k, "V_size": k * n * n + 1}
    stats = {"constraints": al.constraint_count, "pit_calls": al.pit_calls,
             "cube_probes": probes, "shift": ",".join(map(str, al.shift))}
    return PITReport(witness is None, witness, stats, params)


def sum_pit_blackbox(f: BlackBox, k: int, cap: int = DEFAULT_PROBE_CAP,
                     full_cube_shortcut: bool = True) -> PITReport:
    """Black-box test for a sum of at most k RO-ABP polynomials.

    Sweeps W_{7k}^n + v for every v in A_k = G_m(V^{2m}), m = ceil(log2 n) + 1,
    |V| = k n^4 + 1. When 7k >= n the weight-7k cube is all of {0,1}^n, which
    already hits every nonzero multilinear polynomial, so with
    ``full_cube_shortcut`` one shift suffices. Otherwise the sweep stops with
    CapExceeded once ``cap`` probes are spent without a nonzero.
    """
    n, p = f.dimension, f.field.modulus
    if k < 1:
        raise ValueError("k must be at least 1")
    if p <= k * n**4:
        raise FieldError(f"needs p > k*n^4 = {k * n**4}, got p = {p}")
    m = ceil_log2(n) + 1
    V = np.arange(k * n**4 + 1, dtype=np.int64)
    params = {"modulus": p, "n": n, "k": k, "m": m, "V_size": len(V), "weight": 7 * k}
    before = f.queries
    W = np.array(low_weight_set(n, 7 * k).to_list(), dtype=array_dtype(p)).reshape(-1, n)
    total_shifts = len(V) ** (2 * m)
    params["hitting_set_size"] = total_shifts * len(W)
    if full_cube_shortcut and 7 * k >= n:
        # the first element of A_k is G_m(0, ..., 0) = 0
        witness, probes = _cube_sweep(f.query_batch, n, 7 * k, [0] * n, p)
        stats = {"shifts": 1, "probes": probes, "queries": f.queries - before, "shortcut": "full-cube"}
        return PITReport(witness is None, witness, stats, params)

    G = SVGenerator(m, AnchorSet.default(n, f.field))
    dt = array_dtype(p)
    table = G.basis_table(V.tolist())
    shape = (len(V),) * (2 * m)
    per_chunk = max(1, MAX_CHUNK // len(W))
    probes = 0
    start = 0
    while start < total_shifts:
        if probes >= cap:
            raise CapExceeded(
                f"black-box hitting set truncated after {probes} probes "
                f"({start} of {total_shifts} shifts); the full hitting set exceeds the cap", "--cap-probes")
        budget = max(1, (cap - probes) // len(W))
        stop = min(total_shifts, start + per_chunk, start + budget)
        digits = _unravel(np.arange(start, stop, dtype=np.int64), shape)
        shifts = np.zeros((stop - start, n), dtype=dt)
        for j in range(m):
            zv = V[digits[m + j]].astype(dt)
            shifts = (shifts + table[digits[j]] * zv[:, None]) % p
        pts = ((shifts[:, None, :] + W[None, :, :]) % p).reshape(-1, n)
        vals = f.query_batch(pts)
        hit = _first_nonzero(vals)
        if hit is not None:
            probes += hit + 1
            stats = {"shifts": start + hit // len(W) + 1, "probes": probes,
                     "queries": f.queries - before}
            return PITReport(False, tuple(int(a) for a in pts[hit]), stats, params)
        probes += len(pts)
        start = stop
    stats = {"shifts": total_shifts, "probes": probes, "queries": f.queries - before}
    return PITReport(True, None, stats, params)
