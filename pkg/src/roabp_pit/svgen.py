"""The Shpilka-Volkovich generator, evaluation grids and explicit point sets.

Point sets are lazy: iterating a PointSet re-runs a deterministic generator,
so sets far too large to materialise can still be swept with early exit.
Points are tuples of residues.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from math import comb
from typing import Callable, Iterator, Sequence

import numpy as np

from .field import AnchorSet, FieldError, PrimeField, Scalar
from .oracle import CapExceeded
from .roabp import array_dtype

Point = tuple[int, ...]


@dataclass(frozen=True)
class SVGenerator:
    """G_k : F^{2k} -> F^n with G^i(y, z) = sum_j u_i(y_j) z_j."""

    order: int
    anchors: AnchorSet

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("generator order must be at least 1")

    @classmethod
    def default(cls, order: int, n: int, field: PrimeField) -> "SVGenerator":
        return cls(order, AnchorSet.default(n, field))

    @property
    def field(self) -> PrimeField:
        return self.anchors.field

    @property
    def n(self) -> int:
        return len(self.anchors)

    def _raw(self, values) -> list[int]:
        if len(values) != self.order:
            raise ValueError(f"expected {self.order} values, got {len(values)}")
        p = self.field.modulus
        out = []
        for a in values:
            if isinstance(a, Scalar):
                if a.field != self.field:
                    raise FieldError("modulus mismatch")
                a = a.value
            out.append(int(a) % p)
        return out

    def eval_component(self, i: int, y, z) -> Scalar:
        if not 1 <= i <= self.n:
            raise IndexError(f"component {i} outside 1..{self.n}")
        return self.field(self.eval_map(y, z)[i - 1])

    def eval_map(self, y, z) -> Point:
        y, z = self._raw(y), self._raw(z)
        p = self.field.modulus
        out = [0] * self.n
        for yj, zj in zip(y, z):
            if zj:
                for i, u in enumerate(self.anchors.basis_values(yj)):
                    out[i] = (out[i] + u * zj) % p
        return tuple(out)

    def basis_table(self, values: Sequence[int]) -> np.ndarray:
        """Row r holds [u_1(values[r]), ..., u_n(values[r])]."""
        dt = array_dtype(self.field.modulus)
        return np.array([self.anchors.basis_values(v) for v in values], dtype=dt).reshape(
            len(values), self.n)


class PointSet:
    """A deterministic, re-iterable enumeration of points in F^n (or Z^n for 0/1 sets)."""

    def __init__(self, dimension: int, provenance: str, factory: Callable[[], Iterator[Point]],
                 size: int, field: PrimeField | None = None):
        self.dimension = dimension
        self.provenance = provenance
        self.size = size
        self.field = field
        self._factory = factory

    def __iter__(self) -> Iterator[Point]:
        return self._factory()

    def __len__(self):
        return self.size

    def to_list(self) -> list[Point]:
        return list(self)

    def __repr__(self):
        return f"PointSet({self.provenance}, n={self.dimension}, size={self.size})"


def low_weight_set(n: int, w: int, field: PrimeField | None = None) -> PointSet:
    """All 0/1 vectors of length n with at most w ones, by weight then lexicographically."""
    if not 0 <= w:
        raise ValueError("weight must be non-negative")
    w = min(w, n)

    def gen():
        for k in range(w + 1):
            # combinations in increasing index order gives descending 0/1 tuples; flip for lex order
            pts = []
            for ones in combinations(range(n), k):
                v = [0] * n
                for i in ones:
                    v[i] = 1
                pts.append(tuple(v))
            yield from sorted(pts)

    return PointSet(n, "low-weight", gen, sum(comb(n, i) for i in range(w + 1)), field)


def generator_image(G: SVGenerator, V: Sequence[int], cap: int | None = None) -> PointSet:
    """{G(a) : a in V^{2k}} in odometer order over (y_1..y_k, z_1..z_k), last coordinate fastest."""
    if len(V) < 1:
        raise ValueError("value set must be non-empty")
    p = G.field.modulus
    V = [int(v.value if isinstance(v, Scalar) else v) % p for v in V]
    k = G.order
    size = len(V) ** (2 * k)
    if cap is not None and size > cap:
        raise CapExceeded(f"generator image has {size} inputs, cap is {cap}", "--cap-probes")

    def gen():
        for a in product(V, repeat=2 * k):
            yield G.eval_map(a[:k], a[k:])

    return PointSet(G.n, "generator-image", gen, size, G.field)


def sum_set(P: PointSet, Q: PointSet) -> PointSet:
    """{p + q}, with q varying fastest; duplicates are kept."""
    if P.dimension != Q.dimension:
        raise ValueError(f"dimension mismatch: {P.dimension} vs {Q.dimension}")
    if P.field and Q.field and P.field != Q.field:
        raise FieldError("modulus mismatch")
    field = P.field or Q.field
    mod = field.modulus if field else None

    def gen():
        for a in P:
            for b in Q:
                s = tuple(x + y for x, y in zip(a, b))
                yield tuple(x % mod for x in s) if mod else s

    return PointSet(P.dimension, "sum-set", gen, P.size * Q.size, field)


def nullstellensatz_grid(bounds: Sequence[int], field: PrimeField) -> Iterator[Point]:
    """S_1 x ... x S_t with S_i = {0, ..., r_i}: a nonzero polynomial of degree <= r_i in
    its i-th variable is nonzero somewhere on this grid."""
    if bounds and max(bounds) >= field.modulus:
        raise FieldError(f"grid needs {max(bounds) + 1} distinct elements, GF({field.modulus}) is too small")
    return product(*(range(r + 1) for r in bounds))


def ceil_log2(n: int) -> int:
    return max(0, (n - 1).bit_length())
