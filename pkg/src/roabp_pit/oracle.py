"""Brute-force multilinear polynomials used as ground truth, and the alignment checkers.

A SparseMultilinear maps frozensets of 1-based variable indices to nonzero
residues. Everything here is exponential in the worst case and meant for
small instances; expansion and the alignment recursion are capped.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import combinations
from typing import Iterable, Mapping

from .field import FieldError, PrimeField, Scalar
from .roabp import ROABP, Const, Var

DEFAULT_TERM_CAP = 2**20
DEFAULT_ALIGN_CAP = 12

Monomial = frozenset


class CapExceeded(RuntimeError):
    """A configured work cap was hit; the result would otherwise be truncated."""

    def __init__(self, message: str, flag: str | None = None):
        super().__init__(message if flag is None else f"{message} (raise {flag})")
        self.flag = flag


class SparseMultilinear:
    __slots__ = ("num_vars", "field", "terms")

    def __init__(self, num_vars: int, field: PrimeField, terms: Mapping[Iterable[int], int] = ()):
        self.num_vars = num_vars
        self.field = field
        p = field.modulus
        clean: dict[frozenset, int] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for mono, c in items:
            mono = frozenset(mono)
            if any(not 1 <= i <= num_vars for i in mono):
                raise ValueError(f"monomial {sorted(mono)} uses a variable outside 1..{num_vars}")
            c = (clean.get(mono, 0) + int(c)) % p
            if c:
                clean[mono] = c
            else:
                clean.pop(mono, None)
        self.terms = clean

    @classmethod
    def constant(cls, num_vars: int, field: PrimeField, c: int) -> "SparseMultilinear":
        return cls(num_vars, field, {frozenset(): c})

    @classmethod
    def monomial(cls, num_vars: int, field: PrimeField, variables: Iterable[int], c: int = 1):
        return cls(num_vars, field, {frozenset(variables): c})

    def _check(self, other: "SparseMultilinear") -> None:
        if other.num_vars != self.num_vars:
            raise ValueError(f"dimension mismatch: {self.num_vars} vs {other.num_vars}")
        if other.field != self.field:
            raise FieldError("modulus mismatch")

    def coefficient(self, variables: Iterable[int]) -> int:
        return self.terms.get(frozenset(variables), 0)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, SparseMultilinear):
            return NotImplemented
        return (self.num_vars, self.field, self.terms) == (other.num_vars, other.field, other.terms)

    def __hash__(self):
        return hash((self.num_vars, self.field.modulus, frozenset(self.terms.items())))

    def __len__(self):
        return len(self.terms)

    def __add__(self, other: "SparseMultilinear") -> "SparseMultilinear":
        self._check(other)
        merged = dict(self.terms)
        p = self.field.modulus
        for mono, c in other.terms.items():
            merged[mono] = (merged.get(mono, 0) + c) % p
        return SparseMultilinear(self.num_vars, self.field, merged)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "SparseMultilinear":
        c = int(c.value if isinstance(c, Scalar) else c)
        return SparseMultilinear(self.num_vars, self.field, {m: v * c for m, v in self.terms.items()})

    def evaluate(self, point) -> Scalar:
        if len(point) != self.num_vars:
            raise ValueError(f"point has {len(point)} coordinates, expected {self.num_vars}")
        p = self.field.modulus
        x = [a.value if isinstance(a, Scalar) else int(a) % p for a in point]
        total = 0
        for mono, c in self.terms.items():
            for i in mono:
                c = c * x[i - 1] % p
            total += c
        return self.field(total)

    __call__ = evaluate

    def restrict(self, i: int, c) -> "SparseMultilinear":
        """f with x_i fixed to c."""
        c = int(c.value if isinstance(c, Scalar) else c)
        out: dict[frozenset, int] = {}
        p = self.field.modulus
        for mono, v in self.terms.items():
            if i in mono:
                if c % p:
                    key = mono - {i}
                    out[key] = (out.get(key, 0) + v * c) % p
            else:
                out[mono] = (out.get(mono, 0) + v) % p
        return SparseMultilinear(self.num_vars, self.field, out)

    def restrict_many(self, assignment: Mapping[int, int]) -> "SparseMultilinear":
        f = self
        for i, c in assignment.items():
            f = f.restrict(i, c)
        return f

    def zero_out(self, indices: Iterable[int]) -> "SparseMultilinear":
        """f with every listed variable set to 0: drop the terms touching them."""
        idx = frozenset(indices)
        return SparseMultilinear(self.num_vars, self.field,
                                 {m: c for m, c in self.terms.items() if not m & idx})

    def derivative(self, i: int) -> "SparseMultilinear":
        """f|_{x_i=1} - f|_{x_i=0}: keep the terms containing x_i, with x_i removed."""
        return SparseMultilinear(self.num_vars, self.field,
                                 {m - {i}: c for m, c in self.terms.items() if i in m})

    def shift(self, v) -> "SparseMultilinear":
        """f(x_1 + v_1, ..., x_n + v_n), expanded."""
        if len(v) != self.num_vars:
            raise ValueError("shift vector has the wrong length")
        p = self.field.modulus
        v = [a.value if isinstance(a, Scalar) else int(a) % p for a in v]
        out: dict[frozenset, int] = {}
        for mono, c in self.terms.items():
            idx = sorted(mono)
            for r in range(len(idx) + 1):
                for kept in combinations(idx, r):
                    coef = c
                    for i in idx:
                        if i not in kept:
                            coef = coef * v[i - 1] % p
                    if coef:
                        key = frozenset(kept)
                        out[key] = (out.get(key, 0) + coef) % p
        return SparseMultilinear(self.num_vars, self.field, out)

    def dump(self) -> list[str]:
        """One "coefficient : indices" line per term, sorted by index tuple."""
        rows = sorted((tuple(sorted(m)), c) for m, c in self.terms.items())
        return [f"{c} : {' '.join(map(str, m))}".rstrip() for m, c in rows]

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items(), key=lambda t: (len(t[0]), sorted(t[0]))):
            mono = "*".join(f"x{i}" for i in sorted(m))
            parts.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(parts)


def from_roabp(A: ROABP, cap: int = DEFAULT_TERM_CAP) -> SparseMultilinear:
    """Symbolic replay of the program's forward pass, level by level."""
    p = A.field.modulus
    empty = frozenset()
    val: dict[int, dict[frozenset, int]] = {A.source: {empty: 1}}
    for layer in A.layer_edges:
        nxt: dict[int, dict[frozenset, int]] = {}
        for e in layer:
            poly = val.get(e.src)
            if not poly:
                continue
            acc = nxt.setdefault(e.dst, {})
            if isinstance(e.label, Const):
                c = e.label.value
                if not c:
                    continue
                for mono, v in poly.items():
                    acc[mono] = (acc.get(mono, 0) + v * c) % p
            else:
                i = e.label.index
                for mono, v in poly.items():
                    key = mono | {i}
                    acc[key] = (acc.get(key, 0) + v) % p
        val = {}
        total = 0
        for node, poly in nxt.items():
            poly = {m: c for m, c in poly.items() if c}
            if poly:
                val[node] = poly
                total += len(poly)
        if total > cap:
            raise CapExceeded(f"expansion exceeded {cap} terms", "--cap-terms")
    return SparseMultilinear(A.num_vars, A.field, val.get(A.sink, {}))


def dependent_vars(f: SparseMultilinear) -> set[int]:
    out: set[int] = set()
    for mono in f.terms:
        out |= mono
    return out


def second_partial(f: SparseMultilinear, a: int, b: int) -> SparseMultilinear:
    return f.derivative(a).derivative(b)


def is_decent(f: SparseMultilinear) -> bool:
    """Every pair with a nonvanishing second partial also occurs as a quadratic monomial."""
    var = sorted(dependent_vars(f))
    for a, b in combinations(var, 2):
        if f.coefficient((a, b)):
            continue
        if any(a in m and b in m for m in f.terms):
            return False
    return True


@dataclass
class AlignmentVerdict:
    """Outcome of a pre-alignment check.

    ``witnesses`` maps each checked variable to its first witnessing pair in
    lexicographic order, as ``(j, k, kind, ratio)`` where kind is "zero" (the
    second partial vanishes), "free" (it does not involve x_i) or "affine"
    (h = A*x_i + c*A with c = ratio != 0). ``failures`` maps each variable
    with no witness to the exhaustive list of pairs tried.
    """

    holds: bool
    witnesses: dict[int, tuple[int, int, str, int | None]] = dc_field(default_factory=dict)
    failures: dict[int, list[tuple[int, int]]] = dc_field(default_factory=dict)

    def __bool__(self):
        return self.holds


def _ratio(A: SparseMultilinear, B: SparseMultilinear) -> int | None:
    """The c with B == c * A, if any (A must be nonzero)."""
    p = A.field.modulus
    if set(A.terms) != set(B.terms):
        return None
    mono, a0 = next(iter(A.terms.items()))
    c = B.terms[mono] * pow(a0, -1, p) % p
    for m, a in A.terms.items():
        if B.terms[m] != a * c % p:
            return None
    return c


def pair_witness(h: SparseMultilinear, i: int) -> tuple[str, int | None] | None:
    """Classify the second partial h against x_i; None when it is not of the form g*(beta*x_i - alpha)."""
    if h.is_zero():
        return ("zero", None)
    A = h.derivative(i)
    if A.is_zero():
        return ("free", None)
    B = h.restrict(i, 0)
    c = _ratio(A, B)
    if c:
        return ("affine", c)
    return None


def is_prealigned_on(f: SparseMultilinear, S: Iterable[int] | None = None,
                     X: Iterable[int] | None = None) -> AlignmentVerdict:
    """Check the pre-alignment condition of f over the variable set X on the indices S.

    X defaults to all of 1..n and S to the variables f depends on. The check
    that the cofactor g is itself RO-ABP computable is skipped: for inputs that
    come from programs it always is.
    """
    X = sorted(range(1, f.num_vars + 1) if X is None else set(X))
    var = dependent_vars(f)
    S = sorted(var if S is None else set(S))
    if len(var) <= 2:
        return AlignmentVerdict(True)
    cache: dict[tuple[int, int], SparseMultilinear] = {}
    verdict = AlignmentVerdict(True)
    for i in S:
        tried = []
        others = [x for x in X if x != i]
        for j, k in combinations(others, 2):
            if (j, k) not in cache:
                cache[(j, k)] = second_partial(f, j, k)
            w = pair_witness(cache[(j, k)], i)
            if w is not None:
                verdict.witnesses[i] = (j, k, *w)
                break
            tried.append((j, k))
        else:
            verdict.holds = False
            verdict.failures[i] = tried
    return verdict


def is_prealigned(f: SparseMultilinear, X: Iterable[int] | None = None) -> bool:
    return is_prealigned_on(f, None, X).holds


def is_aligned(f: SparseMultilinear, X: Iterable[int] | None = None,
               cap: int = DEFAULT_ALIGN_CAP) -> bool:
    """Recursive alignment check: pre-aligned, and every zero-restriction aligned over X minus that variable."""
    X0 = frozenset(range(1, f.num_vars + 1) if X is None else X)
    if len(dependent_vars(f)) > cap:
        raise CapExceeded(f"alignment check limited to {cap} variables", "--cap-align-vars")
    memo: dict[frozenset, bool] = {}

    def rec(zeroed: frozenset) -> bool:
        if zeroed in memo:
            return memo[zeroed]
        g = f.zero_out(zeroed)
        var = dependent_vars(g)
        if len(var) <= 2:
            ok = True
        else:
            ok = is_prealigned_on(g, var, X0 - zeroed).holds and all(
                rec(zeroed | {i}) for i in sorted(var))
        memo[zeroed] = ok
        return ok

    return rec(frozenset())
