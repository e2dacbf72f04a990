"""Prime field arithmetic and Lagrange interpolation over a set of anchor points."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from sympy import isprime

DEFAULT_MODULUS = 2147483647


class FieldError(ValueError):
    """Raised for invalid moduli, mixed-field arithmetic and division by zero."""


@dataclass(frozen=True)
class PrimeField:
    """The field F_p. Construction fails unless p is a prime >= 5."""

    modulus: int = DEFAULT_MODULUS

    def __post_init__(self):
        p = self.modulus
        if not isinstance(p, int) or isinstance(p, bool):
            raise FieldError(f"modulus must be an int, got {p!r}")
        if p < 5:
            raise FieldError(f"modulus must be at least 5, got {p}")
        if not isprime(p):
            raise FieldError(f"modulus {p} is not prime")

    def __call__(self, value: int) -> "Scalar":
        return Scalar(value % self.modulus, self)

    def __repr__(self):
        return f"GF({self.modulus})"

    @property
    def zero(self) -> "Scalar":
        return Scalar(0, self)

    @property
    def one(self) -> "Scalar":
        return Scalar(1, self)

    def inv(self, a: int) -> int:
        """Inverse of the raw representative ``a``."""
        a %= self.modulus
        if a == 0:
            raise FieldError("zero has no inverse")
        return pow(a, -1, self.modulus)

    def elements(self, count: int) -> list["Scalar"]:
        """The first ``count`` canonical elements 0, 1, ..., count-1."""
        if count > self.modulus:
            raise FieldError(f"GF({self.modulus}) has fewer than {count} elements")
        return [Scalar(i, self) for i in range(count)]


@dataclass(frozen=True)
class Scalar:
    value: int
    field: PrimeField

    def __post_init__(self):
        if not 0 <= self.value < self.field.modulus:
            raise FieldError(f"{self.value} is not a canonical residue mod {self.field.modulus}")

    def _coerce(self, other) -> int:
        if isinstance(other, Scalar):
            if other.field != self.field:
                raise FieldError(f"modulus mismatch: {self.field.modulus} vs {other.field.modulus}")
            return other.value
        if isinstance(other, int) and not isinstance(other, bool):
            return other % self.field.modulus
        return NotImplemented

    def _make(self, v: int) -> "Scalar":
        return Scalar(v % self.field.modulus, self.field)

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._make(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._make(self.value - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._make(o - self.value)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._make(self.value * o)

    __rmul__ = __mul__

    def __neg__(self):
        return self._make(-self.value)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._make(self.value * self.field.inv(o))

    def inverse(self) -> "Scalar":
        return Scalar(self.field.inv(self.value), self.field)

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.field.modulus})"


def add(x: Scalar, y: Scalar) -> Scalar:
    return x + y


def sub(x: Scalar, y: Scalar) -> Scalar:
    return x - y


def mul(x: Scalar, y: Scalar) -> Scalar:
    return x * y


def neg(x: Scalar) -> Scalar:
    return -x


def inverse(x: Scalar) -> Scalar:
    return x.inverse()


@dataclass(frozen=True)
class AnchorSet:
    """Pairwise distinct interpolation nodes a_1, ..., a_n (stored as residues)."""

    points: tuple[int, ...]
    field: PrimeField

    def __post_init__(self):
        p = self.field.modulus
        pts = tuple(int(a) % p for a in self.points)
        if len(set(pts)) != len(pts):
            raise FieldError("anchor points must be pairwise distinct")
        object.__setattr__(self, "points", pts)

    @classmethod
    def default(cls, n: int, field: PrimeField) -> "AnchorSet":
        """The anchors 0, 1, ..., n-1; needs p > n."""
        if field.modulus <= n:
            raise FieldError(f"default anchors need p > n, got p={field.modulus}, n={n}")
        return cls(tuple(range(n)), field)

    def __len__(self):
        return len(self.points)

    def basis_values(self, w: int) -> list[int]:
        """[u_1(w), ..., u_n(w)] as residues, for all basis polynomials at once."""
        p = self.field.modulus
        pts = self.points
        w %= p
        for i, a in enumerate(pts):
            if a == w:
                out = [0] * len(pts)
                out[i] = 1
                return out
        # u_i(w) = prod_{j != i} (w - a_j) / (a_i - a_j), sharing the full product
        full = 1
        for a in pts:
            full = full * (w - a) % p
        out = []
        for i, a in enumerate(pts):
            den = w - a
            for j, b in enumerate(pts):
                if j != i:
                    den = den * (a - b) % p
            out.append(full * pow(den, -1, p) % p)
        return out


def lagrange_basis(anchors: AnchorSet, i: int, w: Scalar | int) -> Scalar:
    """u_i(w) for the 1-based index i."""
    n = len(anchors)
    if not 1 <= i <= n:
        raise IndexError(f"basis index {i} outside 1..{n}")
    f = anchors.field
    if isinstance(w, Scalar):
        if w.field != f:
            raise FieldError("modulus mismatch between anchors and evaluation point")
        w = w.value
    p = f.modulus
    ai = anchors.points[i - 1]
    num, den = 1, 1
    for j, aj in enumerate(anchors.points):
        if j != i - 1:
            num = num * (w - aj) % p
            den = den * (ai - aj) % p
    return f(num * pow(den, -1, p))
