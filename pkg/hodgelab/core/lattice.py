"""Rational quadratic lattices, possibly degenerate.

Vectors are column vectors in the lattice's standard basis and the pairing
is v^T G w. The integral structure, where one is needed, is Z^r in the
standard basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import Any, Sequence

from hodgelab.core import linalg
from hodgelab.core.errors import (
    DependentBasis,
    NonIntegralAmbient,
    NonIntegralClass,
    NonIsotropicClass,
    NonSymmetricGram,
)
from hodgelab.core.linalg import Matrix, Vector
from hodgelab.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class QuadLattice:
    gram: Matrix

    def __post_init__(self) -> None:
        gram = linalg.as_matrix(self.gram)
        n = len(gram)
        if n == 0:
            raise NonSymmetricGram("Gram matrix is empty")
        for i, row in enumerate(gram):
            if len(row) != n:
                raise NonSymmetricGram(f"Gram row {i} has {len(row)} entries, expected {n}")
        for i in range(n):
            for j in range(i + 1, n):
                if gram[i][j] != gram[j][i]:
                    raise NonSymmetricGram(
                        f"Gram entry [{i}][{j}] = {gram[i][j]} differs from [{j}][{i}] = {gram[j][i]}"
                    )
        object.__setattr__(self, "gram", gram)

    @classmethod
    def diagonal(cls, *entries: Any) -> QuadLattice:
        n = len(entries)
        return cls(tuple(tuple(Fraction(entries[i]) if i == j else Fraction(0) for j in range(n)) for i in range(n)))

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def integral(self) -> bool:
        return all(x.denominator == 1 for row in self.gram for x in row)

    def pair(self, v: Sequence[Any], w: Sequence[Any]) -> Any:
        """v^T G w for vectors over Q or over a number field."""
        gw = linalg.matvec(self.gram, w)
        total = None
        for a, b in zip(v, gw):
            if isinstance(a, Fraction) and a == 0:
                continue
            term = a * b
            total = term if total is None else total + term
        if total is None:
            return gw[0] * 0
        return total

    def restrict(self, basis: Sequence[Sequence[Fraction]]) -> Matrix:
        """Gram matrix of the form restricted to span(basis)."""
        return tuple(tuple(self.pair(u, w) for w in basis) for u in basis)


@dataclass(frozen=True)
class SignatureTriple:
    positive: int
    negative: int
    null: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.positive, self.negative, self.null)

    def __str__(self) -> str:
        return f"({self.positive}, {self.negative}, {self.null})"


def signature(lattice: QuadLattice | Sequence[Sequence[Fraction]]) -> SignatureTriple:
    """Sylvester signature by symmetric elimination.

    A nonzero diagonal pivot removes one direction. With an all-zero
    diagonal, a nonzero off-diagonal entry spans a hyperbolic plane,
    which contributes one positive and one negative direction. When the
    remaining block is zero, it is all radical.
    """
    gram = lattice.gram if isinstance(lattice, QuadLattice) else linalg.as_matrix(lattice)
    a = [list(row) for row in gram]
    pos = neg = null = 0
    while a:
        n = len(a)
        pivot = next((i for i in range(n) if a[i][i] != 0), None)
        if pivot is not None:
            p = a[pivot][pivot]
            if p > 0:
                pos += 1
            else:
                neg += 1
            rest = [i for i in range(n) if i != pivot]
            a = [[a[i][j] - a[i][pivot] * a[pivot][j] / p for j in rest] for i in rest]
            continue
        pair = next(((i, j) for i in range(n) for j in range(i + 1, n) if a[i][j] != 0), None)
        if pair is None:
            null += n
            break
        i0, j0 = pair
        b = a[i0][j0]
        pos += 1
        neg += 1
        rest = [k for k in range(n) if k not in (i0, j0)]
        # Schur complement of [[0, b], [b, 0]]
        a = [
            [a[i][j] - (a[i][i0] * a[j0][j] + a[i][j0] * a[i0][j]) / b for j in rest]
            for i in rest
        ]
    return SignatureTriple(pos, neg, null)


@dataclass(frozen=True)
class Sublattice:
    """Rational subspace of a QuadLattice given by an explicit basis."""

    ambient: QuadLattice
    basis: tuple[Vector, ...]

    def __post_init__(self) -> None:
        basis = tuple(linalg.as_vector(v) for v in self.basis)
        for v in basis:
            if len(v) != self.ambient.rank:
                raise ValueError(f"Basis vector {v} does not live in rank {self.ambient.rank}")
        if linalg.rank(basis) != len(basis):
            raise DependentBasis("Sublattice basis vectors are linearly dependent")
        object.__setattr__(self, "basis", basis)

    @classmethod
    def span(cls, ambient: QuadLattice, vectors: Sequence[Sequence[Any]]) -> Sublattice:
        """Sublattice with the canonical (reduced echelon) basis of span(vectors)."""
        return cls(ambient, linalg.row_basis(vectors, ambient.rank) if vectors else ())

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def gram(self) -> Matrix:
        return self.ambient.restrict(self.basis)

    def contains(self, v: Sequence[Any]) -> bool:
        return linalg.coordinates_in(self.basis, linalg.as_vector(v)) is not None

    def same_space(self, other: Sublattice) -> bool:
        return linalg.same_span(self.basis, other.basis) if self.basis or other.basis else True

    def signature(self) -> SignatureTriple:
        if not self.basis:
            return SignatureTriple(0, 0, 0)
        return signature(self.gram)


def orthogonal_complement(sub: Sublattice) -> Sublattice:
    n = sub.ambient.rank
    rows = [linalg.matvec(linalg.transpose(sub.ambient.gram), v) for v in sub.basis]
    kernel = linalg.nullspace(rows, n) if rows else linalg.identity(n)
    return Sublattice.span(sub.ambient, kernel)


def radical(lattice: QuadLattice) -> Sublattice:
    return Sublattice.span(lattice, linalg.nullspace(lattice.gram, lattice.rank))


def _integral_columns(sub: Sublattice) -> list[list[int]]:
    """Coordinates-by-rows matrix of the primitive integral rescaled basis."""
    scaled = [linalg.primitive_integral(v) for v in sub.basis]
    return [[int(v[i]) for v in scaled] for i in range(sub.ambient.rank)]


def saturate(sub: Sublattice) -> Sublattice:
    """All integral vectors in the rational span of ``sub``, as an HNF basis."""
    if not sub.ambient.integral:
        raise NonIntegralAmbient("Saturation needs an integral ambient lattice")
    if not sub.basis:
        return sub
    k = sub.dim
    _, u = linalg.hermite_transform(_integral_columns(sub))
    u_inv = linalg.inverse(u)
    generators = [[int(u_inv[i][j]) for i in range(sub.ambient.rank)] for j in range(k)]
    return Sublattice(sub.ambient, linalg.hermite_rows(generators))


def saturation_index(sub: Sublattice) -> int:
    """Index of the Z-span of an integral basis in its saturation."""
    if any(x.denominator != 1 for v in sub.basis for x in v):
        raise NonIntegralClass("Index is only defined for integral bases")
    closure = saturate(sub)
    coords = [linalg.coordinates_in(closure.basis, v) for v in sub.basis]
    return abs(int(linalg.det(coords)))


def extend_by_class(lattice: QuadLattice, d: Fraction | int) -> QuadLattice:
    """Orthogonal sum with one new class l, (l.l) = d."""
    return extend_by_classes(lattice, (d,))


def extend_by_classes(lattice: QuadLattice, squares: Sequence[Fraction | int]) -> QuadLattice:
    r = lattice.rank
    n = r + len(squares)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if i < r and j < r:
                row.append(lattice.gram[i][j])
            elif i == j:
                row.append(Fraction(squares[i - r]))
            else:
                row.append(Fraction(0))
        rows.append(tuple(row))
    return QuadLattice(tuple(rows))


@dataclass(frozen=True)
class QuotientElement:
    """Class of a rational vector in Q^r / Z^r."""

    representative: Vector

    def __post_init__(self) -> None:
        object.__setattr__(self, "representative", linalg.as_vector(self.representative))

    @property
    def reduced(self) -> Vector:
        return tuple(x - floor(x) for x in self.representative)

    @property
    def order(self) -> int:
        return quotient_order(self.representative)

    def __add__(self, other: QuotientElement) -> QuotientElement:
        return QuotientElement(linalg.vec_add(self.representative, other.representative))

    def __neg__(self) -> QuotientElement:
        return QuotientElement(tuple(-x for x in self.representative))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuotientElement):
            return NotImplemented
        return self.reduced == other.reduced

    def __hash__(self) -> int:
        return hash(self.reduced)


def quotient_order(v: Sequence[Fraction]) -> int:
    """Least n >= 1 with n*v integral."""
    return linalg.lcm_denominator(v)


def bfield_shift(b: Sequence[Fraction], extended: QuadLattice) -> Matrix:
    """Matrix of alpha + n*l -> alpha + ((alpha.B) + n) l on T + Z l."""
    r = extended.rank - 1
    gram = extended.gram
    if gram[r][r] != 0:
        raise NonIsotropicClass(f"Extension class has square {gram[r][r]}, expected 0")
    if any(gram[r][j] != 0 for j in range(r)):
        raise NonIsotropicClass("Extension class is not orthogonal to T")
    b = linalg.as_vector(b)
    if len(b) != r:
        raise ValueError(f"B has {len(b)} entries, expected {r}")
    if any(x.denominator != 1 for x in b):
        raise NonIntegralClass(f"B = {b} is not integral")
    gb = linalg.matvec(tuple(row[:r] for row in gram[:r]), b)
    rows = [tuple(Fraction(int(i == j)) for j in range(r + 1)) for i in range(r)]
    rows.append(tuple(gb) + (Fraction(1),))
    return tuple(rows)


def is_isometry(m: Sequence[Sequence[Fraction]], lattice: QuadLattice) -> bool:
    m = linalg.as_matrix(m)
    if len(m) != lattice.rank or any(len(row) != lattice.rank for row in m):
        return False
    return linalg.matmul(linalg.matmul(linalg.transpose(m), lattice.gram), m) == lattice.gram
