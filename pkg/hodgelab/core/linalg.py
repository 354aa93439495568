"""Exact linear algebra over Q.

Matrices are row-major tuples of Fraction rows; vectors are tuples. All
routines are pure: inputs are never mutated.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Any, Iterable, Sequence

Vector = tuple[Fraction, ...]
Matrix = tuple[Vector, ...]


def as_vector(values: Iterable[Any]) -> Vector:
    return tuple(Fraction(v) for v in values)


def as_matrix(rows: Iterable[Iterable[Any]]) -> Matrix:
    return tuple(as_vector(row) for row in rows)


def identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def zero_vector(n: int) -> Vector:
    return tuple(Fraction(0) for _ in range(n))


def is_zero(v: Sequence[Any]) -> bool:
    return all(x == 0 for x in v)


def transpose(m: Sequence[Sequence[Any]]) -> Matrix:
    if not m:
        return ()
    return tuple(tuple(row[j] for row in m) for j in range(len(m[0])))


def matmul(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt) for row in a)


def linear_combination(coeffs: Sequence[Fraction], items: Sequence[Any]) -> Any:
    """sum(c * x) that also works for field elements; zero coefficients are skipped."""
    total = None
    for c, x in zip(coeffs, items):
        if c == 0:
            continue
        term = x * c
        total = term if total is None else total + term
    if total is None:
        return items[0] * 0
    return total


def matvec(m: Sequence[Sequence[Fraction]], v: Sequence[Any]) -> tuple:
    """Rational matrix times a vector of rationals or field elements."""
    return tuple(linear_combination(row, v) for row in m)


def vec_add(u: Sequence[Any], v: Sequence[Any]) -> tuple:
    return tuple(x + y for x, y in zip(u, v))


def vec_scale(c: Any, v: Sequence[Any]) -> tuple:
    return tuple(x * c for x in v)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(u, v)), Fraction(0))


def rref(rows: Sequence[Sequence[Any]], ncols: int | None = None) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns (Gauss-Jordan)."""
    a = [[Fraction(x) for x in row] for row in rows]
    if ncols is None:
        ncols = len(a[0]) if a else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def rank(rows: Sequence[Sequence[Any]]) -> int:
    if not rows:
        return 0
    return len(rref(rows)[1])


def row_basis(vectors: Sequence[Sequence[Any]], ncols: int | None = None) -> tuple[Vector, ...]:
    """Canonical basis of the row span: the nonzero rows of the RREF."""
    if not vectors:
        return ()
    reduced, _ = rref(vectors, ncols)
    return tuple(tuple(row) for row in reduced)


def same_span(a: Sequence[Sequence[Any]], b: Sequence[Sequence[Any]]) -> bool:
    return row_basis(a) == row_basis(b)


def nullspace(rows: Sequence[Sequence[Any]], ncols: int) -> tuple[Vector, ...]:
    """Basis of {x : A x = 0}, one vector per free column, in column order."""
    if not rows:
        return identity(ncols)
    reduced, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(reduced, pivots):
            x[p] = -row[f]
        basis.append(tuple(x))
    return tuple(basis)


def solve(rows: Sequence[Sequence[Any]], rhs: Sequence[Any]) -> Vector | None:
    """One solution of A x = b (free variables set to 0), or None if inconsistent."""
    ncols = len(rows[0]) if rows else 0
    augmented = [list(row) + [b] for row, b in zip(rows, rhs)]
    reduced, pivots = rref(augmented, ncols + 1)
    if pivots and pivots[-1] == ncols:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(reduced, pivots):
        x[p] = row[ncols]
    return tuple(x)


def coordinates_in(basis: Sequence[Sequence[Any]], v: Sequence[Any]) -> Vector | None:
    """Coefficients c with sum c_i basis_i = v, or None when v is outside the span."""
    if not basis:
        return () if is_zero(v) else None
    return solve(transpose(basis), v)


def det(m: Sequence[Sequence[Any]]) -> Fraction:
    a = [[Fraction(x) for x in row] for row in m]
    n = len(a)
    result = Fraction(1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if a[i][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            a[c], a[pivot] = a[pivot], a[c]
            result = -result
        result *= a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] / a[c][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return result


def inverse(m: Sequence[Sequence[Any]]) -> Matrix:
    n = len(m)
    augmented = [list(row) + list(e) for row, e in zip(m, identity(n))]
    reduced, pivots = rref(augmented, 2 * n)
    if pivots[:n] != list(range(n)) or len(reduced) < n:
        raise ValueError("Matrix is singular")
    return tuple(tuple(row[n:]) for row in reduced[:n])


def lcm_denominator(v: Iterable[Fraction]) -> int:
    out = 1
    for x in v:
        out = lcm(out, Fraction(x).denominator)
    return out


def primitive_integral(v: Sequence[Fraction]) -> Vector:
    """Positive rescaling of v to a primitive integer vector."""
    if is_zero(v):
        return tuple(Fraction(0) for _ in v)
    scale = lcm_denominator(v)
    ints = [int(Fraction(x) * scale) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    return tuple(Fraction(x // g) for x in ints)


def hermite_transform(rows: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Echelon form H = U A of an integer matrix by unimodular row operations.

    Each column is cleared below the pivot with repeated Euclidean steps;
    the row with the smallest absolute entry becomes the pivot (ties to the
    lower index). Pivots end up positive and entries above a pivot are
    reduced into [0, pivot).
    """
    h = [[int(x) for x in row] for row in rows]
    n = len(h)
    ncols = len(h[0]) if n else 0
    u = [[int(i == j) for j in range(n)] for i in range(n)]

    def sub(i: int, k: int, q: int) -> None:
        h[i] = [x - q * y for x, y in zip(h[i], h[k])]
        u[i] = [x - q * y for x, y in zip(u[i], u[k])]

    r = 0
    for c in range(ncols):
        if r >= n:
            break
        while True:
            nonzero = [i for i in range(r, n) if h[i][c] != 0]
            if not nonzero:
                break
            p = min(nonzero, key=lambda i: (abs(h[i][c]), i))
            h[r], h[p] = h[p], h[r]
            u[r], u[p] = u[p], u[r]
            cleared = True
            for i in range(r + 1, n):
                if h[i][c] != 0:
                    sub(i, r, h[i][c] // h[r][c])
                    cleared = cleared and h[i][c] == 0
            if cleared:
                break
        if h[r][c] == 0:
            continue
        if h[r][c] < 0:
            h[r] = [-x for x in h[r]]
            u[r] = [-x for x in u[r]]
        for i in range(r):
            sub(i, r, h[i][c] // h[r][c])
        r += 1
    return h, u


def hermite_rows(rows: Sequence[Sequence[int]]) -> tuple[Vector, ...]:
    """Nonzero rows of the Hermite normal form of an integer row basis."""
    h, _ = hermite_transform(rows)
    return tuple(tuple(Fraction(x) for x in row) for row in h if any(row))


def minimal_polynomial(m: Sequence[Sequence[Fraction]]) -> Vector:
    """Monic minimal polynomial of a square rational matrix, low-to-high.

    Krylov search on the powers I, M, M^2, ... flattened to vectors: the
    first power in the span of its predecessors gives the relation.
    """
    n = len(m)
    powers: list[Vector] = []
    current: Matrix = identity(n)
    for k in range(n + 1):
        flat = tuple(x for row in current for x in row)
        if powers:
            coeffs = coordinates_in(powers, flat)
            if coeffs is not None:
                return tuple(-c for c in coeffs) + (Fraction(1),)
        powers.append(flat)
        current = matmul(current, m)
    raise AssertionError("Cayley-Hamilton bound exceeded")


def combine_vectors(coeffs: Sequence[Fraction], vectors: Sequence[Sequence[Fraction]]) -> Vector:
    """sum c_i v_i for rational vectors of equal length."""
    n = len(vectors[0])
    out = [Fraction(0)] * n
    for c, v in zip(coeffs, vectors):
        if c == 0:
            continue
        for i, x in enumerate(v):
            if x:
                out[i] += c * x
    return tuple(out)
