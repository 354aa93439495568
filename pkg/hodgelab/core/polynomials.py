"""Univariate polynomials over Q as low-to-high coefficient tuples.

Plain arithmetic is done here on Fractions; factorization, Sturm chains
and modular inversion are delegated to sympy.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Sequence

import sympy
from sympy import Poly, QQ, Rational

Coeffs = tuple[Fraction, ...]

_X = sympy.Symbol("x")


def trim(p: Sequence[Any]) -> Coeffs:
    out = [Fraction(c) for c in p]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def degree(p: Sequence[Fraction]) -> int:
    """Degree, with -1 for the zero polynomial."""
    return len(trim(p)) - 1


def add(p: Sequence[Fraction], q: Sequence[Fraction]) -> Coeffs:
    n = max(len(p), len(q))
    return trim(
        (p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)
    )


def mul(p: Sequence[Fraction], q: Sequence[Fraction]) -> Coeffs:
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return trim(out)


def divmod_poly(p: Sequence[Fraction], q: Sequence[Fraction]) -> tuple[Coeffs, Coeffs]:
    q = trim(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(trim(p))
    dq = len(q) - 1
    if len(r) - 1 < dq:
        return (), tuple(r)
    quot = [Fraction(0)] * (len(r) - dq)
    lead = q[-1]
    for k in range(len(r) - 1 - dq, -1, -1):
        c = r[k + dq] / lead
        quot[k] = c
        if c:
            for j, b in enumerate(q):
                r[k + j] -= c * b
    return trim(quot), trim(r[:dq])


def derivative(p: Sequence[Fraction]) -> Coeffs:
    return trim(k * Fraction(p[k]) for k in range(1, len(p)))


def evaluate(p: Sequence[Fraction], x: Any) -> Any:
    """Horner evaluation at anything supporting ``*`` and ``+`` with Fractions."""
    acc: Any = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def compose_mod(p: Sequence[Fraction], q: Sequence[Fraction], modulus: Sequence[Fraction]) -> Coeffs:
    """p(q(x)) mod modulus."""
    acc: Coeffs = ()
    for c in reversed(p):
        acc = divmod_poly(add(mul(acc, q), (c,)), modulus)[1]
    return acc


def is_monic(p: Sequence[Fraction]) -> bool:
    p = trim(p)
    return bool(p) and p[-1] == 1


def monic(p: Sequence[Fraction]) -> Coeffs:
    p = trim(p)
    return tuple(c / p[-1] for c in p)


# -- sympy bridge -----------------------------------------------------------


def to_fraction(value: Any) -> Fraction:
    r = Rational(value)
    return Fraction(int(r.p), int(r.q))


def to_sympy(p: Sequence[Fraction]) -> Poly:
    coeffs = [Rational(Fraction(c).numerator, Fraction(c).denominator) for c in reversed(trim(p))]
    return Poly(coeffs or [0], _X, domain=QQ)


def from_sympy(poly: Poly) -> Coeffs:
    return trim(to_fraction(c) for c in reversed(poly.all_coeffs()))


def is_irreducible(p: Sequence[Fraction]) -> bool:
    p = trim(p)
    if len(p) <= 2:
        return len(p) == 2
    return bool(to_sympy(p).is_irreducible)


def factor(p: Sequence[Fraction]) -> list[tuple[Coeffs, int]]:
    """Monic irreducible factors over Q with multiplicities."""
    _, factors = to_sympy(p).factor_list()
    return [(monic(from_sympy(f)), int(k)) for f, k in factors]


def invert_mod(p: Sequence[Fraction], modulus: Sequence[Fraction]) -> Coeffs:
    """Inverse of p modulo an irreducible modulus, via the extended gcd."""
    inv = to_sympy(p).invert(to_sympy(modulus))
    return divmod_poly(from_sympy(inv), modulus)[1]


def _sign_changes(values: Sequence[Fraction]) -> int:
    signs = [v > 0 for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_real_roots(p: Sequence[Fraction], lo: Fraction | None = None, hi: Fraction | None = None) -> int:
    """Distinct real roots in (lo, hi], with None meaning an infinite end (Sturm)."""
    chain = [from_sympy(s) for s in sympy.sturm(to_sympy(p))]

    def changes_at(x: Fraction | None, sign: int) -> int:
        if x is None:
            vals = [c[-1] * (sign ** (len(c) - 1)) for c in chain if c]
        else:
            vals = [evaluate(c, x) for c in chain]
        return _sign_changes(vals)

    return changes_at(lo, -1) - changes_at(hi, 1)


def is_totally_real(p: Sequence[Fraction]) -> bool:
    """All complex roots real, for a squarefree p."""
    return count_real_roots(p) == degree(p)
