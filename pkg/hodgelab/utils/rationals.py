"""Parsing and formatting of exact rationals ("p/q" strings) and user expressions."""

from __future__ import annotations

import re
from fractions import Fraction
from tokenize import TokenError
from typing import Iterable, Sequence

import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations
from sympy.polys.polyerrors import BasePolynomialError

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_rational(value: str | int | Fraction) -> Fraction:
    """Parse ``"p"`` or ``"p/q"`` into a Fraction.

    Integers and Fractions pass through. Floats are refused: they would
    smuggle binary rounding into exact data.
    """
    if isinstance(value, bool):
        raise ValueError(f"Not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, str):
        raise ValueError(f"Not a rational: {value!r}")
    match = _RATIONAL_RE.match(value)
    if match is None:
        raise ValueError(f"Not a rational: {value!r}")
    num, den = match.group(1), match.group(2)
    if den is not None and int(den) == 0:
        raise ValueError(f"Zero denominator in {value!r}")
    return Fraction(int(num), int(den) if den else 1)


def format_rational(value: Fraction | int) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_rational_list(text: str) -> tuple[Fraction, ...]:
    """Parse a comma-separated list such as ``"1/2,0,-3"``."""
    parts = [p for p in text.split(",")]
    if not text.strip() or any(not p.strip() for p in parts):
        raise ValueError(f"Empty entry in rational list: {text!r}")
    return tuple(parse_rational(p) for p in parts)


def format_vector(values: Iterable[Fraction]) -> str:
    return "(" + ", ".join(format_rational(v) for v in values) + ")"


def format_poly(coeffs: Sequence[Fraction], var: str = "x") -> str:
    """Render low-to-high coefficients as a readable polynomial."""
    terms: list[str] = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = Fraction(coeffs[k])
        if c == 0:
            continue
        mag = abs(c)
        if k == 0:
            body = format_rational(mag)
        else:
            power = var if k == 1 else f"{var}^{k}"
            body = power if mag == 1 else f"{format_rational(mag)}*{power}"
        sign = "-" if c < 0 else "+"
        if not terms:
            terms.append(body if sign == "+" else f"-{body}")
        else:
            terms.append(f" {sign} {body}")
    return "".join(terms) if terms else "0"


# -- expressions ------------------------------------------------------------------

_GEN = sympy.Symbol("g")
_TRANSFORMS = standard_transformations + (convert_xor,)
_CLASS_RE = re.compile(r"^(e|l)(\d+)$")


def _sympify(text: str, symbols: dict[str, sympy.Symbol]) -> sympy.Expr:
    if not text.strip():
        raise ValueError("Empty expression")
    try:
        expr = parse_expr(text, local_dict=dict(symbols), transformations=_TRANSFORMS, evaluate=True)
    except (SyntaxError, TypeError, sympy.SympifyError, TokenError) as e:
        raise ValueError(f"Cannot parse {text!r}: {e}") from None
    unknown = {s.name for s in expr.free_symbols} - set(symbols)
    if unknown:
        raise ValueError(f"Unknown symbol(s) {', '.join(sorted(unknown))} in {text!r}")
    return expr


def parse_field_coeffs(text: str) -> tuple[Fraction, ...]:
    """Coefficients (low to high) of a polynomial in the generator ``g``.

    ``i`` is accepted as a synonym for ``g``; it only means sqrt(-1) in
    fields defined by x^2 + 1.
    """
    expr = _sympify(text, {"g": _GEN, "i": _GEN, "I": _GEN})
    try:
        poly = sympy.Poly(expr, _GEN, domain=sympy.QQ)
    except BasePolynomialError as e:
        raise ValueError(f"{text!r} is not a polynomial in g: {e}") from None
    coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]
    return tuple(coeffs) or (Fraction(0),)


def parse_class_expression(text: str, rank: int, extra: int) -> tuple[Fraction, ...]:
    """Rational vector from ``"e1+3*l1-l2"`` or a plain comma list.

    ``e1..e{rank}`` are the basis of T and ``l1..l{extra}`` the added classes.
    """
    if "," in text:
        values = parse_rational_list(text)
        if len(values) != rank + extra:
            raise ValueError(f"Expected {rank + extra} entries, got {len(values)}")
        return values
    names = [f"e{i}" for i in range(1, rank + 1)] + [f"l{i}" for i in range(1, extra + 1)]
    symbols = {n: sympy.Symbol(n) for n in names}
    if extra == 1:
        symbols["l"] = symbols["l1"]
    expr = sympy.expand(_sympify(text, symbols))
    out = []
    for n in names:
        c = expr.coeff(symbols[n])
        if not c.is_Rational:
            raise ValueError(f"Coefficient of {n} in {text!r} is not rational")
        out.append(Fraction(int(c.p), int(c.q)))
    linear = sum(sympy.Rational(v.numerator, v.denominator) * symbols[n] for v, n in zip(out, names))
    if sympy.expand(expr - linear) != 0:
        raise ValueError(f"{text!r} is not a linear combination of {', '.join(names)}")
    return tuple(out)
