"""Certified complex root enclosures for rational polynomials.

Approximations come from mpmath; every claim made from them is re-checked
in exact Gaussian-rational arithmetic. A disc centred at z with radius
n*|p(z)/p'(z)| always contains a root of a degree-n polynomial p, which is
the only analytic fact used here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, isqrt
from typing import Sequence

import mpmath

from hodgelab.core import polynomials as P
from hodgelab.core.errors import AmbiguousEmbedding
from hodgelab.utils.logger import get_logger

logger = get_logger(__name__)

INITIAL_BITS = 64


@dataclass(frozen=True)
class GaussQ:
    """Exact complex number re + im*i with rational parts."""

    re: Fraction
    im: Fraction = Fraction(0)

    def __add__(self, other: GaussQ | Fraction | int) -> GaussQ:
        o = _gauss(other)
        return GaussQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other: GaussQ | Fraction | int) -> GaussQ:
        o = _gauss(other)
        return GaussQ(self.re - o.re, self.im - o.im)

    def __mul__(self, other: GaussQ | Fraction | int) -> GaussQ:
        o = _gauss(other)
        return GaussQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other: GaussQ | Fraction | int) -> GaussQ:
        o = _gauss(other)
        n = o.abs2()
        return GaussQ((self.re * o.re + self.im * o.im) / n, (self.im * o.re - self.re * o.im) / n)

    def conjugate(self) -> GaussQ:
        return GaussQ(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def abs_upper(self) -> Fraction:
        """A cheap upper bound for |z|."""
        return abs(self.re) + abs(self.im)

    def rounded(self, bits: int) -> GaussQ:
        scale = 1 << bits
        return GaussQ(Fraction(round(self.re * scale), scale), Fraction(round(self.im * scale), scale))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))


def _gauss(x: GaussQ | Fraction | int) -> GaussQ:
    return x if isinstance(x, GaussQ) else GaussQ(Fraction(x))


def sqrt_upper(x: Fraction) -> Fraction:
    """Rational upper bound for sqrt(x), x >= 0."""
    if x <= 0:
        return Fraction(0)
    num, den = x.numerator, x.denominator
    return Fraction(isqrt(num * den) + 1, den)


def sqrt_lower(x: Fraction) -> Fraction:
    if x <= 0:
        return Fraction(0)
    num, den = x.numerator, x.denominator
    return Fraction(isqrt(num * den), den)


@dataclass(frozen=True)
class Interval:
    """Closed rational interval [lo, hi]."""

    lo: Fraction
    hi: Fraction

    @classmethod
    def point(cls, x: Fraction | int) -> Interval:
        return cls(Fraction(x), Fraction(x))

    @classmethod
    def around(cls, center: Fraction, radius: Fraction) -> Interval:
        return cls(center - radius, center + radius)

    def __add__(self, other: Interval) -> Interval:
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: Interval) -> Interval:
        return Interval(self.lo - other.hi, self.hi - other.lo)

    def __mul__(self, other: Interval) -> Interval:
        products = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(products), max(products))

    def __truediv__(self, other: Interval) -> Interval:
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("interval divisor contains zero")
        return self * Interval(1 / other.hi, 1 / other.lo)

    def sqrt(self, bits: int = INITIAL_BITS) -> Interval:
        if self.lo < 0:
            raise ValueError("sqrt of an interval reaching below zero")
        scale = 1 << bits
        square = scale * scale
        lo = Fraction(isqrt(floor(self.lo * square)), scale)
        hi = Fraction(isqrt(ceil(self.hi * square)) + 1, scale)
        return Interval(lo, hi)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, x: Fraction) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class RootBox:
    """Axis-parallel rational box in the complex plane."""

    real: tuple[Fraction, Fraction]
    imag: tuple[Fraction, Fraction]

    def __post_init__(self) -> None:
        if self.real[0] > self.real[1] or self.imag[0] > self.imag[1]:
            raise ValueError(f"Empty box: {self.real} x {self.imag}")

    def contains_disc(self, center: GaussQ, radius: Fraction) -> bool:
        return (
            self.real[0] <= center.re - radius
            and center.re + radius <= self.real[1]
            and self.imag[0] <= center.im - radius
            and center.im + radius <= self.imag[1]
        )

    def misses_disc(self, center: GaussQ, radius: Fraction) -> bool:
        return (
            center.re + radius < self.real[0]
            or center.re - radius > self.real[1]
            or center.im + radius < self.imag[0]
            or center.im - radius > self.imag[1]
        )

    @classmethod
    def around(cls, center: GaussQ, radius: Fraction) -> RootBox:
        return cls((center.re - radius, center.re + radius), (center.im - radius, center.im + radius))


@dataclass(frozen=True)
class RootDisc:
    """Disc certified to contain a root: |root - center| <= radius."""

    center: GaussQ
    radius: Fraction


def certify_disc(coeffs: Sequence[Fraction], z: GaussQ) -> RootDisc | None:
    """Newton inclusion disc around z, or None when p'(z) = 0."""
    n = P.degree(coeffs)
    value = P.evaluate(coeffs, z)
    slope = P.evaluate(P.derivative(coeffs), z)
    if isinstance(value, Fraction):
        value = GaussQ(value)
    if isinstance(slope, Fraction):
        slope = GaussQ(slope)
    if slope.abs2() == 0:
        return None
    radius2 = n * n * value.abs2() / slope.abs2()
    return RootDisc(z, sqrt_upper(radius2) if radius2 else Fraction(0))


def newton_refine(coeffs: Sequence[Fraction], z: GaussQ, bits: int, steps: int = 40) -> GaussQ:
    """Newton iteration in exact arithmetic, rounded to a 2^-bits grid each step."""
    deriv = P.derivative(coeffs)
    target = Fraction(1, 1 << bits)
    for _ in range(steps):
        value = _gauss(P.evaluate(coeffs, z))
        slope = _gauss(P.evaluate(deriv, z))
        if slope.abs2() == 0:
            break
        step = value / slope
        z = (z - step).rounded(bits)
        if step.abs_upper() < target:
            break
    return z


def approximate_roots(coeffs: Sequence[Fraction], digits: int = 40) -> list[GaussQ]:
    """All complex roots to roughly ``digits`` decimal places (uncertified)."""
    p = P.trim(coeffs)
    if len(p) == 2:
        return [GaussQ(-p[0] / p[1])]
    with mpmath.workdps(digits + 10):
        mp_coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(p)]
        steps = 100
        while True:
            try:
                roots = mpmath.polyroots(mp_coeffs, maxsteps=steps, extraprec=4 * digits)
                break
            except mpmath.libmp.NoConvergence:
                if steps > 3200:
                    raise
                steps *= 2
        out = []
        for r in roots:
            z = mpmath.mpc(r)
            out.append(GaussQ(Fraction(str(z.real)), Fraction(str(z.imag))))
    return out


def isolate_all(coeffs: Sequence[Fraction], bits: int = INITIAL_BITS) -> list[RootDisc]:
    """Certified, pairwise disjoint discs, one per root of a squarefree polynomial."""
    p = P.trim(coeffs)
    for attempt in range(6):
        work_bits = bits << attempt
        discs = []
        for z in approximate_roots(p, digits=max(30, work_bits // 3)):
            z = newton_refine(p, z.rounded(work_bits), work_bits)
            disc = certify_disc(p, z)
            if disc is None:
                break
            discs.append(disc)
        else:
            if _pairwise_disjoint(discs):
                return discs
        logger.debug("root isolation retry %d at %d bits", attempt + 1, work_bits * 2)
    raise AmbiguousEmbedding("Could not separate the roots of the polynomial")


def _pairwise_disjoint(discs: Sequence[RootDisc]) -> bool:
    for i, a in enumerate(discs):
        for b in discs[i + 1:]:
            gap = (a.center - b.center).abs2()
            reach = a.radius + b.radius
            if gap <= reach * reach:
                return False
    return True


def locate_in_box(coeffs: Sequence[Fraction], box: RootBox) -> tuple[int, list[RootDisc]]:
    """Index of the unique certified root inside ``box``.

    The box must contain one disc entirely and miss every other disc;
    anything else is ambiguous.
    """
    discs = isolate_all(coeffs)
    inside = [i for i, d in enumerate(discs) if box.contains_disc(d.center, d.radius)]
    touching = [i for i, d in enumerate(discs) if not box.misses_disc(d.center, d.radius)]
    if len(inside) != 1 or len(touching) != 1:
        raise AmbiguousEmbedding(
            f"Box {box.real} x {box.imag} isolates {len(inside)} root(s) "
            f"and meets {len(touching)} certified disc(s); exactly one is required"
        )
    return inside[0], discs


def enclose_value(coeffs: Sequence[Fraction], disc: RootDisc) -> tuple[GaussQ, Fraction]:
    """Center value q(z) and a radius bounding |q(w) - q(z)| on the disc.

    Centered form: |q(w) - q(z)| <= sum |c_j| ((|z| + r)^j - |z|^j).
    """
    z, r = disc.center, disc.radius
    value = _gauss(P.evaluate(coeffs, z))
    big = z.abs_upper()
    error = Fraction(0)
    for j, c in enumerate(coeffs):
        if j == 0 or c == 0:
            continue
        error += abs(c) * ((big + r) ** j - big ** j)
    return value, error
