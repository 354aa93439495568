"""Number fields with a conjugation involution and a certified complex embedding.

Elements are coefficient vectors in the power basis of the generator ``g``.
Q itself is the degree-1 field (minpoly ``x``), so rational and algebraic
scalars share one code path. No floating point value is ever stored: the
embedding is a rational box, and complex values are derived on demand as
certified enclosures.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from hodgelab.core import linalg
from hodgelab.core import polynomials as P
from hodgelab.core.errors import (
    AlreadySquare,
    AmbiguousEmbedding,
    DivisionByZero,
    FieldMismatch,
    IncompatibleConjugation,
    InvalidInvolution,
    MissingEmbedding,
    NotRealElement,
    ReducibleMinpoly,
    SignUndecided,
    UnsupportedDegree,
    ZeroDiscriminant,
)
from hodgelab.core.rootbox import (
    INITIAL_BITS,
    GaussQ,
    RootBox,
    RootDisc,
    certify_disc,
    enclose_value,
    isolate_all,
    locate_in_box,
    newton_refine,
    sqrt_lower,
)
from hodgelab.utils.logger import get_logger
from hodgelab.utils.rationals import format_poly

logger = get_logger(__name__)

MAX_DEGREE = 8
SIGN_MAX_STEPS = 256
_BITS_PER_STEP = 16

Scalar = int | Fraction


@dataclass(frozen=True)
class NumberField:
    """Q(g) with g a root of ``minpoly``.

    Build validated instances with :func:`nf_create` (embedded fields) or
    :meth:`NumberField.abstract` (endomorphism fields, no embedding).
    """

    minpoly: tuple[Fraction, ...]
    conj_image: tuple[Fraction, ...] | None
    embedding: RootBox | None
    name: str = field(default="K", compare=False)
    depth: int = field(default=0, compare=False)
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def degree(self) -> int:
        return len(self.minpoly) - 1

    @classmethod
    def abstract(cls, minpoly: Sequence[Scalar], name: str = "F") -> NumberField:
        poly = _checked_minpoly(minpoly)
        return cls(poly, None, None, name=name)

    # -- element constructors ---------------------------------------------

    def element(self, coeffs: Sequence[Scalar]) -> FieldElement:
        coeffs = [Fraction(c) for c in coeffs]
        if len(coeffs) > self.degree:
            coeffs = list(P.divmod_poly(coeffs, self.minpoly)[1])
        coeffs += [Fraction(0)] * (self.degree - len(coeffs))
        return FieldElement(self, tuple(coeffs))

    def rational(self, q: Scalar) -> FieldElement:
        return self.element([Fraction(q)])

    @property
    def zero(self) -> FieldElement:
        return self.rational(0)

    @property
    def one(self) -> FieldElement:
        return self.rational(1)

    @property
    def gen(self) -> FieldElement:
        if self.degree == 1:
            return self.rational(-self.minpoly[0])
        return self.element([0, 1])

    # -- cached structure ---------------------------------------------------

    def _reduction_table(self) -> tuple[tuple[Fraction, ...], ...]:
        """Coordinates of g^k for k < 2m - 1."""
        table = self._cache.get("reduction")
        if table is None:
            m = self.degree
            rows = []
            current = [Fraction(0)] * m
            current[0] = Fraction(1)
            for _ in range(max(1, 2 * m - 1)):
                rows.append(tuple(current))
                lead = current[-1]
                shifted = [Fraction(0)] + current[:-1]
                current = [s - lead * c for s, c in zip(shifted, self.minpoly[:-1])]
            table = tuple(rows)
            self._cache["reduction"] = table
        return table

    def _conj_matrix(self) -> linalg.Matrix:
        """Rational matrix C with conj(x) = C x in coordinates."""
        matrix = self._cache.get("conj")
        if matrix is None:
            if self.conj_image is None:
                raise MissingEmbedding(f"Field {self.name} has no conjugation")
            images = []
            power = self.one
            image_gen = self.element(self.conj_image)
            for _ in range(self.degree):
                images.append(power.coeffs)
                power = power * image_gen
            matrix = linalg.transpose(images)
            self._cache["conj"] = matrix
        return matrix

    def root_disc(self, bits: int = INITIAL_BITS) -> RootDisc:
        """Certified disc, inside the isolating box, around the designated root."""
        if self.embedding is None:
            raise MissingEmbedding(f"Field {self.name} has no complex embedding")
        discs = self._cache.setdefault("discs", {})
        disc = discs.get(bits)
        if disc is None:
            start = self._cache.get("root")
            if start is None:
                index, all_discs = locate_in_box(self.minpoly, self.embedding)
                start = all_discs[index].center
                self._cache["root"] = start
            z = newton_refine(self.minpoly, start, bits)
            disc = certify_disc(self.minpoly, z)
            if disc is None or not self.embedding.contains_disc(disc.center, disc.radius):
                raise AmbiguousEmbedding(f"Refinement left the isolating box of {self.name}")
            discs[bits] = disc
        return disc

    def __str__(self) -> str:
        return f"{self.name} = Q[x]/({format_poly(self.minpoly)})"


@dataclass(frozen=True, eq=False)
class FieldElement:
    """An element of a NumberField in power-basis coordinates."""

    field: NumberField
    coeffs: tuple[Fraction, ...]

    # -- coercion -------------------------------------------------------

    def _coerce(self, other: Any) -> FieldElement | None:
        if isinstance(other, FieldElement):
            if other.field is not self.field and other.field != self.field:
                raise FieldMismatch(f"Cannot combine elements of {self.field.name} and {other.field.name}")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.field.rational(other)
        return None

    def __eq__(self, other: object) -> bool:
        try:
            o = self._coerce(other)
        except FieldMismatch:
            return False
        if o is None:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self) -> int:
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash(self.coeffs)

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other: Any) -> FieldElement:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.field, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self) -> FieldElement:
        return FieldElement(self.field, tuple(-a for a in self.coeffs))

    def __sub__(self, other: Any) -> FieldElement:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.field, tuple(a - b for a, b in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other: Any) -> FieldElement:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other: Any) -> FieldElement:
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return FieldElement(self.field, tuple(a * other for a in self.coeffs))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        m = self.field.degree
        if m == 1:
            return FieldElement(self.field, (self.coeffs[0] * o.coeffs[0],))
        product = [Fraction(0)] * (2 * m - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(o.coeffs):
                if b:
                    product[i + j] += a * b
        table = self.field._reduction_table()
        out = [Fraction(0)] * m
        for k, c in enumerate(product):
            if c:
                for i, t in enumerate(table[k]):
                    if t:
                        out[i] += c * t
        return FieldElement(self.field, tuple(out))

    __rmul__ = __mul__

    def inverse(self) -> FieldElement:
        if self.is_zero():
            raise DivisionByZero(f"Division by zero in {self.field.name}")
        if self.is_rational():
            return self.field.rational(1 / self.coeffs[0])
        return self.field.element(P.invert_mod(self.coeffs, self.field.minpoly))

    def __truediv__(self, other: Any) -> FieldElement:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other: Any) -> FieldElement:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int) -> FieldElement:
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- structure ------------------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def as_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0]

    def conj(self) -> FieldElement:
        if self.field.degree == 1:
            return self
        return FieldElement(self.field, linalg.matvec(self.field._conj_matrix(), self.coeffs))

    def is_real(self) -> bool:
        return self.conj() == self

    def multiplication_matrix(self) -> linalg.Matrix:
        columns = []
        power = self.field.one
        for _ in range(self.field.degree):
            columns.append((self * power).coeffs)
            power = power * self.field.gen if self.field.degree > 1 else power
        return linalg.transpose(columns)

    def minpoly(self) -> tuple[Fraction, ...]:
        return linalg.minimal_polynomial(self.multiplication_matrix())

    def enclosure(self, bits: int = INITIAL_BITS) -> tuple[GaussQ, Fraction]:
        """Center and radius of a disc containing the embedded value."""
        if self.is_rational():
            return GaussQ(self.coeffs[0]), Fraction(0)
        return enclose_value(self.coeffs, self.field.root_disc(bits))

    def approx(self) -> complex:
        return complex(self.enclosure()[0])

    def sign(self, max_steps: int | None = None) -> int:
        return nf_sign(self, max_steps=max_steps)

    def __repr__(self) -> str:
        return f"FieldElement({self.field.name}: {format_poly(self.coeffs, 'g')})"

    def __str__(self) -> str:
        return format_poly(self.coeffs, "g")


@dataclass(frozen=True)
class FieldEmbedding:
    """Q-linear ring embedding source -> target given by a coordinate matrix."""

    source: NumberField
    target: NumberField
    matrix: linalg.Matrix

    @classmethod
    def identity(cls, k: NumberField) -> FieldEmbedding:
        return cls(k, k, linalg.identity(k.degree))

    def is_identity(self) -> bool:
        return self.source is self.target

    def __call__(self, x: FieldElement | Scalar) -> FieldElement:
        if not isinstance(x, FieldElement):
            return self.target.rational(x)
        if x.field is self.target:
            return x
        if x.field is not self.source and x.field != self.source:
            raise FieldMismatch(f"Element of {x.field.name} is not in {self.source.name}")
        if self.is_identity():
            return x
        return FieldElement(self.target, linalg.matvec(self.matrix, x.coeffs))

    def then(self, other: FieldEmbedding) -> FieldEmbedding:
        """Composite: apply self, then other."""
        if self.is_identity():
            return other
        if other.is_identity():
            return self
        return FieldEmbedding(self.source, other.target, linalg.matmul(other.matrix, self.matrix))


@dataclass(frozen=True)
class QuadraticExtension:
    """L = K(sqrt(delta)) together with the inclusion K -> L and sqrt(delta) in L."""

    field: NumberField
    embed: FieldEmbedding
    root: FieldElement
    discriminant: FieldElement


# -- construction -------------------------------------------------------------


def _checked_minpoly(minpoly: Sequence[Scalar]) -> tuple[Fraction, ...]:
    poly = P.trim(minpoly)
    if len(poly) < 2:
        raise ReducibleMinpoly("Defining polynomial must have degree at least 1")
    if poly[-1] != 1:
        raise ValueError(f"Defining polynomial must be monic, got leading coefficient {poly[-1]}")
    if len(poly) - 1 > MAX_DEGREE:
        raise UnsupportedDegree(f"Field degree {len(poly) - 1} exceeds the supported maximum {MAX_DEGREE}")
    if not P.is_irreducible(poly):
        raise ReducibleMinpoly(f"{format_poly(poly)} factors over Q")
    return poly


def _disc_hit(point: GaussQ, slack: Fraction, discs: Sequence[RootDisc]) -> int | None:
    hits = [
        j for j, d in enumerate(discs)
        if (point - d.center).abs2() <= (slack + d.radius) ** 2
    ]
    return hits[0] if len(hits) == 1 else None


def nf_create(
    minpoly: Sequence[Scalar],
    conj_image: Sequence[Scalar],
    embedding: RootBox,
    name: str = "K",
    depth: int = 0,
) -> NumberField:
    """Validate and build an embedded number field with conjugation."""
    poly = _checked_minpoly(minpoly)
    m = len(poly) - 1
    image = P.divmod_poly([Fraction(c) for c in conj_image], poly)[1]
    image = image + (Fraction(0),) * (m - len(image))
    generator = P.divmod_poly((Fraction(0), Fraction(1)), poly)[1]

    if P.compose_mod(poly, image, poly):
        raise InvalidInvolution("conj_image is not a root of the defining polynomial")
    if P.compose_mod(image, image, poly) != generator:
        raise InvalidInvolution("conj applied twice does not return the generator")

    k = NumberField(poly, image, embedding, name=name, depth=depth)

    index, discs = locate_in_box(poly, embedding)
    root = discs[index]
    for attempt in range(4):
        if attempt:
            bits = INITIAL_BITS << (2 * attempt)
            discs = isolate_all(poly, bits)
            index = _disc_hit(root.center, root.radius, discs)
            if index is None:
                continue
            root = discs[index]
        value, error = enclose_value(image, root)
        image_index = _disc_hit(value, error, discs)
        conj_index = _disc_hit(root.center.conjugate(), root.radius, discs)
        if image_index is not None and conj_index is not None:
            if image_index != conj_index:
                raise IncompatibleConjugation(
                    "conj does not agree with complex conjugation under the chosen embedding"
                )
            break
    else:
        raise AmbiguousEmbedding("Could not certify conjugation against the embedding")

    k._cache["root"] = root.center
    logger.info("Created field %s of degree %d", name, m)
    return k


# -- operations -----------------------------------------------------------------

_OPERATORS: dict[str, Callable[[FieldElement, FieldElement], FieldElement]] = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
    "/": operator.truediv,
}


def nf_arith(x: FieldElement, y: FieldElement | Scalar, op: str) -> FieldElement:
    func = _OPERATORS.get(op)
    if func is None:
        raise ValueError(f"Unknown operator: {op}. Use one of {', '.join(_OPERATORS)}")
    return func(x, y)


def nf_conjugate(x: FieldElement) -> FieldElement:
    return x.conj()


def nf_sign(x: FieldElement, max_steps: int | None = None) -> int:
    """Sign of the embedded image of a conj-fixed element.

    A nonzero element never embeds to 0, so the zero test is exact; for
    nonzero x the enclosure is refined until it excludes 0.
    """
    if not x.is_real():
        raise NotRealElement(f"{x} is not fixed by conjugation")
    if x.is_zero():
        return 0
    if x.is_rational():
        return 1 if x.coeffs[0] > 0 else -1
    max_steps = SIGN_MAX_STEPS if max_steps is None else max_steps
    bits = INITIAL_BITS
    for step in range(max_steps):
        value, error = x.enclosure(bits)
        if value.re > error:
            return 1
        if value.re < -error:
            return -1
        logger.debug("sign of %s undecided at %d bits (step %d)", x, bits, step)
        bits += _BITS_PER_STEP
    raise SignUndecided(f"Sign of {x} undecided after {max_steps} refinements")


def nf_is_totally_real(minpoly: Sequence[Scalar]) -> bool:
    return P.is_totally_real(P.trim(minpoly))


# -- quadratic towers -----------------------------------------------------------


@dataclass(frozen=True)
class _Adjoined:
    theta_minpoly: tuple[Fraction, ...]
    shift: int
    change: linalg.Matrix  # columns: tower coordinates of theta^j


def _tower_mul(a: tuple[FieldElement, FieldElement], b: tuple[FieldElement, FieldElement], delta: FieldElement):
    (u1, v1), (u2, v2) = a, b
    return (u1 * u2 + v1 * v2 * delta, u1 * v2 + u2 * v1)


def _adjoin_sqrt(delta: FieldElement) -> _Adjoined:
    """Primitive element theta = Y + k g of K[Y]/(Y^2 - delta), smallest k >= 0."""
    k_field = delta.field
    m = k_field.degree
    gen = k_field.gen
    for shift in range(4 * m * m + 2):
        theta = (gen * shift, k_field.one)
        power = (k_field.one, k_field.zero)
        columns: list[tuple[Fraction, ...]] = []
        relation = None
        for _ in range(2 * m + 1):
            flat = power[0].coeffs + power[1].coeffs
            if columns:
                relation = linalg.coordinates_in(columns, flat)
                if relation is not None:
                    break
            columns.append(flat)
            power = _tower_mul(power, theta, delta)
        if relation is not None and len(columns) == 2 * m:
            mu = tuple(-c for c in relation) + (Fraction(1),)
            logger.debug("adjoined sqrt with shift %d, minpoly degree %d", shift, 2 * m)
            return _Adjoined(mu, shift, linalg.transpose(columns))
        logger.debug("shift %d is not primitive", shift)
    raise AssertionError("no primitive element found for the quadratic tower")


def nf_sqrt(x: FieldElement) -> FieldElement | None:
    """A square root of x inside its own field, or None."""
    if x.is_zero():
        return x
    if x.is_rational():
        q = x.coeffs[0]
        if q > 0:
            num, den = sqrt_lower(Fraction(q.numerator)), sqrt_lower(Fraction(q.denominator))
            if num * num == q.numerator and den * den == q.denominator:
                return x.field.rational(num / den)
        if x.field.degree == 1:
            return None
    adjoined = _adjoin_sqrt(x)
    if P.is_irreducible(adjoined.theta_minpoly):
        return None
    k_field = x.field
    theta = (k_field.gen * adjoined.shift, k_field.one)
    factor_poly = P.factor(adjoined.theta_minpoly)[0][0]
    acc = (k_field.zero, k_field.zero)
    for c in reversed(factor_poly):
        acc = _tower_mul(acc, theta, x)
        acc = (acc[0] + c, acc[1])
    u, v = acc
    root = u / v
    if root * root != x:
        raise AssertionError("square root recovery failed")
    return root


def nf_quadratic_extension(base: NumberField, delta: FieldElement, name: str | None = None) -> QuadraticExtension:
    """L = K(sqrt(delta)) for a conj-fixed non-square delta."""
    if delta.field is not base and delta.field != base:
        raise FieldMismatch("discriminant is not an element of the base field")
    if delta.is_zero():
        raise ZeroDiscriminant("Cannot adjoin the square root of zero")
    if 2 * base.degree > MAX_DEGREE:
        raise UnsupportedDegree(f"Extension degree {2 * base.degree} exceeds {MAX_DEGREE}")
    sign = nf_sign(delta)

    adjoined = _adjoin_sqrt(delta)
    if not P.is_irreducible(adjoined.theta_minpoly):
        raise AlreadySquare(f"{delta} is already a square in {base.name}")

    m = base.degree
    to_power = linalg.inverse(adjoined.change)

    def from_tower(u: Sequence[Fraction], v: Sequence[Fraction]) -> tuple[Fraction, ...]:
        return linalg.matvec(to_power, tuple(u) + tuple(v))

    zeros = (Fraction(0),) * m
    embed_matrix = linalg.transpose([from_tower(e, zeros) for e in linalg.identity(m)])
    root_coords = from_tower(zeros, base.one.coeffs)
    conj_gen = base.gen.conj() * adjoined.shift
    conj_image = from_tower(conj_gen.coeffs, (base.one * sign).coeffs)

    box = _extension_box(base, delta, adjoined, sign)
    label = name or f"{base.name}(sqrt)"
    ext = nf_create(adjoined.theta_minpoly, conj_image, box, name=label, depth=base.depth + 1)
    embed = FieldEmbedding(base, ext, embed_matrix)
    _check_embedding_extends(base, ext, embed)
    root = ext.element(root_coords)
    logger.info("Adjoined sqrt(%s) to %s: degree %d", delta, base.name, ext.degree)
    return QuadraticExtension(ext, embed, root, delta)


def _extension_box(base: NumberField, delta: FieldElement, adjoined: _Adjoined, sign: int) -> RootBox:
    """Isolating box for theta* = sqrt(delta*) + k g*."""
    bits = 4 * INITIAL_BITS
    delta_value, _ = delta.enclosure(bits)
    magnitude = abs(delta_value.re)
    scale = 1 << bits
    approx_sqrt = Fraction(sqrt_lower(magnitude * scale * scale), scale)
    y = GaussQ(approx_sqrt) if sign > 0 else GaussQ(Fraction(0), approx_sqrt)
    g_value = base.gen.enclosure(bits)[0]
    target = y + g_value * adjoined.shift

    discs = isolate_all(adjoined.theta_minpoly)
    nearest = min(range(len(discs)), key=lambda j: (discs[j].center - target).abs2())
    center = discs[nearest].center
    gaps = [
        sqrt_lower((d.center - center).abs2()) - d.radius
        for j, d in enumerate(discs) if j != nearest
    ]
    half = min(gaps) / 4 if gaps else Fraction(1)
    half = max(half, 2 * discs[nearest].radius)
    return RootBox.around(center, half)


def _check_embedding_extends(base: NumberField, ext: NumberField, embed: FieldEmbedding) -> None:
    if base.degree == 1:
        return
    image = embed(base.gen)
    value, error = image.enclosure()
    box = base.embedding
    if not box.contains_disc(value, error):
        raise AmbiguousEmbedding("Extension embedding does not restrict to the base embedding")
