"""Two-class families T + Q.l1 + Q.l2 with (l1.l1) = d, (l2.l2) = -d.

f = l1 + l2 is isotropic. Every class l = c1*l1 + c2*l2 spans a one-class
brilliant family of square d*(c1^2 - c2^2), and connector classes l' cut
curves through all of them at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from hodgelab.core import linalg
from hodgelab.core.brilliant import (
    BrauerClass,
    BrilliantFamily,
    PeriodPoint,
    brauer_period_from_B,
    equator_point,
    equator_test,
    lifted_base,
    make_period,
    nl_test,
    recover_bfield,
    transcendental_of_point,
)
from hodgelab.core.errors import (
    CertificateFailure,
    InSpanOfClasses,
    NoIntersectionInChart,
    NonPositiveD,
    NotNLPoint,
    NotPositive,
    NotPositiveSquare,
    NotPositiveWithF,
    PointIsSigmaZero,
    SOutOfRange,
    UnsupportedTower,
    WrongSignature,
)
from hodgelab.core.exactmath import FieldElement, FieldEmbedding, nf_quadratic_extension, nf_sign, nf_sqrt
from hodgelab.core.hodge import K3HodgeStructure
from hodgelab.core.lattice import (
    QuadLattice,
    SignatureTriple,
    extend_by_classes,
    orthogonal_complement,
    signature,
)
from hodgelab.core.linalg import Vector
from hodgelab.core.rootbox import Interval
from hodgelab.utils.logger import get_logger

logger = get_logger(__name__)

CONNECTOR_SEARCH_LIMIT = 4096
EQUATOR_BITS = 96


@dataclass(frozen=True)
class TwoClassFamily:
    base: K3HodgeStructure
    d: Fraction
    label: str = ""
    extended: QuadLattice = field(init=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "d", Fraction(self.d))
        if self.d <= 0:
            raise NonPositiveD(f"Two-class families need d > 0, got {self.d}")
        object.__setattr__(self, "extended", extend_by_classes(self.base.lattice, (self.d, -self.d)))

    @property
    def rank(self) -> int:
        return self.base.rank

    @property
    def f(self) -> Vector:
        return self.class_vector(1, 1)

    def class_vector(self, c1: Fraction | int, c2: Fraction | int) -> Vector:
        return (Fraction(0),) * self.rank + (Fraction(c1), Fraction(c2))

    def class_square(self, c1: Fraction | int, c2: Fraction | int) -> Fraction:
        return self.d * (Fraction(c1) ** 2 - Fraction(c2) ** 2)

    def one_class(self, c1: Fraction | int, c2: Fraction | int) -> BrilliantFamily:
        """D_l for l = c1*l1 + c2*l2, as a one-class family."""
        if c1 == 0 and c2 == 0:
            raise ValueError("l = c1*l1 + c2*l2 must be nonzero")
        label = f"{self.label or 'two-class'}[{c1},{c2}]"
        return BrilliantFamily(self.base, self.class_square(c1, c2), label=label)

    def signature(self) -> SignatureTriple:
        return signature(self.extended)

    def pair(self, v, w):
        return self.extended.pair(v, w)


@dataclass(frozen=True)
class ConnectorClass:
    vector: Vector
    square: Fraction
    f_pairing: Fraction

    @property
    def t_part(self) -> Vector:
        return self.vector[:-2]


@dataclass(frozen=True)
class IntersectionResult:
    c1: Fraction
    c2: Fraction
    family: BrilliantFamily
    points: tuple[PeriodPoint, ...]
    trivial: PeriodPoint | None
    discarded: int = 0

    @property
    def field_name(self) -> str:
        if self.points:
            return self.points[0].field.name
        return self.family.field.name


@dataclass(frozen=True)
class BrauerTransport:
    connector: ConnectorClass
    bfield: BrauerClass
    point: PeriodPoint
    on_line: bool
    in_nl: bool
    orthogonal: bool

    @property
    def certified(self) -> bool:
        return self.on_line and self.in_nl and self.orthogonal


@dataclass(frozen=True)
class DistanceEnclosure:
    s: Fraction
    tau: Fraction
    lower: Fraction
    upper: Fraction
    identities_hold: bool
    point: PeriodPoint
    point_valid: bool
    closed_form: bool


@dataclass(frozen=True)
class SpecializationRow:
    s: Fraction
    intersection: IntersectionResult
    nl_flags: tuple[bool, ...]
    bfield: BrauerClass | None = None


@dataclass(frozen=True)
class SpecializationTrace:
    connector: ConnectorClass
    rows: tuple[SpecializationRow, ...]

    @property
    def terminal(self) -> BrauerClass | None:
        for row in reversed(self.rows):
            if row.bfield is not None:
                return row.bfield
        return None


def make_two_class(base: K3HodgeStructure, d: Fraction | int, label: str = "") -> TwoClassFamily:
    family = TwoClassFamily(base, Fraction(d), label=label)
    f = family.f
    if family.pair(f, f) != 0 or any(family.pair(f, e) != 0 for e in linalg.identity(family.rank + 2)[: family.rank]):
        raise CertificateFailure("f = l1 + l2 is not isotropic and orthogonal to T")
    sig = family.signature()
    if sig.as_tuple() != (3, family.rank - 1, 0):
        raise WrongSignature(f"Two-class lattice has signature {sig}, expected (3, {family.rank - 1}, 0)")
    logger.info("Two-class family %s: d = %s, signature %s", label or "-", family.d, sig)
    return family


def check_connector(family: TwoClassFamily, vector: Sequence[Fraction] | ConnectorClass) -> ConnectorClass:
    if isinstance(vector, ConnectorClass):
        vector = vector.vector
    v = linalg.as_vector(vector)
    if len(v) != family.rank + 2:
        raise ValueError(f"Connector has {len(v)} entries, expected {family.rank + 2}")
    square = family.pair(v, v)
    if square <= 0:
        raise NotPositiveSquare(f"(l'.l') = {square} is not positive")
    f_pairing = family.pair(v, family.f)
    if f_pairing <= 0:
        raise NotPositiveWithF(f"(l'.f) = {f_pairing} is not positive")
    if linalg.is_zero(v[: family.rank]):
        raise InSpanOfClasses("Connector lies in span(l1, l2)")
    return ConnectorClass(v, square, f_pairing)


def lift_point(family: TwoClassFamily, point: PeriodPoint, c1: Fraction | int, c2: Fraction | int) -> tuple[FieldElement, ...]:
    """sigma of a one-class point written in two-class coordinates."""
    r = family.rank
    t = point.sigma[r]
    return point.sigma[:r] + (t * Fraction(c1), t * Fraction(c2))


def _lift_class(family: TwoClassFamily, v: Sequence[Fraction], c1: Fraction, c2: Fraction) -> Vector:
    r = family.rank
    return tuple(v[:r]) + (v[r] * c1, v[r] * c2)


def _root_field(base_field, delta: FieldElement) -> tuple[FieldEmbedding, FieldElement | None]:
    root = nf_sqrt(delta)
    if root is not None:
        return FieldEmbedding.identity(base_field), root
    if base_field.depth >= 1:
        raise UnsupportedTower(f"{base_field.name} is already an extension; cannot adjoin sqrt({delta})")
    ext = nf_quadratic_extension(base_field, delta, name=f"{base_field.name}(sqrt)")
    return ext.embed, ext.root


def curve_meets_brilliant(
    family: TwoClassFamily,
    connector: Sequence[Fraction] | ConnectorClass,
    c1: Fraction | int,
    c2: Fraction | int,
) -> IntersectionResult:
    """Points sigma0 + b*conj(sigma0) + c*l of D_l orthogonal to l'.

    (sigma.l') = 0 gives b = -(A + c*m)/conj(A) with A = (sigma0.lam);
    isotropy then leaves conj(A)*d_l*c^2 - 2*q*m*c - 2*q*A = 0.
    """
    c1, c2 = Fraction(c1), Fraction(c2)
    connector = check_connector(family, connector)
    one = family.one_class(c1, c2)
    base = family.base
    k = base.field
    r = family.rank
    lam = connector.t_part
    p1, p2 = connector.vector[r], connector.vector[r + 1]

    big_a = base.lattice.pair(base.period, lam)
    big_a_bar = big_a.conj()
    q = base.q()
    m = family.d * (c1 * p1 - c2 * p2)
    d_l = one.d

    if big_a.is_zero():
        trivial = make_period(one, 1, 0, 0)
        logger.info("Connector is orthogonal to sigma0; reporting the trivial intersection")
        return IntersectionResult(c1, c2, one, (), trivial)

    candidates: list[tuple[FieldEmbedding, FieldElement, FieldElement]] = []
    if d_l == 0:
        if m == 0:
            raise NoIntersectionInChart("(l.l') = 0 and d(l) = 0: only the chart-excluded point solves")
        c = -big_a / m
        candidates.append((FieldEmbedding.identity(k), -(big_a + c * m) / big_a_bar, c))
    else:
        lead = big_a_bar * d_l
        delta = q * q * m * m * 4 + big_a * big_a_bar * q * d_l * 8
        if delta.is_zero():
            c = q * m / lead
            candidates.append((FieldEmbedding.identity(k), -(big_a + c * m) / big_a_bar, c))
        else:
            embed, root = _root_field(k, delta)
            for sign in (1, -1):
                c = (embed(q) * (2 * m) + root * sign) / (embed(lead) * 2)
                b = -(embed(big_a) + c * m) / embed(big_a_bar)
                candidates.append((embed, b, c))

    points: list[PeriodPoint] = []
    discarded = 0
    for embed, b, c in candidates:
        try:
            point = make_period(one, embed(k.one), b, c, embed=embed)
        except NotPositive:
            discarded += 1
            logger.debug("Discarding intersection c = %s outside D_l", c)
            continue
        if not nl_test(one, point):
            raise CertificateFailure(f"Intersection point c = {c} is not in the NL locus")
        points.append(point)
    logger.info("l = %s*l1 + %s*l2 meets the curve in %d point(s)", c1, c2, len(points))
    return IntersectionResult(c1, c2, one, tuple(points), None, discarded)


def _sign_fixed(family: TwoClassFamily, v: Vector) -> Vector | None:
    """v or -v with (v.f) > 0 and (v.v) > 0; None when neither sign works."""
    if family.pair(v, v) <= 0:
        return None
    f_pairing = family.pair(v, family.f)
    if f_pairing == 0:
        return None
    return v if f_pairing > 0 else linalg.vec_scale(Fraction(-1), v)


def _k_order():
    yield 0
    for k in range(1, CONNECTOR_SEARCH_LIMIT):
        yield k
        yield -k


def _connector_nonbrauer(family: TwoClassFamily, point: PeriodPoint, c1: Fraction, c2: Fraction) -> Vector:
    complement = orthogonal_complement(transcendental_of_point(point))
    if complement.dim != 1:
        raise CertificateFailure(f"T_t has a complement of dimension {complement.dim}, expected 1")
    v = _lift_class(family, complement.basis[0], c1, c2)
    # l'' = c2*l1 + c1*l2 is orthogonal to l and to T, (l''.l'') = -d(l)
    extra = family.class_vector(c2, c1)
    extra_square = family.pair(extra, extra)
    if point.family.d < 0 and extra_square <= 0:
        raise CertificateFailure("Search direction has non-positive square")
    for k in _k_order():
        candidate = linalg.vec_add(v, linalg.vec_scale(Fraction(k), extra)) if k else v
        fixed = _sign_fixed(family, candidate)
        logger.debug("connector search k = %d: %s", k, "accepted" if fixed else "rejected")
        if fixed is not None:
            return fixed
        if extra_square < 0 and k < 0:
            other = linalg.vec_add(v, linalg.vec_scale(Fraction(-k), extra))
            if family.pair(candidate, candidate) <= 0 and family.pair(other, other) <= 0:
                break
    raise CertificateFailure("No connector found along the search direction")


def _connector_brauer(family: TwoClassFamily, point: PeriodPoint, c1: Fraction, c2: Fraction) -> Vector:
    """l' = -B' + (1/d) l1 + k f' with f' = l/c1 and sigma = sigma0 + (sigma0.B') f'."""
    r = family.rank
    b = recover_bfield(point.family, point).b
    b_scaled = linalg.vec_scale(c1, b)
    f_hat = family.class_vector(1, c2 / c1)
    start = tuple(-x for x in b_scaled) + (1 / family.d, Fraction(0))
    slope = 2 * family.pair(start, f_hat)
    if slope <= 0 or family.pair(f_hat, f_hat) != 0:
        raise CertificateFailure("(l'.l') is not increasing in k")
    for k in range(CONNECTOR_SEARCH_LIMIT):
        candidate = linalg.vec_add(start, linalg.vec_scale(Fraction(k), f_hat))
        square = family.pair(candidate, candidate)
        f_pairing = family.pair(candidate, family.f)
        logger.debug("connector search k = %d: (l'.l') = %s, (l'.f) = %s", k, square, f_pairing)
        if square > 0 and f_pairing > 0:
            return candidate
    raise CertificateFailure(f"No connector with k < {CONNECTOR_SEARCH_LIMIT} (r = {r})")


def connector_from_nl(
    family: TwoClassFamily,
    c1: Fraction | int,
    c2: Fraction | int,
    point: PeriodPoint,
) -> ConnectorClass:
    """A connector l' orthogonal to an NL point of D_l, l = c1*l1 + c2*l2."""
    c1, c2 = Fraction(c1), Fraction(c2)
    if point.family.d != family.class_square(c1, c2):
        raise ValueError(f"Point lives on a family with d = {point.family.d}, not on l = {c1}*l1 + {c2}*l2")
    if point.is_base_point():
        raise PointIsSigmaZero("The base point sigma0 is orthogonal to every l' in span(l1, l2)")
    if not nl_test(point.family, point):
        raise NotNLPoint("Connectors exist only for Noether-Lefschetz points")

    if point.family.d == 0:
        raw = _connector_brauer(family, point, c1, c2)
    else:
        raw = _connector_nonbrauer(family, point, c1, c2)
    connector = check_connector(family, linalg.primitive_integral(raw))
    sigma = lift_point(family, point, c1, c2)
    if not family.pair(sigma, connector.vector).is_zero():
        raise CertificateFailure(f"Connector {connector.vector} is not orthogonal to the point")
    logger.info("Connector %s: (l'.l') = %s, (l'.f) = %s", connector.vector, connector.square, connector.f_pairing)
    return connector


def transport_to_brauer(
    family: TwoClassFamily,
    point: PeriodPoint,
    c1: Fraction | int,
    c2: Fraction | int,
) -> BrauerTransport:
    """Move an NL point of D_l to the Brauer line L_f through a connector."""
    connector = connector_from_nl(family, c1, c2, point)
    scale = -1 / connector.f_pairing
    b = linalg.vec_scale(scale, connector.t_part)
    brauer_family = family.one_class(1, 1)
    target = brauer_period_from_B(brauer_family, b)
    bfield = recover_bfield(brauer_family, target)
    sigma = lift_point(family, target, 1, 1)
    return BrauerTransport(
        connector=connector,
        bfield=bfield,
        point=target,
        on_line=target.a == 1 and target.b.is_zero(),
        in_nl=nl_test(brauer_family, target),
        orthogonal=family.pair(sigma, connector.vector).is_zero(),
    )


def twistor_to_brauer(family: TwoClassFamily, point: PeriodPoint) -> BrauerTransport:
    return transport_to_brauer(family, point, 1, 0)


def dwork_to_brauer(family: TwoClassFamily, point: PeriodPoint) -> BrauerTransport:
    return transport_to_brauer(family, point, 0, 1)


# -- equators ----------------------------------------------------------------------


def _real_interval(x: FieldElement, bits: int) -> tuple[Interval, Interval]:
    center, radius = x.enclosure(bits)
    return Interval.around(center.re, radius), Interval.around(center.im, radius)


def hodge_norm_pairing(
    family: TwoClassFamily,
    point: PeriodPoint,
    x: Sequence[FieldElement],
    y: Sequence[FieldElement],
) -> FieldElement:
    """Hodge majorant of the two-class lattice at sigma0, paired with conj(y).

    Positive on P_sigma0 + R.l1, the negative of the form on its complement,
    so l1 and l2 both get weight d.
    """
    r = family.rank
    lattice = family.base.lattice
    period, conj = lifted_base(point.family, point.embed)
    q = lattice.pair(period, conj)
    x_t, y_bar = tuple(x[:r]), tuple(v.conj() for v in y[:r])
    positive = lattice.pair(x_t, conj) * lattice.pair(y_bar, period) + lattice.pair(x_t, period) * lattice.pair(y_bar, conj)
    classes = x[r] * y[r].conj() + x[r + 1] * y[r + 1].conj()
    return positive * 2 / q - lattice.pair(x_t, y_bar) + classes * family.d


def equator_flow(
    family: TwoClassFamily,
    s: Fraction | int,
    tau: Fraction | int,
    bits: int = EQUATOR_BITS,
) -> DistanceEnclosure:
    """Distance from the equator point of D_{l1 + s*l2} at tau to the line [f].

    The point is built exactly, lifted to the two-class lattice and checked
    there. The distance is the chordal one for the Hodge majorant at sigma0,
    which equals sqrt((1 - s)(3 + s))/2 for every tau.
    """
    s, tau = Fraction(s), Fraction(tau)
    if not 0 <= s < 1:
        raise SOutOfRange(f"s = {s} is outside [0, 1)")
    base = family.base
    q = base.q()
    e = tuple((x + x.conj()) / 2 for x in base.period)
    f_prime = tuple((x - x.conj()) / 2 for x in base.period)
    lattice = base.lattice
    identities = (
        lattice.pair(e, e) == q / 2
        and lattice.pair(f_prime, f_prime) == -q / 2
        and lattice.pair(e, f_prime).is_zero()
    )

    one_class = family.one_class(1, s)
    point = equator_point(one_class, tau)
    on_equator = equator_test(one_class, point)
    sigma = lift_point(family, point, 1, s)
    conj_sigma = tuple(x.conj() for x in sigma)
    valid = family.pair(sigma, sigma).is_zero() and nf_sign(family.pair(sigma, conj_sigma)) > 0

    f = tuple(point.field.rational(x) for x in family.f)
    overlap = hodge_norm_pairing(family, point, sigma, f)
    squared = 1 - overlap * overlap.conj() / (hodge_norm_pairing(family, point, sigma, sigma) * (2 * family.d))
    closed_form = squared == point.field.rational((1 - s) * (3 + s) / 4)

    re, _ = _real_interval(squared, bits)
    distance = Interval(max(re.lo, Fraction(0)), re.hi).sqrt(bits)
    logger.debug("equator s = %s tau = %s: distance in [%s, %s]", s, tau, float(distance.lo), float(distance.hi))
    return DistanceEnclosure(s, tau, distance.lo, distance.hi, identities, point, on_equator and valid, closed_form)


def nl_specialization(
    family: TwoClassFamily,
    connector: Sequence[Fraction] | ConnectorClass,
    s_grid: Sequence[Fraction | int],
    progress: Callable[[Fraction], None] | None = None,
) -> SpecializationTrace:
    """Intersections along l_s = l1 + s*l2, with the Brauer class at s = 1."""
    connector = check_connector(family, connector)
    rows = []
    for s in s_grid:
        s = Fraction(s)
        result = curve_meets_brilliant(family, connector, 1, s)
        flags = tuple(nl_test(result.family, p) for p in result.points)
        bfield = None
        if s == 1:
            on_line = [p for p in result.points if not p.a.is_zero()]
            if result.trivial is not None:
                bfield = recover_bfield(result.family, result.trivial)
            elif on_line:
                bfield = recover_bfield(result.family, on_line[0])
        rows.append(SpecializationRow(s, result, flags, bfield))
        if progress is not None:
            progress(s)
    return SpecializationTrace(connector, tuple(rows))
