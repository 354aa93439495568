"""One-class brilliant families T + Q.l and their period points.

A point is sigma = a*sigma0 + b*conj(sigma0) + c*l in the extended lattice,
with coordinates in K or in a quadratic extension L of K. The inclusion
K -> L travels with the point.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from hodgelab.core import linalg
from hodgelab.core.errors import (
    CertificateFailure,
    FieldMismatch,
    NotBrauerType,
    NotIrreducible,
    NotNLPoint,
    NotOnConic,
    NotPositive,
    NotTwistorType,
    WrongComponent,
)
from hodgelab.core.exactmath import (
    FieldElement,
    FieldEmbedding,
    NumberField,
    nf_quadratic_extension,
    nf_sqrt,
)
from hodgelab.core.hodge import K3HodgeStructure, is_irreducible, transcendental_lattice
from hodgelab.core.lattice import (
    QuadLattice,
    QuotientElement,
    Sublattice,
    extend_by_class,
    quotient_order,
)
from hodgelab.core.linalg import Matrix, Vector
from hodgelab.utils.logger import get_logger

logger = get_logger(__name__)


class DomainClass(str, enum.Enum):
    TWISTOR_SPHERE = "TwistorSphere"
    BRAUER_TWO_LINES = "BrauerTwoLines"
    DWORK_TWO_HALF_PLANES = "DworkTwoHalfPlanes"

    @property
    def description(self) -> str:
        return _DESCRIPTIONS[self]


_DESCRIPTIONS = {
    DomainClass.TWISTOR_SPHERE: "Q_l is a smooth conic (P^1); the equator l in P_sigma is removed",
    DomainClass.BRAUER_TWO_LINES: "Q_l is two lines L_l and conj(L_l) meeting at [l]",
    DomainClass.DWORK_TWO_HALF_PLANES: "D_l is two half-planes, conjugate to each other",
}


@dataclass(frozen=True)
class BrilliantFamily:
    base: K3HodgeStructure
    d: Fraction
    label: str = ""
    extended: QuadLattice = field(init=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "d", Fraction(self.d))
        if not is_irreducible(self.base):
            raise NotIrreducible("Brilliant families need an irreducible base")
        object.__setattr__(self, "extended", extend_by_class(self.base.lattice, self.d))

    @property
    def rank(self) -> int:
        return self.base.rank

    @property
    def field(self) -> NumberField:
        return self.base.field

    @property
    def ell(self) -> Vector:
        return tuple(Fraction(int(i == self.rank)) for i in range(self.rank + 1))


@dataclass(frozen=True)
class PeriodPoint:
    family: BrilliantFamily
    a: FieldElement
    b: FieldElement
    c: FieldElement
    embed: FieldEmbedding
    sigma: tuple[FieldElement, ...]

    @property
    def field(self) -> NumberField:
        return self.embed.target

    @property
    def conj_sigma(self) -> tuple[FieldElement, ...]:
        return tuple(x.conj() for x in self.sigma)

    def is_base_point(self) -> bool:
        return self.b.is_zero() and self.c.is_zero()

    def t_coordinates(self) -> tuple[FieldElement, ...]:
        return self.sigma[: self.family.rank]


@dataclass(frozen=True)
class BrauerClass:
    b: Vector
    element: QuotientElement | None

    @property
    def order(self) -> int | None:
        return self.element.order if self.element is not None else None


@dataclass(frozen=True)
class ProjectionCertificate:
    matrix: Matrix
    bijective: bool
    isometry: bool | None
    period_image: str | None


@dataclass(frozen=True)
class FBEmbedding:
    matrix: Matrix
    image: Sublattice
    image_matches: bool
    isometric: bool


def classify_domain(family: BrilliantFamily) -> DomainClass:
    if family.d > 0:
        return DomainClass.TWISTOR_SPHERE
    if family.d == 0:
        return DomainClass.BRAUER_TWO_LINES
    return DomainClass.DWORK_TWO_HALF_PLANES


def lifted_base(family: BrilliantFamily, embed: FieldEmbedding) -> tuple[tuple[FieldElement, ...], tuple[FieldElement, ...]]:
    """sigma0 and conj(sigma0) written over the target field of ``embed``."""
    period = tuple(embed(x) for x in family.base.period)
    conj = tuple(embed(x) for x in family.base.conj_period)
    return period, conj


def _resolve_field(family: BrilliantFamily, values, embed: FieldEmbedding | None) -> FieldEmbedding:
    if embed is not None:
        return embed
    fields = {id(v.field): v.field for v in values if isinstance(v, FieldElement)}
    for k in fields.values():
        if k is not family.field and k != family.field:
            raise FieldMismatch(f"Coefficients in {k.name} need an embedding from {family.field.name}")
    return FieldEmbedding.identity(family.field)


def make_period(
    family: BrilliantFamily,
    a: FieldElement | Fraction | int,
    b: FieldElement | Fraction | int,
    c: FieldElement | Fraction | int,
    embed: FieldEmbedding | None = None,
) -> PeriodPoint:
    """Validated point of D_l, normalized to a = 1 (or b = 1 when a = 0)."""
    embed = _resolve_field(family, (a, b, c), embed)
    target = embed.target
    a, b, c = (embed(v) for v in (a, b, c))

    if not a.is_zero():
        a, b, c = target.one, b / a, c / a
    elif not b.is_zero():
        a, b, c = target.zero, target.one, c / b

    period, conj = lifted_base(family, embed)
    sigma = tuple(a * p + b * q for p, q in zip(period, conj)) + (c,)
    lattice = family.extended
    square = lattice.pair(sigma, sigma)
    if not square.is_zero():
        raise NotOnConic(f"(sigma.sigma) = {square}, expected 0")
    norm = lattice.pair(sigma, tuple(x.conj() for x in sigma))
    if norm.sign() <= 0:
        raise NotPositive(f"(sigma.conj sigma) = {norm} is not positive")
    return PeriodPoint(family, a, b, c, embed, sigma)


def base_point(family: BrilliantFamily) -> PeriodPoint:
    return make_period(family, 1, 0, 0)


def positive_plane_coefficient(
    sigma: Sequence[FieldElement], target: Sequence[Fraction]
) -> FieldElement | None:
    """x with target = x*sigma + conj(x)*conj(sigma), or None if target is outside P_sigma."""
    k = sigma[0].field
    m = k.degree
    conj = tuple(s.conj() for s in sigma)
    columns = []
    for j in range(m):
        h = k.element([Fraction(int(i == j)) for i in range(m)])
        hc = h.conj()
        vec = [h * s + hc * t for s, t in zip(sigma, conj)]
        columns.append([x.coeffs[c] for x in vec for c in range(m)])
    rhs = [Fraction(target[i]) if c == 0 else Fraction(0) for i in range(len(sigma)) for c in range(m)]
    solution = linalg.solve(linalg.transpose(columns), rhs)
    return None if solution is None else k.element(solution)


def is_brilliant(family: BrilliantFamily, point: PeriodPoint) -> bool:
    return positive_plane_coefficient(point.sigma, family.ell) is None


def equator_test(family: BrilliantFamily, point: PeriodPoint) -> bool:
    if family.d <= 0:
        raise NotTwistorType(f"Equator only exists for d > 0, got d = {family.d}")
    return not is_brilliant(family, point)


def equator_point(family: BrilliantFamily, tau: Fraction | int) -> PeriodPoint:
    """Point of the equator of a twistor family at rotation parameter tau.

    sigma = u + lam*l with u = a*sigma0 + conj(a)*conj(sigma0) real and lam
    imaginary, lam^2 = -(u.u)/d; a square root outside K puts the point
    over a quadratic extension.
    """
    if family.d <= 0:
        raise NotTwistorType(f"Equator only exists for d > 0, got d = {family.d}")
    k = family.field
    tau = Fraction(tau)
    cos = (1 - tau * tau) / (1 + tau * tau)
    sin = 2 * tau / (1 + tau * tau)
    eta = k.gen - k.gen.conj()
    a = (k.one * cos + eta * sin) / 2
    b = a.conj()
    lam_sq = -(a * b * family.base.q() * 2) / family.d
    lam = nf_sqrt(lam_sq)
    if lam is not None:
        return make_period(family, a, b, lam)
    ext = nf_quadratic_extension(k, lam_sq, name=f"{k.name}(equator)")
    return make_period(family, ext.embed(a), ext.embed(b), ext.root, embed=ext.embed)


# -- NL locus --------------------------------------------------------------------


def transcendental_of_point(point: PeriodPoint) -> Sublattice:
    return transcendental_lattice(point.family.extended, point.sigma)


def _nl_by_signature(family: BrilliantFamily, point: PeriodPoint) -> bool:
    tt = transcendental_of_point(point)
    if tt.dim != family.rank:
        return False
    return tt.signature().as_tuple() == (2, family.rank - 2, 0)


def _solve_bfield(family: BrilliantFamily, embed: FieldEmbedding, target: FieldElement) -> Vector | None:
    """Rational B in T with (sigma0.B) = target."""
    period, _ = lifted_base(family, embed)
    g_sigma = linalg.matvec(family.base.lattice.gram, period)
    m = embed.target.degree
    rows = [[g_sigma[i].coeffs[c] for i in range(family.rank)] for c in range(m)]
    return linalg.solve(rows, list(target.coeffs))


def nl_test_via_bfield(family: BrilliantFamily, point: PeriodPoint) -> bool:
    """NL membership from the B-field parameterization (d = 0 only)."""
    if family.d != 0:
        raise NotBrauerType(f"B-field test needs d = 0, got d = {family.d}")
    target = point.c if not point.a.is_zero() else point.c.conj()
    return _solve_bfield(family, point.embed, target) is not None


def nl_test(family: BrilliantFamily, point: PeriodPoint) -> bool:
    result = _nl_by_signature(family, point)
    if family.d == 0:
        check = nl_test_via_bfield(family, point)
        if check != result:
            raise CertificateFailure(
                f"NL by signature ({result}) disagrees with the B-field system ({check})"
            )
    return result


def coordinates_in_basis(basis: Sequence[Vector], sigma: Sequence[FieldElement]) -> tuple[FieldElement, ...]:
    """y with sum y_k basis_k = sigma, for sigma in the complexified span."""
    columns = linalg.transpose(basis)
    n = len(columns)
    chosen: list[int] = []
    for i in range(n):
        if linalg.rank([columns[j] for j in chosen + [i]]) == len(chosen) + 1:
            chosen.append(i)
        if len(chosen) == len(basis):
            break
    inv = linalg.inverse([columns[i] for i in chosen])
    y = linalg.matvec(inv, [sigma[i] for i in chosen])
    if linalg.matvec(columns, y) != tuple(sigma):
        raise ValueError("Period does not lie in the span of the basis")
    return y


def projection_to_base(family: BrilliantFamily, point: PeriodPoint) -> ProjectionCertificate:
    if not nl_test(family, point):
        raise NotNLPoint("Projection to the base needs a Noether-Lefschetz point")
    r = family.rank
    basis = transcendental_of_point(point).basis
    matrix = tuple(tuple(basis[k][i] for k in range(r)) for i in range(r))
    bijective = linalg.det(matrix) != 0
    isometry = None
    image = None
    if family.d == 0:
        restricted = family.extended.restrict(basis)
        carried = linalg.matmul(linalg.matmul(linalg.transpose(matrix), family.base.lattice.gram), matrix)
        y = coordinates_in_basis(basis, point.sigma)
        projected = linalg.matvec(matrix, y)
        period, conj = lifted_base(family, point.embed)
        if projected == period:
            image = "sigma0"
        elif projected == conj:
            image = "conj"
        isometry = carried == restricted and image is not None
    return ProjectionCertificate(matrix, bijective, isometry, image)


# -- Brauer parameterization -----------------------------------------------------


def _require_brauer(family: BrilliantFamily) -> None:
    if family.d != 0:
        raise NotBrauerType(f"Operation needs d = 0, got d = {family.d}")


def brauer_period_from_B(family: BrilliantFamily, b: Sequence[Fraction]) -> PeriodPoint:
    _require_brauer(family)
    b = linalg.as_vector(b)
    c = family.base.lattice.pair(family.base.period, b)
    return make_period(family, 1, 0, c)


def recover_bfield(family: BrilliantFamily, point: PeriodPoint) -> BrauerClass:
    _require_brauer(family)
    if point.a.is_zero():
        raise WrongComponent("Point lies on the conjugate line; use its conjugate")
    b = _solve_bfield(family, point.embed, point.c)
    if b is None:
        raise NotNLPoint(f"No rational B with (sigma0.B) = {point.c}")
    element = QuotientElement(b) if family.base.lattice.integral else None
    return BrauerClass(b, element)


def fB_embedding(family: BrilliantFamily, b: Sequence[Fraction]) -> FBEmbedding:
    _require_brauer(family)
    r = family.rank
    b = linalg.as_vector(b)
    gb = linalg.matvec(family.base.lattice.gram, b)
    matrix = tuple(tuple(Fraction(int(i == j)) for j in range(r)) for i in range(r)) + (tuple(gb),)
    columns = linalg.transpose(matrix)
    image = Sublattice.span(family.extended, columns)
    expected = transcendental_of_point(brauer_period_from_B(family, b))
    pulled = linalg.matmul(linalg.matmul(linalg.transpose(matrix), family.extended.gram), matrix)
    return FBEmbedding(
        matrix=matrix,
        image=image,
        image_matches=image.same_space(expected),
        isometric=pulled == family.base.lattice.gram,
    )


def one_one_space(family: BrilliantFamily, point: PeriodPoint) -> Sublattice:
    """Rational classes v with (v.sigma) = 0."""
    g_sigma = linalg.matvec(family.extended.gram, point.sigma)
    m = point.field.degree
    rows = [[x.coeffs[c] for x in g_sigma] for c in range(m)]
    return Sublattice.span(family.extended, linalg.nullspace(rows, family.rank + 1))


def brauer_order(b: Sequence[Fraction]) -> int:
    return quotient_order(b)
