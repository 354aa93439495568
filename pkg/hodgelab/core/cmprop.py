"""Propagation of CM along brilliant families.

The fiber of an NL point is the Hodge structure (T_t, sigma_t). Its
endomorphism field is compared with the base one. For d = 0 the projection
is an isometry and carries the whole field over. For d != 0 the fiber form
pulled back to T is (x.y) + (d/m^2)(x.b)(y.b), with b the T-part of the
class spanning T_t-perp, so a K0 larger than Q only survives when b is an
eigenvector of K0, which a rational b never is. The report then records
that obstruction instead of an embedding.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

import sympy

from hodgelab.core import linalg
from hodgelab.core import polynomials as P
from hodgelab.core.brilliant import (
    BrilliantFamily,
    PeriodPoint,
    coordinates_in_basis,
    nl_test,
    projection_to_base,
    transcendental_of_point,
)
from hodgelab.core.errors import (
    BaseNotCM,
    CertificateFailure,
    EmbeddingMissing,
    NotNLPoint,
    UnsupportedDegree,
)
from hodgelab.core.exactmath import FieldElement, NumberField, nf_sqrt
from hodgelab.core.hodge import (
    EndoClassification,
    EndoKind,
    HodgeEndoAlgebra,
    K3HodgeStructure,
    classify_endo,
    endo_algebra,
    keeps_period_line,
    validate_period,
)
from hodgelab.core.lattice import QuadLattice, orthogonal_complement
from hodgelab.core.linalg import Matrix
from hodgelab.utils.logger import get_logger

logger = get_logger(__name__)

MAX_SHIFT = 12


@dataclass(frozen=True)
class RelativePoly:
    """theta^2 + gamma*theta + delta over K0 = Q(z), gamma and delta as polynomials in z."""

    k0_minpoly: tuple[Fraction, ...]
    z: tuple[Fraction, ...]
    gamma: tuple[Fraction, ...]
    delta: tuple[Fraction, ...]
    discriminant_minpoly: tuple[Fraction, ...]
    totally_negative: bool


@dataclass(frozen=True)
class K0Obstruction:
    """Why K0 has no image in the fiber field.

    The K0 generator moved to T_t by the projection keeps the period line,
    but is not self-adjoint for the fiber form.
    """

    k0_degree: int
    fiber_degree: int
    keeps_period_line: bool
    adjoint_defect_rank: int
    transported_is_endomorphism: bool


@dataclass(frozen=True)
class PropagationReport:
    base_classification: EndoClassification
    fiber_classification: EndoClassification
    fiber: K3HodgeStructure
    fiber_algebra: HodgeEndoAlgebra
    k0_embeds: bool
    k0_image: tuple[Fraction, ...] | None
    k0_matrix: Matrix | None
    fields_k0_isomorphic: bool
    fields_isomorphic: bool
    transported: bool | None
    m: Fraction | None
    q: FieldElement
    relative_poly: RelativePoly | None = None
    obstruction: K0Obstruction | None = None


# -- roots in abstract fields ----------------------------------------------------


def _is_root(mu: Sequence[Fraction], x: FieldElement) -> bool:
    return x.field.zero + P.evaluate(mu, x) == 0


def _quadratic_roots(mu: Sequence[Fraction], field: NumberField) -> list[FieldElement]:
    c, b, a = (Fraction(x) for x in mu)
    disc = field.rational(b * b - 4 * a * c)
    root = nf_sqrt(disc)
    if root is None:
        return []
    candidates = [(root - b) / (2 * a), (-root - b) / (2 * a)]
    out: list[FieldElement] = []
    for x in candidates:
        if x not in out:
            out.append(x)
    return out


# Polynomials over a NumberField, low to high, with [] for zero.
KPoly = list[FieldElement]


def _ktrim(p: Sequence[FieldElement]) -> KPoly:
    out = list(p)
    while out and out[-1].is_zero():
        out.pop()
    return out


def _kmul(p: KPoly, q: KPoly) -> KPoly:
    if not p or not q:
        return []
    out = [p[0].field.zero] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return _ktrim(out)


def _krem(p: KPoly, q: KPoly) -> KPoly:
    r = _ktrim(p)
    lead = q[-1]
    while len(r) >= len(q):
        c = r[-1] / lead
        shift = len(r) - len(q)
        for j, b in enumerate(q):
            r[shift + j] = r[shift + j] - c * b
        r = _ktrim(r[:-1])
    return r


def _kgcd(p: KPoly, q: KPoly) -> KPoly:
    p, q = _ktrim(p), _ktrim(q)
    while q:
        p, q = q, _krem(p, q)
    return [c / p[-1] for c in p]


def _shifted(mu: Sequence[Fraction], field: NumberField, s: int) -> KPoly:
    """mu(y - s*g) over the field."""
    step = [-(field.gen * s), field.one]
    acc: KPoly = []
    for c in reversed(mu):
        acc = _kmul(acc, step)
        if acc:
            acc[0] = acc[0] + c
        else:
            acc = [field.rational(c)]
    return _ktrim(acc)


def _shifted_norm(mu: Sequence[Fraction], field: NumberField, s: int) -> sympy.Poly:
    """Res_t(minpoly(t), mu(y - s*t)), a rational polynomial in y."""
    t, y = sympy.symbols("t y")
    f = sum(sympy.Rational(c.numerator, c.denominator) * t ** i for i, c in enumerate(field.minpoly))
    g = sum(sympy.Rational(c.numerator, c.denominator) * (y - s * t) ** i for i, c in enumerate(mu))
    return sympy.Poly(sympy.resultant(f, g, t), y, domain=sympy.QQ)


def _shifts():
    for s in range(1, MAX_SHIFT + 1):
        yield s
        yield -s


def _roots_by_norm(mu: Sequence[Fraction], field: NumberField) -> list[FieldElement]:
    """Roots from the linear factors of mu over the field.

    For a shift s with squarefree norm N(y) = Res_t(minpoly(t), mu(y - s*t)),
    the linear factors y - z of mu(y - s*g) match the rational factors of N of
    degree [K:Q], and z is recovered as a gcd over K.
    """
    n = field.degree
    for s in _shifts():
        norm = _shifted_norm(mu, field, s)
        if not norm.is_sqf:
            logger.debug("norm for shift %d is not squarefree", s)
            continue
        shifted = _shifted(mu, field, s)
        found: list[FieldElement] = []
        for h, _ in P.factor(P.from_sympy(norm)):
            if P.degree(h) != n:
                continue
            g = _kgcd([field.rational(c) for c in h], shifted)
            if len(g) != 2:
                raise CertificateFailure(f"Factor {h} of the norm does not give a linear factor over {field.name}")
            x = -g[0] - field.gen * s
            if not _is_root(mu, x):
                raise CertificateFailure(f"{x.coeffs} is not a root of {tuple(mu)}")
            if x not in found:
                found.append(x)
        return found
    raise UnsupportedDegree(f"No squarefree norm for shifts up to {MAX_SHIFT} over {field.name}")


def roots_in_field(mu: Sequence[Fraction], field: NumberField) -> list[FieldElement]:
    """All roots in ``field`` of the irreducible rational polynomial ``mu``."""
    mu = P.monic(P.trim(mu))
    deg = P.degree(mu)
    if deg == 1:
        return [field.rational(-mu[0])]
    if deg > field.degree or field.degree % deg:
        return []
    if deg == 2:
        return _quadratic_roots(mu, field)
    return _roots_by_norm(mu, field)


def _matrix_poly(coeffs: Sequence[Fraction], m: Matrix) -> Matrix:
    r = len(m)
    result = tuple(tuple(Fraction(0) for _ in range(r)) for _ in range(r))
    for c in reversed(coeffs):
        result = linalg.matmul(result, m)
        result = tuple(
            tuple(x + (c if i == j else 0) for j, x in enumerate(row)) for i, row in enumerate(result)
        )
    return result


def _field_of(classification: EndoClassification, name: str) -> NumberField:
    return NumberField.abstract(classification.primitive_minpoly, name=name)


def _k0_field_of(classification: EndoClassification, name: str) -> NumberField:
    return NumberField.abstract(classification.k0_minpoly, name=name)


def _mutually_embed(a: Sequence[Fraction], fa: NumberField, b: Sequence[Fraction], fb: NumberField) -> bool:
    if P.degree(a) != P.degree(b):
        return False
    return bool(roots_in_field(a, fb)) and bool(roots_in_field(b, fa))


# -- fibers ---------------------------------------------------------------------


def fiber_structure(family: BrilliantFamily, point: PeriodPoint) -> K3HodgeStructure:
    """(T_t, sigma_t) with the restricted form, sigma_t in T_t coordinates."""
    basis = transcendental_of_point(point).basis
    gram = family.extended.restrict(basis)
    period = coordinates_in_basis(basis, point.sigma)
    return validate_period(QuadLattice(gram), point.field, period)


def _complement_pairing(family: BrilliantFamily, point: PeriodPoint) -> Fraction | None:
    """m = (l.l') for the primitive generator l' of T_t-perp with nonnegative l-coordinate."""
    if family.d == 0:
        return None
    complement = orthogonal_complement(transcendental_of_point(point))
    if complement.dim != 1:
        return None
    v = linalg.primitive_integral(complement.basis[0])
    if v[-1] < 0:
        v = linalg.vec_scale(Fraction(-1), v)
    return family.extended.pair(family.ell, v)


def _transport_certificate(
    family: BrilliantFamily,
    point: PeriodPoint,
    base_algebra: HodgeEndoAlgebra,
    fiber_algebra: HodgeEndoAlgebra,
) -> bool:
    """P X P^-1 lies in the base algebra for every fiber endomorphism X (d = 0)."""
    matrix = projection_to_base(family, point).matrix
    inv = linalg.inverse(matrix)
    for x in fiber_algebra.basis:
        moved = linalg.matmul(linalg.matmul(matrix, x), inv)
        if base_algebra.coordinates(moved) is None:
            return False
    return fiber_algebra.dim == base_algebra.dim


def _k0_obstruction(
    family: BrilliantFamily,
    point: PeriodPoint,
    base_cls: EndoClassification,
    fiber: K3HodgeStructure,
    fiber_algebra: HodgeEndoAlgebra,
) -> K0Obstruction:
    """Move the K0 generator to T_t and measure how far it is from a fiber endomorphism."""
    matrix = projection_to_base(family, point).matrix
    moved = linalg.matmul(linalg.matmul(linalg.inverse(matrix), base_cls.k0_primitive), matrix)
    gram = fiber.lattice.gram
    left = linalg.matmul(gram, moved)
    right = linalg.matmul(linalg.transpose(moved), gram)
    defect = [[a - b for a, b in zip(u, v)] for u, v in zip(left, right)]
    obstruction = K0Obstruction(
        k0_degree=P.degree(base_cls.k0_minpoly),
        fiber_degree=fiber_algebra.dim,
        keeps_period_line=keeps_period_line(fiber, moved),
        adjoint_defect_rank=linalg.rank(defect),
        transported_is_endomorphism=fiber_algebra.coordinates(moved) is not None,
    )
    if obstruction.transported_is_endomorphism:
        raise CertificateFailure("Transported K0 generator is a fiber endomorphism, yet K0 has no root there")
    return obstruction


def verify_cm_propagation(
family: BrilliantFamily, point: PeriodPoint) -> PropagationReport:
    base = family.base
    base_algebra = endo_algebra(base)
    base_cls = classify_endo(base, base_algebra)
    if not base_cls.is_cm_hodge:
        raise BaseNotCM(f"Base endomorphism field is {base_cls.kind.value} of degree {base_cls.degree}")
    if not nl_test(family, point):
        raise NotNLPoint("CM propagation is only claimed on the Noether-Lefschetz locus")

    fiber = fiber_structure(family, point)
    fiber_algebra = endo_algebra(fiber)
    fiber_cls = classify_endo(fiber, fiber_algebra)
    fiber_field = _field_of(fiber_cls, "K(sigma_t)")

    roots = roots_in_field(base_cls.k0_minpoly, fiber_field)
    k0_image = k0_matrix = obstruction = None
    if roots:
        k0_image = roots[0].coeffs
        k0_matrix = _matrix_poly(k0_image, fiber_cls.primitive)
        if not linalg.is_zero([x for row in _matrix_poly(base_cls.k0_minpoly, k0_matrix) for x in row]):
            raise CertificateFailure("Image of K0 does not satisfy its minimal polynomial")
    else:
        obstruction = _k0_obstruction(family, point, base_cls, fiber, fiber_algebra)
        logger.warning(
            "K0 %s has no image in the fiber field %s; transported generator has adjoint defect of rank %d",
            base_cls.k0_minpoly, fiber_cls.primitive_minpoly, obstruction.adjoint_defect_rank,
        )

    k0_iso = _mutually_embed(
        base_cls.k0_minpoly, _k0_field_of(base_cls, "K0(sigma0)"),
        fiber_cls.k0_minpoly, _k0_field_of(fiber_cls, "K0(sigma_t)"),
    )
    full_iso = _mutually_embed(
        base_cls.primitive_minpoly, _field_of(base_cls, "K(sigma0)"),
        fiber_cls.primitive_minpoly, fiber_field,
    )
    transported = None
    if family.d == 0:
        transported = _transport_certificate(family, point, base_algebra, fiber_algebra)

    report = PropagationReport(
        base_classification=base_cls,
        fiber_classification=fiber_cls,
        fiber=fiber,
        fiber_algebra=fiber_algebra,
        k0_embeds=bool(roots),
        k0_image=k0_image,
        k0_matrix=k0_matrix,
        fields_k0_isomorphic=k0_iso,
        fields_isomorphic=full_iso,
        transported=transported,
        m=_complement_pairing(family, point),
        q=base.q(),
        obstruction=obstruction,
    )
    logger.info(
        "Fiber over %s: %s of degree %d, K0 isomorphic %s, fields isomorphic %s",
        point.field.name, fiber_cls.kind.value, fiber_cls.degree, k0_iso, full_iso,
    )
    if obstruction is not None:
        return report
    return replace(report, relative_poly=relative_minpoly(report))


def relative_minpoly(report: PropagationReport) -> RelativePoly | None:
    """Minimal polynomial of the fiber primitive element over the embedded K0.

    None means the fiber field is the image of K0 itself.
    """
    if not report.k0_embeds or report.k0_image is None:
        raise EmbeddingMissing("K0 has no image in the fiber field")
    fiber_cls = report.fiber_classification
    k0_mu = report.base_classification.k0_minpoly
    field = _field_of(fiber_cls, "K(sigma_t)")
    k = P.degree(k0_mu)
    if field.degree == k:
        logger.warning("Fiber field coincides with the image of K0")
        return None

    z = field.element(report.k0_image)
    theta = field.gen
    powers = [z ** j for j in range(k)]
    columns = [(p * theta).coeffs for p in powers] + [p.coeffs for p in powers]
    rhs = tuple(-x for x in (theta * theta).coeffs)
    solution = linalg.solve(linalg.transpose(columns), rhs)
    if solution is None:
        raise CertificateFailure(f"Fiber primitive element has degree > 2 over K0 (degree {field.degree})")
    gamma, delta = tuple(solution[:k]), tuple(solution[k:])

    k0 = NumberField.abstract(k0_mu, name="K0")
    g, d = k0.element(gamma), k0.element(delta)
    disc = g * g - d * 4
    disc_mu = disc.minpoly()
    negative = (
        P.count_real_roots(disc_mu, None, Fraction(0)) == P.degree(disc_mu)
        and P.evaluate(disc_mu, Fraction(0)) != 0
    )
    if fiber_cls.kind is EndoKind.CM and not negative:
        raise CertificateFailure("Relative discriminant of a CM fiber is not totally negative")
    return RelativePoly(
        k0_minpoly=tuple(k0_mu),
        z=tuple(report.k0_image),
        gamma=gamma,
        delta=delta,
        discriminant_minpoly=disc_mu,
        totally_negative=negative,
    )
