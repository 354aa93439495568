"""Tests for CM propagation to NL fibers."""

from fractions import Fraction

import pytest

from hodgelab.core.brilliant import brauer_period_from_B, make_period
from hodgelab.core.cmprop import fiber_structure, roots_in_field, verify_cm_propagation
from hodgelab.core.compose import curve_meets_brilliant
from hodgelab.core.exactmath import NumberField
from hodgelab.core.hodge import EndoKind

E1_L1 = (1, 0, 1, 0)
DWORK_CONNECTOR = (1, 0, 3, 2)
CM4_E1 = (1, 0, 0, 0, 3, 0)
CM4_DWORK = (1, 0, 0, 0, 3, 2)


def test_roots_in_field_quadratic(qi, cm4):
    roots = roots_in_field((1, 0, 1), qi)
    assert len(roots) == 2
    assert all(r * r == -1 for r in roots)
    assert roots_in_field((-2, 0, 1), qi) == []
    golden = roots_in_field((-1, 1, 1), cm4.structure.field)
    assert len(golden) == 2


def test_roots_in_field_by_norm(cm4):
    k = cm4.structure.field
    cyclotomic = (1, 1, 1, 1, 1)
    roots = roots_in_field(cyclotomic, k)
    assert len(roots) == 4
    assert k.gen in roots
    for r in roots:
        assert r ** 5 == 1


def test_roots_with_huge_denominators():
    k = NumberField.abstract((-2, 0, 0, 1), name="Q(2^(1/3))")
    assert roots_in_field((Fraction(-2, 10 ** 60), 0, 0, 1), k) == [k.element([0, Fraction(1, 10 ** 20)])]
    assert roots_in_field((-3, 0, 0, 1), k) == []


def test_roots_in_field_degree_mismatch(qi):
    assert roots_in_field((1, 1, 1, 1, 1), qi) == []
    assert roots_in_field((Fraction(-3, 2), 1), qi) == [qi.rational(Fraction(3, 2))]


def test_fiber_structure(fermat):
    family = fermat.family("d0")
    point = brauer_period_from_B(family, (Fraction(1, 2), 0))
    fiber = fiber_structure(family, point)
    assert fiber.rank == 2
    assert fiber.q() == 16


def test_propagation_on_brauer_line(fermat):
    family = fermat.family("d0")
    point = brauer_period_from_B(family, (Fraction(1, 2), 0))
    report = verify_cm_propagation(family, point)
    assert report.base_classification.kind is EndoKind.CM
    assert report.fiber_classification.kind is EndoKind.CM
    assert report.fiber_classification.is_cm_hodge
    assert report.k0_embeds
    assert report.fields_k0_isomorphic
    assert report.fields_isomorphic
    assert report.transported is True
    assert report.m is None
    assert report.q == 16
    assert report.relative_poly is not None
    assert report.relative_poly.totally_negative
    assert report.obstruction is None


def test_propagation_at_sigma0(fermat):
    family = fermat.family("d8")
    report = verify_cm_propagation(family, make_period(family, 1, 0, 0))
    assert report.fiber_classification.kind is EndoKind.CM
    assert report.fields_k0_isomorphic
    assert report.transported is None
    assert report.m == 8


FERMAT_PAIRS = [
    (E1_L1, (1, 0)),
    (E1_L1, (1, 1)),
    (DWORK_CONNECTOR, (0, 1)),
    (DWORK_CONNECTOR, (1, 0)),
    ((0, 1, 1, 0), (1, 0)),
    ((1, 1, 1, 0), (1, 0)),
    ((0, 1, 2, 1), (1, 0)),
    ((1, 0, 5, 3), (0, 1)),
]


@pytest.mark.parametrize("connector,ell", FERMAT_PAIRS)
def test_cm_propagates_at_fermat_intersections(tc8, connector, ell):
    result = curve_meets_brilliant(tc8, connector, *ell)
    assert result.points
    for point in result.points:
        assert not point.is_base_point()
        report = verify_cm_propagation(result.family, point)
        assert report.fiber_classification.is_cm_hodge
        assert report.k0_embeds
        assert report.fields_k0_isomorphic
        assert report.obstruction is None
        if result.family.d == 0:
            assert report.transported
            assert report.fields_isomorphic
        else:
            assert report.m != 0


def test_cm_propagates_on_the_cm4_brauer_line(tc_half):
    point = curve_meets_brilliant(tc_half, CM4_E1, 1, 1).points[0]
    family = point.family
    assert family.d == 0
    report = verify_cm_propagation(family, point)
    assert report.fiber_classification.is_cm_hodge
    assert report.fiber_classification.degree == 4
    assert report.k0_embeds
    assert report.transported
    assert report.fields_isomorphic
    assert report.relative_poly is not None


@pytest.mark.parametrize("connector,ell", [(CM4_DWORK, (0, 1)), (CM4_DWORK, (1, 0)), (CM4_E1, (2, 1))])
def test_k0_obstruction_at_cm4_intersections(tc_half, connector, ell):
    result = curve_meets_brilliant(tc_half, connector, *ell)
    assert result.family.d != 0
    assert result.points
    for point in result.points:
        report = verify_cm_propagation(result.family, point)
        assert report.base_classification.is_cm_hodge
        assert not report.k0_embeds
        assert not report.fields_k0_isomorphic
        assert report.k0_image is None
        assert report.relative_poly is None
        assert report.m != 0
        obstruction = report.obstruction
        assert obstruction.k0_degree == 2
        assert obstruction.fiber_degree == report.fiber_algebra.dim
        assert obstruction.keeps_period_line
        assert obstruction.adjoint_defect_rank == 2
        assert not obstruction.transported_is_endomorphism


def test_cm4_twistor_fiber_has_only_rational_endomorphisms(tc_half):
    result = curve_meets_brilliant(tc_half, CM4_E1, 1, 0)
    for point in result.points:
        report = verify_cm_propagation(result.family, point)
        assert report.fiber_classification.kind is EndoKind.RM
        assert report.fiber_classification.degree == 1
        assert not report.fiber_classification.is_cm_hodge
        assert report.obstruction.fiber_degree == 1
