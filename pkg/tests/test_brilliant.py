"""Tests for one-class brilliant families, the NL locus and Brauer classes."""

from fractions import Fraction

import pytest

from hodgelab.core.brilliant import (
    DomainClass,
    base_point,
    brauer_order,
    brauer_period_from_B,
    classify_domain,
    equator_point,
    equator_test,
    fB_embedding,
    is_brilliant,
    make_period,
    nl_test,
    nl_test_via_bfield,
    one_one_space,
    projection_to_base,
    recover_bfield,
    transcendental_of_point,
)
from hodgelab.core.errors import NotBrauerType, NotOnConic, NotTwistorType, WrongComponent
from hodgelab.core.lattice import signature


def test_domain_classes(fermat):
    assert classify_domain(fermat.family("d8")) is DomainClass.TWISTOR_SPHERE
    assert classify_domain(fermat.family("d0")) is DomainClass.BRAUER_TWO_LINES
    assert classify_domain(fermat.family("d-4")) is DomainClass.DWORK_TWO_HALF_PLANES
    assert "two lines" in DomainClass.BRAUER_TWO_LINES.description


def test_extended_signatures(fermat):
    assert signature(fermat.family("d8").extended).as_tuple() == (3, 0, 0)
    assert signature(fermat.family("d0").extended).as_tuple() == (2, 0, 1)
    assert signature(fermat.family("d-4").extended).as_tuple() == (2, 1, 0)


def test_base_point_is_brilliant_and_nl(fermat):
    family = fermat.family("d8")
    point = base_point(family)
    assert point.is_base_point()
    assert is_brilliant(family, point)
    assert nl_test(family, point)
    assert one_one_space(family, point).basis == (family.ell,)


def test_make_period_normalizes(fermat, qi):
    family = fermat.family("d0")
    point = make_period(family, 2, 0, 8)
    assert point.a == 1
    assert point.c == 4
    conj_point = make_period(family, 0, qi.gen, qi.gen)
    assert conj_point.a == 0 and conj_point.b == 1 and conj_point.c == 1


def test_make_period_rejects_points_off_the_conic(fermat):
    with pytest.raises(NotOnConic):
        make_period(fermat.family("d8"), 1, 0, 1)


def test_equator_sample(fermat):
    family = fermat.family("d8")
    point = equator_point(family, 0)
    assert point.field is family.field
    assert point.b == 1
    assert point.c * point.c == -4
    assert equator_test(family, point)
    assert not is_brilliant(family, point)
    assert nl_test(family, point)


def test_equator_sample_needs_an_extension(fermat):
    family = fermat.family("d8")
    point = equator_point(family, Fraction(1, 2))
    assert point.field.degree == 4
    assert equator_test(family, point)


def test_equator_only_for_positive_d(fermat):
    with pytest.raises(NotTwistorType):
        equator_test(fermat.family("d0"), base_point(fermat.family("d0")))
    with pytest.raises(NotTwistorType):
        equator_point(fermat.family("d-4"), 0)


def test_brauer_round_trip(fermat):
    family = fermat.family("d0")
    b = (Fraction(1, 2), Fraction(0))
    point = brauer_period_from_B(family, b)
    assert point.c == 4
    recovered = recover_bfield(family, point)
    assert recovered.b == b
    assert recovered.order == 2
    assert recovered.element.reduced == b
    assert brauer_order((Fraction(-1, 8), Fraction(3, 4))) == 8


def test_brauer_point_with_imaginary_c(fermat, qi):
    family = fermat.family("d0")
    point = make_period(family, 1, 0, qi.gen)
    assert nl_test(family, point)
    assert nl_test_via_bfield(family, point)
    assert recover_bfield(family, point).b == (0, Fraction(1, 8))


def test_brauer_operations_need_d_zero(fermat):
    family = fermat.family("d8")
    with pytest.raises(NotBrauerType):
        recover_bfield(family, base_point(family))
    with pytest.raises(NotBrauerType):
        brauer_period_from_B(family, (0, 0))
    with pytest.raises(NotBrauerType):
        nl_test_via_bfield(family, base_point(family))


def test_conjugate_line_point_is_refused(fermat, qi):
    family = fermat.family("d0")
    point = make_period(family, 0, 1, qi.gen)
    with pytest.raises(WrongComponent):
        recover_bfield(family, point)


def test_fb_embedding(fermat):
    family = fermat.family("d0")
    embedding = fB_embedding(family, (Fraction(1, 2), 0))
    assert embedding.image_matches
    assert embedding.isometric
    assert embedding.matrix[2] == (4, 0)


def test_projection_to_base_for_brauer_point(fermat):
    family = fermat.family("d0")
    point = brauer_period_from_B(family, (Fraction(1, 2), 0))
    assert transcendental_of_point(point).basis == ((1, 0, 4), (0, 1, 0))
    cert = projection_to_base(family, point)
    assert cert.bijective
    assert cert.isometry
    assert cert.period_image == "sigma0"
