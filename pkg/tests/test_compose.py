"""Tests for two-class families, connector curves and transport to the Brauer line."""

from fractions import Fraction

import pytest

from hodgelab.core.brilliant import DomainClass, base_point, classify_domain, equator_test, is_brilliant, nl_test
from hodgelab.core.compose import (
    check_connector,
    connector_from_nl,
    curve_meets_brilliant,
    dwork_to_brauer,
    equator_flow,
    lift_point,
    make_two_class,
    nl_specialization,
    transport_to_brauer,
    twistor_to_brauer,
)
from hodgelab.core.errors import (
    InSpanOfClasses,
    NonPositiveD,
    NotPositiveSquare,
    NotPositiveWithF,
    PointIsSigmaZero,
    SOutOfRange,
)

E1_L1 = (1, 0, 1, 0)
DWORK_CONNECTOR = (1, 0, 3, 2)
CM4_E1 = (1, 0, 0, 0, 3, 0)
CM4_DWORK = (1, 0, 0, 0, 3, 2)


def test_two_class_family(tc8):
    assert tc8.signature().as_tuple() == (3, 1, 0)
    assert tc8.pair(tc8.f, tc8.f) == 0
    assert tc8.class_square(1, 0) == 8
    assert tc8.class_square(0, 1) == -8
    assert tc8.class_square(1, 1) == 0
    assert classify_domain(tc8.one_class(1, 1)) is DomainClass.BRAUER_TWO_LINES


def test_two_class_needs_positive_d(fermat):
    with pytest.raises(NonPositiveD):
        make_two_class(fermat.structure, 0)


def test_check_connector(tc8):
    connector = check_connector(tc8, E1_L1)
    assert connector.square == 16
    assert connector.f_pairing == 8
    assert connector.t_part == (1, 0)
    with pytest.raises(InSpanOfClasses):
        check_connector(tc8, (0, 0, 1, 0))
    with pytest.raises(NotPositiveSquare):
        check_connector(tc8, (1, 0, 0, 1))
    with pytest.raises(NotPositiveWithF):
        check_connector(tc8, (1, 0, -1, 0))
    with pytest.raises(ValueError, match="entries"):
        check_connector(tc8, (1, 0, 1))


def test_curve_meets_twistor_family(tc8):
    result = curve_meets_brilliant(tc8, E1_L1, 1, 0)
    assert result.family.d == 8
    assert len(result.points) == 2
    assert result.discarded == 0
    assert result.trivial is None
    for point in result.points:
        c = point.c
        assert point.field.degree == 4
        assert c * c - c * 4 - 4 == 0
        assert point.b == -(c + 1)
        assert tc8.pair(lift_point(tc8, point, 1, 0), E1_L1).is_zero()


def test_curve_meets_brauer_line(tc8):
    result = curve_meets_brilliant(tc8, E1_L1, 1, 1)
    assert result.family.d == 0
    assert len(result.points) == 1
    point = result.points[0]
    assert point.c == -1
    assert point.b == 0
    assert point.field is tc8.base.field


def test_curve_outside_dwork_domain_is_discarded(tc8):
    result = curve_meets_brilliant(tc8, E1_L1, 0, 1)
    assert result.points == ()
    assert result.discarded == 2


def test_curve_meets_dwork_family(tc8):
    result = curve_meets_brilliant(tc8, DWORK_CONNECTOR, 0, 1)
    assert result.family.d == -8
    assert len(result.points) == 2
    for point in result.points:
        c = point.c
        assert c * c - c * 8 + 4 == 0
        assert point.b == c * 2 - 1


def test_twistor_points_transport_to_the_same_brauer_class(tc8):
    result = curve_meets_brilliant(tc8, E1_L1, 1, 0)
    for point in result.points:
        transport = twistor_to_brauer(tc8, point)
        assert transport.certified
        assert transport.connector.vector == E1_L1
        assert transport.bfield.b == (Fraction(-1, 8), 0)
        assert transport.bfield.order == 8
        assert transport.point.c == -1


def test_brauer_point_connector(tc8):
    point = curve_meets_brilliant(tc8, E1_L1, 1, 1).points[0]
    connector = connector_from_nl(tc8, 1, 1, point)
    assert connector.vector == E1_L1
    transport = transport_to_brauer(tc8, point, 1, 1)
    assert transport.bfield.b == (Fraction(-1, 8), 0)


def test_dwork_transport(tc8):
    point = curve_meets_brilliant(tc8, DWORK_CONNECTOR, 0, 1).points[0]
    transport = dwork_to_brauer(tc8, point)
    assert transport.certified
    assert transport.connector.vector == (-1, 0, 2, -2)
    assert transport.bfield.b == (Fraction(1, 32), 0)
    assert transport.bfield.order == 32


def test_connector_needs_a_point_other_than_sigma0(tc8):
    with pytest.raises(PointIsSigmaZero):
        connector_from_nl(tc8, 1, 0, base_point(tc8.one_class(1, 0)))


def test_connector_needs_matching_family(tc8):
    point = curve_meets_brilliant(tc8, E1_L1, 1, 1).points[0]
    with pytest.raises(ValueError, match="d = 0"):
        connector_from_nl(tc8, 1, 0, point)


def _phi(tc):
    """g + g^4 = (sqrt(5) - 1)/2 in Q(zeta5)."""
    return tc.base.field.element([-1, 0, -1, -1])


def test_cm4_twistor_intersection(tc_half):
    phi = _phi(tc_half)
    result = curve_meets_brilliant(tc_half, CM4_E1, 1, 0)
    assert result.family.d == Fraction(1, 2)
    assert len(result.points) == 2
    assert result.discarded == 0
    for point in result.points:
        c = point.c
        assert point.field.degree == 8
        assert c * c - c * 30 - point.embed(phi) * 100 == 0
        assert point.b * point.embed(phi) * 10 == -(c * 3) - point.embed(phi) * 10


def test_cm4_brauer_intersection(tc_half):
    phi = _phi(tc_half)
    result = curve_meets_brilliant(tc_half, CM4_E1, 1, 1)
    assert result.family.d == 0
    assert len(result.points) == 1
    point = result.points[0]
    assert point.field is tc_half.base.field
    assert point.b == 0
    assert point.c == phi * Fraction(-10, 3)


def test_cm4_every_dwork_candidate_is_discarded(tc_half):
    # m = 0 forces |b| = 1 and (sigma.conj sigma) = 0 at both roots
    result = curve_meets_brilliant(tc_half, CM4_E1, 0, 1)
    assert result.family.d == Fraction(-1, 2)
    assert result.points == ()
    assert result.discarded == 2
    assert result.trivial is None


def test_cm4_dwork_points_over_the_base_field(tc_half):
    phi = _phi(tc_half)
    result = curve_meets_brilliant(tc_half, CM4_DWORK, 0, 1)
    assert len(result.points) == 2
    assert result.discarded == 0
    expected = [phi * 10 + 10, 10 - phi * 10]
    assert result.points[0].c != result.points[1].c
    assert all(point.c in expected for point in result.points)
    for point in result.points:
        assert point.field is tc_half.base.field
        assert point.b * phi * 5 == point.c - phi * 5
        assert is_brilliant(result.family, point)


CM4_PAIRS = [
    (CM4_E1, (1, 0)),
    (CM4_E1, (1, 1)),
    (CM4_E1, (2, 1)),
    (CM4_E1, (1, 2)),
    (CM4_E1, (0, 1)),
    (CM4_DWORK, (1, 0)),
    (CM4_DWORK, (1, 1)),
    (CM4_DWORK, (2, 1)),
    (CM4_DWORK, (1, 2)),
    (CM4_DWORK, (0, 1)),
]


@pytest.mark.parametrize("connector,ell", CM4_PAIRS)
def test_cm4_intersections_are_nl(tc_half, connector, ell):
    c1, c2 = ell
    result = curve_meets_brilliant(tc_half, connector, c1, c2)
    d_l = tc_half.class_square(c1, c2)
    assert result.family.d == d_l
    assert 1 <= len(result.points) + result.discarded <= 2
    if d_l >= 0:
        assert result.discarded == 0
        assert result.points
    for point in result.points:
        assert tc_half.pair(lift_point(tc_half, point, c1, c2), connector).is_zero()
        assert nl_test(result.family, point)
        if d_l <= 0:
            assert is_brilliant(result.family, point)


EQUATOR_TAUS = [0, Fraction(1, 3), Fraction(1, 2), 1, 2, Fraction(-1, 2), 3, Fraction(-5, 4)]


@pytest.mark.parametrize("tau", EQUATOR_TAUS)
@pytest.mark.parametrize("name", ["tc8", "tc_half"])
def test_equator_flow_shrinks(name, tau, request):
    family = request.getfixturevalue(name)
    flow = [equator_flow(family, 1 - Fraction(1, 2 ** k), tau) for k in range(1, 21)]
    for earlier, later in zip(flow, flow[1:]):
        assert later.upper < earlier.lower
    for step in flow:
        assert step.identities_hold
        assert step.point_valid
        assert step.closed_form
        assert step.lower <= step.upper
    assert flow[-1].upper < Fraction(1, 1000)


def test_equator_point_is_built_on_the_flow(tc_half):
    s = Fraction(1, 2)
    step = equator_flow(tc_half, s, Fraction(1, 3))
    one = tc_half.one_class(1, s)
    assert step.point.family.d == one.d == Fraction(3, 8)
    assert equator_test(one, step.point)
    sigma = lift_point(tc_half, step.point, 1, s)
    assert tc_half.pair(sigma, sigma).is_zero()
    # (1 - s)(3 + s)/4 = 7/16
    assert step.lower ** 2 <= Fraction(7, 16) <= step.upper ** 2


def test_equator_start_distance(tc8):
    step = equator_flow(tc8, 0, 0)
    assert step.lower ** 2 <= Fraction(3, 4) <= step.upper ** 2
    assert step.upper - step.lower < Fraction(1, 2 ** 40)


def test_equator_flow_rejects_s_outside_range(tc8):
    with pytest.raises(SOutOfRange):
        equator_flow(tc8, 1, 0)
    with pytest.raises(SOutOfRange):
        equator_flow(tc8, Fraction(-1, 2), 0)


def test_nl_specialization(tc8):
    seen = []
    trace = nl_specialization(tc8, E1_L1, [0, 1], progress=seen.append)
    assert seen == [0, 1]
    assert [row.s for row in trace.rows] == [0, 1]
    assert all(all(row.nl_flags) for row in trace.rows)
    assert trace.rows[0].bfield is None
    assert trace.terminal.b == (Fraction(-1, 8), 0)
    assert trace.terminal.order == 8


def test_nl_specialization_on_cm4(tc_half):
    trace = nl_specialization(tc_half, CM4_E1, [0, Fraction(1, 2), 1])
    assert [len(row.intersection.points) for row in trace.rows] == [2, 2, 1]
    assert all(all(row.nl_flags) for row in trace.rows)
    assert trace.rows[1].intersection.family.d == Fraction(3, 8)
    assert trace.terminal.b == (Fraction(-2, 3), 0, 0, 0)
    assert trace.terminal.order is not None
