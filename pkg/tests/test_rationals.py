"""Tests for rational and expression parsing."""

from fractions import Fraction

import pytest

from hodgelab.utils.rationals import (
    format_poly,
    format_rational,
    format_vector,
    parse_class_expression,
    parse_field_coeffs,
    parse_rational,
    parse_rational_list,
)


def test_parse_rational_reduces():
    assert parse_rational("3/6") == Fraction(1, 2)
    assert parse_rational(" -4 ") == Fraction(-4)
    assert parse_rational(7) == Fraction(7)


def test_parse_rational_rejects_floats():
    with pytest.raises(ValueError, match="Not a rational"):
        parse_rational(0.5)
    with pytest.raises(ValueError, match="Not a rational"):
        parse_rational("0.5")


def test_parse_rational_rejects_bool_and_zero_denominator():
    with pytest.raises(ValueError):
        parse_rational(True)
    with pytest.raises(ValueError, match="Zero denominator"):
        parse_rational("1/0")


def test_format_rational():
    assert format_rational(Fraction(-1, 8)) == "-1/8"
    assert format_rational(Fraction(6, 2)) == "3"
    assert format_vector([Fraction(1, 2), Fraction(0)]) == "(1/2, 0)"


def test_parse_rational_list():
    assert parse_rational_list("1/2,0,-3") == (Fraction(1, 2), Fraction(0), Fraction(-3))
    with pytest.raises(ValueError, match="Empty entry"):
        parse_rational_list("1,,2")


def test_format_poly():
    assert format_poly((1, 0, 1)) == "x^2 + 1"
    assert format_poly((0, 1)) == "x"
    assert format_poly((Fraction(-1, 2),)) == "-1/2"
    assert format_poly((-1, 1, 1), "g") == "g^2 + g - 1"
    assert format_poly(()) == "0"


def test_parse_field_coeffs():
    assert parse_field_coeffs("1 + 2*g") == (Fraction(1), Fraction(2))
    assert parse_field_coeffs("i") == (Fraction(0), Fraction(1))
    assert parse_field_coeffs("g^2 - 1/2") == (Fraction(-1, 2), Fraction(0), Fraction(1))
    assert parse_field_coeffs("0") == (Fraction(0),)


def test_parse_field_coeffs_rejects_unknown_symbols():
    with pytest.raises(ValueError, match="Unknown symbol"):
        parse_field_coeffs("h + 1")
    with pytest.raises(ValueError, match="Empty expression"):
        parse_field_coeffs("  ")
    with pytest.raises(ValueError):
        parse_field_coeffs("1/g")


def test_parse_class_expression():
    assert parse_class_expression("e1+l1", 2, 2) == (1, 0, 1, 0)
    assert parse_class_expression("e1 + 3*l1 + 2*l2", 2, 2) == (1, 0, 3, 2)
    assert parse_class_expression("-e2 + l1/2", 2, 1) == (0, -1, Fraction(1, 2))
    assert parse_class_expression("1,0,1,0", 2, 2) == (1, 0, 1, 0)


def test_parse_class_expression_single_extra_alias():
    assert parse_class_expression("e1 - l", 2, 1) == (1, 0, -1)


def test_parse_class_expression_rejects_nonlinear():
    with pytest.raises(ValueError, match="not a linear combination"):
        parse_class_expression("e1 + 1", 2, 2)
    with pytest.raises(ValueError):
        parse_class_expression("e1*l1", 2, 2)
    with pytest.raises(ValueError, match="Expected 4 entries"):
        parse_class_expression("1,0,1", 2, 2)
    with pytest.raises(ValueError, match="Unknown symbol"):
        parse_class_expression("e3", 2, 2)
