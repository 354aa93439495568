"""Tests for quadratic lattices, signatures and saturation."""

from fractions import Fraction

import pytest

from hodgelab.core.errors import NonIntegralClass, NonIsotropicClass, NonSymmetricGram
from hodgelab.core.lattice import (
    QuadLattice,
    QuotientElement,
    Sublattice,
    bfield_shift,
    extend_by_class,
    extend_by_classes,
    is_isometry,
    orthogonal_complement,
    quotient_order,
    radical,
    saturate,
    saturation_index,
    signature,
)


def test_gram_must_be_symmetric():
    with pytest.raises(NonSymmetricGram, match="differs"):
        QuadLattice(((1, 2), (3, 1)))
    with pytest.raises(NonSymmetricGram):
        QuadLattice(((1, 2),))


def test_signatures():
    assert signature(QuadLattice.diagonal(8, 8, -2)).as_tuple() == (2, 1, 0)
    assert signature(QuadLattice(((0, 1), (1, 0)))).as_tuple() == (1, 1, 0)
    assert signature(QuadLattice.diagonal(8, 8, 0)).as_tuple() == (2, 0, 1)
    assert signature(QuadLattice(((0, 0), (0, 0)))).as_tuple() == (0, 0, 2)
    assert str(signature(QuadLattice.diagonal(1, -1))) == "(1, 1, 0)"


def test_signature_of_cm4_gram(cm4):
    assert signature(cm4.structure.lattice).as_tuple() == (2, 2, 0)


def test_orthogonal_complement_and_radical():
    lattice = QuadLattice.diagonal(1, 1, 1)
    sub = Sublattice.span(lattice, [(1, 1, 0)])
    complement = orthogonal_complement(sub)
    assert complement.dim == 2
    assert all(lattice.pair(v, (1, 1, 0)) == 0 for v in complement.basis)
    assert radical(QuadLattice.diagonal(8, 8, 0)).basis == ((0, 0, 1),)


def test_saturation():
    lattice = QuadLattice.diagonal(1, 1)
    sub = Sublattice(lattice, ((2, 0),))
    assert saturate(sub).basis == ((1, 0),)
    assert saturation_index(sub) == 2
    with pytest.raises(NonIntegralClass):
        saturation_index(Sublattice(lattice, ((Fraction(1, 2), 0),)))


def test_extensions():
    base = QuadLattice.diagonal(8, 8)
    assert extend_by_class(base, 0).gram == QuadLattice.diagonal(8, 8, 0).gram
    assert extend_by_classes(base, (8, -8)).gram == QuadLattice.diagonal(8, 8, 8, -8).gram


def test_quotient_elements():
    a = QuotientElement((Fraction(1, 2), Fraction(3, 2)))
    b = QuotientElement((Fraction(-1, 2), Fraction(1, 2)))
    assert a == b
    assert a.reduced == (Fraction(1, 2), Fraction(1, 2))
    assert a.order == 2
    assert (a + b).order == 1
    assert quotient_order((Fraction(-1, 8), Fraction(0))) == 8


def test_bfield_shift_is_isometry():
    extended = QuadLattice.diagonal(8, 8, 0)
    shift = bfield_shift((1, 0), extended)
    assert shift[2] == (8, 0, 1)
    assert is_isometry(shift, extended)
    with pytest.raises(NonIsotropicClass):
        bfield_shift((1, 0), QuadLattice.diagonal(8, 8, 8))
    with pytest.raises(NonIntegralClass):
        bfield_shift((Fraction(1, 2), 0), extended)


def test_is_isometry():
    swap = ((0, 1), (1, 0))
    assert is_isometry(swap, QuadLattice.diagonal(8, 8))
    assert not is_isometry(swap, QuadLattice.diagonal(8, -2))
