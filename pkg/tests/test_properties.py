"""Randomized properties: field identities, lattice invariants, NL and Brauer round trips."""

import random
from fractions import Fraction
from itertools import combinations
from math import gcd

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from hodgelab.core import linalg
from hodgelab.core.brilliant import (
    brauer_period_from_B,
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
from hodgelab.core.cmprop import verify_cm_propagation
from hodgelab.core.compose import curve_meets_brilliant
from hodgelab.core.errors import NotPositive
from hodgelab.core.exactmath import nf_quadratic_extension, nf_sign
from hodgelab.core.lattice import (
    QuadLattice,
    Sublattice,
    bfield_shift,
    is_isometry,
    orthogonal_complement,
    saturation_index,
    signature,
)

small = st.integers(min_value=-5, max_value=5)
coeffs4 = st.lists(small, min_size=4, max_size=4)
square4 = st.lists(coeffs4, min_size=4, max_size=4)


def _random_b(rng, rank):
    return tuple(Fraction(rng.randint(-12, 12), rng.randint(1, 9)) for _ in range(rank))


def _random_element(rng, k):
    return k.element([Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(k.degree)])


# -- fields ----------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(coeffs4)
def test_conj_is_an_involution(cm4, coeffs):
    k = cm4.structure.field
    x = k.element(coeffs)
    assert x.conj().conj() == x


@settings(max_examples=40, deadline=None)
@given(coeffs4, coeffs4, coeffs4)
def test_distributive_law(cm4, a, b, c):
    k = cm4.structure.field
    x, y, z = k.element(a), k.element(b), k.element(c)
    assert (x + y) * z == x * z + y * z
    assert (x * y) * z == x * (y * z)


@settings(max_examples=25, deadline=None)
@given(coeffs4, coeffs4)
def test_sign_is_multiplicative_on_real_elements(cm4, a, b):
    k = cm4.structure.field
    x = k.element(a)
    y = k.element(b)
    x, y = x + x.conj(), y + y.conj()
    assert nf_sign(x * y) == nf_sign(x) * nf_sign(y)
    assert nf_sign(x * x) in (0, 1)


# -- lattices --------------------------------------------------------------------


@settings(max_examples=50, deadline=None)
@given(square4)
def test_signature_invariant_under_congruence(cm4, rows):
    p = linalg.as_matrix(rows)
    assume(linalg.det(p) != 0)
    for gram in (cm4.structure.lattice.gram, QuadLattice.diagonal(8, 8, -4, 0).gram):
        moved = linalg.matmul(linalg.matmul(linalg.transpose(p), gram), p)
        assert signature(moved) == signature(gram)


def test_complement_of_random_planes():
    rng = random.Random(5)
    checked = 0
    while checked < 20:
        gram = [[0] * 5 for _ in range(5)]
        for i in range(5):
            for j in range(i, 5):
                gram[i][j] = gram[j][i] = rng.randint(-4, 4)
        if linalg.det(linalg.as_matrix(gram)) == 0:
            continue
        lattice = QuadLattice(linalg.as_matrix(gram))
        vectors = [[rng.randint(-3, 3) for _ in range(5)] for _ in range(2)]
        if linalg.rank(vectors) != 2:
            continue
        sub = Sublattice(lattice, vectors)
        complement = orthogonal_complement(sub)
        assert complement.dim == 3
        for u in sub.basis:
            for w in complement.basis:
                assert lattice.pair(u, w) == 0
        checked += 1


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(min_value=-9, max_value=9), min_size=4, max_size=4), min_size=2, max_size=2))
def test_saturation_index_is_the_minor_gcd(vectors):
    assume(linalg.rank(vectors) == 2)
    lattice = QuadLattice.diagonal(1, 1, 1, 1)
    minors = [
        vectors[0][i] * vectors[1][j] - vectors[0][j] * vectors[1][i]
        for i, j in combinations(range(4), 2)
    ]
    expected = 0
    for m in minors:
        expected = gcd(expected, m)
    assert saturation_index(Sublattice(lattice, vectors)) == expected


def test_bfield_shift_composition(fermat):
    extended = fermat.family("d0").extended
    rng = random.Random(11)
    for _ in range(20):
        b1 = (rng.randint(-9, 9), rng.randint(-9, 9))
        b2 = (rng.randint(-9, 9), rng.randint(-9, 9))
        s1, s2 = bfield_shift(b1, extended), bfield_shift(b2, extended)
        total = bfield_shift((b1[0] + b2[0], b1[1] + b2[1]), extended)
        assert linalg.matmul(s1, s2) == total
        assert is_isometry(s1, extended)
        alpha = (rng.randint(-5, 5), rng.randint(-5, 5), rng.randint(-5, 5))
        image = linalg.matvec(s1, alpha)
        assert image[:2] == tuple(Fraction(x) for x in alpha[:2])
        assert image[2] == 8 * (alpha[0] * b1[0] + alpha[1] * b1[1]) + alpha[2]


# -- Brauer lines ----------------------------------------------------------------


@pytest.mark.parametrize("name", ["fermat", "cm4"])
def test_brauer_round_trip_on_random_fields(name, request):
    loaded = request.getfixturevalue(name)
    family = loaded.family("d0")
    rank = family.rank
    base_gram = family.base.lattice.gram
    rng = random.Random(2024)
    for _ in range(100):
        b = _random_b(rng, rank)
        point = brauer_period_from_B(family, b)
        assert recover_bfield(family, point).b == b
        assert nl_test(family, point)
        embedding = fB_embedding(family, b)
        assert embedding.image_matches and embedding.isometric
        tt = transcendental_of_point(point)
        assert tt.same_space(embedding.image)
        restricted = family.extended.restrict(embedding.image.basis)
        assert signature(restricted) == signature(base_gram)


def test_projection_on_random_brauer_points(fermat):
    family = fermat.family("d0")
    rng = random.Random(7)
    for _ in range(25):
        point = brauer_period_from_B(family, _random_b(rng, 2))
        cert = projection_to_base(family, point)
        assert cert.bijective
        assert cert.isometry
        assert cert.period_image == "sigma0"


def test_one_one_space_constant_along_the_brauer_line(fermat):
    family = fermat.family("d0")
    rng = random.Random(3)
    spaces = [one_one_space(family, brauer_period_from_B(family, _random_b(rng, 2))) for _ in range(10)]
    for space in spaces:
        assert space.contains(family.ell)
        assert space.same_space(spaces[0])


def test_nl_oracles_agree(fermat, qi):
    family = fermat.family("d0")
    ext = nf_quadratic_extension(qi, qi.rational(2))
    rng = random.Random(19)
    inside = outside = 0
    for _ in range(200):
        c = ext.embed(_random_element(rng, qi))
        irrational = rng.random() < 0.5
        if irrational:
            c = c + ext.root * rng.randint(1, 5)
        point = make_period(family, 1, 0, c, embed=ext.embed)
        by_signature = nl_test(family, point)
        assert by_signature == nl_test_via_bfield(family, point)
        assert by_signature is not irrational
        inside += by_signature
        outside += not by_signature
    assert inside and outside


@pytest.mark.parametrize("name,label", [("fermat", "d-4"), ("fermat", "d0"), ("cm4", "d-2"), ("cm4", "d0")])
def test_nonpositive_families_are_brilliant(name, label, request):
    family = request.getfixturevalue(name).family(label)
    q = family.base.q()
    rng = random.Random(31)
    checked = 0
    while checked < 100:
        c = Fraction(rng.randint(-20, 20), rng.randint(1, 6))
        b = q.field.rational(-family.d * c * c) / (2 * q)
        try:
            point = make_period(family, 1, b, c)
        except NotPositive:
            continue
        assert is_brilliant(family, point)
        checked += 1


# -- CM propagation --------------------------------------------------------------


def test_cm_along_cm4_nl_points(cm4, tc_half):
    rng = random.Random(13)
    d0 = cm4.family("d0")
    for _ in range(8):
        report = verify_cm_propagation(d0, brauer_period_from_B(d0, _random_b(rng, 4)))
        assert report.fiber_classification.is_cm_hodge
        assert report.k0_embeds
        assert report.fields_isomorphic
        assert report.transported

    connector = (1, 0, 0, 0, 3, 0)
    checked = 0
    for ell in ((1, 0), (2, 1), (1, 2)):
        result = curve_meets_brilliant(tc_half, connector, *ell)
        for point in result.points:
            assert not point.is_base_point()
            report = verify_cm_propagation(result.family, point)
            assert not report.k0_embeds
            assert report.obstruction.adjoint_defect_rank == 2
            checked += 1
    assert checked == 6
