from fractions import Fraction

import pytest

from sicstark.quadfield import (FieldError, QuadRational, enumerate_ideals, enumerate_prime_ideals,
                                make_field, minimal_congruent_unit, narrow_class_number, squarefree_part)
from sicstark.lfun import class_counts
from sicstark.rayclass import build_ray_class_group


@pytest.mark.parametrize("d,Delta,D,eps,h", [
    (5, 12, 3, (2, 1), 1),
    (11, 96, 6, (5, 2), 1),
    (17, 252, 7, (8, 3), 1),
    (23, 480, 30, (11, 2), 2),
])
def test_field_data(d, Delta, D, eps, h):
    ctx = make_field(d)
    assert (ctx.Delta, ctx.D, ctx.class_number) == (Delta, D, h)
    assert ctx.fundamental_unit == QuadRational(*eps, D)
    assert ctx.zauner_unit == ctx.fundamental_unit  # fundamental in all four cases


def test_zauner_unit_in_delta_basis():
    ctx = make_field(11)
    # ((d-1) + sqrt(Delta))/2 with sqrt(96) = 4 sqrt(6)
    assert ctx.zauner_unit == QuadRational(5, 2, 6)


@pytest.mark.parametrize("d", [5, 11, 17, 23, 29, 41])
def test_minimal_congruent_unit_is_cube(d):
    ctx = make_field(d)
    assert minimal_congruent_unit(ctx) == ctx.zauner_unit ** 3


def test_cube_d5_exact():
    ctx = make_field(5)
    cube = ctx.zauner_unit ** 3
    assert cube == QuadRational(26, 15, 3)
    assert 26 % 5 == 1 and 15 % 5 == 0


def test_cube_d11_exact():
    ctx = make_field(11)
    cube = ctx.zauner_unit ** 3
    assert cube == QuadRational(485, 198, 6)
    assert ctx.reduce_mod_d(cube) == (1, 0)


@pytest.mark.parametrize("d", [7, 9, 13, 4])
def test_rejects_bad_dimensions(d):
    with pytest.raises(FieldError):
        make_field(d)


@pytest.mark.parametrize("disc,hplus", [(316, 6), (328, 4), (60, 4), (229, 3), (376, 2), (12, 2), (5, 1)])
def test_narrow_class_numbers(disc, hplus):
    assert narrow_class_number(disc) == hplus


def test_squarefree_part():
    assert squarefree_part(480) == (30, 4)
    assert squarefree_part(252) == (7, 6)


def test_quad_arithmetic():
    a = QuadRational(Fraction(1, 2), 3, 7)
    b = QuadRational(2, -1, 7)
    assert (a * b) / b == a
    assert (a + b) - b == a
    assert a.norm() == Fraction(1, 4) - 63
    assert a.conj().conj() == a
    with pytest.raises(ValueError):
        a + QuadRational(1, 1, 3)


def test_small_ideals_d5():
    ctx = make_field(5)
    ideals = enumerate_ideals(ctx, 10)
    assert len(ideals[2]) == 1          # 2 ramifies in Q(sqrt3)
    assert 11 not in ideals and 25 not in ideals
    assert len(enumerate_ideals(ctx, 11)[11]) == 2   # 11 splits
    primes = enumerate_prime_ideals(ctx, 25)
    assert any(P.norm == 25 for P in primes)         # 5 is inert


def test_ideal_count_norm4_two_ways():
    ctx = make_field(5)
    G = build_ray_class_group(ctx)
    by_ideals = enumerate_ideals(ctx, 4)
    assert len(by_ideals[4]) == 1
    oracle = class_counts(ctx, G, 4, method="elements").counts
    assert int(oracle[:, 4].sum()) == 1


def test_ideal_totals_d11_match_oracle():
    ctx = make_field(11)
    G = build_ray_class_group(ctx)
    a = class_counts(ctx, G, 1000)
    b = class_counts(ctx, G, 1000, method="elements")
    assert (a.total() == b.total()).all()
