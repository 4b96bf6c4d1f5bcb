import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from sqrect.errors import NotInZone, OnDiscontinuity, Terminal
from sqrect.exactnum import make_surd
from sqrect.pet import Param, Point, code_orbit, islands
from sqrect.renorm import (
    Mat2,
    cover,
    first_return,
    incidence_matrix,
    induction_verify,
    induction_zone,
    n_omega,
    period_sequence,
    ratio,
    renorm_step,
    return_times,
    similitude_apply,
    substitution,
)

SQRT2M1 = make_surd(-1, 1, 1, 2)
SQRT3M1 = make_surd(-1, 1, 1, 3)

params = st.builds(
    Param,
    st.fractions(
        min_value=Fraction(1, 40), max_value=Fraction(39, 40), max_denominator=40
    ),
    st.sampled_from([-1, 1]),
)


class TestParameterMap:
    def test_silver_mean_fixed(self):
        p = Param(SQRT2M1, -1)
        assert renorm_step(p) == p

    def test_plus_family_fixed(self):
        p = Param(SQRT3M1, 1)
        assert renorm_step(p) == p

    def test_rational_chain(self):
        p = Param(Fraction(3, 8), -1)
        q1 = renorm_step(p)
        assert q1 == Param(Fraction(2, 3), -1)
        q2 = renorm_step(q1)
        assert q2 == Param(Fraction(1, 2), 1)
        q3 = renorm_step(q2)
        assert q3 == Param(0, -1)
        with pytest.raises(Terminal):
            renorm_step(q3)

    @given(params)
    def test_ratio_expands(self, p):
        assume(p.f(p.theta) != 0)
        assert ratio(p) > 1

    @given(params)
    def test_next_theta_in_range(self, p):
        assume(p.f(p.theta) != 0)
        q = renorm_step(p)
        assert 0 <= q.theta < 1


class TestSimilitude:
    @given(params)
    def test_roundtrip(self, p):
        z = Point(Fraction(1, 3), Fraction(2, 7))
        assert similitude_apply(p, similitude_apply(p, z, "inv"), "fwd") == z

    @given(params)
    def test_contraction_factor(self, p):
        assume(p.f(p.theta) != 0)
        a = similitude_apply(p, Point(0, 0), "inv")
        b = similitude_apply(p, Point(1, 1), "inv")
        r = ratio(p)
        assert abs(float(b.x - a.x)) * float(r) == pytest.approx(1.0, abs=1e-12)

    def test_zone_inside_domain(self):
        p = Param(SQRT2M1, -1)
        c_ind, r_ind = induction_zone(p)
        for rect in (c_ind, r_ind):
            assert 0 <= float(rect.x) and float(rect.x + rect.w) <= float(p.width)
            assert 0 <= float(rect.y) and float(rect.y + rect.h) <= 1


class TestFirstReturn:
    def test_return_times_match_digit(self):
        p = Param(SQRT2M1, -1)  # n = 2
        assert n_omega(p) == 2
        assert return_times(p) == (5, 3)

    def test_plus_return_times(self):
        p = Param(SQRT3M1, 1)  # n = 3 in the plus family
        assert return_times(p) == (3 * (n_omega(p) - 1) + 1, 3)

    def test_outside_zone_raises(self):
        p = Param(SQRT2M1, -1)
        with pytest.raises(NotInZone):
            first_return(p, Point(Fraction(99, 100), Fraction(99, 100)))

    def test_return_lands_in_zone(self):
        p = Param(SQRT2M1, -1)
        c_ind, r_ind = induction_zone(p)
        z = Point(
            c_ind.x + c_ind.w / 3,
            c_ind.y + c_ind.h / 3,
        )
        w, k = first_return(p, z)
        assert k == 5
        assert c_ind.contains(w) or r_ind.contains(w)


class TestInductionVerify:
    def test_exact_mode_zero_error(self):
        rep = induction_verify(Param(SQRT2M1, -1), samples=300, seed=3)
        assert rep.exact and rep.max_error == 0.0

    def test_float_mode_small_error(self):
        rep = induction_verify(Param(0.4142135623730951, -1), samples=300, seed=3)
        assert not rep.exact and rep.max_error <= 1e-9

    def test_rational_parameter(self):
        rep = induction_verify(Param(Fraction(2, 7), 1), samples=300, seed=3)
        assert rep.max_error == 0.0


class TestSubstitutionMatrix:
    @given(params)
    def test_abelianization_is_incidence(self, p):
        assume(p.f(p.theta) != 0)
        assert substitution(p).abelianization() == (
            incidence_matrix(p).m11,
            incidence_matrix(p).m12,
            incidence_matrix(p).m21,
            incidence_matrix(p).m22,
        )

    @given(params)
    def test_determinant_is_eps(self, p):
        assume(p.f(p.theta) != 0)
        assert incidence_matrix(p).det() == p.eps

    @given(params)
    def test_entries_nonnegative(self, p):
        assume(p.f(p.theta) != 0)
        M = incidence_matrix(p)
        assert min(M.m11, M.m12, M.m21, M.m22) >= 0

    def test_period_sequence_silver_mean(self):
        assert period_sequence(Param(SQRT2M1, -1), 3) == [1, 5, 21]

    @given(params, st.integers(2, 6))
    def test_period_sequence_monotone(self, p, k):
        from sqrect.errors import Degenerate

        try:
            ps = period_sequence(p, k)
        except (Terminal, Degenerate):
            assume(False)
        assert ps == sorted(ps)


class TestCodingCommutation:
    @pytest.mark.parametrize(
        "theta,eps",
        [(SQRT2M1, -1), (SQRT3M1, 1), (Fraction(2, 7), 1), (Fraction(5, 13), -1)],
    )
    def test_substitution_commutes_with_coding(self, theta, eps):
        p = Param(theta, eps)
        q = renorm_step(p)
        sigma = substitution(p)
        rng = random.Random(7)
        done = 0
        while done < 3:
            z1 = Point(
                Fraction(rng.randrange(1, 2**20), 2**20) * (1 + q.theta),
                Fraction(rng.randrange(1, 2**20), 2**20),
            )
            if z1.x == 1:
                continue
            z = similitude_apply(p, z1, "inv")
            try:
                w_up = code_orbit(p, z, 400)
                w_dn = code_orbit(q, z1, 200)
            except OnDiscontinuity:
                continue
            img = sigma(w_dn)
            n = min(len(img), 300)
            assert str(img)[:n] == str(w_up)[:n]
            done += 1


class TestCover:
    def test_depth_zero(self):
        p = Param(SQRT2M1, -1)
        pieces = cover(p, 0)
        assert len(pieces) == 2
        assert pieces[0].shape == "C" and pieces[1].shape == "R"

    def test_counts_follow_matrix_product(self):
        p = Param(SQRT2M1, -1)
        M = Mat2.identity()
        for l in range(1, 5):
            M = M @ incidence_matrix(p)
            assert len(cover(p, l)) == sum(M.apply((1, 1)))

    def test_pieces_inside_domain(self):
        p = Param(SQRT2M1, -1)
        for c in cover(p, 3):
            r = c.rect
            assert 0 <= float(r.x) and float(r.x + r.w) <= float(p.width) + 1e-12
            assert 0 <= float(r.y) and float(r.y + r.h) <= 1 + 1e-12

    def test_area_complement_identity_exact(self):
        # the depth-l cover tiles the complement of all islands whose period
        # is below the next entry of the period sequence -- exactly
        p = Param(SQRT2M1, -1)
        ps = period_sequence(p, 5)
        cells = islands(p, max_period=ps[4] - 1)
        for l in range(1, 4):
            cover_area = sum(c.rect.w * c.rect.h for c in cover(p, l))
            isl_area = sum(
                c.rect.area() for c in cells if c.orbit_period < ps[l]
            )
            assert cover_area + isl_area == 1 + p.theta

    def test_area_complement_identity_deep(self):
        p = Param(SQRT2M1, -1)
        ps = period_sequence(p, 7)
        cells = islands(p, max_period=ps[6] - 1)
        for l in (5, 6):
            cover_area = sum(c.rect.w * c.rect.h for c in cover(p, l))
            isl_area = sum(
                c.rect.area() for c in cells if c.orbit_period < ps[l]
            )
            assert float(cover_area + isl_area - (1 + p.theta)) == 0.0

    def test_ratio_matches_depth(self):
        p = Param(SQRT2M1, -1)
        r = ratio(p)
        for c in cover(p, 2):
            assert c.ratio * r * r == 1
