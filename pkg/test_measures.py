"""
Tests for measures and their transforms.
"""
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from measures import (
    Measure1D,
    Measure2D,
    Power,
    TWeight,
    atom_mass,
    density,
    dilate,
    dirac,
    dominates,
    extremal,
    inv_t_norm,
    inv_t_norm2,
    lebesgue,
    marginal_x,
    marginal_y,
    moment1,
    moment2,
    nonnegative,
    packet_measure,
    power,
    pushforward_monomial,
    restriction_measure,
    t_weight,
    transform,
)
from numerics import INFINITE, MeasureError, Scalar

positions = st.integers(min_value=1, max_value=20).map(lambda i: Fraction(i, 10))
masses = st.integers(min_value=1, max_value=9).map(lambda i: Fraction(i, 10))
atomic = st.lists(st.tuples(positions, masses), min_size=1, max_size=4).map(
    lambda atoms: Measure1D.build(atoms=atoms))
mixed = st.tuples(atomic, st.integers(min_value=0, max_value=3)).map(
    lambda t: t[0] + lebesgue(0, 1, Fraction(t[1], 4)))


class TestMoments:
    """Masses, moments and 1/t norms."""

    def test_lebesgue_moments(self):
        mu = lebesgue(0, 1)
        assert [moment1(mu, k).fraction for k in range(4)] == [1, Fraction(1, 2), Fraction(1, 3), Fraction(1, 4)]

    def test_atoms_merge(self):
        mu = dirac(1, Fraction(1, 4)) + dirac(1, Fraction(1, 4))
        assert atom_mass(mu, 1) == Scalar(Fraction(1, 2))
        assert len(mu.atoms) == 1

    def test_zero_weight_atoms_drop(self):
        assert (dirac(0, 0) + dirac(1)).atoms == dirac(1).atoms

    def test_inv_t_norm_of_lebesgue(self):
        """||1/t|| over [1/2, 3/2] is ln 3."""
        norm = inv_t_norm(lebesgue(Fraction(1, 2), Fraction(3, 2)))
        assert abs(float(norm) - math.log(3)) < 1e-12

    def test_inv_t_norm_diverges(self):
        assert inv_t_norm(dirac(0, Fraction(1, 2)) + dirac(1, Fraction(1, 2))) is INFINITE
        assert inv_t_norm(lebesgue(0, 1)) is INFINITE

    def test_inv_t_norm_rejects_signed(self):
        with pytest.raises(MeasureError):
            inv_t_norm(dirac(1) - dirac(2))

    def test_negative_position_rejected(self):
        with pytest.raises(MeasureError):
            dirac(-1)


class TestTransforms:
    """t-weighting, powers, dilations and restrictions."""

    def test_t_weight_kills_atom_at_zero(self):
        mu = t_weight(dirac(0, Fraction(1, 2)) + dirac(2, Fraction(1, 2)), 1, 1)
        assert atom_mass(mu, 0).is_zero()
        assert mu.mass() == Scalar(1)

    def test_negative_t_weight_at_zero_atom(self):
        with pytest.raises(MeasureError):
            t_weight(dirac(0) + dirac(1), -1)

    def test_transform_dispatch(self):
        mu = dirac(2)
        assert transform(mu, Power(2)) == power(mu, 2)
        assert transform(mu, TWeight(1, Scalar(2))) == t_weight(mu, 1, 2)

    @settings(max_examples=40, deadline=None)
    @given(mixed, st.integers(min_value=1, max_value=3), st.integers(min_value=0, max_value=5))
    def test_power_moments(self, mu, ell, k):
        """gamma_k of the pushforward under t**ell is gamma_{ell k}."""
        assert moment1(power(mu, ell), k) == moment1(mu, ell * k)

    @settings(max_examples=40, deadline=None)
    @given(mixed, st.integers(min_value=1, max_value=4), st.integers(min_value=0, max_value=5))
    def test_dilate_moments(self, mu, lam, k):
        assert moment1(dilate(mu, lam), k) == moment1(mu, k) * Scalar(lam) ** k

    @settings(max_examples=40, deadline=None)
    @given(mixed, st.integers(min_value=1, max_value=4), st.integers(min_value=0, max_value=5))
    def test_restriction_moments(self, mu, h, k):
        """The h-restricted measure carries gamma_{k+h} / gamma_h."""
        assert moment1(restriction_measure(mu, h), k) == moment1(mu, k + h) / moment1(mu, h)

    @settings(max_examples=30, deadline=None)
    @given(atomic, st.integers(min_value=1, max_value=3), st.data())
    def test_packet_measure_is_probability(self, mu, ell, data):
        i = data.draw(st.integers(min_value=0, max_value=ell - 1))
        mu = mu.scale(Scalar(1) / mu.mass())
        assert packet_measure(mu, ell, i).mass() == Scalar(1)

    def test_power_of_lebesgue_is_density(self):
        """Lebesgue on [0, 1] under t**2 has density t^(-1/2)/2."""
        mu = power(lebesgue(0, 1), 2)
        assert mu.pieces[0].exponent == Fraction(-1, 2)
        assert moment1(mu, 1) == Scalar(Fraction(1, 3))


class TestSigns:
    """Nonnegativity and domination."""

    def test_atom_domination(self):
        assert dominates(dirac(1), dirac(1, Fraction(1, 2))).holds
        v = dominates(dirac(1, Fraction(1, 2)), dirac(1))
        assert v.fails
        assert v.certificate["deficit"] == Scalar(Fraction(1, 2))

    def test_missing_atom_fails(self):
        assert dominates(lebesgue(0, 1), dirac(Fraction(1, 2), Fraction(1, 100))).fails

    def test_density_domination(self):
        assert dominates(lebesgue(0, 1), lebesgue(0, 1, Fraction(1, 2))).holds
        assert dominates(lebesgue(0, 1), density(0, 1, 2, 1)).fails

    def test_nonnegative(self):
        assert nonnegative(lebesgue(0, 1) - density(0, 1, 1, 1)).holds
        assert nonnegative(density(0, 1, 1, 1) - lebesgue(0, 1)).fails


class TestMeasure2D:
    """Product measures, marginals and the extremal measure."""

    def test_moments_factor(self):
        mu = Measure2D.product(dirac(2), lebesgue(0, 1))
        assert moment2(mu, (2, 1)) == Scalar(2)

    @settings(max_examples=30, deadline=None)
    @given(atomic, atomic)
    def test_marginal_of_product(self, x, y):
        """The first marginal of x times a probability measure is x."""
        y = y.scale(Scalar(1) / y.mass())
        assert marginal_x(Measure2D.product(x, y)) == x
        assert marginal_y(Measure2D.product(y, x)) == x

    def test_extremal_mass(self):
        mu = Measure2D.product(dirac(1), dirac(0, Fraction(1, 2)) + dirac(2, Fraction(1, 2)))
        ext = extremal(mu)
        assert ext.mass() == Scalar(1)
        assert inv_t_norm2(Measure2D.product(dirac(1), dirac(2))) == Scalar(Fraction(1, 2))

    @settings(max_examples=30, deadline=None)
    @given(atomic, atomic)
    def test_extremal_is_probability(self, x, y):
        mu = Measure2D.product(x, y) + Measure2D.product(dirac(0), dirac(0, Fraction(1, 3)))
        assert extremal(mu).mass() == Scalar(1)

    def test_pushforward_monomial(self):
        """(s, t) -> s t pushes delta_2 x Lebesgue[0, 1] to Lebesgue[0, 2] / 2."""
        rho = pushforward_monomial(Measure2D.product(dirac(2), lebesgue(0, 1)), 1, 1)
        assert [moment1(rho, k) for k in range(3)] == [Scalar(1), Scalar(1), Scalar(Fraction(4, 3))]

    def test_pushforward_monomial_atoms(self):
        mu = Measure2D.product(dirac(2, Fraction(1, 2)) + dirac(1, Fraction(1, 2)), dirac(3))
        rho = pushforward_monomial(mu, 2, 1)
        assert atom_mass(rho, 12) == Scalar(Fraction(1, 2))
        assert atom_mass(rho, 3) == Scalar(Fraction(1, 2))
