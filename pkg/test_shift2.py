"""
Tests for two-variable weighted shifts.
"""
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from families import TCParams, propagation_check, random_commuting_field, tc_counterexample_field, tc_field
from measures import dirac, moment1, moment2, restriction_measure
from numerics import DomainError, NotInClassError, PsdStatus, Scalar
from shift2 import (
    WeightField,
    check_commuting,
    col_seq,
    degree_indices,
    gamma2,
    gamma2_path,
    in_H0,
    in_TC,
    is_hyponormal_pair,
    is_k_hyponormal_pair,
    is_tensor_form,
    moment_matrix,
    monomial_orbit_cover,
    monomial_subnormal,
    power_pair,
    power_vertical_subnormal,
    restriction,
    row_seq,
    six_point,
    subnormal_TC,
    tensor_field,
    transpose,
)

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)

ROW = dirac(0, Fraction(1, 2)) + dirac(1, Fraction(1, 2))
COLUMN = dirac(Fraction(1, 2), Fraction(1, 2)) + dirac(1, Fraction(1, 2))


def product_field(y0_sq=None):
    """Tensor product of the shifts with Berger measures ROW and COLUMN, built through tc_field."""
    col_core = restriction_measure(COLUMN, 1)
    params = TCParams(
        mu_x=ROW,
        xi=restriction_measure(ROW, 1),
        eta=col_core,
        eta_y1=col_core,
        x_sq=moment1(ROW, 1),
        y0_sq=moment1(COLUMN, 1) if y0_sq is None else Scalar.of(y0_sq),
    )
    return tc_field(params, label="product")


class TestWeightField:
    """Construction and lookups."""

    def test_repeat_tails_clamp(self):
        T = tensor_field([Fraction(1, 2), 1], [2])
        assert T.alpha_sq_at(7, 3) == Scalar(1)
        assert T.alpha_sq_at(0, 9) == Scalar(Fraction(1, 2))
        assert T.beta_sq_at(5, 5) == Scalar(2)

    def test_rejects_ragged_rectangle(self):
        with pytest.raises(DomainError):
            WeightField(((1, 1), (1,)), ((1, 1), (1, 1)))

    def test_rejects_nonpositive_weight(self):
        with pytest.raises(DomainError):
            WeightField(((1, 0),), ((1, 1),))

    def test_row_and_column_sequences(self):
        T = tensor_field([Fraction(1, 2), 1], [Fraction(3, 4), 1])
        assert [row_seq(T, 0).weight_sq(n) for n in range(3)] == [Scalar(Fraction(1, 2)), Scalar(1), Scalar(1)]
        assert col_seq(T, 4).weight_sq(0) == Scalar(Fraction(3, 4))


class TestCommutingAndMoments:
    """Commutativity and path-independent moments."""

    @settings(max_examples=25, deadline=None)
    @given(seeds)
    def test_random_fields_commute(self, seed):
        T = random_commuting_field(np.random.default_rng(seed))
        assert check_commuting(T).holds

    @settings(max_examples=25, deadline=None)
    @given(seeds)
    def test_moments_are_path_independent(self, seed):
        """Every monotone path to (2, 2) carries the same product of weights."""
        T = random_commuting_field(np.random.default_rng(seed))
        products = {gamma2_path(T, (0, 0), path) for path in ("xxyy", "xyxy", "xyyx", "yxxy", "yxyx", "yyxx")}
        assert len(products) == 1
        assert gamma2(T, (2, 2)) in products

    def test_non_commuting_field(self):
        T = WeightField(((1, 2), (1, 2)), ((1, 1), (3, 1)))
        v = check_commuting(T)
        assert v.fails
        assert "point" in v.certificate
        with pytest.raises(NotInClassError):
            gamma2(T, (1, 1))

    def test_degree_indices(self):
        assert degree_indices(2) == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]

    def test_moment_matrix_of_unit_field(self):
        M = moment_matrix(tensor_field([1], [1]), (3, 5), 2)
        assert M.dim == 6
        assert all(M[i, j] == Scalar(1) for i in range(6) for j in range(6))


class TestHyponormality:
    """Six-point Test and moment-matrix positivity."""

    def test_unit_field(self):
        T = tensor_field([1], [1])
        assert is_hyponormal_pair(T).holds
        assert is_k_hyponormal_pair(T, 3).holds

    def test_six_point_failure_certificate(self):
        T = tensor_field([2, 1], [1])
        v = is_hyponormal_pair(T)
        assert v.fails
        assert v.certificate["point"] == [0, 0]

    def test_six_point_matrix_diagonal(self):
        sp = six_point(tensor_field([Fraction(1, 2), 1], [Fraction(1, 4), 1]), (0, 0))
        assert sp.d1 == Scalar(Fraction(1, 2))
        assert sp.d2 == Scalar(Fraction(3, 4))
        assert sp.verdict.status is PsdStatus.PSD

    @settings(max_examples=25, deadline=None)
    @given(seeds)
    def test_six_point_matches_first_moment_matrix(self, seed):
        """The Six-point Test and M_u(1) give the same verdict everywhere."""
        T = random_commuting_field(np.random.default_rng(seed))
        assert is_k_hyponormal_pair(T, 1).status is is_hyponormal_pair(T).status

    @settings(max_examples=15, deadline=None)
    @given(seeds)
    def test_levels_are_nested(self, seed):
        T = random_commuting_field(np.random.default_rng(seed))
        if is_k_hyponormal_pair(T, 2).holds:
            assert is_hyponormal_pair(T).holds


class TestStructure:
    """Restrictions, transposes and tensor-core membership."""

    @settings(max_examples=20, deadline=None)
    @given(seeds, st.integers(min_value=0, max_value=2), st.integers(min_value=0, max_value=2))
    def test_restriction_shifts_indices(self, seed, i, j):
        T = random_commuting_field(np.random.default_rng(seed))
        R = restriction(T, i, j)
        for k1 in range(3):
            for k2 in range(3):
                assert R.alpha_sq_at(k1, k2) == T.alpha_sq_at(k1 + j, k2 + i)
                assert R.beta_sq_at(k1, k2) == T.beta_sq_at(k1 + j, k2 + i)

    @settings(max_examples=20, deadline=None)
    @given(seeds)
    def test_transpose_swaps_roles(self, seed):
        T = random_commuting_field(np.random.default_rng(seed))
        S = transpose(T)
        assert S.alpha_sq_at(1, 2) == T.beta_sq_at(2, 1)
        assert transpose(S).alpha_sq_at(2, 1) == T.alpha_sq_at(2, 1)
        assert check_commuting(S).holds

    def test_tensor_form(self):
        assert is_tensor_form(tensor_field([Fraction(1, 2), 1], [Fraction(1, 3), 1]))
        assert not is_tensor_form(tc_counterexample_field())

    def test_counterexample_field(self):
        """Commuting, R_22 of tensor form, core not of tensor form, outside H0."""
        T = tc_counterexample_field(2)
        assert check_commuting(T).holds
        assert propagation_check(T) == {"r22_tensor": True, "core_tensor": False}
        v = in_H0(T)
        assert v.fails
        assert v.certificate["slice"] == "row"
        assert v.certificate["index"] == 2
        assert not in_TC(T)

    def test_counterexample_parameter(self):
        with pytest.raises(DomainError):
            tc_counterexample_field(1)

    def test_tensor_field_in_tc(self):
        assert in_TC(tensor_field([Fraction(1, 2), 1], [Fraction(1, 3), 1]))


class TestPowers:
    """Residue summands of (T1**m, T2**n)."""

    def test_summand_count(self):
        T = tensor_field([Fraction(1, 2), 1], [1])
        assert len(power_pair(T, 2, 3)) == 6
        assert power_pair(T, 1, 1) == [T]

    def test_summand_weights_are_packet_products(self):
        T = tensor_field([Fraction(1, 2), Fraction(3, 4), 1], [Fraction(1, 3), 1])
        S = power_pair(T, 2, 1)[0]
        assert S.alpha_sq_at(0, 0) == Scalar(Fraction(3, 8))
        assert S.beta_sq_at(0, 0) == Scalar(Fraction(1, 3))
        assert S.residue == (0, 0)

    def test_invalid_power(self):
        with pytest.raises(ValueError):
            power_pair(tensor_field([1], [1]), 0, 1)


class TestSubnormalTC:
    """Two-stage subnormality chain on tensor-core fields."""

    def test_product_measure_recovered(self):
        """The tensor product of two subnormal shifts has the product Berger measure."""
        v = subnormal_TC(product_field())
        assert v.holds
        mu = v.certificate["measure"]
        for k1 in range(3):
            for k2 in range(3):
                assert moment2(mu, (k1, k2)) == moment1(ROW, k1) * moment1(COLUMN, k2)

    def test_bottom_column_weight_too_large(self):
        v = subnormal_TC(product_field(y0_sq=1))
        assert v.fails
        assert v.certificate["chain"]["backext"]["certificate"]["condition"] == "norm"

    def test_powers_of_subnormal_pair(self):
        assert power_vertical_subnormal(product_field(), 2).combined.holds

    def test_monomial_of_subnormal_pair(self):
        assert monomial_subnormal(product_field(), 1, 1).holds
        assert monomial_orbit_cover(product_field()).holds


def late_failure_field():
    """Row-0 moments 3/4, 5/8, 9/16, 17/32: the orbit from (4, 0) is the first to fail."""
    params = TCParams(
        mu_x=dirac(Fraction(1, 2), Fraction(1, 2)) + dirac(1, Fraction(1, 2)),
        xi=dirac(1),
        eta=dirac(1),
        eta_y1=dirac(1),
        x_sq=Scalar(Fraction(3, 4)),
        y0_sq=Scalar(Fraction(3, 4)),
    )
    return tc_field(params, label="late failure")


class TestMonomials:
    """Subnormality of T1^m T2^n past the explicit orbit starts."""

    def test_explicit_orbits_alone_do_not_hold(self):
        v = monomial_subnormal(late_failure_field(), 1, 1)
        assert v.undecided
        assert v.certificate["scope"] == "offsets<=3"
        assert v.certificate["condition"] == "row"

    def test_failure_found_with_more_offsets(self):
        v = monomial_subnormal(late_failure_field(), 1, 1, offsets=4)
        assert v.fails
        assert "(4, 0)" in v.reason

    def test_cover_misses_row_domination(self):
        assert not monomial_orbit_cover(late_failure_field()).holds

    def test_core_measures_follow_restriction(self):
        T = product_field()
        xi, eta = T.core_measures
        assert restriction(T, 1, 2).core_measures == (restriction_measure(xi, 2), restriction_measure(eta, 1))
