"""
Tests for the parametric families: Figure-0 thresholds and regions,
the flat family bound, the exam family and random tensor-core instances.
"""
import math
from fractions import Fraction

import numpy as np
import pytest

from families import (
    ExamParams,
    Figure0Params,
    FlatParams,
    a_int,
    build_exam,
    build_figure0,
    classify_field,
    classify_figure0,
    crossing_sign_changes,
    exam_bounds,
    figure0_curves,
    h1_by_bisection,
    h21_by_bisection,
    h2_by_bisection,
    monomial_bound,
    power_pair_origin_h,
    random_flat_params,
    region_label,
    remark_g,
    tc_chain_status,
    tc_instances,
    threshold,
    threshold_sq,
    thm4_bound,
    thm4_subnormal,
)
from measures import dirac, inv_t_norm, lebesgue, moment1
from numerics import DomainError, Scalar, Status
from shift2 import (
    is_hyponormal_pair,
    monomial_orbit_cover,
    monomial_subnormal,
    power_pair,
    six_point,
    subnormal_TC,
    tensor_field,
)

EXAM_ETA = lebesgue(Fraction(1, 2), Fraction(3, 2))


class TestThresholds:
    """Closed-form curves h1, h21, h2 and h_inf."""

    def test_h1_at_one_half(self):
        assert threshold_sq("h1", Fraction(1, 4)) == Scalar(Fraction(29, 41))
        assert abs(float(threshold("h1", a=Fraction(1, 2))) - math.sqrt(29 / 41)) < 1e-15

    def test_h2_and_hinf_at_half_square(self):
        assert threshold_sq("h2", Fraction(1, 2)) == Scalar(Fraction(9, 13))
        assert threshold_sq("hinf", Fraction(1, 2)) == Scalar(Fraction(2, 3))

    def test_h21(self):
        assert threshold_sq("h21", Fraction(1, 4)) == Scalar(Fraction(387, 512))

    def test_domains(self):
        with pytest.raises(DomainError):
            threshold_sq("h2", Fraction(3, 4))
        with pytest.raises(DomainError):
            threshold_sq("h3", Fraction(1, 4))
        assert figure0_curves(Fraction(17, 20))["hinf"] is None

    def test_exactly_one_of_a_and_a_sq(self):
        with pytest.raises(ValueError):
            threshold("h1")

    def test_curves_are_ordered_below_one_half(self):
        """h_inf <= h2 <= h1 wherever all are defined."""
        for k in range(1, 11):
            a_sq = Fraction(k, 20)
            hinf, h2, h1 = (threshold_sq(c, a_sq) for c in ("hinf", "h2", "h1"))
            assert hinf.compare(h2) in (-1, 0)
            assert h2.compare(h1) in (-1, 0)

    def test_crossing_point(self):
        root = a_int()
        assert abs(float(root) - 0.8386) < 5e-4
        assert crossing_sign_changes(400) == 1

    def test_origin_determinant_polynomial(self):
        """g vanishes on the h1 curve."""
        a_sq = Fraction(1, 4)
        assert remark_g(a_sq, threshold_sq("h1", a_sq)).is_zero()


class TestThresholdBisection:
    """Closed forms recovered from the generic testers."""

    def test_h2_at_half_square(self):
        found = h2_by_bisection(Fraction(1, 2))
        assert abs(float(found) - 3 / math.sqrt(13)) <= 1e-9

    def test_h1_at_one_half(self):
        found = h1_by_bisection(Fraction(1, 2))
        assert abs(float(found) - math.sqrt(29 / 41)) <= 1e-9

    def test_h21_at_one_half(self):
        found = h21_by_bisection(Fraction(1, 2))
        assert abs(float(found) - math.sqrt(387 / 512)) <= 1e-9


class TestPowerPairOrigin:
    """Sign of the power-pair polynomial against the origin Six-point Test."""

    @pytest.mark.parametrize("i", [1, 3, 5, 7, 9])
    def test_sign_matches_six_point(self, i):
        for j in range(1, 11):
            p = Figure0Params.from_values(Fraction(i, 10), Fraction(j, 10))
            summand = power_pair(build_figure0(p), 2, 1)[0]
            psd = six_point(summand, (0, 0)).verdict.is_psd
            assert psd == (power_pair_origin_h(p.a_sq, p.kappa_sq).sign() != -1)


class TestFigure0:
    """Region classification."""

    def test_params_domain(self):
        with pytest.raises(DomainError):
            Figure0Params.from_values(Fraction(1, 2), Fraction(11, 10))

    def test_region_label(self):
        assert region_label(True, True, True) == "H_inf"
        assert region_label(True, None, False) == "H1_only"
        assert region_label(False, False, False) == "not_H1"

    def test_origin_scoped_region(self):
        c = classify_figure0(Figure0Params.from_values(Fraction(17, 20), Fraction(99, 100)))
        assert c.region == "H1_only, power21_not_H1"
        assert c.scope == "origin"
        assert c.in_h2 is None

    def test_subnormal_region(self):
        c = classify_figure0(Figure0Params.from_values(Fraction(1, 2), Fraction(1, 2)))
        assert c.label == "H_inf"
        assert c.power_label == "power21_in_H1"
        assert c.scope == "lattice"

    def test_two_hyponormal_but_not_subnormal(self):
        c = classify_figure0(Figure0Params(Fraction(1, 2), Fraction(17, 25)))
        assert c.label == "H2_not_H_inf"

    def test_not_hyponormal(self):
        c = classify_figure0(Figure0Params.from_values(Fraction(1, 2), Fraction(17, 20)))
        assert c.region == "not_H1, power21_in_H1"

    @pytest.mark.parametrize("a_sq", [Fraction(1, 4), Fraction(1, 2)])
    def test_subnormality_boundary(self, a_sq):
        """Subnormal exactly up to kappa^2 = 1/(2 - a^2)."""
        boundary = 1 / (2 - a_sq)
        at = subnormal_TC(build_figure0(Figure0Params(a_sq, boundary)))
        past = subnormal_TC(build_figure0(Figure0Params(a_sq, boundary * (1 + Fraction(1, 10 ** 12)))))
        assert at.holds
        assert at.track.value == "exact"
        assert past.fails

    def test_tensor_field_record(self):
        record = classify_field(tensor_field([Fraction(1, 2), 1], [Fraction(1, 3), 1]))
        assert record["label"] == "H_inf (tensor)"
        assert record["k_hypo"]["k1"].holds


class TestFlatFamily:
    """The beta_0 bound of the flat family."""

    def printed(self, beta0_sq=None):
        xi = dirac(0, Fraction(1, 4)) + dirac(1, Fraction(3, 4))
        p = FlatParams.from_eta(Fraction(1, 4), 1, xi, dirac(0, Fraction(1, 2)) + dirac(1, Fraction(1, 2)))
        if beta0_sq is None:
            return p
        return FlatParams(p.a_sq, p.b_sq, p.xi, p.eta1, Scalar(beta0_sq))

    def test_printed_terms(self):
        b = thm4_bound(self.printed())
        assert b.terms_sq == {
            "core_column": Scalar(2),
            "bottom_atom_0": Scalar(Fraction(1, 3)),
            "bottom_atom_1": Scalar(3),
            "column_0": Scalar(1),
        }
        assert b.bound_sq == Scalar(Fraction(1, 3))

    def test_printed_instance_fails(self):
        p = self.printed()
        assert p.beta0_sq == Scalar(Fraction(1, 2))
        v = thm4_subnormal(p)
        assert v.fails
        assert v.certificate["pipeline"] == "fails"

    def test_at_the_bound(self):
        v = thm4_subnormal(self.printed(Fraction(1, 3)))
        assert v.holds
        assert v.certificate["contractive"]

    def test_needs_room_below_the_norm(self):
        with pytest.raises(DomainError):
            FlatParams.from_eta(2, 1, dirac(1), dirac(1))

    def test_random_instances_agree(self):
        """thm4_subnormal raises on disagreement with the pipeline."""
        rng = np.random.default_rng(11)
        for _ in range(5):
            assert not thm4_subnormal(random_flat_params(rng)).undecided


class TestExamFamily:
    """Lebesgue measure on [1/2, 3/2] above row 0."""

    def test_column_measure(self):
        assert moment1(EXAM_ETA, 1) == Scalar(1)
        assert abs(float(inv_t_norm(EXAM_ETA)) - math.log(3)) < 1e-12

    def test_bounds(self):
        b = exam_bounds(ExamParams(Fraction(9, 10), Fraction(1, 2), Fraction(1, 2), EXAM_ETA))
        assert abs(float(b.s) - 0.48020) < 1e-4
        assert abs(float(b.m) - 0.57375) < 1e-4

    def test_monomial_bound_is_independent_of_n(self):
        p = ExamParams(Fraction(9, 10), Fraction(1, 2), Fraction(1, 2), EXAM_ETA)
        expected = 1.8 / math.sqrt(math.log(3))
        for n in (1, 2, 3):
            assert abs(float(monomial_bound(p, n)) - expected) < 1e-9

    def test_triple_between_bounds(self):
        """y = 13/25 is hyponormal, not subnormal, with subnormal monomials."""
        T = build_exam(ExamParams(Fraction(9, 10), Fraction(1, 2), Fraction(13, 25), EXAM_ETA))
        assert is_hyponormal_pair(T).holds
        assert subnormal_TC(T).fails
        for m, n in ((1, 1), (1, 2), (2, 1)):
            assert monomial_subnormal(T, m, n).holds

    def test_orbit_cover_follows_the_bound(self):
        base = ExamParams(Fraction(9, 10), Fraction(1, 2), Fraction(13, 25), EXAM_ETA)
        assert monomial_orbit_cover(build_exam(base)).holds
        above = monomial_orbit_cover(build_exam(base.with_y(Fraction(7, 4))))
        assert above.undecided
        assert above.certificate["condition"] == "row"
        assert monomial_subnormal(build_exam(base.with_y(Fraction(7, 4))), 1, 1).fails

    def test_domain(self):
        with pytest.raises(DomainError):
            ExamParams(Fraction(1, 2), Fraction(9, 10), 1)


class TestTensorCoreInstances:
    """Random tensor-core fields."""

    def test_seeded_instances_are_reproducible(self):
        first = [i.params.to_dict() for i in tc_instances(3, seed=7)]
        assert first == [i.params.to_dict() for i in tc_instances(3, seed=7)]

    def test_power_verdicts_agree(self):
        for inst in tc_instances(4, seed=7):
            statuses = tc_chain_status(inst.field)
            decided = {s for s in statuses.values() if s is not Status.UNDECIDED}
            assert len(decided) <= 1
