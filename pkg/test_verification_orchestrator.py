"""
Tests for the theorem verification orchestrator.
"""
import pytest

import verification_orchestrator
from config import Config
from numerics import Status, Verdict
from verification_orchestrator import VerificationOrchestrator, _suite_check


@pytest.fixture
def orchestrator():
    return VerificationOrchestrator(seed=3, instances=2)


def check_named(report, name):
    return next(c for c in report.checks if c.name == name)


class TestVerificationOrchestrator:
    """Scripted theorem checks."""

    def test_unknown_theorem(self, orchestrator):
        with pytest.raises(ValueError):
            orchestrator.verify("thm9")

    def test_pro1_report(self, orchestrator):
        report = orchestrator.verify("pro1")
        assert report.passed
        assert report.seed == 3
        assert report.checks[0].detail["instances"] == 2
        assert report.checks[0].detail["mismatches"] == []
        assert report.checks[0].detail["decided"] == 2
        assert report.checks[0].detail["undecided"] == 0

    def test_tc_propagation(self, orchestrator):
        report = orchestrator.verify("tc_propagation")
        assert report.checks[0].passed

    def test_report_serializes(self, orchestrator):
        report = orchestrator.verify("pro1")
        assert '"theorem":"pro1"' in report.model_dump_json()


class TestSuiteCheck:
    """Agreement checks over random suites."""

    def test_passes_with_decided_instances(self):
        check = _suite_check("agree", 5, 0, [])
        assert check.passed
        assert check.detail["undecided"] == 0

    def test_fails_without_decided_instances(self):
        check = _suite_check("agree", 0, 4, [])
        assert not check.passed
        assert check.detail["decided"] == 0

    def test_fails_when_too_many_undecided(self):
        assert Config.MAX_UNDECIDED_SHARE < 0.5
        assert not _suite_check("agree", 2, 2, []).passed

    def test_fails_on_mismatch(self):
        assert not _suite_check("agree", 3, 0, [{"index": 1}]).passed


class TestUndecidedSuites:
    """Suites whose verdicts never settle must not pass."""

    def test_thm4_all_pending(self, monkeypatch):
        monkeypatch.setattr(verification_orchestrator, "thm4_subnormal",
                            lambda p: Verdict.pending("stuck", pipeline="undecided"))
        report = VerificationOrchestrator(seed=3, instances=3).verify("thm4")
        check = check_named(report, "bound agrees with pipeline")
        assert not check.passed
        assert check.detail["decided"] == 0
        assert check.detail["undecided"] == 3
        assert not report.passed

    def test_pro1_all_pending(self, monkeypatch, orchestrator):
        monkeypatch.setattr(verification_orchestrator, "r10_verdict", lambda T: Verdict.pending("stuck"))
        report = orchestrator.verify("pro1")
        assert not report.passed
        assert report.checks[0].detail["undecided"] == 2

    def test_thm1_all_pending(self, monkeypatch, orchestrator):
        monkeypatch.setattr(verification_orchestrator, "tc_chain_status",
                            lambda T: {"pair": Status.UNDECIDED, "vertical": Status.UNDECIDED,
                                       "horizontal": Status.UNDECIDED})
        report = orchestrator.verify("thm1")
        assert not report.passed
        assert report.checks[0].detail["decided"] == 0


class TestFigure0Theorems:
    """Threshold crossing and the power-pair polynomial."""

    def test_firstmain(self, orchestrator):
        report = orchestrator.verify("firstmain")
        assert report.passed
        assert check_named(report, "single crossing").detail["sign_changes"] == 1
        h2 = check_named(report, "h2 at a^2=1/2 by bisection")
        assert float(h2.detail["gap"]) <= 1e-9

    def test_powhyp_small_grid(self, monkeypatch, orchestrator):
        monkeypatch.setattr(Config, "GRID_SIZE", 5)
        report = orchestrator.verify("powhyp")
        assert report.passed
        assert report.checks[0].detail["cells"] == 25
        assert report.checks[0].detail["disagreements"] == []


class TestExamTheorems:
    """Monomial bound and the H1-but-not-subnormal triple."""

    def test_equivalent(self, orchestrator):
        report = orchestrator.verify("equivalent")
        assert report.passed
        assert check_named(report, "monomial bound independent of n").passed
        below = check_named(report, "T1 T2^1 subnormal iff y <= bound").detail["below"]
        assert below["status"] == "holds"

    def test_four(self, orchestrator):
        report = orchestrator.verify("four")
        assert report.passed
        assert check_named(report, "H1 yes").passed
        assert check_named(report, "H_inf no").passed
        assert check_named(report, "all monomials subnormal").detail["failed"] == []


class TestFlatTheorem:
    """The flat-family bound against the pipeline."""

    def test_thm4_printed_and_agreement(self):
        report = VerificationOrchestrator(seed=3, instances=4).verify("thm4")
        printed = check_named(report, "printed instance")
        assert printed.passed
        assert printed.detail["bound_sq"] == "1/3"
        agree = check_named(report, "bound agrees with pipeline")
        assert agree.passed
        assert agree.detail["decided"] == 4
        assert agree.detail["mismatches"] == []
