"""
Verification orchestrator - runs the scripted theorem checks.
"""
import logging
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from config import Config
from families import (
    ExamParams,
    Figure0Params,
    FlatParams,
    a_int,
    build_exam,
    build_figure0,
    classify_figure0,
    crossing_sign_changes,
    exam_bounds,
    h1_by_bisection,
    h21_by_bisection,
    h2_by_bisection,
    monomial_bound,
    power_pair_origin_h,
    propagation_check,
    random_commuting_field,
    random_flat_params,
    tc_chain_status,
    tc_counterexample_field,
    tc_instances,
    threshold,
    thm4_bound,
    thm4_subnormal,
)
from measures import atom_mass, dirac, inv_t_norm, lebesgue, moment1
from models import CheckResult, TheoremReport
from numerics import MP, NotInClassError, Scalar, ShiftLabError, Status, TesterDisagreement
from shift2 import (
    check_commuting,
    in_A_k,
    in_H0,
    in_TC,
    is_hyponormal_pair,
    is_k_hyponormal_pair,
    monomial_subnormal,
    power_pair,
    r10_verdict,
    six_point,
    subnormal_TC,
)

logger = logging.getLogger(__name__)

Checks = Tuple[List[CheckResult], List[str]]

EXAM_ETA = lebesgue(Fraction(1, 2), Fraction(3, 2))
FOUR_TRIPLE = (Fraction(9, 10), Fraction(1, 2), Fraction(13, 25))


def _close(value: Scalar, target, tol: float) -> bool:
    return abs(value.to_mpf() - MP.mpf(target)) <= tol


def _suite_check(name: str, decided: int, undecided: int, mismatches: list, **detail) -> CheckResult:
    """Agreement over a random suite; passes only with decided instances and few undecided ones."""
    total = decided + undecided
    within = undecided <= Config.MAX_UNDECIDED_SHARE * total
    if not decided:
        logger.warning(f"{name}: no decided instance out of {total}")
    elif not within:
        logger.warning(f"{name}: {undecided}/{total} instances undecided")
    return CheckResult(
        name=name,
        passed=decided > 0 and within and not mismatches,
        detail={"decided": decided, "undecided": undecided, "mismatches": mismatches, **detail},
    )


class VerificationOrchestrator:
    """Runs one theorem's scripted check and assembles a report."""

    def __init__(self, seed: int = Config.DEFAULT_SEED, instances: Optional[int] = None):
        logger.info("Initializing verification orchestrator...")
        logger.info(f"Numeric settings: {Config.get_precision_info()}")
        self.seed = seed
        self.instances = instances
        self._verifiers: Dict[str, Callable[[], Checks]] = {
            "firstmain": self.verify_firstmain,
            "powhyp": self.verify_powhyp,
            "thm1": self.verify_thm1,
            "pro1": self.verify_pro1,
            "tc_propagation": self.verify_tc_propagation,
            "equivalent": self.verify_equivalent,
            "four": self.verify_four,
            "thm4": self.verify_thm4,
            "conjecture": self.run_conjecture_search,
        }
        logger.info("✓ Verification orchestrator initialized")

    def _count(self, default: int) -> int:
        return self.instances if self.instances is not None else default

    def verify(self, theorem: str) -> TheoremReport:
        """
        Run the scripted check of one theorem.

        Raises:
            ValueError: unknown theorem name
            TesterDisagreement: a closed form and a generic tester disagree
        """
        if theorem not in self._verifiers:
            raise ValueError(f"unknown theorem {theorem!r}; expected one of {', '.join(Config.THEOREMS)}")
        logger.info("=" * 60)
        logger.info(f"Verifying {theorem}")
        logger.info("=" * 60)
        try:
            checks, notes = self._verifiers[theorem]()
        except ShiftLabError as e:
            logger.error(f"Verification of {theorem} stopped: {str(e)}")
            raise
        status = "PASS" if all(c.passed for c in checks) else "FAIL"
        logger.info("=" * 60)
        logger.info(f"{theorem}: {status} ({sum(c.passed for c in checks)}/{len(checks)} checks)")
        logger.info("=" * 60)
        return TheoremReport(theorem=theorem, status=status, checks=checks, seed=self.seed, notes=notes)

    # Figure-0 thresholds

    def verify_firstmain(self) -> Checks:
        checks = []
        logger.info("Step 1/5: Bisecting h1 = h21...")
        root = a_int(Fraction(1, 10000))
        h1, h21 = threshold("h1", root), threshold("h21", root)
        residual = abs(h1.to_mpf() - h21.to_mpf())
        checks.append(CheckResult(
            name="a_int",
            passed=_close(root, "0.8386", 5e-4) and residual < 10 * 1e-4,
            detail={"a_int": root, "residual": str(residual)},
        ))
        logger.info(f"✓ a_int = {MP.nstr(root.to_mpf(), 8)}")

        logger.info("Step 2/5: Counting sign changes of h1^2 - h21^2...")
        changes = crossing_sign_changes(1000)
        checks.append(CheckResult(name="single crossing", passed=changes == 1, detail={"sign_changes": changes}))
        logger.info(f"✓ {changes} sign change(s)")

        logger.info("Step 3/5: Classifying the two region samples...")
        samples = [
            ((Fraction(17, 20), Fraction(99, 100)), "H1_only, power21_not_H1"),
            ((Fraction(1, 2), Fraction(17, 20)), "not_H1, power21_in_H1"),
        ]
        for (a, kappa), expected in samples:
            c = classify_figure0(Figure0Params.from_values(a, kappa))
            checks.append(CheckResult(name=f"region at a={a}, kappa={kappa}", passed=c.region == expected,
                                      detail={"region": c.region, "expected": expected, "scope": c.scope}))
        logger.info("✓ Region samples classified")

        logger.info("Step 4/5: Recovering h1 and h21 by bisection on the testers...")
        for a in (Fraction(3, 10), Fraction(1, 2), Fraction(7, 10)):
            for name, bisect in (("h1", h1_by_bisection), ("h21", h21_by_bisection)):
                found = bisect(a)
                exact = threshold(name, a)
                gap = abs(found.to_mpf() - exact.to_mpf())
                checks.append(CheckResult(name=f"{name}({a}) by bisection", passed=gap <= 1e-9,
                                          detail={"bisection": found, "closed_form": exact, "gap": str(gap)}))
        logger.info("✓ Thresholds recovered")

        logger.info("Step 5/5: Recovering h2 at a^2 = 1/2 from 2-hyponormality...")
        half = Fraction(1, 2)
        found = h2_by_bisection(half)
        expected = 3 / MP.sqrt(13)
        gap = abs(found.to_mpf() - expected)
        checks.append(CheckResult(
            name="h2 at a^2=1/2 by bisection",
            passed=gap <= 1e-9 and _close(threshold("h2", a_sq=half), expected, 1e-12),
            detail={"bisection": found, "closed_form": threshold("h2", a_sq=half), "gap": str(gap)},
        ))
        logger.info(f"✓ h2 = {MP.nstr(found.to_mpf(), 12)}")
        return checks, []

    def verify_powhyp(self) -> Checks:
        n = Config.GRID_SIZE
        logger.info(f"Step 1/1: Sweeping the {n}x{n} grid against the power-pair polynomial...")
        disagreements = []
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                p = Figure0Params.from_values(Fraction(i, n), Fraction(j, n))
                summand = power_pair(build_figure0(p), 2, 1)[0]
                psd = six_point(summand, (0, 0)).verdict.is_psd
                h_ok = power_pair_origin_h(p.a_sq, p.kappa_sq).sign() != -1
                if psd != h_ok:
                    disagreements.append([f"{i}/{n}", f"{j}/{n}"])
        logger.info(f"✓ {n * n} cells, {len(disagreements)} disagreement(s)")
        return [CheckResult(name="sign of h matches the origin Six-point Test", passed=not disagreements,
                            detail={"cells": n * n, "disagreements": disagreements})], []

    # tensor-core suites

    def verify_thm1(self) -> Checks:
        count = self._count(Config.TC_INSTANCES)
        logger.info(f"Step 1/1: Comparing three subnormality verdicts on {count} random TC instances...")
        tally = {s.value: 0 for s in Status}
        mismatches = []
        decided = undecided = 0
        for inst in tc_instances(count, self.seed):
            statuses = tc_chain_status(inst.field)
            seen = {s for s in statuses.values() if s is not Status.UNDECIDED}
            if len(seen) > 1:
                mismatches.append({"index": inst.index, "statuses": statuses})
            if Status.UNDECIDED in statuses.values():
                undecided += 1
            else:
                decided += 1
            tally[statuses["pair"].value] += 1
        logger.info(f"✓ {count} instances: {tally}")
        return [_suite_check("(T1,T2), (T1,T2^2), (T1^2,T2) agree", decided, undecided, mismatches,
                             instances=count, pair_verdicts=tally)], []

    def verify_pro1(self) -> Checks:
        count = self._count(Config.TC_INSTANCES)
        logger.info(f"Step 1/1: Comparing the H1 summand of (T1, T2^2) with R10 on {count} instances...")
        mismatches = []
        decided = undecided = 0
        for inst in tc_instances(count, self.seed):
            h1 = subnormal_TC(power_pair(inst.field, 1, 2)[1])
            r10 = r10_verdict(inst.field)
            if h1.undecided or r10.undecided:
                undecided += 1
                continue
            decided += 1
            if h1.status is not r10.status:
                mismatches.append({"index": inst.index, "h1": h1.status, "r10": r10.status})
        logger.info(f"✓ {count} instances, {decided} decided, {len(mismatches)} mismatch(es)")
        return [_suite_check("H1 summand subnormal iff R10 subnormal", decided, undecided, mismatches,
                             instances=count)], []

    def verify_tc_propagation(self) -> Checks:
        checks = []
        logger.info("Step 1/2: Checking the non-tensor core field...")
        T = tc_counterexample_field(2)
        shape = propagation_check(T)
        h0 = in_H0(T)
        checks.append(CheckResult(
            name="R22 tensor, core not tensor, field leaves H0",
            passed=check_commuting(T).holds and shape["r22_tensor"] and not shape["core_tensor"] and h0.fails,
            detail={**shape, "h0": h0.to_dict()},
        ))
        logger.info(f"✓ H0 verdict: {h0.status.value}")

        count = min(self._count(Config.TC_INSTANCES), 20)
        logger.info(f"Step 2/2: Comparing A_22 with TC on {count} random instances...")
        mismatches = []
        for inst in tc_instances(count, self.seed):
            if in_A_k(inst.field, (2, 2)) != in_TC(inst.field):
                mismatches.append(inst.index)
        checks.append(CheckResult(name="A_22 membership equals TC membership", passed=not mismatches,
                                  detail={"instances": count, "mismatches": mismatches}))
        logger.info("✓ Propagation checked")
        return checks, []

    # exam family

    def verify_equivalent(self) -> Checks:
        checks = []
        x, a, _ = FOUR_TRIPLE
        base = ExamParams(x, a, Fraction(1, 2), EXAM_ETA)
        expected = (x / a) * MP.sqrt(1 / MP.log(3))

        logger.info("Step 1/3: Comparing monomial bounds with (x/a) sqrt(1/ln 3)...")
        bounds = {n: monomial_bound(base, n) for n in range(1, 5)}
        checks.append(CheckResult(
            name="monomial bound independent of n",
            passed=all(_close(b, expected, 1e-9) for b in bounds.values()),
            detail={"bounds": {str(n): b for n, b in bounds.items()}, "expected": MP.nstr(expected, 15)},
        ))

        logger.info("Step 2/3: Testing monomial subnormality on both sides of the bound...")
        below = Fraction(MP.nstr(expected * MP.mpf("0.99"), 12))
        above = Fraction(MP.nstr(expected * MP.mpf("1.01"), 12))
        for n in (1, 2):
            low = monomial_subnormal(build_exam(base.with_y(below)), 1, n)
            high = monomial_subnormal(build_exam(base.with_y(above)), 1, n)
            checks.append(CheckResult(name=f"T1 T2^{n} subnormal iff y <= bound",
                                      passed=low.holds and high.fails,
                                      detail={"below": low.to_dict(), "above": high.to_dict()}))

        logger.info("Step 3/3: Comparing T1^m T2 with T1 T2 for m <= 3...")
        for y in (below, above):
            T = build_exam(base.with_y(y))
            first = monomial_subnormal(T, 1, 1).status
            others = {m: monomial_subnormal(T, m, 1).status for m in (2, 3)}
            checks.append(CheckResult(name=f"T1^m T2 agrees with T1 T2 at y={y}",
                                      passed=all(s is first for s in others.values()),
                                      detail={"m=1": first, **{f"m={m}": s for m, s in others.items()}}))
        logger.info("✓ Monomial equivalences checked")
        return checks, []

    def verify_four(self) -> Checks:
        checks = []
        x, a, y = FOUR_TRIPLE
        p = ExamParams(x, a, y, EXAM_ETA)

        logger.info("Step 1/3: Checking beta_1 and ||1/t|| for Lebesgue measure on [1/2, 3/2]...")
        beta1_sq, norm = moment1(EXAM_ETA, 1), inv_t_norm(EXAM_ETA)
        checks.append(CheckResult(
            name="beta_1 = 1 and ||1/t|| = ln 3",
            passed=beta1_sq == 1 and _close(norm, MP.log(3), 1e-12),
            detail={"beta1_sq": beta1_sq, "norm": norm},
        ))

        logger.info("Step 2/3: Classifying the triple...")
        T = build_exam(p)
        bounds = exam_bounds(p)
        h1, sub = is_hyponormal_pair(T), subnormal_TC(T)
        checks.append(CheckResult(name="H1 yes", passed=h1.holds, detail={"verdict": h1.to_dict(), **bounds.to_dict()}))
        checks.append(CheckResult(name="H_inf no", passed=sub.fails, detail={"verdict": sub.to_dict()}))

        logger.info("Step 3/3: Testing monomials T1^m T2^n for m, n <= 6...")
        failed = []
        for m in range(1, 7):
            for n in range(1, 7):
                v = monomial_subnormal(T, m, n)
                if not v.holds:
                    failed.append({"m": m, "n": n, "status": v.status, "reason": v.reason})
        checks.append(CheckResult(name="all monomials subnormal", passed=not failed, detail={"failed": failed}))
        logger.info(f"✓ H1 {h1.status.value}, H_inf {sub.status.value}, {36 - len(failed)}/36 monomials")
        return checks, []

    # flat family

    def verify_thm4(self) -> Checks:
        checks = []
        logger.info("Step 1/3: Evaluating the printed instance...")
        printed = FlatParams.from_eta(Fraction(1, 4), 1, dirac(0, Fraction(1, 4)) + dirac(1, Fraction(3, 4)),
                                      dirac(0, Fraction(1, 2)) + dirac(1, Fraction(1, 2)))
        bound = thm4_bound(printed)
        verdict = thm4_subnormal(printed)
        checks.append(CheckResult(name="printed instance", passed=bound.bound_sq == Fraction(1, 3) and verdict.fails,
                                  detail={**bound.to_dict(), "verdict": verdict.to_dict()}))

        count = self._count(Config.FLAT_INSTANCES)
        logger.info(f"Step 2/3: Comparing the bound with the pipeline on {count} instances...")
        rng = np.random.default_rng(self.seed)
        instances = [random_flat_params(rng) for _ in range(count)]
        tally = {s.value: 0 for s in Status}
        mismatches = []
        decided = undecided = 0
        for i, p in enumerate(instances):
            try:
                v = thm4_subnormal(p)
            except TesterDisagreement as e:
                mismatches.append({"index": i, "certificates": e.certificates})
                decided += 1
                continue
            tally[v.status.value] += 1
            if v.undecided or v.certificate.get("pipeline") == Status.UNDECIDED.value:
                undecided += 1
            else:
                decided += 1
        checks.append(_suite_check("bound agrees with pipeline", decided, undecided, mismatches, verdicts=tally))
        logger.info(f"✓ {count} instances: {tally}, {len(mismatches)} disagreement(s)")

        logger.info("Step 3/3: Testing the bound at 1 -/+ 1e-9...")
        eps = Fraction(1, 10 ** 9)
        bad = []
        checked = 0
        for i, p in enumerate(instances):
            if p.a_sq.compare(atom_mass(p.eta1, p.b_sq)) == 1:
                continue
            others = min((v for k, v in thm4_bound(p).terms_sq.items() if k != "core_column"),
                         key=lambda s: s.to_mpf())
            if others.sign() != 1:
                continue
            checked += 1
            inside = FlatParams(p.a_sq, p.b_sq, p.xi, p.eta1, others * (1 - eps) ** 2)
            outside = FlatParams(p.a_sq, p.b_sq, p.xi, p.eta1, others * (1 + eps) ** 2)
            if not (thm4_subnormal(inside).holds and thm4_subnormal(outside).fails):
                bad.append(i)
        checks.append(CheckResult(name="boundary sharpness", passed=checked > 0 and not bad,
                                  detail={"checked": checked, "failures": bad}))
        logger.info(f"✓ {checked} boundaries checked")
        return checks, []

    # exploratory

    def run_conjecture_search(self) -> Checks:
        """
        Search commuting fields outside the tensor-core families for
        (T1, T2^2) and (T1^2, T2) passing while (T1, T2) does not. Never
        asserts; subnormality is screened by k-hyponormality up to k = 4.
        """
        k = Config.SCREEN_K
        count = self._count(Config.CONJECTURE_INSTANCES)
        logger.info(f"Step 1/1: Screening {count} random commuting fields (ceiling k={k})...")
        rng = np.random.default_rng(self.seed)
        candidates, screened = [], 0
        for i in range(count):
            T = random_commuting_field(rng)
            try:
                vertical = [is_k_hyponormal_pair(S, k) for S in power_pair(T, 1, 2)]
                horizontal = [is_k_hyponormal_pair(S, k) for S in power_pair(T, 2, 1)]
            except NotInClassError as e:
                logger.debug(f"field {i} skipped: {e}")
                continue
            if not all(v.holds for v in vertical + horizontal):
                continue
            screened += 1
            base = is_k_hyponormal_pair(T, k)
            if base.fails:
                candidates.append({"index": i, "field": T.to_dict(), "verdict": base.to_dict()})
        outcome = "candidate found" if candidates else "no counterexample found"
        note = f"open conjecture: {outcome} (k-hyponormality ceiling k={k})"
        logger.info(f"✓ {note}; {screened} field(s) passed both powers")
        return [CheckResult(name="exploratory search", passed=True,
                            detail={"fields": count, "powers_pass": screened, "candidates": candidates})], [note]


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    orchestrator = VerificationOrchestrator()
    report = orchestrator.verify("firstmain")
    print(report.model_dump_json(indent=2))
