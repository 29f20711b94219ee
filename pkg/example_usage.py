"""
Example usage of the shiftlab library.
"""
import json
from fractions import Fraction

from families import Figure0Params, build_figure0, classify_figure0, figure0_curves
from measures import dirac, lebesgue, moment1
from numerics import jsonable
from shift1 import WeightSeq, berger_measure, is_k_hyponormal, subnormal_verdict
from shift2 import is_hyponormal_pair, subnormal_TC


def one_variable():
    """A shift with one explicit weight in front of the Bergman-like tail t dt on [0, 1]."""
    tail = lebesgue(0, 1, 2).scale(Fraction(1, 2))
    for x in (Fraction(1, 2), Fraction(9, 16), Fraction(3, 5)):
        W = WeightSeq.from_measure(tail, [x], label=f"x={x}")
        print(f"{W.label}:")
        print(f"  2-hyponormal: {is_k_hyponormal(W, 2).status.value}")
        print(f"  subnormal:    {subnormal_verdict(W).status.value}")
    print(f"Berger measure at x=1/2: {berger_measure(WeightSeq.from_measure(tail, [Fraction(1, 2)])).to_dict()}")


def figure0():
    """Region labels across a row of the Figure-0 plane."""
    a = Fraction(1, 2)
    print(json.dumps(jsonable(figure0_curves(a)), indent=2))
    for kappa in (Fraction(1, 2), Fraction(17, 25), Fraction(17, 20)):
        c = classify_figure0(Figure0Params(a * a, kappa * kappa))
        print(f"kappa={kappa}: {c.region}")

    T = build_figure0(Figure0Params.from_values(a, Fraction(1, 2)))
    print(f"hyponormal: {is_hyponormal_pair(T).status.value}")
    v = subnormal_TC(T)
    print(f"subnormal:  {v.status.value}")
    if v.holds:
        mu = v.certificate["measure"]
        print(f"  Berger measure total mass: {mu.mass()}")


if __name__ == "__main__":
    print("=" * 60)
    print("One-variable shifts")
    print("=" * 60)
    one_variable()
    print()
    print("=" * 60)
    print("Figure-0 family")
    print("=" * 60)
    figure0()
    print(f"\nmoment of delta_1/2: {moment1(dirac(Fraction(1, 2)), 2)}")
