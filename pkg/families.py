"""
Parametric families of 2-variable weighted shifts.

Every family here has a tensor core and is built from five measures and two
weights: the Berger measure mu_x of the bottom row, the core measures xi and
eta, the Berger measure (eta_y)_1 of column 0 above the origin, x**2 (the
first weight of row 1) and y0**2 (the first weight of column 0).
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from measures import (
    Measure1D,
    atom_mass,
    dirac,
    inv_t_norm,
    lebesgue,
    moment1,
    power,
    restriction_measure,
)
from numerics import (
    INFINITE,
    ONE,
    ZERO,
    DomainError,
    MeasureError,
    Number,
    Scalar,
    Status,
    TesterDisagreement,
    Track,
    Verdict,
    bisect_threshold,
)
from shift1 import MeasureTail, WeightSeq, subnormal_verdict
from shift2 import (
    WeightField,
    col_seq,
    is_hyponormal_pair,
    is_k_hyponormal_pair,
    is_tensor_form,
    power_horizontal_subnormal,
    power_pair,
    power_vertical_subnormal,
    restriction,
    row_seq,
    six_point,
    subnormal_TC,
)

logger = logging.getLogger(__name__)


# generic tensor-core builder


@dataclass(frozen=True)
class TCParams:
    mu_x: Measure1D
    xi: Measure1D
    eta: Measure1D
    eta_y1: Measure1D
    x_sq: Scalar
    y0_sq: Scalar

    def to_dict(self):
        return {
            "mu_x": self.mu_x.to_dict(),
            "xi": self.xi.to_dict(),
            "eta": self.eta.to_dict(),
            "eta_y1": self.eta_y1.to_dict(),
            "x_sq": str(self.x_sq),
            "y0_sq": str(self.y0_sq),
        }


def _lone_atom(mu: Measure1D) -> Optional[Scalar]:
    if mu.is_atomic and len(mu.atoms) == 1:
        return mu.atoms[0].position
    return None


def _supported_on(mu: Measure1D, points: Sequence[Scalar]) -> bool:
    return mu.is_atomic and all(any(a.position == p for p in points) for a in mu.atoms)


def _ratio(mu: Measure1D, k: int) -> Scalar:
    return moment1(mu, k + 1) / moment1(mu, k)


def tc_field(p: TCParams, tail_certified: bool = False, tail_note: str = "", label: str = "tc") -> WeightField:
    """
    Commuting field with tensor core xi x eta.

    alpha(k1, 0) and beta(0, k2 >= 1) are moment ratios of mu_x and (eta_y)_1;
    the remaining edge weights are forced by commutativity:
    alpha**2(0, k2) = x**2 gamma_{k2-1}(eta) / gamma_{k2-1}((eta_y)_1) and
    beta**2(k1, 0) = y0**2 x**2 gamma_{k1-1}(xi) / gamma_{k1}(mu_x).
    """
    for name, mu in (("mu_x", p.mu_x), ("xi", p.xi), ("eta", p.eta), ("eta_y1", p.eta_y1)):
        if mu.mass().compare(ONE) not in (0, None):
            raise MeasureError(f"{name} must be a probability measure")
    if p.x_sq.sign() != 1 or p.y0_sq.sign() != 1:
        raise DomainError("x^2 and y0^2 must be positive")

    def alpha(k1, k2):
        if k2 == 0:
            return _ratio(p.mu_x, k1)
        if k1 == 0:
            return p.x_sq * moment1(p.eta, k2 - 1) / moment1(p.eta_y1, k2 - 1)
        return _ratio(p.xi, k1 - 1)

    def beta(k1, k2):
        if k1 == 0:
            return p.y0_sq if k2 == 0 else _ratio(p.eta_y1, k2 - 1)
        if k2 == 0:
            return p.y0_sq * p.x_sq * moment1(p.xi, k1 - 1) / moment1(p.mu_x, k1)
        return _ratio(p.eta, k2 - 1)

    c = _lone_atom(p.xi)
    h_repeat = c is not None and _supported_on(p.mu_x, [ZERO, c])
    d = _lone_atom(p.eta)
    v_repeat = d is not None and _supported_on(p.eta_y1, [ZERO, d])
    K1 = 2 if h_repeat else Config.RECT[0]
    K2 = 2 if v_repeat else Config.RECT[1]
    return WeightField.from_functions(
        alpha, beta, K1, K2,
        h_repeat=h_repeat, v_repeat=v_repeat,
        tail_certified=tail_certified, tail_note=tail_note,
        row_seqs={0: WeightSeq.from_measure(p.mu_x, label="row 0")},
        col_seqs={0: WeightSeq((p.y0_sq,), MeasureTail(p.eta_y1), label="column 0")},
        core_measures=(p.xi, p.eta),
        label=label,
    )


# Figure-0 family


@dataclass(frozen=True)
class Figure0Params:
    """Parameters stored as exact squares; every test is polynomial in a**2 and kappa**2."""

    a_sq: Scalar
    kappa_sq: Scalar

    def __post_init__(self):
        a_sq, k_sq = Scalar.of(self.a_sq), Scalar.of(self.kappa_sq)
        if a_sq.sign() != 1 or a_sq.compare(1) == 1:
            raise DomainError(f"a must lie in (0, 1], got a^2 = {a_sq}")
        if k_sq.sign() != 1 or k_sq.compare(1) == 1:
            raise DomainError(f"kappa must lie in (0, 1], got kappa^2 = {k_sq}")
        object.__setattr__(self, "a_sq", a_sq)
        object.__setattr__(self, "kappa_sq", k_sq)

    @classmethod
    def from_values(cls, a: Number, kappa: Number) -> "Figure0Params":
        return cls(Scalar.of(a) ** 2, Scalar.of(kappa) ** 2)

    def to_dict(self):
        return {"family": "figure0", "a_sq": str(self.a_sq), "kappa_sq": str(self.kappa_sq)}


def xi_alpha(kappa_sq: Number) -> Measure1D:
    """(1 - kappa^2) delta_0 + kappa^2/2 ds on [0, 1] + kappa^2/2 delta_1."""
    k = Scalar.of(kappa_sq)
    half = k / 2
    return dirac(0, ONE - k) + lebesgue(0, 1, half) + dirac(1, half)


def build_figure0(p: Figure0Params) -> WeightField:
    """
    Bottom row alpha_0 = kappa sqrt(3/4), alpha_n = sqrt((n+1)(n+3))/(n+2);
    a-column above the origin; 1 elsewhere in the interior.
    """
    params = TCParams(
        mu_x=xi_alpha(p.kappa_sq),
        xi=dirac(1),
        eta=dirac(1),
        eta_y1=dirac(1),
        x_sq=p.a_sq,
        y0_sq=p.kappa_sq,
    )
    certified = p.a_sq.compare(Fraction(1, 2)) in (-1, 0)
    return tc_field(params, tail_certified=certified,
                    tail_note="kappa-free lattice points are subnormal for a^2 <= 1/2",
                    label=f"figure0(a^2={p.a_sq}, kappa^2={p.kappa_sq})")


# thresholds

CURVES = ("h1", "h21", "h2", "hinf")

_DOMAINS = {
    "h1": ("a^4 <= 2/3", lambda a_sq: (a_sq * a_sq).compare(Fraction(2, 3)) in (-1, 0)),
    "h21": ("a^4 <= 3/5", lambda a_sq: (a_sq * a_sq).compare(Fraction(3, 5)) in (-1, 0)),
    "h2": ("a^2 <= 1/2", lambda a_sq: a_sq.compare(Fraction(1, 2)) in (-1, 0)),
    "hinf": ("a^2 <= 1/2", lambda a_sq: a_sq.compare(Fraction(1, 2)) in (-1, 0)),
}


def in_domain(curve: str, a_sq: Number) -> bool:
    if curve not in _DOMAINS:
        raise DomainError(f"unknown curve {curve!r}; expected one of {', '.join(CURVES)}")
    a_sq = Scalar.of(a_sq)
    return a_sq.sign() == 1 and _DOMAINS[curve][1](a_sq)


def threshold_sq(curve: str, a_sq: Number) -> Scalar:
    """Square of the threshold curve at a, exact for rational a**2."""
    a_sq = Scalar.of(a_sq)
    if not in_domain(curve, a_sq):
        raise DomainError(f"{curve} is defined for 0 < a with {_DOMAINS[curve][0]}, got a^2 = {a_sq}")
    a4 = a_sq * a_sq
    if curve == "h1":
        return (32 - 48 * a4) / (59 - 72 * a_sq)
    if curve == "h21":
        return 9 * (3 - 5 * a4) / (47 - 60 * a_sq)
    if curve == "h2":
        return (81 - 144 * a_sq) / (157 - 360 * a_sq + 144 * a4)
    return ONE / (2 - a_sq)


def threshold(curve: str, a: Optional[Number] = None, a_sq: Optional[Number] = None) -> Scalar:
    if (a is None) == (a_sq is None):
        raise ValueError("pass exactly one of a and a_sq")
    if a_sq is None:
        a_sq = Scalar.of(a) ** 2
    return threshold_sq(curve, a_sq).sqrt()


def power_pair_origin_h(a_sq: Number, kappa_sq: Number) -> Scalar:
    """(60a^2 - 47) kappa^2 + 27 - 45a^4: sign of the (T1^2, T2) Six-point determinant at 0."""
    a_sq, k_sq = Scalar.of(a_sq), Scalar.of(kappa_sq)
    return (60 * a_sq - 47) * k_sq + 27 - 45 * a_sq * a_sq


def remark_g(a_sq: Number, kappa_sq: Number) -> Scalar:
    """(72a^2 - 59) kappa^2 + 32 - 48a^4: 36 times the origin Six-point determinant."""
    a_sq, k_sq = Scalar.of(a_sq), Scalar.of(kappa_sq)
    return (72 * a_sq - 59) * k_sq + 32 - 48 * a_sq * a_sq


def remark_f(a_sq: Number) -> Scalar:
    return 84 - 95 * Scalar.of(a_sq)


def a_int(tol: Number = Fraction(1, 10000)) -> Scalar:
    """Crossing of h1 and h21 on (0, (3/5)^(1/4)], by exact-sign bisection of h1^2 - h21^2."""

    def below(a: Scalar) -> bool:
        a_sq = a * a
        return (threshold_sq("h1", a_sq) - threshold_sq("h21", a_sq)).sign() != 1

    return bisect_threshold(below, Fraction(1, 10), Fraction(22, 25), tol)


def crossing_sign_changes(points: int = 1000) -> int:
    """Sign changes of h1^2 - h21^2 on an exact grid over (0, 22/25]."""
    changes, last = 0, None
    for k in range(1, points + 1):
        a = Fraction(22, 25) * Fraction(k, points)
        a_sq = Scalar(a * a)
        s = (threshold_sq("h1", a_sq) - threshold_sq("h21", a_sq)).sign()
        if s in (0, None):
            continue
        if last is not None and s != last:
            changes += 1
        last = s
    return changes


def figure0_curves(a: Number) -> Dict[str, Optional[Scalar]]:
    a_sq = Scalar.of(a) ** 2
    return {c: threshold_sq(c, a_sq).sqrt() if in_domain(c, a_sq) else None for c in CURVES}


# thresholds recovered from the generic testers

def h1_by_bisection(a: Number, tol: Number = Fraction(1, 10 ** 10)) -> Scalar:
    """kappa where the Six-point sweep of the Figure-0 field stops passing."""

    def hyponormal(kappa: Scalar):
        return is_hyponormal_pair(build_figure0(Figure0Params.from_values(a, kappa)))

    return bisect_threshold(hyponormal, Fraction(1, 10), 1, tol)


def h21_by_bisection(a: Number, tol: Number = Fraction(1, 10 ** 10)) -> Scalar:
    """kappa where the origin Six-point Test of the (T1^2, T2) summand stops passing."""

    def origin_psd(kappa: Scalar):
        T = build_figure0(Figure0Params.from_values(a, kappa))
        return six_point(power_pair(T, 2, 1)[0], (0, 0)).verdict.to_verdict()

    return bisect_threshold(origin_psd, Fraction(1, 10), 1, tol)


def h2_by_bisection(a_sq: Number, tol: Number = Fraction(1, 10 ** 10)) -> Scalar:
    """kappa where 2-hyponormality of the Figure-0 field stops holding."""

    def two_hyponormal(kappa: Scalar):
        return is_k_hyponormal_pair(build_figure0(Figure0Params(a_sq, kappa * kappa)), 2)

    return bisect_threshold(two_hyponormal, Fraction(1, 2), 1, tol)


# Figure-0 classification


@dataclass
class Figure0Classification:
    params: Figure0Params
    in_h1: bool
    in_h2: Optional[bool]
    in_hinf: bool
    power21_in_h1: bool
    label: str
    power_label: str
    scope: str
    certificates: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def region(self) -> str:
        return f"{self.label}, {self.power_label}"


def _below(curve: str, a_sq: Scalar, k_sq: Scalar) -> bool:
    return in_domain(curve, a_sq) and k_sq.compare(threshold_sq(curve, a_sq)) in (-1, 0)


def region_label(in_h1: bool, in_h2: Optional[bool], in_hinf: bool) -> str:
    if in_hinf:
        return "H_inf"
    if in_h2:
        return "H2_not_H_inf"
    if in_h1:
        return "H1_only"
    return "not_H1"


def _expect(name: str, expected: bool, verdict: Verdict, certificates: List[Dict[str, Any]]):
    entry = {"check": name, "expected": expected, "verdict": verdict.to_dict()}
    certificates.append(entry)
    if verdict.undecided:
        logger.warning("%s undecided: %s", name, verdict.reason)
        return
    if verdict.holds != expected:
        raise TesterDisagreement(f"{name}: closed form says {expected}, tester says {verdict.status.value}",
                                 {"closed_form": expected, "tester": verdict.to_dict()})


def classify_figure0(p: Figure0Params, lattice: bool = True) -> Figure0Classification:
    """
    Region of (a, kappa) from the closed-form thresholds.

    Labels are the origin-scoped conditions: the origin Six-point Tests of T
    and of the (T1^2, T2) summand always cross-check them. For a^2 <= 1/2 the
    full-lattice testers cross-check them as well.
    """
    a_sq, k_sq = p.a_sq, p.kappa_sq
    half = a_sq.compare(Fraction(1, 2)) in (-1, 0)
    in_h1 = _below("h1", a_sq, k_sq)
    in_h2 = _below("h2", a_sq, k_sq) if half else None
    in_hinf = half and _below("hinf", a_sq, k_sq)
    power21 = _below("h21", a_sq, k_sq)
    T = build_figure0(p)
    certificates: List[Dict[str, Any]] = []

    origin = six_point(T, (0, 0)).verdict.to_verdict("origin Six-point")
    _expect("origin Six-point of T", in_h1, origin, certificates)
    summands = power_pair(T, 2, 1)
    power_origin = six_point(summands[0], (0, 0)).verdict.to_verdict("origin Six-point of (T1^2, T2)")
    _expect("origin Six-point of (T1^2, T2)", power21, power_origin, certificates)
    h_sign = power_pair_origin_h(a_sq, k_sq).sign()
    if (h_sign != -1) != power21:
        raise TesterDisagreement("printed power polynomial disagrees with h21",
                                 {"h": str(power_pair_origin_h(a_sq, k_sq)), "power21": power21})

    scope = "origin"
    if lattice and half:
        scope = "lattice"
        _expect("Six-point sweep", in_h1, is_hyponormal_pair(T), certificates)
        _expect("2-hyponormality", bool(in_h2), is_k_hyponormal_pair(T, 2), certificates)
        _expect("subnormality", in_hinf, subnormal_TC(T), certificates)
        power_sweep = Verdict.all_of([is_hyponormal_pair(S) for S in summands], "(T1^2, T2)")
        _expect("(T1^2, T2) Six-point sweep", power21, power_sweep, certificates)
    elif lattice:
        v = is_hyponormal_pair(T)
        certificates.append({"check": "Six-point sweep (diagnostic)", "verdict": v.to_dict()})
        logger.info("a^2 > 1/2: lattice hyponormality is %s; labels are origin-scoped", v.status.value)

    return Figure0Classification(
        params=p,
        in_h1=in_h1,
        in_h2=in_h2,
        in_hinf=in_hinf,
        power21_in_h1=power21,
        label=region_label(in_h1, in_h2, in_hinf),
        power_label="power21_in_H1" if power21 else "power21_not_H1",
        scope=scope,
        certificates=certificates,
    )


def classify_field(T: WeightField, depth: int = Config.LATTICE_DEPTH) -> Dict[str, Any]:
    """Generic classification record of a commuting field."""
    h1 = is_hyponormal_pair(T, depth)
    h2 = is_k_hyponormal_pair(T, 2, depth)
    tensor = is_tensor_form(T, depth)
    if tensor:
        parts = [subnormal_verdict(row_seq(T, 0)), subnormal_verdict(col_seq(T, 0))]
        sub = Verdict.all_of(parts, "tensor form")
    else:
        sub = subnormal_TC(T)
    p21 = Verdict.all_of([is_hyponormal_pair(S, depth) for S in power_pair(T, 2, 1)], "(T1^2, T2)")
    p12 = Verdict.all_of([is_hyponormal_pair(S, depth) for S in power_pair(T, 1, 2)], "(T1, T2^2)")
    label = region_label(h1.holds, h2.holds if not h2.undecided else None, sub.holds)
    if tensor and sub.holds:
        label = "H_inf (tensor)"
    return {
        "label": label,
        "k_hypo": {"k1": h1, "k2": h2},
        "subnormal": sub,
        "power_21": p21,
        "power_12": p12,
    }


# flat family


@dataclass(frozen=True)
class FlatParams:
    """
    Flat family: core (I (x) U_+, b W), row 0 with Berger measure xi and
    column 0 shift(beta_0, beta_1, ...) where shift(beta_1, ...) has Berger
    measure eta_1.
    """

    a_sq: Scalar
    b_sq: Scalar
    xi: Measure1D
    eta1: Measure1D
    beta0_sq: Scalar

    def __post_init__(self):
        for name in ("a_sq", "b_sq", "beta0_sq"):
            v = Scalar.of(getattr(self, name))
            if v.sign() != 1:
                raise DomainError(f"{name} must be positive")
            object.__setattr__(self, name, v)
        if self.b_sq.compare(1) == 1:
            raise DomainError("b must lie in (0, 1]")
        for name, mu in (("xi", self.xi), ("eta1", self.eta1)):
            if mu.mass().compare(ONE) not in (0, None):
                raise MeasureError(f"{name} must be a probability measure")
        if self.p.sign() == -1 or self.q.sign() == -1:
            raise MeasureError("xi must be nonnegative")
        norm = self.eta1_norm
        if norm is INFINITE or (self.a_sq / self.b_sq).compare(norm) != -1:
            raise DomainError("need a^2/b^2 < ||1/t|| in L1(eta_1)")

    @classmethod
    def from_eta(cls, a_sq: Number, b_sq: Number, xi: Measure1D, eta: Measure1D) -> "FlatParams":
        """Parameters from the Berger measure eta of the whole column 0."""
        beta0_sq = moment1(eta, 1)
        return cls(Scalar.of(a_sq), Scalar.of(b_sq), xi, restriction_measure(eta, 1), beta0_sq)

    @property
    def p(self) -> Scalar:
        return atom_mass(self.xi, 0)

    @property
    def q(self) -> Scalar:
        return atom_mass(self.xi, 1)

    @property
    def eta1_norm(self):
        return inv_t_norm(self.eta1)

    @property
    def v(self) -> Scalar:
        """eta({b^2}) for the column-0 measure obtained by backward extension."""
        return self.beta0_sq * atom_mass(self.eta1, self.b_sq) / self.b_sq

    def contractive_flags(self, depth: int = Config.LATTICE_DEPTH) -> List[int]:
        """Rows k2 whose first weight alpha(0, k2) = a b^(k2-1) / prod beta_j exceeds 1."""
        out = []
        for k2 in range(1, depth + 1):
            w = self.a_sq * self.b_sq ** (k2 - 1) / moment1(self.eta1, k2 - 1)
            if w.compare(1) == 1:
                out.append(k2)
        return out

    def to_dict(self):
        return {
            "family": "flat",
            "a_sq": str(self.a_sq),
            "b_sq": str(self.b_sq),
            "xi": self.xi.to_dict(),
            "eta1": self.eta1.to_dict(),
            "beta0_sq": str(self.beta0_sq),
        }


def build_flat(p: FlatParams) -> WeightField:
    params = TCParams(
        mu_x=p.xi,
        xi=dirac(1),
        eta=dirac(p.b_sq),
        eta_y1=p.eta1,
        x_sq=p.a_sq,
        y0_sq=p.beta0_sq,
    )
    return tc_field(params, label="flat")


@dataclass(frozen=True)
class Thm4Bound:
    terms_sq: Dict[str, Scalar]
    bound_sq: Scalar

    def to_dict(self):
        return {"terms_sq": {k: str(v) for k, v in self.terms_sq.items()}, "bound_sq": str(self.bound_sq)}


def thm4_bound(p: FlatParams) -> Thm4Bound:
    """Squares of the four terms of the beta_0 bound."""
    N = p.eta1_norm
    gap = N - p.a_sq / p.b_sq
    terms = {
        "core_column": p.b_sq * p.v / p.a_sq,
        "bottom_atom_0": p.p / gap,
        "bottom_atom_1": p.b_sq * p.q / p.a_sq,
        "column_0": ONE / N,
    }
    bound = min(terms.values(), key=lambda s: s.to_mpf())
    return Thm4Bound(terms, bound)


def thm4_subnormal(p: FlatParams) -> Verdict:
    """
    beta_0^2 <= min of the four squared terms, cross-checked against the
    generic backward-extension pipeline on the built field.
    """
    flags = p.contractive_flags()
    if flags:
        logger.warning("flat instance violates contractivity in rows %s", flags)
    b = thm4_bound(p)
    c = p.beta0_sq.compare(b.bound_sq)
    track = Track.EXACT if p.beta0_sq.is_exact and b.bound_sq.is_exact else Track.APPROX
    if c is None:
        formula = Verdict.pending("beta_0 at the bound within tolerance", track, **b.terms_sq)
    else:
        formula = Verdict.from_bool(c != 1, "beta_0 bound", track, bound_sq=b.bound_sq, **b.terms_sq)
    generic = subnormal_TC(build_flat(p))
    if not formula.undecided and not generic.undecided and formula.status is not generic.status:
        raise TesterDisagreement("flat-family bound disagrees with the backward-extension pipeline",
                                 {"formula": formula.to_dict(), "pipeline": generic.to_dict()})
    cert = dict(formula.certificate)
    cert["pipeline"] = generic.status.value
    cert["contractive"] = not flags
    return Verdict(formula.status, formula.reason, cert, formula.track)


def _rational(rng: np.random.Generator, lo: int, hi: int, den: int) -> Fraction:
    return Fraction(int(rng.integers(lo, hi + 1)), den)


def _random_probability(rng: np.random.Generator, positions: Sequence[Fraction]) -> Measure1D:
    weights = [int(rng.integers(1, 10)) for _ in positions]
    total = sum(weights)
    return Measure1D.build(atoms=[(c, Fraction(w, total)) for c, w in zip(positions, weights)])


def _random_positions(rng: np.random.Generator, k: int, zero: bool = False) -> List[Fraction]:
    pool = rng.choice(10, size=k, replace=False)
    return [Fraction(int(i) + (0 if zero else 1), 10) for i in pool]


def random_flat_params(rng: np.random.Generator) -> FlatParams:
    """Atomic flat instance with a^2 <= eta_1({b^2}) half the time and beta_0 near the bound."""
    b_sq = _rational(rng, 5, 10, 10)
    other = Fraction(int(rng.integers(1, 10)), 10) * b_sq
    w = _rational(rng, 2, 8, 10)
    eta1 = Measure1D.build(atoms=[(b_sq, w), (other, 1 - w)])
    p_mass = _rational(rng, 1, 4, 10)
    q_mass = _rational(rng, 1, 5, 10)
    rest = 1 - p_mass - q_mass
    atoms = [(0, p_mass), (1, q_mass)]
    if rest > 0:
        atoms.append((_rational(rng, 1, 9, 10), rest))
    xi = Measure1D.build(atoms=atoms)
    N = Fraction(w) / b_sq + Fraction(1 - w) / other
    a_sq = w * _rational(rng, 5, 15, 10)
    limit = b_sq * N
    if a_sq >= limit:
        a_sq = limit / 2
    draft = FlatParams(Scalar(a_sq), Scalar(b_sq), xi, eta1, ONE)
    bound = min((v for k, v in thm4_bound(draft).terms_sq.items() if k != "core_column"), key=lambda s: s.to_mpf())
    scale = _rational(rng, 5, 15, 10)
    beta0_sq = bound * scale
    if beta0_sq.sign() != 1:
        beta0_sq = Scalar(Fraction(1, 10))
    return FlatParams(Scalar(a_sq), Scalar(b_sq), xi, eta1, beta0_sq)


# exam family


@dataclass(frozen=True)
class ExamParams:
    """0 < a < x < 1, y > 0; eta is the Berger measure of shift(beta_1, beta_2, ...)."""

    x: Scalar
    a: Scalar
    y: Scalar
    eta: Measure1D = field(default_factory=lambda: lebesgue(Fraction(1, 2), Fraction(3, 2)))

    def __post_init__(self):
        x, a, y = Scalar.of(self.x), Scalar.of(self.a), Scalar.of(self.y)
        if not (a.sign() == 1 and a.compare(x) == -1 and x.compare(1) == -1):
            raise DomainError("need 0 < a < x < 1")
        if y.sign() != 1:
            raise DomainError("need y > 0")
        if self.eta.mass().compare(ONE) not in (0, None):
            raise MeasureError("eta must be a probability measure")
        if inv_t_norm(self.eta) is INFINITE:
            raise MeasureError("eta needs finite ||1/t||")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "y", y)

    def with_y(self, y: Number) -> "ExamParams":
        return ExamParams(self.x, self.a, Scalar.of(y), self.eta)

    def to_dict(self):
        return {"family": "exam", "x": str(self.x), "a": str(self.a), "y": str(self.y), "eta": self.eta.to_dict()}


def build_exam(p: ExamParams) -> WeightField:
    """alpha: x at the origin, a up column 0, 1 elsewhere; beta: y, ay/x along row 0, beta_k2 above."""
    x_sq, a_sq = p.x * p.x, p.a * p.a
    params = TCParams(
        mu_x=dirac(0, ONE - x_sq) + dirac(1, x_sq),
        xi=dirac(1),
        eta=p.eta,
        eta_y1=p.eta,
        x_sq=a_sq,
        y0_sq=p.y * p.y,
    )
    return tc_field(params, tail_certified=True, tail_note="rows above 0 are subnormal; row 0 repeats",
                    label=f"exam(x={p.x}, a={p.a}, y={p.y})")


def eta_n(eta: Measure1D, n: int) -> Measure1D:
    """Berger measure of shift(prod_{n}^{2n-1} beta_j, prod_{2n}^{3n-1} beta_j, ...)."""
    return power(restriction_measure(eta, n - 1), n)


@dataclass(frozen=True)
class ExamBounds:
    m: Scalar
    s: Scalar

    def to_dict(self):
        return {"m": str(self.m), "s": str(self.s)}


def exam_bounds(p: ExamParams) -> ExamBounds:
    """m: the hyponormality bound on y; s: the subnormality bound on y."""
    x_sq, a_sq = p.x * p.x, p.a * p.a
    N = inv_t_norm(p.eta)
    beta1_sq = moment1(p.eta, 1)
    six = (beta1_sq * x_sq * (1 - x_sq) / (x_sq + a_sq * a_sq - 2 * a_sq * x_sq)).sqrt()
    col = (ONE / N).sqrt()
    m = min((six, col), key=lambda s: s.to_mpf())
    s = ((1 - x_sq) / ((1 - a_sq) * N)).sqrt()
    return ExamBounds(m, s)


def monomial_bound(p: ExamParams, n: int) -> Scalar:
    """(x/a) sqrt(1 / (gamma_{n-1}(eta) ||1/t||_{eta^(n)})): the y-bound for T1 T2^n subnormal."""
    if n < 1:
        raise ValueError("n must be at least 1")
    norm = inv_t_norm(eta_n(p.eta, n))
    if norm is INFINITE:
        return ZERO
    return p.x / p.a * (ONE / (moment1(p.eta, n - 1) * norm)).sqrt()


# random TC instances


@dataclass(frozen=True)
class TCInstance:
    field: WeightField
    params: TCParams
    seed: Optional[int]
    index: int = 0

    def to_dict(self):
        return {"seed": self.seed, "index": self.index, "params": self.params.to_dict()}


def random_tc_params(rng: np.random.Generator) -> TCParams:
    """2-3 atom measures with rational data; thm0 holds for roughly half the draws."""
    xi = _random_probability(rng, _random_positions(rng, int(rng.integers(2, 4))))
    eta = _random_probability(rng, _random_positions(rng, int(rng.integers(2, 4))))
    zeta = _random_probability(rng, _random_positions(rng, int(rng.integers(1, 3))))
    lam = _rational(rng, 2, 7, 8)
    eta_y1 = eta.scale(lam) + zeta.scale(1 - lam)
    mu_x = _random_probability(rng, sorted(_random_positions(rng, int(rng.integers(2, 4)), zero=True)))
    if moment1(mu_x, 1).sign() != 1:
        mu_x = mu_x + dirac(1)
        mu_x = mu_x.scale(ONE / mu_x.mass())
    r = inv_t_norm(xi)
    x_sq = Scalar(lam) * _rational(rng, 4, 14, 10) / r
    y0_sq = _rational(rng, 3, 12, 10) / inv_t_norm(eta_y1)
    return TCParams(mu_x, xi, eta, eta_y1, Scalar.of(x_sq), Scalar.of(y0_sq))


def build_tc_instance(rng: np.random.Generator, seed: Optional[int] = None, index: int = 0) -> TCInstance:
    params = random_tc_params(rng)
    return TCInstance(tc_field(params, label=f"tc[{seed}:{index}]"), params, seed, index)


def tc_instances(count: int = Config.TC_INSTANCES, seed: int = Config.DEFAULT_SEED) -> List[TCInstance]:
    rng = np.random.default_rng(seed)
    return [build_tc_instance(rng, seed, i) for i in range(count)]


def tc_counterexample_field(c: Number = 2) -> WeightField:
    """
    Commuting field whose R_22 is of tensor form but whose core is not:
    beta^2(1,1) = c, alpha^2(1, k2>=2) = 1/c, alpha^2(0, k2>=2) = c, 1 elsewhere.
    """
    c = Scalar.of(c)
    if c.sign() != 1 or c.compare(1) == 0:
        raise DomainError("c must be positive and different from 1")

    def alpha(k1, k2):
        if k2 >= 2 and k1 == 1:
            return ONE / c
        if k2 >= 2 and k1 == 0:
            return c
        return ONE

    def beta(k1, k2):
        return c if (k1, k2) == (1, 1) else ONE

    return WeightField.from_functions(alpha, beta, 2, 2, h_repeat=True, v_repeat=True, label=f"propagation(c={c})")


def random_commuting_field(rng: np.random.Generator, K: Tuple[int, int] = (3, 3)) -> WeightField:
    """
    Commuting repeat-tail field outside the tensor-core families: random
    alpha for k1 < K1 and beta on column 0, the rest forced by commutativity.
    """
    K1, K2 = K
    alpha = [[Fraction(int(rng.integers(5, 11)), 10) for _ in range(K1)] for _ in range(K2 + 1)]
    c = Fraction(1)
    for row in alpha:
        row.append(c)
    beta = [[Fraction(0)] * (K1 + 1) for _ in range(K2 + 1)]
    for k2 in range(K2 + 1):
        beta[k2][0] = Fraction(int(rng.integers(5, 11)), 10)
    for k1 in range(K1):
        for k2 in range(K2 + 1):
            up = alpha[min(k2 + 1, K2)][k1]
            beta[k2][k1 + 1] = up * beta[k2][k1] / alpha[k2][k1]
    return WeightField(
        tuple(tuple(r) for r in alpha),
        tuple(tuple(r) for r in beta),
        h_repeat=True, v_repeat=True, label="random-commuting",
    )


def tc_chain_status(T: WeightField) -> Dict[str, Status]:
    """Subnormality of (T1, T2), (T1, T2^2) and (T1^2, T2)."""
    return {
        "pair": subnormal_TC(T).status,
        "vertical": power_vertical_subnormal(T, 2).combined.status,
        "horizontal": power_horizontal_subnormal(T, 2).combined.status,
    }


def propagation_check(T: WeightField) -> Dict[str, bool]:
    return {
        "r22_tensor": is_tensor_form(restriction(T, 2, 2)),
        "core_tensor": is_tensor_form(restriction(T, 1, 1)),
    }
