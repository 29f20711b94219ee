"""
One-variable weighted shifts.

A WeightSeq stores squared weights: an explicit prefix followed by one tail
rule. Verdicts are unconditional for constant and measure tails (only finitely
many distinct Hankel matrices occur) and undecided-at-truncation for closed-form
tails unless the tail declares the metadata that settles them.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

from config import Config
from measures import (
    Measure1D,
    dirac,
    inv_t_norm,
    moment1,
    nonnegative,
    packet_measure,
    power,
    restriction_measure,
    t_weight,
)
from numerics import (
    INFINITE,
    ONE,
    DomainError,
    MeasureError,
    Number,
    Scalar,
    SymMatrix,
    Track,
    Verdict,
    psd_check,
    scalar_max_track,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConstantTail:
    """alpha_n**2 = value for every n past the prefix."""

    value: Scalar

    def to_dict(self):
        return {"kind": "constant", "value": str(self.value)}


@dataclass(frozen=True)
class MeasureTail:
    """alpha_{P+j}**2 = gamma_{j+1}(measure) / gamma_j(measure)."""

    measure: Measure1D

    def to_dict(self):
        return {"kind": "measure", "measure": self.measure.to_dict()}


@dataclass(frozen=True)
class ClosedFormTail:
    """
    alpha_n**2 = generator(n) for n past the prefix (absolute index).

    monotone_from declares alpha_n**2 nondecreasing from that index on;
    bound declares sup alpha_n**2.
    """

    generator: Callable[[int], Scalar]
    monotone_from: Optional[int] = None
    bound: Optional[Scalar] = None
    label: str = "closed_form"

    def to_dict(self):
        return {
            "kind": "closed_form",
            "label": self.label,
            "monotone_from": self.monotone_from,
            "bound": None if self.bound is None else str(self.bound),
        }


Tail = Union[ConstantTail, MeasureTail, ClosedFormTail]


@dataclass(frozen=True)
class WeightSeq:
    prefix: Tuple[Scalar, ...]
    tail: Tail
    berger: Optional[Measure1D] = None
    label: str = ""
    _moments: List[Scalar] = field(default_factory=list, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(Scalar.of(w) for w in self.prefix))
        for n, w in enumerate(self.prefix):
            if w.sign() != 1:
                raise DomainError(f"squared weight {n} must be positive, got {w}")
        if isinstance(self.tail, ConstantTail):
            if Scalar.of(self.tail.value).sign() != 1:
                raise DomainError("constant tail must be positive")
            object.__setattr__(self, "tail", ConstantTail(Scalar.of(self.tail.value)))
        elif isinstance(self.tail, MeasureTail):
            mu = self.tail.measure
            if nonnegative(mu).fails:
                raise MeasureError("tail measure must be nonnegative")
            if moment1(mu, 1).sign() != 1:
                raise DomainError("tail measure must give positive weights")
        self._moments.append(ONE)

    # construction helpers

    @classmethod
    def constant(cls, prefix: Sequence[Number], value: Number, label: str = "") -> "WeightSeq":
        return cls(tuple(prefix), ConstantTail(Scalar.of(value)), label=label)

    @classmethod
    def from_measure(cls, mu: Measure1D, prefix: Sequence[Number] = (), label: str = "") -> "WeightSeq":
        """Shift whose tail is generated by mu; attaches mu as Berger measure when the prefix is empty."""
        berger = None
        if not prefix:
            berger = mu.scale(ONE / mu.mass())
        return cls(tuple(prefix), MeasureTail(mu), berger=berger, label=label)

    # queries

    @property
    def prefix_length(self) -> int:
        return len(self.prefix)

    def weight_sq(self, n: int) -> Scalar:
        if n < 0:
            raise IndexError(n)
        P = len(self.prefix)
        if n < P:
            return self.prefix[n]
        tail = self.tail
        if isinstance(tail, ConstantTail):
            return tail.value
        if isinstance(tail, MeasureTail):
            j = n - P
            return moment1(tail.measure, j + 1) / moment1(tail.measure, j)
        w = Scalar.of(tail.generator(n))
        if w.sign() != 1:
            raise DomainError(f"closed-form weight at {n} is not positive: {w}")
        return w

    def gamma(self, k: int) -> Scalar:
        return gamma(self, k)

    def bound(self) -> Optional[Scalar]:
        """sup of the squared weights, or None when the tail does not declare it."""
        values = list(self.prefix)
        tail = self.tail
        if isinstance(tail, ConstantTail):
            values.append(tail.value)
        elif isinstance(tail, MeasureTail):
            values.append(tail.measure.support_max())
        elif tail.bound is not None:
            values.append(tail.bound)
        else:
            return None
        return max(values, key=lambda s: s.to_mpf())

    def has_exact_verdicts(self) -> bool:
        return not isinstance(self.tail, ClosedFormTail)

    def to_dict(self):
        return {
            "label": self.label,
            "prefix_sq": [str(w) for w in self.prefix],
            "tail": self.tail.to_dict(),
            "berger": None if self.berger is None else self.berger.to_dict(),
        }


def unilateral() -> WeightSeq:
    """U_+ with Berger measure delta_1."""
    return WeightSeq((), ConstantTail(ONE), berger=dirac(1), label="U+")


def s_a(a_sq: Number) -> WeightSeq:
    """shift(a, 1, 1, ...) with Berger measure (1 - a**2) delta_0 + a**2 delta_1."""
    a_sq = Scalar.of(a_sq)
    berger = None
    if a_sq.compare(1) in (-1, 0):
        berger = dirac(0, ONE - a_sq) + dirac(1, a_sq)
    return WeightSeq((a_sq,), ConstantTail(ONE), berger=berger, label="S_a")


def gamma(W: WeightSeq, k: int) -> Scalar:
    """gamma_0 = 1, gamma_k = alpha_0**2 ... alpha_{k-1}**2."""
    if k < 0:
        raise ValueError("moment index must be nonnegative")
    cache = W._moments
    while len(cache) <= k:
        n = len(cache) - 1
        cache.append(cache[-1] * W.weight_sq(n))
    return cache[k]


def _unconditional_depth(W: WeightSeq) -> Optional[int]:
    """Largest base index n that needs checking, or None when no finite set suffices."""
    if isinstance(W.tail, (ConstantTail, MeasureTail)):
        return W.prefix_length
    return None


def hankel(W: WeightSeq, n: int, k: int) -> SymMatrix:
    """(gamma_{n+i+j} / gamma_n)_{0 <= i, j <= k}."""
    g = gamma(W, n)
    return SymMatrix([[gamma(W, n + i + j) / g for j in range(k + 1)] for i in range(k + 1)])


def is_k_hyponormal(W: WeightSeq, k: int, depth: int = Config.HANKEL_DEPTH) -> Verdict:
    """
    k-hyponormality by Bram-Halmos: Hankel positivity at every base index.

    k = 1 reduces to monotonicity of the squared weights.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    exact_depth = _unconditional_depth(W)
    tail = W.tail
    if exact_depth is not None:
        last = exact_depth
    elif isinstance(tail, ClosedFormTail) and k == 1 and tail.monotone_from is not None:
        last = max(depth, tail.monotone_from)
    else:
        last = depth

    if k == 1:
        for n in range(last + 1):
            w0, w1 = W.weight_sq(n), W.weight_sq(n + 1)
            c = w0.compare(w1)
            if c is None:
                return Verdict.pending(f"weights at {n} and {n + 1} tie", Track.APPROX, depth=last, n=n)
            if c == 1:
                logger.debug("monotonicity fails at n=%d", n)
                return Verdict.failing(f"alpha_{n}^2 > alpha_{n + 1}^2", scalar_max_track((w0, w1)),
                                       n=n, lower=w0, upper=w1)
        track = scalar_max_track(W.weight_sq(n) for n in range(last + 2))
    else:
        track = Track.EXACT
        for n in range(last + 1):
            verdict = psd_check(hankel(W, n, k))
            track = track if verdict.track is Track.EXACT else Track.APPROX
            if not verdict.is_psd:
                v = verdict.to_verdict(f"Hankel matrix at n={n} is not PSD", n=n, k=k)
                if v.fails:
                    logger.debug("Hankel test fails at n=%d, k=%d", n, k)
                return Verdict(v.status, v.reason, v.certificate, v.track, last)

    if exact_depth is not None:
        return Verdict.holding(f"{k}-hyponormal", track, depth=last, basis="finitely many distinct matrices")
    if isinstance(tail, ClosedFormTail) and k == 1 and tail.monotone_from is not None:
        return Verdict.holding("1-hyponormal", track, depth=last, basis="declared monotone tail")
    if W.berger is not None:
        return Verdict.holding(f"{k}-hyponormal", track, depth=last, basis="attached Berger measure")
    return Verdict.pending("undecided at truncation", track, depth=last)


def _packet_weight(W: WeightSeq, ell: int, i: int, j: int) -> Scalar:
    w = ONE
    for m in range(ell):
        w = w * W.weight_sq(ell * j + i + m)
    return w


def power_packets(W: WeightSeq, ell: int, i: int) -> WeightSeq:
    """
    Residue-i summand of W**ell: squared weights are products over adjacent
    packets of length ell. An attached Berger measure is carried over as
    s**(i/ell)/gamma_i d xi(s**(1/ell)).
    """
    if ell < 1:
        raise ValueError("ell must be at least 1")
    if not 0 <= i < ell:
        raise ValueError(f"residue {i} out of range for ell={ell}")
    P = W.prefix_length
    j0 = max(0, -(-(P - i) // ell))
    prefix = tuple(_packet_weight(W, ell, i, j) for j in range(j0))
    tail = W.tail
    if isinstance(tail, ConstantTail):
        new_tail: Tail = ConstantTail(tail.value ** ell)
    elif isinstance(tail, MeasureTail):
        s = ell * j0 + i - P
        new_tail = MeasureTail(power(restriction_measure(tail.measure, s), ell))
    else:
        monotone = None
        if tail.monotone_from is not None:
            monotone = max(0, -(-(tail.monotone_from - i) // ell))
        bound = None if tail.bound is None else tail.bound ** ell
        new_tail = ClosedFormTail(
            lambda n, _W=W: _packet_weight(_W, ell, i, n),
            monotone_from=monotone,
            bound=bound,
            label=f"{tail.label}({ell}:{i})",
        )
    berger = None if W.berger is None else packet_measure(W.berger, ell, i)
    return WeightSeq(prefix, new_tail, berger=berger, label=f"{W.label}({ell}:{i})")


def restrict(W: WeightSeq, h: int) -> WeightSeq:
    """Drop the first h weights; the Berger measure becomes (s**h/gamma_h) d xi."""
    if h < 0:
        raise ValueError("h must be nonnegative")
    if h == 0:
        return W
    P = W.prefix_length
    prefix = W.prefix[h:]
    tail = W.tail
    if isinstance(tail, ConstantTail):
        new_tail: Tail = tail
    elif isinstance(tail, MeasureTail):
        new_tail = tail if h <= P else MeasureTail(restriction_measure(tail.measure, h - P))
    else:
        g = tail.generator
        new_tail = ClosedFormTail(
            lambda n, _g=g: _g(n + h),
            monotone_from=None if tail.monotone_from is None else max(0, tail.monotone_from - h),
            bound=tail.bound,
            label=tail.label,
        )
    berger = None if W.berger is None else restriction_measure(W.berger, h)
    return WeightSeq(prefix, new_tail, berger=berger, label=W.label)


@dataclass(frozen=True)
class BackwardExtension:
    verdict: Verdict
    measure: Optional[Measure1D] = None

    @property
    def holds(self) -> bool:
        return self.verdict.holds


def backward_extend_check(x0_sq: Number, mu_L: Measure1D) -> BackwardExtension:
    """
    Prepend x0 to a subnormal shift with Berger measure mu_L.

    Holds iff 1/t is mu_L-integrable and x0**2 * ||1/t|| <= 1; the extension
    then has measure (x0**2/t) d mu_L + (1 - x0**2 ||1/t||) delta_0.
    """
    x0_sq = Scalar.of(x0_sq)
    total = mu_L.mass()
    if total.compare(ONE) not in (0, None):
        raise MeasureError(f"backward extension needs a probability measure, mass is {total}")
    norm = inv_t_norm(mu_L)
    if norm is INFINITE:
        return BackwardExtension(Verdict.failing("1/t is not integrable", x0_sq.track, condition="integrability",
                                                 norm="inf"))
    product = x0_sq * norm
    c = product.compare(ONE)
    track = scalar_max_track((x0_sq, norm))
    if c is None:
        return BackwardExtension(Verdict.pending("weight lies at the forced boundary within tolerance", track,
                                                 norm=norm, product=product))
    if c == 1:
        return BackwardExtension(Verdict.failing("x0^2 exceeds 1/||1/t||", track, condition="norm",
                                                 norm=norm, product=product, forced=ONE / norm))
    mu = t_weight(mu_L, -1, ONE).scale(x0_sq)
    rest = ONE - product
    if not rest.is_zero():
        mu = mu + dirac(0, rest)
    if nonnegative(mu).fails:
        raise MeasureError("backward extension produced a signed measure")
    return BackwardExtension(Verdict.holding("subnormal backward extension", track, norm=norm, product=product),
                             mu)


def forced_weight(mu: Measure1D) -> Scalar:
    """The squared weight 1/||1/t|| that extends mu without an atom at 0."""
    norm = inv_t_norm(mu)
    if norm is INFINITE:
        raise MeasureError("forced weight needs finite ||1/t||")
    return ONE / norm


def berger_measure(W: WeightSeq) -> Optional[Measure1D]:
    """Berger measure by iterated backward extension, or None when W is not subnormal."""
    verdict, mu = _backward_chain(W)
    return mu if verdict.holds else None


def _backward_chain(W: WeightSeq) -> Tuple[Verdict, Optional[Measure1D]]:
    if W.berger is not None:
        return Verdict.holding("attached Berger measure", basis="attached"), W.berger
    tail = W.tail
    if isinstance(tail, ConstantTail):
        mu = dirac(tail.value)
    elif isinstance(tail, MeasureTail):
        mu = tail.measure.scale(ONE / tail.measure.mass())
    else:
        return Verdict.pending("closed-form tail has no Berger measure"), None
    for n in reversed(range(W.prefix_length)):
        step = backward_extend_check(W.prefix[n], mu)
        if not step.holds:
            cert = dict(step.verdict.certificate)
            cert["index"] = n
            return Verdict(step.verdict.status, f"backward extension at {n}: {step.verdict.reason}",
                           cert, step.verdict.track), None
        mu = step.measure
    return Verdict.holding("backward extension chain", basis="backward-extension"), mu


def subnormal_verdict(W: WeightSeq, screen_k: int = Config.SCREEN_K) -> Verdict:
    """
    Tri-state subnormality.

    Constant and measure tails are decided exactly by backward extension;
    closed-form tails without an attached measure are screened by
    k-hyponormality up to screen_k and otherwise left undecided.
    """
    verdict, mu = _backward_chain(W)
    if verdict.holds:
        return Verdict(verdict.status, verdict.reason, {**verdict.certificate, "measure": mu}, verdict.track)
    if verdict.fails:
        return verdict
    for k in range(1, screen_k + 1):
        v = is_k_hyponormal(W, k)
        if v.fails:
            return Verdict.failing(f"not {k}-hyponormal", v.track, **v.certificate)
    logger.warning("subnormality of %s only screened up to k=%d", W.label or "sequence", screen_k)
    return Verdict.pending(f"screened: {screen_k}-hyponormal up to depth {Config.HANKEL_DEPTH}",
                           basis="screened", k=screen_k)
