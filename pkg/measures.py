"""
Berger-measure algebra.

A Measure1D is a finite sum of atoms and monomial densities c * t**e on
intervals; a Measure2D is a finite sum of products of two Measure1D factors.
The class is closed under t-weighting, power pushforwards and dilations, and
every functional below has a closed form.
"""
import functools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from config import Config
from numerics import (
    INFINITE,
    MP,
    ONE,
    ZERO,
    MeasureError,
    NotInClassError,
    Number,
    Scalar,
    Track,
    Verdict,
    scalar_max_track,
)

logger = logging.getLogger(__name__)


def _key(s: Scalar):
    return s.to_mpf()


@dataclass(frozen=True)
class Atom:
    position: Scalar
    mass: Scalar

    def to_dict(self):
        return {"c": str(self.position), "w": str(self.mass)}


@dataclass(frozen=True)
class Piece:
    """Density coef * t**exponent on [lo, hi]."""

    lo: Scalar
    hi: Scalar
    coef: Scalar
    exponent: Fraction

    def integral(self, shift: int = 0) -> Scalar:
        """Integral of coef * t**(exponent + shift) over [lo, hi]."""
        p = self.exponent + shift + 1
        if p == 0:
            return self.coef * (self.hi.log() - self.lo.log())
        return self.coef * (self.hi.pow_rational(p) - self.lo.pow_rational(p)) / Scalar(p)

    def density_at(self, t: Scalar) -> Scalar:
        return self.coef * t.pow_rational(self.exponent)

    def to_dict(self):
        return {"a": str(self.lo), "b": str(self.hi), "coef": str(self.coef), "exp": str(self.exponent)}


def _canonical_atoms(atoms: Iterable[Atom]) -> Tuple[Atom, ...]:
    merged: Dict[Scalar, Scalar] = {}
    for atom in atoms:
        pos, mass = Scalar.of(atom.position), Scalar.of(atom.mass)
        if pos.sign() == -1:
            raise MeasureError(f"atom at negative position {pos}")
        merged[pos] = merged[pos] + mass if pos in merged else mass
    kept = [Atom(p, w) for p, w in merged.items() if not (w.is_exact and w.is_zero())]
    kept.sort(key=lambda a: _key(a.position))
    for left, right in zip(kept, kept[1:]):
        if not (left.position.is_exact and right.position.is_exact) and left.position.compare(right.position) is None:
            logger.warning("approx atoms at %s and %s lie within tolerance; kept separate",
                           left.position, right.position)
    return tuple(kept)


def _canonical_pieces(pieces: Iterable[Piece]) -> Tuple[Piece, ...]:
    pieces = [Piece(Scalar.of(p.lo), Scalar.of(p.hi), Scalar.of(p.coef), Fraction(p.exponent)) for p in pieces]
    for p in pieces:
        if p.lo.sign() == -1:
            raise MeasureError(f"piece starts below 0 at {p.lo}")
        if p.lo.compare(p.hi) != -1:
            raise MeasureError(f"piece needs lo < hi, got [{p.lo}, {p.hi}]")
        if p.lo.sign() == 0 and p.exponent <= -1:
            raise MeasureError(f"density t^{p.exponent} is not integrable at 0")
    if not pieces:
        return ()
    points: List[Scalar] = []
    for p in pieces:
        for b in (p.lo, p.hi):
            if b not in points:
                points.append(b)
    points.sort(key=_key)
    index = {b: i for i, b in enumerate(points)}
    cells: Dict[Tuple[int, Fraction], Scalar] = {}
    for p in pieces:
        for i in range(index[p.lo], index[p.hi]):
            k = (i, p.exponent)
            cells[k] = cells[k] + p.coef if k in cells else p.coef
    out = [
        Piece(points[i], points[i + 1], coef, e)
        for (i, e), coef in cells.items()
        if not (coef.is_exact and coef.is_zero())
    ]
    out.sort(key=lambda p: (_key(p.lo), p.exponent))
    return tuple(out)


@dataclass(frozen=True)
class Measure1D:
    """Compactly supported measure on [0, inf) in canonical form."""

    atoms: Tuple[Atom, ...] = ()
    pieces: Tuple[Piece, ...] = ()
    probability: bool = False

    def __post_init__(self):
        object.__setattr__(self, "atoms", _canonical_atoms(self.atoms))
        object.__setattr__(self, "pieces", _canonical_pieces(self.pieces))
        if self.probability:
            total = self.mass()
            c = total.compare(ONE)
            if c is None and not total.is_exact:
                return
            if c != 0:
                raise MeasureError(f"probability measure has total mass {total}")

    # constructors

    @classmethod
    def build(cls, atoms: Sequence[Tuple[Number, Number]] = (),
              pieces: Sequence[Tuple[Number, Number, Number, Union[int, Fraction, str]]] = (),
              probability: bool = False) -> "Measure1D":
        return cls(
            tuple(Atom(Scalar.of(c), Scalar.of(w)) for c, w in atoms),
            tuple(Piece(Scalar.of(a), Scalar.of(b), Scalar.of(coef), Fraction(e)) for a, b, coef, e in pieces),
            probability,
        )

    # queries

    @property
    def is_atomic(self) -> bool:
        return not self.pieces

    @property
    def track(self) -> Track:
        values = [a.position for a in self.atoms] + [a.mass for a in self.atoms]
        values += [p.coef for p in self.pieces] + [p.lo for p in self.pieces] + [p.hi for p in self.pieces]
        return scalar_max_track(values)

    def is_zero(self) -> bool:
        return not self.atoms and not self.pieces

    def mass(self) -> Scalar:
        return moment1(self, 0)

    def moment(self, k: int) -> Scalar:
        return moment1(self, k)

    def support_max(self) -> Scalar:
        points = [a.position for a in self.atoms] + [p.hi for p in self.pieces]
        return max(points, key=_key) if points else ZERO

    # arithmetic

    def __add__(self, other: "Measure1D") -> "Measure1D":
        return Measure1D(self.atoms + other.atoms, self.pieces + other.pieces)

    def scale(self, factor: Number) -> "Measure1D":
        factor = Scalar.of(factor)
        return Measure1D(
            tuple(Atom(a.position, a.mass * factor) for a in self.atoms),
            tuple(Piece(p.lo, p.hi, p.coef * factor, p.exponent) for p in self.pieces),
        )

    def __rmul__(self, factor: Number) -> "Measure1D":
        return self.scale(factor)

    def __neg__(self) -> "Measure1D":
        return self.scale(-1)

    def __sub__(self, other: "Measure1D") -> "Measure1D":
        return self + (-other)

    def without_atom(self, c: Number) -> "Measure1D":
        c = Scalar.of(c)
        return Measure1D(tuple(a for a in self.atoms if a.position != c), self.pieces)

    def as_probability(self) -> "Measure1D":
        return Measure1D(self.atoms, self.pieces, probability=True)

    def to_dict(self):
        return {"atoms": [a.to_dict() for a in self.atoms], "pieces": [p.to_dict() for p in self.pieces]}

    def __str__(self):
        parts = [f"{a.mass}*d({a.position})" for a in self.atoms]
        parts += [f"{p.coef}*t^{p.exponent}[{p.lo},{p.hi}]" for p in self.pieces]
        return " + ".join(parts) if parts else "0"


ZERO_MEASURE = Measure1D()


def dirac(c: Number, w: Number = 1) -> Measure1D:
    return Measure1D.build(atoms=[(c, w)])


def lebesgue(a: Number, b: Number, coef: Number = 1) -> Measure1D:
    return Measure1D.build(pieces=[(a, b, coef, 0)])


def density(a: Number, b: Number, coef: Number, exponent: Union[int, Fraction, str]) -> Measure1D:
    return Measure1D.build(pieces=[(a, b, coef, exponent)])


@functools.lru_cache(maxsize=65536)
def moment1(mu: Measure1D, k: int) -> Scalar:
    """k-th moment; exact for integer exponents and rational data."""
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    total = ZERO
    for a in mu.atoms:
        total = total + a.mass * a.position ** k
    for p in mu.pieces:
        total = total + p.integral(k)
    return total


def atom_mass(mu: Measure1D, c: Number) -> Scalar:
    c = Scalar.of(c)
    for a in mu.atoms:
        if a.position == c:
            return a.mass
    return ZERO


def _integral_inv_t(mu: Measure1D, skip_zero_atom: bool = False):
    """Integral of 1/t without a sign check; INFINITE when divergent."""
    total = ZERO
    for a in mu.atoms:
        if a.position.is_zero():
            if skip_zero_atom:
                continue
            return INFINITE
        total = total + a.mass / a.position
    for p in mu.pieces:
        if p.lo.is_zero() and p.exponent <= 0:
            return INFINITE
        total = total + p.integral(-1)
    return total


@functools.lru_cache(maxsize=16384)
def inv_t_norm(mu: Measure1D):
    """||1/t|| in L1(mu), or INFINITE."""
    check = nonnegative(mu)
    if check.fails:
        raise MeasureError(f"signed input rejected: {check.reason}")
    return _integral_inv_t(mu)


def t_weight(mu: Measure1D, j: int, gamma: Number = 1) -> Measure1D:
    """(t**j / gamma) d mu; an atom at 0 is killed when j >= 1."""
    gamma = Scalar.of(gamma)
    if gamma.sign() != 1:
        raise MeasureError("t_weight needs gamma > 0")
    atoms = []
    for a in mu.atoms:
        if a.position.is_zero():
            if j >= 1:
                if a.mass.sign() == -1:
                    raise MeasureError("t_weight would hide a negative atom at 0")
                continue
            if j < 0:
                raise MeasureError("t^j with j < 0 is not integrable against an atom at 0")
            atoms.append(Atom(a.position, a.mass / gamma))
            continue
        atoms.append(Atom(a.position, a.mass * a.position ** j / gamma))
    pieces = []
    for p in mu.pieces:
        e = p.exponent + j
        if p.lo.is_zero() and e <= -1:
            raise MeasureError(f"t^{e} is not integrable at 0")
        pieces.append(Piece(p.lo, p.hi, p.coef / gamma, e))
    return Measure1D(tuple(atoms), tuple(pieces))


def power(mu: Measure1D, ell: int) -> Measure1D:
    """Pushforward under t -> t**ell."""
    if not isinstance(ell, int) or ell < 1:
        raise ValueError("power needs an integer ell >= 1")
    if ell == 1:
        return mu
    atoms = tuple(Atom(a.position ** ell, a.mass) for a in mu.atoms)
    pieces = tuple(
        Piece(p.lo ** ell, p.hi ** ell, p.coef / Scalar(ell), (p.exponent + 1) / ell - 1)
        for p in mu.pieces
    )
    return Measure1D(atoms, pieces)


def dilate(mu: Measure1D, lam: Number) -> Measure1D:
    """Pushforward under t -> lam * t for lam > 0."""
    lam = Scalar.of(lam)
    if lam.sign() != 1:
        raise MeasureError("dilation factor must be positive")
    atoms = tuple(Atom(a.position * lam, a.mass) for a in mu.atoms)
    pieces = tuple(
        Piece(p.lo * lam, p.hi * lam, p.coef / lam.pow_rational(p.exponent + 1), p.exponent)
        for p in mu.pieces
    )
    return Measure1D(atoms, pieces)


@dataclass(frozen=True)
class TWeight:
    j: int
    gamma: Scalar


@dataclass(frozen=True)
class Power:
    ell: int


def transform(mu: Measure1D, mode: Union[TWeight, Power]) -> Measure1D:
    if isinstance(mode, TWeight):
        return t_weight(mu, mode.j, mode.gamma)
    if isinstance(mode, Power):
        return power(mu, mode.ell)
    raise ValueError(f"unknown transform {mode!r}")


def restriction_measure(mu: Measure1D, h: int) -> Measure1D:
    """(s**h / gamma_h) d mu, the measure of the shift with h leading weights removed."""
    if h == 0:
        return mu
    return t_weight(mu, h, moment1(mu, h))


def packet_measure(mu: Measure1D, ell: int, i: int) -> Measure1D:
    """s**(i/ell)/gamma_i d mu(s**(1/ell)): measure of the residue-i packet shift."""
    if not 0 <= i < ell:
        raise ValueError(f"residue {i} out of range for packets of length {ell}")
    return power(restriction_measure(mu, i), ell)


# sign analysis of densities


def _pow_at(t: Scalar, e: Fraction):
    """t**e allowing t = 0 (returns INFINITE for negative e)."""
    if t.is_zero():
        if e > 0:
            return ZERO
        if e == 0:
            return ONE
        return INFINITE
    return t.pow_rational(e)


def _eval_density(terms: Sequence[Tuple[Fraction, Scalar]], t: Scalar) -> Scalar:
    total = ZERO
    for e, c in terms:
        total = total + c * t.pow_rational(e)
    return total


def _interior_witness(terms, lo: Scalar, hi: Scalar, toward_lo: bool) -> Optional[Scalar]:
    """Search for an interior point with negative density near an endpoint."""
    span = hi - lo
    half = Scalar(Fraction(1, 2))
    step = span * half
    for _ in range(60):
        t = lo + step if toward_lo else hi - step
        if _eval_density(terms, t).sign() == -1:
            return t
        step = step * half
    return None


def _cell_verdict(lo: Scalar, hi: Scalar, terms: List[Tuple[Fraction, Scalar]], splits: int) -> Verdict:
    terms = [(e, c) for e, c in terms if not (c.is_exact and c.is_zero())]
    track = scalar_max_track([c for _, c in terms] + [lo, hi])
    if not terms:
        return Verdict.holding(track=track)
    signs = [c.sign() for _, c in terms]
    if None in signs:
        return Verdict.pending("density coefficient within tolerance", track, cell=[lo, hi])
    if all(s >= 0 for s in signs):
        return Verdict.holding(track=track)
    mid = (lo + hi) * Scalar(Fraction(1, 2))
    if all(s <= 0 for s in signs):
        return Verdict.failing("negative density", track, cell=[lo, hi], point=mid,
                               density=_eval_density(terms, mid))
    terms = sorted(terms, key=lambda ec: ec[0])
    if len(terms) == 2:
        (e1, c1), (e2, c2) = terms
        d = e2 - e1

        def g(t):
            if t.is_zero():
                return c1
            return c1 + c2 * t.pow_rational(d)

        g_lo, g_hi = g(lo), g(hi)
        s_lo, s_hi = g_lo.sign(), g_hi.sign()
        if s_lo == -1 or s_hi == -1:
            toward_lo = s_lo == -1
            point = _interior_witness(terms, lo, hi, toward_lo) or (lo if toward_lo else hi)
            return Verdict.failing("negative density", track, cell=[lo, hi], point=point,
                                   factor=g_lo if toward_lo else g_hi)
        if None in (s_lo, s_hi):
            return Verdict.pending("density sign within tolerance at an endpoint", track, cell=[lo, hi])
        return Verdict.holding(track=track)
    bound = _lower_bound(lo, hi, terms)
    if bound is not None:
        s = bound.sign()
        if s is not None and s >= 0:
            return Verdict.holding(track=track)
    value = _eval_density(terms, mid)
    if value.sign() == -1:
        return Verdict.failing("negative density", track, cell=[lo, hi], point=mid, density=value)
    if splits >= Config.DOMINATES_MAX_SPLITS:
        return Verdict.pending("density sign not resolved by interval splitting", track,
                               cell=[lo, hi], splits=splits)
    left = _cell_verdict(lo, mid, terms, splits + 1)
    if not left.holds:
        return left
    return _cell_verdict(mid, hi, terms, splits + 1)


def _lower_bound(lo: Scalar, hi: Scalar, terms) -> Optional[Scalar]:
    total = ZERO
    for e, c in terms:
        a, b = _pow_at(lo, e), hi.pow_rational(e)
        if a is INFINITE:
            if c.sign() == -1:
                return None
            total = total + c * b
            continue
        small, large = (a, b) if a.compare(b) in (-1, 0) else (b, a)
        total = total + c * (small if c.sign() == 1 else large)
    return total


def nonnegative(mu: Measure1D) -> Verdict:
    return dominates(mu, ZERO_MEASURE)


def dominates(nu: Measure1D, mu: Measure1D) -> Verdict:
    """Holds iff nu - mu is a nonnegative measure."""
    diff = nu - mu
    track = scalar_max_track([nu.mass(), mu.mass()]) if (nu.atoms or nu.pieces or mu.atoms or mu.pieces) else Track.EXACT
    pending = None
    for a in diff.atoms:
        s = a.mass.sign()
        if s == -1:
            return Verdict.failing(f"atom at {a.position} deficient by {-a.mass}", track,
                                   position=a.position, deficit=-a.mass)
        if s is None and pending is None:
            pending = Verdict.pending(f"atom mass at {a.position} within tolerance", track, position=a.position)
    cells: Dict[Tuple[Scalar, Scalar], List[Tuple[Fraction, Scalar]]] = {}
    for p in diff.pieces:
        cells.setdefault((p.lo, p.hi), []).append((p.exponent, p.coef))
    for (lo, hi), terms in cells.items():
        v = _cell_verdict(lo, hi, terms, 0)
        if v.fails:
            return v
        if v.undecided and pending is None:
            pending = v
    if pending is not None:
        return pending
    return Verdict.holding(track=track)


# two-variable measures


@dataclass(frozen=True)
class Measure2D:
    """Finite sum of product measures first x second (s, t)."""

    terms: Tuple[Tuple[Measure1D, Measure1D], ...] = ()
    probability: bool = False

    def __post_init__(self):
        kept = tuple((x, y) for x, y in self.terms if not x.is_zero() and not y.is_zero())
        object.__setattr__(self, "terms", kept)
        if self.probability:
            total = self.mass()
            c = total.compare(ONE)
            if c is not None and c != 0:
                raise MeasureError(f"probability measure has total mass {total}")

    @classmethod
    def product(cls, first: Measure1D, second: Measure1D) -> "Measure2D":
        return cls(((first, second),))

    def mass(self) -> Scalar:
        return moment2(self, (0, 0))

    def __add__(self, other: "Measure2D") -> "Measure2D":
        return Measure2D(self.terms + other.terms)

    def scale(self, factor: Number) -> "Measure2D":
        return Measure2D(tuple((x.scale(factor), y) for x, y in self.terms))

    def __rmul__(self, factor: Number) -> "Measure2D":
        return self.scale(factor)

    def to_dict(self):
        return {"terms": [{"first": x.to_dict(), "second": y.to_dict()} for x, y in self.terms]}

    def __str__(self):
        return " + ".join(f"({x}) x ({y})" for x, y in self.terms) or "0"


def moment2(mu: Measure2D, k: Tuple[int, int]) -> Scalar:
    k1, k2 = k
    total = ZERO
    for x, y in mu.terms:
        total = total + moment1(x, k1) * moment1(y, k2)
    return total


def marginal_x(mu: Measure2D) -> Measure1D:
    out = ZERO_MEASURE
    for x, y in mu.terms:
        out = out + x.scale(y.mass())
    return out


def marginal_y(mu: Measure2D) -> Measure1D:
    out = ZERO_MEASURE
    for x, y in mu.terms:
        out = out + y.scale(x.mass())
    return out


def inv_t_norm2(mu: Measure2D):
    """Integral of 1/t over the plane (t is the second coordinate), or INFINITE."""
    check = nonnegative2(mu)
    if check.fails:
        raise MeasureError(f"signed input rejected: {check.reason}")
    return _integral_inv_t(marginal_y(mu))


def extremal(mu: Measure2D) -> Measure2D:
    """(1 - delta_0(t)) / (t ||1/t||) d mu, a probability measure."""
    norm = _integral_inv_t(marginal_y(mu), skip_zero_atom=True)
    if norm is INFINITE:
        raise MeasureError("extremal measure needs finite ||1/t||")
    if norm.sign() != 1:
        raise MeasureError("extremal measure needs positive ||1/t||")
    terms = tuple((x, t_weight(y.without_atom(0), -1, norm)) for x, y in mu.terms)
    out = Measure2D(terms)
    total = out.mass()
    if total.compare(ONE) not in (0, None):
        raise MeasureError(f"extremal measure has mass {total}")
    return out


def _combine_terms(mu: Measure2D) -> List[Tuple[Measure1D, Measure1D]]:
    grouped: Dict[Measure1D, Measure1D] = {}
    order: List[Measure1D] = []
    for x, y in mu.terms:
        if x in grouped:
            grouped[x] = grouped[x] + y
        else:
            grouped[x] = y
            order.append(x)
    return [(x, grouped[x]) for x in order]


def nonnegative2(mu: Measure2D) -> Verdict:
    """Termwise nonnegativity after merging terms with equal first factors."""
    terms = _combine_terms(mu)
    pending = None
    for idx, (x, y) in enumerate(terms):
        vx, vy = nonnegative(x), nonnegative(y)
        if vx.holds and vy.holds:
            continue
        if vx.undecided or vy.undecided:
            pending = pending or Verdict.pending("factor sign within tolerance", term=idx)
            continue
        lone_atom = x.is_atomic and len(x.atoms) == 1 and all(
            atom_mass(other, x.atoms[0].position).is_zero() and not other.pieces
            for j, (other, _) in enumerate(terms) if j != idx
        )
        if lone_atom and vx.holds and vy.fails:
            return Verdict.failing(f"second factor of term {idx} is not nonnegative: {vy.reason}",
                                   term=idx, **vy.certificate)
        pending = pending or Verdict.pending("signed factor in an overlapping term", term=idx)
    return pending or Verdict.holding()


def pushforward_monomial(mu: Measure2D, m: int, n: int) -> Measure1D:
    """Pushforward under (s, t) -> s**m t**n when each term has an atomic factor."""
    out = ZERO_MEASURE
    for x, y in mu.terms:
        if x.is_atomic:
            for a in x.atoms:
                out = out + _scaled_image(power(y, n), a.position ** m, a.mass)
        elif y.is_atomic:
            for a in y.atoms:
                out = out + _scaled_image(power(x, m), a.position ** n, a.mass)
        else:
            raise NotInClassError("monomial pushforward of a product of two densities leaves the class")
    return out


def _scaled_image(mu: Measure1D, lam: Scalar, weight: Scalar) -> Measure1D:
    if lam.is_zero():
        return dirac(0, weight * mu.mass())
    return dilate(mu, lam).scale(weight)
