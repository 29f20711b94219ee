"""
Verdict kernel: dual-track scalars, symmetric PSD testing and threshold bisection.

Exact values are ``fractions.Fraction``; approximate values live in a private
mpmath context whose precision comes from ``Config``.
"""
import enum
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from mpmath.ctx_mp import MPContext

from config import Config

logger = logging.getLogger(__name__)

MP = MPContext()
MP.prec = Config.working_precision()


class ShiftLabError(Exception):
    """Base class for shiftlab errors."""


class DomainError(ShiftLabError, ValueError):
    """A parameter lies outside a stated domain."""


class BisectionError(ShiftLabError):
    """Bisection precondition violated."""


class TieError(ShiftLabError):
    """An approximate comparison landed within tolerance."""


class MeasureError(ShiftLabError, ValueError):
    """Invalid measure data or functional."""


class NotInClassError(ShiftLabError):
    """Input is outside the class an operation requires."""


class TesterDisagreement(ShiftLabError):
    """A closed form and a generic tester disagree."""

    def __init__(self, message: str, certificates: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.certificates = certificates or {}


class Track(str, enum.Enum):
    EXACT = "exact"
    APPROX = "approx"


class _Infinite:
    """Distinguished value for divergent integrals."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITE"

    def __str__(self):
        return "inf"


INFINITE = _Infinite()

Number = Union["Scalar", int, Fraction, str, float]


def integer_root(n: int, q: int) -> Optional[int]:
    """Exact q-th root of a nonnegative integer, or None when n is not a perfect power."""
    if n < 0:
        raise ValueError("integer_root of a negative number")
    if q < 1:
        raise ValueError("root order must be positive")
    if n < 2 or q == 1:
        return n
    if q == 2:
        r = math.isqrt(n)
        return r if r * r == n else None
    x = 1 << ((n.bit_length() + q - 1) // q)
    while True:
        y = ((q - 1) * x + n // x ** (q - 1)) // q
        if y >= x:
            break
        x = y
    return x if x ** q == n else None


def exact_power(x: Fraction, e: Fraction) -> Optional[Fraction]:
    """x**e as a Fraction when it is rational, else None."""
    if x < 0:
        raise ValueError("rational powers need a nonnegative base")
    if e.denominator == 1:
        if x == 0 and e < 0:
            raise ZeroDivisionError("0 to a negative power")
        return x ** int(e)
    if x == 0:
        if e < 0:
            raise ZeroDivisionError("0 to a negative power")
        return Fraction(0)
    q = e.denominator
    rn = integer_root(x.numerator, q)
    rd = integer_root(x.denominator, q)
    if rn is None or rd is None:
        return None
    return Fraction(rn, rd) ** e.numerator


def _to_fraction(value: Union[int, Fraction, str, float]) -> Fraction:
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot read {value!r} as a rational")


def _mpf(value) -> Any:
    if isinstance(value, Fraction):
        return MP.mpf(value.numerator) / value.denominator
    return MP.mpf(value)


class Scalar:
    """
    Dual-track number.

    Exact scalars hold a Fraction and are closed under +, -, *, / and integer
    powers. Approx scalars hold an mpf and a relative tolerance; comparisons
    inside the tolerance are ties.
    """

    __slots__ = ("_value", "_track", "_tol")

    def __init__(self, value, track: Track = Track.EXACT, tol: float = 0.0):
        if track is Track.EXACT:
            value = _to_fraction(value)
            tol = 0.0
        else:
            value = _mpf(value)
            tol = float(tol) if tol else Config.APPROX_TOL
        object.__setattr__(self, "_value", value)
        object.__setattr__(self, "_track", track)
        object.__setattr__(self, "_tol", tol)

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    # construction

    @classmethod
    def exact(cls, value) -> "Scalar":
        return cls(value, Track.EXACT)

    @classmethod
    def approx(cls, value, tol: Optional[float] = None) -> "Scalar":
        return cls(value, Track.APPROX, tol or Config.APPROX_TOL)

    @classmethod
    def of(cls, value: Number) -> "Scalar":
        if isinstance(value, Scalar):
            return value
        if isinstance(value, str) and value.strip().startswith("~"):
            return cls.approx(MP.mpf(value.strip()[1:]))
        if isinstance(value, (int, Fraction, str, float)):
            return cls.exact(value)
        return cls.approx(value)

    # accessors

    @property
    def value(self):
        return self._value

    @property
    def track(self) -> Track:
        return self._track

    @property
    def tol(self) -> float:
        return self._tol

    @property
    def is_exact(self) -> bool:
        return self._track is Track.EXACT

    @property
    def fraction(self) -> Fraction:
        if not self.is_exact:
            raise TieError(f"{self} is not exact")
        return self._value

    def to_mpf(self):
        return _mpf(self._value)

    def __float__(self):
        return float(self._value)

    # arithmetic

    def _binary(self, other, op) -> "Scalar":
        other = Scalar.of(other) if not isinstance(other, Scalar) else other
        if self._track is Track.EXACT and other._track is Track.EXACT:
            return Scalar(op(self._value, other._value), Track.EXACT)
        tol = max(self._tol, other._tol)
        return Scalar(op(self.to_mpf(), other.to_mpf()), Track.APPROX, tol)

    def __add__(self, other):
        return self._binary(other, lambda x, y: x + y)

    def __radd__(self, other):
        return Scalar.of(other)._binary(self, lambda x, y: x + y)

    def __sub__(self, other):
        return self._binary(other, lambda x, y: x - y)

    def __rsub__(self, other):
        return Scalar.of(other)._binary(self, lambda x, y: x - y)

    def __mul__(self, other):
        return self._binary(other, lambda x, y: x * y)

    def __rmul__(self, other):
        return Scalar.of(other)._binary(self, lambda x, y: x * y)

    def __truediv__(self, other):
        return self._binary(other, lambda x, y: x / y)

    def __rtruediv__(self, other):
        return Scalar.of(other)._binary(self, lambda x, y: x / y)

    def __neg__(self):
        return Scalar(-self._value, self._track, self._tol)

    def __abs__(self):
        return Scalar(abs(self._value), self._track, self._tol)

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("use pow_rational for non-integer exponents")
        return Scalar(self._value ** k, self._track, self._tol)

    def pow_rational(self, e: Union[Fraction, int]) -> "Scalar":
        """self**e for rational e; exact when the result is rational."""
        e = Fraction(e)
        if self.is_exact:
            if self._value < 0:
                raise DomainError("rational power of a negative scalar")
            exact = exact_power(self._value, e)
            if exact is not None:
                return Scalar(exact)
        base = self.to_mpf()
        if base < 0:
            raise DomainError("rational power of a negative scalar")
        return Scalar(MP.power(base, _mpf(e)), Track.APPROX, self._tol or Config.APPROX_TOL)

    def sqrt(self) -> "Scalar":
        return self.pow_rational(Fraction(1, 2))

    def log(self) -> "Scalar":
        if self.is_exact and self._value == 1:
            return Scalar(0)
        if self.to_mpf() <= 0:
            raise DomainError("log of a nonpositive scalar")
        return Scalar(MP.log(self.to_mpf()), Track.APPROX, self._tol or Config.APPROX_TOL)

    # comparison

    def sign(self, scale=1) -> Optional[int]:
        """-1, 0, 1, or None for an approx value within tolerance of zero."""
        if self.is_exact:
            return (self._value > 0) - (self._value < 0)
        if abs(self._value) <= self._tol * max(1, abs(_mpf(scale))):
            return None
        return 1 if self._value > 0 else -1

    def compare(self, other: Number) -> Optional[int]:
        other = Scalar.of(other)
        diff = self - other
        if diff.is_exact:
            return diff.sign()
        scale = max(abs(self.to_mpf()), abs(other.to_mpf()), 1)
        return diff.sign(scale)

    def leq(self, other: Number) -> Optional[bool]:
        c = self.compare(other)
        return None if c is None else c <= 0

    def _hard(self, other) -> int:
        c = self.compare(other)
        if c is None:
            raise TieError(f"comparison of {self} and {other} is within tolerance")
        return c

    def __lt__(self, other):
        return self._hard(other) < 0

    def __le__(self, other):
        return self._hard(other) <= 0

    def __gt__(self, other):
        return self._hard(other) > 0

    def __ge__(self, other):
        return self._hard(other) >= 0

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self._track is other._track and self._value == other._value
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.is_exact and self._value == other
        return NotImplemented

    def __hash__(self):
        if self.is_exact:
            return hash(self._value)
        return hash(("approx", self._value))

    def is_zero(self) -> bool:
        return self.sign() == 0

    # display

    def __str__(self):
        if self.is_exact:
            return str(self._value)
        return "~" + MP.nstr(self._value, 20)

    def __repr__(self):
        return f"Scalar({self})"


ZERO = Scalar(0)
ONE = Scalar(1)


def scalar_max_track(values: Iterable[Scalar]) -> Track:
    return Track.APPROX if any(not v.is_exact for v in values) else Track.EXACT


def jsonable(obj: Any) -> Any:
    """Recursively convert certificates and records to JSON-ready values."""
    if isinstance(obj, Scalar):
        return str(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if obj is INFINITE:
        return "inf"
    if isinstance(obj, enum.Enum):
        return obj.value
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    if isinstance(obj, float):
        return repr(obj)
    return str(obj)


class Status(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class Verdict:
    """Tri-state answer with a certificate."""

    status: Status
    reason: str = ""
    certificate: Dict[str, Any] = field(default_factory=dict)
    track: Track = Track.EXACT
    depth: Optional[int] = None

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def fails(self) -> bool:
        return self.status is Status.FAILS

    @property
    def undecided(self) -> bool:
        return self.status is Status.UNDECIDED

    @classmethod
    def holding(cls, reason: str = "", track: Track = Track.EXACT, depth: Optional[int] = None, **certificate):
        return cls(Status.HOLDS, reason, dict(certificate), track, depth)

    @classmethod
    def failing(cls, reason: str = "", track: Track = Track.EXACT, depth: Optional[int] = None, **certificate):
        return cls(Status.FAILS, reason, dict(certificate), track, depth)

    @classmethod
    def pending(cls, reason: str = "", track: Track = Track.EXACT, depth: Optional[int] = None, **certificate):
        return cls(Status.UNDECIDED, reason, dict(certificate), track, depth)

    @classmethod
    def from_bool(cls, value: Optional[bool], reason: str = "", track: Track = Track.EXACT, **certificate):
        if value is None:
            return cls.pending(reason, track, **certificate)
        return cls(Status.HOLDS if value else Status.FAILS, reason, dict(certificate), track)

    @staticmethod
    def all_of(verdicts: Sequence["Verdict"], reason: str = "") -> "Verdict":
        """Conjunction: first failure wins, then any undecided, else holds."""
        track = Track.APPROX if any(v.track is Track.APPROX for v in verdicts) else Track.EXACT
        depths = [v.depth for v in verdicts if v.depth is not None]
        depth = max(depths) if depths else None
        for v in verdicts:
            if v.fails:
                return Verdict(Status.FAILS, f"{reason}: {v.reason}" if reason else v.reason,
                               v.certificate, track, depth)
        pending = [v for v in verdicts if v.undecided]
        if pending:
            return Verdict(Status.UNDECIDED, f"{reason}: {pending[0].reason}" if reason else pending[0].reason,
                           pending[0].certificate, track, depth)
        return Verdict(Status.HOLDS, reason, {"parts": len(verdicts)}, track, depth)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status.value,
            "reason": self.reason,
            "certificate": jsonable(self.certificate),
            "track": self.track.value,
            "depth": self.depth,
        }


class SymMatrix:
    """Immutable symmetric matrix of Scalars backed by a numpy object array."""

    def __init__(self, rows: Sequence[Sequence[Number]]):
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("SymMatrix needs a nonempty square array")
        arr = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                arr[i, j] = Scalar.of(rows[i][j])
        for i in range(n):
            for j in range(i + 1, n):
                if arr[i, j] != arr[j, i]:
                    raise ValueError(f"non-symmetric input at ({i}, {j})")
        arr.flags.writeable = False
        self._entries = arr

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def track(self) -> Track:
        return scalar_max_track(self._entries.flat)

    def __getitem__(self, ij: Tuple[int, int]) -> Scalar:
        return self._entries[ij]

    def rows(self) -> List[List[Scalar]]:
        return [list(r) for r in self._entries]

    def principal(self, indices: Sequence[int]) -> "SymMatrix":
        return SymMatrix([[self._entries[i, j] for j in indices] for i in indices])

    def permuted(self, perm: Sequence[int]) -> "SymMatrix":
        return self.principal(perm)

    def to_float(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self._entries], dtype=float)

    def scale_of_entries(self):
        return max([abs(x.to_mpf()) for x in self._entries.flat] + [MP.mpf(1)])

    def det(self) -> Scalar:
        """Determinant by Gaussian elimination (fraction-exact on the exact track)."""
        n = self.dim
        a = [list(r) for r in self._entries]
        exact = self.track is Track.EXACT
        det = ONE
        for c in range(n):
            if exact:
                pivot = next((r for r in range(c, n) if not a[r][c].is_zero()), None)
            else:
                pivot = max(range(c, n), key=lambda r: abs(a[r][c].to_mpf()))
                if a[pivot][c].to_mpf() == 0:
                    pivot = None
            if pivot is None:
                return ZERO if exact else Scalar.approx(0)
            if pivot != c:
                a[c], a[pivot] = a[pivot], a[c]
                det = -det
            det = det * a[c][c]
            for r in range(c + 1, n):
                factor = a[r][c] / a[c][c]
                for k in range(c, n):
                    a[r][k] = a[r][k] - factor * a[c][k]
        return det

    def __eq__(self, other):
        if not isinstance(other, SymMatrix) or other.dim != self.dim:
            return NotImplemented
        return all(x == y for x, y in zip(self._entries.flat, other._entries.flat))

    def __repr__(self):
        return "SymMatrix(" + repr([[str(x) for x in r] for r in self._entries]) + ")"

    def to_dict(self):
        return {"dim": self.dim, "entries": [[str(x) for x in r] for r in self._entries]}


class PsdStatus(str, enum.Enum):
    PSD = "psd"
    NOT_PSD = "not-psd"
    TIE = "psd-within-tolerance"


@dataclass(frozen=True)
class PsdVerdict:
    """
    PSD answer with an independently checkable witness.

    psd: pivot order, LDL^T diagonal (all >= 0) and unit lower factor.
    not-psd: a principal index set whose determinant is negative.
    """

    status: PsdStatus
    track: Track
    matrix: Optional[SymMatrix] = None
    permutation: Tuple[int, ...] = ()
    diagonal: Tuple[Scalar, ...] = ()
    lower: Tuple[Tuple[Scalar, ...], ...] = ()
    minor: Tuple[int, ...] = ()
    minor_det: Optional[Scalar] = None
    quadratic_form: Optional[Tuple[Scalar, Scalar, Scalar]] = None

    @property
    def is_psd(self) -> bool:
        return self.status is PsdStatus.PSD

    def verify(self) -> bool:
        """Re-check the witness without reusing the factorization code path."""
        if self.quadratic_form is not None:
            d1, d2, off_sq = self.quadratic_form
            return psd_from_2x2(d1, d2, off_sq).status is self.status
        if self.matrix is None:
            return False
        if self.status is PsdStatus.NOT_PSD:
            det = self.matrix.principal(self.minor).det()
            return det.sign() == -1 and (self.minor_det is None or det.compare(self.minor_det) in (0, None))
        if self.status is PsdStatus.PSD:
            if any(d.sign() == -1 for d in self.diagonal):
                return False
            n = self.matrix.dim
            p = self.permutation
            for r in range(n):
                for c in range(r + 1):
                    total = ZERO
                    for k in range(c + 1):
                        total = total + self.lower[r][k] * self.diagonal[k] * self.lower[c][k]
                    if total.compare(self.matrix[p[r], p[c]]) not in (0, None):
                        return False
            return True
        return True

    def to_verdict(self, reason: str = "", **certificate) -> Verdict:
        cert = dict(certificate)
        cert.update(self.certificate())
        if self.status is PsdStatus.PSD:
            return Verdict(Status.HOLDS, reason, cert, self.track)
        if self.status is PsdStatus.NOT_PSD:
            return Verdict(Status.FAILS, reason, cert, self.track)
        return Verdict(Status.UNDECIDED, reason or "pivot within tolerance", cert, self.track)

    def certificate(self) -> Dict[str, Any]:
        if self.status is PsdStatus.NOT_PSD:
            return {"witness": "negative-minor", "minor": list(self.minor), "det": self.minor_det}
        if self.status is PsdStatus.PSD:
            return {"witness": "ldl-diagonal", "permutation": list(self.permutation),
                    "diagonal": list(self.diagonal)}
        return {"witness": "tie", "diagonal": list(self.diagonal)}

    def to_dict(self):
        return {"status": self.status.value, "track": self.track.value, **jsonable(self.certificate())}


def psd_check(M: SymMatrix) -> PsdVerdict:
    """
    Decide positive semidefiniteness by LDL^T with symmetric max-diagonal pivoting.

    A negative diagonal entry of a Schur complement at index q gives the minor
    P + {q}; a zero maximal diagonal with a nonzero off-diagonal (i, j) gives
    P + {i, j}. Both determinants are negative.
    """
    n = M.dim
    track = M.track
    exact = track is Track.EXACT
    scale = 1 if exact else M.scale_of_entries()
    S = [[M[i, j] for j in range(n)] for i in range(n)]
    active = list(range(n))
    order: List[int] = []
    diag: List[Scalar] = []
    mult: Dict[Tuple[int, int], Scalar] = {}

    def finish(status, **kwargs):
        return PsdVerdict(status=status, track=track, matrix=M, **kwargs)

    def negative_det(indices):
        return M.principal(sorted(indices)).det()

    while active:
        signs = {i: S[i][i].sign(scale) for i in active}
        negative = [i for i in active if signs[i] == -1]
        if negative:
            minor = tuple(sorted(order + [negative[0]]))
            logger.debug("negative Schur diagonal at %s", negative[0])
            return finish(PsdStatus.NOT_PSD, minor=minor, minor_det=negative_det(minor))
        p = max(active, key=lambda i: S[i][i].value if exact else S[i][i].to_mpf())
        if signs[p] == 1:
            d = S[p][p]
            rest = [i for i in active if i != p]
            for i in rest:
                mult[(i, p)] = S[i][p] / d
            for idx, i in enumerate(rest):
                li = mult[(i, p)]
                for j in rest[idx:]:
                    val = S[i][j] - li * S[p][j]
                    S[i][j] = val
                    S[j][i] = val
            order.append(p)
            diag.append(d)
            active = rest
            continue
        # maximal diagonal is zero (or within tolerance)
        tie = signs[p] is None
        for ai, i in enumerate(active):
            for j in active[ai + 1:]:
                s = S[i][j].sign(scale)
                if s not in (0, None):
                    minor = tuple(sorted(order + [i, j]))
                    return finish(PsdStatus.NOT_PSD, minor=minor, minor_det=negative_det(minor))
                if s is None:
                    tie = True
        if tie:
            return finish(PsdStatus.TIE, permutation=tuple(order + active),
                          diagonal=tuple(diag + [S[i][i] for i in active]))
        order.extend(active)
        diag.extend(ZERO for _ in active)
        active = []

    lower = []
    for r, i in enumerate(order):
        row = []
        for c, p in enumerate(order):
            if c == r:
                row.append(ONE)
            elif c < r:
                row.append(mult.get((i, p), ZERO))
            else:
                row.append(ZERO)
        lower.append(tuple(row))
    return finish(PsdStatus.PSD, permutation=tuple(order), diagonal=tuple(diag), lower=tuple(lower))


def psd_from_2x2(d1: Number, d2: Number, off_sq: Number) -> PsdVerdict:
    """PSD of [[d1, o], [o, d2]] from the squared off-diagonal o**2, which stays rational."""
    d1, d2, off_sq = Scalar.of(d1), Scalar.of(d2), Scalar.of(off_sq)
    track = scalar_max_track((d1, d2, off_sq))
    form = (d1, d2, off_sq)
    det = d1 * d2 - off_sq
    s1, s2, sd = d1.sign(), d2.sign(), det.sign()
    if s1 == -1:
        return PsdVerdict(PsdStatus.NOT_PSD, track, minor=(0,), minor_det=d1, quadratic_form=form)
    if s2 == -1:
        return PsdVerdict(PsdStatus.NOT_PSD, track, minor=(1,), minor_det=d2, quadratic_form=form)
    if sd == -1:
        return PsdVerdict(PsdStatus.NOT_PSD, track, minor=(0, 1), minor_det=det, quadratic_form=form)
    if None in (s1, s2, sd):
        return PsdVerdict(PsdStatus.TIE, track, diagonal=(d1, d2), quadratic_form=form)
    second = det / d1 if s1 == 1 else d2
    return PsdVerdict(PsdStatus.PSD, track, permutation=(0, 1), diagonal=(d1, second), quadratic_form=form)


def _truth(result, t: Scalar) -> bool:
    if isinstance(result, Verdict):
        if result.undecided:
            raise BisectionError(f"predicate undecided at {t}: {result.reason}")
        return result.holds
    if result is None:
        raise BisectionError(f"predicate undecided at {t}")
    return bool(result)


def bisect_threshold(
    pred: Callable[[Scalar], Union[bool, Verdict, None]],
    lo: Number,
    hi: Number,
    tol: Number = Config.BISECT_TOL,
) -> Scalar:
    """
    Locate the switch point of a monotone (true then false) predicate.

    Midpoints are exact rationals, so reruns are bit-identical.
    """
    lo, hi, tol = Scalar.of(lo), Scalar.of(hi), Scalar.of(tol)
    if not (lo.is_exact and hi.is_exact and tol.is_exact):
        raise BisectionError("bisection endpoints and tolerance must be exact")
    if tol.sign() != 1 or not lo < hi:
        raise BisectionError("need lo < hi and tol > 0")
    if not _truth(pred(lo), lo):
        raise BisectionError(f"predicate is false at lo={lo}")
    if _truth(pred(hi), hi):
        raise BisectionError(f"predicate is true at hi={hi}")
    half = Scalar(Fraction(1, 2))
    for _ in range(Config.BISECT_MAX_ITER):
        if (hi - lo).compare(tol) <= 0:
            break
        mid = (lo + hi) * half
        if _truth(pred(mid), mid):
            lo = mid
        else:
            hi = mid
    else:
        raise BisectionError("bisection did not converge")
    result = (lo + hi) * half
    logger.debug("bisection converged to %s", result)
    return result
