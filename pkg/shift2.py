"""
Two-variable weighted shifts.

Index convention: a lattice point is k = (k1, k2); T1 moves k1 (weights
alpha), T2 moves k2 (weights beta). Fields store squared weights row-major by
k2, so ``alpha_sq[k2][k1]``.

    k2
    ^   row 2   . --a-- . --a-- .
    |   row 1   . --a-- . --a-- .
    |   row 0   . --a-- . --a-- .
    +-----------------------------> k1

restriction(T, i, j) keeps the points with k2 >= i and k1 >= j, so R_10 is
the pair restricted to rows k2 >= 1 and the core is R_11.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from config import Config
from measures import (
    Measure1D,
    Measure2D,
    dirac,
    dominates,
    extremal,
    inv_t_norm,
    inv_t_norm2,
    marginal_x,
    moment1,
    moment2,
    nonnegative2,
    power,
    pushforward_monomial,
    restriction_measure,
    t_weight,
)
from numerics import (
    INFINITE,
    ONE,
    DomainError,
    MeasureError,
    NotInClassError,
    Number,
    PsdStatus,
    PsdVerdict,
    Scalar,
    Status,
    SymMatrix,
    TesterDisagreement,
    Track,
    Verdict,
    psd_check,
    psd_from_2x2,
    scalar_max_track,
)
from shift1 import (
    ClosedFormTail,
    MeasureTail,
    WeightSeq,
    power_packets,
    restrict,
    subnormal_verdict,
)

logger = logging.getLogger(__name__)

PairVerdict = Verdict
WeightFn = Callable[[int, int], Number]


@dataclass(frozen=True, eq=False)
class WeightField:
    """
    Squared weights (alpha**2, beta**2) on the quarter plane.

    The rectangle [0, K1] x [0, K2] is explicit. Outside it a direction marked
    as repeating clamps the index to the rectangle edge; a non-repeating
    direction reads the tail functions. tail_certified records that passing
    every lattice test on the truncated box implies passing everywhere.
    """

    alpha_sq: Tuple[Tuple[Scalar, ...], ...]
    beta_sq: Tuple[Tuple[Scalar, ...], ...]
    alpha_tail: Optional[WeightFn] = None
    beta_tail: Optional[WeightFn] = None
    h_repeat: bool = True
    v_repeat: bool = True
    tail_certified: bool = False
    tail_note: str = ""
    row_seqs: Dict[int, WeightSeq] = field(default_factory=dict)
    col_seqs: Dict[int, WeightSeq] = field(default_factory=dict)
    core_measures: Optional[Tuple[Measure1D, Measure1D]] = None
    label: str = ""
    residue: Tuple[int, int] = (0, 0)
    _cache: Dict[Any, Any] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        alpha = tuple(tuple(Scalar.of(w) for w in row) for row in self.alpha_sq)
        beta = tuple(tuple(Scalar.of(w) for w in row) for row in self.beta_sq)
        if not alpha or not alpha[0]:
            raise DomainError("weight field needs a nonempty rectangle")
        width = len(alpha[0])
        if any(len(r) != width for r in alpha) or len(beta) != len(alpha) or any(len(r) != width for r in beta):
            raise DomainError("alpha_sq and beta_sq must share one rectangular shape")
        for k2, row in enumerate(alpha):
            for k1, w in enumerate(row):
                if w.sign() != 1 or beta[k2][k1].sign() != 1:
                    raise DomainError(f"squared weights must be positive at {(k1, k2)}")
        if not (self.h_repeat and self.v_repeat) and (self.alpha_tail is None or self.beta_tail is None):
            raise DomainError("a non-repeating direction needs tail functions")
        object.__setattr__(self, "alpha_sq", alpha)
        object.__setattr__(self, "beta_sq", beta)

    @classmethod
    def from_functions(cls, alpha_fn: WeightFn, beta_fn: WeightFn, K1: int, K2: int,
                       h_repeat: bool = False, v_repeat: bool = False, **kwargs) -> "WeightField":
        alpha = tuple(tuple(Scalar.of(alpha_fn(k1, k2)) for k1 in range(K1 + 1)) for k2 in range(K2 + 1))
        beta = tuple(tuple(Scalar.of(beta_fn(k1, k2)) for k1 in range(K1 + 1)) for k2 in range(K2 + 1))
        repeat = h_repeat and v_repeat
        return cls(alpha, beta,
                   alpha_tail=None if repeat else alpha_fn,
                   beta_tail=None if repeat else beta_fn,
                   h_repeat=h_repeat, v_repeat=v_repeat, **kwargs)

    @property
    def K1(self) -> int:
        return len(self.alpha_sq[0]) - 1

    @property
    def K2(self) -> int:
        return len(self.alpha_sq) - 1

    @property
    def repeating(self) -> bool:
        return self.h_repeat and self.v_repeat

    def _lookup(self, table, tail, kind: str, k1: int, k2: int) -> Scalar:
        if k1 < 0 or k2 < 0:
            raise IndexError((k1, k2))
        c1 = min(k1, self.K1) if self.h_repeat else k1
        c2 = min(k2, self.K2) if self.v_repeat else k2
        if c1 <= self.K1 and c2 <= self.K2:
            return table[c2][c1]
        key = (kind, c1, c2)
        cached = self._cache.get(key)
        if cached is None:
            cached = Scalar.of(tail(c1, c2))
            if cached.sign() != 1:
                raise DomainError(f"{kind} tail is not positive at {(c1, c2)}")
            self._cache[key] = cached
        return cached

    def alpha_sq_at(self, k1: int, k2: int) -> Scalar:
        return self._lookup(self.alpha_sq, self.alpha_tail, "alpha", k1, k2)

    def beta_sq_at(self, k1: int, k2: int) -> Scalar:
        return self._lookup(self.beta_sq, self.beta_tail, "beta", k1, k2)

    def bounds(self, depth: int = Config.LATTICE_DEPTH) -> Tuple[Scalar, Scalar]:
        """Largest squared weights of T1 and T2 over the checked box."""
        n1, n2, _ = lattice_box(self, depth)
        a = [self.alpha_sq_at(k1, k2) for k2 in range(n2 + 2) for k1 in range(n1 + 2)]
        b = [self.beta_sq_at(k1, k2) for k2 in range(n2 + 2) for k1 in range(n1 + 2)]
        return max(a, key=lambda s: s.to_mpf()), max(b, key=lambda s: s.to_mpf())

    def to_dict(self):
        return {
            "K1": self.K1,
            "K2": self.K2,
            "alpha_sq": [[str(w) for w in row] for row in self.alpha_sq],
            "beta_sq": [[str(w) for w in row] for row in self.beta_sq],
            "h_tail": "repeat" if self.h_repeat else "closed_form",
            "v_tail": "repeat" if self.v_repeat else "closed_form",
            "label": self.label,
        }


def tensor_field(alpha_row: Sequence[Number], beta_col: Sequence[Number], label: str = "tensor") -> WeightField:
    """(I (x) W_alpha, W_beta (x) I) with constant tails past the given values."""
    K1, K2 = len(alpha_row) - 1, len(beta_col) - 1
    return WeightField.from_functions(
        lambda k1, k2: alpha_row[min(k1, K1)],
        lambda k1, k2: beta_col[min(k2, K2)],
        K1, K2, h_repeat=True, v_repeat=True, label=label,
    )


def lattice_box(T: WeightField, depth: int = Config.LATTICE_DEPTH) -> Tuple[int, int, bool]:
    """(N1, N2, certified): the lattice points to check and whether passing them is conclusive."""
    n1 = T.K1 if T.h_repeat else max(depth, 1)
    n2 = T.K2 if T.v_repeat else max(depth, 1)
    return n1, n2, T.repeating or T.tail_certified


def _points(n1: int, n2: int) -> Iterator[Tuple[int, int]]:
    for k2 in range(n2 + 1):
        for k1 in range(n1 + 1):
            yield (k1, k2)


def _sweep(T: WeightField, depth: int, check: Callable[[Tuple[int, int]], Verdict], what: str) -> Verdict:
    n1, n2, certified = lattice_box(T, depth)
    pending = None
    track = Track.EXACT
    for k in _points(n1, n2):
        v = check(k)
        if v.track is Track.APPROX:
            track = Track.APPROX
        if v.fails:
            cert = dict(v.certificate)
            cert["point"] = list(k)
            return Verdict(Status.FAILS, f"{what} fails at {k}: {v.reason}", cert, v.track, max(n1, n2))
        if v.undecided and pending is None:
            pending = (k, v)
    if pending is not None:
        k, v = pending
        return Verdict.pending(f"{what} tie at {k}: {v.reason}", Track.APPROX, max(n1, n2), point=list(k))
    if not certified:
        return Verdict.pending(f"{what} holds on [0,{n1}]x[0,{n2}]; undecided at truncation", track,
                               max(n1, n2), box=[n1, n2])
    return Verdict.holding(f"{what} holds", track, max(n1, n2), box=[n1, n2],
                           basis="repeat tails" if T.repeating else T.tail_note or "certified tails")


# commutativity and moments


def _commute_at(T: WeightField, k: Tuple[int, int]) -> Verdict:
    k1, k2 = k
    left = T.beta_sq_at(k1 + 1, k2) * T.alpha_sq_at(k1, k2)
    right = T.alpha_sq_at(k1, k2 + 1) * T.beta_sq_at(k1, k2)
    c = left.compare(right)
    track = scalar_max_track((left, right))
    if c is None:
        return Verdict.pending("commutativity within tolerance", track)
    if c != 0:
        return Verdict.failing("beta_{k+e1} alpha_k != alpha_{k+e2} beta_k", track, left=left, right=right)
    return Verdict.holding(track=track)


def check_commuting(T: WeightField, depth: int = Config.LATTICE_DEPTH) -> Verdict:
    key = ("commuting", depth)
    if key not in T._cache:
        T._cache[key] = _sweep(T, depth, lambda k: _commute_at(T, k), "commutativity")
    return T._cache[key]


def _require_commuting(T: WeightField):
    v = check_commuting(T)
    if v.fails:
        raise NotInClassError(f"field is not commuting: {v.reason}")


def gamma2_path(T: WeightField, start: Tuple[int, int], moves: str) -> Scalar:
    """Product of squared weights along a path of 'x' / 'y' moves."""
    k1, k2 = start
    g = ONE
    for move in moves:
        if move == "x":
            g = g * T.alpha_sq_at(k1, k2)
            k1 += 1
        elif move == "y":
            g = g * T.beta_sq_at(k1, k2)
            k2 += 1
        else:
            raise ValueError(f"unknown move {move!r}")
    return g


def gamma2_from(T: WeightField, u: Tuple[int, int], v: Tuple[int, int]) -> Scalar:
    """gamma_{u+v} / gamma_u along the right-then-up staircase from u."""
    key = ("gamma", u, v)
    cached = T._cache.get(key)
    if cached is None:
        cached = gamma2_path(T, u, "x" * v[0] + "y" * v[1])
        T._cache[key] = cached
    return cached


def gamma2(T: WeightField, k: Tuple[int, int]) -> Scalar:
    _require_commuting(T)
    return gamma2_from(T, (0, 0), k)


# hyponormality


@dataclass(frozen=True)
class SixPoint:
    point: Tuple[int, int]
    d1: Scalar
    d2: Scalar
    off_sq: Scalar
    matrix: SymMatrix
    verdict: PsdVerdict

    def __iter__(self):
        yield self.matrix
        yield self.verdict


def six_point(T: WeightField, k: Tuple[int, int]) -> SixPoint:
    """
    The 2x2 Six-point matrix at k.

    PSD is decided from the diagonal and the squared off-diagonal, which stay
    rational in the squared weights.
    """
    k1, k2 = k
    a_k, b_k = T.alpha_sq_at(k1, k2), T.beta_sq_at(k1, k2)
    a_x = T.alpha_sq_at(k1 + 1, k2)
    b_y = T.beta_sq_at(k1, k2 + 1)
    a_y = T.alpha_sq_at(k1, k2 + 1)
    b_x = T.beta_sq_at(k1 + 1, k2)
    d1 = a_x - a_k
    d2 = b_y - b_k
    off_sq = a_y * b_x + a_k * b_k - 2 * a_k * b_x
    off = (a_y * b_x).sqrt() - (a_k * b_k).sqrt()
    matrix = SymMatrix([[d1, off], [off, d2]])
    return SixPoint(tuple(k), d1, d2, off_sq, matrix, psd_from_2x2(d1, d2, off_sq))


def is_hyponormal_pair(T: WeightField, depth: int = Config.LATTICE_DEPTH) -> Verdict:
    """Six-point Test at every lattice point."""
    def check(k):
        sp = six_point(T, k)
        return sp.verdict.to_verdict("Six-point matrix", d1=sp.d1, d2=sp.d2, off_sq=sp.off_sq)

    return _sweep(T, depth, check, "Six-point Test")


def degree_indices(k: int) -> List[Tuple[int, int]]:
    """I_k ordered by total degree, then lexicographically."""
    out = []
    for d in range(k + 1):
        out.extend(sorted((p, d - p) for p in range(d + 1)))
    return out


def moment_matrix(T: WeightField, u: Tuple[int, int], k: int) -> SymMatrix:
    """M_u(k) = (gamma_{u+i+j} / gamma_u)_{i, j in I_k}."""
    idx = degree_indices(k)
    return SymMatrix([[gamma2_from(T, u, (i[0] + j[0], i[1] + j[1])) for j in idx] for i in idx])


def is_k_hyponormal_pair(T: WeightField, k: int, depth: int = Config.LATTICE_DEPTH) -> PairVerdict:
    """
    k-hyponormality via positivity of M_u(k) at every lattice point.

    For k = 1 each point is cross-checked against the Six-point Test.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    _require_commuting(T)

    def check(u):
        verdict = psd_check(moment_matrix(T, u, k))
        v = verdict.to_verdict(f"M_u({k})", k=k)
        if k == 1:
            sp = six_point(T, u).verdict
            decided = {PsdStatus.PSD, PsdStatus.NOT_PSD}
            if sp.status in decided and verdict.status in decided and sp.status is not verdict.status:
                raise TesterDisagreement(
                    f"Six-point and M_u(1) disagree at {u}",
                    {"six_point": sp.to_dict(), "moment_matrix": verdict.to_dict()},
                )
        return v

    return _sweep(T, depth, check, f"{k}-hyponormality")


# restrictions and structure


def _restrict_seq_dict(seqs: Dict[int, WeightSeq], offset: int, shift: int) -> Dict[int, WeightSeq]:
    return {q - offset: restrict(s, shift) for q, s in seqs.items() if q >= offset}


def restriction(T: WeightField, i: int, j: int) -> WeightField:
    """R_ij: the pair restricted to k2 >= i and k1 >= j."""
    if i < 0 or j < 0:
        raise ValueError("restriction offsets must be nonnegative")
    if i == 0 and j == 0:
        return T
    core = None
    if T.core_measures is not None:
        xi, eta = T.core_measures
        core = (restriction_measure(xi, j), restriction_measure(eta, i))
    rows = _restrict_seq_dict(T.row_seqs, i, j)
    cols = _restrict_seq_dict(T.col_seqs, j, i)
    rows.setdefault(0, restrict(row_seq(T, i), j))
    cols.setdefault(0, restrict(col_seq(T, j), i))
    return WeightField.from_functions(
        lambda k1, k2: T.alpha_sq_at(k1 + j, k2 + i),
        lambda k1, k2: T.beta_sq_at(k1 + j, k2 + i),
        max(T.K1 - j, 0), max(T.K2 - i, 0),
        h_repeat=T.h_repeat, v_repeat=T.v_repeat,
        tail_certified=T.tail_certified, tail_note=T.tail_note,
        row_seqs=rows, col_seqs=cols, core_measures=core,
        label=f"R{i}{j}({T.label})",
    )


def transpose(T: WeightField) -> WeightField:
    """Swap the coordinates: (T1, T2) becomes (T2, T1) on the mirrored lattice."""
    core = None if T.core_measures is None else (T.core_measures[1], T.core_measures[0])
    return WeightField.from_functions(
        lambda k1, k2: T.beta_sq_at(k2, k1),
        lambda k1, k2: T.alpha_sq_at(k2, k1),
        T.K2, T.K1,
        h_repeat=T.v_repeat, v_repeat=T.h_repeat,
        tail_certified=T.tail_certified, tail_note=T.tail_note,
        row_seqs=dict(T.col_seqs), col_seqs=dict(T.row_seqs), core_measures=core,
        label=f"transpose({T.label})",
    )


def row_seq(T: WeightField, k2: int) -> WeightSeq:
    """The shift of T1 along row k2."""
    if k2 in T.row_seqs:
        return T.row_seqs[k2]
    if T.h_repeat:
        return WeightSeq.constant([T.alpha_sq_at(k1, k2) for k1 in range(T.K1)], T.alpha_sq_at(T.K1, k2),
                                  label=f"row {k2}")
    if T.core_measures is not None and k2 >= 1:
        return WeightSeq((T.alpha_sq_at(0, k2),), MeasureTail(T.core_measures[0]), label=f"row {k2}")
    return WeightSeq((), ClosedFormTail(lambda n: T.alpha_sq_at(n, k2), label=f"row {k2}"), label=f"row {k2}")


def col_seq(T: WeightField, k1: int) -> WeightSeq:
    """The shift of T2 along column k1."""
    if k1 in T.col_seqs:
        return T.col_seqs[k1]
    if T.v_repeat:
        return WeightSeq.constant([T.beta_sq_at(k1, k2) for k2 in range(T.K2)], T.beta_sq_at(k1, T.K2),
                                  label=f"column {k1}")
    if T.core_measures is not None and k1 >= 1:
        return WeightSeq((T.beta_sq_at(k1, 0),), MeasureTail(T.core_measures[1]), label=f"column {k1}")
    return WeightSeq((), ClosedFormTail(lambda n: T.beta_sq_at(k1, n), label=f"column {k1}"),
                     label=f"column {k1}")


def is_tensor_form(T: WeightField, depth: int = Config.LATTICE_DEPTH) -> bool:
    """alpha independent of k2 and beta independent of k1."""
    n1, n2, certified = lattice_box(T, depth)
    for k1, k2 in _points(n1 + 1, n2 + 1):
        if T.alpha_sq_at(k1, k2).compare(T.alpha_sq_at(k1, 0)) != 0:
            return False
        if T.beta_sq_at(k1, k2).compare(T.beta_sq_at(0, k2)) != 0:
            return False
    if not certified:
        logger.warning("tensor form of %s checked on [0,%d]x[0,%d] only", T.label, n1 + 1, n2 + 1)
    return True


def in_H0(T: WeightField, depth: int = Config.LATTICE_DEPTH) -> Verdict:
    """Commuting pair of subnormal operators: every row and column shift subnormal."""
    comm = check_commuting(T, depth)
    if comm.fails:
        return comm
    n1, n2, certified = lattice_box(T, depth)
    slices = [("row", k2, row_seq(T, k2)) for k2 in range(n2 + 1)]
    slices += [("column", k1, col_seq(T, k1)) for k1 in range(n1 + 1)]
    pending = None
    bases = set()
    for kind, idx, seq in slices:
        v = subnormal_verdict(seq)
        if v.fails:
            return Verdict.failing(f"{kind} {idx} is not subnormal: {v.reason}", v.track,
                                   slice=kind, index=idx,
                                   cause={k: c for k, c in v.certificate.items() if k != "measure"})
        if v.undecided:
            pending = pending or Verdict.pending(f"{kind} {idx}: {v.reason}", v.track, slice=kind, index=idx,
                                                 basis="screened")
        else:
            bases.add(v.certificate.get("basis", "measure"))
    if pending is not None:
        logger.warning("H0 membership of %s is screened: %s", T.label, pending.reason)
        return pending
    if not certified:
        return Verdict.pending(f"slices subnormal on [0,{n1}]x[0,{n2}]; undecided at truncation",
                               box=[n1, n2])
    return Verdict.holding("rows and columns subnormal", basis=sorted(bases), box=[n1, n2])


def in_TC(T: WeightField, depth: int = Config.LATTICE_DEPTH) -> bool:
    """H0 (not failing) with a core of tensor form."""
    if in_H0(T, depth).fails:
        return False
    return is_tensor_form(restriction(T, 1, 1), depth)


def in_A_k(T: WeightField, k: Tuple[int, int], depth: int = Config.LATTICE_DEPTH) -> bool:
    """R_{k1 k2}(T) in TC for T in H0."""
    if in_H0(T, depth).fails:
        return False
    return in_TC(restriction(T, k[0], k[1]), depth)


# power decompositions


def _ceil_div(a: int, b: int) -> int:
    return max(0, -(-a // b))


def power_pair(T: WeightField, m: int, n: int) -> List[WeightField]:
    """
    Summands of (T1**m, T2**n), one per residue (i, j) with 0 <= i < m, 0 <= j < n.

    Summand weights multiply along packets: alpha'_(p,q) = prod_r alpha_(mp+i+r, nq+j),
    beta'_(p,q) = prod_s beta_(mp+i, nq+j+s).
    """
    if m < 1 or n < 1:
        raise ValueError("powers must be at least 1")
    _require_commuting(T)
    if m == 1 and n == 1:
        return [T]
    out = []
    for i in range(m):
        for j in range(n):
            out.append(_summand(T, m, n, i, j))
    return out


def _summand(T: WeightField, m: int, n: int, i: int, j: int) -> WeightField:
    def a_fn(p, q):
        w = ONE
        for r in range(m):
            w = w * T.alpha_sq_at(m * p + i + r, n * q + j)
        return w

    def b_fn(p, q):
        w = ONE
        for s in range(n):
            w = w * T.beta_sq_at(m * p + i, n * q + j + s)
        return w

    core = None
    if T.core_measures is not None:
        xi, eta = T.core_measures
        core = (power(restriction_measure(xi, m + i - 1), m), power(restriction_measure(eta, n + j - 1), n))
    rows, cols = {}, {}
    if not T.h_repeat or 0 in T.row_seqs:
        rows[0] = power_packets(row_seq(T, j), m, i)
    if not T.v_repeat or 0 in T.col_seqs:
        cols[0] = power_packets(col_seq(T, i), n, j)
    return WeightField.from_functions(
        a_fn, b_fn,
        _ceil_div(T.K1 - i, m), _ceil_div(T.K2 - j, n),
        h_repeat=T.h_repeat, v_repeat=T.v_repeat,
        tail_certified=T.tail_certified, tail_note=T.tail_note,
        row_seqs=rows, col_seqs=cols, core_measures=core,
        label=f"{T.label}^({m},{n})[{i},{j}]", residue=(i, j),
    )


# subnormality


@dataclass(frozen=True)
class BackExtension2:
    verdict: Verdict
    measure: Optional[Measure2D] = None

    @property
    def holds(self) -> bool:
        return self.verdict.holds


def _check_moments(label: str, expected: Callable[[int, int], Scalar], measure_moment: Callable[[int, int], Scalar],
                   depth: int, one_dim: bool = False):
    for k2 in range(1 if one_dim else depth + 1):
        for k1 in range(depth + 1):
            want, got = expected(k1, k2), measure_moment(k1, k2)
            if want.compare(got) not in (0, None):
                raise NotInClassError(f"{label} does not reproduce the moment at {(k1, k2)}: {got} != {want}")


def subnormal_backext2(T: WeightField, mu_M: Measure2D, nu: Measure1D, beta00_sq: Optional[Number] = None,
                       check_depth: int = Config.MOMENT_CHECK_DEPTH) -> BackExtension2:
    """
    Subnormal backward extension of R_10 by the bottom row.

    mu_M is the Berger measure of R_10 and nu that of row 0. The pair is
    subnormal iff 1/t is mu_M-integrable, beta00**2 ||1/t|| <= 1 and
    beta00**2 ||1/t|| (mu_M)_ext^X <= nu; the Berger measure is then
    c (mu_M)_ext + (nu - c (mu_M)_ext^X) x delta_0 with c = beta00**2 ||1/t||.
    """
    b00 = Scalar.of(beta00_sq) if beta00_sq is not None else T.beta_sq_at(0, 0)
    _check_moments("mu_M", lambda k1, k2: gamma2_from(T, (0, 1), (k1, k2)),
                   lambda k1, k2: moment2(mu_M, (k1, k2)), check_depth)
    _check_moments("nu", lambda k1, k2: gamma2_from(T, (0, 0), (k1, 0)),
                   lambda k1, k2: moment1(nu, k1), check_depth, one_dim=True)
    norm = inv_t_norm2(mu_M)
    if norm is INFINITE:
        return BackExtension2(Verdict.failing("1/t is not integrable against mu_M", b00.track,
                                              condition="integrability"))
    c = b00 * norm
    track = scalar_max_track((b00, norm))
    bound = c.compare(ONE)
    if bound is None:
        return BackExtension2(Verdict.pending("beta00^2 ||1/t|| ties with 1", track, product=c))
    if bound == 1:
        return BackExtension2(Verdict.failing("beta00^2 exceeds 1/||1/t||", track, condition="norm",
                                              norm=norm, product=c))
    ext = extremal(mu_M)
    phi = marginal_x(ext).scale(c)
    dom = dominates(nu, phi)
    if not dom.holds:
        return BackExtension2(Verdict(dom.status, f"c (mu_M)_ext^X <= nu: {dom.reason}",
                                      {"condition": "domination", "product": c, **dom.certificate},
                                      scalar_max_track((c,)) if dom.track is Track.EXACT else Track.APPROX))
    mu = ext.scale(c) + Measure2D.product(nu - phi, dirac(0))
    if nonnegative2(mu).fails:
        raise MeasureError("backward extension produced a signed measure")
    return BackExtension2(Verdict.holding("2-variable subnormal backward extension", track, norm=norm, product=c),
                          mu)


@dataclass(frozen=True)
class TCData:
    """Parameters read off a field with a tensor core."""

    x_sq: Scalar
    y0_sq: Scalar
    xi: Measure1D
    eta: Measure1D
    r: Any
    eta_y1: Optional[Measure1D]
    mu_x: Optional[Measure1D]
    eta_y1_verdict: Verdict
    mu_x_verdict: Verdict


def _core_measures(T: WeightField) -> Optional[Tuple[Measure1D, Measure1D]]:
    if T.core_measures is not None:
        return T.core_measures
    core = restriction(T, 1, 1)
    if not is_tensor_form(core):
        raise NotInClassError(f"core of {T.label or 'field'} is not of tensor form")
    xi_v, eta_v = subnormal_verdict(row_seq(core, 0)), subnormal_verdict(col_seq(core, 0))
    if xi_v.holds and eta_v.holds:
        return xi_v.certificate["measure"], eta_v.certificate["measure"]
    return None


def tc_data(T: WeightField) -> Optional[TCData]:
    measures = _core_measures(T)
    if measures is None:
        return None
    xi, eta = measures
    mu_x_v = subnormal_verdict(row_seq(T, 0))
    eta_y1_v = subnormal_verdict(restrict(col_seq(T, 0), 1))
    return TCData(
        x_sq=T.alpha_sq_at(0, 1),
        y0_sq=T.beta_sq_at(0, 0),
        xi=xi,
        eta=eta,
        r=inv_t_norm(xi),
        eta_y1=eta_y1_v.certificate.get("measure") if eta_y1_v.holds else None,
        mu_x=mu_x_v.certificate.get("measure") if mu_x_v.holds else None,
        eta_y1_verdict=eta_y1_v,
        mu_x_verdict=mu_x_v,
    )


def r10_measure(d: TCData) -> Tuple[Verdict, Optional[Measure2D]]:
    """R_10 subnormal iff x**2 r eta <= (eta_y)_1; measure x**2 xi~ x eta + delta_0 x ((eta_y)_1 - x**2 r eta)."""
    if d.r is INFINITE:
        return Verdict.failing("1/s is not integrable against the core measure", condition="integrability"), None
    if d.eta_y1 is None:
        v = d.eta_y1_verdict
        return Verdict(v.status, f"column 0 above the origin: {v.reason}", dict(v.certificate), v.track), None
    scaled = d.eta.scale(d.x_sq * d.r)
    dom = dominates(d.eta_y1, scaled)
    if not dom.holds:
        return Verdict(dom.status, f"x^2 r eta <= (eta_y)_1: {dom.reason}", dict(dom.certificate), dom.track), None
    xi_tilde = t_weight(d.xi, -1, ONE)
    mu_M = Measure2D(((xi_tilde.scale(d.x_sq), d.eta), (dirac(0), d.eta_y1 - scaled)))
    return Verdict.holding("x^2 r eta <= (eta_y)_1", dom.track, x_sq=d.x_sq, r=d.r), mu_M


def subnormal_TC(T: WeightField) -> PairVerdict:
    """
    Subnormality of a field with tensor core, as a two-stage chain: R_10 by
    the core/column-0 domination, then the bottom row by 2-variable backward
    extension.
    """
    _require_commuting(T)
    d = tc_data(T)
    if d is None:
        return Verdict.pending("core measures unavailable", stage="core")
    stage1, mu_M = r10_measure(d)
    chain: Dict[str, Any] = {"r10": stage1.to_dict()}
    if not stage1.holds:
        return Verdict(stage1.status, f"R10: {stage1.reason}", {"chain": chain}, stage1.track)
    if d.mu_x is None:
        v = d.mu_x_verdict
        chain["row0"] = v.to_dict()
        return Verdict(v.status, f"bottom row: {v.reason}", {"chain": chain}, v.track)
    ext = subnormal_backext2(T, mu_M, d.mu_x, d.y0_sq)
    chain["backext"] = ext.verdict.to_dict()
    if not ext.holds:
        return Verdict(ext.verdict.status, f"backward extension: {ext.verdict.reason}", {"chain": chain},
                       ext.verdict.track)
    return Verdict.holding("subnormal", ext.verdict.track, chain=chain, measure=ext.measure, mu_M=mu_M)


def r10_verdict(T: WeightField) -> Verdict:
    d = tc_data(T)
    if d is None:
        return Verdict.pending("core measures unavailable")
    return r10_measure(d)[0]


@dataclass(frozen=True)
class PowerVerdicts:
    h0: Verdict
    upper: Tuple[Verdict, ...]
    combined: Verdict

    def to_dict(self):
        return {"h0": self.h0.to_dict(), "upper": [v.to_dict() for v in self.upper],
                "combined": self.combined.to_dict()}


def _agree(name: str, a: Verdict, b: Verdict):
    if not a.undecided and not b.undecided and a.status is not b.status:
        raise TesterDisagreement(f"{name}: {a.status.value} vs {b.status.value}",
                                 {"closed_form": a.to_dict(), "generic": b.to_dict()})


def power_vertical_subnormal(T: WeightField, n: int = 2) -> PowerVerdicts:
    """
    Subnormality of (T1, T2**n) on the residue summands H^0, ..., H^(n-1).

    H^0 is decided by backward extension of the pushed-forward R_10 measure
    (t-weighted by t**(n-1) and pushed under t -> t**n); the upper summands
    lie inside R_10.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    summands = power_pair(T, 1, n)
    d = tc_data(T)
    if d is None:
        raise NotInClassError("power analysis needs core measures")
    stage1, mu_M = r10_measure(d)
    upper = []
    for j in range(1, n):
        generic = subnormal_TC(summands[j])
        if j == 1:
            _agree("H1 summand vs R10", stage1, generic)
        upper.append(generic)
    if mu_M is not None and d.mu_x is not None:
        gamma = moment2(mu_M, (0, n - 1))
        theta = Measure2D(tuple((first, power(t_weight(second, n - 1, gamma), n)) for first, second in mu_M.terms))
        b00 = gamma2_from(T, (0, 0), (0, n))
        h0 = subnormal_backext2(summands[0], theta, d.mu_x, b00).verdict
        _agree("H0 summand vs generic", h0, subnormal_TC(summands[0]))
    else:
        h0 = subnormal_TC(summands[0])
    combined = Verdict.all_of([h0] + upper, f"(T1, T2^{n})")
    return PowerVerdicts(h0, tuple(upper), combined)


def power_horizontal_subnormal(T: WeightField, m: int = 2) -> PowerVerdicts:
    """(T1**m, T2) is the vertical case of the transposed field."""
    return power_vertical_subnormal(transpose(T), m)


# monomials


def monomial_summands(T: WeightField, m: int, n: int,
                      offsets: int = Config.MONOMIAL_OFFSETS) -> List[Tuple[Tuple[int, int], WeightSeq]]:
    """
    One-variable summands of T1**m T2**n along the orbits k -> k + (m, n)
    starting on the axes. After the first step every orbit lies in the core,
    so the tail is the pushforward of the core measure under s**m t**n.
    """
    if m < 1 or n < 1:
        raise ValueError("powers must be at least 1")
    _require_commuting(T)
    measures = _core_measures(T)
    if measures is None:
        raise NotInClassError("monomial summands need core measures")
    xi, eta = measures
    starts = [(i, 0) for i in range(offsets + 1)] + [(0, j) for j in range(1, offsets + 1)]
    out = []
    for s in starts:
        c1, c2 = s[0] + m, s[1] + n
        first = gamma2_from(T, s, (m, n))
        core = Measure2D.product(restriction_measure(xi, c1 - 1), restriction_measure(eta, c2 - 1))
        rho = pushforward_monomial(core, m, n)
        out.append((s, WeightSeq((first,), MeasureTail(rho), label=f"W{s}")))
    return out


def monomial_orbit_cover(T: WeightField, offsets: int = Config.MONOMIAL_OFFSETS) -> Verdict:
    """
    Every orbit start (i, 0) and (0, j), not only the explicit ones.

    The orbit from (i, 0) is subnormal iff y0^2 x^2 ||1/t||_eta xi_(i-1) <= gamma_(i,0),
    and the orbit from (0, j) iff x^2 ||1/s||_xi eta_(j-1) <= ((eta_y)_1)_(j-1), for
    every (m, n). Both families follow from s mu_x >= y0^2 x^2 ||1/t||_eta xi and
    (eta_y)_1 >= x^2 ||1/s||_xi eta.
    """
    scope = f"offsets<={offsets}"
    d = tc_data(T)
    if d is None or d.mu_x is None or d.eta_y1 is None:
        return Verdict.pending("axis measures unavailable", scope=scope)
    r_eta = inv_t_norm(d.eta)
    if d.r is INFINITE or r_eta is INFINITE:
        return Verdict.pending("core measure has infinite 1/t-norm", scope=scope)
    row = dominates(t_weight(d.mu_x, 1, ONE), d.xi.scale(d.y0_sq * d.x_sq * r_eta))
    col = dominates(d.eta_y1, d.eta.scale(d.x_sq * d.r))
    track = Track.APPROX if Track.APPROX in (row.track, col.track) else Track.EXACT
    if row.holds and col.holds:
        return Verdict.holding("row and column dominations cover every start", track, basis="domination")
    failed = "row" if not row.holds else "column"
    return Verdict.pending(f"starts past offset {offsets} not covered: {failed} domination does not hold",
                           track, scope=scope, condition=failed)


def monomial_subnormal(T: WeightField, m: int, n: int, offsets: int = Config.MONOMIAL_OFFSETS) -> Verdict:
    """Explicit orbits up to the offset decide failures; the domination cover is needed to hold."""
    verdicts = []
    for start, seq in monomial_summands(T, m, n, offsets):
        v = subnormal_verdict(seq)
        verdicts.append(Verdict(v.status, f"orbit from {start}: {v.reason}",
                                {k: c for k, c in v.certificate.items() if k != "measure"}, v.track, offsets))
    verdicts.append(monomial_orbit_cover(T, offsets))
    return Verdict.all_of(verdicts, f"T1^{m} T2^{n}")
