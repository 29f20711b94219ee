"""
Pydantic documents for the JSON interfaces: measures, weight sequences,
weight fields, family parameters, classification records and theorem reports.

Every number travels as a string: "p/q" (or a decimal literal) is exact,
a leading "~" marks an approximate value.
"""
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from families import ExamParams, Figure0Params, FlatParams
from measures import Measure1D, lebesgue
from numerics import Scalar, jsonable
from shift1 import ConstantTail, MeasureTail, WeightSeq
from shift2 import WeightField


def _check_number(value: Any) -> str:
    if isinstance(value, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(value, float):
        raise ValueError("pass numbers as strings (e.g. \"17/20\") to keep them exact")
    text = str(value).strip()
    try:
        Scalar.of(text)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise ValueError(f"not a number: {text!r}") from e
    return text


class AtomDocument(BaseModel):
    """A point mass w at c."""
    c: str = Field(..., description="Atom location, >= 0")
    w: str = Field(..., description="Atom weight")

    @field_validator("c", "w", mode="before")
    @classmethod
    def validate_numbers(cls, v):
        return _check_number(v)


class PieceDocument(BaseModel):
    """coef * t^exp on [a, b]."""
    a: str
    b: str
    coef: str = "1"
    exp: str = "0"

    @field_validator("a", "b", "coef", "exp", mode="before")
    @classmethod
    def validate_numbers(cls, v):
        return _check_number(v)


class MeasureDocument(BaseModel):
    """Atoms plus polynomial-density pieces on [0, inf); reads what Measure1D.to_dict() writes."""
    atoms: List[AtomDocument] = Field(default_factory=list)
    pieces: List[PieceDocument] = Field(default_factory=list)

    def to_measure(self) -> Measure1D:
        return Measure1D.build(
            atoms=[(a.c, a.w) for a in self.atoms],
            pieces=[(p.a, p.b, p.coef, p.exp) for p in self.pieces],
        )

    @classmethod
    def from_measure(cls, mu: Measure1D) -> "MeasureDocument":
        return cls.model_validate(mu.to_dict())


class ConstantTailDocument(BaseModel):
    kind: Literal["constant"]
    value: str = Field(..., description="Repeated squared weight after the prefix")

    @field_validator("value", mode="before")
    @classmethod
    def validate_value(cls, v):
        return _check_number(v)


class MeasureTailDocument(BaseModel):
    kind: Literal["measure"]
    measure: MeasureDocument = Field(..., description="Berger measure of the shift after the prefix")


class WeightSeqDocument(BaseModel):
    """Squared weights: an explicit prefix, then a constant or a Berger-measure tail."""
    prefix_sq: List[str] = Field(default_factory=list, description="Explicit squared weights")
    tail: Union[ConstantTailDocument, MeasureTailDocument] = Field(..., discriminator="kind")
    label: str = ""

    @field_validator("prefix_sq", mode="before")
    @classmethod
    def validate_prefix(cls, v):
        return [_check_number(x) for x in v]

    @field_validator("tail", mode="before")
    @classmethod
    def validate_tail(cls, v):
        if isinstance(v, dict) and v.get("kind") == "closed_form":
            raise ValueError("closed_form tails are generated in code and cannot be read from JSON")
        return v

    def to_weight_seq(self) -> WeightSeq:
        if isinstance(self.tail, ConstantTailDocument):
            return WeightSeq.constant(self.prefix_sq, self.tail.value, label=self.label)
        return WeightSeq.from_measure(self.tail.measure.to_measure(), self.prefix_sq, label=self.label)

    @classmethod
    def from_weight_seq(cls, W: WeightSeq) -> "WeightSeqDocument":
        if not isinstance(W.tail, (ConstantTail, MeasureTail)):
            raise ValueError("closed-form tails have no JSON form")
        return cls.model_validate(W.to_dict())


class WeightFieldDocument(BaseModel):
    """
    Squared weights on the rectangle [0, K1] x [0, K2], rows indexed by k2.
    Both directions repeat the last row and column.
    """
    K1: Optional[int] = Field(None, ge=0, description="Last explicit k1; len(row) - 1")
    K2: Optional[int] = Field(None, ge=0, description="Last explicit k2; number of rows - 1")
    alpha_sq: List[List[str]] = Field(..., min_length=1, description="alpha^2, alpha_sq[k2][k1]")
    beta_sq: List[List[str]] = Field(..., min_length=1, description="beta^2, beta_sq[k2][k1]")
    h_tail: str = Field("repeat", description="Only 'repeat' can be read from JSON")
    v_tail: str = Field("repeat", description="Only 'repeat' can be read from JSON")
    label: str = ""

    @field_validator("alpha_sq", "beta_sq", mode="before")
    @classmethod
    def validate_numbers(cls, v):
        return [[_check_number(x) for x in row] for row in v]

    @field_validator("h_tail", "v_tail")
    @classmethod
    def validate_tail(cls, v):
        if v != "repeat":
            raise ValueError(f"tail {v!r} is generated in code; JSON fields must use 'repeat'")
        return v

    @model_validator(mode="after")
    def validate_shape(self):
        for name in ("alpha_sq", "beta_sq"):
            rows = getattr(self, name)
            widths = {len(row) for row in rows}
            if len(widths) != 1 or 0 in widths:
                raise ValueError(f"{name} must be a non-empty rectangle")
        width, height = len(self.alpha_sq[0]), len(self.alpha_sq)
        if (len(self.beta_sq[0]), len(self.beta_sq)) != (width, height):
            raise ValueError("alpha_sq and beta_sq must have the same shape")
        if self.K1 is not None and self.K1 != width - 1:
            raise ValueError(f"K1 = {self.K1} but rows have {width} entries")
        if self.K2 is not None and self.K2 != height - 1:
            raise ValueError(f"K2 = {self.K2} but there are {height} rows")
        self.K1, self.K2 = width - 1, height - 1
        return self

    def to_field(self) -> WeightField:
        return WeightField(
            tuple(tuple(Scalar.of(x) for x in row) for row in self.alpha_sq),
            tuple(tuple(Scalar.of(x) for x in row) for row in self.beta_sq),
            h_repeat=True, v_repeat=True, label=self.label,
        )

    @classmethod
    def from_field(cls, T: WeightField) -> "WeightFieldDocument":
        if not T.repeating:
            raise ValueError("only fields with repeat tails have a JSON form")
        return cls.model_validate(T.to_dict())


class FamilyParamsDocument(BaseModel):
    """Parameters of one of the named families; fields not used by the family are ignored."""
    family: Literal["figure0", "exam", "flat"]
    a: Optional[str] = None
    kappa: Optional[str] = None
    x: Optional[str] = None
    y: Optional[str] = None
    b: Optional[str] = None
    beta0: Optional[str] = None
    eta: Optional[MeasureDocument] = None
    eta1: Optional[MeasureDocument] = None
    xi: Optional[MeasureDocument] = None

    @field_validator("a", "kappa", "x", "y", "b", "beta0", mode="before")
    @classmethod
    def validate_numbers(cls, v):
        return None if v is None else _check_number(v)

    @model_validator(mode="after")
    def validate_required(self):
        needed = {
            "figure0": ("a", "kappa"),
            "exam": ("x", "a", "y"),
            "flat": ("a", "b", "xi"),
        }[self.family]
        missing = [n for n in needed if getattr(self, n) is None]
        if missing:
            raise ValueError(f"family {self.family} needs {', '.join(missing)}")
        if self.family == "flat" and self.eta is None and (self.eta1 is None or self.beta0 is None):
            raise ValueError("family flat needs eta, or eta1 together with beta0")
        return self

    def to_params(self):
        if self.family == "figure0":
            return Figure0Params.from_values(self.a, self.kappa)
        if self.family == "exam":
            eta = self.eta.to_measure() if self.eta is not None else lebesgue("1/2", "3/2")
            return ExamParams(Scalar.of(self.x), Scalar.of(self.a), Scalar.of(self.y), eta)
        a_sq, b_sq = Scalar.of(self.a) ** 2, Scalar.of(self.b) ** 2
        xi = self.xi.to_measure()
        if self.eta is not None:
            return FlatParams.from_eta(a_sq, b_sq, xi, self.eta.to_measure())
        return FlatParams(a_sq, b_sq, xi, self.eta1.to_measure(), Scalar.of(self.beta0) ** 2)


class ClassificationRecord(BaseModel):
    """Result of `shiftlab classify` and one row of `shiftlab sweep`."""
    family: str
    params: Dict[str, Any]
    label: str = Field(..., description="Region label, e.g. H1_only")
    power_label: Optional[str] = None
    k_hypo: Dict[str, Optional[str]] = Field(..., description="k -> holds / fails / undecided")
    subnormal: Optional[str] = None
    power_21: Optional[str] = None
    power_12: Optional[str] = None
    scope: str = "lattice"
    certificates: List[Dict[str, Any]] = Field(default_factory=list)

    @property
    def region(self) -> str:
        return f"{self.label}, {self.power_label}" if self.power_label else self.label


class CheckResult(BaseModel):
    """One scripted check inside a theorem verification."""
    name: str
    passed: bool
    detail: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("detail", mode="before")
    @classmethod
    def validate_detail(cls, v):
        return jsonable(v)


class TheoremReport(BaseModel):
    """Outcome of `shiftlab verify`."""
    theorem: str
    status: Literal["PASS", "FAIL"]
    checks: List[CheckResult] = Field(default_factory=list)
    seed: Optional[int] = None
    notes: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "PASS"
