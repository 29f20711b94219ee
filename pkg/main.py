"""
Command-line front end: classify, sweep, threshold, verify, measure.

JSON and CSV go to stdout (or --output); logs go to stderr.
Exit codes: 0 success / PASS, 1 mathematical FAIL or tester disagreement,
2 usage or input error.
"""
import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from config import Config
from families import (
    CURVES,
    ExamParams,
    Figure0Params,
    a_int,
    build_exam,
    build_flat,
    classify_field,
    classify_figure0,
    exam_bounds,
    figure0_curves,
    threshold,
    threshold_sq,
    thm4_subnormal,
)
from measures import atom_mass, inv_t_norm, moment1
from models import (
    ClassificationRecord,
    FamilyParamsDocument,
    MeasureDocument,
    WeightFieldDocument,
    WeightSeqDocument,
)
from numerics import (
    BisectionError,
    DomainError,
    MeasureError,
    NotInClassError,
    Scalar,
    TesterDisagreement,
    jsonable,
)
from shift1 import WeightSeq, forced_weight, is_k_hyponormal, subnormal_verdict
from verification_orchestrator import VerificationOrchestrator

logger = logging.getLogger(__name__)

SWEEP_HEADER = ["a", "kappa", "in_h1", "in_h2", "in_hinf", "power21_in_h1", "label"]
CURVE_HEADER = ["a"] + list(CURVES)
MEASURE_OPS = ("mass", "moment", "inv_t_norm", "atom_mass", "forced_weight")


def dumps(payload: Any) -> str:
    return json.dumps(jsonable(payload), sort_keys=True, indent=2)


def emit(text: str, output: Optional[str] = None):
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
        logger.info(f"Wrote {output}")
    else:
        sys.stdout.write(text + "\n")


def read_json(source: str) -> Any:
    """Inline JSON, or a path to a UTF-8 JSON file."""
    text = source.strip()
    if not text.startswith(("{", "[")):
        text = Path(source).read_text(encoding="utf-8")
    return json.loads(text)


def parse_range(text: str) -> List[Fraction]:
    """lo:hi:step with rational endpoints, hi included; a single value is a one-point range."""
    parts = text.split(":")
    if len(parts) == 1:
        return [Fraction(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"range must look like lo:hi:step, got {text!r}")
    lo, hi, step = (Fraction(p) for p in parts)
    if step <= 0:
        raise ValueError("range step must be positive")
    values = []
    v = lo
    while v <= hi:
        values.append(v)
        v += step
    if not values:
        raise ValueError(f"range {text!r} is empty")
    return values


def _status(verdict) -> Optional[str]:
    return None if verdict is None else verdict.status.value


def _flag(value: Optional[bool]) -> Optional[str]:
    if value is None:
        return None
    return "holds" if value else "fails"


# classify


def figure0_record(p: Figure0Params, lattice: bool = True) -> ClassificationRecord:
    c = classify_figure0(p, lattice=lattice)
    return ClassificationRecord(
        family="figure0",
        params=p.to_dict(),
        label=c.label,
        power_label=c.power_label,
        k_hypo={"k1": _flag(c.in_h1), "k2": _flag(c.in_h2)},
        subnormal=_flag(c.in_hinf),
        power_21=_flag(c.power21_in_h1),
        scope=c.scope,
        certificates=jsonable(c.certificates),
    )


def field_record(family: str, params: Dict[str, Any], T, extra: Optional[Dict[str, Any]] = None) -> ClassificationRecord:
    r = classify_field(T)
    certificates = [{"check": name, "verdict": v.to_dict()}
                    for name, v in (("k1", r["k_hypo"]["k1"]), ("k2", r["k_hypo"]["k2"]), ("subnormal", r["subnormal"]))]
    if extra:
        certificates.append(jsonable(extra))
    return ClassificationRecord(
        family=family,
        params=jsonable(params),
        label=r["label"],
        k_hypo={k: _status(v) for k, v in r["k_hypo"].items()},
        subnormal=_status(r["subnormal"]),
        power_21=_status(r["power_21"]),
        power_12=_status(r["power_12"]),
        certificates=certificates,
    )


def seq_record(W: WeightSeq) -> ClassificationRecord:
    """k-hyponormality up to the screening ceiling, then subnormality, of a one-variable shift."""
    ceiling = Config.SCREEN_K
    levels = {f"k{k}": is_k_hyponormal(W, k) for k in range(1, ceiling + 1)}
    sub = subnormal_verdict(W)
    highest = 0
    for v in levels.values():
        if not v.holds:
            break
        highest += 1
    if sub.holds:
        label = "H_inf"
    elif highest == 0:
        label = "not_H1"
    elif highest < ceiling:
        label = f"H{highest}_only"
    else:
        label = f"H{ceiling}_not_H_inf" if sub.fails else f"H{ceiling}"
    certificates = [{"check": name, "verdict": v.to_dict()} for name, v in levels.items()]
    certificates.append({"check": "subnormal", "verdict": sub.to_dict()})
    return ClassificationRecord(
        family="seq",
        params=jsonable(W.to_dict()),
        label=label,
        k_hypo={name: _status(v) for name, v in levels.items()},
        subnormal=_status(sub),
        certificates=certificates,
    )


def classification(doc: FamilyParamsDocument, lattice: bool = True) -> ClassificationRecord:
    p = doc.to_params()
    if isinstance(p, Figure0Params):
        return figure0_record(p, lattice)
    if isinstance(p, ExamParams):
        return field_record("exam", p.to_dict(), build_exam(p), {"bounds": exam_bounds(p).to_dict()})
    record = field_record("flat", p.to_dict(), build_flat(p))
    verdict = thm4_subnormal(p)
    record.subnormal = _status(verdict)
    record.certificates.append({"check": "beta_0 bound", "verdict": verdict.to_dict()})
    return record


def run_classify(args) -> int:
    if args.field:
        doc = WeightFieldDocument.model_validate(read_json(args.field))
        T = doc.to_field()
        record = field_record("field", {"field": doc.model_dump()}, T)
    elif args.seq:
        record = seq_record(WeightSeqDocument.model_validate(read_json(args.seq)).to_weight_seq())
    else:
        if args.params:
            doc = FamilyParamsDocument.model_validate(read_json(args.params))
        else:
            if not args.family:
                raise ValueError("give --family, --params, --field or --seq")
            values = {k: getattr(args, k) for k in ("a", "kappa", "x", "y", "b", "beta0") if getattr(args, k)}
            for k in ("eta", "eta1", "xi"):
                if getattr(args, k):
                    values[k] = read_json(getattr(args, k))
            doc = FamilyParamsDocument(family=args.family, **values)
        record = classification(doc, lattice=not args.no_lattice)
    emit(dumps(record.model_dump()), args.output)
    logger.info(f"Region: {record.region}")
    return 0


# sweep


def sweep_cell(cell) -> List[str]:
    a, kappa = cell
    c = classify_figure0(Figure0Params.from_values(a, kappa), lattice=False)
    cols = [c.in_h1, c.in_h2, c.in_hinf, c.power21_in_h1]
    return [str(a), str(kappa)] + ["" if v is None else str(v).lower() for v in cols] + [c.label]


def curve_row(a: Fraction) -> List[str]:
    values = figure0_curves(a)
    return [str(a)] + ["" if values[c] is None else _decimal(values[c]) for c in CURVES]


def _decimal(s: Scalar) -> str:
    return f"{float(s):.12g}"


def run_sweep(args) -> int:
    a_values = [a for a in parse_range(args.a) if a > 0]
    if not a_values:
        raise ValueError("no positive a values in the range")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    if args.curves_only:
        writer.writerow(CURVE_HEADER)
        writer.writerows(curve_row(a) for a in a_values)
    else:
        kappas = [k for k in parse_range(args.kappa) if k > 0]
        if not kappas:
            raise ValueError("no positive kappa values in the range")
        cells = [(a, k) for a in a_values for k in kappas]
        workers = args.workers or Config.SWEEP_WORKERS
        logger.info(f"Sweeping {len(cells)} cells with {workers} worker(s)")
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(sweep_cell, cells, chunksize=16))
        else:
            rows = [sweep_cell(c) for c in cells]
        writer.writerow(SWEEP_HEADER)
        writer.writerows(rows)
    emit(buffer.getvalue().rstrip("\n"), args.output)
    return 0


# threshold


def run_threshold(args) -> int:
    if args.curve == "a_int":
        value = a_int(Fraction(args.tol))
        payload = {"curve": "a_int", "tol": args.tol, "value": value}
    else:
        if args.a is None:
            raise ValueError(f"--a is required for {args.curve}")
        a = Scalar.of(args.a)
        payload = {
            "curve": args.curve,
            "a": args.a,
            "value_sq": threshold_sq(args.curve, a * a),
            "value": threshold(args.curve, a),
        }
    emit(dumps(payload), args.output)
    return 0


# verify


def run_verify(args) -> int:
    orchestrator = VerificationOrchestrator(seed=args.seed, instances=args.instances)
    report = orchestrator.verify(args.theorem)
    emit(dumps(report.model_dump()), args.output)
    for check in report.checks:
        logger.info(f"{'✓' if check.passed else '✗'} {check.name}")
    for note in report.notes:
        logger.info(note)
    logger.info(f"{report.theorem}: {report.status} (seed {report.seed})")
    return 0 if report.passed else 1


# measure


def run_measure(args) -> int:
    mu = MeasureDocument.model_validate(read_json(args.measure)).to_measure()
    if args.op == "mass":
        value = mu.mass()
    elif args.op == "moment":
        if args.k is None or args.k < 0:
            raise ValueError("moment needs --k >= 0")
        value = moment1(mu, args.k)
    elif args.op == "inv_t_norm":
        value = inv_t_norm(mu)
    elif args.op == "atom_mass":
        if args.at is None:
            raise ValueError("atom_mass needs --at")
        value = atom_mass(mu, Scalar.of(args.at))
    else:
        value = forced_weight(mu)
    emit(dumps({"op": args.op, "measure": mu.to_dict(), "value": value}), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shiftlab", description="Hyponormality and subnormality of weighted shifts")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("classify", help="classify a family member or a weight field")
    p.add_argument("--family", choices=["figure0", "exam", "flat"])
    for name in ("a", "kappa", "x", "y", "b", "beta0"):
        p.add_argument(f"--{name}", help="rational, e.g. 17/20")
    for name in ("eta", "eta1", "xi"):
        p.add_argument(f"--{name}", help="measure JSON (inline or file)")
    p.add_argument("--params", help="family parameter JSON (inline or file)")
    p.add_argument("--field", help="weight field JSON (inline or file)")
    p.add_argument("--seq", help="one-variable weight sequence JSON (inline or file)")
    p.add_argument("--no-lattice", action="store_true", help="skip the full-lattice cross-checks")
    p.add_argument("--output")
    p.set_defaults(handler=run_classify)

    p = sub.add_parser("sweep", help="Figure-0 region grid as CSV")
    p.add_argument("--a", required=True, help="lo:hi:step")
    p.add_argument("--kappa", default="3/5:1:1/20", help="lo:hi:step")
    p.add_argument("--curves-only", action="store_true")
    p.add_argument("--workers", type=int)
    p.add_argument("--output")
    p.set_defaults(handler=run_sweep)

    p = sub.add_parser("threshold", help="evaluate a threshold curve")
    p.add_argument("--curve", required=True, choices=list(CURVES) + ["a_int"])
    p.add_argument("--a")
    p.add_argument("--tol", default="1/10000")
    p.add_argument("--output")
    p.set_defaults(handler=run_threshold)

    p = sub.add_parser("verify", help="run a theorem verifier")
    p.add_argument("theorem", choices=Config.THEOREMS)
    p.add_argument("--instances", type=int)
    p.add_argument("--seed", type=int, default=Config.DEFAULT_SEED)
    p.add_argument("--output")
    p.set_defaults(handler=run_verify)

    p = sub.add_parser("measure", help="evaluate a measure functional")
    p.add_argument("op", choices=MEASURE_OPS)
    p.add_argument("--measure", required=True, help="measure JSON (inline or file)")
    p.add_argument("--k", type=int)
    p.add_argument("--at")
    p.add_argument("--output")
    p.set_defaults(handler=run_measure)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except TesterDisagreement as e:
        logger.error(f"Tester disagreement: {str(e)}")
        sys.stdout.write(dumps({"error": str(e), "certificates": e.certificates}) + "\n")
        return 1
    except (DomainError, MeasureError, BisectionError, NotInClassError, ValidationError,
            ValueError, OSError, json.JSONDecodeError) as e:
        logger.error(f"Invalid input: {str(e)}")
        sys.stderr.write(f"error: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
