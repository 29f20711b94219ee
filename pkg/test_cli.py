"""
End-to-end tests for the shiftlab command line.
"""
import csv
import io
import json

import pytest

import main as shiftlab
from numerics import TesterDisagreement

FIELD = json.dumps({
    "alpha_sq": [["1/2", "1"], ["1/2", "1"]],
    "beta_sq": [["1/3", "1/3"], ["1", "1"]],
    "label": "tensor",
})
MIXED = json.dumps({
    "atoms": [{"c": "1", "w": "1/2"}],
    "pieces": [{"a": "0", "b": "1", "coef": "1/2"}],
})
BERGMAN_LIKE = {"pieces": [{"a": "0", "b": "1", "coef": "2", "exp": "1"}]}


def run(capsys, *argv):
    code = shiftlab.main(list(argv))
    return code, capsys.readouterr().out


class TestMeasureVerb:
    """shiftlab measure"""

    def test_mass(self, capsys):
        code, out = run(capsys, "measure", "mass", "--measure", MIXED)
        assert code == 0
        assert json.loads(out)["value"] == "1"

    def test_moment(self, capsys):
        code, out = run(capsys, "measure", "moment", "--measure", MIXED, "--k", "1")
        assert code == 0
        assert json.loads(out)["value"] == "3/4"

    def test_inv_t_norm_is_approximate(self, capsys):
        lebesgue = json.dumps({"pieces": [{"a": "1/2", "b": "3/2"}]})
        code, out = run(capsys, "measure", "inv_t_norm", "--measure", lebesgue)
        assert code == 0
        assert json.loads(out)["value"].startswith("~1.0986")

    def test_moment_needs_k(self, capsys):
        code, _ = run(capsys, "measure", "moment", "--measure", MIXED)
        assert code == 2

    def test_floats_are_rejected(self, capsys):
        code, _ = run(capsys, "measure", "mass", "--measure", '{"atoms": [{"c": "1", "w": 0.5}]}')
        assert code == 2

    def test_measure_from_file(self, capsys, tmp_path):
        path = tmp_path / "mu.json"
        path.write_text(MIXED, encoding="utf-8")
        code, out = run(capsys, "measure", "atom_mass", "--measure", str(path), "--at", "1")
        assert code == 0
        assert json.loads(out)["value"] == "1/2"


class TestThresholdVerb:
    """shiftlab threshold"""

    def test_h1(self, capsys):
        code, out = run(capsys, "threshold", "--curve", "h1", "--a", "1/2")
        assert code == 0
        assert json.loads(out)["value_sq"] == "29/41"

    def test_outside_domain(self, capsys):
        code, _ = run(capsys, "threshold", "--curve", "h2", "--a", "9/10")
        assert code == 2

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "hinf.json"
        code, out = run(capsys, "threshold", "--curve", "hinf", "--a", "1/2", "--output", str(target))
        assert code == 0
        assert out == ""
        assert json.loads(target.read_text(encoding="utf-8"))["value_sq"] == "4/7"


class TestClassifyVerb:
    """shiftlab classify"""

    def test_figure0_origin_region(self, capsys):
        code, out = run(capsys, "classify", "--family", "figure0", "--a", "17/20", "--kappa", "99/100")
        record = json.loads(out)
        assert code == 0
        assert (record["label"], record["power_label"]) == ("H1_only", "power21_not_H1")

    def test_figure0_subnormal(self, capsys):
        code, out = run(capsys, "classify", "--family", "figure0", "--a", "1/2", "--kappa", "1/2", "--no-lattice")
        assert code == 0
        assert json.loads(out)["label"] == "H_inf"

    def test_tensor_field(self, capsys):
        code, out = run(capsys, "classify", "--field", FIELD)
        assert code == 0
        assert json.loads(out)["label"] == "H_inf (tensor)"

    def test_params_document(self, capsys):
        params = json.dumps({"family": "exam", "x": "9/10", "a": "1/2", "y": "13/25"})
        code, out = run(capsys, "classify", "--params", params)
        record = json.loads(out)
        assert code == 0
        assert record["k_hypo"]["k1"] == "holds"
        assert record["subnormal"] == "fails"

    def test_sequence_subnormal(self, capsys):
        seq = json.dumps({"prefix_sq": ["1/2"], "tail": {"kind": "measure", "measure": BERGMAN_LIKE}})
        code, out = run(capsys, "classify", "--seq", seq)
        record = json.loads(out)
        assert code == 0
        assert record["family"] == "seq"
        assert (record["label"], record["subnormal"]) == ("H_inf", "holds")

    def test_sequence_hyponormal_only(self, capsys):
        seq = json.dumps({"prefix_sq": ["3/5"], "tail": {"kind": "measure", "measure": BERGMAN_LIKE}})
        code, out = run(capsys, "classify", "--seq", seq)
        record = json.loads(out)
        assert code == 0
        assert record["k_hypo"]["k1"] == "holds"
        assert record["k_hypo"]["k2"] == "fails"
        assert record["label"] == "H1_only"
        assert record["subnormal"] == "fails"

    def test_sequence_closed_form_tail_rejected(self, capsys):
        seq = json.dumps({"prefix_sq": [], "tail": {"kind": "closed_form", "label": "g"}})
        code, _ = run(capsys, "classify", "--seq", seq)
        assert code == 2

    def test_missing_family(self, capsys):
        code, _ = run(capsys, "classify")
        assert code == 2

    def test_missing_parameter(self, capsys):
        code, _ = run(capsys, "classify", "--family", "figure0", "--a", "1/2")
        assert code == 2


class TestSweepVerb:
    """shiftlab sweep"""

    def test_rows(self, capsys):
        code, out = run(capsys, "sweep", "--a", "1/2", "--kappa", "1/2:1:1/4", "--workers", "1")
        lines = out.strip().splitlines()
        assert code == 0
        assert lines[0] == "a,kappa,in_h1,in_h2,in_hinf,power21_in_h1,label"
        assert lines[1] == "1/2,1/2,true,true,true,true,H_inf"
        assert len(lines) == 4

    def test_rows_parse_as_csv(self, capsys):
        code, out = run(capsys, "sweep", "--a", "1/2", "--kappa", "1/2:1:1/4", "--workers", "1")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0
        assert len(rows) == 3
        assert rows[0]["label"] == "H_inf"
        assert {r["a"] for r in rows} == {"1/2"}

    def test_deterministic(self, capsys):
        argv = ("sweep", "--a", "1/4:1/2:1/4", "--kappa", "3/5:1:1/5", "--workers", "1")
        assert run(capsys, *argv) == run(capsys, *argv)

    def test_curves_only(self, capsys):
        code, out = run(capsys, "sweep", "--a", "1/2", "--curves-only")
        header, row = out.strip().splitlines()
        assert header == "a,h1,h21,h2,hinf"
        assert row.startswith("1/2,0.8410")

    def test_empty_range(self, capsys):
        code, _ = run(capsys, "sweep", "--a", "1:1/2:1/10")
        assert code == 2


class TestVerifyVerb:
    """shiftlab verify"""

    def test_pass_echoes_seed(self, capsys):
        code, out = run(capsys, "verify", "pro1", "--instances", "3", "--seed", "7")
        report = json.loads(out)
        assert code == 0
        assert report["status"] == "PASS"
        assert report["seed"] == 7

    def test_conjecture_search_never_fails(self, capsys):
        code, out = run(capsys, "verify", "conjecture", "--instances", "2")
        assert code == 0
        assert json.loads(out)["notes"][0].startswith("open conjecture")

    def test_unknown_theorem(self, capsys):
        with pytest.raises(SystemExit) as exc:
            shiftlab.main(["verify", "nonsense"])
        assert exc.value.code == 2

    def test_disagreement_exit_code(self, capsys, monkeypatch):
        def disagree(args):
            raise TesterDisagreement("closed form and tester differ", {"closed_form": True, "tester": "fails"})

        monkeypatch.setattr(shiftlab, "run_threshold", disagree)
        code, out = run(capsys, "threshold", "--curve", "h1", "--a", "1/2")
        payload = json.loads(out)
        assert code == 1
        assert payload["certificates"]["tester"] == "fails"
