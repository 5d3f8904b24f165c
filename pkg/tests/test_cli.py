"""End-to-end checks of the command line battery.

Everything runs in process through ``main(argv)`` so the quadrature
caches warm across cases; the exit-code contract and both output
formats are exercised against real runs.
"""

import csv
import io
import json
import math

import pytest

from qmoments import MOMENT_SIGN_NOTE, modulator_from_dict
from qmoments.cli import main
from qmoments.quadrature import modulator_moment_factor

COS_MOD = '{"k": 0.5, "lambda": 0.1, "modes": [{"a": 1.0, "b": 1, "kind": "cosine"}]}'
SINE3_MOD = (
    '{"k": 1.0, "lambda": 0.9, "modes": ['
    '{"a": 0.5, "b": 1, "kind": "sine"}, '
    '{"a": 0.3, "b": 2, "kind": "sine"}, '
    '{"a": 0.2, "b": 5, "kind": "sine"}]}'
)
WEIER_K2_MOD = (
    '{"k": 2.0, "lambda": 0.9, '
    '"weierstrass": {"a": 0.5, "b": 3, "N": 10, "kind": "sine"}}'
)


def run_json(tmp_path, args, name="report.json"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    return code, json.loads(out.read_text())


class TestReportShape:
    def test_vanish_small_run(self, tmp_path):
        code, rep = run_json(
            tmp_path, ["vanish", "--k", "1", "--n", "0..2", "--j", "1..2"]
        )
        assert code == 0
        h = rep["header"]
        assert h["schema_version"] == 1
        assert h["command"] == "vanish"
        assert h["backend"] in ("numba", "numpy")
        assert h["moment_convention"] == MOMENT_SIGN_NOTE
        assert h["config"]["n"] == [0, 1, 2]
        assert h["config"]["j"] == [1, 2]
        assert rep["summary"] == {"total": 6, "passed": 6, "failed": 0}
        ids = [c["id"] for c in rep["cases"]]
        assert ids == sorted(ids)
        for c in rep["cases"]:
            assert abs(c["value"]) <= c["tolerance"]
            assert c["reference"] == 0.0
            assert c["error_estimate"] > 0.0
            assert c["pass"] is True

    def test_stdout_is_the_default_sink(self, capsys):
        code = main(["vanish", "--k", "1", "--n", "0..0", "--j", "1..1"])
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["summary"]["total"] == 1

    def test_csv_is_a_flat_projection(self, tmp_path):
        out = tmp_path / "report.csv"
        code = main(
            ["vanish", "--k", "1", "--n", "0..2", "--j", "1..2",
             "--format", "csv", "--out", str(out)]
        )
        assert code == 0
        rows = list(csv.reader(io.StringIO(out.read_text())))
        assert rows[0] == ["id", "pass", "value", "reference", "tolerance",
                           "error_estimate", "inputs"]
        assert len(rows) == 7
        for row in rows[1:]:
            assert row[1] == "True"
            parsed = json.loads(row[6])
            assert set(parsed) == {"k", "n", "j"}


class TestModulatorInput:
    def test_ratio_from_file(self, tmp_path):
        mod_file = tmp_path / "cos.json"
        mod_file.write_text(COS_MOD)
        code, rep = run_json(
            tmp_path, ["ratio", "--modulator", str(mod_file), "--n", "0..3"]
        )
        assert code == 0
        factor = modulator_moment_factor(modulator_from_dict(json.loads(COS_MOD)))
        per_n = [c for c in rep["cases"] if not c["id"].endswith("spread")]
        assert len(per_n) == 4
        for c in per_n:
            assert c["reference"] == factor
            assert abs(c["value"] - factor) <= 1e-12
        spread = [c for c in rep["cases"] if c["id"].endswith("spread")]
        assert len(spread) == 1
        assert spread[0]["value"] <= 1e-13

    def test_inline_json_accepted(self, tmp_path):
        code, rep = run_json(
            tmp_path, ["moments", "--modulator", SINE3_MOD, "--n", "0..3"]
        )
        assert code == 0
        for c in rep["cases"]:
            assert c["reference"] == 1.0
            assert abs(c["value"] - 1.0) <= 1e-11

    def test_gram_cross_case_appears(self, tmp_path):
        code, rep = run_json(
            tmp_path,
            ["gram", "--modulator", SINE3_MOD, "--degree", "3"],
        )
        assert code == 0
        ids = [c["id"] for c in rep["cases"]]
        assert any(i.endswith("/self") for i in ids)
        assert any("/cross/" in i for i in ids)
        for c in rep["cases"]:
            assert c["value"] <= 1e-10


class TestExitCodes:
    def test_failed_case_exits_one(self, tmp_path):
        code, rep = run_json(
            tmp_path,
            ["vanish", "--k", "1", "--n", "0..0", "--j", "2..2",
             "--tolerance", "1e-18"],
        )
        assert code == 1
        assert rep["summary"]["failed"] == 1
        assert rep["cases"][0]["pass"] is False

    def test_malformed_modulator_json(self, capsys):
        code = main(["moments", "--modulator", '{"k": 1.0, "lambda": }'])
        assert code == 2
        assert "not valid JSON" in capsys.readouterr().err

    def test_bad_modulator_field_is_named(self, capsys):
        bad = '{"k": 1.0, "lambda": 0.1, "modes": [{"a": 1.0, "b": 0, "kind": "sine"}]}'
        code = main(["moments", "--modulator", bad])
        assert code == 2
        assert "b" in capsys.readouterr().err

    def test_k_conflicts_with_modulator(self, capsys):
        code = main(["moments", "--k", "2", "--modulator", COS_MOD])
        assert code == 2
        assert "drop the --k flag" in capsys.readouterr().err

    def test_missing_modulator_file(self, capsys):
        code = main(["moments", "--modulator", "/nonexistent/mod.json"])
        assert code == 2
        assert "cannot read" in capsys.readouterr().err

    def test_ratio_requires_modulator(self, capsys):
        assert main(["ratio", "--k", "1"]) == 2
        assert "needs --modulator" in capsys.readouterr().err

    def test_invalid_span_exits_two(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["vanish", "--n", "5..2"])
        assert exc.value.code == 2

    def test_invalid_holder_profile(self, capsys):
        assert main(["holder", "--a", "1.2", "--b", "3"]) == 2

    def test_budget_exceeded_is_a_failed_case(self, tmp_path, capsys):
        # The k=2 Weierstrass truncation needs more nodes than the default
        # budget allows; the sweep must report that, not crash.
        code, rep = run_json(
            tmp_path, ["moments", "--modulator", WEIER_K2_MOD, "--n", "0..0"]
        )
        assert code == 1
        case = rep["cases"][0]
        assert case["pass"] is False
        assert case["value"] is None
        assert "budget" in case["inputs"]["reason"]


class TestDeterminism:
    def canon(self, rep):
        rep["header"]["timestamp"] = None
        return json.dumps(rep, sort_keys=True)

    def test_identical_config_identical_report(self, tmp_path):
        args = ["pearson", "--k", "1", "--points", "50"]
        _, first = run_json(tmp_path, args, "a.json")
        _, second = run_json(tmp_path, args, "b.json")
        assert self.canon(first) == self.canon(second)

    def test_seed_changes_sample_points(self, tmp_path):
        _, first = run_json(
            tmp_path, ["pearson", "--k", "1", "--seed", "1"], "a.json"
        )
        _, second = run_json(
            tmp_path, ["pearson", "--k", "1", "--seed", "2"], "b.json"
        )
        a = first["cases"][0]["inputs"]["x_min"]
        b = second["cases"][0]["inputs"]["x_min"]
        assert a != b


class TestFullBattery:
    def test_all_passes_everything(self, tmp_path):
        code, rep = run_json(tmp_path, ["all"])
        assert code == 0
        assert rep["summary"]["failed"] == 0
        assert rep["summary"]["total"] == 317
        ids = {c["id"] for c in rep["cases"]}
        assert "convention/positive-exponent" in ids
        assert "holder/smooth/alpha" in ids
        assert "hankel/quadrature/weier/dim=6/shifted" in ids
        assert "invariance/weier/lam=0.3/n=10" in ids
        assert "gram/k=1.0/cross/weier" in ids
        assert "pearson/density/weier" in ids
        conv = next(c for c in rep["cases"]
                    if c["id"] == "convention/positive-exponent")
        assert conv["value"] == 1.0
        assert math.isfinite(conv["reference"])
