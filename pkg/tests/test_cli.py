"""Command dispatch, exit codes, report artifacts, determinism."""

import json
import os

import numpy as np
import pytest

from biherm.cli import main

ROOT3 = float(np.sqrt(3) / 2)

CASE_B_DOC = {
    "alpha": {"re": 0.5, "im": 0.0},
    "beta": {"re": 0.6, "im": 0.0},
    "lambda": {"re": 0.0, "im": 0.0},
    "m": 1,
    "H": [[{"re": -0.5, "im": ROOT3}, 0, 0, {"re": -0.5, "im": -ROOT3}]],
}
CASE_C_DOC = {
    "alpha": 0.6, "beta": 0.6, "lambda": 0.1, "m": 1,
    "H": [[-1.0, 0, 0, -1.0]],
}
BAD_DET_DOC = {"alpha": 0.5, "beta": 0.7, "H": [[{"im": 1.0}, 0, 0, {"im": 1.0}]]}
NOT_REAL_DOC = {"alpha": {"im": 0.5}, "beta": 0.6}
INOUE_SM_DOC = {
    "family": "SM",
    "generators": [
        {"p": 4.0, "r": {"re": 0.0, "im": 0.5}},
        {"p": 1.0, "q": 1.3, "r": 1.0, "u": {"re": 0.7, "im": 0.2}},
    ],
}


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


class TestClassifyCommand:
    def test_case_b_accepts(self, tmp_path, capsys):
        code = main(["classify", "--config", write(tmp_path, "b.json", CASE_B_DOC)])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["case"] == "b"
        assert payload["a"] == pytest.approx(0.3)
        assert payload["ell"] == 3

    def test_determinant_refusal(self, tmp_path, capsys):
        code = main(["classify", "--config", write(tmp_path, "d.json", BAD_DET_DOC)])
        payload = json.loads(capsys.readouterr().out)
        assert code == 2
        assert payload["case"] == "not_real_type"
        assert "SU(2)" in payload["reason"]

    def test_malformed_json(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text('{"alpha": 0.5,,}')
        code = main(["classify", "--config", str(path)])
        err = capsys.readouterr().err
        assert code == 1
        assert "parse error" in err and "broken.json:1" in err

    def test_missing_field_points_at_it(self, tmp_path, capsys):
        code = main(["classify", "--config",
                     write(tmp_path, "m.json", {"alpha": 0.5})])
        assert code == 1
        assert "beta" in capsys.readouterr().err


class TestCertifyCommand:
    def test_small_pass(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = main(["certify", "--config", write(tmp_path, "b.json", CASE_B_DOC),
                     "--samples", "8", "--seed", "3", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["pass"] is True
        assert payload["schema_version"] == "1"
        assert payload["case"]["case"] == "b"
        assert len(payload["identities"]) >= 10
        assert payload["conventions"]["ddc"].startswith("d^c")

    def test_refusal_exit_code(self, tmp_path):
        code = main(["certify", "--config",
                     write(tmp_path, "n.json", NOT_REAL_DOC), "--samples", "4"])
        assert code == 2

    def test_oversized_shear_is_analytic_refusal(self, tmp_path, capsys):
        doc = dict(CASE_C_DOC, **{"lambda": 100.0})
        code = main(["certify", "--config", write(tmp_path, "c.json", doc),
                     "--samples", "4"])
        assert code == 3
        assert "lambda" in capsys.readouterr().err

    def test_tolerance_override_forces_failure(self, tmp_path, capsys):
        code = main(["certify", "--config", write(tmp_path, "b.json", CASE_B_DOC),
                     "--samples", "6", "--tol-tier", "j_minus_square=1e-18"])
        assert code == 5


class TestSweepCommand:
    def test_csv_shape_and_order(self, tmp_path, capsys):
        code = main(["sweep", "--config", write(tmp_path, "b.json", CASE_B_DOC),
                     "--samples", "10", "--t-grid", "0.2:0.05:0.05"])
        out = capsys.readouterr().out
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "t,min_margin,argmin_sample_index,p_min,p_max"
        ts = [float(row.split(",")[0]) for row in lines[1:]]
        # reversed/unsorted grids canonicalise to increasing order
        assert ts == sorted(ts)
        assert ts[0] == 0.05

    def test_zero_row(self, tmp_path, capsys):
        code = main(["sweep", "--config", write(tmp_path, "b.json", CASE_B_DOC),
                     "--samples", "6", "--t-grid", "0.0:0.1:0.1"])
        rows = capsys.readouterr().out.strip().splitlines()[1:]
        assert code == 0
        first = rows[0].split(",")
        assert float(first[0]) == 0.0
        assert abs(float(first[1])) < 1e-12
        assert float(first[3]) == pytest.approx(1.0, abs=1e-12)


class TestOtherCommands:
    def test_oracle(self, capsys):
        code = main(["oracle"])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0 and payload["pass"] is True

    def test_inoue(self, tmp_path, capsys):
        code = main(["inoue", "--config",
                     write(tmp_path, "sm.json", INOUE_SM_DOC), "--samples", "50"])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["excluded"] is True

    def test_construct(self, tmp_path, capsys):
        code = main(["construct", "--config",
                     write(tmp_path, "c.json", CASE_C_DOC),
                     "--samples", "6", "--t", "0.2"])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["margin_min"] > 0
        assert abs(payload["first_sample"]["p"]) < 1


class TestDeterminism:
    def test_reports_byte_identical_across_runs_and_threads(self, tmp_path):
        cfg = write(tmp_path, "b.json", CASE_B_DOC)
        outputs = []
        for run, threads in ((0, "1"), (1, "1"), (2, "4")):
            out = tmp_path / f"report{run}.json"
            old = os.environ.get("BIHERM_THREADS")
            os.environ["BIHERM_THREADS"] = threads
            try:
                code = main(["certify", "--config", cfg, "--samples", "10",
                             "--seed", "11", "--out", str(out)])
            finally:
                if old is None:
                    os.environ.pop("BIHERM_THREADS", None)
                else:
                    os.environ["BIHERM_THREADS"] = old
            assert code == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1] == outputs[2]
