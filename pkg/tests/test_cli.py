import csv
import io
import json

import pytest

from critjac.cli import EXPAND_HEADER, main
from critjac.config import RunConfig
from critjac.errors import ParameterError
from critjac.family import JacobiFamily
from critjac.recurrence import recurrence_residual
from critjac.signedlog import SignedLogSeq


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.mark.parametrize(
    "c1, c2, region",
    [("2", "1", "BoundaryCritical"), ("1", "1", "AbsolutelyContinuous"), ("3", "1", "Discrete"),
     ("0.5", "0.5", "BoundaryEasy")],
)
def test_classify(c1, c2, region):
    code, out, _ = run("classify", c1, c2)
    assert code == 0
    assert read_csv(out)[0]["region"] == region


def test_classify_invalid():
    code, _, err = run("classify", "0", "1")
    assert code == 1 and "positive" in err


def test_bad_flag_is_validation_error():
    code, _, err = run("expand", "--grid", "many")
    assert code == 1 and err


def test_expand_header_and_verdicts():
    code, out, err = run("expand", "--grid", "3")
    assert code == 0
    assert out.splitlines()[0] == ",".join(EXPAND_HEADER)
    verdicts = read_csv(err)
    assert len(verdicts) == 9
    assert all(v["pass"] == "true" and float(v["value"]) <= -1.3 for v in verdicts)


def test_expand_csv_json_identical(tmp_path):
    code_c, out_c, _ = run("expand", "--grid", "2")
    target = tmp_path / "e.json"
    code_j, _, _ = run("expand", "--grid", "2", "--format", "json", "--out", str(target))
    assert code_c == code_j == 0
    doc = json.loads(target.read_text())
    assert set(doc) == {"config", "rows", "verdicts"}
    rows = read_csv(out_c)
    assert len(rows) == len(doc["rows"])
    for rc, rj in zip(rows, doc["rows"]):
        assert list(rj) == list(EXPAND_HEADER)
        for k in EXPAND_HEADER:
            assert float(rc[k]) == float(rj[k])


def test_expand_off_boundary():
    code, _, err = run("expand", "--c1", "3", "--c2", "1")
    assert code == 1 and "|c1 - c2| = 1" in err


def test_kelley_rejects_bounds():
    code, _, err = run("kelley", "--A-plus", "0.11")
    assert code == 1 and "A+" in err


def test_kelley_single_lambda(tmp_path):
    out = tmp_path / "k.csv"
    code, _, _ = run("kelley", "--grid", "1", "--lo", "1", "--hi", "1.2", "--out", str(out))
    rows = read_csv(out.read_text())
    verdicts = read_csv((tmp_path / "k.csv.verdicts.csv").read_text())
    assert {r["branch"] for r in rows} == {"plus", "minus"}
    assert all(r["trapped"] == "true" for r in rows)
    assert all(float(r["max_offset_n"]) <= 0.16 for r in rows)
    failed = {v["check"] for v in verdicts if v["pass"] == "false"}
    # the uniform admissible index is far above 1e4 at this lambda
    assert failed == {"valid_from_uniform_plus", "valid_from_uniform_minus"}
    assert code == 2
    code, _, _ = run("kelley", "--grid", "1", "--lo", "1", "--hi", "1.2", "--valid-from-max", "1000000",
                     "--out", str(out))
    assert code == 0


def test_kelley_cap_is_numerical_failure():
    code, _, err = run("kelley", "--grid", "1", "--s-cap", "1000")
    assert code == 3 and "cap" in err


def test_spectrum_small_window(tmp_path):
    out = tmp_path / "s.json"
    code, _, _ = run("spectrum", "--lo", "2.5", "--hi", "3.2", "--K", "1000", "--format", "json", "--out", str(out))
    doc = json.loads(out.read_text())
    assert code == 0
    assert len(doc["rows"]) == 1
    row = doc["rows"][0]
    assert abs(row["lambda_shoot"] - 2.98520872) < 1e-8
    assert row["delta_methods"] <= 1e-9 and row["C_spread"] < 1e-6
    assert all(v["pass"] for v in doc["verdicts"])


def test_solve_first_kind_dump():
    code, out, err = run("solve", "--lam", "1", "--n-max", "10000")
    assert code == 0
    rows = read_csv(out)
    assert (rows[0]["n"], rows[0]["sign"], rows[0]["logmag"]) == ("1", "1", "0")
    assert (rows[1]["n"], rows[1]["sign"], rows[1]["logmag"]) == ("2", "0", "-inf")
    growth = [v for v in read_csv(err) if v["check"] == "growth_ratio_n1e4"][0]
    assert growth["pass"] == "true"


def test_solve_reingest():
    code, out, _ = run("solve", "--lam", "1.3", "--n-max", "3000")
    rows = read_csv(out)
    f = SignedLogSeq.from_signed_log([int(r["sign"]) for r in rows], [float(r["logmag"]) for r in rows])
    assert recurrence_residual(JacobiFamily(2, 1, 0.4), 1.3, f).max() <= 1e-10


def test_solve_json_null_sentinel():
    code, out, _ = run("solve", "--lam", "1", "--n-max", "5", "--format", "json")
    doc = json.loads(out)
    assert doc["rows"][1] == {"n": 2, "sign": 0, "logmag": None}


def test_solve_backward():
    code, out, _ = run("solve", "--kind", "backward", "--lam", "2", "--n-max", "200", "--f1", "0", "--f2", "1")
    rows = read_csv(out)
    assert code == 0 and rows[0]["n"] == "1" and rows[-1]["n"] == "200"


def test_defaults_round_trip(tmp_path):
    code, out, _ = run("defaults")
    assert code == 0
    assert RunConfig.from_text(out) == RunConfig()
    cfg = tmp_path / "run.cfg"
    cfg.write_text("K = 100\nalpha = 0.45  # comment\n")
    code, out, _ = run("defaults", "--config", str(cfg), "--K", "200")
    loaded = RunConfig.from_text(out)
    assert loaded.K == 200 and loaded.alpha == 0.45


def test_config_errors(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense = 1\n")
    assert run("defaults", "--config", str(cfg))[0] == 1
    assert run("defaults", "--config", str(tmp_path / "missing.cfg"))[0] == 1
    with pytest.raises(ParameterError):
        RunConfig.from_text("K = 1.5")
    with pytest.raises(ParameterError):
        RunConfig(grid=0).validate()
