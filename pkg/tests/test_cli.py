import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from ultrametric_gas.cli import main

SCHEMA = json.loads(resources.files("ultrametric_gas").joinpath("schema/output.schema.json").read_text())


def run_cli(capsys, *argv):
    code = main(list(argv))
    doc = json.loads(capsys.readouterr().out)
    jsonschema.validate(doc, SCHEMA)
    return code, doc


def strip_time(doc):
    return {k: v for k, v in doc.items() if k != "timestamp"}


def test_zcan_exact_value(capsys):
    code, doc = run_cli(capsys, "zcan", "--q", "3", "--n", "2", "--beta", "1")
    assert code == 0
    assert doc["results"]["value"]["exact"] == "3/4"
    assert doc["config"]["beta"] == "1/1"


def test_zcan_irrational_point(capsys):
    code, doc = run_cli(capsys, "zcan", "--q", "2", "--n", "3", "--beta", "1/2")
    assert code == 0
    assert doc["results"]["value"]["exact"] is None
    assert 0 < doc["results"]["value"]["float"] < 1


def test_zcan_energy_distribution(capsys):
    code, doc = run_cli(capsys, "zcan", "--q", "2", "--n", "2", "--dist", "3")
    assert doc["results"]["energy_distribution"]["exact"] == ["1/2", "1/4", "1/8", "1/16"]


@pytest.mark.parametrize("check", ["gcz", "funceq", "thm4"])
def test_zgc_checks(capsys, check):
    code, doc = run_cli(capsys, "zgc", "--q", "3", "--dmax", "6", "--check", check, "--ell", "1")
    assert code == 0 and doc["results"]["holds"] is True


def test_zgc_pmf(capsys):
    code, doc = run_cli(capsys, "zgc", "--q", "2", "--dmax", "4", "--t", "1", "--beta", "1", "--pmf", "40")
    pmf = doc["results"]["pmf"]
    assert code == 0
    assert sum(pmf["float"]) == pytest.approx(1.0, abs=1e-12)


def test_zmulti(capsys):
    code, doc = run_cli(capsys, "zmulti", "--q", "2", "--charges", "1,2", "--counts", "1,1", "--beta", "1")
    assert code == 0 and doc["results"]["value"]["exact"] == "4/7"


def test_cylprob_canonical(capsys):
    code, doc = run_cli(capsys, "cylprob", "--q", "2", "--balls", "2:1:0=2,2:1:1=0", "--n", "2", "--beta", "1")
    assert code == 0
    assert doc["results"]["ensemble"] == "canonical"
    assert doc["results"]["value"]["exact"] == "1/8"


def test_cylprob_grand_canonical(capsys):
    code, doc = run_cli(capsys, "cylprob", "--q", "3", "--balls", "3:1:0=1", "--t", "1", "--beta", "1")
    assert code == 0
    assert doc["results"]["ensemble"] == "grand_canonical"
    assert doc["results"]["value"]["error_bound"] <= 1e-12


def test_mc_verify(capsys):
    code, doc = run_cli(capsys, "mc-verify", "--q", "3", "--n", "2", "--beta", "1", "--samples", "20000", "--seed", "1")
    assert code == 0
    assert doc["results"]["exact"] == "3/4"
    assert doc["results"]["agrees_3sigma"] is True
    assert doc["metadata"]["rng"]["seed"] == 1


def test_domain_error_exit_code(capsys):
    code = main(["cylprob", "--q", "2", "--balls", "2:1:0=3", "--n", "2"])
    doc = json.loads(capsys.readouterr().out)
    jsonschema.validate(doc, SCHEMA)
    assert code == 1 and "error" in doc


@pytest.mark.parametrize(
    "argv",
    [
        ["zcan", "--q", "3", "--n", "-1"],
        ["zcan", "--q", "1", "--n", "2"],
        ["zcan", "--q", "3", "--n", "2", "--beta", "x"],
        ["cylprob", "--q", "2", "--balls", "2:1:0=1"],
        ["nosuch"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_output_file(tmp_path, capsys):
    out = tmp_path / "z.json"
    assert main(["zcan", "--q", "2", "--n", "3", "--output", str(out)]) == 0
    assert capsys.readouterr().out == ""
    jsonschema.validate(json.loads(out.read_text()), SCHEMA)


@pytest.mark.parametrize(
    "argv",
    [
        ["zcan", "--q", "5", "--n", "4", "--beta", "2"],
        ["cylprob", "--q", "2", "--balls", "2:2:0.1=1", "--n", "3"],
        ["mc-verify", "--q", "2", "--n", "3", "--beta", "1", "--samples", "15000", "--seed", "4"],
    ],
)
def test_deterministic_output(argv, capsys):
    _, a = run_cli(capsys, *argv)
    _, b = run_cli(capsys, *argv)
    assert strip_time(a) == strip_time(b)


def test_mc_verify_thread_independent(capsys):
    base = ["mc-verify", "--q", "3", "--n", "3", "--beta", "1/2", "--samples", "25000", "--seed", "2"]
    _, one = run_cli(capsys, *base, "--threads", "1")
    _, three = run_cli(capsys, *base, "--threads", "3")
    assert one["results"] == three["results"]


def test_console_script():
    proc = subprocess.run(
        [sys.executable, "-m", "ultrametric_gas.cli", "zcan", "--q", "2", "--n", "-1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2
    proc = subprocess.run(
        [sys.executable, "-m", "ultrametric_gas.cli", "zcan", "--q", "2", "--n", "2"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["N"] == 2


def test_schema_rejects_malformed_documents(capsys):
    _, doc = run_cli(capsys, "zcan", "--q", "2", "--n", "2")
    bad = dict(doc, results={"q": 2, "N": 2, "Z": {"rational_function": {"num": ["1.5"], "den": ["1/1"]}, "text": ""}})
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, SCHEMA)
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(dict(doc, extra=1), SCHEMA)
