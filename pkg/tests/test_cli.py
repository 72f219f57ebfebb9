import csv
import io
import json
from importlib import resources

import jsonschema
import pytest

from adelic.cli import main

from helpers import CHEB, CLI_CASES, SQ, run_cli

SCHEMA = json.loads(resources.files("adelic").joinpath("report.schema.json").read_text())


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", sorted(n for n in CLI_CASES if n != "uscan"))
def test_json_reports_validate(capsys, name):
    code, out, err = run(capsys, *CLI_CASES[name])
    assert code == 0, err
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    assert doc["command"] == name


def test_resultant_value(capsys):
    code, out, _ = run(capsys, "resultant", CHEB)
    assert json.loads(out)["result"]["resultant"] == "1"


def test_uniform_n_output(capsys):
    _, out, _ = run(capsys, *CLI_CASES["uniform-n"])
    assert json.loads(out)["result"]["N"] == 19


def test_uscan_csv(capsys):
    code, out, _ = run(capsys, *CLI_CASES["uscan"])
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["re", "im", "u", "err"]
    assert len(rows) == 4


def test_input_errors_exit_2(capsys):
    assert run(capsys, "resultant", '{"d": 2, "F0": ["1","0","0"], "F1": ["1","0","0"]}')[0] == 2
    assert run(capsys, "green", CHEB, "--point", "abc")[0] == 2
    assert run(capsys, "resultant", "not json")[0] == 2
    assert run(capsys, "green", CHEB)[0] == 2


def test_out_file(tmp_path, capsys):
    target = tmp_path / "r.json"
    assert run(capsys, "hrat", CHEB, "--out", str(target))[0] == 0
    assert json.loads(target.read_text())["command"] == "hrat"


def test_environment_defaults():
    a = run_cli(["hrat", CHEB], env={"ADELIC_PREC": "128"})
    b = run_cli(["hrat", CHEB, "--prec", "128"])
    assert a.returncode == 0 and a.stdout == b.stdout
    assert json.loads(a.stdout)["config"]["precision"] == 128


def test_deterministic_across_threads():
    a = run_cli(["uscan", "--grid=-2:0:3,0", "--depth", "5", "--threads", "1"])
    b = run_cli(["uscan", "--grid=-2:0:3,0", "--depth", "5", "--threads", "3"])
    assert a.stdout == b.stdout
