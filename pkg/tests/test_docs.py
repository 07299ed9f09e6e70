import json
from importlib import resources
from pathlib import Path

import jsonschema
import pytest

DOCS = Path(__file__).resolve().parents[1] / "docs" / "schemas"


@pytest.mark.parametrize("name", ["worldline.schema.json", "protocol_config.schema.json"])
def test_documented_schema_matches_packaged(name):
    packaged = resources.files("twistorphase").joinpath("schemas", name).read_text()
    assert json.loads((DOCS / name).read_text()) == json.loads(packaged)


@pytest.mark.parametrize("schema, example", [
    ("worldline.schema.json", "static_worldline_a.json"),
    ("worldline.schema.json", "static_worldline_b.json"),
    ("protocol_config.schema.json", "protocol_dphi_pi.json"),
    ("run_report.schema.json", "run_report_reduce_check.json"),
])
def test_examples_validate(schema, example):
    jsonschema.Draft202012Validator.check_schema(json.loads((DOCS / schema).read_text()))
    jsonschema.validate(json.loads((DOCS / "examples" / example).read_text()),
                        json.loads((DOCS / schema).read_text()))


def test_cli_output_matches_report_schema(capsys):
    from twistorphase.cli import main
    main(["verify", "algebra", "--trials", "5"])
    doc = json.loads(capsys.readouterr().out)
    jsonschema.validate(doc, json.loads((DOCS / "run_report.schema.json").read_text()))
