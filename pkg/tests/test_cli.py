"""Tests for command dispatch and the CLI surface."""

import json
from fractions import Fraction

import pytest
from click.testing import CliRunner

from hodgelab import __version__
from hodgelab.cli import cli
from hodgelab.core.errors import MissingFlag, ParseError, UnknownCommand
from hodgelab.services.dispatch import COMMANDS, _ell, command_echo, dispatch


def _structured(*args):
    result = CliRunner().invoke(cli, [*args, "--format", "structured"])
    stdout = result.stdout
    return result, (json.loads(stdout) if result.exit_code in (0, 1) and stdout.startswith("{") else None)


def test_commands_registry():
    assert set(COMMANDS) == {"validate", "classify", "nl", "brauer", "endo", "compose", "specialize", "fixtures"}


def test_unknown_command():
    with pytest.raises(UnknownCommand, match="Unknown command: nope"):
        dispatch("nope", {})


def test_missing_flags():
    with pytest.raises(MissingFlag, match="needs --fixture"):
        dispatch("validate", {})
    with pytest.raises(MissingFlag, match="needs --B, --point or --tau"):
        dispatch("nl", {"fixture": "fermat", "family": "d0"})


def test_command_echo():
    flags = {"tau": "0", "fixture": "fermat", "family": "d8", "two_class": None}
    assert command_echo("nl", flags) == "nl --fixture fermat --family d8 --tau 0"


def test_ell_shortcuts():
    assert _ell(None) == (1, 0)
    assert _ell("f") == (1, 1)
    assert _ell("l2") == (0, 1)
    assert _ell("1,1/2") == (1, Fraction(1, 2))
    with pytest.raises(ParseError):
        _ell("0,0")


def test_dispatch_nl_brauer_point():
    report = dispatch("nl", {"fixture": "fermat", "family": "d0", "B": "1/2,0"})
    assert report.passed
    assert report.results["NL"] is True
    assert report.results["B"] == (Fraction(1, 2), 0)
    assert report.results["order"] == 2


def test_dispatch_bad_point_flag():
    with pytest.raises(ParseError, match="--B needs 2 entries"):
        dispatch("nl", {"fixture": "fermat", "family": "d0", "B": "1/2"})
    with pytest.raises(ParseError, match="--point"):
        dispatch("nl", {"fixture": "fermat", "family": "d0", "point": "1,0"})


def test_version():
    result = CliRunner().invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_validate_structured():
    result, data = _structured("validate", "--fixture", "fermat")
    assert result.exit_code == 0
    assert data["passed"] is True
    assert data["results"]["q"] == "16"
    assert data["results"]["gram signature"] == "(2, 0, 0)"


def test_validate_text():
    result = CliRunner().invoke(cli, ["validate", "--fixture", "cm4"])
    assert result.exit_code == 0
    assert "all certificates pass" in result.output


def test_classify_equator_sample():
    result, data = _structured("classify", "--fixture", "fermat", "--family", "d8", "--tau", "0")
    assert result.exit_code == 0
    assert data["results"]["domain"] == "TwistorSphere"
    assert data["results"]["on equator"] is True
    assert data["results"]["brilliant"] is False


def test_brauer_command():
    result, data = _structured("brauer", "--fixture", "fermat", "--family", "d0", "--B", "1/2,0")
    assert result.exit_code == 0
    assert data["results"]["B"] == ["1/2", "0"]
    assert data["results"]["order"] == 2
    assert data["results"]["sigma_t"] == "sigma0 + (4)*l"


def test_brauer_command_needs_d_zero():
    result = CliRunner().invoke(cli, ["brauer", "--fixture", "fermat", "--family", "d8", "--tau", "0"])
    assert result.exit_code == 1
    assert "NotBrauerType" in result.output


def test_endo_command():
    result, data = _structured("endo", "--fixture", "fermat", "--family", "d0", "--B", "1/2,0")
    assert result.exit_code == 0
    assert data["results"]["kind"] == "CM"
    assert data["results"]["degree"] == 2
    assert data["results"]["K0"] == "x"
    assert data["results"]["fiber kind"] == "CM"


def test_compose_to_brauer():
    result, data = _structured("compose", "--fixture", "fermat", "--connector", "e1+l1")
    assert result.exit_code == 0
    assert data["results"]["B"] == ["-1/8", "0"]
    assert data["results"]["order"] == 8
    assert data["results"]["sigma"] == "sigma0 - f"
    assert len(data["results"]["intersections"]) == 2


def test_compose_dwork():
    result, data = _structured("compose", "--fixture", "fermat", "--connector", "e1+3*l1+2*l2", "--ell", "l2")
    assert result.exit_code == 0
    assert data["results"]["domain"] == "DworkTwoHalfPlanes"
    assert data["results"]["B"] == ["1/32", "0"]
    assert data["results"]["order"] == 32


def test_compose_points_only():
    result, data = _structured("compose", "--fixture", "fermat", "--connector", "e1+l1", "--ell", "f", "--to", "points")
    assert result.exit_code == 0
    assert data["results"]["intersections"][0]["c"] == "-1"
    assert "B" not in data["results"]


def test_compose_without_points_fails_certificate():
    result, data = _structured("compose", "--fixture", "fermat", "--connector", "e1+l1", "--ell", "l2")
    assert result.exit_code == 1
    assert data["passed"] is False
    assert data["results"]["discarded"] == 2


def test_compose_invalid_connector():
    result = CliRunner().invoke(cli, ["compose", "--fixture", "fermat", "--connector", "l1"])
    assert result.exit_code == 1
    assert "InSpanOfClasses" in result.output


def test_usage_errors_exit_2():
    runner = CliRunner()
    assert runner.invoke(cli, ["compose", "--fixture", "fermat"]).exit_code == 2
    assert runner.invoke(cli, ["validate", "--fixture", "no-such-fixture"]).exit_code == 2
    assert runner.invoke(cli, ["compose", "--fixture", "fermat", "--connector", "e1+", "--to", "x"]).exit_code == 2


def test_specialize():
    result, data = _structured("specialize", "--fixture", "fermat", "--connector", "e1+l1", "--s-grid", "0,1")
    assert result.exit_code == 0
    assert data["results"]["terminal B"] == ["-1/8", "0"]
    assert data["results"]["terminal order"] == 8
    assert len(data["results"]["equator distance upper bounds"]) == 20


def test_fixtures_command():
    result, data = _structured("fixtures")
    assert result.exit_code == 0
    assert "fermat" in data["results"]["fixtures"]
    result, data = _structured("fixtures", "--fixture", "fermat")
    assert result.exit_code == 0
    assert data["results"]["document"]["name"] == "fermat"


def test_generate(tmp_path):
    out = tmp_path / "gauss.json"
    result = CliRunner().invoke(cli, [
        "generate", "--minpoly", "1,0,1", "--conj", "0,-1", "--real=-1/2,1/2", "--imag", "1/2,3/2",
        "--xi", "1", "--name", "gauss", "--brilliant", "d0=0", "-o", str(out),
    ])
    assert result.exit_code == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["name"] == "gauss"
    assert doc["brilliant"] == [{"label": "d0", "d": "0"}]


def test_generate_wrong_signature_suggests():
    result = CliRunner().invoke(cli, [
        "generate", "--minpoly", "1,0,1", "--conj", "0,-1", "--real=-1/2,1/2", "--imag", "1/2,3/2", "--xi=-1",
    ])
    assert result.exit_code == 1
    assert "try xi = 1" in result.output


def test_config_command():
    result = CliRunner().invoke(cli, ["config"])
    assert result.exit_code == 0
    assert "output_format" in result.output


def test_specialize_on_cm4_certifies_the_equator_points():
    result, data = _structured("specialize", "--fixture", "cm4", "--connector", "e1+3*l1", "--s-grid", "0,1", "--tau", "1/2")
    assert result.exit_code == 0
    assert data["results"]["terminal B"] == ["-2/3", "0", "0", "0"]
    names = {c["name"]: c["passed"] for c in data["certificates"]}
    assert names["equator points are valid periods on the equator"]
    assert names["squared distance is (1 - s)(3 + s)/4"]
    assert names["equator distance shrinks along the flow"]
