import json

import pytest

from algcalc.cli import dump_report, load_config, main
from algcalc.errors import ConfigError

from conftest import fixture_path


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_flat_metrizability_passes(capsys):
    code, out, _ = run_cli(capsys, "metrizability", fixture_path("flat.json"))
    assert code == 0
    payload = json.loads(out)
    assert payload["pass"] is True
    for check in payload["residuals"].values():
        assert check["max"] == 0.0


def test_check_structure_on_frame_fixture(capsys):
    code, out, _ = run_cli(capsys, "check-structure",
                           fixture_path("frame_exp.json"))
    assert code == 0
    payload = json.loads(out)
    assert set(payload["residuals"]) == {"antisymmetry",
                                         "anchor_compatibility", "jacobi"}


def test_connection_probe_table(capsys):
    code, out, _ = run_cli(capsys, "connection", "canonical",
                           fixture_path("poincare.json"))
    assert code == 0
    payload = json.loads(out)
    table = payload["metadata"]["blocks"]["hh"]["probes"][0]["values"]
    assert table[0][0][1] == pytest.approx(-1.0, abs=1e-10)
    assert table[1][0][0] == pytest.approx(1.0, abs=1e-10)
    assert table[1][1][1] == pytest.approx(-1.0, abs=1e-10)


def test_levi_civita_connection_command(capsys):
    code, out, _ = run_cli(capsys, "connection", "levi-civita",
                           fixture_path("so3.json"))
    assert code == 0
    payload = json.loads(out)
    assert set(payload["metadata"]["blocks"]) == {"h", "v"}


def test_finsler_check_command(capsys):
    code, out, _ = run_cli(capsys, "finsler-check",
                           fixture_path("randers.json"))
    assert code == 0
    payload = json.loads(out)
    assert payload["residuals"]["homogeneity"]["pass"] is True


def test_transform_check_command(capsys):
    code, out, _ = run_cli(capsys, "transform-check",
                           fixture_path("transform.json"))
    assert code == 0
    payload = json.loads(out)
    assert payload["residuals"]["gamma_round_trip"]["max"] < 1e-10
    assert payload["residuals"]["dconnection_round_trip"]["max"] < 1e-10


def test_degenerate_lagrangian_is_config_failure(capsys):
    code, _, err = run_cli(capsys, "metrizability",
                           fixture_path("degenerate.json"))
    assert code == 2
    assert "error" in err


def test_missing_file_is_config_failure(capsys):
    code, _, err = run_cli(capsys, "metrizability", "/no/such/file.json")
    assert code == 2


def test_tol_override_can_fail_a_check(capsys):
    # round-trip residuals are roundoff-level, so an absurd tolerance flips
    # the exit code without touching the computation
    code, out, _ = run_cli(capsys, "transform-check",
                           fixture_path("transform.json"), "--tol", "1e-30")
    assert code == 1
    assert json.loads(out)["pass"] is False


def test_output_file_and_probe_flag(capsys, tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = run_cli(capsys, "connection", "canonical",
                           fixture_path("flat.json"),
                           "--probe", "0,0,1,1", "-o", str(target))
    assert code == 0
    assert out == ""
    payload = json.loads(target.read_text())
    assert payload["metadata"]["blocks"]["hh"]["probes"]


def test_report_byte_determinism(capsys):
    outputs = []
    for args in (("report", fixture_path("poincare.json")),
                 ("report", fixture_path("poincare.json")),
                 ("report", fixture_path("poincare.json"),
                  "--threads", "4")):
        code, out, _ = run_cli(capsys, *args)
        assert code == 0
        outputs.append(out)
    assert outputs[0] == outputs[1] == outputs[2]


def test_dump_samples_flag(capsys):
    code, out, _ = run_cli(capsys, "check-structure",
                           fixture_path("flat.json"), "--dump-samples")
    assert code == 0
    payload = json.loads(out)
    assert len(payload["samples"]) == 25


def test_load_config_validations(tmp_path):
    base = {
        "schema_version": 1,
        "dims": {"m": 2, "p": 2, "r": 2},
        "anchor": "identity",
    }
    geometry = load_config(dict(base))
    assert geometry.m == 2 and geometry.metric is None

    bad = dict(base)
    bad["schema_version"] = 99
    with pytest.raises(ConfigError):
        load_config(bad)

    bad = dict(base)
    bad["anchor"] = [["x3", "0"], ["0", "1"]]
    with pytest.raises(ConfigError) as err:
        load_config(bad)
    assert "anchor[0][0]" in str(err.value)

    bad = dict(base)
    bad["metric"] = {"h": [["1", "0"], ["0", "1"]],
                     "v": [["1", "0"], ["0", "1"]]}
    bad["lagrangian"] = "y1^2"
    with pytest.raises(ConfigError) as err:
        load_config(bad)
    assert "not both" in str(err.value)


def test_dump_report_serialization():
    text = dump_report({"a": 1.0 / 3.0, "b": [True, None, 2]})
    assert "0.33333333333333331" in text
    assert json.loads(text) == {"a": 1.0 / 3.0, "b": [True, None, 2]}
