import json
import math

import pytest

from shgcat import cli
from shgcat.config import (
    ScenarioConfig,
    TimeSpec,
    apply_overrides,
    load_config,
    parse_complex,
    parse_list,
    parse_number,
)
from shgcat.exceptions import ConfigError, NoConvergence
from shgcat.hamiltonian import EffectiveForm


def test_parse_number_pi_expressions():
    assert parse_number("pi/2") == pytest.approx(math.pi / 2)
    assert parse_number("25pi") == pytest.approx(25 * math.pi)
    assert parse_number("0.5*pi") == pytest.approx(math.pi / 2)
    assert parse_number("-pi") == pytest.approx(-math.pi)
    assert parse_number("1e-3") == 1e-3
    with pytest.raises(ConfigError):
        parse_number("two")


def test_parse_list_and_complex():
    assert parse_list("0,1, 2") == [0.0, 1.0, 2.0]
    assert parse_list([1, "pi"]) == [1.0, pytest.approx(math.pi)]
    assert parse_complex("1,-2") == 1 - 2j
    assert parse_complex([0.5, 0.25]) == 0.5 + 0.25j
    assert parse_complex(2) == 2 + 0j
    with pytest.raises(ConfigError):
        parse_complex("a,b")
    with pytest.raises(ConfigError):
        parse_list("")


def test_time_conversions():
    assert TimeSpec("tau", (4.0,)).to_gt(10.0, 0.0) == [pytest.approx(4 / math.sqrt(20))]
    assert TimeSpec("lambda_t", (math.pi / 2,)).to_gt(10.0, 50.0) == [pytest.approx(25 * math.pi)]
    with pytest.raises(ConfigError):
        TimeSpec("lambda_t", (1.0,)).to_gt(10.0, 0.0)
    with pytest.raises(ConfigError):
        TimeSpec("seconds", (1.0,))
    with pytest.raises(ConfigError):
        TimeSpec("gt", (-1.0,))


def test_defaults_and_validation():
    cfg = ScenarioConfig.defaults("dispersive-cat")
    assert cfg.detuning_over_g == 50.0 and cfg.gt_values() == [pytest.approx(25 * math.pi)]
    assert ScenarioConfig.defaults("resonant").times.values == (0, 1, 2, 3, 4, 5, 6)
    with pytest.raises(ConfigError):
        ScenarioConfig.defaults("unknown")
    with pytest.raises(ConfigError):
        apply_overrides(cfg, {"detuning": 0}).validate()
    with pytest.raises(ConfigError):
        apply_overrides(cfg, {"nbar": -1}).validate()
    with pytest.raises(ConfigError):
        apply_overrides(cfg, {"order": 4}).validate()
    with pytest.raises(ConfigError):
        apply_overrides(cfg, {"tau": "1", "gt": "2"})


def test_overrides():
    cfg = apply_overrides(
        ScenarioConfig.defaults("resonant"),
        {"alpha": "1,1", "beta": [0.5, 0], "form": "eq12", "convention": "-1", "gt": "pi"},
    )
    assert cfg.alpha_value == 1 + 1j and cfg.nbar_value == pytest.approx(2.0)
    assert cfg.beta == 0.5
    assert cfg.form is EffectiveForm.DISPERSIVE_SHG
    assert cfg.conventions() == (-1,)
    assert cfg.times.kind == "gt"


def test_to_json_roundtrips_through_overrides(tmp_path):
    cfg = apply_overrides(ScenarioConfig.defaults("variance-scan"), {"nbar": 4, "beta": 0.5})
    data = cfg.to_json()
    path = tmp_path / "c.json"
    path.write_text(json.dumps(data))
    loaded = load_config(path)
    loaded.pop("scenario")
    again = apply_overrides(ScenarioConfig.defaults("variance-scan"), loaded)
    assert again == cfg


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    kind = tmp_path / "kind.json"
    kind.write_text(json.dumps({"times": {"kind": "hours", "values": [1]}}))
    with pytest.raises(ConfigError):
        load_config(kind)


def test_cli_flags_override_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"nbar": 4, "detuning": 30, "times": {"kind": "gt", "values": [1, 2]}}))
    args = cli.build_parser().parse_args(
        ["dispersive-cat", "--config", str(path), "--detuning", "40", "--out", str(tmp_path)]
    )
    cfg = cli.config_from_args(args)
    assert cfg.nbar_a == 4 and cfg.detuning_over_g == 40
    assert cfg.times == TimeSpec("gt", (1.0, 2.0))


def test_cli_exit_codes(tmp_path, monkeypatch, capsys):
    out = str(tmp_path / "o")
    assert cli.main(["dispersive-cat", "--detuning", "0", "--out", out]) == 2
    assert cli.main(["resonant", "--grid", "1:2", "--out", out]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["resonant", "--tau", "1", "--gt", "1"])
    assert exc.value.code == 2

    def boom(cfg):
        raise NoConvergence("forced")

    monkeypatch.setattr(cli, "run_scenario", boom)
    assert cli.main(["resonant", "--out", out]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_cli_success_writes_manifest(tmp_path):
    out = tmp_path / "o"
    code = cli.main(["resonant", "--tau", "0,1", "--grid", "-5:5:21", "--out", str(out), "--serial"])
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    for key in ("config", "library_version", "wall_time_s", "cutoffs", "norm_deficit", "results"):
        assert key in manifest
    assert manifest["cutoffs"]["n_max_a"] == 36
    assert sorted(p.name for p in out.glob("q_*.csv")) == ["q_tau_0.csv", "q_tau_1.csv"]
    header = (out / "q_tau_0.csv").read_text().splitlines()[0]
    assert header == "re_alpha,im_alpha,q"
