import shutil
from pathlib import Path

import pytest
import yaml

from successhedge.cli import main
from successhedge.config import config_from_dict, load_config, parse_config
from successhedge.errors import ConfigError
from successhedge.pipeline import run, validate

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def ul1_config(tmp_path):
    path = tmp_path / "ul1.yaml"
    shutil.copy(CONFIGS / "ul1.yaml", path)
    return path


def edit(path, **changes):
    data = yaml.safe_load(path.read_text())
    for dotted, value in changes.items():
        node = data
        *head, last = dotted.split("__")
        for key in head:
            node = node[key]
        node[last] = value
    path.write_text(yaml.safe_dump(data))
    return path


def test_run_ul1(tmp_path, ul1_config, capsys):
    out = tmp_path / "out"
    assert main(["run", str(ul1_config), "--out", str(out)]) == 0
    report = yaml.safe_load((out / "report.yaml").read_text())
    assert report["success_ratio"] == pytest.approx(0.84, abs=1e-9)
    assert report["v0_used"] == pytest.approx(20, abs=1e-9)
    assert report["superhedge_price_of_D"] == pytest.approx(100 / 3, abs=1e-12)
    assert report["oracle_ratio"] == pytest.approx(0.84, abs=1e-6)
    assert abs(report["mc_estimate"] - 0.84) <= 3 * report["mc_standard_error"]
    assert "Philox" in report["mc_generator"]
    for name in ("gamma.csv", "strategy.csv", "claim.csv"):
        assert (out / name).exists()
    assert "success_ratio" in capsys.readouterr().out


def test_full_budget(tmp_path, ul1_config):
    edit(ul1_config, budget=100 / 3)
    report = run(load_config(ul1_config), out_dir=tmp_path / "o", verify=False)
    assert report.success_ratio == pytest.approx(1, abs=1e-12)
    assert report.oracle_ratio is None and report.mc_estimate is None


def test_no_verify_flag(tmp_path, ul1_config):
    assert main(["run", str(ul1_config), "--out", str(tmp_path / "o"), "--no-verify"]) == 0
    report = yaml.safe_load((tmp_path / "o" / "report.yaml").read_text())
    assert report["oracle_ratio"] is None and report["mc_estimate"] is None


def test_default_output_dir_is_relative_to_config(tmp_path, ul1_config):
    assert main(["run", str(ul1_config), "--no-verify"]) == 0
    assert (tmp_path / "out" / "ul1" / "report.yaml").exists()


def test_malformed_config_writes_nothing(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("market: {s0: 100, u: 2\nbudget: [\n")
    out = tmp_path / "o"
    assert main(["run", str(bad), "--out", str(out)]) == 2
    assert not out.exists()


def test_config_error_line_numbers(tmp_path, ul1_config):
    text = ul1_config.read_text().replace("u: 2", "u: two")
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.line == text.splitlines().index("  u: two") + 1
    with pytest.raises(ConfigError, match="missing section 'claim'"):
        parse_config("budget: 1\nmarket: {s0: 1, u: 2, d: 0.5, steps: 1, p_up: 0.5}\nsignals: {type: mortality, death_probs: []}\n")
    with pytest.raises(ConfigError, match="signals.type"):
        parse_config(ul1_config.read_text().replace("type: mortality", "type: weather"))


def test_exit_codes(tmp_path, ul1_config):
    edit(ul1_config, market__d=1.5)
    assert main(["run", str(ul1_config), "--out", str(tmp_path / "a")]) == 3
    assert not (tmp_path / "a").exists()
    edit(ul1_config, market__d=0.5, market__steps=30)
    assert main(["run", str(ul1_config), "--out", str(tmp_path / "b")]) == 4
    assert main(["run", str(tmp_path / "missing.yaml")]) == 2


def test_validate(tmp_path, ul1_config, capsys):
    assert validate(load_config(ul1_config)) == []
    assert main(["validate", str(ul1_config)]) == 0
    edit(ul1_config, market__d=2)
    diags = validate(load_config(ul1_config))
    assert len(diags) == 1 and "1 + rho < u" in diags[0]
    edit(ul1_config, market__d=0.5, market__steps=30)
    diags = validate(load_config(ul1_config))
    assert len(diags) == 1 and diags[0].startswith("capacity")
    assert main(["validate", str(ul1_config)]) == 4


def test_config_echo_round_trip(tmp_path, ul1_config):
    cfg = load_config(ul1_config)
    run(cfg, out_dir=tmp_path / "o")
    echo = yaml.safe_load((tmp_path / "o" / "report.yaml").read_text())["config"]
    assert config_from_dict(echo) == cfg


def test_report_deterministic(tmp_path, ul1_config):
    cfg = load_config(ul1_config)
    run(cfg, out_dir=tmp_path / "a")
    run(cfg, out_dir=tmp_path / "b")
    for name in ("report.yaml", "gamma.csv", "strategy.csv", "claim.csv"):
        a = (tmp_path / "a" / name).read_text().splitlines()
        b = (tmp_path / "b" / name).read_text().splitlines()
        assert [ln for ln in a if not ln.startswith("timestamp")] == [
            ln for ln in b if not ln.startswith("timestamp")
        ]


def test_table_claim_and_chain(tmp_path):
    (tmp_path / "d.csv").write_text(
        "market_path_id,signal_path_id,value\n0,0,100\n0,1,50\n1,0,10\n"
    )
    cfg = tmp_path / "c.yaml"
    cfg.write_text(
        """
budget: 1e1
market: {s0: 100, u: 2, d: 0.5, rho: 0, steps: 1, p_up: 0.5}
signals:
  type: chain
  times: [1]
  states: [[start], [x, y]]
  transitions: [[[0.3, 0.7]]]
claim: {type: table, path: d.csv}
verify:
  oracle: {}
"""
    )
    config = load_config(cfg)
    assert config.budget == 10.0
    report = run(config, out_dir=tmp_path / "o")
    assert report.oracle_ratio == pytest.approx(report.success_ratio, abs=1e-6)


def test_shipped_configs_validate():
    for path in CONFIGS.glob("*.yaml"):
        assert validate(load_config(path)) == [], path
