import json
import sys

import pytest

from sinr_ldp.__main__ import execute, main, rerun
from sinr_ldp.config.utils import ExperimentKind


def test_missing_grid_exits_with_2(tmp_path, caplog):
    config = tmp_path / "no_grid.toml"
    config.write_text('[experiment]\nkind = "scgf"\n')
    assert execute(config, out=tmp_path / "out") == 2
    assert "lambda_grid" in caplog.text
    assert not (tmp_path / "out").exists()


def test_missing_file_exits_with_2(tmp_path, caplog):
    assert execute(tmp_path / "absent.toml") == 2
    assert "invalid configuration" in caplog.text


def test_conflicting_kind_exits_with_2(tmp_path, configs_path, caplog):
    code = execute(
        configs_path / "mcmillan_4.toml", ExperimentKind.AEP, out=tmp_path / "out"
    )
    assert code == 2
    assert "kind" in caplog.text


def test_seed_override_and_rerun(tmp_path, configs_path):
    assert execute(configs_path / "mcmillan_4.toml", out=tmp_path / "a", seed=99) == 0
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["seed_root"] == 99
    assert manifest["config"]["seed_root"] == 99

    assert rerun(tmp_path / "a" / "manifest.json", out=tmp_path / "b") == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (
        tmp_path / "b" / "report.json"
    ).read_bytes()


def test_command_line(tmp_path, configs_path, monkeypatch):
    argv = [
        "sinr-ldp",
        "mcmillan",
        "--config",
        str(configs_path / "mcmillan_4.toml"),
        "--out",
        str(tmp_path),
    ]
    monkeypatch.setattr(sys, "argv", argv)
    with pytest.raises(SystemExit) as info:
        main()
    assert info.value.code == 0
    assert (tmp_path / "oracle_000.json").exists()
