import json
from pathlib import Path

import pytest

from laborflow import io
from laborflow.cli import (
    EXIT_EMPTY_CORE,
    EXIT_MISSING_INPUT,
    EXIT_OK,
    EXIT_SCHEMA,
    main,
)


def write_config(tmp_path, out_dir, **extra) -> Path:
    lines = {
        "out_dir": str(out_dir),
        "transitions": str(out_dir / "transitions.csv"),
        "spells": str(out_dir / "spells.csv"),
        "profiles": str(out_dir / "profiles.csv"),
        "marketcap": str(out_dir / "marketcap.csv"),
        "roster": str(out_dir / "roster.csv"),
        "min_size": 6,
        "null_replicates": 10,
        "groupings": "industry,region,cluster",
        "synth_branching": "2,2",
        "synth_firms_per_block": 8,
        "synth_members_per_firm": 10,
        "synth_move_prob": 0.06,
        "seed": 7,
    }
    lines.update(extra)
    path = tmp_path / "pipeline.cfg"
    path.write_text(
        "# test pipeline config\n"
        + "\n".join(f"{k} = {v}" for k, v in lines.items())
        + "\n",
        encoding="utf-8",
    )
    return path


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """One full synth + all run shared by the assertion tests below."""
    tmp_path = tmp_path_factory.mktemp("cli")
    out_dir = tmp_path / "run"
    cfg = write_config(tmp_path, out_dir)
    assert main(["synth", "--config", str(cfg)]) == EXIT_OK
    assert main(["all", "--config", str(cfg)]) == EXIT_OK
    return out_dir


EXPECTED_ARTIFACTS = [
    "transitions.csv",
    "spells.csv",
    "profiles.csv",
    "marketcap.csv",
    "roster.csv",
    "planted_labels.csv",
    "planted_trends.csv",
    "network_full.csv",
    "network_core.csv",
    "ingest_report.json",
    "tree.json",
    "tree_flat.csv",
    "tree_scored.json",
    "scores.csv",
    "save_list.json",
    "diagnostics.csv",
    "diagnostics_null.csv",
]


class TestPipelineSmoke:
    def test_artifacts_exist(self, pipeline):
        for name in EXPECTED_ARTIFACTS:
            assert (pipeline / name).exists(), name
        for grouping in ("industry", "region", "cluster"):
            assert (pipeline / f"flux_{grouping}_raw.csv").exists()
            assert (pipeline / f"flux_{grouping}_normalized.csv").exists()
            assert (pipeline / f"trend_{grouping}.csv").exists()
            assert (pipeline / f"trend_summary_{grouping}.json").exists()
            assert (pipeline / f"skills_{grouping}_total.csv").exists()
            assert (pipeline / f"skills_{grouping}_trend.csv").exists()

    def test_manifests_written_per_stage(self, pipeline):
        for stage in ("synth", "build", "detect", "overrep", "prune", "diagnose", "flux", "trends"):
            manifest = json.loads((pipeline / f"manifest_{stage}.json").read_text())
            assert manifest["stage"] == stage
            assert manifest["seed"] == 7
            assert "parameters" in manifest and "outputs" in manifest
            for name, digest in manifest["outputs"].items():
                assert io.sha256_file(pipeline / name) == digest

    def test_save_list_is_disjoint_tree_cut(self, pipeline):
        saved = io.load_save_list(pipeline / "save_list.json")
        for a in saved:
            for b in saved:
                if a != b:
                    assert not b.startswith(a + ".")

    def test_diagnostics_columns(self, pipeline):
        header = (pipeline / "diagnostics.csv").read_text().splitlines()[0]
        assert header == "level,rho,d_ind,d_reg,se_ind,se_reg,delta_ind,delta_reg"

    def test_rerun_single_stage_reproduces_outputs(self, pipeline, tmp_path):
        before = (pipeline / "tree.json").read_bytes()
        cfg = write_config(tmp_path, pipeline)
        assert main(["detect", "--config", str(cfg)]) == EXIT_OK
        assert (pipeline / "tree.json").read_bytes() == before


class TestExitCodes:
    def test_missing_transitions_is_2(self, tmp_path):
        out_dir = tmp_path / "run"
        cfg = write_config(tmp_path, out_dir)
        assert main(["build", "--config", str(cfg)]) == EXIT_MISSING_INPUT

    def test_unknown_config_key_is_3(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("bogus_key = 1\n", encoding="utf-8")
        assert main(["build", "--config", str(cfg)]) == EXIT_SCHEMA

    def test_bad_header_is_3(self, tmp_path):
        out_dir = tmp_path / "run"
        out_dir.mkdir()
        (out_dir / "transitions.csv").write_text("x,y\n", encoding="utf-8")
        cfg = write_config(tmp_path, out_dir)
        assert main(["build", "--config", str(cfg)]) == EXIT_SCHEMA

    def test_empty_core_is_4(self, tmp_path):
        out_dir = tmp_path / "run"
        cfg = write_config(tmp_path, out_dir)
        assert main(["synth", "--config", str(cfg)]) == EXIT_OK
        assert main(["build", "--config", str(cfg), "--set", "min_weight = 1e9"]) == EXIT_EMPTY_CORE

    def test_detect_before_build_is_2(self, tmp_path):
        out_dir = tmp_path / "run2"
        cfg = write_config(tmp_path, out_dir)
        assert main(["detect", "--config", str(cfg)]) == EXIT_MISSING_INPUT

    def test_error_report_is_json_on_stderr(self, tmp_path, capsys):
        out_dir = tmp_path / "run"
        cfg = write_config(tmp_path, out_dir)
        main(["build", "--config", str(cfg)])
        err = capsys.readouterr().err.strip()
        payload = json.loads(err)
        assert payload["error"] == EXIT_MISSING_INPUT
        assert payload["stage"] == "build"


class TestConfigPlumbing:
    def test_env_var_default_config(self, tmp_path, monkeypatch):
        out_dir = tmp_path / "run"
        cfg = write_config(tmp_path, out_dir)
        monkeypatch.setenv("LABORFLOW_CONFIG", str(cfg))
        assert main(["synth"]) == EXIT_OK
        assert (out_dir / "transitions.csv").exists()

    def test_flag_overrides_win(self, tmp_path):
        out_dir = tmp_path / "runA"
        other = tmp_path / "runB"
        cfg = write_config(tmp_path, out_dir)
        assert main(["synth", "--config", str(cfg), "--out-dir", str(other)]) == EXIT_OK
        assert (other / "transitions.csv").exists()
        assert not (out_dir / "transitions.csv").exists()

    def test_missing_config_file_is_2(self):
        assert main(["synth", "--config", "/nonexistent.cfg"]) == EXIT_MISSING_INPUT

    def test_threads_flag_accepted(self, tmp_path):
        out_dir = tmp_path / "run"
        cfg = write_config(tmp_path, out_dir)
        assert main(["synth", "--config", str(cfg), "--threads", "2"]) == EXIT_OK


class TestConfigValidation:
    def test_invalid_threshold_is_schema_error(self, tmp_path):
        out_dir = tmp_path / "run"
        cfg = write_config(tmp_path, out_dir, theta_keep=-2)
        assert main(["synth", "--config", str(cfg)]) == EXIT_SCHEMA

    def test_invalid_grouping_is_schema_error(self, tmp_path):
        out_dir = tmp_path / "run"
        cfg = write_config(tmp_path, out_dir, groupings="industry,bogus")
        assert main(["synth", "--config", str(cfg)]) == EXIT_SCHEMA
