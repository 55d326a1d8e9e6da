from __future__ import annotations

import io
import json

import pytest

from bvqo.cli import EXIT_INPUT, EXIT_OK, build_parser, config_from_args, launch_cli
from bvqo.config import SEED_ENV_VAR, RunConfig
from bvqo.errors import ConfigError
from bvqo.pipeline import load_workload


def test_explain_prints_both_plans(workloads_dir, capsys):
    code = launch_cli(["explain", "--workload", str(workloads_dir / "pushdown_example.json")])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "== baseline: T(B,A,C,D) ==" in out
    assert "== bitvector-aware:" in out


def test_explain_json_for_a_directory(workloads_dir, tmp_path):
    target = tmp_path / "explain.json"
    code = launch_cli(["explain", "--workload", str(workloads_dir / "synthetic"), "--format", "json", "--out", str(target)])
    assert code == EXIT_OK
    payload = json.loads(target.read_text(encoding="utf-8"))
    assert sorted(payload) == [f"q{i:02d}" for i in range(1, 11)]
    assert set(payload["q01"]) == {"baseline", "bitvector-aware"}


def test_explain_with_plot(workloads_dir, tmp_path):
    plot = tmp_path / "graph.png"
    code = launch_cli(["explain", "--workload", str(workloads_dir / "keyword_title.json"), "--plot", str(plot)])
    assert code == EXIT_OK
    assert plot.stat().st_size > 0


def test_malformed_workload_exits_one(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"relations": [', encoding="utf-8")
    assert launch_cli(["explain", "--workload", str(bad)]) == EXIT_INPUT
    assert "line 1" in capsys.readouterr().err


def test_missing_workload_exits_one(tmp_path):
    assert launch_cli(["compare", "--workload", str(tmp_path / "nope.json")]) == EXIT_INPUT


def test_oracle_cap_exits_one(workloads_dir, capsys):
    code = launch_cli(["verify", "--workload", str(workloads_dir / "synthetic" / "q05.json"), "--cap", "3"])
    assert code == EXIT_INPUT
    assert "cap is 3" in capsys.readouterr().err


def test_unknown_filter_mode_exits_one(workloads_dir):
    assert launch_cli(["explain", "--workload", str(workloads_dir / "keyword_title.json"), "--filter-mode", "bloom"]) == EXIT_INPUT


def test_unwritable_output_exits_one(workloads_dir, tmp_path):
    blocker = tmp_path / "file.txt"
    blocker.write_text("", encoding="utf-8")
    code = launch_cli(["explain", "--workload", str(workloads_dir / "keyword_title.json"), "--out", str(blocker / "out.txt")])
    assert code == EXIT_INPUT


def test_bench_single_point_writes_one_row(tmp_path, capsys):
    target = tmp_path / "bench.csv"
    code = launch_cli(["bench", "--fact-size", "500", "--dim-size", "20", "--grid", "0.5", "--out", str(target)])
    assert code == EXIT_OK
    lines = target.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "e,cost_with,cost_without,wall_with_ns,wall_without_ns"
    assert len(lines) == 2
    assert lines[1].startswith("0.5,")
    assert "break-even" in capsys.readouterr().out


def test_verify_suite_json(tmp_path):
    target = tmp_path / "verify.json"
    code = launch_cli(["verify", "--sizes", "3", "--seeds", "2", "--format", "json", "--out", str(target)])
    assert code == EXIT_OK
    payload = json.loads(target.read_text(encoding="utf-8"))
    assert payload["graphs"] == 6
    assert payload["counterexamples"] == 0


def test_compare_and_generate(workloads_dir, tmp_path):
    data = tmp_path / "data"
    assert launch_cli(["generate", "--workload", str(workloads_dir / "synthetic"), "--out", str(data)]) == EXIT_OK
    assert (data / "q01" / "store_sales.csv").exists()
    report = tmp_path / "compare.txt"
    code = launch_cli(
        ["compare", "--workload", str(workloads_dir / "synthetic"), "--data", str(data), "--out", str(report)]
    )
    assert code == EXIT_OK
    assert report.read_text(encoding="utf-8").startswith("query")


def test_no_arguments_without_terminal(monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO())
    assert launch_cli([]) == EXIT_INPUT
    assert "usage" in capsys.readouterr().err


def test_bad_flag_exits_one():
    assert launch_cli(["explain", "--cap", "many"]) == EXIT_INPUT


def test_parser_builds_settings():
    args = build_parser().parse_args(["verify", "--sizes", "3,4", "--p2-smaller-first", "--selectivity-order", "retention"])
    config = config_from_args(args)
    assert config.verify_sizes == (3, 4)
    assert config.optimizer.p2_larger_first is False
    assert config.optimizer.selectivity_order == "retention"


def test_seed_environment_override(monkeypatch):
    config = RunConfig(subcommand="verify", seed=7)
    monkeypatch.setenv(SEED_ENV_VAR, "42")
    assert config.resolved_seed() == 42
    monkeypatch.setenv(SEED_ENV_VAR, "x")
    with pytest.raises(ConfigError):
        config.resolved_seed()


def test_load_workload_orders_directory(workloads_dir):
    names = [name for name, _ in load_workload(workloads_dir / "synthetic")]
    assert names == sorted(names)
    assert len(names) == 10
