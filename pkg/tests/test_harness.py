import csv
import json
from dataclasses import replace
from pathlib import Path

import pytest

from coci import ConfigError
from coci.cli import main as cli_main
from coci.harness import (
    ExperimentConfig,
    emit_results,
    load_config,
    parse_config,
    parse_records_csv,
    run_experiment,
    trial_seed,
)

CONFIG_DIR = Path(__file__).parent.parent / "configs"


def quick_config(**overrides) -> ExperimentConfig:
    cfg = load_config(CONFIG_DIR / "quick.json")
    return replace(cfg, **overrides) if overrides else cfg


class TestConfigParsing:
    def test_fixture_configs_load(self):
        for name in ["best_arm", "top2", "osa", "water", "adaptive_vs_uniform", "quick"]:
            cfg = load_config(CONFIG_DIR / f"{name}.json")
            assert cfg.trials >= 1

    def test_missing_application(self):
        with pytest.raises(ConfigError) as err:
            parse_config({"theta_star": [0.5], "delta": 0.1})
        assert err.value.field == "application"

    def test_bad_delta(self):
        with pytest.raises(ConfigError) as err:
            parse_config({"application": "best-arm", "theta_star": [0.5, 0.2], "delta": 1.5})
        assert err.value.field == "delta"

    def test_theta_out_of_range_has_indexed_path(self):
        with pytest.raises(ConfigError) as err:
            parse_config(
                {"application": "best-arm", "theta_star": [0.5, 1.2], "delta": 0.1}
            )
        assert err.value.field == "theta_star[1]"

    def test_top_k_requires_k(self):
        with pytest.raises(ConfigError) as err:
            parse_config({"application": "top-k", "theta_star": [0.5, 0.2], "delta": 0.1})
        assert err.value.field == "k"

    def test_osa_requires_variance_estimator(self):
        with pytest.raises(ConfigError) as err:
            parse_config(
                {
                    "application": "osa",
                    "theta_star": [0.2, 0.1],
                    "n": [1, 1],
                    "k": 5,
                    "delta": 0.1,
                    "estimator": "mean",
                }
            )
        assert err.value.field == "estimator"

    def test_water_cost_kind(self):
        with pytest.raises(ConfigError) as err:
            parse_config(
                {
                    "application": "water",
                    "theta_star": [0.5],
                    "delta": 0.1,
                    "water": {"b": 0.5, "caps": [1.0], "grid_step": 0.5, "costs": [{"kind": "cubic"}]},
                }
            )
        assert err.value.field == "water.costs[0]"

    def test_arm_model_count(self):
        with pytest.raises(ConfigError) as err:
            parse_config(
                {
                    "application": "best-arm",
                    "theta_star": [0.5, 0.2],
                    "delta": 0.1,
                    "arms": [{"kind": "bernoulli", "p": 0.5}],
                }
            )
        assert err.value.field == "arms"

    def test_degenerate_parameters_rejected(self):
        from coci.harness import build_problem

        cfg = parse_config(
            {"application": "best-arm", "theta_star": [0.5, 0.5], "delta": 0.1}
        )
        with pytest.raises(ConfigError) as err:
            build_problem(cfg)
        assert err.value.field == "theta_star"


class TestTrialSeeds:
    def test_stable_and_distinct(self):
        seeds = [trial_seed(7, i) for i in range(50)]
        assert seeds == [trial_seed(7, i) for i in range(50)]
        assert len(set(seeds)) == 50

    def test_extending_trials_preserves_prefix(self):
        cfg = quick_config(trials=3, hardness_epsilon=None)
        small = run_experiment(cfg)
        big = run_experiment(replace(cfg, trials=5))
        small_keys = [(r.trial, r.mode, r.seed, r.rounds) for r in small.records]
        big_keys = [(r.trial, r.mode, r.seed, r.rounds) for r in big.records]
        assert big_keys[: len(small_keys)] == small_keys


class TestRunExperiment:
    def test_point_mass_trial(self):
        cfg = parse_config(
            {
                "application": "best-arm",
                "theta_star": [0.8, 0.2],
                "delta": 0.1,
                "trials": 1,
                "master_seed": 3,
                "arms": [
                    {"kind": "point-mass", "v": 0.8},
                    {"kind": "point-mass", "v": 0.2},
                ],
            }
        )
        result = run_experiment(cfg)
        assert result.summary["modes"]["coci"]["error_rate"] == 0.0
        assert result.summary["modes"]["coci"]["xi_frequency"] == 1.0

    def test_both_mode_shares_trial_seed(self):
        result = run_experiment(quick_config(trials=4, hardness_epsilon=None))
        by_trial = {}
        for record in result.records:
            by_trial.setdefault(record.trial, set()).add(record.seed)
        assert all(len(seeds) == 1 for seeds in by_trial.values())
        assert "paired_round_ratio" in result.summary

    def test_parallel_matches_serial(self):
        cfg = quick_config(trials=6, hardness_epsilon=None)
        serial = run_experiment(cfg, workers=1)
        parallel = run_experiment(cfg, workers=2)
        strip = lambda r: (r.trial, r.seed, r.mode, r.rounds, r.correct, r.xi_held, r.pulls)  # noqa: E731
        assert [strip(r) for r in serial.records] == [strip(r) for r in parallel.records]

    def test_hardness_attached_and_bound_checked(self):
        result = run_experiment(quick_config(trials=3))
        assert result.hardness is not None
        assert result.summary["hardness"]["h_lambda"] == pytest.approx(32.0)
        for record in result.records:
            assert record.bound_value is not None
            assert record.bound_satisfied is (record.rounds <= record.bound_value)

    def test_quick_fixture_regression(self):
        # Frozen summary of the shipped quick config (seeded, deterministic).
        result = run_experiment(quick_config())
        modes = result.summary["modes"]
        assert modes["coci"]["mean_rounds"] == 314.375
        assert modes["uniform"]["mean_rounds"] == 314.375
        assert modes["coci"]["mean_pulls_per_arm"] == [157.375, 157.0]
        assert modes["coci"]["error_rate"] == 0.0


class TestEmit:
    def test_csv_schema(self, tmp_path):
        result = run_experiment(quick_config(trials=1, mode="coci"))
        paths = emit_results(result.records, result.summary, tmp_path, "csv")
        with open(paths[0], newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == [
            "trial",
            "seed",
            "mode",
            "rounds",
            "correct",
            "xi_held",
            "bound_value",
            "bound_satisfied",
            "pulls_0",
            "pulls_1",
            "wall_ms",
        ]
        assert len(rows) == 2
        assert len(rows[1]) == 11

    def test_csv_roundtrip(self, tmp_path):
        result = run_experiment(quick_config(trials=3))
        paths = emit_results(result.records, result.summary, tmp_path, "csv")
        parsed = parse_records_csv(paths[0])
        assert len(parsed) == len(result.records)
        for a, b in zip(parsed, result.records):
            assert a == b or (
                a.wall_ms == b.wall_ms
                and a.bound_value == pytest.approx(b.bound_value)
            )
            assert (a.trial, a.seed, a.mode, a.rounds, a.correct, a.xi_held, a.pulls) == (
                b.trial,
                b.seed,
                b.mode,
                b.rounds,
                b.correct,
                b.xi_held,
                b.pulls,
            )

    def test_jsonl_line_count(self, tmp_path):
        cfg = quick_config(trials=5, mode="coci")
        result = run_experiment(cfg)
        paths = emit_results(result.records, result.summary, tmp_path, "json-lines")
        lines = paths[0].read_text().splitlines()
        assert len(lines) == 5
        first = json.loads(lines[0])
        assert set(first) == {
            "trial",
            "seed",
            "mode",
            "rounds",
            "correct",
            "xi_held",
            "bound_value",
            "bound_satisfied",
            "pulls_0",
            "pulls_1",
            "wall_ms",
        }

    def test_summary_file_is_wall_clock_free(self, tmp_path):
        result = run_experiment(quick_config(trials=2))
        paths = emit_results(result.records, result.summary, tmp_path, "csv")
        text = paths[1].read_text()
        assert "wall" not in text


class TestCli:
    def test_validate_ok(self, capsys):
        assert cli_main(["validate", str(CONFIG_DIR / "osa.json")]) == 0
        assert "ok" in capsys.readouterr().out

    def test_validate_missing_file(self, capsys):
        assert cli_main(["validate", "/nonexistent/config.json"]) == 1
        assert "config error" in capsys.readouterr().err

    def test_oracle_query(self, capsys):
        code = cli_main(["oracle", str(CONFIG_DIR / "top2.json"), "--theta", "0.9,0.7,0.3,0.1"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["decision"] == [1.0, 1.0, 0.0, 0.0]
        assert payload["reward"] == pytest.approx(1.6)

    def test_hardness_command(self, capsys):
        assert cli_main(["hardness", str(CONFIG_DIR / "quick.json")]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["lambda_lower"] == [0.25, 0.25]

    def test_run_with_overrides(self, tmp_path, capsys):
        code = cli_main(
            [
                "run",
                str(CONFIG_DIR / "quick.json"),
                "--trials",
                "2",
                "--mode",
                "coci",
                "--out",
                str(tmp_path),
                "--format",
                "json-lines",
            ]
        )
        assert code == 0
        assert (tmp_path / "records.jsonl").exists()
        assert (tmp_path / "summary.json").exists()
        assert len((tmp_path / "records.jsonl").read_text().splitlines()) == 2

    def test_runtime_error_exit_code(self, tmp_path, capsys):
        # Flip-radius search over five arms at the default lattice exceeds
        # the capacity limit: a runtime (not config) failure, exit code 2.
        config = {
            "application": "best-arm",
            "theta_star": [0.9, 0.7, 0.5, 0.3, 0.1],
            "delta": 0.1,
            "trials": 1,
        }
        path = tmp_path / "wide.json"
        path.write_text(json.dumps(config))
        assert cli_main(["hardness", str(path)]) == 2
        assert "error" in capsys.readouterr().err
