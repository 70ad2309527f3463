"""Scenarios for run configs, command dispatch and exit codes."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, List, Mapping, Tuple

import yaml

from core.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    CommandOptions,
    apply_overrides,
    config_from_mapping,
    execute,
    parse_config,
    write_config_echo,
)
from core.dataset import load_csv, save_csv
from core.doe import TABULAR_ROSTER
from core.exceptions import ConfigError
from core.learners import get_learner, save_model
from core.learners.base import dataset_arrays
from core.main import main
from diagnostic.environments._fixtures import blood_like
from diagnostic.framework import ExecutionResult, PreparedEnv, ScenarioCase, verdict

GROUP = "cli"


def _checks(result: ExecutionResult, inputs, context) -> Tuple[str, str]:
    return result.output


def _blood_env(tmp_path: Path) -> PreparedEnv:
    csv = save_csv(blood_like(8, seed=4), tmp_path / "data" / "blood.csv", "Classification")
    return PreparedEnv(inputs={"csv": csv, "out": tmp_path / "results"})


def _blood_config(inputs: Mapping[str, Any], **extra: Any):
    data: Dict[str, Any] = {"dataset": "blood", "csv": str(inputs["csv"]), "out": str(inputs["out"])}
    data.update(extra)
    return config_from_mapping(data)


def _config_path(result: ExecutionResult, inputs, context) -> Tuple[str, str]:
    exc = result.exception
    wanted = context
    return verdict(
        [(getattr(exc, "path", None) == wanted, f"error path {getattr(exc, 'path', None)!r}, wanted {wanted!r}")],
        f"ConfigError points at {wanted}.",
    )


def _defaults(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    config = config_from_mapping({"dataset": "blood", "csv": str(inputs["csv"])})
    return verdict(
        [
            (config.label_column == "Classification" and config.positive_label == "2", "blood label defaults"),
            (config.seeds == (42,) and config.test_fraction == 0.3, f"seeds {config.seeds}"),
            (config.run_id == "blood" and config.name == "blood", f"run id {config.run_id}"),
            (tuple(e.name for e in config.roster) == TABULAR_ROSTER, "default roster"),
            (config.hpo.cell == "augmented+expanded" and config.hpo.iters == 200, f"hpo {config.hpo}"),
            (len(config.grid()) == 16, "default grid is the full factorial"),
            (Path(config.csv).is_absolute(), "csv path not resolved"),
        ],
        "A minimal config fills every default.",
    )


def _unknown_key(inputs: Mapping[str, Any]) -> None:
    config_from_mapping({"dataset": "blood", "csv": str(inputs["csv"]), "augmet": True})


def _unknown_nested_key(inputs: Mapping[str, Any]) -> None:
    config_from_mapping({"dataset": "blood", "csv": str(inputs["csv"]), "hpo": {"itres": 5}})


def _unknown_learner(inputs: Mapping[str, Any]) -> None:
    config_from_mapping({"dataset": "blood", "csv": str(inputs["csv"]), "roster": ["knn", "xgboost"]})


def _bad_fraction(inputs: Mapping[str, Any]) -> None:
    config_from_mapping({"dataset": "blood", "csv": str(inputs["csv"]), "test_fraction": 1.5})


def _missing_csv(inputs: Mapping[str, Any]) -> None:
    config_from_mapping({"dataset": "eit", "csv": "/nonexistent/eit.csv"})


def _unknown_cell(inputs: Mapping[str, Any]) -> None:
    config_from_mapping({"dataset": "blood", "csv": str(inputs["csv"]), "cells": ["original", "rotated"]})


def _echo_round_trip(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    config = _blood_config(
        inputs,
        seeds=[1, 2],
        cells=["original", "scaled"],
        roster=[{"name": "knn", "params": {"k": 3}}, "tree"],
        hpo={"algo": "random", "folds": "holdout", "metric": "roc_auc"},
    )
    echo = write_config_echo(config, inputs["tmp_path"] / "echo")
    reparsed = parse_config(echo)
    overridden = apply_overrides(config, seed=7, iters=3)
    return verdict(
        [
            (reparsed == config, "echo does not parse back to the same config"),
            (json.loads(echo.read_text(encoding="utf-8"))["roster"][0] == {"name": "knn", "params": {"k": 3}}, "roster echo"),
            (overridden.seeds == (7,) and overridden.hpo.iters == 3, f"overrides {overridden.seeds} {overridden.hpo.iters}"),
            (overridden.roster == config.roster, "override lost the roster"),
        ],
        "The config echo is a fixed point of parsing.",
    )


def _yaml_and_json(inputs: Mapping[str, Any]) -> bool:
    payload = {"dataset": "blood", "csv": str(inputs["csv"]), "seeds": [3]}
    yaml_path = inputs["tmp_path"] / "run.yaml"
    json_path = inputs["tmp_path"] / "run.json"
    yaml_path.write_text(yaml.safe_dump(payload), encoding="utf-8")
    json_path.write_text(json.dumps(payload), encoding="utf-8")
    return parse_config(yaml_path) == parse_config(json_path)


def _simulate_command(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    config_file = inputs["tmp_path"] / "simulate.yaml"
    config_file.write_text(
        yaml.safe_dump(
            {
                "dataset": "synthetic",
                "simulate": {"resolution": 0.002, "width": 0.04, "size": [16, 20], "images_per_patient": 1},
            }
        ),
        encoding="utf-8",
    )
    out = inputs["tmp_path"] / "results"
    code = main(["simulate", "--config", str(config_file), "--healthy", "5", "--tumor", "5", "--out", str(out)])
    root = out / "synthetic" / "synthetic"
    patients = [p for p in root.glob("*/*") if p.is_dir()]
    return verdict(
        [
            (code == EXIT_OK, f"exit code {code}"),
            (len(patients) == 10, f"{len(patients)} patient directories"),
            (len(list((root / "sick").iterdir())) == 5, "tumor patients"),
            ((out / "synthetic" / "run_config.json").is_file(), "config echo missing"),
        ],
        "simulate writes one directory per synthetic patient.",
    )


def _zero_iters(inputs: Mapping[str, Any]) -> int:
    config_file = inputs["tmp_path"] / "blood.yaml"
    config_file.write_text(yaml.safe_dump({"dataset": "blood", "csv": str(inputs["csv"])}), encoding="utf-8")
    return main(["optimize", "--config", str(config_file), "--iters", "0", "--out", str(inputs["out"])])


def _no_config(inputs: Mapping[str, Any]) -> int:
    return main(["doe"])


def _pipeline(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    config = _blood_config(inputs, cells=["original", "scaled"], roster=["knn", {"name": "tree", "params": {"max_depth": 3}}])
    run_dir = config.run_dir
    codes = {name: execute(name, config) for name in ("ingest", "engineer", "eda", "doe", "report")}
    phase1 = (run_dir / "phase1.csv").read_text(encoding="utf-8").splitlines()
    report = (run_dir / "report.md").read_text(encoding="utf-8")
    ingest = json.loads((run_dir / "ingest.json").read_text(encoding="utf-8"))
    return verdict(
        [
            (all(code == EXIT_OK for code in codes.values()), f"exit codes {codes}"),
            (len(phase1) == 5, f"phase1.csv has {len(phase1) - 1} rows"),
            ("## blood (paper_faithful)" in report, "report table missing"),
            ((run_dir / "summary.csv").is_file(), "summary.csv missing"),
            ((run_dir / "engineered" / "scaled" / "train.csv").is_file(), "engineered cell missing"),
            ((run_dir / "eda" / "correlation.csv").is_file(), "eda outputs missing"),
            (ingest["class_counts"] == {"1": 8, "2": 8}, f"class counts {ingest['class_counts']}"),
        ],
        "ingest, engineer, eda, doe and report run end to end.",
    )


def _both_modes(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    config = _blood_config(inputs, cells=["augmented"], roster=["knn"], run_id="modes")
    code = execute("doe", config, CommandOptions(jobs=1, both_modes=True))
    rows = (config.run_dir / "phase1.csv").read_text(encoding="utf-8").splitlines()[1:]
    modes = sorted(row.split(",")[1] for row in rows)
    return verdict(
        [
            (code == EXIT_OK, f"exit code {code}"),
            (modes == ["leak_free", "paper_faithful"], f"leakage modes {modes}"),
            ((config.run_dir / "curves" / "leak_free").is_dir(), "per-mode curve directory missing"),
        ],
        "Both leakage modes land in one phase1.csv.",
    )


def _optimize_and_evaluate(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    config = _blood_config(inputs, run_id="tuned", hpo={"iters": 2, "families": ["gbt_x"], "cell": "original"})
    code = execute("optimize", config, CommandOptions())
    model_path = config.run_dir / "models" / "gbt_x_phase2.json"
    test_csv = config.run_dir / "test.csv"
    evaluated = execute("evaluate", config, CommandOptions(model=str(model_path), test_csv=str(test_csv)))
    summary = json.loads((config.run_dir / "evaluate" / "gbt_x_phase2.json").read_text(encoding="utf-8"))
    return verdict(
        [
            (code == EXIT_OK, f"optimize exit code {code}"),
            ((config.run_dir / "phase2.csv").is_file(), "phase2.csv missing"),
            (evaluated == EXIT_OK, f"evaluate exit code {evaluated}"),
            (summary["family"] == "gbt" and 0.0 <= summary["threshold"] <= 1.0, f"evaluation {summary}"),
        ],
        "A tuned model is saved and scores on its test partition.",
    )


def _evaluate_saved_knn(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    config = _blood_config(inputs, run_id="scored")
    ds = load_csv(inputs["csv"], "Classification")
    X, y = dataset_arrays(ds)
    model_path = save_model(get_learner("knn").train(X, y, k=3), inputs["tmp_path"] / "knn.json")
    code = execute("evaluate", config, CommandOptions(model=str(model_path)))
    curve = config.run_dir / "evaluate" / "knn_curve.csv"
    return verdict(
        [
            (code == EXIT_OK, f"exit code {code}"),
            (curve.is_file() and len(curve.read_text(encoding="utf-8").splitlines()) == 102, "curve csv"),
        ],
        "evaluate scores a saved model against the configured CSV.",
    )


def _evaluate_without_model(inputs: Mapping[str, Any]) -> int:
    return execute("evaluate", _blood_config(inputs, run_id="nomodel"), CommandOptions())


def _image_eda(inputs: Mapping[str, Any]) -> int:
    config = config_from_mapping({"dataset": "synthetic", "out": str(inputs["out"])})
    return execute("eda", config)


def _unknown_command(inputs: Mapping[str, Any]) -> int:
    return execute("train", _blood_config(inputs, run_id="unknown"))


def _exit_code(expected: int):
    def check(result: ExecutionResult, inputs, context) -> Tuple[str, str]:
        return verdict([(result.output == expected, f"exit code {result.output}, wanted {expected}")], f"Exit code {expected}.")

    return check


def get_test_cases() -> List[ScenarioCase]:
    def config_error(name: str, run, path: str) -> ScenarioCase:
        return ScenarioCase(
            name, GROUP, run, prepare=_blood_env, expect_error=ConfigError,
            validator=lambda r, i, c: _config_path(r, i, path),
        )

    return [
        ScenarioCase("minimal config defaults", GROUP, _defaults, prepare=_blood_env, validator=_checks),
        config_error("config unknown key", _unknown_key, "augmet"),
        config_error("config unknown nested key", _unknown_nested_key, "hpo.itres"),
        config_error("config unknown learner", _unknown_learner, "roster[1].name"),
        config_error("config test fraction range", _bad_fraction, "test_fraction"),
        config_error("config missing csv file", _missing_csv, "csv"),
        config_error("config unknown cell", _unknown_cell, "cells[1]"),
        ScenarioCase("config echo round trip", GROUP, _echo_round_trip, prepare=_blood_env, validator=_checks),
        ScenarioCase("yaml and json configs agree", GROUP, _yaml_and_json, prepare=_blood_env),
        ScenarioCase("simulate command", GROUP, _simulate_command, validator=_checks),
        ScenarioCase("optimize with zero iterations", GROUP, _zero_iters, prepare=_blood_env, validator=_exit_code(EXIT_CONFIG)),
        ScenarioCase("command without config", GROUP, _no_config, validator=_exit_code(EXIT_CONFIG)),
        ScenarioCase("tabular pipeline", GROUP, _pipeline, prepare=_blood_env, validator=_checks),
        ScenarioCase("doe in both leakage modes", GROUP, _both_modes, prepare=_blood_env, validator=_checks),
        ScenarioCase("optimize then evaluate", GROUP, _optimize_and_evaluate, prepare=_blood_env, validator=_checks),
        ScenarioCase("evaluate a saved model", GROUP, _evaluate_saved_knn, prepare=_blood_env, validator=_checks),
        ScenarioCase("evaluate needs a model", GROUP, _evaluate_without_model, prepare=_blood_env,
                     validator=_exit_code(EXIT_CONFIG)),
        ScenarioCase("eda rejects image datasets", GROUP, _image_eda, prepare=_blood_env, validator=_exit_code(EXIT_CONFIG)),
        ScenarioCase("unknown command", GROUP, _unknown_command, prepare=_blood_env, validator=_exit_code(EXIT_CONFIG)),
    ]
