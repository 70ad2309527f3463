# -*- coding: utf-8 -*-
"""
core.cli.commands

One function per command. Each reads its inputs through the run config,
writes into ``<out>/<run_id>/`` and returns an exit code: 0 on success,
1 when any cell, model or trial failed, 2 on a configuration error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from core.bioheat import SyntheticParams, generate_synthetic_set, write_synthetic_records
from core.cli.run_config import RunConfig, write_config_echo
from core.dataset import (
    EIT_LABELS,
    TabularDataset,
    class_counts,
    load_csv,
    relabel_eit,
    save_csv,
    set_positive_label,
    train_test_split,
)
from core.doe import (
    DatasetKind,
    DoeResult,
    ExperimentPlan,
    read_phase2_csv,
    read_results_csv,
    render_report,
    run_doe,
    run_hpo_phase,
    summarize,
    tabular_grid,
    write_failures_csv,
    write_results_csv,
    write_summary_csv,
)
from core.eda import (
    pair_grid,
    pca_2d,
    pearson_matrix,
    reconstruction_error,
    write_correlation_csv,
    write_pair_grid_csv,
    write_projection_csv,
)
from core.engineering import (
    LeakageMode,
    PatientRecord,
    apply_recipe,
    apply_thermal_toggles,
    load_thermal_directory,
    patient_split,
    records_to_arrays,
    write_tensor_cache,
)
from core.evaluation import threshold_sweep, write_curve_csv
from core.exceptions import ConfigError, ThermoscanError
from core.hpo import SPACES, TrialHistory, TrialStatus
from core.learners import load_model
from core.learners.base import dataset_arrays
from core.logger import logger
from decorators import profile, profiler

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_CONFIG = 2

Data = Union[TabularDataset, List[PatientRecord]]


@dataclass(frozen=True)
class CommandOptions:
    """Flags that steer a command without being part of the config echo."""

    jobs: int = 0
    resume: bool = False
    both_modes: bool = False
    model: Optional[str] = None
    test_csv: Optional[str] = None


# ── data loading ────────────────────────────────────────────────────


def prepare_tabular(ds: TabularDataset, config: RunConfig) -> TabularDataset:
    """Collapse raw EIT tissue labels, then put the positive class at index 1."""
    if config.dataset is DatasetKind.EIT and set(n.strip().lower() for n in ds.label_names) <= set(EIT_LABELS):
        ds = relabel_eit(ds, config.eit_label_mode, config.drop_con_adi)
    if config.positive_label is not None and config.positive_label in ds.label_names:
        ds = set_positive_label(ds, config.positive_label)
    return ds


def load_data(config: RunConfig) -> Data:
    if config.dataset is DatasetKind.THERMAL:
        return load_thermal_directory(config.thermal_dir)
    if config.dataset is DatasetKind.SYNTHETIC:
        if config.thermal_dir and Path(config.thermal_dir).is_dir():
            return load_thermal_directory(config.thermal_dir)
        return _simulate_records(config)
    return prepare_tabular(load_csv(config.csv, config.label_column), config)


def _tabular(config: RunConfig, command: str) -> TabularDataset:
    if config.dataset.is_image:
        raise ConfigError(f"'{command}' needs a tabular dataset, got {config.dataset.value}", path="dataset")
    return load_data(config)


def _require_binary(data: Data) -> None:
    if isinstance(data, TabularDataset) and len(data.label_names) != 2:
        raise ConfigError(
            f"binary labels required, got {list(data.label_names)}; set eit_label_mode to 'two'",
            path="eit_label_mode",
        )


def _simulate_records(config: RunConfig) -> List[PatientRecord]:
    sim = config.simulate
    params = SyntheticParams(
        resolution=sim.resolution,
        width=sim.width,
        out_size=sim.size,
        images_per_patient=sim.images_per_patient,
        noise_std=sim.noise_std,
    )
    return generate_synthetic_set(sim.healthy, sim.tumor, params=params, seed=config.seeds[0])


def _write_json(path: Path, payload: Dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    return path


# ── commands ────────────────────────────────────────────────────────


@profile("ingest")
def cmd_ingest(config: RunConfig, options: CommandOptions) -> int:
    data = load_data(config)
    run_dir = config.run_dir
    if isinstance(data, TabularDataset):
        counts = class_counts(data)
        save_csv(data, run_dir / "dataset.csv", config.label_column)
        summary = {"n": data.n, "d": data.d, "features": list(data.feature_names), "class_counts": counts}
    else:
        counts = {"healthy": sum(r.label == 0 for r in data), "sick": sum(r.label == 1 for r in data)}
        summary = {
            "patients": len(data),
            "images": sum(len(r.thermograms) for r in data),
            "class_counts": counts,
        }
    _write_json(run_dir / "ingest.json", summary)
    logger.info(f"[CLI] ingested {config.name}: {summary['class_counts']}")
    return EXIT_OK


@profile("simulate")
def cmd_simulate(config: RunConfig, options: CommandOptions) -> int:
    root = Path(config.thermal_dir) if config.thermal_dir else config.run_dir / "synthetic"
    written = write_synthetic_records(_simulate_records(config), root)
    logger.info(f"[CLI] {len(written)} synthetic patients under {root}")
    return EXIT_OK


@profile("engineer")
def cmd_engineer(config: RunConfig, options: CommandOptions) -> int:
    """Export every configured cell of the first seed's split."""
    data = load_data(config)
    seed = config.seeds[0]
    out = config.run_dir / "engineered"
    failed = 0
    if isinstance(data, TabularDataset):
        train, test = train_test_split(data, config.test_fraction, seed, stratified=config.stratified)
    else:
        train, test = patient_split(data, config.test_fraction, seed)

    for cell in config.grid():
        try:
            if isinstance(data, TabularDataset):
                tr, te = apply_recipe(train, test, cell, seed)
                save_csv(tr, out / cell.label / "train.csv", config.label_column)
                save_csv(te, out / cell.label / "test.csv", config.label_column)
            else:
                t = config.thermal
                tr, te = apply_thermal_toggles(
                    train, test, cell, t.size, seed, t.ops, t.degree, t.normalize_mode, t.bounds
                )
                for part, records in (("train", tr), ("test", te)):
                    images, labels, patients = records_to_arrays(records)
                    write_tensor_cache(out / cell.label / f"{part}.bin", images)
                    _write_json(
                        out / cell.label / f"{part}_labels.json",
                        {"labels": labels.tolist(), "patients": list(patients)},
                    )
        except ThermoscanError:
            logger.exception(f"[CLI] engineering cell {cell.label} failed")
            failed += 1
    return EXIT_FAILURES if failed else EXIT_OK


@profile("eda")
def cmd_eda(config: RunConfig, options: CommandOptions) -> int:
    ds = _tabular(config, "eda")
    out = config.run_dir / "eda"
    correlation = pearson_matrix(ds, include_label=True, label_name=config.label_column)
    write_correlation_csv(correlation, out / "correlation.csv")
    projection = pca_2d(ds)
    write_projection_csv(projection, ds, out / "pca.csv")
    write_pair_grid_csv(pair_grid(ds), out / "pair_grid.csv")
    errors = {k: reconstruction_error(ds, k) for k in range(1, min(ds.d, 2) + 1)}
    _write_json(
        out / "eda.json",
        {
            "explained_variance": list(projection.explained),
            "rank_deficient": projection.rank_deficient,
            "reconstruction_error": {str(k): v for k, v in errors.items()},
            "label_correlation": {
                name: (None if np.isnan(correlation.get(name, config.label_column)) else correlation.get(name, config.label_column))
                for name in ds.feature_names
            },
        },
    )
    return EXIT_OK


@profile("doe")
def cmd_doe(config: RunConfig, options: CommandOptions) -> int:
    data = load_data(config)
    _require_binary(data)
    both = options.both_modes and not config.dataset.is_image
    modes = (LeakageMode.PAPER_FAITHFUL, LeakageMode.LEAK_FREE) if both else (config.leakage_mode,)
    result = DoeResult()
    for mode in modes:
        plan = ExperimentPlan(
            dataset_id=config.name,
            kind=config.dataset,
            grid=tuple(config.grid(mode)),
            roster=config.roster,
            seeds=config.seeds,
            test_fraction=config.test_fraction,
            stratified=config.stratified,
            thermal=config.thermal,
        )
        result.extend(
            run_doe(
                plan,
                data,
                config.run_dir,
                jobs=options.jobs,
                write_tables=False,
                curves_subdir=mode.value if both else None,
            )
        )
    write_results_csv(result.rows, config.run_dir / "phase1.csv")
    if result.failures:
        write_failures_csv(result.failures, config.run_dir / "failures.csv")
        logger.warning(f"[CLI] {len(result.failures)} failed (cell, model) pair(s); see failures.csv")
        return EXIT_FAILURES
    return EXIT_OK


def _failed_trials(run_dir: Path, families: Sequence[str], seed: int) -> int:
    count = 0
    for family in families:
        history = TrialHistory.load(run_dir / f"{family}_trials.jsonl", SPACES[family], seed)
        count += sum(t.status is TrialStatus.FAILED for t in history.trials)
    return count


@profile("optimize")
def cmd_optimize(config: RunConfig, options: CommandOptions) -> int:
    ds = _tabular(config, "optimize")
    _require_binary(ds)
    hpo = config.hpo
    recipe = next(c for c in tabular_grid(config.leakage_mode, config.augment_degree) if c.label == hpo.cell)
    seed = config.seeds[0]
    run_hpo_phase(
        ds,
        recipe,
        families=hpo.families,
        n_iters=hpo.iters,
        seed=seed,
        test_fraction=config.test_fraction,
        algo=hpo.algo,
        folds=hpo.folds,
        metric=hpo.metric,
        out_dir=config.run_dir,
        resume=options.resume,
        label_column=config.label_column,
    )
    failed = _failed_trials(config.run_dir, hpo.families, seed)
    if failed:
        logger.warning(f"[CLI] {failed} failed trial(s)")
        return EXIT_FAILURES
    return EXIT_OK


@profile("evaluate")
def cmd_evaluate(config: RunConfig, options: CommandOptions) -> int:
    if not options.model:
        raise ConfigError("evaluate needs a saved model", path="--model")
    test_csv = options.test_csv or config.csv
    if not test_csv:
        raise ConfigError("evaluate needs a test CSV", path="--test-csv")
    ds = prepare_tabular(load_csv(test_csv, config.label_column), config)
    model = load_model(options.model)
    X, y = dataset_arrays(ds)
    sweep = threshold_sweep(model.predict_scores(X), y)
    out = config.run_dir / "evaluate"
    write_curve_csv(sweep, out / f"{Path(options.model).stem}_curve.csv")
    _write_json(
        out / f"{Path(options.model).stem}.json",
        {
            "model": str(options.model),
            "family": model.family,
            "test_csv": str(test_csv),
            "n": ds.n,
            "threshold": sweep.best_threshold,
            "metrics": sweep.best.to_dict(),
        },
    )
    logger.info(f"[CLI] {model.family} at threshold {sweep.best_threshold:.2f}: {sweep.best.to_dict()}")
    return EXIT_OK


@profile("report")
def cmd_report(config: RunConfig, options: CommandOptions) -> int:
    run_dir = config.run_dir
    summary = summarize(read_results_csv(run_dir / "phase1.csv"))
    write_summary_csv(summary, run_dir / "summary.csv")
    phase2_path = run_dir / "phase2.csv"
    phase2 = read_phase2_csv(phase2_path) if phase2_path.exists() else []
    (run_dir / "report.md").write_text(render_report(summary, phase2), encoding="utf-8")
    logger.info(f"[CLI] report written to {run_dir / 'report.md'}")
    return EXIT_OK


COMMANDS: Dict[str, Callable[[RunConfig, CommandOptions], int]] = {
    "ingest": cmd_ingest,
    "simulate": cmd_simulate,
    "engineer": cmd_engineer,
    "eda": cmd_eda,
    "doe": cmd_doe,
    "optimize": cmd_optimize,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def execute(command: str, config: RunConfig, options: Optional[CommandOptions] = None) -> int:
    """Run one command against a validated config and map the outcome to an exit code."""
    options = options or CommandOptions()
    if command not in COMMANDS:
        logger.error(f"[CLI] unknown command '{command}'; choose from {sorted(COMMANDS)}")
        return EXIT_CONFIG
    run_dir = config.run_dir
    write_config_echo(config, run_dir)
    profiler.set_output_dir(run_dir)
    try:
        return COMMANDS[command](config, options)
    except (ConfigError, FileNotFoundError) as exc:
        logger.error(f"[CLI] {command}: {exc}")
        return EXIT_CONFIG
    except ThermoscanError:
        logger.exception(f"[CLI] {command} failed")
        return EXIT_FAILURES
