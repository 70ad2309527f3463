# -*- coding: utf-8 -*-
"""
Root config for the toolkit. Run configs (core.cli.run_config) override
these per experiment; everything here is a library default.
"""

import os
from pathlib import Path
from typing import Optional


def get_project_root() -> Path:
    """Get the project root directory"""
    return Path(__file__).resolve().parent.parent


PROJECT_ROOT = get_project_root()
RESULTS_ROOT = PROJECT_ROOT / "results"
LOGS_ROOT = PROJECT_ROOT / "logs"

# Optional dataset-root override; the only environment variable read.
DATA_DIR_ENV = "THERMOSCAN_DATA_DIR"

# ── splitting / DOE ──
DEFAULT_SEED: int = 42
DEFAULT_TEST_FRACTION: float = 0.3
DEFAULT_VALIDATION_FRACTION: float = 0.2
DEFAULT_FOLDS: int = 3
DEFAULT_AUGMENT_DEGREE: int = 4
POLYNOMIAL_DEGREE: int = 2
MAX_POLYNOMIAL_FEATURES: int = 100_000
AUGMENT_MAX_RETRIES: int = 100

# ── threshold sweep ──
SWEEP_LO: float = 0.0
SWEEP_HI: float = 1.0
SWEEP_STEP: float = 0.01
SWEEP_SELECT_IN: tuple = (0.2, 0.8)
CSV_FLOAT_FORMAT: str = "{:.6f}"

# ── thermal ──
DEFAULT_RESIZE: tuple = (250, 300)
SYNTHETIC_RESIZE: tuple = (32, 32)

# ── TPE ──
TPE_GAMMA: float = 0.25
TPE_N_CANDIDATES: int = 24
TPE_N_STARTUP: int = 20
DEFAULT_HPO_ITERS: int = 200

# ── bioheat ──
CORE_TEMPERATURE: float = 37.0
AMBIENT_TEMPERATURE: float = 21.0
# Not taken from the layer table; literature-typical still-air value.
SURFACE_HTC: float = 13.5
BLOOD_DENSITY: float = 1060.0
BLOOD_SPECIFIC_HEAT: float = 3770.0


def data_dir() -> Optional[Path]:
    """Dataset root from THERMOSCAN_DATA_DIR, or None when unset."""
    raw = os.getenv(DATA_DIR_ENV)
    return Path(raw).expanduser() if raw else None
