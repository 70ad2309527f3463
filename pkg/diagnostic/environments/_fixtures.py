"""Small synthetic datasets shared by the scenario modules."""
from __future__ import annotations

import os
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from core.config import DATA_DIR_ENV
from core.dataset import TabularDataset

BLOOD_FEATURES = ("Age", "BMI", "Glucose", "Insulin", "HOMA", "Leptin", "Adiponectin", "Resistin", "MCP.1")


def two_blobs(n_per_class: int = 30, d: int = 4, gap: float = 3.0, seed: int = 0) -> TabularDataset:
    """Two Gaussian classes whose means differ by ``gap`` on every axis."""
    rng = np.random.default_rng(seed)
    neg = rng.normal(0.0, 1.0, size=(n_per_class, d))
    pos = rng.normal(gap, 1.0, size=(n_per_class, d))
    rows = np.vstack([neg, pos])
    labels = np.repeat([0, 1], n_per_class)
    return TabularDataset(tuple(f"f{i}" for i in range(d)), rows, labels, ("neg", "pos"))


def blood_like(n_per_class: int = 20, seed: int = 0) -> TabularDataset:
    """Nine columns named like the blood biomarkers, classes 1/2 as in the export."""
    rng = np.random.default_rng(seed)
    healthy = rng.normal(50.0, 10.0, size=(n_per_class, 9))
    sick = rng.normal(58.0, 10.0, size=(n_per_class, 9))
    rows = np.round(np.vstack([healthy, sick]), 3)
    labels = np.repeat([0, 1], n_per_class)
    return TabularDataset(BLOOD_FEATURES, rows, labels, ("1", "2"))


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def public_csv(name: str) -> Optional[Path]:
    """``$THERMOSCAN_DATA_DIR/<name>`` when it exists."""
    root = os.getenv(DATA_DIR_ENV)
    if not root:
        return None
    path = Path(root).expanduser() / name
    return path if path.is_file() else None


def brute_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return wins / (len(pos) * len(neg))
