# -*- coding: utf-8 -*-
"""
core.bioheat.synthetic

Labelled pseudo-thermograms generated from steady bioheat solves, written
in the same directory layout the thermal loader reads.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np
from scipy import ndimage

from core.bioheat.solver import solve_steady, surface_profile
from core.bioheat.tissue import (
    BREAST_LAYERS,
    BloodParams,
    BoundaryConditions,
    TissueLayer,
    TumorSpec,
    build_grid,
)
from core.config import SYNTHETIC_RESIZE
from core.engineering.thermal import PatientRecord, Thermogram, ThermogramSource
from core.logger import logger
from decorators import log_events


@dataclass(frozen=True)
class SyntheticRanges:
    """Uniform sampling ranges; lateral position is a fraction of the width."""

    tumor_depth: Tuple[float, float] = (0.008, 0.015)
    tumor_diameter: Tuple[float, float] = (0.008, 0.012)
    tumor_lateral: Tuple[float, float] = (0.3, 0.7)
    ambient: Tuple[float, float] = (18.0, 25.0)

    def __post_init__(self) -> None:
        for name, (lo, hi) in asdict(self).items():
            if lo > hi:
                raise ValueError(f"range '{name}' has lo > hi: ({lo}, {hi})")


@dataclass(frozen=True)
class SyntheticParams:
    resolution: float = 1.0e-3
    width: float = 0.06
    out_size: Tuple[int, int] = SYNTHETIC_RESIZE
    images_per_patient: int = 4
    blur_sigma: float = 1.0
    noise_std: float = 0.02
    htc: float = BoundaryConditions().htc
    tol: float = 1.0e-6
    max_iters: int = 200_000

    def __post_init__(self) -> None:
        if self.images_per_patient < 1:
            raise ValueError("images_per_patient must be >= 1")
        if self.noise_std < 0 or self.blur_sigma < 0:
            raise ValueError("noise_std and blur_sigma must be >= 0")


def _uniform(rng: np.random.Generator, bounds: Tuple[float, float]) -> float:
    lo, hi = bounds
    return float(lo) if lo == hi else float(rng.uniform(lo, hi))


def _pseudo_thermogram(profile: np.ndarray, out_size: Tuple[int, int], sigma: float) -> np.ndarray:
    h, w = out_size
    src = np.linspace(0.0, 1.0, profile.size) if profile.size > 1 else np.array([0.0])
    row = np.interp(np.linspace(0.0, 1.0, w), src, profile)
    image = np.repeat(row[None, :], h, axis=0)
    return ndimage.gaussian_filter(image, sigma=sigma, mode="nearest") if sigma > 0 else image


@log_events("generate_synthetic_set")
def generate_synthetic_set(
    n_healthy: int,
    n_tumor: int,
    ranges: SyntheticRanges = SyntheticRanges(),
    params: SyntheticParams = SyntheticParams(),
    seed: int = 0,
    layers: Sequence[TissueLayer] = BREAST_LAYERS,
    blood: BloodParams = BloodParams(),
) -> List[PatientRecord]:
    """Healthy patients first, then tumor patients; one solve per patient.

    Patient ``p`` draws everything from a generator seeded with
    ``(seed, p)``, so any subset of the set can be regenerated alone.
    """
    if n_healthy < 1 or n_tumor < 1:
        raise ValueError(f"need at least one patient per class, got healthy={n_healthy}, tumor={n_tumor}")

    records: List[PatientRecord] = []
    for p in range(n_healthy + n_tumor):
        rng = np.random.default_rng([seed, p])
        has_tumor = p >= n_healthy
        ambient = _uniform(rng, ranges.ambient)
        bc = BoundaryConditions(htc=params.htc, ambient=ambient)

        tumor = None
        meta = {"seed": seed, "index": p, "ambient": ambient, "htc": params.htc, "resolution": params.resolution,
                "width": params.width}
        if has_tumor:
            diameter = _uniform(rng, ranges.tumor_diameter)
            depth = _uniform(rng, ranges.tumor_depth)
            lateral = _uniform(rng, ranges.tumor_lateral) * params.width
            tumor = TumorSpec(center_depth=depth, center_lateral=lateral, diameter=diameter)
            meta["tumor"] = {"diameter": diameter, "center_depth": depth, "center_lateral": lateral}

        grid = solve_steady(
            build_grid(layers, tumor, blood, params.resolution, params.width, bc),
            tol=params.tol,
            max_iters=params.max_iters,
        )
        base = _pseudo_thermogram(surface_profile(grid), params.out_size, params.blur_sigma)
        meta["surface_range"] = [float(base.min()), float(base.max())]

        label = 1 if has_tumor else 0
        patient_id = f"{'tumor' if has_tumor else 'healthy'}_{p:03d}"
        images = tuple(
            Thermogram(base + rng.normal(0.0, params.noise_std, size=base.shape), patient_id, label, ThermogramSource.RAW)
            for _ in range(params.images_per_patient)
        )
        records.append(PatientRecord(patient_id, label, images, meta=meta))

    logger.info(f"[Bioheat] generated {n_healthy} healthy + {n_tumor} tumor synthetic patients (seed={seed})")
    return records


def border_mask(shape: Tuple[int, int]) -> np.ndarray:
    """Ones with a zeroed frame, standing in for a breast contour mask."""
    h, w = shape
    band = max(1, min(h, w) // 8)
    mask = np.zeros(shape, dtype=np.uint8)
    if h > 2 * band and w > 2 * band:
        mask[band:h - band, band:w - band] = 1
    else:
        mask[:] = 1
    return mask


def write_synthetic_records(records: Sequence[PatientRecord], root: str | Path) -> List[Path]:
    """``<root>/<healthy|sick>/<patient_id>/img_NN.txt`` + ``mask.txt`` + ``sim.json``."""
    root = Path(root)
    written: List[Path] = []
    for record in records:
        patient_dir = root / ("sick" if record.label == 1 else "healthy") / record.patient_id
        patient_dir.mkdir(parents=True, exist_ok=True)
        for i, t in enumerate(record.thermograms):
            np.savetxt(patient_dir / f"img_{i:02d}.txt", t.matrix, fmt="%.6f")
        np.savetxt(patient_dir / "mask.txt", border_mask(record.thermograms[0].shape), fmt="%d")
        (patient_dir / "sim.json").write_text(json.dumps(dict(record.meta), indent=2), encoding="utf-8")
        written.append(patient_dir)
    logger.info(f"[Bioheat] wrote {len(written)} patient directories under {root}")
    return written
