# -*- coding: utf-8 -*-
"""
core.engineering.thermal

Thermogram loading, masking, resizing, normalization, augmentation and
patient-level splitting.

Matrices are indexed ``[row, col]``. A patient directory holds one text
matrix per image and optionally ``mask.txt``, ``mask.pgm`` or ``mask.png``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from PIL import Image
from scipy import ndimage

from core.config import DEFAULT_AUGMENT_DEGREE, DEFAULT_RESIZE
from core.dataset import split_indices
from core.exceptions import DatasetError, ThermalDataError
from core.logger import logger
from decorators import log_events

LABEL_DIRS = {"healthy": 0, "sick": 1}
MASK_NAMES = ("mask.txt", "mask.pgm", "mask.png")
GEOMETRIC_OPS = ("hflip", "vflip", "rot90")
NOISE_OPS = ("gaussian", "salt_pepper")
DEFAULT_OPS = ("hflip", "vflip", "rot90", "gaussian:0.01", "salt_pepper:0.01")

_SEPARATORS = re.compile(r"[\s,;]+")


class ThermogramSource(str, Enum):
    RAW = "raw"
    MASKED = "masked"
    ROI = "roi"
    NORMALIZED = "normalized"
    STANDARDIZED = "standardized"


@dataclass(frozen=True, eq=False)
class Thermogram:
    matrix: np.ndarray
    patient_id: str = ""
    label: int = 0
    source: ThermogramSource = ThermogramSource.RAW

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=np.float64, copy=True)
        if matrix.ndim != 2 or min(matrix.shape) < 1:
            raise ThermalDataError(f"thermogram must be a non-empty 2-D grid, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise ThermalDataError("thermogram contains non-finite values")
        if self.label not in (0, 1):
            raise ThermalDataError(f"label must be 0 (healthy) or 1 (cancer), got {self.label}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "source", ThermogramSource(self.source))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape

    def with_matrix(self, matrix: np.ndarray, source: Optional[ThermogramSource] = None) -> "Thermogram":
        return Thermogram(matrix, self.patient_id, self.label, source or self.source)


@dataclass(frozen=True, eq=False)
class MaskImage:
    grid: np.ndarray

    def __post_init__(self) -> None:
        grid = (np.asarray(self.grid) != 0).astype(np.uint8)
        if grid.ndim != 2:
            raise ThermalDataError(f"mask must be 2-D, got shape {grid.shape}")
        if not grid.any():
            raise ThermalDataError("mask has no nonzero cell")
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.grid.shape


@dataclass(frozen=True)
class PatientRecord:
    patient_id: str
    label: int
    thermograms: Tuple[Thermogram, ...] = field(default_factory=tuple)
    mask: Optional[MaskImage] = None
    # provenance, e.g. simulation parameters of synthetic patients
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "thermograms", tuple(self.thermograms))
        for t in self.thermograms:
            if t.label != self.label:
                raise ThermalDataError(f"patient {self.patient_id}: thermogram label {t.label} != {self.label}")


# ── loading ─────────────────────────────────────────────────────────


def _read_grid(path: Path) -> np.ndarray:
    rows: List[List[float]] = []
    width = None
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            tokens = [tok for tok in _SEPARATORS.split(text) if tok]
            try:
                values = [float(tok) for tok in tokens]
            except ValueError:
                bad = next(tok for tok in tokens if not _is_number(tok))
                raise ThermalDataError(f"{path.name}: non-numeric token '{bad}'", line=line_no) from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ThermalDataError(
                    f"{path.name}: ragged row with {len(values)} values, expected {width}", line=line_no
                )
            rows.append(values)
    if not rows:
        raise ThermalDataError(f"{path.name}: empty matrix file")
    return np.asarray(rows, dtype=np.float64)


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def load_temperature_matrix(path: str | Path, patient_id: str = "", label: int = 0) -> Thermogram:
    """Whitespace-separated grid of °C values; shape is taken as found."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"temperature matrix not found: {path}")
    return Thermogram(_read_grid(path), patient_id or path.parent.name, label, ThermogramSource.RAW)


def load_mask(path: str | Path) -> MaskImage:
    """0/1 text grid, or any single-channel image Pillow reads (PGM, PNG)."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"mask not found: {path}")
    if path.suffix.lower() == ".txt":
        return MaskImage(_read_grid(path))
    with Image.open(path) as img:
        return MaskImage(np.asarray(img.convert("L")))


@log_events("load_thermal_directory")
def load_thermal_directory(root: str | Path) -> List[PatientRecord]:
    """Read ``<root>/<healthy|sick>/<patient_id>/*.txt`` into records."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"thermal data directory not found: {root}")

    records: List[PatientRecord] = []
    for class_dir, label in LABEL_DIRS.items():
        base = root / class_dir
        if not base.is_dir():
            continue
        for patient_dir in sorted(p for p in base.iterdir() if p.is_dir()):
            files = sorted(p for p in patient_dir.glob("*.txt") if p.name not in MASK_NAMES)
            if not files:
                logger.warning(f"[Thermal] {patient_dir} holds no temperature matrices; skipped")
                continue
            thermograms = tuple(load_temperature_matrix(f, patient_dir.name, label) for f in files)
            mask = None
            for mask_name in MASK_NAMES:
                if (patient_dir / mask_name).is_file():
                    mask = load_mask(patient_dir / mask_name)
                    break
            records.append(PatientRecord(patient_dir.name, label, thermograms, mask))

    if not records:
        raise ThermalDataError(f"no patient directories under {root}/{{healthy,sick}}")
    counts = np.bincount([r.label for r in records], minlength=2)
    logger.info(f"[Thermal] loaded {len(records)} patients (healthy={counts[0]}, sick={counts[1]}) from {root}")
    return records


# ── per-image transforms ────────────────────────────────────────────


def mask_and_crop(t: Thermogram, m: MaskImage) -> Thermogram:
    """Zero outside the mask, then crop to the mask's tight bounding box."""
    if t.shape != m.shape:
        raise ThermalDataError(f"mask shape {m.shape} does not match thermogram shape {t.shape}")
    rows = np.flatnonzero(m.grid.any(axis=1))
    cols = np.flatnonzero(m.grid.any(axis=0))
    r0, r1, c0, c1 = rows[0], rows[-1] + 1, cols[0], cols[-1] + 1
    masked = np.where(m.grid == 1, t.matrix, 0.0)
    return t.with_matrix(masked[r0:r1, c0:c1], ThermogramSource.ROI)


def support_mask(t: Thermogram) -> MaskImage:
    """Nonzero support of a background-zeroed image."""
    return MaskImage(t.matrix != 0.0)


def _sample_axis(n_in: int, n_out: int) -> np.ndarray:
    if n_out == 1:
        return np.array([(n_in - 1) / 2.0])
    return np.linspace(0.0, n_in - 1.0, n_out)


def resize_bilinear(t: Thermogram, height: int, width: int) -> Thermogram:
    """Bilinear resampling with corner-aligned sample positions."""
    if height < 1 or width < 1:
        raise ThermalDataError(f"target size must be positive, got {height}x{width}")
    if t.shape == (height, width):
        return t
    rr, cc = np.meshgrid(_sample_axis(t.shape[0], height), _sample_axis(t.shape[1], width), indexing="ij")
    out = ndimage.map_coordinates(t.matrix, [rr, cc], order=1, mode="nearest")
    return t.with_matrix(out)


def normalize(t: Thermogram, mode: str = "per_image", bounds: Optional[Tuple[float, float]] = None) -> Thermogram:
    """``per_image`` min-max, or ``fixed`` clamp-and-scale by ``bounds``.

    A constant image maps to 0.5 everywhere under ``per_image``; ``fixed``
    treats it like any other image.
    """
    x = t.matrix
    if mode == "per_image":
        lo, hi = float(x.min()), float(x.max())
        if hi == lo:
            return t.with_matrix(np.full_like(x, 0.5), ThermogramSource.NORMALIZED)
        return t.with_matrix((x - lo) / (hi - lo), ThermogramSource.NORMALIZED)
    if mode == "fixed":
        if bounds is None:
            raise ThermalDataError("fixed normalization needs (lo, hi) bounds")
        lo, hi = float(bounds[0]), float(bounds[1])
        if not lo < hi:
            raise ThermalDataError(f"fixed normalization needs lo < hi, got ({lo}, {hi})")
        return t.with_matrix((np.clip(x, lo, hi) - lo) / (hi - lo), ThermogramSource.NORMALIZED)
    raise ThermalDataError(f"unknown normalization mode '{mode}'")


# ── augmentation ────────────────────────────────────────────────────


@dataclass(frozen=True)
class AugmentOp:
    name: str
    param: Optional[float] = None

    def __post_init__(self) -> None:
        if self.name not in GEOMETRIC_OPS + NOISE_OPS:
            raise ThermalDataError(f"unknown augmentation op '{self.name}'")
        if self.name == "gaussian" and not (self.param is not None and self.param > 0):
            raise ThermalDataError(f"gaussian sigma must be > 0, got {self.param}")
        if self.name == "salt_pepper" and not (self.param is not None and 0.0 < self.param < 1.0):
            raise ThermalDataError(f"salt_pepper p must lie in (0, 1), got {self.param}")

    @classmethod
    def parse(cls, text: str) -> "AugmentOp":
        """``hflip`` or ``gaussian:0.01`` style specification."""
        name, _, raw = str(text).partition(":")
        return cls(name.strip(), float(raw) if raw else None)

    @property
    def is_noise(self) -> bool:
        return self.name in NOISE_OPS

    def apply(self, t: Thermogram, rng: np.random.Generator) -> Thermogram:
        x = t.matrix
        if self.name == "hflip":
            return t.with_matrix(x[:, ::-1])
        if self.name == "vflip":
            return t.with_matrix(x[::-1, :])
        if self.name == "rot90":
            return t.with_matrix(np.rot90(x))
        if t.source is not ThermogramSource.NORMALIZED:
            raise ThermalDataError(f"noise op '{self.name}' needs a normalized image, got source={t.source.value}")
        if self.name == "gaussian":
            noisy = x + rng.normal(0.0, self.param, size=x.shape)
        else:
            noisy = x.copy()
            hit = rng.random(x.shape) < self.param
            noisy[hit] = rng.integers(0, 2, size=int(hit.sum())).astype(np.float64)
        return t.with_matrix(np.clip(noisy, 0.0, 1.0))


def _as_ops(ops: Sequence[AugmentOp | str]) -> Tuple[AugmentOp, ...]:
    parsed = tuple(op if isinstance(op, AugmentOp) else AugmentOp.parse(op) for op in ops)
    if not parsed:
        raise ThermalDataError("augmentation needs at least one op")
    return parsed


def augment_images(
    records: Sequence[PatientRecord],
    ops: Sequence[AugmentOp | str] = DEFAULT_OPS,
    degree: int = DEFAULT_AUGMENT_DEGREE,
    seed: int = 0,
) -> List[PatientRecord]:
    """Keep every original and add ``degree - 1`` synthetic images per image.

    Each synthetic image applies one uniformly drawn op. The generator is
    derived from (seed, record, image, round) so results do not depend on
    processing order. Use on the training partition only.
    """
    if degree < 2:
        raise ThermalDataError(f"augmentation degree must be >= 2, got {degree}")
    op_list = _as_ops(ops)
    out: List[PatientRecord] = []
    for rec_i, record in enumerate(records):
        images = list(record.thermograms)
        for img_i, t in enumerate(record.thermograms):
            for r in range(1, degree):
                rng = np.random.default_rng([seed, rec_i, img_i, r])
                op = op_list[int(rng.integers(0, len(op_list)))]
                images.append(op.apply(t, rng))
        out.append(replace(record, thermograms=tuple(images)))
    return out


# ── set-level steps ─────────────────────────────────────────────────


def patient_split(
    records: Sequence[PatientRecord],
    test_fraction: float,
    seed: int,
) -> Tuple[List[PatientRecord], List[PatientRecord]]:
    """Label-stratified split at patient granularity."""
    ids = [r.patient_id for r in records]
    if len(set(ids)) != len(ids):
        raise ThermalDataError("patient ids must be unique")
    labels = np.array([r.label for r in records], dtype=np.int64)
    try:
        train_idx, test_idx = split_indices(labels, test_fraction, seed, stratified=True)
    except DatasetError as exc:
        raise ThermalDataError(f"too few patients to split: {exc}") from exc
    return [records[i] for i in train_idx], [records[i] for i in test_idx]


def standardize_images(
    train: Sequence[PatientRecord],
    test: Sequence[PatientRecord],
) -> Tuple[List[PatientRecord], List[PatientRecord]]:
    """Zero-mean unit-std pixels using statistics of the training images."""
    pixels = np.concatenate([t.matrix.ravel() for r in train for t in r.thermograms])
    mean = float(pixels.mean())
    std = float(pixels.std())
    divisor = std if std > 0 else 1.0

    def apply(records):
        return [
            replace(
                r,
                thermograms=tuple(
                    t.with_matrix((t.matrix - mean) / divisor, ThermogramSource.STANDARDIZED) for t in r.thermograms
                ),
            )
            for r in records
        ]

    return apply(train), apply(test)


@dataclass(frozen=True)
class ThermalToggles:
    mask: bool = False
    augment: bool = False
    normalize: bool = False

    @property
    def label(self) -> str:
        parts = [n for flag, n in ((self.mask, "masked"), (self.augment, "augmented"), (self.normalize, "normalized")) if flag]
        return "+".join(parts) if parts else "original"

    def to_dict(self) -> dict:
        return {"mask": self.mask, "augment": self.augment, "normalize": self.normalize}


def _map_images(records, fn) -> List[PatientRecord]:
    return [replace(r, thermograms=tuple(fn(r, t) for t in r.thermograms)) for r in records]


def _masked(record: PatientRecord, t: Thermogram) -> Thermogram:
    mask = record.mask if record.mask is not None else support_mask(t)
    return mask_and_crop(t, mask)


@log_events("apply_thermal_toggles")
def apply_thermal_toggles(
    train: Sequence[PatientRecord],
    test: Sequence[PatientRecord],
    toggles: ThermalToggles,
    size: Tuple[int, int] = DEFAULT_RESIZE,
    seed: int = 0,
    ops: Sequence[AugmentOp | str] = DEFAULT_OPS,
    degree: int = DEFAULT_AUGMENT_DEGREE,
    normalize_mode: str = "per_image",
    bounds: Optional[Tuple[float, float]] = None,
) -> Tuple[List[PatientRecord], List[PatientRecord]]:
    """mask -> resize -> normalize | standardize -> augment (train only).

    Records without a mask file are masked by their nonzero support. When
    the normalize toggle is off, noise ops are skipped since they need
    [0, 1] images, and rotated images are resampled back to ``size``.
    """
    h, w = size
    if toggles.mask:
        train, test = _map_images(train, _masked), _map_images(test, _masked)
    train = _map_images(train, lambda _r, t: resize_bilinear(t, h, w))
    test = _map_images(test, lambda _r, t: resize_bilinear(t, h, w))
    if toggles.normalize:
        train = _map_images(train, lambda _r, t: normalize(t, normalize_mode, bounds))
        test = _map_images(test, lambda _r, t: normalize(t, normalize_mode, bounds))
    else:
        train, test = standardize_images(train, test)
    if toggles.augment:
        op_list = _as_ops(ops)
        if not toggles.normalize:
            op_list = tuple(op for op in op_list if not op.is_noise) or (AugmentOp("hflip"),)
            logger.debug(f"[Thermal] noise ops skipped on standardized images; using {[o.name for o in op_list]}")
        train = augment_images(train, op_list, degree, seed)
        train = _map_images(train, lambda _r, t: resize_bilinear(t, h, w))
    return list(train), list(test)


def records_to_arrays(records: Sequence[PatientRecord]) -> Tuple[np.ndarray, np.ndarray, List[str]]:
    """Stack every image into an ``(N, 1, h, w)`` tensor with labels and patient ids."""
    images = [t for r in records for t in r.thermograms]
    if not images:
        raise ThermalDataError("no images to stack")
    shapes = {t.shape for t in images}
    if len(shapes) != 1:
        raise ThermalDataError(f"images differ in shape {sorted(shapes)}; resize first")
    x = np.stack([t.matrix for t in images])[:, None, :, :]
    y = np.array([t.label for t in images], dtype=np.int64)
    ids = [r.patient_id for r in records for _ in r.thermograms]
    return x, y, ids


# ── tensor cache ────────────────────────────────────────────────────


def write_tensor_cache(path: str | Path, images: np.ndarray) -> Path:
    """Flat little-endian float32 body after an int32 ``h, w`` header."""
    images = np.asarray(images)
    if images.ndim == 4:
        images = images[:, 0]
    if images.ndim == 2:
        images = images[None]
    if images.ndim != 3:
        raise ThermalDataError(f"cache expects (N, h, w) images, got shape {images.shape}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = np.array(images.shape[1:], dtype="<i4")
    with path.open("wb") as fh:
        fh.write(header.tobytes())
        fh.write(images.astype("<f4").tobytes())
    return path


def read_tensor_cache(path: str | Path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"tensor cache not found: {path}")
    raw = path.read_bytes()
    if len(raw) < 8:
        raise ThermalDataError(f"{path.name}: truncated header")
    h, w = (int(v) for v in np.frombuffer(raw[:8], dtype="<i4"))
    body = np.frombuffer(raw[8:], dtype="<f4")
    if h < 1 or w < 1 or body.size % (h * w):
        raise ThermalDataError(f"{path.name}: body of {body.size} values does not fit {h}x{w} images")
    return body.reshape(-1, h, w).astype(np.float64)
