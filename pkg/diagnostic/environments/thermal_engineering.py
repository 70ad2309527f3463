"""Scenarios for thermogram loading, masking, resizing, augmentation and splits."""
from __future__ import annotations

from pathlib import Path
from typing import Any, List, Mapping, Tuple

import numpy as np
from PIL import Image

from core.engineering import (
    AugmentOp,
    MaskImage,
    PatientRecord,
    Thermogram,
    ThermalToggles,
    apply_thermal_toggles,
    augment_images,
    load_mask,
    load_temperature_matrix,
    load_thermal_directory,
    mask_and_crop,
    normalize,
    patient_split,
    read_tensor_cache,
    records_to_arrays,
    resize_bilinear,
    write_tensor_cache,
)
from core.engineering.thermal import ThermogramSource
from core.exceptions import ThermalDataError
from diagnostic.environments._fixtures import write_text
from diagnostic.framework import ExecutionResult, PreparedEnv, ScenarioCase, verdict

GROUP = "thermal"


def _checks(result: ExecutionResult, inputs, context) -> Tuple[str, str]:
    return result.output


def _patients(n_healthy: int, n_sick: int, shape=(6, 8), images: int = 2, seed: int = 0) -> List[PatientRecord]:
    rng = np.random.default_rng(seed)
    records = []
    for p in range(n_healthy + n_sick):
        label = int(p >= n_healthy)
        pid = f"p{p:03d}"
        thermograms = tuple(Thermogram(30.0 + rng.random(shape) * 4.0, pid, label) for _ in range(images))
        records.append(PatientRecord(pid, label, thermograms))
    return records


def _load_grid(inputs: Mapping[str, Any]) -> bool:
    path = write_text(inputs["tmp_path"] / "p1" / "img.txt", "30 31 32\n33 34 35\n")
    t = load_temperature_matrix(path)
    return t.matrix.tolist() == [[30.0, 31.0, 32.0], [33.0, 34.0, 35.0]] and t.patient_id == "p1"


def _load_ragged(inputs: Mapping[str, Any]) -> None:
    load_temperature_matrix(write_text(inputs["tmp_path"] / "r.txt", "1 2 3\n4 5 6\n7 8\n"))


def _ragged_line(result: ExecutionResult, inputs, context) -> Tuple[str, str]:
    return verdict([(result.exception.line == 3, f"line {result.exception.line}")], "Ragged row reported at line 3.")


def _mask_cases(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    rng = np.random.default_rng(1)
    t = Thermogram(30.0 + rng.random((30, 40)))
    full = mask_and_crop(t, MaskImage(np.ones((30, 40))))
    grid = np.zeros((30, 40))
    grid[10:20, 5:25] = 1
    box = mask_and_crop(t, MaskImage(grid))
    checker = (np.indices((30, 40)).sum(axis=0) % 2 == 0).astype(int)
    chk = mask_and_crop(t, MaskImage(checker))
    return verdict(
        [
            (np.array_equal(full.matrix, t.matrix), "all-ones mask changed the image"),
            (box.shape == (10, 20), f"bounding-box crop shape {box.shape}"),
            (chk.shape == (30, 40), f"checkerboard crop shape {chk.shape}"),
            (not chk.matrix[checker == 0].any(), "nonzero value outside the mask support"),
            (chk.source is ThermogramSource.ROI, "crop not tagged as roi"),
        ],
        "Mask zeroes the background and crops to the tight bounding box.",
    )


def _mask_mismatch(inputs: Mapping[str, Any]) -> None:
    mask_and_crop(Thermogram(np.ones((3, 3))), MaskImage(np.ones((3, 4))))


def _resize_cases(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    rng = np.random.default_rng(2)
    t = Thermogram(rng.random((7, 9)))
    same = resize_bilinear(t, 7, 9)
    flat = resize_bilinear(Thermogram(np.full((5, 6), 33.0)), 250, 300)
    small = resize_bilinear(Thermogram([[0.0, 1.0], [1.0, 2.0]]), 3, 3)
    return verdict(
        [
            (np.max(np.abs(same.matrix - t.matrix)) < 1e-12, "same-size resize is not the identity"),
            (flat.shape == (250, 300) and np.allclose(flat.matrix, 33.0, atol=1e-12), "constant image not preserved"),
            (abs(small.matrix[1, 1] - 1.0) < 1e-12, f"center value {small.matrix[1, 1]}"),
            (abs(small.matrix[0, 0]) < 1e-12 and abs(small.matrix[2, 2] - 2.0) < 1e-12, "corners are not aligned"),
        ],
        "Corner-aligned bilinear resize.",
    )


def _normalize_cases(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    per = normalize(Thermogram([[30.0, 31.0], [32.0, 34.0]]))
    fixed = normalize(Thermogram([[30.0, 45.0], [10.0, 20.0]]), "fixed", (20.0, 40.0))
    const = normalize(Thermogram(np.full((3, 3), 33.0)))
    hot = normalize(Thermogram(np.full((3, 3), 50.0)), "fixed", (20.0, 40.0))
    mid = normalize(Thermogram(np.full((3, 3), 30.0)), "fixed", (20.0, 40.0))
    return verdict(
        [
            ((per.matrix.min(), per.matrix.max()) == (0.0, 1.0), "per-image range is not [0, 1]"),
            (abs(per.matrix[0, 1] - 0.25) < 1e-12, f"per-image value {per.matrix[0, 1]}"),
            (fixed.matrix.tolist() == [[0.5, 1.0], [0.0, 0.0]], f"fixed values {fixed.matrix.tolist()}"),
            (np.all(const.matrix == 0.5), "constant image is not 0.5"),
            (np.all(hot.matrix == 1.0), f"constant image above the bounds gives {hot.matrix[0, 0]}"),
            (np.all(mid.matrix == 0.5), f"constant image at mid-range gives {mid.matrix[0, 0]}"),
            (per.source is ThermogramSource.NORMALIZED, "source not tagged normalized"),
        ],
        "Per-image and fixed normalization behave as specified.",
    )


def _augment_ops(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    rng = np.random.default_rng(3)
    t = Thermogram(rng.random((4, 7)))
    hflip, vflip, rot = AugmentOp("hflip"), AugmentOp("vflip"), AugmentOp("rot90")
    twice_h = hflip.apply(hflip.apply(t, rng), rng)
    twice_v = vflip.apply(vflip.apply(t, rng), rng)
    norm = normalize(Thermogram(rng.random((100, 100))))
    noisy = AugmentOp.parse("gaussian:0.01").apply(norm, np.random.default_rng(4))
    delta = noisy.matrix - norm.matrix
    return verdict(
        [
            (np.array_equal(twice_h.matrix, t.matrix), "hflip twice is not the identity"),
            (np.array_equal(twice_v.matrix, t.matrix), "vflip twice is not the identity"),
            (rot.apply(t, rng).shape == (7, 4), "rot90 does not swap the shape"),
            (noisy.matrix.min() >= 0.0 and noisy.matrix.max() <= 1.0, "noise not clamped to [0, 1]"),
            (np.abs(delta).max() <= 0.06, f"gaussian noise too large: {np.abs(delta).max()}"),
        ],
        "Flips are involutions, rot90 swaps shape, noise stays in range.",
    )


def _noise_on_raw(inputs: Mapping[str, Any]) -> None:
    AugmentOp("salt_pepper", 0.1).apply(Thermogram(np.full((3, 3), 31.0)), np.random.default_rng(0))


def _bad_sigma(inputs: Mapping[str, Any]) -> None:
    AugmentOp.parse("gaussian:0")


def _augment_records(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    records = _patients(2, 2, images=3)
    out = augment_images(records, ("hflip", "vflip", "rot90"), degree=3, seed=5)
    again = augment_images(records, ("hflip", "vflip", "rot90"), degree=3, seed=5)
    repeatable = all(
        np.array_equal(a.matrix, b.matrix)
        for o, r in zip(out, again)
        for a, b in zip(o.thermograms, r.thermograms)
    )
    originals_kept = all(
        all(np.array_equal(a.matrix, b.matrix) for a, b in zip(o.thermograms[:3], r.thermograms))
        for o, r in zip(out, records)
    )
    return verdict(
        [
            (all(len(r.thermograms) == 9 for r in out), "each image should gain two synthetic images"),
            (originals_kept, "original images are not kept first"),
            (all(o.patient_id == r.patient_id and o.label == r.label for o, r in zip(out, records)), "record identity lost"),
            (repeatable, "same seed gave different images"),
        ],
        "Degree 3 adds two images per original and keeps originals.",
    )


def _split_cases(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    records = _patients(19, 37, shape=(2, 2), images=1)
    train, test = patient_split(records, 0.3, seed=8)
    again = patient_split(records, 0.3, seed=8)
    pair = patient_split(_patients(2, 0, shape=(2, 2), images=1), 0.5, seed=1)
    train_ids = {r.patient_id for r in train}
    test_ids = {r.patient_id for r in test}
    return verdict(
        [
            (len(test) == 17, f"test patients {len(test)}"),
            (sum(r.label == 0 for r in test) >= 5, "fewer than 5 healthy test patients"),
            (not train_ids & test_ids, "a patient appears on both sides"),
            (len(train_ids | test_ids) == 56, "split is not exhaustive"),
            ([r.patient_id for r in again[1]] == [r.patient_id for r in test], "same seed gave a different split"),
            ((len(pair[0]), len(pair[1])) == (1, 1), f"two-patient split {(len(pair[0]), len(pair[1]))}"),
        ],
        "Patient-level stratified split.",
    )


def _split_too_few(inputs: Mapping[str, Any]) -> None:
    patient_split(_patients(1, 3, shape=(2, 2), images=1), 0.3, seed=0)


def _directory_layout(tmp_path: Path) -> PreparedEnv:
    root = tmp_path / "thermal"
    write_text(root / "healthy" / "h1" / "a.txt", "30 31\n32 33\n")
    write_text(root / "healthy" / "h1" / "b.txt", "30 30\n31 31\n")
    write_text(root / "healthy" / "h1" / "mask.txt", "1 0\n1 1\n")
    write_text(root / "sick" / "s1" / "a.txt", "34 35\n36 37\n")
    (root / "sick" / "s1").mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.array([[0, 255], [255, 255]], dtype=np.uint8)).save(root / "sick" / "s1" / "mask.png")
    return PreparedEnv(inputs={"root": root})


def _load_directory(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    records = load_thermal_directory(inputs["root"])
    by_id = {r.patient_id: r for r in records}
    h1, s1 = by_id.get("h1"), by_id.get("s1")
    return verdict(
        [
            (set(by_id) == {"h1", "s1"}, f"patients {sorted(by_id)}"),
            (h1 is not None and h1.label == 0 and len(h1.thermograms) == 2, "healthy patient misread"),
            (s1 is not None and s1.label == 1 and len(s1.thermograms) == 1, "sick patient misread"),
            (h1 is not None and h1.mask.grid.tolist() == [[1, 0], [1, 1]], "text mask misread"),
            (s1 is not None and s1.mask.grid.tolist() == [[0, 1], [1, 1]], "png mask misread"),
        ],
        "Directory layout with text and PNG masks loads.",
    )


def _pgm_mask(inputs: Mapping[str, Any]) -> bool:
    path = inputs["tmp_path"] / "mask.pgm"
    Image.fromarray(np.array([[0, 0, 1], [0, 1, 1]], dtype=np.uint8)).save(path)
    return load_mask(path).grid.tolist() == [[0, 0, 1], [0, 1, 1]]


def _tensor_cache(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    images = np.random.default_rng(6).random((5, 1, 4, 3)).astype(np.float32)
    path = write_tensor_cache(inputs["tmp_path"] / "cache.bin", images)
    back = read_tensor_cache(path)
    raw = path.read_bytes()
    return verdict(
        [
            (np.frombuffer(raw[:8], dtype="<i4").tolist() == [4, 3], "header is not (h, w)"),
            (len(raw) == 8 + 5 * 12 * 4, f"file size {len(raw)}"),
            (back.shape == (5, 4, 3) and np.array_equal(back, images[:, 0].astype(np.float64)), "body mismatch"),
        ],
        "Flat little-endian float32 cache with an int32 header.",
    )


def _toggles_pipeline(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    records = _patients(4, 4, shape=(12, 10), images=2)
    train, test = patient_split(records, 0.25, seed=0)
    toggles = ThermalToggles(mask=True, augment=True, normalize=True)
    tr, te = apply_thermal_toggles(train, test, toggles, size=(8, 8), seed=1, degree=2)
    x_tr, y_tr, ids_tr = records_to_arrays(tr)
    x_te, _, _ = records_to_arrays(te)
    plain_tr, _ = apply_thermal_toggles(train, test, ThermalToggles(), size=(8, 8), seed=1)
    pixels = records_to_arrays(plain_tr)[0]
    return verdict(
        [
            (x_tr.shape == (4 * len(train), 1, 8, 8), f"train tensor {x_tr.shape}"),
            (x_te.shape == (2 * len(test), 1, 8, 8), f"test tensor {x_te.shape}"),
            (x_tr.min() >= 0.0 and x_tr.max() <= 1.0, "normalized images leave [0, 1]"),
            (len(ids_tr) == x_tr.shape[0] and y_tr.shape[0] == x_tr.shape[0], "ids and labels misaligned"),
            (abs(pixels.mean()) < 1e-9 and abs(pixels.std() - 1.0) < 1e-9, "standardized train pixels not unit"),
            (toggles.label == "masked+augmented+normalized", f"label {toggles.label}"),
        ],
        "mask, resize, normalize then train-only augmentation.",
    )


def get_test_cases() -> List[ScenarioCase]:
    return [
        ScenarioCase("load temperature matrix", GROUP, _load_grid),
        ScenarioCase("load ragged matrix", GROUP, _load_ragged, validator=_ragged_line, expect_error=ThermalDataError),
        ScenarioCase("mask and crop", GROUP, _mask_cases, validator=_checks),
        ScenarioCase("mask shape mismatch", GROUP, _mask_mismatch, expect_error=ThermalDataError),
        ScenarioCase("bilinear resize", GROUP, _resize_cases, validator=_checks),
        ScenarioCase("normalize modes", GROUP, _normalize_cases, validator=_checks),
        ScenarioCase("augmentation ops", GROUP, _augment_ops, validator=_checks),
        ScenarioCase("noise on raw image rejected", GROUP, _noise_on_raw, expect_error=ThermalDataError),
        ScenarioCase("gaussian sigma must be positive", GROUP, _bad_sigma, expect_error=ThermalDataError),
        ScenarioCase("augment image records", GROUP, _augment_records, validator=_checks),
        ScenarioCase("patient split", GROUP, _split_cases, validator=_checks),
        ScenarioCase("patient split too few patients", GROUP, _split_too_few, expect_error=ThermalDataError),
        ScenarioCase("load thermal directory", GROUP, _load_directory, _directory_layout, _checks),
        ScenarioCase("load pgm mask", GROUP, _pgm_mask),
        ScenarioCase("tensor cache layout", GROUP, _tensor_cache, validator=_checks),
        ScenarioCase("thermal toggles pipeline", GROUP, _toggles_pipeline, validator=_checks),
    ]
