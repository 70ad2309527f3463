# -*- coding: utf-8 -*-
"""
core.dataset.eit

Collapsing of the six impedance-spectroscopy tissue classes.
"""

from __future__ import annotations

from enum import Enum
from typing import Dict, Tuple

import numpy as np

from core.dataset.tabular import TabularDataset
from core.exceptions import DatasetError
from core.logger import logger

EIT_LABELS: Tuple[str, ...] = ("car", "fad", "mas", "gla", "con", "adi")
EIT_FEATURES: Tuple[str, ...] = ("I0", "PA500", "HFS", "DA", "Area", "A/DA", "Max IP", "DR", "P")


class EitLabelMode(str, Enum):
    TWO = "two"
    THREE = "three"
    SIX = "six"


_GROUPS: Dict[EitLabelMode, Tuple[Tuple[str, ...], Dict[str, int]]] = {
    EitLabelMode.TWO: (
        ("non_car", "car"),
        {"car": 1, "fad": 0, "mas": 0, "gla": 0, "con": 0, "adi": 0},
    ),
    EitLabelMode.THREE: (
        ("con_adi", "fad_mas_gla", "car"),
        {"car": 2, "fad": 1, "mas": 1, "gla": 1, "con": 0, "adi": 0},
    ),
}


def relabel_eit(
    ds: TabularDataset,
    mode: EitLabelMode | str,
    drop_con_adi: bool = False,
) -> TabularDataset:
    """Map the six tissue labels onto 2 or 3 classes; six is the identity.

    With ``drop_con_adi`` the connective and adipose rows are removed first,
    so two-class mode compares carcinoma against fad+mas+gla only.
    """
    mode = EitLabelMode(mode)
    source = tuple(name.strip().lower() for name in ds.label_names)
    unknown = sorted(set(source) - set(EIT_LABELS))
    if unknown:
        raise DatasetError(f"unknown EIT tissue label(s) {unknown}; expected {list(EIT_LABELS)}")

    if drop_con_adi:
        if mode is EitLabelMode.THREE:
            raise DatasetError("drop_con_adi empties the con+adi class of three-class mode")
        keep = np.array([source[i] not in ("con", "adi") for i in ds.labels])
        if not keep.any():
            raise DatasetError("no rows left after dropping con/adi")
        ds = TabularDataset(ds.feature_names, ds.rows[keep], ds.labels[keep], ds.label_names)

    if mode is EitLabelMode.SIX:
        return ds

    names, mapping = _GROUPS[mode]
    if drop_con_adi:
        names = ("fad_mas_gla", "car")
    lut = np.array([mapping[name] for name in source], dtype=np.int64)
    relabelled = TabularDataset(ds.feature_names, ds.rows, lut[ds.labels], names)
    logger.debug(f"[Dataset] relabel_eit mode={mode.value} counts={np.bincount(relabelled.labels).tolist()}")
    return relabelled
