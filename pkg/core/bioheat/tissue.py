# -*- coding: utf-8 -*-
"""
core.bioheat.tissue

Layered breast cross-section: tissue properties, tumor inclusion, blood
parameters and the discretized grid the solver marches on.

Grids are indexed ``[depth, lateral]``; row 0 touches the skin surface and
the last row touches the body core.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.config import (
    AMBIENT_TEMPERATURE,
    BLOOD_DENSITY,
    BLOOD_SPECIFIC_HEAT,
    CORE_TEMPERATURE,
    SURFACE_HTC,
)
from core.exceptions import GeometryError
from core.logger import logger

HOST_LAYERS = ("fat", "gland")


@dataclass(frozen=True)
class TissueLayer:
    """SI units: m, J/(kg K), W/(m K), kg/m³, 1/s, W/m³."""

    name: str
    thickness: float
    specific_heat: float
    conductivity: float
    density: float
    perfusion: float = 0.0
    metabolic_q: float = 0.0

    def __post_init__(self) -> None:
        if self.thickness <= 0:
            raise GeometryError(f"layer '{self.name}': thickness must be > 0")
        for attr in ("specific_heat", "conductivity", "density", "perfusion", "metabolic_q"):
            if getattr(self, attr) < 0:
                raise GeometryError(f"layer '{self.name}': {attr} must be >= 0")
        if self.specific_heat == 0 or self.density == 0 or self.conductivity == 0:
            raise GeometryError(f"layer '{self.name}': c, k and rho must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


BREAST_LAYERS: Tuple[TissueLayer, ...] = (
    TissueLayer("epidermis", 0.1e-3, 3589, 0.235, 1200, 0.0, 0.0),
    TissueLayer("papillary_dermis", 0.7e-3, 3300, 0.445, 1200, 0.00018, 368.1),
    TissueLayer("reticular_dermis", 0.8e-3, 3300, 0.445, 1200, 0.00126, 368.1),
    TissueLayer("fat", 5.0e-3, 2674, 0.21, 930, 0.00008, 400.0),
    TissueLayer("gland", 43.4e-3, 3770, 0.48, 1050, 0.00054, 700.0),
    TissueLayer("muscle", 15.0e-3, 3800, 0.48, 1100, 0.0027, 700.0),
)

# thickness is the default tumor diameter
TUMOR_PROPERTIES = TissueLayer("tumor", 10.0e-3, 3852, 0.48, 1050, 0.0063, 5000.0)


@dataclass(frozen=True)
class TumorSpec:
    center_depth: float
    center_lateral: float
    diameter: float = 0.010
    properties: TissueLayer = TUMOR_PROPERTIES

    def __post_init__(self) -> None:
        if self.diameter <= 0:
            raise GeometryError(f"tumor diameter must be > 0, got {self.diameter}")

    @property
    def radius(self) -> float:
        return self.diameter / 2.0


@dataclass(frozen=True)
class BloodParams:
    density: float = BLOOD_DENSITY
    specific_heat: float = BLOOD_SPECIFIC_HEAT
    temperature: float = CORE_TEMPERATURE

    def __post_init__(self) -> None:
        if self.density <= 0 or self.specific_heat <= 0 or self.temperature <= 0:
            raise GeometryError("blood parameters must be positive")


class SurfaceMode(str, Enum):
    CONVECTIVE = "convective"
    DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class BoundaryConditions:
    """Core face is always Dirichlet; lateral faces are adiabatic."""

    core_temperature: float = CORE_TEMPERATURE
    surface: SurfaceMode = SurfaceMode.CONVECTIVE
    htc: float = SURFACE_HTC
    ambient: float = AMBIENT_TEMPERATURE
    surface_temperature: float = AMBIENT_TEMPERATURE

    def __post_init__(self) -> None:
        object.__setattr__(self, "surface", SurfaceMode(self.surface))
        if self.surface is SurfaceMode.CONVECTIVE and self.htc <= 0:
            raise GeometryError(f"convective surface needs h > 0, got {self.htc}")


@dataclass(eq=False)
class SimGrid:
    dx: float
    dy: float
    T: np.ndarray
    material: np.ndarray
    materials: Tuple[TissueLayer, ...]
    blood: BloodParams
    bc: BoundaryConditions
    iterations: int = 0
    dt: float = 0.0
    residual: float = float("nan")
    tumor: Optional[TumorSpec] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def ny(self) -> int:
        return int(self.T.shape[0])

    @property
    def nx(self) -> int:
        return int(self.T.shape[1])

    @property
    def depth(self) -> float:
        return self.ny * self.dy

    @property
    def width(self) -> float:
        return self.nx * self.dx

    def property_map(self, attr: str) -> np.ndarray:
        lut = np.array([getattr(m, attr) for m in self.materials], dtype=np.float64)
        return lut[self.material]

    def heat_capacity(self) -> np.ndarray:
        return self.property_map("density") * self.property_map("specific_heat")

    def perfusion_coefficient(self) -> np.ndarray:
        """rho_b c_b w_b per cell, W/(m³ K)."""
        return self.blood.density * self.blood.specific_heat * self.property_map("perfusion")

    def tumor_cells(self) -> int:
        if self.tumor is None:
            return 0
        return int(np.count_nonzero(self.material == len(self.materials) - 1))

    def cell_centers(self) -> Tuple[np.ndarray, np.ndarray]:
        return (np.arange(self.ny) + 0.5) * self.dy, (np.arange(self.nx) + 0.5) * self.dx

    def copy(self) -> "SimGrid":
        return SimGrid(
            self.dx, self.dy, self.T.copy(), self.material.copy(), self.materials, self.blood, self.bc,
            self.iterations, self.dt, self.residual, self.tumor, list(self.warnings),
        )


def _check_tumor(tumor: TumorSpec, layers: Sequence[TissueLayer], depth: float, width: float) -> None:
    r = tumor.radius
    if tumor.center_depth - r < 0 or tumor.center_depth + r > depth:
        raise GeometryError(f"tumor spans depth [{tumor.center_depth - r:.4f}, {tumor.center_depth + r:.4f}] m outside [0, {depth:.4f}]")
    if tumor.center_lateral - r < 0 or tumor.center_lateral + r > width:
        raise GeometryError(f"tumor spans lateral [{tumor.center_lateral - r:.4f}, {tumor.center_lateral + r:.4f}] m outside [0, {width:.4f}]")

    tops = np.concatenate([[0.0], np.cumsum([layer.thickness for layer in layers])])
    host = [(tops[i], tops[i + 1]) for i, layer in enumerate(layers) if layer.name in HOST_LAYERS]
    if host:
        lo, hi = min(h[0] for h in host), max(h[1] for h in host)
        if tumor.center_depth - r < lo - 1e-12 or tumor.center_depth + r > hi + 1e-12:
            raise GeometryError(f"tumor must lie inside the fat/gland region [{lo:.4f}, {hi:.4f}] m")


def build_grid(
    layers: Sequence[TissueLayer] = BREAST_LAYERS,
    tumor: Optional[TumorSpec] = None,
    blood: BloodParams = BloodParams(),
    resolution: float = 1.0e-3,
    width: float = 0.06,
    bc: BoundaryConditions = BoundaryConditions(),
) -> SimGrid:
    """Horizontally stratified material map with an optional circular tumor.

    Each cell takes the material of the layer containing its center, so a
    layer thinner than the resolution may own no cells; that is logged and
    the layer is absorbed by its neighbors. T starts at the core temperature.
    """
    if resolution <= 0:
        raise GeometryError(f"resolution must be > 0, got {resolution}")
    if width <= 0:
        raise GeometryError(f"domain width must be > 0, got {width}")
    layers = tuple(layers)
    if not layers:
        raise GeometryError("at least one tissue layer is required")

    depth = float(sum(layer.thickness for layer in layers))
    ny = max(1, int(round(depth / resolution)))
    nx = max(1, int(round(width / resolution)))
    dy, dx = depth / ny, width / nx

    bottoms = np.cumsum([layer.thickness for layer in layers])
    yc = (np.arange(ny) + 0.5) * dy
    row_material = np.minimum(np.searchsorted(bottoms, yc, side="right"), len(layers) - 1)
    material = np.repeat(row_material[:, None], nx, axis=1).astype(np.int64)

    notes: List[str] = []
    for i, layer in enumerate(layers):
        if layer.thickness < resolution or not np.any(row_material == i):
            message = f"layer '{layer.name}' ({layer.thickness * 1e3:.2f} mm) is thinner than the {resolution * 1e3:.2f} mm resolution"
            if not np.any(row_material == i):
                message += " and was merged into its neighbors"
            logger.warning(f"[Bioheat] {message}")
            notes.append(message)

    materials = layers
    if tumor is not None:
        _check_tumor(tumor, layers, depth, nx * dx)
        materials = layers + (tumor.properties,)
        xc = (np.arange(nx) + 0.5) * dx
        inside = (yc[:, None] - tumor.center_depth) ** 2 + (xc[None, :] - tumor.center_lateral) ** 2 <= tumor.radius ** 2
        if not inside.any():
            raise GeometryError("tumor is smaller than one grid cell at this resolution")
        material[inside] = len(layers)

    T = np.full((ny, nx), bc.core_temperature, dtype=np.float64)
    return SimGrid(dx, dy, T, material, materials, blood, bc, tumor=tumor, warnings=notes)
