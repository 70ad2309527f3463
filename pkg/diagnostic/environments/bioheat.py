"""Scenarios for the layered-tissue grid, the steady solver and synthetic patients."""
from __future__ import annotations

from typing import Any, List, Mapping, Optional, Tuple

import numpy as np

from core.bioheat import (
    BREAST_LAYERS,
    BoundaryConditions,
    SimGrid,
    SurfaceMode,
    SyntheticParams,
    TissueLayer,
    TumorSpec,
    build_grid,
    energy_residual,
    generate_synthetic_set,
    solve_steady,
    surface_profile,
    write_synthetic_records,
)
from core.engineering import load_thermal_directory
from core.exceptions import GeometryError, SolverError
from diagnostic.framework import ExecutionResult, ScenarioCase, verdict

GROUP = "bioheat"

DIRICHLET_37_30 = BoundaryConditions(core_temperature=37.0, surface=SurfaceMode.DIRICHLET, surface_temperature=30.0)
DIRICHLET_37_37 = BoundaryConditions(core_temperature=37.0, surface=SurfaceMode.DIRICHLET, surface_temperature=37.0)


def _checks(result: ExecutionResult, inputs, context) -> Tuple[str, str]:
    return result.output


def _slab(thickness: float = 0.02, q: float = 0.0, k: float = 0.5) -> Tuple[TissueLayer, ...]:
    return (TissueLayer("slab", thickness, 3600.0, k, 1000.0, 0.0, q),)


def _depths(grid: SimGrid) -> np.ndarray:
    return grid.cell_centers()[0]


def _linear_slab(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    grid = solve_steady(build_grid(_slab(), resolution=0.001, width=0.004, bc=DIRICHLET_37_30), tol=1e-9)
    exact = 30.0 + 7.0 * _depths(grid) / 0.02
    error = float(np.max(np.abs(grid.T - exact[:, None])))
    middle = float(np.interp(0.01, _depths(grid), grid.T[:, 0]))
    return verdict(
        [
            (error < 1e-3, f"max error vs linear profile {error:.2e}"),
            (abs(middle - 33.5) < 1e-3, f"midpoint {middle:.5f}"),
            (np.all(surface_profile(grid) == 30.0), "dirichlet surface profile is not the imposed value"),
        ],
        "Laplace slab reproduces the linear profile.",
    )


def _parabolic_error(resolution: float) -> float:
    q, k, length = 5000.0, 0.5, 0.02
    grid = solve_steady(build_grid(_slab(length, q, k), resolution=resolution, width=0.004, bc=DIRICHLET_37_37), tol=1e-10)
    y = _depths(grid)
    exact = 37.0 + q * y * (length - y) / (2.0 * k)
    return float(np.max(np.abs(grid.T - exact[:, None])))


def _parabolic_slab(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    q, k, length = 5000.0, 0.5, 0.02
    grid = solve_steady(build_grid(_slab(length, q, k), resolution=0.0005, width=0.004, bc=DIRICHLET_37_37), tol=1e-10)
    column = grid.T[:, 0]
    peak_depth = _depths(grid)[int(np.argmax(column))]
    excess = q * length**2 / (8.0 * k)
    return verdict(
        [
            (abs(peak_depth - length / 2) <= grid.dy, f"peak at depth {peak_depth * 1e3:.2f} mm"),
            (abs(column.max() - 37.0 - excess) / excess < 1e-2, f"peak excess {column.max() - 37.0:.5f} vs {excess}"),
            (_parabolic_error(0.0005) / 37.0 < 1e-3, "relative error above 1e-3"),
        ],
        "Uniform source between equal walls gives the parabolic excess.",
    )


def _grid_convergence(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    errors = [_parabolic_error(h) for h in (0.002, 0.001, 0.0005)]
    ratios = [errors[0] / errors[1], errors[1] / errors[2]]
    return verdict(
        [(all(3.5 < r < 4.5 for r in ratios), f"error ratios {ratios} for errors {errors}")],
        "Halving the cell size cuts the error about fourfold.",
    )


def _maximum_principle(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    layers = (
        TissueLayer("upper", 0.006, 2674.0, 0.21, 930.0),
        TissueLayer("lower", 0.014, 3770.0, 0.48, 1050.0),
    )
    bc = BoundaryConditions(core_temperature=37.0, surface=SurfaceMode.DIRICHLET, surface_temperature=21.0)
    grid = solve_steady(build_grid(layers, resolution=0.001, width=0.004, bc=bc), tol=1e-9)
    column = grid.T[:, 0]
    return verdict(
        [
            (column.min() >= 21.0 - 1e-9 and column.max() <= 37.0 + 1e-9, f"range [{column.min()}, {column.max()}]"),
            (bool(np.all(np.diff(column) > 0)), "profile is not monotone in depth"),
            (np.allclose(grid.T, column[:, None]), "stratified slab developed lateral variation"),
        ],
        "Source-free steady field stays within the boundary values.",
    )


def _source_comparison(inputs: Mapping[str, Any]) -> bool:
    cold = solve_steady(build_grid(_slab(q=0.0), resolution=0.001, width=0.004), tol=1e-9)
    warm = solve_steady(build_grid(_slab(q=1000.0), resolution=0.001, width=0.004), tol=1e-9)
    return bool(np.all(warm.T >= cold.T - 1e-9))


def _energy_residual(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    tol = 1e-7
    grid = solve_steady(build_grid(_slab(q=2000.0), resolution=0.001, width=0.004), tol=tol)
    per_cell = energy_residual(grid) * grid.dt / float(grid.heat_capacity().max())
    return verdict(
        [
            (per_cell < 10 * tol, f"residual {per_cell:.2e} K per step"),
            (grid.iterations > 0 and grid.residual < tol, "convergence bookkeeping missing"),
        ],
        "Energy residual at convergence is within 10 tol per cell.",
    )


def _layered_grid(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    plain = build_grid(BREAST_LAYERS, resolution=1e-4, width=0.01)
    tumor = build_grid(BREAST_LAYERS, TumorSpec(0.010, 0.005, 0.010), resolution=1e-4, width=0.01)
    cells = tumor.tumor_cells()
    expected = np.pi * 25e-6 / 1e-8
    return verdict(
        [
            (plain.ny == 650, f"{plain.ny} depth cells"),
            (len(np.unique(plain.material)) <= 6, "more than six materials without a tumor"),
            (abs(cells - expected) / expected < 0.02, f"{cells} tumor cells vs {expected:.0f}"),
            (np.all(plain.T == 37.0), "initial field is not the core temperature"),
        ],
        "Breast layers resolve to 65 mm of cells with a circular tumor override.",
    )


def _tumor_outside(inputs: Mapping[str, Any]) -> None:
    build_grid(BREAST_LAYERS, TumorSpec(0.062, 0.03, 0.010), resolution=0.001)


def _tumor_in_skin(inputs: Mapping[str, Any]) -> None:
    build_grid(BREAST_LAYERS, TumorSpec(0.004, 0.03, 0.008), resolution=0.001)


def _bad_resolution(inputs: Mapping[str, Any]) -> None:
    build_grid(BREAST_LAYERS, resolution=0.0)


def _no_convergence(inputs: Mapping[str, Any]) -> None:
    solve_steady(build_grid(_slab(), resolution=0.001, width=0.004, bc=DIRICHLET_37_30), tol=1e-9, max_iters=5)


def _surface_with(tumor: Optional[TumorSpec]) -> np.ndarray:
    grid = build_grid(BREAST_LAYERS, tumor, resolution=0.002, width=0.04)
    return surface_profile(solve_steady(grid, tol=1e-6))


def _tumor_differential(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    healthy = _surface_with(None)
    shallow = _surface_with(TumorSpec(0.010, 0.020, 0.010)) - healthy
    deep = _surface_with(TumorSpec(0.025, 0.020, 0.010)) - healthy
    above = 10
    return verdict(
        [
            (shallow[above] > 0.0, f"shallow differential above the tumor {shallow[above]:.4f} K"),
            (shallow.max() < 5.0, f"implausible differential {shallow.max():.3f} K"),
            (deep.max() < shallow.max(), f"deep {deep.max():.4f} K vs shallow {shallow.max():.4f} K"),
            (int(np.argmax(shallow)) in (9, 10), f"hot spot at column {int(np.argmax(shallow))}"),
        ],
        "A shallow tumor warms the skin above it more than a deep one.",
    )


SMALL_PARAMS = SyntheticParams(resolution=0.002, width=0.04, out_size=(16, 20), images_per_patient=2, tol=1e-5)


def _synthetic_set(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    records = generate_synthetic_set(2, 2, params=SMALL_PARAMS, seed=3)
    again = generate_synthetic_set(2, 2, params=SMALL_PARAMS, seed=3)
    shapes = {t.shape for r in records for t in r.thermograms}
    same = all(
        np.array_equal(a.matrix, b.matrix)
        for r, s in zip(records, again)
        for a, b in zip(r.thermograms, s.thermograms)
    )
    return verdict(
        [
            ([r.label for r in records] == [0, 0, 1, 1], f"labels {[r.label for r in records]}"),
            (shapes == {(16, 20)}, f"image shapes {shapes}"),
            (all(len(r.thermograms) == 2 for r in records), "wrong images per patient"),
            (same, "same seed gave different images"),
            (all(("tumor" in r.meta) == (r.label == 1) for r in records), "tumor metadata does not follow the label"),
        ],
        "Balanced, labelled and reproducible synthetic patients.",
    )


def _synthetic_round_trip(inputs: Mapping[str, Any]) -> Tuple[str, str]:
    records = generate_synthetic_set(1, 1, params=SMALL_PARAMS, seed=0)
    root = inputs["tmp_path"] / "synthetic"
    dirs = write_synthetic_records(records, root)
    loaded = load_thermal_directory(root)
    written = {p.parent.name for p in dirs}
    return verdict(
        [
            (written == {"healthy", "sick"}, f"class directories {written}"),
            (all((d / "sim.json").is_file() and (d / "mask.txt").is_file() for d in dirs), "sidecar files missing"),
            (sorted(r.patient_id for r in loaded) == sorted(r.patient_id for r in records), "patients did not reload"),
            (all(r.mask is not None and len(r.thermograms) == 2 for r in loaded), "reloaded records incomplete"),
        ],
        "Synthetic patients land in the layout the thermal loader reads.",
    )


def get_test_cases() -> List[ScenarioCase]:
    return [
        ScenarioCase("linear slab", GROUP, _linear_slab, validator=_checks),
        ScenarioCase("parabolic source slab", GROUP, _parabolic_slab, validator=_checks),
        ScenarioCase("second-order grid convergence", GROUP, _grid_convergence, validator=_checks),
        ScenarioCase("maximum principle", GROUP, _maximum_principle, validator=_checks),
        ScenarioCase("source never cools", GROUP, _source_comparison),
        ScenarioCase("energy residual at convergence", GROUP, _energy_residual, validator=_checks),
        ScenarioCase("layered breast grid", GROUP, _layered_grid, validator=_checks),
        ScenarioCase("tumor outside domain", GROUP, _tumor_outside, expect_error=GeometryError),
        ScenarioCase("tumor outside host tissue", GROUP, _tumor_in_skin, expect_error=GeometryError),
        ScenarioCase("non-positive resolution", GROUP, _bad_resolution, expect_error=GeometryError),
        ScenarioCase("solver iteration cap", GROUP, _no_convergence, expect_error=SolverError),
        ScenarioCase("tumor surface differential", GROUP, _tumor_differential, validator=_checks),
        ScenarioCase("synthetic set", GROUP, _synthetic_set, validator=_checks),
        ScenarioCase("synthetic set on disk", GROUP, _synthetic_round_trip, validator=_checks),
    ]
