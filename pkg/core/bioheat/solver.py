# -*- coding: utf-8 -*-
"""
core.bioheat.solver

Explicit finite-volume marching of the Pennes bioheat equation to steady
state on a :class:`SimGrid`.

    rho c dT/dt = div(k grad T) + rho_b c_b w_b (T_b - T) + Q

Cells are centered; face conductivities between unlike materials use the
harmonic mean. Dirichlet faces sit half a cell from the last center and the
convective surface adds the film resistance 1/h in series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from core.bioheat.tissue import SimGrid, SurfaceMode
from core.exceptions import SolverError
from core.logger import logger
from decorators import log_events

DT_SAFETY = 0.9


def _harmonic(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return 2.0 * a * b / (a + b)


@dataclass(frozen=True, eq=False)
class _Operator:
    """Per-volume conductances (W/(m³ K)) for every face of the grid."""

    g_vertical: np.ndarray  # between rows i and i+1, shape (ny-1, nx)
    g_lateral: np.ndarray  # between cols j and j+1, shape (ny, nx-1)
    g_top: np.ndarray  # surface face, shape (nx,)
    g_bottom: np.ndarray  # core face, shape (nx,)
    top_reference: float
    perfusion: np.ndarray
    source: np.ndarray
    capacity: np.ndarray
    core: float
    blood_temperature: float

    def rate(self, T: np.ndarray) -> np.ndarray:
        """Net volumetric heating (W/m³) of every cell."""
        net = self.perfusion * (self.blood_temperature - T) + self.source
        fv = self.g_vertical * (T[1:, :] - T[:-1, :])
        net[:-1, :] += fv
        net[1:, :] -= fv
        fh = self.g_lateral * (T[:, 1:] - T[:, :-1])
        net[:, :-1] += fh
        net[:, 1:] -= fh
        net[0, :] += self.g_top * (self.top_reference - T[0, :])
        net[-1, :] += self.g_bottom * (self.core - T[-1, :])
        return net

    def diagonal(self) -> np.ndarray:
        """Sum of all conductances plus perfusion touching each cell."""
        diag = self.perfusion.copy()
        diag[:-1, :] += self.g_vertical
        diag[1:, :] += self.g_vertical
        diag[:, :-1] += self.g_lateral
        diag[:, 1:] += self.g_lateral
        diag[0, :] += self.g_top
        diag[-1, :] += self.g_bottom
        return diag


def surface_conductance(grid: SimGrid) -> np.ndarray:
    """W/(m² K) from the top cell centers to the reference temperature."""
    k_top = grid.property_map("conductivity")[0, :]
    if grid.bc.surface is SurfaceMode.CONVECTIVE:
        return 1.0 / (grid.dy / (2.0 * k_top) + 1.0 / grid.bc.htc)
    return 2.0 * k_top / grid.dy


def build_operator(grid: SimGrid) -> _Operator:
    k = grid.property_map("conductivity")
    dx, dy = grid.dx, grid.dy
    top_reference = grid.bc.ambient if grid.bc.surface is SurfaceMode.CONVECTIVE else grid.bc.surface_temperature
    return _Operator(
        g_vertical=_harmonic(k[:-1, :], k[1:, :]) / dy**2,
        g_lateral=_harmonic(k[:, :-1], k[:, 1:]) / dx**2,
        g_top=surface_conductance(grid) / dy,
        g_bottom=2.0 * k[-1, :] / dy**2,
        top_reference=top_reference,
        perfusion=grid.perfusion_coefficient(),
        source=grid.property_map("metabolic_q"),
        capacity=grid.heat_capacity(),
        core=grid.bc.core_temperature,
        blood_temperature=grid.blood.temperature,
    )


def stable_time_step(grid: SimGrid) -> float:
    """The diffusion limit min(rho c) h²/(4 max k), tightened so every
    explicit update stays a convex combination of its neighbors."""
    op = build_operator(grid)
    k = grid.property_map("conductivity")
    diffusion = op.capacity.min() * min(grid.dx, grid.dy) ** 2 / (4.0 * k.max())
    positivity = float(np.min(op.capacity / op.diagonal()))
    return DT_SAFETY * min(diffusion, positivity)


@log_events("solve_steady")
def solve_steady(grid: SimGrid, tol: float = 1.0e-6, max_iters: int = 200_000) -> SimGrid:
    """March until the largest per-step change drops below ``tol`` (K).

    Returns a new grid; the input is left untouched.
    """
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    op = build_operator(grid)
    dt = stable_time_step(grid)
    scale = dt / op.capacity
    T = grid.T.copy()

    change = float("inf")
    for it in range(1, max_iters + 1):
        delta = scale * op.rate(T)
        T += delta
        change = float(np.max(np.abs(delta)))
        if not np.isfinite(change):
            raise SolverError("temperature field diverged", residual=change, iterations=it)
        if change < tol:
            out = grid.copy()
            out.T = T
            out.iterations = it
            out.dt = dt
            out.residual = change
            logger.debug(f"[Bioheat] converged in {it} steps (dt={dt:.3g}s, max dT={change:.2e}K)")
            return out
    raise SolverError("steady state not reached", residual=change, iterations=max_iters)


def surface_profile(grid: SimGrid) -> np.ndarray:
    """Skin-surface face temperature of every lateral column."""
    T0 = grid.T[0, :]
    if grid.bc.surface is SurfaceMode.DIRICHLET:
        return np.full(grid.nx, grid.bc.surface_temperature)
    k_top = grid.property_map("conductivity")[0, :]
    flux = surface_conductance(grid) * (T0 - grid.bc.ambient)
    return T0 - flux * grid.dy / (2.0 * k_top)


def energy_residual(grid: SimGrid) -> float:
    """Largest |div(flux) + sources| over the cells, W/m³."""
    return float(np.max(np.abs(build_operator(grid).rate(grid.T))))
