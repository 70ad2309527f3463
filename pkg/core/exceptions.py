# -*- coding: utf-8 -*-
"""
core.exceptions

Exception hierarchy. Validation failures also derive from ValueError so
callers that only know the builtin can still catch them.
"""

from __future__ import annotations

from typing import Optional


class ThermoscanError(Exception):
    """Base class for every error raised by the toolkit."""


class DatasetError(ThermoscanError, ValueError):
    def __init__(self, message: str, *, row: Optional[int] = None, column: Optional[str] = None) -> None:
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        suffix = f" ({', '.join(location)})" if location else ""
        super().__init__(f"{message}{suffix}")
        self.row = row
        self.column = column


class EngineeringError(ThermoscanError, ValueError):
    pass


class AugmentationError(EngineeringError):
    pass


class ThermalDataError(ThermoscanError, ValueError):
    def __init__(self, message: str, *, line: Optional[int] = None) -> None:
        super().__init__(f"{message} (line {line})" if line is not None else message)
        self.line = line


class SolverError(ThermoscanError, RuntimeError):
    def __init__(self, message: str, *, residual: float, iterations: int) -> None:
        super().__init__(f"{message}: residual={residual:.3e} after {iterations} iterations")
        self.residual = residual
        self.iterations = iterations


class ModelError(ThermoscanError, ValueError):
    pass


class HpoError(ThermoscanError, ValueError):
    pass


class ConfigError(ThermoscanError, ValueError):
    def __init__(self, message: str, *, path: Optional[str] = None) -> None:
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class GeometryError(ThermoscanError, ValueError):
    """Invalid tissue geometry: tumor placement, resolution, domain size."""
