"""Scenario definitions, one module per area of the toolkit."""
from __future__ import annotations

from importlib import import_module
from pathlib import Path
from typing import Dict

from diagnostic.framework import ScenarioCase


def load_environment_cases() -> Dict[str, ScenarioCase]:
    """Discover and load every scenario, keyed by name."""
    package_dir = Path(__file__).parent
    cases: Dict[str, ScenarioCase] = {}

    for module_path in sorted(package_dir.glob("*.py")):
        if module_path.name.startswith("_"):
            continue

        module_name = f"{__name__}.{module_path.stem}"
        module = import_module(module_name)
        get_cases = getattr(module, "get_test_cases", None)
        if callable(get_cases):
            for testcase in get_cases():
                if testcase.name in cases:
                    raise ValueError(f"duplicate scenario name '{testcase.name}' in {module_name}")
                cases[testcase.name] = testcase

    return cases
