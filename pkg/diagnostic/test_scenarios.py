"""Run every diagnostic scenario under pytest."""
from __future__ import annotations

import pytest

from diagnostic.environments import load_environment_cases
from diagnostic.framework import ScenarioExecutor

CASES = load_environment_cases()


@pytest.mark.parametrize("name", sorted(CASES), ids=lambda n: n.replace(" ", "_"))
def test_scenario(name: str) -> None:
    status, message, _result, _inputs = CASES[name].execute(ScenarioExecutor())
    if status == "skip":
        pytest.skip(message)
    assert status == "passed", f"[{status}] {message}"
