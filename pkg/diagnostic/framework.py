"""Common utilities for the diagnostic scenario harness."""
from __future__ import annotations

import dataclasses
import io
import re
import sys
import time
import traceback
from pathlib import Path
from tempfile import TemporaryDirectory
from typing import Any, Callable, Dict, Iterable, Mapping, Optional, Tuple, Type

__all__ = [
    "ExecutionResult",
    "ScenarioExecutor",
    "PreparedEnv",
    "ScenarioCase",
    "slugify",
    "verdict",
]

PASSED = "passed"
INCORRECT = "incorrect result"
ERROR = "error"
SKIP = "skip"


def slugify(value: str) -> str:
    """Return a filesystem-friendly slug for *value*."""
    value = re.sub(r"[^A-Za-z0-9._-]+", "-", value)
    value = re.sub(r"-+", "-", value)
    return value.strip("-").lower() or "scenario"


def verdict(checks: Iterable[Tuple[bool, str]], ok_message: str) -> Tuple[str, str]:
    """``incorrect result`` with the first failing check's message, else ``passed``."""
    for ok, message in checks:
        if not ok:
            return INCORRECT, message
    return PASSED, ok_message


@dataclasses.dataclass
class ExecutionResult:
    output: Any
    stdout: str = ""
    exception: Optional[BaseException] = None
    traceback: Optional[str] = None
    duration_ms: float = 0.0

    def has_error(self) -> bool:
        return self.exception is not None


class ScenarioExecutor:
    """Runs a scenario callable, capturing stdout, exceptions and wall time."""

    def execute(self, run: Callable[[Mapping[str, Any]], Any], inputs: Mapping[str, Any]) -> ExecutionResult:
        old_stdout = sys.stdout
        buffer = io.StringIO()
        start = time.perf_counter()
        sys.stdout = buffer
        try:
            output = run(inputs)
            return ExecutionResult(
                output=output,
                stdout=buffer.getvalue().strip(),
                duration_ms=(time.perf_counter() - start) * 1000.0,
            )
        except Exception as exc:  # noqa: BLE001 - reported as a scenario outcome
            return ExecutionResult(
                output=None,
                stdout=buffer.getvalue().strip(),
                exception=exc,
                traceback=traceback.format_exc(),
                duration_ms=(time.perf_counter() - start) * 1000.0,
            )
        finally:
            sys.stdout = old_stdout


@dataclasses.dataclass
class PreparedEnv:
    inputs: Mapping[str, Any] = dataclasses.field(default_factory=dict)
    context: Mapping[str, Any] = dataclasses.field(default_factory=dict)
    skip_reason: Optional[str] = None


Validator = Callable[[ExecutionResult, Mapping[str, Any], Mapping[str, Any]], Tuple[str, str]]


@dataclasses.dataclass
class ScenarioCase:
    """One named check.

    ``prepare`` builds fixtures inside a fresh temporary directory,
    ``run`` exercises the code under test and ``validator`` judges the
    output. With ``expect_error`` set, the scenario passes only when
    ``run`` raises that exception type.
    """

    name: str
    group: str
    run: Callable[[Mapping[str, Any]], Any]
    prepare: Optional[Callable[[Path], PreparedEnv]] = None
    validator: Optional[Validator] = None
    expect_error: Optional[Type[BaseException]] = None
    skip_reason: Optional[str] = None

    def execute(self, executor: ScenarioExecutor) -> Tuple[str, str, ExecutionResult, Mapping[str, Any]]:
        if self.skip_reason:
            return SKIP, self.skip_reason, ExecutionResult(output=None), {}

        with TemporaryDirectory(prefix=f"scenario-{slugify(self.name)}-") as tmp_dir:
            tmp_path = Path(tmp_dir)
            prepared = PreparedEnv()
            if self.prepare:
                try:
                    prepared = self.prepare(tmp_path)
                except Exception as exc:  # noqa: BLE001 - fixture failures are scenario errors
                    result = ExecutionResult(output=None, exception=exc, traceback=traceback.format_exc())
                    return ERROR, f"Fixture preparation failed: {exc}", result, {}
            if prepared.skip_reason:
                return SKIP, prepared.skip_reason, ExecutionResult(output=None), {}

            inputs: Dict[str, Any] = {"tmp_path": tmp_path, **dict(prepared.inputs)}
            result = executor.execute(self.run, inputs)

            if self.expect_error is not None:
                if isinstance(result.exception, self.expect_error):
                    if self.validator:
                        return (*self.validator(result, inputs, prepared.context), result, inputs)
                    return PASSED, f"Raised {type(result.exception).__name__}: {result.exception}", result, inputs
                if result.has_error():
                    return ERROR, f"Expected {self.expect_error.__name__}, got:\n{result.traceback}", result, inputs
                return INCORRECT, f"Expected {self.expect_error.__name__}, nothing was raised.", result, inputs

            if result.has_error():
                return ERROR, f"Scenario raised an exception.\n{(result.traceback or '').strip()}", result, inputs

            if self.validator:
                status, message = self.validator(result, inputs, prepared.context)
            else:
                status, message = self._default_validator(result)
            return status, message, result, inputs

    @staticmethod
    def _default_validator(result: ExecutionResult) -> Tuple[str, str]:
        if result.output is True:
            return PASSED, "Check held."
        if result.output is False:
            return INCORRECT, "Check failed."
        if result.output is not None:
            return PASSED, "Scenario produced output."
        return INCORRECT, "Scenario produced no output."
