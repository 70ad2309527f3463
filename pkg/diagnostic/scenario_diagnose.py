"""Diagnostic runner for the toolkit's scenario checks."""
from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional

if __package__ is None or __package__ == "":
    current_dir = Path(__file__).resolve().parent
    project_root = current_dir.parent
    if str(project_root) not in sys.path:
        sys.path.insert(0, str(project_root))

from diagnostic.environments import load_environment_cases
from diagnostic.framework import ExecutionResult, ScenarioCase, ScenarioExecutor, slugify

LOG_DIR = Path("diagnostic/logs/scenarios")


def _ensure_log_dir() -> None:
    LOG_DIR.mkdir(parents=True, exist_ok=True)


def _jsonify(obj: Any) -> Any:
    """Return *obj* in a JSON-serializable form."""
    try:
        json.dumps(obj)
        return obj
    except TypeError:
        return json.loads(json.dumps(obj, default=str))


class DiagnosticRecord:
    def __init__(
        self,
        *,
        scenario: str,
        group: str,
        status: str,
        message: str,
        input_data: Mapping[str, Any],
        result: ExecutionResult,
        timestamp: datetime,
    ) -> None:
        self.scenario = scenario
        self.group = group
        self.status = status
        self.message = message
        self.input_data = input_data
        self.result = result
        self.timestamp = timestamp

    def to_json(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario,
            "group": self.group,
            "status": self.status,
            "message": self.message,
            "input": _jsonify({k: v for k, v in self.input_data.items() if k != "tmp_path"}),
            "output": _jsonify(self.result.output),
            "stdout": self.result.stdout,
            "exception": str(self.result.exception) if self.result.exception else None,
            "traceback": self.result.traceback,
            "duration_ms": round(self.result.duration_ms, 3),
            "timestamp": self.timestamp.isoformat(),
        }


class ScenarioDiagnoser:
    def __init__(self, cases: Optional[Mapping[str, ScenarioCase]] = None) -> None:
        self.executor = ScenarioExecutor()
        self.testcases: Dict[str, ScenarioCase] = dict(cases) if cases is not None else load_environment_cases()

    def available_tests(self, group: Optional[str] = None) -> List[str]:
        return sorted(n for n, c in self.testcases.items() if group is None or c.group == group)

    def groups(self) -> List[str]:
        return sorted({c.group for c in self.testcases.values()})

    def run(self, names: Iterable[str], write_logs: bool = True) -> List[DiagnosticRecord]:
        if write_logs:
            _ensure_log_dir()
        records: List[DiagnosticRecord] = []

        for name in names:
            testcase = self.testcases.get(name)
            if not testcase:
                record = DiagnosticRecord(
                    scenario=name,
                    group="",
                    status="skip",
                    message="No diagnostic scenario with this name.",
                    input_data={},
                    result=ExecutionResult(output=None),
                    timestamp=datetime.now(timezone.utc),
                )
            else:
                status, message, result, used_input = testcase.execute(self.executor)
                record = DiagnosticRecord(
                    scenario=name,
                    group=testcase.group,
                    status=status,
                    message=message,
                    input_data=used_input,
                    result=result,
                    timestamp=datetime.now(timezone.utc),
                )
            if write_logs:
                self._write_record(record)
            records.append(record)

        return records

    def _write_record(self, record: DiagnosticRecord) -> None:
        slug = slugify(record.scenario)
        timestamp = record.timestamp.strftime("%Y%m%dT%H%M%S%f")
        path = LOG_DIR / f"{timestamp}_{slug}.log.json"
        path.write_text(json.dumps(record.to_json(), indent=2, ensure_ascii=False), encoding="utf-8")


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Run toolkit diagnostic scenarios.")
    parser.add_argument(
        "-s",
        "--scenario",
        dest="scenarios",
        action="append",
        help="Scenario name to run. Can be supplied multiple times.",
    )
    parser.add_argument(
        "-g",
        "--group",
        help="Run every scenario of one group (dataset, engineering, learners, ...).",
    )
    parser.add_argument(
        "--list",
        action="store_true",
        help="List available scenarios and exit.",
    )
    parser.add_argument(
        "--all",
        action="store_true",
        help="Run every scenario.",
    )
    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    diagnoser = ScenarioDiagnoser()

    if args.list:
        print("Available diagnostic scenarios:")
        for group in diagnoser.groups():
            print(f"[{group}]")
            for name in diagnoser.available_tests(group):
                print(f" - {name}")
        return 0

    if args.scenarios:
        names = args.scenarios
    elif args.group:
        names = diagnoser.available_tests(args.group)
    else:
        names = diagnoser.available_tests()

    records = diagnoser.run(names)

    summary_lines = ["Diagnostic summary:"]
    for record in records:
        summary_lines.append(f" - {record.scenario}: {record.status} - {record.message.splitlines()[0] if record.message else ''}")
    counts: Dict[str, int] = {}
    for record in records:
        counts[record.status] = counts.get(record.status, 0) + 1
    summary_lines.append(", ".join(f"{k}: {v}" for k, v in sorted(counts.items())))

    print("\n".join(summary_lines))
    failures = [r for r in records if r.status in {"error", "incorrect result"}]
    return 1 if failures else 0


if __name__ == "__main__":  # pragma: no cover - CLI entrypoint
    sys.exit(main())
