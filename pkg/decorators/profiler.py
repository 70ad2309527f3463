"""
Command profiler. Each profiled CLI command appends one record (wall time,
CPU share, resident memory and its growth over the call) to ``profile.json`` in the
active run directory.
"""
from __future__ import annotations

import json
import threading
import time
from dataclasses import asdict, dataclass, field
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import psutil

from core.config import LOGS_ROOT
from core.logger import logger


@dataclass
class ProfileRecord:
    command: str
    started_at: float
    duration_ms: float
    cpu_percent: float
    rss_mb: float
    rss_delta_mb: float
    ok: bool
    meta: Dict[str, Any] = field(default_factory=dict)


class Profiler:
    def __init__(self, default_dir: Optional[Path] = None):
        self._lock = threading.Lock()
        self._default_dir = Path(default_dir) if default_dir else LOGS_ROOT
        self.path: Optional[Path] = None
        self._process = psutil.Process()

    def set_output_dir(self, directory: Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.path = directory / "profile.json"

    def records(self) -> List[Dict[str, Any]]:
        if self.path is None or not self.path.exists():
            return []
        try:
            return json.loads(self.path.read_text(encoding="utf-8"))
        except ValueError:
            logger.warning(f"[PROFILE] unreadable {self.path}; starting a new file")
            return []

    def rss_mb(self) -> float:
        return self._process.memory_info().rss / 1e6

    def cpu_percent(self) -> float:
        # first call primes psutil and returns 0.0
        return self._process.cpu_percent(interval=None)

    def record(self, entry: ProfileRecord) -> None:
        if self.path is None:
            self.set_output_dir(self._default_dir)
        with self._lock:
            data = self.records()
            data.append(asdict(entry))
            self.path.write_text(json.dumps(data, indent=2), encoding="utf-8")
        logger.debug(f"[PROFILE] {entry.command} took {entry.duration_ms:.1f} ms")


profiler = Profiler()


def profile(command: Optional[str] = None, meta_fn: Optional[Callable[..., Dict[str, Any]]] = None):
    """Profile a command function; the record is written even when it raises."""

    def wrapper(fn):
        name = command or fn.__name__

        @wraps(fn)
        def inner(*args, **kwargs):
            started = time.time()
            t0 = time.perf_counter()
            rss0 = profiler.rss_mb()
            profiler.cpu_percent()
            result, ok = None, False
            try:
                result = fn(*args, **kwargs)
                ok = True
                return result
            finally:
                rss = profiler.rss_mb()
                profiler.record(
                    ProfileRecord(
                        command=name,
                        started_at=started,
                        duration_ms=round((time.perf_counter() - t0) * 1000, 3),
                        cpu_percent=profiler.cpu_percent(),
                        rss_mb=round(rss, 3),
                        rss_delta_mb=round(rss - rss0, 3),
                        ok=ok,
                        meta=meta_fn(result, *args, **kwargs) if meta_fn and ok else {},
                    )
                )

        return inner

    return wrapper
