# -*- coding: utf-8 -*-
"""
core.hpo.history

Append-only trial log, persisted as JSON lines (one trial per line) so an
interrupted search can be resumed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from core.exceptions import HpoError
from core.hpo.space import Params, SearchSpace
from core.logger import logger


class TrialStatus(str, Enum):
    OK = "ok"
    FAILED = "failed"


@dataclass(frozen=True)
class Trial:
    index: int
    params: Params
    loss: Optional[float]
    status: TrialStatus
    duration_ms: float = 0.0
    error: str = ""

    def __post_init__(self) -> None:
        if self.status == TrialStatus.OK and (self.loss is None or not math.isfinite(self.loss)):
            raise HpoError(f"ok trial {self.index} needs a finite loss, got {self.loss}")

    @property
    def ok(self) -> bool:
        return self.status == TrialStatus.OK

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "params": self.params,
            "loss": self.loss,
            "status": self.status.value,
            "duration_ms": round(self.duration_ms, 3),
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Trial":
        return cls(
            index=int(data["index"]),
            params=dict(data["params"]),
            loss=None if data.get("loss") is None else float(data["loss"]),
            status=TrialStatus(data["status"]),
            duration_ms=float(data.get("duration_ms", 0.0)),
            error=data.get("error", ""),
        )


@dataclass
class TrialHistory:
    space: SearchSpace
    seed: int
    trials: List[Trial] = field(default_factory=list)
    path: Optional[Path] = None

    def __len__(self) -> int:
        return len(self.trials)

    def append(self, trial: Trial) -> None:
        if trial.index != len(self.trials):
            raise HpoError(f"trial index {trial.index} does not follow {len(self.trials)} recorded trials")
        self.trials.append(trial)
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as f:
                f.write(json.dumps(trial.to_dict()) + "\n")

    def ok_trials(self) -> List[Trial]:
        return [t for t in self.trials if t.ok]

    def best(self) -> Optional[Trial]:
        ok = self.ok_trials()
        return min(ok, key=lambda t: (t.loss, t.index)) if ok else None

    @classmethod
    def load(cls, path: str | Path, space: SearchSpace, seed: int) -> "TrialHistory":
        """Replay a JSON-lines log; new trials are appended to the same file."""
        path = Path(path)
        history = cls(space, seed, path=None)
        if path.exists():
            for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
                if not line.strip():
                    continue
                try:
                    history.append(Trial.from_dict(json.loads(line)))
                except (json.JSONDecodeError, KeyError, ValueError) as e:
                    raise HpoError(f"{path}:{lineno}: unreadable trial ({e})") from e
            logger.info(f"[HPO] resumed {len(history)} trials from {path}")
        history.path = path
        return history


def top_k(history: TrialHistory, k: int) -> List[Trial]:
    """The ``k`` lowest-loss ok trials, earlier index first on ties."""
    if k < 1:
        raise HpoError(f"k must be >= 1, got {k}")
    ok = history.ok_trials()
    if not ok:
        raise HpoError("history has no successful trials")
    return sorted(ok, key=lambda t: (t.loss, t.index))[:k]


def running_best(history: TrialHistory) -> List[Optional[float]]:
    """Best ok loss seen up to each trial (None before the first ok trial)."""
    out: List[Optional[float]] = []
    best: Optional[float] = None
    for t in history.trials:
        if t.ok and (best is None or t.loss < best):
            best = t.loss
        out.append(best)
    return out
