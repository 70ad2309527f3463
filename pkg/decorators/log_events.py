"""
Function-level event logging for pipeline operations:
- logs start (DEBUG, with a per-call id)
- logs success (DEBUG, with duration)
- logs failure (ERROR, with exception type), then re-raises
Message templates may use {id}, {name}, {duration_ms}, {result}, {exception}.
"""

import time
import uuid
from functools import wraps

from core.logger import logger


def _summarize(value) -> str:
    shape = getattr(value, "shape", None)
    if shape is not None:
        return f"<{type(value).__name__} shape={tuple(shape)}>"
    if isinstance(value, (list, tuple)):
        return f"<{type(value).__name__} len={len(value)}>"
    text = repr(value)
    return text if len(text) <= 120 else text[:117] + "..."


def log_events(
    name: str | None = None,
    *,
    on_start: str | None = None,
    on_success: str | None = None,
    on_failure: str | None = None,
):
    """
    Decorator to log function start, success, failure.
    Adds a unique ID per call for tracing. Arguments are not logged
    (datasets and image stacks are large); results are summarized.
    """
    def decorator(fn):
        @wraps(fn)
        def wrapper(*args, **kwargs):
            entry_id = uuid.uuid4().hex[:8]
            entry = name or fn.__name__

            try:
                msg = on_start.format(id=entry_id, name=entry) if on_start else None
            except Exception:
                msg = None
            logger.debug(msg or f"[{entry}] START id={entry_id}")

            start = time.perf_counter()
            try:
                result = fn(*args, **kwargs)
            except Exception as exc:
                duration_ms = (time.perf_counter() - start) * 1000
                default = (
                    f"[{entry}] END (FAILED) id={entry_id} duration={duration_ms:.2f}ms "
                    f"error={type(exc).__name__}: {exc}"
                )
                try:
                    msg = (
                        on_failure.format(id=entry_id, name=entry, exception=exc, duration_ms=f"{duration_ms:.2f}")
                        if on_failure
                        else default
                    )
                except Exception:
                    msg = default
                logger.error(msg)
                raise

            duration_ms = (time.perf_counter() - start) * 1000
            default = (
                f"[{entry}] END (success) id={entry_id} duration={duration_ms:.2f}ms "
                f"result={_summarize(result)}"
            )
            try:
                msg = (
                    on_success.format(
                        id=entry_id, name=entry, result=_summarize(result), duration_ms=f"{duration_ms:.2f}"
                    )
                    if on_success
                    else default
                )
            except Exception:
                msg = default
            logger.debug(msg)
            return result

        return wrapper
    return decorator
