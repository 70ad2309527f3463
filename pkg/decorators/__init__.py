"""Cross-cutting decorators: ``log_events`` call logging and ``profile`` command timing."""
from .log_events import log_events
from .profiler import profile, profiler

__all__ = ["log_events", "profile", "profiler"]
