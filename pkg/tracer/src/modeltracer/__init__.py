"""Dynamic call tracer emitting typed JSONL execution traces."""

from .core import (
    ConcurrentTargetError,
    RecordCapExceeded,
    ScriptError,
    TracerConfig,
    TracerError,
    trace_script,
)
from .fingerprints import fingerprint_for_value, value_hash64
from .naming import canonical_function_name, canonical_type_name

__version__ = "0.1.0"

__all__ = [
    "ConcurrentTargetError",
    "RecordCapExceeded",
    "ScriptError",
    "TracerConfig",
    "TracerError",
    "canonical_function_name",
    "canonical_type_name",
    "fingerprint_for_value",
    "trace_script",
    "value_hash64",
]
