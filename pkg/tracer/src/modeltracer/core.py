"""Runtime call interception and JSONL emission.

The target script runs under ``sys.setprofile``; every Python-level call
into a filter-matched module yields one record with the runtime types of its
positional arguments and return value.  Compiled (C-level) calls and
synthetic frames (modules, lambdas, comprehensions) are not recorded.  A
call unwound by an exception records its return type as the type of None,
since the interpreter reports no return value for it.

Only single-threaded targets are supported: a script that leaves new threads
running is rejected after the fact.
"""

from __future__ import annotations

import json
import sys
import threading
from dataclasses import dataclass, field

from .fingerprints import fingerprint_for_value
from .naming import canonical_function_name, canonical_type_name

MAIN_MODULE = "__main__"


class TracerError(Exception):
    """Base class for tracer failures."""


class ScriptError(TracerError):
    """The target script raised; the partial trace was flushed with a footer."""

    def __init__(self, message: str, cause: BaseException):
        super().__init__(message)
        self.cause = cause


class RecordCapExceeded(TracerError):
    """The record cap was hit; the truncated trace was still written."""


class ConcurrentTargetError(TracerError):
    """The target script spawned threads; only single-threaded scripts trace."""


@dataclass(frozen=True)
class TracerConfig:
    script: str
    output: str
    include: tuple[str, ...] = ()
    exclude: tuple[str, ...] = ()
    fingerprints: bool = False
    max_records: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "include", tuple(self.include))
        object.__setattr__(self, "exclude", tuple(self.exclude))
        overlap = set(self.include) & set(self.exclude)
        if overlap:
            raise ValueError(f"include and exclude filters overlap: {sorted(overlap)}")
        if self.max_records is not None and self.max_records < 0:
            raise ValueError("max_records must be nonnegative")


def _module_matches(module: str, filters: tuple[str, ...]) -> bool:
    return any(module == f or module.startswith(f + ".") for f in filters)


@dataclass
class _Recorder:
    config: TracerConfig
    records: list = field(default_factory=list)
    truncated: bool = False
    _pending: dict = field(default_factory=dict)

    def _eligible(self, frame) -> bool:
        code = frame.f_code
        if code.co_name.startswith("<"):
            return False
        module = frame.f_globals.get("__name__", "")
        if module.startswith("modeltracer"):
            return False
        if _module_matches(module, self.config.exclude):
            return False
        return module == MAIN_MODULE or _module_matches(module, self.config.include)

    def _argument_values(self, frame) -> list:
        code = frame.f_code
        names = code.co_varnames[: code.co_argcount]
        values = [frame.f_locals[name] for name in names if name in frame.f_locals]
        if code.co_flags & 0x04:  # CO_VARARGS
            varargs = frame.f_locals.get(code.co_varnames[code.co_argcount])
            if isinstance(varargs, tuple):
                values.extend(varargs)
        return values

    def _function_name(self, frame) -> str:
        code = frame.f_code
        module = frame.f_globals.get("__name__", "")
        class_name = None
        names = code.co_varnames[: code.co_argcount]
        if names and names[0] in ("self", "cls"):
            first = frame.f_locals.get(names[0])
            if first is not None:
                klass = first if isinstance(first, type) else type(first)
                if code.co_name in vars(klass) or any(
                    code.co_name in vars(base) for base in klass.__mro__
                ):
                    class_name = klass.__qualname__
        return canonical_function_name(module, code.co_name, class_name)

    def __call__(self, frame, event, arg):
        if event == "call":
            if not self._eligible(frame):
                return
            values = self._argument_values(frame)
            entry = {
                "fn": self._function_name(frame),
                "args": [canonical_type_name(v) for v in values],
            }
            if self.config.fingerprints:
                entry["afp"] = [fingerprint_for_value(v) for v in values]
            self._pending[frame] = entry
        elif event == "return":
            entry = self._pending.pop(frame, None)
            if entry is None:
                return
            if self.truncated:
                return
            cap = self.config.max_records
            if cap is not None and len(self.records) >= cap:
                self.truncated = True
                return
            record = {"fn": entry["fn"], "args": entry["args"], "ret": canonical_type_name(arg)}
            if self.config.fingerprints:
                record["afp"] = entry["afp"]
                record["rfp"] = fingerprint_for_value(arg)
            self.records.append(record)


def _write_records(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


def trace_script(config: TracerConfig) -> str:
    """Run the target under interception and write its JSONL trace.

    Returns the output path.  Raises ScriptError when the target raises
    (partial trace plus an error footer record are still written),
    RecordCapExceeded when the cap truncates the trace, and
    ConcurrentTargetError when the target leaves threads running.
    """
    with open(config.script, encoding="utf-8") as fh:
        source = fh.read()
    code = compile(source, config.script, "exec")
    namespace = {
        "__name__": MAIN_MODULE,
        "__file__": config.script,
        "__builtins__": __builtins__,
    }
    recorder = _Recorder(config)
    threads_before = threading.active_count()
    failure: BaseException | None = None
    sys.setprofile(recorder)
    try:
        exec(code, namespace)
    except BaseException as exc:  # flushed below with a footer record
        failure = exc
    finally:
        sys.setprofile(None)

    if failure is not None:
        recorder.records.append(
            {"fn": "tracer.script_error", "args": [], "ret": canonical_type_name(failure)}
        )
        _write_records(recorder.records, config.output)
        raise ScriptError(
            f"{config.script} raised {type(failure).__name__}: {failure}", failure
        ) from failure

    _write_records(recorder.records, config.output)
    if threading.active_count() > threads_before:
        raise ConcurrentTargetError(
            f"{config.script} left background threads running; "
            "only single-threaded targets are supported"
        )
    if recorder.truncated:
        raise RecordCapExceeded(
            f"record cap {config.max_records} reached; trace truncated"
        )
    return config.output
