"""Typed execution traces.

A trace is the output of dynamic analysis: one record per observed function
call, carrying the runtime types of arguments and return value plus optional
value fingerprints (interval or hash evidence about the values that actually
flowed through the call).  Traces arrive as JSONL files; this module owns the
wire schema, strict ingestion, and fingerprint algebra.
"""

from __future__ import annotations

import json
import numbers
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .errors import KindMismatch, MalformedRecord

MAX_HASH_SAMPLES = 256

_UINT64_MAX = (1 << 64) - 1


class FingerprintKind(Enum):
    """What a fingerprint summarizes: scalar range, container length, or value hashes."""

    NUMERIC_INTERVAL = "num"
    LENGTH_INTERVAL = "len"
    HASH_SAMPLE = "hash"

    @property
    def is_interval(self) -> bool:
        return self is not FingerprintKind.HASH_SAMPLE


@dataclass(frozen=True)
class ValueFingerprint:
    """Evidence about the values observed at one call site.

    For interval kinds, [lo, hi] is the hull of observed scalars or container
    lengths.  For the hash kind, ``samples`` holds up to MAX_HASH_SAMPLES
    64-bit hashes of canonicalized values; lo/hi are carried verbatim.
    """

    kind: FingerprintKind
    lo: float = 0.0
    hi: float = 0.0
    samples: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "samples", frozenset(self.samples))
        if self.kind.is_interval:
            if self.lo > self.hi:
                raise ValueError(f"interval fingerprint with lo={self.lo} > hi={self.hi}")
            if self.samples:
                raise ValueError("interval fingerprint must not carry hash samples")
        else:
            if len(self.samples) > MAX_HASH_SAMPLES:
                raise ValueError(f"hash fingerprint exceeds {MAX_HASH_SAMPLES} samples")
            for s in self.samples:
                if not isinstance(s, int) or not (0 <= s <= _UINT64_MAX):
                    raise ValueError(f"hash sample {s!r} is not a uint64")


def numeric_interval(lo: float, hi: float) -> ValueFingerprint:
    return ValueFingerprint(FingerprintKind.NUMERIC_INTERVAL, lo, hi)


def length_interval(lo: int, hi: int) -> ValueFingerprint:
    return ValueFingerprint(FingerprintKind.LENGTH_INTERVAL, lo, hi)


def hash_sample(samples: Iterable[int], lo: float = 0.0, hi: float = 0.0) -> ValueFingerprint:
    return ValueFingerprint(FingerprintKind.HASH_SAMPLE, lo, hi, frozenset(samples))


def cap_samples(samples: Iterable[int]) -> frozenset[int]:
    """Deterministically cap a hash-sample set at MAX_HASH_SAMPLES entries.

    Keeps the numerically smallest hashes so that capping commutes with set
    union (the capped merge stays commutative and associative).
    """
    pool = frozenset(samples)
    if len(pool) <= MAX_HASH_SAMPLES:
        return pool
    return frozenset(sorted(pool)[:MAX_HASH_SAMPLES])


def merge_fingerprints(a: ValueFingerprint, b: ValueFingerprint) -> ValueFingerprint:
    """Pool the evidence of two same-kind fingerprints.

    Intervals merge to their hull; hash samples merge to their (capped) union.
    """
    if a.kind is not b.kind:
        raise KindMismatch(f"cannot merge {a.kind.value} with {b.kind.value}")
    if a.kind.is_interval:
        return ValueFingerprint(a.kind, min(a.lo, b.lo), max(a.hi, b.hi))
    return ValueFingerprint(
        a.kind, min(a.lo, b.lo), max(a.hi, b.hi), cap_samples(a.samples | b.samples)
    )


def fingerprints_disjoint(a: ValueFingerprint, b: ValueFingerprint) -> bool:
    """True when the observed evidence sets cannot intersect.

    Interval kinds use strict hull disjointness; hash kinds use empty sample
    intersection.  This is evidence, not proof: it under-approximates true
    range disjointness because only finitely many values were observed.
    """
    if a.kind is not b.kind:
        raise KindMismatch(f"cannot compare {a.kind.value} with {b.kind.value}")
    if a.kind.is_interval:
        return a.hi < b.lo or b.hi < a.lo
    return a.samples.isdisjoint(b.samples)


@dataclass(frozen=True)
class CallRecord:
    """One observed function invocation."""

    function_name: str
    arg_types: tuple[str, ...]
    return_type: str
    arg_fingerprints: tuple[ValueFingerprint, ...] | None = None
    return_fingerprint: ValueFingerprint | None = None
    sequence_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "arg_types", tuple(self.arg_types))
        if self.arg_fingerprints is not None:
            object.__setattr__(self, "arg_fingerprints", tuple(self.arg_fingerprints))
            if len(self.arg_fingerprints) != len(self.arg_types):
                raise ValueError(
                    f"{len(self.arg_types)} argument types but "
                    f"{len(self.arg_fingerprints)} fingerprints"
                )
        if self.sequence_index < 0:
            raise ValueError("sequence_index must be nonnegative")

    def signature(self) -> tuple[str, tuple[str, ...], str]:
        return (self.function_name, self.arg_types, self.return_type)


@dataclass(frozen=True)
class Trace:
    """An ordered, immutable collection of call records from one run."""

    records: tuple[CallRecord, ...] = ()
    source_label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        prev = -1
        for rec in self.records:
            if rec.sequence_index <= prev:
                raise ValueError("sequence_index values must be strictly increasing")
            prev = rec.sequence_index

    def __len__(self) -> int:
        return len(self.records)


_RECORD_FIELDS = {"fn", "args", "ret", "afp", "rfp"}
_FINGERPRINT_FIELDS = {"kind", "lo", "hi", "samples"}
_WIRE_KINDS = {k.value: k for k in FingerprintKind}


def _is_number(x) -> bool:
    return isinstance(x, numbers.Real) and not isinstance(x, bool)


def _fingerprint_from_wire(obj, lineno: int) -> ValueFingerprint:
    if not isinstance(obj, dict):
        raise MalformedRecord(lineno, f"fingerprint must be an object, got {type(obj).__name__}")
    unknown = set(obj) - _FINGERPRINT_FIELDS
    if unknown:
        raise MalformedRecord(lineno, f"unknown fingerprint fields {sorted(unknown)}")
    missing = _FINGERPRINT_FIELDS - set(obj)
    if missing:
        raise MalformedRecord(lineno, f"fingerprint missing fields {sorted(missing)}")
    kind = _WIRE_KINDS.get(obj["kind"])
    if kind is None:
        raise MalformedRecord(lineno, f"unknown fingerprint kind {obj['kind']!r}")
    lo, hi = obj["lo"], obj["hi"]
    if not (_is_number(lo) and _is_number(hi)):
        raise MalformedRecord(lineno, "fingerprint lo/hi must be numbers")
    samples = obj["samples"]
    if not isinstance(samples, list):
        raise MalformedRecord(lineno, "fingerprint samples must be an array")
    if kind.is_interval:
        if samples:
            raise MalformedRecord(lineno, f"{kind.value} fingerprint must have empty samples")
        if lo > hi:
            raise MalformedRecord(lineno, f"fingerprint lo={lo} > hi={hi}")
    else:
        if len(samples) > MAX_HASH_SAMPLES:
            raise MalformedRecord(lineno, f"more than {MAX_HASH_SAMPLES} hash samples")
        for s in samples:
            if not isinstance(s, int) or isinstance(s, bool) or not (0 <= s <= _UINT64_MAX):
                raise MalformedRecord(lineno, f"hash sample {s!r} is not a uint64")
    return ValueFingerprint(kind, lo, hi, frozenset(samples))


def _fingerprint_to_wire(fp: ValueFingerprint) -> dict:
    return {"kind": fp.kind.value, "lo": fp.lo, "hi": fp.hi, "samples": sorted(fp.samples)}


def _record_from_wire(obj, lineno: int) -> CallRecord:
    if not isinstance(obj, dict):
        raise MalformedRecord(lineno, f"record must be a JSON object, got {type(obj).__name__}")
    unknown = set(obj) - _RECORD_FIELDS
    if unknown:
        raise MalformedRecord(lineno, f"unknown fields {sorted(unknown)}")
    for required in ("fn", "args", "ret"):
        if required not in obj:
            raise MalformedRecord(lineno, f"missing field {required!r}")
    fn, args, ret = obj["fn"], obj["args"], obj["ret"]
    if not isinstance(fn, str):
        raise MalformedRecord(lineno, "fn must be a string")
    if not isinstance(args, list) or not all(isinstance(a, str) for a in args):
        raise MalformedRecord(lineno, "args must be an array of strings")
    if not isinstance(ret, str):
        raise MalformedRecord(lineno, "ret must be a string")

    afp = None
    if "afp" in obj:
        raw = obj["afp"]
        if not isinstance(raw, list):
            raise MalformedRecord(lineno, "afp must be an array of fingerprint objects")
        if len(raw) != len(args):
            raise MalformedRecord(
                lineno, f"{len(args)} args but {len(raw)} argument fingerprints"
            )
        afp = tuple(_fingerprint_from_wire(f, lineno) for f in raw)
    rfp = _fingerprint_from_wire(obj["rfp"], lineno) if "rfp" in obj else None

    return CallRecord(
        function_name=fn,
        arg_types=tuple(args),
        return_type=ret,
        arg_fingerprints=afp,
        return_fingerprint=rfp,
        sequence_index=lineno - 1,
    )


def ingest_trace(path) -> Trace:
    """Read a JSONL trace file, aborting on the first malformed line.

    Records keep file order; sequence indices are assigned from line numbers.
    """
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            try:
                obj = json.loads(line)
            except ValueError as exc:
                raise MalformedRecord(lineno, f"invalid JSON ({exc})") from None
            records.append(_record_from_wire(obj, lineno))
    return Trace(records=tuple(records), source_label=str(path))


def serialize_trace(trace: Trace) -> str:
    """Render a trace back to canonical JSONL (fixed field order, sorted samples)."""
    lines = []
    for rec in trace.records:
        obj: dict = {"fn": rec.function_name, "args": list(rec.arg_types), "ret": rec.return_type}
        if rec.arg_fingerprints is not None:
            obj["afp"] = [_fingerprint_to_wire(fp) for fp in rec.arg_fingerprints]
        if rec.return_fingerprint is not None:
            obj["rfp"] = _fingerprint_to_wire(rec.return_fingerprint)
        lines.append(json.dumps(obj, separators=(", ", ": ")))
    return "".join(line + "\n" for line in lines)


def record_to_wire(rec: CallRecord) -> Mapping:
    """Wire-format dict for a single record (used by tests and tooling)."""
    obj: dict = {"fn": rec.function_name, "args": list(rec.arg_types), "ret": rec.return_type}
    if rec.arg_fingerprints is not None:
        obj["afp"] = [_fingerprint_to_wire(fp) for fp in rec.arg_fingerprints]
    if rec.return_fingerprint is not None:
        obj["rfp"] = _fingerprint_to_wire(rec.return_fingerprint)
    return obj
