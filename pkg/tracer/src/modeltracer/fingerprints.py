"""Value fingerprints in the trace wire format.

Numeric scalars get a point interval of kind "num", containers a point
interval of kind "len" over their length, and everything else a "hash"
fingerprint holding one 64-bit digest of a canonical rendering.  Strings
count as atomic symbols, not containers, so distinct labels stay
distinguishable.  Digests use BLAKE2b, not the interpreter's salted
``hash``, so retracing a deterministic script reproduces the file byte for
byte.
"""

from __future__ import annotations

import hashlib

_CONTAINERS = (list, tuple, set, frozenset, dict)


def canonical_bytes(value) -> bytes:
    """Stable rendering for hashing; falls back to the type name when the
    value's repr is not reproducible across runs."""
    if value is None or isinstance(value, (bool, int, float, str, bytes)):
        return f"{type(value).__name__}:{value!r}".encode("utf-8", "backslashreplace")
    if isinstance(value, (list, tuple)):
        return b"[" + b",".join(canonical_bytes(v) for v in value) + b"]"
    if isinstance(value, (set, frozenset)):
        return b"{" + b",".join(sorted(canonical_bytes(v) for v in value)) + b"}"
    if isinstance(value, dict):
        items = sorted(
            canonical_bytes(k) + b"=" + canonical_bytes(v) for k, v in value.items()
        )
        return b"dict{" + b",".join(items) + b"}"
    return f"object:{type(value).__module__}.{type(value).__qualname__}".encode()


def value_hash64(value) -> int:
    digest = hashlib.blake2b(canonical_bytes(value), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def fingerprint_for_value(value) -> dict:
    """One observation, as a wire-format fingerprint object."""
    if type(value) in (int, float):
        return {"kind": "num", "lo": value, "hi": value, "samples": []}
    if isinstance(value, _CONTAINERS):
        n = len(value)
        return {"kind": "len", "lo": n, "hi": n, "samples": []}
    return {"kind": "hash", "lo": 0, "hi": 0, "samples": [value_hash64(value)]}
