import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import ARITHMETIC_TRACE_LINES, write_jsonl
from metamodel.errors import KindMismatch, MalformedRecord
from metamodel.trace import (
    MAX_HASH_SAMPLES,
    CallRecord,
    FingerprintKind,
    Trace,
    ValueFingerprint,
    cap_samples,
    fingerprints_disjoint,
    hash_sample,
    ingest_trace,
    length_interval,
    merge_fingerprints,
    numeric_interval,
    serialize_trace,
)


def test_ingest_empty_file(tmp_path):
    path = write_jsonl(tmp_path / "empty.jsonl", [])
    trace = ingest_trace(path)
    assert len(trace) == 0


def test_ingest_arithmetic_program(tmp_path):
    path = write_jsonl(tmp_path / "arith.jsonl", ARITHMETIC_TRACE_LINES)
    trace = ingest_trace(path)
    assert len(trace) == 4
    signatures = {rec.signature() for rec in trace.records}
    assert ("Main.*", ("Int", "Float"), "Float") in signatures
    assert ("Main.+", ("Int", "Float"), "Float") in signatures
    assert [rec.sequence_index for rec in trace.records] == [0, 1, 2, 3]


def test_ingest_fingerprint_count_mismatch(tmp_path):
    bad = {
        "fn": "f",
        "args": ["Int", "Float"],
        "ret": "Float",
        "afp": [{"kind": "num", "lo": 1, "hi": 1, "samples": []}],
    }
    path = write_jsonl(tmp_path / "bad.jsonl", [bad])
    with pytest.raises(MalformedRecord) as err:
        ingest_trace(path)
    assert err.value.line_number == 1


def test_ingest_rejects_unknown_fields(tmp_path):
    path = write_jsonl(tmp_path / "bad.jsonl", [{"fn": "f", "args": [], "ret": "Int", "extra": 1}])
    with pytest.raises(MalformedRecord):
        ingest_trace(path)


def test_ingest_reports_offending_line(tmp_path):
    lines = [json.dumps({"fn": "f", "args": [], "ret": "Int"}), "{not json", ""]
    path = tmp_path / "bad.jsonl"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(MalformedRecord) as err:
        ingest_trace(path)
    assert err.value.line_number == 2
    assert "line 2" in str(err.value)


def test_ingest_rejects_interval_with_samples(tmp_path):
    bad = {"fn": "f", "args": [], "ret": "T", "rfp": {"kind": "len", "lo": 1, "hi": 2, "samples": [3]}}
    path = write_jsonl(tmp_path / "bad.jsonl", [bad])
    with pytest.raises(MalformedRecord):
        ingest_trace(path)


def test_ingest_rejects_inverted_interval(tmp_path):
    bad = {"fn": "f", "args": [], "ret": "T", "rfp": {"kind": "num", "lo": 2, "hi": 1, "samples": []}}
    path = write_jsonl(tmp_path / "bad.jsonl", [bad])
    with pytest.raises(MalformedRecord):
        ingest_trace(path)


def test_roundtrip_reproduces_file(tmp_path):
    lines = [
        {"fn": "f", "args": ["Int"], "ret": "Vector{Float}",
         "afp": [{"kind": "num", "lo": 1, "hi": 4, "samples": []}],
         "rfp": {"kind": "len", "lo": 2, "hi": 2, "samples": []}},
        {"fn": "g", "args": [], "ret": "Symbol",
         "rfp": {"kind": "hash", "lo": 0, "hi": 0, "samples": [7, 1, 4]}},
    ]
    path = write_jsonl(tmp_path / "trace.jsonl", lines)
    text = serialize_trace(ingest_trace(path))
    parsed = [json.loads(line) for line in text.splitlines()]
    canonical = [json.loads(json.dumps(obj)) for obj in lines]
    canonical[1]["rfp"]["samples"] = sorted(canonical[1]["rfp"]["samples"])
    assert parsed == canonical
    # a second pass is byte-stable
    path2 = tmp_path / "again.jsonl"
    path2.write_text(text)
    assert serialize_trace(ingest_trace(path2)) == text


def test_merge_numeric_hull():
    merged = merge_fingerprints(numeric_interval(0, 1), numeric_interval(2, 3))
    assert (merged.lo, merged.hi) == (0, 3)


def test_merge_hash_idempotent():
    s = hash_sample({1, 2, 3})
    assert merge_fingerprints(s, s).samples == s.samples


def test_merge_length_matches_pooled_observations():
    # Oracle: direct min/max over the pooled observations [2, 2, 3, 3].
    observations = [2, 2, 3, 3]
    merged = merge_fingerprints(length_interval(2, 2), length_interval(3, 3))
    assert (merged.lo, merged.hi) == (min(observations), max(observations))


def test_merge_kind_mismatch():
    with pytest.raises(KindMismatch):
        merge_fingerprints(numeric_interval(0, 1), length_interval(0, 1))


intervals = st.tuples(st.integers(-50, 50), st.integers(0, 50)).map(
    lambda t: numeric_interval(t[0], t[0] + t[1])
)


@given(intervals, intervals)
def test_merge_commutative(a, b):
    assert merge_fingerprints(a, b) == merge_fingerprints(b, a)


@given(intervals, intervals, intervals)
def test_merge_associative(a, b, c):
    left = merge_fingerprints(merge_fingerprints(a, b), c)
    right = merge_fingerprints(a, merge_fingerprints(b, c))
    assert left == right


@given(
    st.sets(st.integers(0, 2**64 - 1), max_size=300),
    st.sets(st.integers(0, 2**64 - 1), max_size=300),
)
def test_merge_hash_subset_of_union(sa, sb):
    a = hash_sample(cap_samples(sa))
    b = hash_sample(cap_samples(sb))
    merged = merge_fingerprints(a, b)
    union = a.samples | b.samples
    assert merged.samples <= union
    if len(union) <= MAX_HASH_SAMPLES:
        assert merged.samples == union


def test_cap_samples_keeps_smallest():
    big = set(range(1000, 1300))
    capped = cap_samples(big)
    assert len(capped) == MAX_HASH_SAMPLES
    assert capped == set(range(1000, 1000 + MAX_HASH_SAMPLES))


def test_disjoint_lengths():
    assert fingerprints_disjoint(length_interval(2, 2), length_interval(3, 3)) is True


def test_overlapping_time_ranges_not_disjoint():
    assert fingerprints_disjoint(numeric_interval(0, 10), numeric_interval(5, 20)) is False


def test_identical_fingerprints_not_disjoint():
    fp = numeric_interval(1, 2)
    assert fingerprints_disjoint(fp, fp) is False
    hs = hash_sample({5})
    assert fingerprints_disjoint(hs, hs) is False


def test_disjoint_kind_mismatch():
    with pytest.raises(KindMismatch):
        fingerprints_disjoint(numeric_interval(0, 1), hash_sample({1}))


@given(intervals)
def test_self_disjoint_false(fp):
    assert fingerprints_disjoint(fp, fp) is False


def test_fingerprint_validation():
    with pytest.raises(ValueError):
        ValueFingerprint(FingerprintKind.NUMERIC_INTERVAL, 3, 1)
    with pytest.raises(ValueError):
        hash_sample(range(MAX_HASH_SAMPLES + 1))
    with pytest.raises(ValueError):
        hash_sample({-1})


def test_record_validation():
    with pytest.raises(ValueError):
        CallRecord("f", ("Int",), "Int", arg_fingerprints=())
    with pytest.raises(ValueError):
        Trace(
            records=(
                CallRecord("f", (), "Int", sequence_index=1),
                CallRecord("g", (), "Int", sequence_index=1),
            )
        )
