import json
import random
from pathlib import Path

import pytest

from helpers import simple_graph, write_jsonl
from metamodel.errors import IncompleteAssignment, NameCollision
from metamodel.trace import (
    CallRecord,
    Trace,
    fingerprints_disjoint,
    ingest_trace,
    length_interval,
    numeric_interval,
)
from metamodel.typegraph import (
    EdgeKind,
    TypeNode,
    assemble_graph,
    build_typegraph,
    detect_ambiguity,
    graph_from_json,
    graph_to_json,
    product_name,
    split_type,
    to_dot,
)

GOLDEN = Path(__file__).parent / "golden"


def record(fn, args, ret, rfp=None, seq=0):
    return CallRecord(fn, tuple(args), ret, return_fingerprint=rfp, sequence_index=seq)


def test_empty_trace_empty_graph():
    graph = build_typegraph(Trace())
    assert graph.nodes == () and graph.edges == ()


def test_arithmetic_graph_shape(arithmetic_trace_path):
    graph = build_typegraph(ingest_trace(arithmetic_trace_path))
    names = {n.name for n in graph.nodes}
    assert {"Int", "Float", product_name(("Int", "Float"))} <= names
    product = graph.node(product_name(("Int", "Float")))
    assert product.is_product and product.factors == ("Int", "Float")
    fn_edges = {(e.label, e.src, e.dst) for e in graph.edges if e.kind is EdgeKind.FUNCTION}
    assert ("Main.*", "(Int,Float)", "Float") in fn_edges
    assert ("Main.+", "(Int,Float)", "Float") in fn_edges
    projections = [e for e in graph.edges if e.kind is EdgeKind.PROJECTION]
    assert sorted((e.label, e.dst) for e in projections) == [("π_1", "Int"), ("π_2", "Float")]


def test_identical_signatures_group_counts():
    records = [record("f", ["Int"], "Int", seq=i) for i in range(3)]
    # Oracle: a plain group-by over signatures.
    expected = {}
    for rec in records:
        expected[rec.signature()] = expected.get(rec.signature(), 0) + 1
    graph = build_typegraph(Trace(records=tuple(records)))
    edges = [e for e in graph.edges if e.kind is EdgeKind.FUNCTION]
    assert len(edges) == 1
    assert edges[0].call_count == expected[records[0].signature()] == 3


def test_duplicated_trace_doubles_counts_only():
    base = [
        record("f", ["Int"], "Float", rfp=numeric_interval(0, 1), seq=0),
        record("g", ["Int", "Int"], "Int", seq=1),
    ]
    doubled = base + [
        record("f", ["Int"], "Float", rfp=numeric_interval(0, 1), seq=2),
        record("g", ["Int", "Int"], "Int", seq=3),
    ]
    g1 = build_typegraph(Trace(records=tuple(base)))
    g2 = build_typegraph(Trace(records=tuple(doubled)))
    assert g1.nodes == g2.nodes
    assert len(g1.edges) == len(g2.edges)
    for e1, e2 in zip(g1.edges, g2.edges):
        assert (e1.label, e1.src, e1.dst, e1.kind, e1.fingerprint) == (
            e2.label,
            e2.src,
            e2.dst,
            e2.kind,
            e2.fingerprint,
        )
        if e1.kind is EdgeKind.FUNCTION:
            assert e2.call_count == 2 * e1.call_count


def test_every_product_has_all_projections():
    records = [
        record("f", ["A", "B"], "C", seq=0),
        record("g", ["A", "B", "C"], "D", seq=1),
        record("h", [], "E", seq=2),
    ]
    graph = build_typegraph(Trace(records=tuple(records)))
    for node in graph.nodes:
        if node.is_product:
            projections = [
                e for e in graph.out_edges(node.name) if e.kind is EdgeKind.PROJECTION
            ]
            assert len(projections) == len(node.factors)
            assert sorted(e.index for e in projections) == list(
                range(1, len(node.factors) + 1)
            )


def test_zero_arg_function_gets_unit_product():
    graph = build_typegraph(Trace(records=(record("now", [], "Float"),)))
    unit = graph.node(product_name(()))
    assert unit.is_product and unit.factors == ()
    (edge,) = [e for e in graph.edges if e.kind is EdgeKind.FUNCTION]
    assert edge.src == unit.name


def test_detect_ambiguity_on_sir_problem(sir_problem_trace_path):
    graph = build_typegraph(ingest_trace(sir_problem_trace_path))
    reports = detect_ambiguity(graph)
    assert len(reports) == 1
    report = reports[0]
    assert report.codomain == "Vector{Float}"
    assert [(w.edge_f, w.edge_g) for w in report.witnesses] == [(".initial", ".param")]
    assert len(report.suggested_split) == 2
    taken = {n.name for n in graph.nodes}
    assert not set(report.suggested_split) & taken


def test_overlapping_time_lookups_do_not_report(sir_problem_trace_path):
    graph = build_typegraph(ingest_trace(sir_problem_trace_path))
    assert all(r.codomain != "Float" for r in detect_ambiguity(graph))


def test_single_edge_per_node_no_reports():
    records = [record("f", ["A"], "B", rfp=numeric_interval(0, 1))]
    graph = build_typegraph(Trace(records=tuple(records)))
    assert detect_ambiguity(graph) == []


def test_witnesses_never_overlap():
    rng = random.Random(7)
    for _ in range(50):
        records = []
        for i in range(rng.randint(2, 6)):
            lo = rng.randint(0, 20)
            records.append(
                record(f"f{i}", ["A"], "B", rfp=numeric_interval(lo, lo + rng.randint(0, 5)), seq=i)
            )
        graph = build_typegraph(Trace(records=tuple(records)))
        for report in detect_ambiguity(graph):
            for w in report.witnesses:
                assert fingerprints_disjoint(*w.evidence)


def test_split_type_resolves_ambiguity(sir_problem_trace_path):
    graph = build_typegraph(ingest_trace(sir_problem_trace_path))
    (report,) = detect_ambiguity(graph)
    split = split_type(graph, report, {".param": "Params", ".initial": "Initial"})
    names = {n.name for n in split.nodes}
    assert {"Params", "Initial"} <= names
    assert "Vector{Float}" not in names
    # inbound function-edge count into the affected region is preserved
    before = [e for e in graph.edges if e.dst == "Vector{Float}"]
    after = [e for e in split.edges if e.dst in ("Params", "Initial")]
    assert len(before) == len(after)
    # the retargeted edges no longer witness ambiguity
    assert all(r.codomain not in ("Params", "Initial") for r in detect_ambiguity(split))
    # the original graph is untouched
    assert graph.has_node("Vector{Float}")


def test_split_all_to_one_name_is_a_rename(sir_problem_trace_path):
    graph = build_typegraph(ingest_trace(sir_problem_trace_path))
    (report,) = detect_ambiguity(graph)
    renamed = split_type(graph, report, {".param": "Fresh", ".initial": "Fresh"})
    assert len(renamed.nodes) == len(graph.nodes)
    assert len(renamed.edges) == len(graph.edges)
    relabel = lambda n: "Fresh" if n == "Vector{Float}" else n
    assert {(e.label, relabel(e.src), relabel(e.dst)) for e in graph.edges} == {
        (e.label, e.src, e.dst) for e in renamed.edges
    }


def test_split_missing_assignment(sir_problem_trace_path):
    graph = build_typegraph(ingest_trace(sir_problem_trace_path))
    (report,) = detect_ambiguity(graph)
    with pytest.raises(IncompleteAssignment):
        split_type(graph, report, {".param": "Params"})


def test_split_name_collision(sir_problem_trace_path):
    graph = build_typegraph(ingest_trace(sir_problem_trace_path))
    (report,) = detect_ambiguity(graph)
    with pytest.raises(NameCollision):
        split_type(graph, report, {".param": "Problem", ".initial": "Initial"})


def test_split_duplicates_outbound_edges():
    records = [
        record("f", ["A"], "T", rfp=length_interval(1, 1), seq=0),
        record("g", ["A"], "T", rfp=length_interval(4, 4), seq=1),
        record("use", ["T"], "B", seq=2),
    ]
    graph = build_typegraph(Trace(records=tuple(records)))
    (report,) = detect_ambiguity(graph)
    split = split_type(graph, report, {"f": "T1", "g": "T2"})
    uses = [e for e in split.edges if e.label == "use"]
    assert sorted(e.src for e in uses) == ["T1", "T2"]
    assert all(e.dst == "B" for e in uses)


def test_to_dot_empty():
    assert to_dot(build_typegraph(Trace())).split() == ["digraph", "G", "{", "}"]


def test_to_dot_single_edge():
    graph = simple_graph([("f", "A", "B")])
    dot = to_dot(graph)
    assert dot.count("->") == 1
    assert '"A" -> "B" [label="f"];' in dot


def test_to_dot_golden_sir_problem(sir_problem_trace_path):
    graph = build_typegraph(ingest_trace(sir_problem_trace_path))
    assert to_dot(graph) == (GOLDEN / "sir_problem.dot").read_text()


def test_graph_json_roundtrip(sir_problem_trace_path):
    graph = build_typegraph(ingest_trace(sir_problem_trace_path))
    doc = json.loads(json.dumps(graph_to_json(graph)))
    assert graph_from_json(doc) == graph


def test_graph_validation_rejects_bad_projection():
    nodes = [TypeNode("A"), TypeNode("(A,A)", is_product=True, factors=("A", "A"))]
    with pytest.raises(ValueError):
        assemble_graph(nodes, [("π_3", "(A,A)", "A", EdgeKind.PROJECTION, 3, None, 0)])
