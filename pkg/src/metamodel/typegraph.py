"""Type graphs: program types as nodes, observed functions as edges.

The graph is the category-of-types view of a program.  Multi-argument
functions get a product (tuple) node as their domain, with one projection
edge per factor.  Edges carry merged return-value fingerprints, which drive
the ambiguity check: two functions into the same codomain whose observed
value ranges are disjoint are evidence that one type is standing in for two
distinct concepts.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping

from .errors import IncompleteAssignment, NameCollision
from .trace import (
    FingerprintKind,
    Trace,
    ValueFingerprint,
    _fingerprint_from_wire,
    _fingerprint_to_wire,
    fingerprints_disjoint,
    merge_fingerprints,
)


class EdgeKind(Enum):
    FUNCTION = "function"
    PROJECTION = "projection"


def projection_label(index: int) -> str:
    return f"π_{index}"


def product_name(factors: Iterable[str]) -> str:
    return "(" + ",".join(factors) + ")"


@dataclass(frozen=True)
class TypeNode:
    name: str
    is_product: bool = False
    factors: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if self.factors and not self.is_product:
            raise ValueError(f"node {self.name!r} has factors but is not a product")


@dataclass(frozen=True)
class FnEdge:
    eid: str
    label: str
    src: str
    dst: str
    kind: EdgeKind = EdgeKind.FUNCTION
    index: int = 0  # 1-based projection index; 0 for function edges
    fingerprint: ValueFingerprint | None = None
    call_count: int = 0


@dataclass(frozen=True)
class TypeGraph:
    nodes: tuple[TypeNode, ...] = ()
    edges: tuple[FnEdge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        names = [n.name for n in self.nodes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate node names")
        by_name = {n.name: n for n in self.nodes}
        for node in self.nodes:
            for f in node.factors:
                if f not in by_name:
                    raise ValueError(f"product {node.name!r} references unknown factor {f!r}")
        eids = [e.eid for e in self.edges]
        if len(set(eids)) != len(eids):
            raise ValueError("duplicate edge ids")
        for e in self.edges:
            if e.src not in by_name or e.dst not in by_name:
                raise ValueError(f"edge {e.eid!r} references unknown node")
            if e.kind is EdgeKind.PROJECTION:
                src = by_name[e.src]
                if not src.is_product:
                    raise ValueError(f"projection {e.eid!r} leaves non-product {e.src!r}")
                if not (1 <= e.index <= len(src.factors)):
                    raise ValueError(f"projection {e.eid!r} index {e.index} out of range")
                if e.dst != src.factors[e.index - 1]:
                    raise ValueError(f"projection {e.eid!r} does not target its factor")
                if e.label != projection_label(e.index):
                    raise ValueError(f"projection {e.eid!r} mislabeled {e.label!r}")

    @cached_property
    def _node_index(self) -> Mapping[str, TypeNode]:
        return {n.name: n for n in self.nodes}

    @cached_property
    def _edge_index(self) -> Mapping[str, FnEdge]:
        return {e.eid: e for e in self.edges}

    @cached_property
    def _out(self) -> Mapping[str, tuple[FnEdge, ...]]:
        out: dict[str, list[FnEdge]] = {n.name: [] for n in self.nodes}
        for e in self.edges:
            out[e.src].append(e)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def _in(self) -> Mapping[str, tuple[FnEdge, ...]]:
        inc: dict[str, list[FnEdge]] = {n.name: [] for n in self.nodes}
        for e in self.edges:
            inc[e.dst].append(e)
        return {k: tuple(v) for k, v in inc.items()}

    def node(self, name: str) -> TypeNode:
        return self._node_index[name]

    def has_node(self, name: str) -> bool:
        return name in self._node_index

    def edge(self, eid: str) -> FnEdge:
        return self._edge_index[eid]

    def out_edges(self, name: str) -> tuple[FnEdge, ...]:
        return self._out.get(name, ())

    def in_edges(self, name: str) -> tuple[FnEdge, ...]:
        return self._in.get(name, ())

    def edges_between(self, src: str, dst: str) -> tuple[FnEdge, ...]:
        return tuple(e for e in self.out_edges(src) if e.dst == dst)

    def degree(self, name: str) -> int:
        return len(self.out_edges(name)) + len(self.in_edges(name))


EdgeSpec = tuple  # (label, src, dst, kind, index, fingerprint, call_count)


def assemble_graph(nodes: Iterable[TypeNode], edge_specs: Iterable[EdgeSpec]) -> TypeGraph:
    """Build a graph with canonical node ordering and deterministic edge ids."""
    ordered_nodes = tuple(sorted(nodes, key=lambda n: n.name))
    ordered_specs = sorted(edge_specs, key=lambda s: (s[1], s[0], s[2], s[3].value, s[4]))
    seen: dict[str, int] = {}
    edges = []
    for label, src, dst, kind, index, fp, count in ordered_specs:
        base = f"{label}|{src}|{dst}"
        n = seen.get(base, 0)
        seen[base] = n + 1
        eid = base if n == 0 else f"{base}#{n + 1}"
        edges.append(FnEdge(eid, label, src, dst, kind, index, fp, count))
    return TypeGraph(nodes=ordered_nodes, edges=tuple(edges))


def build_typegraph(trace: Trace) -> TypeGraph:
    """Fold a trace into its type graph.

    One node per distinct type name, one function edge per distinct
    (name, argument types, return type) signature with call counts and merged
    return fingerprints, and product nodes with projection edges created on
    demand for non-unary signatures.
    """
    type_names: set[str] = set()
    groups: dict[tuple[str, tuple[str, ...], str], dict] = {}
    for rec in trace.records:
        type_names.update(rec.arg_types)
        type_names.add(rec.return_type)
        sig = rec.signature()
        grp = groups.setdefault(sig, {"count": 0, "fp": None})
        grp["count"] += 1
        if rec.return_fingerprint is not None:
            grp["fp"] = (
                rec.return_fingerprint
                if grp["fp"] is None
                else merge_fingerprints(grp["fp"], rec.return_fingerprint)
            )

    products: dict[tuple[str, ...], str] = {}
    edge_specs: list[EdgeSpec] = []
    for (fn, args, ret), grp in sorted(groups.items()):
        if len(args) == 1:
            src = args[0]
        else:
            src = products.setdefault(args, product_name(args))
        edge_specs.append((fn, src, ret, EdgeKind.FUNCTION, 0, grp["fp"], grp["count"]))

    nodes: dict[str, TypeNode] = {name: TypeNode(name) for name in type_names}
    for factors, pname in products.items():
        # A trace may already name the tuple type directly; the product form wins.
        nodes[pname] = TypeNode(pname, is_product=True, factors=factors)
        for i, factor in enumerate(factors, start=1):
            edge_specs.append(
                (projection_label(i), pname, factor, EdgeKind.PROJECTION, i, None, 0)
            )
    return assemble_graph(nodes.values(), edge_specs)


@dataclass(frozen=True)
class AmbiguityWitness:
    """A pair of same-codomain edges with provably disjoint observed ranges."""

    edge_f: str
    edge_g: str
    evidence: tuple[ValueFingerprint, ValueFingerprint]
    call_counts: tuple[int, int]


@dataclass(frozen=True)
class AmbiguityReport:
    codomain: str
    witnesses: tuple[AmbiguityWitness, ...]
    suggested_split: tuple[str, ...]


def _propose_name(label: str, codomain: str, taken: set[str], ordinal: int) -> str:
    tokens = re.findall(r"[A-Za-z0-9_]+", label)
    base = tokens[-1][:1].upper() + tokens[-1][1:] if tokens else f"{codomain}_{ordinal}"
    name = base
    k = 2
    while name in taken:
        name = f"{base}{k}"
        k += 1
    return name


def detect_ambiguity(graph: TypeGraph) -> list[AmbiguityReport]:
    """Find codomains whose inbound functions show disjoint value evidence.

    Two fingerprinted function edges into the same node witness ambiguity when
    their fingerprints are disjoint.  The suggested split has one fresh name
    per connected component of the overlap relation among those edges.
    """
    reports = []
    taken = {n.name for n in graph.nodes}
    for node in sorted(graph.nodes, key=lambda n: n.name):
        edges = sorted(
            (
                e
                for e in graph.in_edges(node.name)
                if e.kind is EdgeKind.FUNCTION and e.fingerprint is not None
            ),
            key=lambda e: (e.label, e.eid),
        )
        if len(edges) < 2:
            continue
        parent = list(range(len(edges)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        witnesses = []
        for i in range(len(edges)):
            for j in range(i + 1, len(edges)):
                a, b = edges[i].fingerprint, edges[j].fingerprint
                if a.kind is not b.kind:
                    continue
                if fingerprints_disjoint(a, b):
                    witnesses.append(
                        AmbiguityWitness(
                            edge_f=edges[i].label,
                            edge_g=edges[j].label,
                            evidence=(a, b),
                            call_counts=(edges[i].call_count, edges[j].call_count),
                        )
                    )
                else:
                    parent[find(i)] = find(j)
        if not witnesses:
            continue
        clusters: dict[int, list[int]] = {}
        for i in range(len(edges)):
            clusters.setdefault(find(i), []).append(i)
        names = []
        for ordinal, members in enumerate(sorted(clusters.values(), key=lambda m: m[0]), 1):
            name = _propose_name(edges[members[0]].label, node.name, taken, ordinal)
            taken.add(name)
            names.append(name)
        reports.append(AmbiguityReport(node.name, tuple(witnesses), tuple(names)))
    return reports


def split_type(
    graph: TypeGraph, report: AmbiguityReport, assignment: Mapping[str, str]
) -> TypeGraph:
    """Replace an ambiguous node with fresh nodes, retargeting inbound edges.

    ``assignment`` maps each inbound function-edge label to the fresh type it
    should produce.  Outbound edges of the old node are duplicated onto every
    fresh node: the trace has no evidence to say which copy they belong to.
    The input graph is left untouched.
    """
    target = report.codomain
    if not graph.has_node(target):
        raise IncompleteAssignment(f"graph has no node {target!r}")
    t_node = graph.node(target)
    if t_node.is_product:
        raise IncompleteAssignment(f"cannot split product node {target!r}")
    for node in graph.nodes:
        if target in node.factors:
            raise IncompleteAssignment(
                f"cannot split {target!r}: it is a factor of product {node.name!r}"
            )

    inbound = [e for e in graph.in_edges(target) if e.kind is EdgeKind.FUNCTION]
    missing = sorted({e.label for e in inbound} - set(assignment))
    if missing:
        raise IncompleteAssignment(f"no fresh type assigned for inbound edges {missing}")
    fresh = sorted(set(assignment.values()))
    existing = {n.name for n in graph.nodes}
    colliding = sorted(set(fresh) & existing)
    if colliding:
        raise NameCollision(f"fresh names already in graph: {colliding}")

    nodes = [n for n in graph.nodes if n.name != target]
    nodes.extend(TypeNode(name) for name in fresh)
    edge_specs: list[EdgeSpec] = []
    for e in graph.edges:
        new_dst = assignment[e.label] if e.dst == target and e.kind is EdgeKind.FUNCTION else e.dst
        if e.src == target:
            for f in fresh:
                edge_specs.append((e.label, f, new_dst, e.kind, e.index, e.fingerprint, e.call_count))
        else:
            edge_specs.append((e.label, e.src, new_dst, e.kind, e.index, e.fingerprint, e.call_count))
    return assemble_graph(nodes, edge_specs)


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(graph: TypeGraph, *, name: str = "G", show_counts: bool = False) -> str:
    """Render the graph as a DOT digraph with deterministic ordering.

    Projection edges are dotted; node and edge order is lexicographic so the
    output is suitable for golden-file comparison.
    """
    lines = [f"digraph {name} {{"]
    for node in sorted(graph.nodes, key=lambda n: n.name):
        attrs = " [shape=box]" if node.is_product else ""
        lines.append(f"  {_dot_quote(node.name)}{attrs};")
    for e in sorted(graph.edges, key=lambda e: (e.src, e.label, e.dst, e.eid)):
        label = e.label
        if show_counts and e.kind is EdgeKind.FUNCTION:
            label = f"{label} ({e.call_count})"
        attrs = [f"label={_dot_quote(label)}"]
        if e.kind is EdgeKind.PROJECTION:
            attrs.append("style=dotted")
        lines.append(f"  {_dot_quote(e.src)} -> {_dot_quote(e.dst)} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_json(graph: TypeGraph) -> dict:
    """JSON document form (canonical ordering) for storage and golden tests."""
    return {
        "nodes": [
            {"name": n.name, "is_product": n.is_product, "factors": list(n.factors)}
            for n in sorted(graph.nodes, key=lambda n: n.name)
        ],
        "edges": [
            {
                "id": e.eid,
                "label": e.label,
                "src": e.src,
                "dst": e.dst,
                "kind": e.kind.value,
                "index": e.index,
                "call_count": e.call_count,
                "fingerprint": None if e.fingerprint is None else _fingerprint_to_wire(e.fingerprint),
            }
            for e in sorted(
                graph.edges, key=lambda e: (e.src, e.label, e.dst, e.kind.value, e.index, e.eid)
            )
        ],
    }


def graph_from_json(doc: Mapping) -> TypeGraph:
    nodes = [
        TypeNode(d["name"], bool(d.get("is_product", False)), tuple(d.get("factors", ())))
        for d in doc["nodes"]
    ]
    edges = []
    for d in doc["edges"]:
        fp = d.get("fingerprint")
        edges.append(
            FnEdge(
                eid=d["id"],
                label=d["label"],
                src=d["src"],
                dst=d["dst"],
                kind=EdgeKind(d["kind"]),
                index=int(d.get("index", 0)),
                fingerprint=None if fp is None else _fingerprint_from_wire(fp, 0),
                call_count=int(d.get("call_count", 0)),
            )
        )
    return TypeGraph(nodes=tuple(nodes), edges=tuple(edges))


def graph_to_json_str(graph: TypeGraph) -> str:
    return json.dumps(graph_to_json(graph), indent=2) + "\n"
