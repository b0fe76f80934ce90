"""Graph homomorphisms and functor checks between type graphs.

A morphism maps nodes to nodes and edges to edges so that incidence is
preserved and projection edges land on projections of the same index.  Edge
labels are not required to match (a refactored program maps its named
functions onto the original's anonymous ones); pass ``label_preserving=True``
to require equal labels during search.

Full/faithful are checked per hom-set, where a hom-set is the multiset of
parallel edges between one ordered node pair.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

from .errors import InvalidConstraint, UnmappedEdge, UnmappedNode
from .typegraph import EdgeKind, FnEdge, TypeGraph


@dataclass(frozen=True)
class GraphMorphism:
    node_map: Mapping[str, str]
    edge_map: Mapping[str, str]

    def __post_init__(self):
        object.__setattr__(self, "node_map", dict(self.node_map))
        object.__setattr__(self, "edge_map", dict(self.edge_map))


@dataclass(frozen=True)
class FunctorReport:
    is_homomorphism: bool
    is_full: bool
    is_faithful: bool
    violations: tuple[str, ...]


def _edge_compatible(src_edge: FnEdge, dst_edge: FnEdge, label_preserving: bool) -> bool:
    if src_edge.kind is EdgeKind.PROJECTION:
        if dst_edge.kind is not EdgeKind.PROJECTION or dst_edge.index != src_edge.index:
            return False
    if label_preserving and src_edge.label != dst_edge.label:
        return False
    return True


def check_morphism(src: TypeGraph, dst: TypeGraph, m: GraphMorphism) -> FunctorReport:
    """Verify homomorphism, fullness, and faithfulness of a candidate map.

    Raises if the map is not total on the source graph; structural failures
    are reported, naming the first offending edge or node pair per property.
    """
    for node in src.nodes:
        if node.name not in m.node_map:
            raise UnmappedNode(f"source node {node.name!r} is unmapped")
        if not dst.has_node(m.node_map[node.name]):
            raise UnmappedNode(
                f"node {node.name!r} maps to unknown target {m.node_map[node.name]!r}"
            )
    dst_eids = {e.eid for e in dst.edges}
    for edge in src.edges:
        if edge.eid not in m.edge_map:
            raise UnmappedEdge(f"source edge {edge.eid!r} is unmapped")
        target = m.edge_map[edge.eid]
        if target not in dst_eids:
            raise UnmappedEdge(f"edge {edge.eid!r} maps to unknown target {target!r}")

    violations = []
    is_homo = True
    for edge in sorted(src.edges, key=lambda e: e.eid):
        image = dst.edge(m.edge_map[edge.eid])
        if image.src != m.node_map[edge.src] or image.dst != m.node_map[edge.dst]:
            violations.append(
                f"edge {edge.eid!r} maps to {image.eid!r}, which does not run "
                f"{m.node_map[edge.src]!r} -> {m.node_map[edge.dst]!r}"
            )
            is_homo = False
            break
    if is_homo:
        for edge in sorted(src.edges, key=lambda e: e.eid):
            if edge.kind is not EdgeKind.PROJECTION:
                continue
            image = dst.edge(m.edge_map[edge.eid])
            if image.kind is not EdgeKind.PROJECTION or image.index != edge.index:
                violations.append(
                    f"projection {edge.eid!r} maps to {image.eid!r}, "
                    f"not a projection of index {edge.index}"
                )
                is_homo = False
                break

    if not is_homo:
        return FunctorReport(False, False, False, tuple(violations))

    node_names = sorted(n.name for n in src.nodes)
    is_faithful = True
    for u in node_names:
        for v in node_names:
            hom = src.edges_between(u, v)
            images = [m.edge_map[e.eid] for e in hom]
            if len(set(images)) != len(images):
                collided = sorted(e.eid for e in hom)
                violations.append(
                    f"hom-set ({u!r} -> {v!r}) collapses parallel edges {collided}"
                )
                is_faithful = False
                break
        if not is_faithful:
            break

    is_full = True
    for u in node_names:
        for v in node_names:
            images = {m.edge_map[e.eid] for e in src.edges_between(u, v)}
            targets = {e.eid for e in dst.edges_between(m.node_map[u], m.node_map[v])}
            missed = targets - images
            if missed:
                violations.append(
                    f"hom-set ({u!r} -> {v!r}): target edges {sorted(missed)} "
                    "have no preimage"
                )
                is_full = False
                break
        if not is_full:
            break

    return FunctorReport(True, is_full, is_faithful, tuple(violations))


def find_homomorphism(
    src: TypeGraph,
    dst: TypeGraph,
    constraints: Mapping[str, str] | None = None,
    *,
    label_preserving: bool = False,
) -> GraphMorphism | None:
    """Search for a homomorphism from ``src`` to ``dst`` extending ``constraints``.

    Backtracks over node assignments, pruning a candidate as soon as some
    edge between the candidate and an already-assigned node has no compatible
    image.  Nodes are tried by descending degree, candidates by ascending
    degree gap, ties broken lexicographically, so the result is deterministic.
    Returns None when the search space is exhausted.
    """
    constraints = dict(constraints or {})
    for key, value in constraints.items():
        if not src.has_node(key):
            raise InvalidConstraint(f"constraint source {key!r} is not a node of the source graph")
        if not dst.has_node(value):
            raise InvalidConstraint(f"constraint target {value!r} is not a node of the target graph")

    src_names = sorted((n.name for n in src.nodes), key=lambda n: (-src.degree(n), n))
    dst_names = sorted(n.name for n in dst.nodes)
    if src_names and not dst_names:
        return None

    def candidates(u: str) -> list[str]:
        if u in constraints:
            return [constraints[u]]
        du = src.degree(u)
        return sorted(dst_names, key=lambda t: (dst.degree(t) - du, t))

    def pair_feasible(u: str, t: str, v: str, tv: str) -> bool:
        for su, sv, du, dv in ((u, v, t, tv), (v, u, tv, t)):
            for edge in src.edges_between(su, sv):
                pool = dst.edges_between(du, dv)
                if not any(_edge_compatible(edge, cand, label_preserving) for cand in pool):
                    return False
        return True

    assignment: dict[str, str] = {}

    def assign(i: int) -> bool:
        if i == len(src_names):
            return True
        u = src_names[i]
        for t in candidates(u):
            ok = pair_feasible(u, t, u, t)
            if ok:
                for v, tv in assignment.items():
                    if not pair_feasible(u, t, v, tv):
                        ok = False
                        break
            if ok:
                assignment[u] = t
                if assign(i + 1):
                    return True
                del assignment[u]
        return False

    if not assign(0):
        return None

    edge_map: dict[str, str] = {}
    for edge in sorted(src.edges, key=lambda e: e.eid):
        pool = sorted(
            dst.edges_between(assignment[edge.src], assignment[edge.dst]),
            key=lambda e: e.eid,
        )
        image = next(e for e in pool if _edge_compatible(edge, e, label_preserving))
        edge_map[edge.eid] = image.eid
    return GraphMorphism(node_map=assignment, edge_map=edge_map)


def compose_morphisms(m1: GraphMorphism, m2: GraphMorphism) -> GraphMorphism:
    """Composition: apply m1, then m2."""
    return GraphMorphism(
        node_map={u: m2.node_map[v] for u, v in m1.node_map.items()},
        edge_map={e: m2.edge_map[f] for e, f in m1.edge_map.items()},
    )


def identity_morphism(graph: TypeGraph) -> GraphMorphism:
    return GraphMorphism(
        node_map={n.name: n.name for n in graph.nodes},
        edge_map={e.eid: e.eid for e in graph.edges},
    )


def morphism_to_json(m: GraphMorphism) -> dict:
    return {
        "nodes": dict(sorted(m.node_map.items())),
        "edges": dict(sorted(m.edge_map.items())),
    }


def morphism_from_json(doc: Mapping) -> GraphMorphism:
    return GraphMorphism(node_map=dict(doc["nodes"]), edge_map=dict(doc["edges"]))


def morphism_to_json_str(m: GraphMorphism) -> str:
    return json.dumps(morphism_to_json(m), indent=2) + "\n"
