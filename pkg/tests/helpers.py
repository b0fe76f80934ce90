"""Shared builders and independent oracles for the test suite.

The oracles here deliberately avoid the library's search/normalization code
paths: the homomorphism oracle enumerates every node map, and the orbit
oracle applies generators recursively with a plain set.
"""

from __future__ import annotations

import json
import random
from itertools import product as iproduct

from metamodel.typegraph import (
    EdgeKind,
    TypeGraph,
    TypeNode,
    assemble_graph,
    product_name,
    projection_label,
)

ARITHMETIC_TRACE_LINES = [
    {"fn": "Main.identity", "args": ["Float"], "ret": "Float"},
    {"fn": "Main.identity", "args": ["Int"], "ret": "Int"},
    {"fn": "Main.*", "args": ["Int", "Float"], "ret": "Float"},
    {"fn": "Main.+", "args": ["Int", "Float"], "ret": "Float"},
]

SIR_PROBLEM_TRACE_LINES = [
    {
        "fn": ".param",
        "args": ["Problem"],
        "ret": "Vector{Float}",
        "rfp": {"kind": "len", "lo": 2, "hi": 2, "samples": []},
    },
    {
        "fn": ".initial",
        "args": ["Problem"],
        "ret": "Vector{Float}",
        "rfp": {"kind": "len", "lo": 3, "hi": 3, "samples": []},
    },
    {
        "fn": ".first",
        "args": ["Problem"],
        "ret": "Float",
        "rfp": {"kind": "num", "lo": 0, "hi": 10, "samples": []},
    },
    {
        "fn": ".second",
        "args": ["Problem"],
        "ret": "Float",
        "rfp": {"kind": "num", "lo": 5, "hi": 20, "samples": []},
    },
    {"fn": "solve", "args": ["Problem", "Int"], "ret": "Vector{Vector{Int}}"},
]


def write_jsonl(path, lines) -> str:
    with open(path, "w", encoding="utf-8") as fh:
        for obj in lines:
            fh.write(json.dumps(obj) + "\n")
    return str(path)


def simple_graph(edges, extra_nodes=()) -> TypeGraph:
    """Graph from (label, src, dst) triples of plain function edges."""
    names = set(extra_nodes)
    specs = []
    for label, src, dst in edges:
        names.update((src, dst))
        specs.append((label, src, dst, EdgeKind.FUNCTION, 0, None, 0))
    return assemble_graph([TypeNode(n) for n in sorted(names)], specs)


def graph_with_product(factors, edges, extra_nodes=()) -> TypeGraph:
    """Like simple_graph, plus one product node with its projection edges."""
    pname = product_name(factors)
    names = set(extra_nodes) | set(factors)
    specs = []
    for label, src, dst in edges:
        names.update(n for n in (src, dst) if n != pname)
        specs.append((label, src, dst, EdgeKind.FUNCTION, 0, None, 0))
    nodes = [TypeNode(n) for n in sorted(names)]
    nodes.append(TypeNode(pname, is_product=True, factors=tuple(factors)))
    for i, f in enumerate(factors, start=1):
        specs.append((projection_label(i), pname, f, EdgeKind.PROJECTION, i, None, 0))
    return assemble_graph(nodes, specs)


def mul_program_graph() -> TypeGraph:
    """Two integers multiplied, result doubled: product node, *, and a 2x loop."""
    return graph_with_product(
        ("Z", "Z"),
        [
            ("*", product_name(("Z", "Z")), "Z"),
            ("2×", "Z", "Z"),
        ],
    )


def div_program_graph() -> TypeGraph:
    """Two values divided (may error), result doubled: same shape as mul."""
    r = "R⊕Error"
    return graph_with_product(
        (r, r),
        [
            ("/", product_name((r, r)), r),
            ("2×", r, r),
        ],
    )


def _compatible(src_edge, dst_edge, label_preserving=False) -> bool:
    if src_edge.kind is EdgeKind.PROJECTION:
        if dst_edge.kind is not EdgeKind.PROJECTION or dst_edge.index != src_edge.index:
            return False
    if label_preserving and src_edge.label != dst_edge.label:
        return False
    return True


def brute_force_homomorphism_exists(
    src: TypeGraph, dst: TypeGraph, constraints=None, label_preserving=False
) -> bool:
    """Exhaustive reference: try every node map, check every edge has an image."""
    src_names = [n.name for n in src.nodes]
    dst_names = [n.name for n in dst.nodes]
    if not src_names:
        return True
    if not dst_names:
        return False
    constraints = constraints or {}
    for combo in iproduct(dst_names, repeat=len(src_names)):
        node_map = dict(zip(src_names, combo))
        if any(node_map[k] != v for k, v in constraints.items()):
            continue
        ok = True
        for e in src.edges:
            pool = dst.edges_between(node_map[e.src], node_map[e.dst])
            if not any(_compatible(e, d, label_preserving) for d in pool):
                ok = False
                break
        if ok:
            return True
    return False


def random_typegraph(rng: random.Random, max_nodes=5, max_edges=8) -> TypeGraph:
    """Random multigraph, occasionally with a product node and projections."""
    n = rng.randint(1, max_nodes)
    names = [chr(ord("A") + i) for i in range(n)]
    specs = []
    nodes = [TypeNode(nm) for nm in names]
    budget = rng.randint(0, max_edges)
    if n >= 2 and budget >= 2 and rng.random() < 0.3:
        factors = (rng.choice(names), rng.choice(names))
        pname = product_name(factors)
        nodes.append(TypeNode(pname, is_product=True, factors=factors))
        for i, f in enumerate(factors, start=1):
            specs.append((projection_label(i), pname, f, EdgeKind.PROJECTION, i, None, 0))
        budget -= 2
        names.append(pname)
    for i in range(budget):
        u, v = rng.choice(names), rng.choice(names)
        specs.append((f"e{i}", u, v, EdgeKind.FUNCTION, 0, None, 0))
    return assemble_graph(nodes, specs)


def orbit_states_oracle(base, generators, depth) -> set:
    """Naive recursive closure: every state reachable in at most ``depth`` steps."""
    states = {base}
    frontier = {base}
    for _ in range(depth):
        frontier = {action(s) for s in frontier for _, action in generators}
        states |= frontier
    return states


def lasso_kkt_violation(fitted, xs, ys, lam) -> float:
    """Worst KKT residual of ||y - Xb||^2 + lam*sum|b|, computed from scratch.

    For nonzero b_i the stationarity residual is |2 X_i^T r + lam*sign(b_i)|;
    for zero b_i it is max(0, |2 X_i^T r| - lam).
    """
    import numpy as np

    exps = sorted(fitted.structure.terms)
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    X = np.column_stack([x**e for e in exps]) if exps else np.empty((len(x), 0))
    beta = np.array([fitted.coefficients[e] for e in exps])
    grad = 2.0 * X.T @ (X @ beta - y)
    worst = 0.0
    for g, b in zip(grad, beta):
        if b != 0.0:
            worst = max(worst, abs(g + lam * (1.0 if b > 0 else -1.0)))
        else:
            worst = max(worst, max(0.0, abs(g) - lam))
    return worst
