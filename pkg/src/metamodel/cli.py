"""Command-line front end.

Subcommands mirror the library modules: ``graph build`` and ``ambiguity``
consume JSONL traces, ``morphism`` relates two serialized type graphs,
``orbit`` explores the polynomial transformation monoid, and ``model``
runs/augments/selects executable models.

Exit codes are stable: 0 success, 1 malformed or unreadable input, 2
ambiguity evidence reported, 3 no morphism found, 4 orbit state cap
exceeded.  Artifacts go to stdout (or --out); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from .errors import (
    DepthExceeded,
    InvalidConstraint,
    MalformedRecord,
    MetamodelError,
)
from .models import (
    AddState,
    AddTransition,
    ConstProb,
    FormalPolynomial,
    FractionProb,
    RefactorStates,
    RemoveState,
    TransitionRule,
    POLYNOMIAL_GENERATORS,
    augment,
    fit_lasso,
    fitted_to_json,
    run_abm,
    select_lambda_cv,
    select_model,
    spec_from_json,
    spec_to_json,
    trajectory_to_csv,
)
from .morphism import find_homomorphism, morphism_to_json_str
from .rewriting import explore_orbit, orbit_to_dot, orbit_to_json_str
from .trace import ingest_trace
from .typegraph import (
    build_typegraph,
    detect_ambiguity,
    graph_from_json,
    graph_to_json_str,
    to_dot,
)

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_AMBIGUOUS = 2
EXIT_NO_MORPHISM = 3
EXIT_ORBIT_CAP = 4


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_BAD_INPUT


def _load_trace(path: str):
    try:
        return ingest_trace(path)
    except OSError as exc:
        raise MetamodelError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _read_xy_csv(path: str) -> tuple[list[float], list[float]]:
    xs, ys = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                x, y = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                if not xs:
                    continue  # header row
                raise MetamodelError(f"{path}: malformed data row {row!r}") from None
            xs.append(x)
            ys.append(y)
    if not xs:
        raise MetamodelError(f"{path}: no data rows")
    return xs, ys


def _parse_exponents(text: str) -> FormalPolynomial:
    try:
        exponents = [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise MetamodelError(f"bad exponent list {text!r}") from None
    return FormalPolynomial.from_exponents(exponents)


def _parse_transition(text: str) -> TransitionRule:
    parts = text.split(":")
    try:
        if len(parts) == 4 and parts[2] == "const":
            return TransitionRule(parts[0], parts[1], ConstProb(float(parts[3])))
        if len(parts) == 5 and parts[2] in ("frac", "fraction"):
            return TransitionRule(parts[0], parts[1], FractionProb(parts[3], float(parts[4])))
    except ValueError:
        pass
    raise MetamodelError(
        f"bad transition {text!r}; expected FROM:TO:const:P or FROM:TO:frac:STATE:BETA"
    )


def _load_spec(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return spec_from_json(json.load(fh))
    except OSError as exc:
        raise MetamodelError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except (ValueError, KeyError) as exc:
        raise MetamodelError(f"{path}: invalid model spec ({exc})") from exc


def _load_graph(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return graph_from_json(json.load(fh))
    except OSError as exc:
        raise MetamodelError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except (ValueError, KeyError) as exc:
        raise MetamodelError(f"{path}: invalid graph document ({exc})") from exc


def cmd_graph_build(args) -> int:
    graph = build_typegraph(_load_trace(args.trace))
    if args.format == "dot":
        _emit(to_dot(graph, show_counts=args.show_counts), args.out)
    else:
        _emit(graph_to_json_str(graph), args.out)
    return EXIT_OK


def cmd_ambiguity(args) -> int:
    graph = build_typegraph(_load_trace(args.trace))
    reports = detect_ambiguity(graph)
    doc = [
        {
            "codomain": r.codomain,
            "witnesses": [
                {
                    "edge_f": w.edge_f,
                    "edge_g": w.edge_g,
                    "call_counts": list(w.call_counts),
                }
                for w in r.witnesses
            ],
            "suggested_split": list(r.suggested_split),
        }
        for r in reports
    ]
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    if reports:
        print(
            f"ambiguity evidence on {len(reports)} type(s): "
            + ", ".join(r.codomain for r in reports),
            file=sys.stderr,
        )
        return EXIT_AMBIGUOUS
    return EXIT_OK


def cmd_morphism(args) -> int:
    src = _load_graph(args.src)
    dst = _load_graph(args.dst)
    constraints = {}
    for item in args.constrain or []:
        if "=" not in item:
            return _fail(f"bad constraint {item!r}; expected SRC=DST")
        key, _, value = item.partition("=")
        constraints[key] = value
    try:
        found = find_homomorphism(
            src, dst, constraints, label_preserving=args.label_preserving
        )
    except InvalidConstraint as exc:
        return _fail(str(exc))
    if found is None:
        _emit("none\n", args.out)
        return EXIT_NO_MORPHISM
    _emit(morphism_to_json_str(found), args.out)
    return EXIT_OK


def cmd_orbit(args) -> int:
    base = _parse_exponents(args.base)
    try:
        orbit = explore_orbit(
            base, POLYNOMIAL_GENERATORS, args.depth, max_states=args.max_states
        )
    except DepthExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORBIT_CAP
    if args.format == "dot":
        _emit(orbit_to_dot(orbit), args.out)
    else:
        _emit(orbit_to_json_str(orbit), args.out)
    return EXIT_OK


def cmd_model_run(args) -> int:
    spec = _load_spec(args.spec)
    trajectory = run_abm(spec, args.steps, args.seed)
    _emit(trajectory_to_csv(trajectory), args.out)
    return EXIT_OK


def cmd_model_augment(args) -> int:
    spec = _load_spec(args.spec)
    for name in args.add_state or []:
        spec = augment(spec, AddState(name))
    for text in args.add_transition or []:
        spec = augment(spec, AddTransition(_parse_transition(text)))
    for name in args.remove_state or []:
        spec = augment(spec, RemoveState(name))
    if args.refactor:
        spec = augment(spec, RefactorStates())
    _emit(json.dumps(spec_to_json(spec), indent=2) + "\n", args.out)
    return EXIT_OK


def _thread_count(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("METAMODEL_THREADS")
    return int(env) if env else 1


def cmd_model_select(args) -> int:
    train = _read_xy_csv(args.train)
    val = _read_xy_csv(args.val)
    base = _parse_exponents(args.base)
    orbit = explore_orbit(base, POLYNOMIAL_GENERATORS, args.orbit_depth)
    best, word_length = select_model(orbit, train, val, threads=_thread_count(args))
    doc = fitted_to_json(best)
    doc["word_length"] = word_length
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_model_lasso(args) -> int:
    xs, ys = _read_xy_csv(args.train)
    structure = _parse_exponents(args.exponents)
    if args.cv:
        lam, scores = select_lambda_cv(structure, xs, ys, seed=args.seed)
    else:
        lam, scores = args.lam, None
    fitted = fit_lasso(structure, xs, ys, lam)
    doc = fitted_to_json(fitted)
    doc["lambda"] = lam
    if scores is not None:
        doc["cv_scores"] = {f"{k:.6g}": v for k, v in scores.items()}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metamodel",
        description="Type-graph analysis and algebraic model selection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    graph = sub.add_parser("graph", help="type-graph operations")
    graph_sub = graph.add_subparsers(dest="graph_command", required=True)
    build = graph_sub.add_parser("build", help="build a type graph from a JSONL trace")
    build.add_argument("trace")
    build.add_argument("--format", choices=("dot", "json"), default="dot")
    build.add_argument("--show-counts", action="store_true")
    build.add_argument("--out")
    build.set_defaults(func=cmd_graph_build)

    amb = sub.add_parser("ambiguity", help="report disjoint-range evidence per codomain")
    amb.add_argument("trace")
    amb.add_argument("--out")
    amb.set_defaults(func=cmd_ambiguity)

    mor = sub.add_parser("morphism", help="search for a graph homomorphism")
    mor.add_argument("src", help="source graph JSON")
    mor.add_argument("dst", help="target graph JSON")
    mor.add_argument("--constrain", action="append", metavar="SRC=DST")
    mor.add_argument("--label-preserving", action="store_true")
    mor.add_argument("--out")
    mor.set_defaults(func=cmd_morphism)

    orb = sub.add_parser("orbit", help="explore the polynomial transformation orbit")
    orb.add_argument("--base", default="0", help="comma-separated exponents (default: constant 1)")
    orb.add_argument("--depth", type=int, required=True)
    orb.add_argument("--max-states", type=int, default=100_000)
    orb.add_argument("--format", choices=("dot", "json"), default="dot")
    orb.add_argument("--out")
    orb.set_defaults(func=cmd_orbit)

    model = sub.add_parser("model", help="run, augment, or select executable models")
    model_sub = model.add_subparsers(dest="model_command", required=True)

    run = model_sub.add_parser("run", help="simulate an agent-based model spec")
    run.add_argument("--spec", required=True)
    run.add_argument("--steps", type=int, required=True)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out")
    run.set_defaults(func=cmd_model_run)

    aug = model_sub.add_parser("augment", help="apply transformations to a model spec")
    aug.add_argument("--spec", required=True)
    aug.add_argument("--add-state", action="append", metavar="NAME")
    aug.add_argument("--add-transition", action="append", metavar="FROM:TO:const:P")
    aug.add_argument("--remove-state", action="append", metavar="NAME")
    aug.add_argument("--refactor", action="store_true")
    aug.add_argument("--out")
    aug.set_defaults(func=cmd_model_augment)

    sel = model_sub.add_parser("select", help="fit every orbit state and keep the best")
    sel.add_argument("--orbit-depth", type=int, required=True)
    sel.add_argument("--train", required=True, help="CSV with x,y columns")
    sel.add_argument("--val", required=True, help="CSV with x,y columns")
    sel.add_argument("--base", default="0")
    sel.add_argument("--threads", type=int, default=None)
    sel.add_argument("--out")
    sel.set_defaults(func=cmd_model_select)

    las = model_sub.add_parser("lasso", help="L1-penalized polynomial fit")
    las.add_argument("--train", required=True, help="CSV with x,y columns")
    las.add_argument("--exponents", required=True, help="comma-separated exponents")
    group = las.add_mutually_exclusive_group(required=True)
    group.add_argument("--lam", type=float)
    group.add_argument("--cv", action="store_true")
    las.add_argument("--seed", type=int, default=0)
    las.add_argument("--out")
    las.set_defaults(func=cmd_model_lasso)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MalformedRecord as exc:
        return _fail(str(exc))
    except MetamodelError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
