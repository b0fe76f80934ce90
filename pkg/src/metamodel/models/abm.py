"""Stochastic compartmental agent-based models with algebraic augmentation.

Agents carry a state name; per step each agent checks its state's transition
rules in declaration order against its own uniform draws and moves on the
first hit.  Transition probabilities are either constants or proportional to
the fraction of the population in some state, measured at the start of the
step (synchronous update).

Randomness is counter-based: the uniform for (seed, step, agent, rule slot)
is a SplitMix64 hash of those indices, so a draw does not depend on how many
draws other agents or slots consume.  Per step every agent owns K slots, K
being the maximum outgoing-rule count over all states.  This makes
augmentations with zero-probability transitions bitwise-neutral: the old
rules keep their slots, hence their draws, hence their outcomes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Mapping, Union

import numpy as np

from ..errors import AlreadyRefactored, InvalidSpec, StateInUse, UnknownState
from ..morphism import GraphMorphism
from ..typegraph import (
    EdgeKind,
    TypeGraph,
    TypeNode,
    assemble_graph,
    product_name,
    projection_label,
)
from .base import ModelSignature

DEFAULT_STATE_NAMES = {
    "S": "Susceptible",
    "I": "Infected",
    "R": "Recovered",
    "D": "Dead",
    "E": "Exposed",
}


class StateRepresentation(Enum):
    SYMBOL = "symbol"
    SINGLETON = "singleton"


@dataclass(frozen=True)
class ConstProb:
    """A transition that fires with fixed probability."""

    value: float

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise InvalidSpec(f"constant probability {self.value} outside [0, 1]")


@dataclass(frozen=True)
class FractionProb:
    """Fires with probability coefficient * (fraction of agents in ``state``)."""

    state: str
    coefficient: float

    def __post_init__(self):
        if not (0.0 <= self.coefficient <= 1.0):
            raise InvalidSpec(f"coefficient {self.coefficient} outside [0, 1]")


ProbExpr = Union[ConstProb, FractionProb]


@dataclass(frozen=True)
class TransitionRule:
    from_state: str
    to_state: str
    prob: ProbExpr


@dataclass(frozen=True)
class AddState:
    name: str
    metadata: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class AddTransition:
    rule: TransitionRule
    metadata: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class RemoveState:
    name: str
    metadata: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class RefactorStates:
    name_map: Mapping[str, str] | None = None
    metadata: Mapping[str, Any] = field(default_factory=dict)


ModelTransform = Union[AddState, AddTransition, RemoveState, RefactorStates]


@dataclass(frozen=True)
class AbmSpec:
    """States, transition rules, and initial population of a compartmental ABM."""

    states: tuple[str, ...]
    transitions: tuple[TransitionRule, ...]
    initial_counts: Mapping[str, int]
    state_representation: StateRepresentation = StateRepresentation.SYMBOL
    provenance: tuple[ModelTransform, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        object.__setattr__(self, "initial_counts", dict(self.initial_counts))
        object.__setattr__(self, "provenance", tuple(self.provenance))
        if not self.states:
            raise InvalidSpec("spec must declare at least one state")
        if len(set(self.states)) != len(self.states):
            raise InvalidSpec("duplicate state names")
        known = set(self.states)
        for rule in self.transitions:
            for ref in (rule.from_state, rule.to_state):
                if ref not in known:
                    raise UnknownState(f"transition references unknown state {ref!r}")
            if isinstance(rule.prob, FractionProb) and rule.prob.state not in known:
                raise UnknownState(
                    f"transition probability references unknown state {rule.prob.state!r}"
                )
        for state, count in self.initial_counts.items():
            if state not in known:
                raise UnknownState(f"initial count for unknown state {state!r}")
            if not isinstance(count, int) or count < 0:
                raise InvalidSpec(f"initial count for {state!r} must be a nonnegative integer")
        # Worst-case outgoing mass per state must stay within 1 for any
        # population distribution (a fraction term can reach its coefficient).
        for state in self.states:
            worst = 0.0
            for rule in self.rules_for(state):
                worst += rule.prob.value if isinstance(rule.prob, ConstProb) else rule.prob.coefficient
            if worst > 1.0 + 1e-12:
                raise InvalidSpec(
                    f"outgoing probabilities of {state!r} can sum to {worst} > 1"
                )

    def rules_for(self, state: str) -> tuple[TransitionRule, ...]:
        return tuple(r for r in self.transitions if r.from_state == state)

    def max_outgoing(self) -> int:
        return max((len(self.rules_for(s)) for s in self.states), default=0)

    def n_agents(self) -> int:
        return sum(self.initial_counts.get(s, 0) for s in self.states)

    def signature(self) -> ModelSignature:
        return ModelSignature(("t",), self.states, description="compartment counts over time")


def sirs_spec(
    beta: float = 0.4,
    rho: float = 0.2,
    mu: float = 0.1,
    initial: Mapping[str, int] | None = None,
) -> AbmSpec:
    """The stock susceptible/infected/recovered model with waning immunity."""
    return AbmSpec(
        states=("S", "I", "R"),
        transitions=(
            TransitionRule("S", "I", FractionProb("I", beta)),
            TransitionRule("I", "R", ConstProb(rho)),
            TransitionRule("R", "S", ConstProb(mu)),
        ),
        initial_counts=dict(initial) if initial is not None else {"S": 90, "I": 10, "R": 0},
    )


@dataclass(frozen=True)
class Trajectory:
    """Per-step compartment counts, including the initial step."""

    counts: tuple[Mapping[str, int], ...]
    seed: int
    n_agents: int
    states: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(dict(c) for c in self.counts))
        object.__setattr__(self, "states", tuple(self.states))
        for step, row in enumerate(self.counts):
            total = sum(row.values())
            if total != self.n_agents:
                raise InvalidSpec(
                    f"step {step} counts sum to {total}, expected {self.n_agents}"
                )

    def n_steps(self) -> int:
        return len(self.counts) - 1


_M64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    """The SplitMix64 finalizer; the primitive behind all simulation draws."""
    z = (z + _GAMMA) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return (z ^ (z >> 31)) & _M64


def uniform_draw(seed: int, step: int, agent: int, slot: int) -> float:
    """The uniform in [0, 1) owned by (seed, step, agent, slot)."""
    h = splitmix64(seed & _M64)
    h = splitmix64(h ^ splitmix64(step))
    h = splitmix64(h ^ splitmix64(agent))
    h = splitmix64(h ^ splitmix64(slot))
    return h / 2.0**64


def _splitmix64_vec(z: np.ndarray) -> np.ndarray:
    z = (z + np.uint64(_GAMMA))
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _uniform_block(seed: int, step: int, n_agents: int, slots: int) -> np.ndarray:
    """All draws for one step, shape (n_agents, slots); matches uniform_draw."""
    h0 = splitmix64(seed & _M64)
    h1 = splitmix64(h0 ^ splitmix64(step))
    agents = _splitmix64_vec(np.arange(n_agents, dtype=np.uint64))
    h2 = _splitmix64_vec(np.uint64(h1) ^ agents)[:, None]
    slot_hash = _splitmix64_vec(np.arange(slots, dtype=np.uint64))[None, :]
    h3 = _splitmix64_vec(h2 ^ slot_hash)
    return h3.astype(np.float64) / 2.0**64


def _prob_value(prob: ProbExpr, counts: Mapping[str, int], n_agents: int) -> float:
    if isinstance(prob, ConstProb):
        return prob.value
    if n_agents == 0:
        return 0.0
    return prob.coefficient * counts[prob.state] / n_agents


def run_abm(spec: AbmSpec, n_steps: int, seed: int) -> Trajectory:
    """Simulate the model for ``n_steps`` steps under the given seed.

    Agents start in state-list order per the initial counts.  Counts are
    recorded after every step, step 0 (the initial population) included.
    The run is a pure function of (spec, n_steps, seed).
    """
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    state_index = {s: i for i, s in enumerate(spec.states)}
    agents = np.array(
        [state_index[s] for s in spec.states for _ in range(spec.initial_counts.get(s, 0))],
        dtype=np.int64,
    )
    n = len(agents)
    slots = spec.max_outgoing()

    # Per-state rule tables: rule slot -> target state; probabilities are
    # refreshed each step from the step-start distribution.
    n_states = len(spec.states)
    rules_by_state = [spec.rules_for(s) for s in spec.states]
    targets = np.tile(np.arange(n_states, dtype=np.int64)[:, None], (1, max(slots, 1)))
    for si, rules in enumerate(rules_by_state):
        for slot, rule in enumerate(rules):
            targets[si, slot] = state_index[rule.to_state]

    def counts_of(agent_states: np.ndarray) -> dict[str, int]:
        bins = np.bincount(agent_states, minlength=n_states) if n else np.zeros(n_states, int)
        return {s: int(bins[i]) for i, s in enumerate(spec.states)}

    trajectory = [counts_of(agents)]
    for step in range(n_steps):
        start_counts = trajectory[-1]
        if n and slots:
            probs = np.zeros((n_states, slots))
            for si, rules in enumerate(rules_by_state):
                for slot, rule in enumerate(rules):
                    probs[si, slot] = _prob_value(rule.prob, start_counts, n)
            draws = _uniform_block(seed, step, n, slots)
            fired = draws < probs[agents]
            any_fired = fired.any(axis=1)
            first_slot = fired.argmax(axis=1)
            agents = np.where(any_fired, targets[agents, first_slot], agents)
        trajectory.append(counts_of(agents))
    return Trajectory(
        counts=tuple(trajectory), seed=seed, n_agents=n, states=spec.states
    )


@dataclass(frozen=True)
class StateSummary:
    peak: int
    peak_time: int
    final: int
    mean: float


def describe(trajectory: Trajectory) -> dict[str, StateSummary]:
    """Per-state peak, peak time (first occurrence), final count, and mean."""
    summaries = {}
    for state in trajectory.states:
        series = [row.get(state, 0) for row in trajectory.counts]
        peak = max(series)
        summaries[state] = StateSummary(
            peak=peak,
            peak_time=series.index(peak),
            final=series[-1],
            mean=sum(series) / len(series),
        )
    return summaries


def augment(spec: AbmSpec, transform: ModelTransform) -> AbmSpec:
    """Apply one transformation, recording it in the result's provenance."""
    if isinstance(transform, AddState):
        if transform.name in spec.states:
            raise InvalidSpec(f"state {transform.name!r} already exists")
        return replace(
            spec,
            states=spec.states + (transform.name,),
            initial_counts={**spec.initial_counts, transform.name: 0},
            provenance=spec.provenance + (transform,),
        )
    if isinstance(transform, AddTransition):
        rule = transform.rule
        for ref in (rule.from_state, rule.to_state):
            if ref not in spec.states:
                raise UnknownState(f"transition references unknown state {ref!r}")
        if isinstance(rule.prob, FractionProb) and rule.prob.state not in spec.states:
            raise UnknownState(f"probability references unknown state {rule.prob.state!r}")
        return replace(
            spec,
            transitions=spec.transitions + (rule,),
            provenance=spec.provenance + (transform,),
        )
    if isinstance(transform, RemoveState):
        if transform.name not in spec.states:
            raise UnknownState(f"cannot remove unknown state {transform.name!r}")
        for rule in spec.transitions:
            refs = {rule.from_state, rule.to_state}
            if isinstance(rule.prob, FractionProb):
                refs.add(rule.prob.state)
            if transform.name in refs:
                raise StateInUse(f"state {transform.name!r} is referenced by a transition")
        if spec.initial_counts.get(transform.name, 0) > 0:
            raise StateInUse(f"state {transform.name!r} has a nonzero initial count")
        return replace(
            spec,
            states=tuple(s for s in spec.states if s != transform.name),
            initial_counts={k: v for k, v in spec.initial_counts.items() if k != transform.name},
            provenance=spec.provenance + (transform,),
        )
    if isinstance(transform, RefactorStates):
        refactored, _ = refactor_states(spec, transform.name_map)
        return refactored
    raise TypeError(f"unknown transform {transform!r}")


def abm_typegraph(spec: AbmSpec) -> TypeGraph:
    """The type graph of the program implementing this spec.

    Symbol representation: all states share one Symbol node, transition
    handlers are anonymous parallel edges on (Symbol,Float) -> Symbol.
    Singleton representation: each state is its own type and every rule gets
    a named transition edge (From,Float) -> To.
    """
    nodes: dict[str, TypeNode] = {
        "Float": TypeNode("Float"),
        "Population": TypeNode("Population"),
    }
    specs: list[tuple] = [
        ("distribution", "Population", "Float", EdgeKind.FUNCTION, 0, None, 0),
        ("step!", "Population", "Population", EdgeKind.FUNCTION, 0, None, 0),
    ]

    def add_product(factors: tuple[str, ...]) -> str:
        pname = product_name(factors)
        if pname not in nodes:
            nodes[pname] = TypeNode(pname, is_product=True, factors=factors)
            for i, f in enumerate(factors, start=1):
                specs.append((projection_label(i), pname, f, EdgeKind.PROJECTION, i, None, 0))
        return pname

    if spec.state_representation is StateRepresentation.SYMBOL:
        nodes["Agent"] = TypeNode("Agent")
        nodes["Symbol"] = TypeNode("Symbol")
        specs.append((".state", "Agent", "Symbol", EdgeKind.FUNCTION, 0, None, 0))
        if spec.transitions:
            pname = add_product(("Symbol", "Float"))
            for i, _rule in enumerate(spec.transitions, start=1):
                specs.append((f"λ{i}", pname, "Symbol", EdgeKind.FUNCTION, 0, None, 0))
    else:
        for state in spec.states:
            nodes[state] = TypeNode(state)
        for rule in spec.transitions:
            pname = add_product((rule.from_state, "Float"))
            specs.append(("transition", pname, rule.to_state, EdgeKind.FUNCTION, 0, None, 0))
    return assemble_graph(nodes.values(), specs)


def refactor_states(
    spec: AbmSpec, name_map: Mapping[str, str] | None = None
) -> tuple[AbmSpec, GraphMorphism]:
    """Re-encode symbol states as singleton types without changing behavior.

    Returns the renamed spec plus the graph homomorphism from the refactored
    program's type graph back onto the original's (all state types collapse
    to the Symbol node).  Trajectories are preserved: only names change.
    """
    if spec.state_representation is not StateRepresentation.SYMBOL:
        raise AlreadyRefactored("spec already uses singleton state types")
    mapping = {s: DEFAULT_STATE_NAMES.get(s, s) for s in spec.states}
    if name_map:
        mapping.update({k: v for k, v in name_map.items() if k in mapping})
    renamed = [mapping[s] for s in spec.states]
    if len(set(renamed)) != len(renamed):
        raise InvalidSpec("state name map is not injective on the spec's states")

    transform = RefactorStates(name_map=dict(mapping))
    new_spec = AbmSpec(
        states=tuple(renamed),
        transitions=tuple(
            TransitionRule(
                mapping[r.from_state],
                mapping[r.to_state],
                r.prob
                if isinstance(r.prob, ConstProb)
                else FractionProb(mapping[r.prob.state], r.prob.coefficient),
            )
            for r in spec.transitions
        ),
        initial_counts={mapping[s]: c for s, c in spec.initial_counts.items()},
        state_representation=StateRepresentation.SINGLETON,
        provenance=spec.provenance + (transform,),
    )

    src = abm_typegraph(new_spec)
    dst = abm_typegraph(spec)
    node_map: dict[str, str] = {}
    for node in src.nodes:
        if node.is_product:
            node_map[node.name] = product_name(("Symbol", "Float"))
        elif node.name in set(renamed):
            node_map[node.name] = "Symbol"
        else:
            node_map[node.name] = node.name
    edge_map: dict[str, str] = {}
    # Every named transition edge and every anonymous original runs between
    # the images (Symbol,Float) -> Symbol, so any pairing is incidence-safe;
    # pair them in sorted order for determinism.
    transition_eids = sorted(e.eid for e in src.edges if e.label == "transition")
    lambda_edges = sorted(
        (e for e in dst.edges if e.label.startswith("λ")),
        key=lambda e: int(e.label[1:]),
    )
    for eid, lam in zip(transition_eids, lambda_edges):
        edge_map[eid] = lam.eid
    for e in src.edges:
        if e.eid in edge_map:
            continue
        if e.kind is EdgeKind.PROJECTION:
            target_pname = product_name(("Symbol", "Float"))
            edge_map[e.eid] = _find_eid(dst, projection_label(e.index), src_name=target_pname)
        else:
            edge_map[e.eid] = _find_eid(dst, e.label)
    return new_spec, GraphMorphism(node_map=node_map, edge_map=edge_map)


def _find_eid(graph: TypeGraph, label: str, src_name: str | None = None) -> str:
    for e in graph.edges:
        if e.label == label and (src_name is None or e.src == src_name):
            return e.eid
    raise KeyError(f"no edge labeled {label!r}")


def spec_to_json(spec: AbmSpec) -> dict:
    def prob_doc(p: ProbExpr) -> dict:
        if isinstance(p, ConstProb):
            return {"kind": "const", "value": p.value}
        return {"kind": "fraction", "state": p.state, "coefficient": p.coefficient}

    def transform_doc(t: ModelTransform) -> dict:
        if isinstance(t, AddState):
            return {"transform": "add_state", "state": t.name, "metadata": dict(t.metadata)}
        if isinstance(t, AddTransition):
            return {
                "transform": "add_transition",
                "from": t.rule.from_state,
                "to": t.rule.to_state,
                "prob": prob_doc(t.rule.prob),
                "metadata": dict(t.metadata),
            }
        if isinstance(t, RemoveState):
            return {"transform": "remove_state", "state": t.name, "metadata": dict(t.metadata)}
        return {
            "transform": "refactor_states",
            "name_map": dict(t.name_map or {}),
            "metadata": dict(t.metadata),
        }

    return {
        "states": list(spec.states),
        "transitions": [
            {"from": r.from_state, "to": r.to_state, "prob": prob_doc(r.prob)}
            for r in spec.transitions
        ],
        "initial_counts": {s: spec.initial_counts.get(s, 0) for s in spec.states},
        "state_representation": spec.state_representation.value,
        "provenance": [transform_doc(t) for t in spec.provenance],
    }


def spec_from_json(doc: Mapping) -> AbmSpec:
    def prob_from(d: Mapping) -> ProbExpr:
        if d["kind"] == "const":
            return ConstProb(float(d["value"]))
        if d["kind"] == "fraction":
            return FractionProb(str(d["state"]), float(d["coefficient"]))
        raise InvalidSpec(f"unknown probability kind {d.get('kind')!r}")

    def transform_from(d: Mapping) -> ModelTransform:
        kind = d.get("transform")
        meta = dict(d.get("metadata", {}))
        if kind == "add_state":
            return AddState(d["state"], meta)
        if kind == "add_transition":
            return AddTransition(
                TransitionRule(d["from"], d["to"], prob_from(d["prob"])), meta
            )
        if kind == "remove_state":
            return RemoveState(d["state"], meta)
        if kind == "refactor_states":
            return RefactorStates(dict(d.get("name_map", {})), meta)
        raise InvalidSpec(f"unknown transform kind {kind!r}")

    return AbmSpec(
        states=tuple(doc["states"]),
        transitions=tuple(
            TransitionRule(t["from"], t["to"], prob_from(t["prob"]))
            for t in doc.get("transitions", ())
        ),
        initial_counts={k: int(v) for k, v in doc.get("initial_counts", {}).items()},
        state_representation=StateRepresentation(doc.get("state_representation", "symbol")),
        provenance=tuple(transform_from(t) for t in doc.get("provenance", ())),
    )


def trajectory_to_csv(trajectory: Trajectory) -> str:
    """CSV with a step column followed by one column per state."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["step", *trajectory.states])
    for step, row in enumerate(trajectory.counts):
        writer.writerow([step, *(row.get(s, 0) for s in trajectory.states)])
    return buffer.getvalue()
