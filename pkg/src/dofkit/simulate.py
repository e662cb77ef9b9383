"""Executable existence arguments: witnesses, oracle dissent, side information, CAP, replay."""

from __future__ import annotations

import enum
import math
import random
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

from .dof import compute_dof
from .errors import (
    CapacityAchieving,
    ChoiceNotPresent,
    CoherentState,
    DerivedTargetRejected,
    EditStepError,
    FactNotEncoded,
    InsufficientSideInformation,
    InvalidQuery,
    UnaryDomain,
    UndesignatedAuthority,
    UnknownLocation,
    ValueOutOfDomain,
)
from .model import DerivationGraph, EditEvent, Fact, Location, SystemState, apply_edit

EditScript = Sequence[EditEvent]


@dataclass(frozen=True)
class Witness:
    edits: tuple[EditEvent, EditEvent]
    final_state: SystemState
    disagreeing_pair: tuple[str, str]


def construct_incoherence_witness(
    graph: DerivationGraph, fact: Fact, start: SystemState | None = None
) -> Witness:
    """Two edits to the two smallest sources of ``fact`` that leave them disagreeing.

    The script is valid from every start state; ``start`` only selects which
    one ``final_state`` is computed from (all-zero by default).
    """
    sources = compute_dof(graph.restrict(fact.id)).sources
    if len(sources) <= 1:
        raise CapacityAchieving(
            f"fact {fact.id!r} has dof {len(sources)}: coherent in every reachable state"
        )
    if fact.domain_size < 2:
        raise UnaryDomain(f"fact {fact.id!r} has a single admissible value; disagreement is impossible")
    a, b = sources[0], sources[1]
    edits = (EditEvent(a, 0), EditEvent(b, 1))
    if start is None:
        facts = {f: Fact(f, fact.domain_size if f == fact.id else 1) for f in graph.facts}
        start = SystemState.initial(graph, facts)
    state = start
    for e in edits:
        state = apply_edit(state, e)
    return Witness(edits, state, (a, b))


def oracle_dissent(state: SystemState, fact: Fact | str, oracle_choice: int) -> int:
    """Smallest value present for ``fact`` that disagrees with the oracle's pick."""
    present = set(state.values_of(fact).values())
    if not present:
        raise FactNotEncoded(f"fact {state.fact(fact).id!r} has no encoding locations")
    if oracle_choice not in present:
        raise ChoiceNotPresent(f"value {oracle_choice!r} is not held by any location")
    if len(present) == 1:
        raise CoherentState("all locations agree; no dissenting value exists")
    return min(present - {oracle_choice})


class SideInfoKind(str, enum.Enum):
    PRIORITY_ORDER = "priority_order"
    AUTHORITATIVE_DECLARATION = "authoritative_declaration"
    TIMESTAMP_ORDER = "timestamp_order"


@dataclass(frozen=True)
class SideInfo:
    """External information used to pick one authoritative location.

    ``payload`` is a sequence of location ids. For ``priority_order`` the
    first listed location wins; for ``timestamp_order`` the ids run oldest to
    newest and the last listed location wins. An ``authoritative_declaration``
    names a single location and must say how many candidates it was chosen
    from. ``alternatives`` is that discrimination count; orders default to
    their length.
    """

    kind: SideInfoKind
    payload: tuple[str, ...] = ()
    alternatives: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SideInfoKind(self.kind))
        payload = (self.payload,) if isinstance(self.payload, str) else tuple(self.payload)
        object.__setattr__(self, "payload", payload)
        declaration = self.kind is SideInfoKind.AUTHORITATIVE_DECLARATION
        if declaration and len(payload) > 1:
            raise InvalidQuery("an authoritative declaration names exactly one location")
        if self.alternatives is None:
            if declaration and payload:
                raise InvalidQuery("a declaration must state how many candidates it discriminates")
            object.__setattr__(self, "alternatives", max(1, len(payload)))
        elif self.alternatives < 1:
            raise InvalidQuery(f"alternatives must be >= 1, got {self.alternatives}")

    @classmethod
    def none(cls) -> SideInfo:
        return cls(SideInfoKind.AUTHORITATIVE_DECLARATION, (), 1)

    @classmethod
    def declaration(cls, location: str, among: int) -> SideInfo:
        return cls(SideInfoKind.AUTHORITATIVE_DECLARATION, (location,), among)

    @classmethod
    def priority(cls, order: Sequence[str]) -> SideInfo:
        return cls(SideInfoKind.PRIORITY_ORDER, tuple(order))

    @classmethod
    def timestamps(cls, oldest_first: Sequence[str]) -> SideInfo:
        return cls(SideInfoKind.TIMESTAMP_ORDER, tuple(oldest_first))

    @property
    def bit_content(self) -> float:
        return math.log2(self.alternatives)  # type: ignore[arg-type]

    def designated(self) -> tuple[str, ...]:
        """Candidate locations in decreasing authority."""
        if self.kind is SideInfoKind.TIMESTAMP_ORDER:
            return tuple(reversed(self.payload))
        return self.payload


def resolve_with_side_info(state: SystemState, fact: Fact | str, info: SideInfo) -> int:
    vals = state.values_of(fact)
    if not vals:
        raise FactNotEncoded(f"fact {state.fact(fact).id!r} has no encoding locations")
    g = state.graph
    distinct = {vals[i] for i in vals if not g.parents[i]}
    k = len(distinct)
    # alternatives >= k  <=>  log2(alternatives) >= log2(k), without float noise
    if info.alternatives < k:  # type: ignore[operator]
        raise InsufficientSideInformation(
            f"{k}-way disagreement needs {math.log2(k):.6f} bits; side information carries {info.bit_content:.6f}"
        )
    if k == 1:
        return next(iter(distinct))
    for loc_id in info.designated():
        if loc_id in vals:
            return vals[loc_id]
    raise UndesignatedAuthority(f"side information names none of {sorted(vals)}")


class CapHypothesis(str, enum.Enum):
    PARTITION_TOLERANCE = "partition_tolerance"
    LOCAL_AVAILABILITY = "local_availability"
    NONTRIVIAL_DOMAIN = "nontrivial_domain"


@dataclass(frozen=True)
class CapReport:
    """Outcome of checking coherence + availability + partition tolerance together.

    The triple is never consistent. When both structural hypotheses hold the
    report carries a witness; otherwise ``failed`` names the hypothesis that
    does not hold and the impossibility is vacuous.
    """

    witness: Witness | None
    failed: CapHypothesis | None
    consistent_triple: bool = False

    @property
    def vacuous(self) -> bool:
        return self.witness is None


def cap_check(graph: DerivationGraph, fact: Fact, locally_available: bool = True) -> CapReport:
    sub = graph.restrict(fact.id)
    if len(sub.locations) < 2:
        return CapReport(None, CapHypothesis.PARTITION_TOLERANCE)
    if not locally_available or any(sub.parents[i] for i in sub.location_ids):
        return CapReport(None, CapHypothesis.LOCAL_AVAILABILITY)
    if fact.domain_size < 2:
        return CapReport(None, CapHypothesis.NONTRIVIAL_DOMAIN)
    return CapReport(construct_incoherence_witness(graph, fact), None)


class Step(NamedTuple):
    """One replayed edit; a named tuple because fuzz runs build millions."""

    edit: EditEvent
    coherent: tuple[tuple[str, bool], ...]
    manual_edits: int

    def is_coherent(self, fact: str) -> bool:
        return dict(self.coherent)[fact]


@dataclass(frozen=True)
class Trajectory:
    steps: tuple[Step, ...]
    final_state: SystemState

    @property
    def manual_edits(self) -> int:
        return self.steps[-1].manual_edits if self.steps else 0

    def all_coherent(self) -> bool:
        return all(flag for s in self.steps for _, flag in s.coherent)


def run_edit_sequence(state: SystemState, script: EditScript) -> Trajectory:
    """Replay ``script`` from ``state``, recording coherence after every edit.

    Only applied edits count as manual; propagation into derived locations is
    free. Works on a private value table and skips re-validating the final
    state, since every applied edit was checked; this keeps fuzz runs cheap.
    """
    g = state.graph
    values = dict(state.values)
    by_id, parents, descendants = g.by_id, g.parents, g.descendants
    domain = {f: state.facts[f].domain_size for f in g.facts}
    members = {f: g.locations_of(f) for f in g.facts}
    flags = {f: len({values[i] for i in members[f]}) == 1 for f in g.facts if members[f]}
    steps: list[Step] = []
    coherent = None
    for n, edit in enumerate(script, start=1):
        target = edit.target
        try:
            loc = by_id.get(target)
            if loc is None:
                raise UnknownLocation(target)
            if parents[target]:
                raise DerivedTargetRejected(f"{target!r} is derived from {parents[target][0]!r}")
            k = domain[loc.fact]
            v = edit.new_value
            if not isinstance(v, int) or not 0 <= v < k:
                raise ValueOutOfDomain(f"token {v!r} outside domain of size {k}")
        except Exception as exc:
            raise EditStepError(n, exc) from exc
        values[target] = v
        for d in descendants[target]:
            values[d] = v
        f = loc.fact
        now = len({values[i] for i in members[f]}) == 1
        if now != flags[f] or coherent is None:
            flags[f] = now
            coherent = tuple(sorted(flags.items()))
        steps.append(Step(edit, coherent, n))
    return Trajectory(tuple(steps), SystemState._trusted(g, state.facts, values))


def resync_script(state: SystemState, fact: Fact | str, value: int) -> tuple[EditEvent, ...]:
    """Manual edits needed to move every independent location of ``fact`` to ``value``."""
    fid = state.fact(fact).id
    return tuple(EditEvent(i, value) for i in state.graph.locations_of(fid) if not state.graph.parents[i])


# Seeded generators for fuzzing and the acceptance harness.


def random_forest(rng: random.Random, n: int, fact: str = "f", roots: int | None = None) -> DerivationGraph:
    """A random derivation forest on ``n`` locations with exactly ``roots`` trees."""
    roots = rng.randint(1, n) if roots is None else roots
    if not 1 <= roots <= n:
        raise InvalidQuery(f"need 1 <= roots <= n, got roots={roots}, n={n}")
    width = len(str(n - 1))
    ids = [f"{fact}{i:0{width}d}" for i in range(n)]
    rng.shuffle(ids)
    edges = []
    for pos in range(roots, n):
        edges.append((ids[rng.randrange(pos)], ids[pos]))
    return DerivationGraph(frozenset(Location(i, fact) for i in ids), frozenset(edges))


def random_state(rng: random.Random, graph: DerivationGraph, facts: dict[str, Fact]) -> SystemState:
    src = {
        i: rng.randrange(facts[graph.by_id[i].fact].domain_size)
        for i in graph.location_ids
        if not graph.parents[i]
    }
    return SystemState.from_sources(graph, facts, src)


def random_edit_script(rng: random.Random, state: SystemState, length: int) -> tuple[EditEvent, ...]:
    """Uniformly random valid edits over the independent locations of ``state``."""
    g = state.graph
    sources = [(i, state.facts[g.by_id[i].fact].domain_size) for i in g.location_ids if not g.parents[i]]
    out = []
    for _ in range(length):
        t, k = rng.choice(sources)
        out.append(EditEvent(t, rng.randrange(k)))
    return tuple(out)
