"""Facts, locations, derivation graphs, system states and edits.

Everything here is an immutable value. Operations return new objects and
never mutate their inputs, so states can be shared freely across threads.

Derived locations always copy their parent's value (identity derivation).
States additionally require a derivation *forest*: every location has at
most one parent. General acyclic relations are still representable as a
:class:`DerivationGraph` for DOF counting and lattice algebra.
"""

from __future__ import annotations

import enum
import json
from collections import deque
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from types import MappingProxyType

from .errors import (
    CyclicGraph,
    DerivedTargetRejected,
    FactNotEncoded,
    InvariantViolation,
    UnknownFact,
    UnknownLocation,
    ValueOutOfDomain,
)

Edge = tuple[str, str]


@dataclass(frozen=True, order=True)
class Fact:
    id: str
    domain_size: int = 2

    def __post_init__(self) -> None:
        if not isinstance(self.domain_size, int) or self.domain_size < 1:
            raise InvariantViolation(
                f"fact {self.id!r}: domain size must be a positive integer, got {self.domain_size!r}"
            )


@dataclass(frozen=True, order=True)
class Location:
    id: str
    fact: str


@dataclass(frozen=True)
class EditEvent:
    target: str
    new_value: int


@dataclass(frozen=True)
class DerivationGraph:
    """Locations plus a derivation relation; ``(s, d)`` means *d* is derived from *s*.

    Construction checks that edge endpoints exist and encode the same fact.
    Acyclicity is checked lazily (see :meth:`topological_order`) so that the
    lattice join can inspect cyclic unions.
    """

    locations: frozenset[Location]
    edges: frozenset[Edge] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "locations", frozenset(self.locations))
        object.__setattr__(self, "edges", frozenset((s, d) for s, d in self.edges))
        by_id: dict[str, Location] = {}
        for loc in self.locations:
            if loc.id in by_id:
                raise InvariantViolation(f"duplicate location id {loc.id!r}")
            by_id[loc.id] = loc
        for s, d in self.edges:
            for end in (s, d):
                if end not in by_id:
                    raise UnknownLocation(end)
            if s == d:
                raise CyclicGraph(f"self-derivation on {s!r}")
            if by_id[s].fact != by_id[d].fact:
                raise InvariantViolation(
                    f"derivation {s!r} -> {d!r} crosses facts "
                    f"({by_id[s].fact!r} vs {by_id[d].fact!r})"
                )

    @classmethod
    def build(cls, location_ids: Iterable[str], edges: Iterable[Edge] = (), fact: str = "f") -> DerivationGraph:
        """Single-fact convenience constructor."""
        return cls(frozenset(Location(i, fact) for i in location_ids), frozenset(edges))

    @cached_property
    def by_id(self) -> Mapping[str, Location]:
        return MappingProxyType({loc.id: loc for loc in self.locations})

    @cached_property
    def location_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.by_id))

    @cached_property
    def parents(self) -> Mapping[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {i: [] for i in self.by_id}
        for s, d in self.edges:
            out[d].append(s)
        return MappingProxyType({k: tuple(sorted(v)) for k, v in out.items()})

    @cached_property
    def children(self) -> Mapping[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {i: [] for i in self.by_id}
        for s, d in self.edges:
            out[s].append(d)
        return MappingProxyType({k: tuple(sorted(v)) for k, v in out.items()})

    def in_degree(self, loc_id: str) -> int:
        return len(self.parents[loc_id])

    @cached_property
    def facts(self) -> tuple[str, ...]:
        return tuple(sorted({loc.fact for loc in self.locations}))

    def locations_of(self, fact_id: str) -> tuple[str, ...]:
        return tuple(i for i in self.location_ids if self.by_id[i].fact == fact_id)

    def is_forest(self) -> bool:
        return all(len(p) <= 1 for p in self.parents.values())

    def find_cycle(self) -> tuple[str, ...] | None:
        """Return one cycle as a tuple of location ids, or None when acyclic."""
        color = dict.fromkeys(self.by_id, 0)
        for start in self.location_ids:
            if color[start]:
                continue
            path: list[str] = []
            stack = [(start, iter(self.children[start]))]
            color[start] = 1
            path.append(start)
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    color[node] = 2
                    stack.pop()
                    path.pop()
                elif color[nxt] == 1:
                    return tuple(path[path.index(nxt):])
                elif color[nxt] == 0:
                    color[nxt] = 1
                    path.append(nxt)
                    stack.append((nxt, iter(self.children[nxt])))
        return None

    def topological_order(self) -> tuple[str, ...]:
        """Kahn's algorithm, O(|L| + |D|); raises :class:`CyclicGraph`."""
        return self._topological_order

    @cached_property
    def _topological_order(self) -> tuple[str, ...]:
        # a raised CyclicGraph is not cached, so cyclic graphs recompute
        indeg = {i: len(p) for i, p in self.parents.items()}
        queue = deque(i for i in self.location_ids if indeg[i] == 0)
        order: list[str] = []
        while queue:
            node = queue.popleft()
            order.append(node)
            for child in self.children[node]:
                indeg[child] -= 1
                if indeg[child] == 0:
                    queue.append(child)
        if len(order) != len(indeg):
            raise CyclicGraph(f"derivation cycle through {' -> '.join(self.find_cycle() or ())}")
        return tuple(order)

    def is_acyclic(self) -> bool:
        try:
            self.topological_order()
        except CyclicGraph:
            return False
        return True

    @cached_property
    def descendants(self) -> Mapping[str, tuple[str, ...]]:
        """Strict successor set of every location (requires acyclicity)."""
        out: dict[str, tuple[str, ...]] = {}
        for node in reversed(self.topological_order()):
            acc: set[str] = set()
            for child in self.children[node]:
                acc.add(child)
                acc.update(out[child])
            out[node] = tuple(sorted(acc))
        return MappingProxyType(out)

    def restrict(self, fact_id: str) -> DerivationGraph:
        keep = frozenset(loc for loc in self.locations if loc.fact == fact_id)
        ids = {loc.id for loc in keep}
        return DerivationGraph(keep, frozenset(e for e in self.edges if e[0] in ids))

    def with_edges(self, extra: Iterable[Edge]) -> DerivationGraph:
        return DerivationGraph(self.locations, self.edges | frozenset(extra))


@dataclass(frozen=True, eq=True)
class SystemState:
    """A forest-shaped derivation graph, fact domains and a value per location."""

    graph: DerivationGraph
    facts: Mapping[str, Fact]
    values: Mapping[str, int] = field(default_factory=dict)

    __hash__ = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        facts = self.facts
        if not isinstance(facts, Mapping):
            facts = {f.id: f for f in facts}
        object.__setattr__(self, "facts", MappingProxyType(dict(facts)))
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))
        g = self.graph
        if not g.is_forest():
            bad = [i for i in g.location_ids if g.in_degree(i) > 1]
            raise InvariantViolation(f"locations with more than one derivation parent: {bad}")
        order = g.topological_order()
        for loc_id in order:
            loc = g.by_id[loc_id]
            if loc.fact not in self.facts:
                raise UnknownFact(loc.fact)
            if loc_id not in self.values:
                raise InvariantViolation(f"location {loc_id!r} has no value")
            v = self.values[loc_id]
            k = self.facts[loc.fact].domain_size
            if not isinstance(v, int) or not 0 <= v < k:
                raise ValueOutOfDomain(f"location {loc_id!r}: token {v!r} outside domain of size {k}")
            parents = g.parents[loc_id]
            if parents and self.values[parents[0]] != v:
                raise InvariantViolation(
                    f"derived location {loc_id!r} holds {v} but its source {parents[0]!r} "
                    f"holds {self.values[parents[0]]}"
                )
        extra = set(self.values) - set(g.by_id)
        if extra:
            raise UnknownLocation(sorted(extra)[0])

    @classmethod
    def _trusted(cls, graph: DerivationGraph, facts: Mapping[str, Fact], values: dict[str, int]) -> SystemState:
        """Skip validation; for callers that only ever apply checked edits to a valid state."""
        state = object.__new__(cls)
        object.__setattr__(state, "graph", graph)
        object.__setattr__(state, "facts", facts)
        object.__setattr__(state, "values", MappingProxyType(values))
        return state

    @classmethod
    def initial(cls, graph: DerivationGraph, facts: Iterable[Fact] | Mapping[str, Fact], value: int = 0) -> SystemState:
        return cls(graph, facts, dict.fromkeys(graph.by_id, value))  # type: ignore[arg-type]

    @classmethod
    def from_sources(
        cls, graph: DerivationGraph, facts: Iterable[Fact] | Mapping[str, Fact], source_values: Mapping[str, int]
    ) -> SystemState:
        """Build a state from values at in-degree-0 locations, propagating downwards."""
        values: dict[str, int] = {}
        for loc_id in graph.topological_order():
            parents = graph.parents[loc_id]
            values[loc_id] = values[parents[0]] if parents else source_values.get(loc_id, 0)
        return cls(graph, facts, values)  # type: ignore[arg-type]

    def fact(self, fact: Fact | str) -> Fact:
        fid = fact.id if isinstance(fact, Fact) else fact
        try:
            return self.facts[fid]
        except KeyError:
            raise UnknownFact(fid) from None

    def values_of(self, fact: Fact | str) -> dict[str, int]:
        fid = self.fact(fact).id
        return {i: self.values[i] for i in self.graph.locations_of(fid)}


class Classification(str, enum.Enum):
    COMPLETE = "complete"
    MISSING_CAUSAL = "missing_causal"
    MISSING_PROVENANCE = "missing_provenance"
    MISSING_BOTH = "missing_both"


@dataclass(frozen=True)
class Capabilities:
    causal_propagation: bool
    provenance_observability: bool
    label: str = ""


def apply_edit(state: SystemState, edit: EditEvent) -> SystemState:
    """Set an independent location and propagate the value through its derivation subtree."""
    g = state.graph
    if edit.target not in g.by_id:
        raise UnknownLocation(edit.target)
    if g.in_degree(edit.target):
        raise DerivedTargetRejected(
            f"{edit.target!r} is derived from {g.parents[edit.target][0]!r}; edit the source instead"
        )
    k = state.facts[g.by_id[edit.target].fact].domain_size
    if not isinstance(edit.new_value, int) or not 0 <= edit.new_value < k:
        raise ValueOutOfDomain(f"token {edit.new_value!r} outside domain of size {k}")
    values = dict(state.values)
    values[edit.target] = edit.new_value
    for d in g.descendants[edit.target]:
        values[d] = edit.new_value
    return SystemState(g, state.facts, values)


def is_coherent(state: SystemState, fact: Fact | str) -> bool:
    vals = state.values_of(fact)
    if not vals:
        raise FactNotEncoded(f"fact {state.fact(fact).id!r} has no encoding locations")
    return len(set(vals.values())) == 1


def classify_capabilities(c: Capabilities) -> Classification:
    if c.causal_propagation and c.provenance_observability:
        return Classification.COMPLETE
    if c.provenance_observability:
        return Classification.MISSING_CAUSAL
    if c.causal_propagation:
        return Classification.MISSING_PROVENANCE
    return Classification.MISSING_BOTH


def language_table() -> dict[str, Capabilities]:
    """Bundled capability classification of mainstream languages."""
    raw = json.loads(resources.files("dofkit").joinpath("languages.json").read_text(encoding="utf-8"))
    return {
        row["language"]: Capabilities(
            causal_propagation=row["causal_propagation"],
            provenance_observability=row["provenance_observability"],
            label=row["label"],
        )
        for row in raw
    }
