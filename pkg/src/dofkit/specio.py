"""Line-oriented system-spec and edit-script formats.

Spec grammar, one declaration per line, ``#`` starts a comment::

    system <name>
    fact <id> domain <K>
    location <id> encodes <fact-id> value <token-index>
    derive <derived-id> from <source-id>

Edit scripts hold ``edit <location-id> <token-index>`` lines. Canonical
output uses LF endings, single spaces and sorted declarations.
"""

from __future__ import annotations

import re
from collections.abc import Iterable
from dataclasses import dataclass
from functools import cached_property

from .errors import (
    CycleDetected,
    DuplicateId,
    SpecSyntaxError,
    UndeclaredId,
    UnknownFact,
)
from .model import DerivationGraph, Edge, EditEvent, Fact, Location, SystemState

_TOKEN = re.compile(r"\S+")
_IDENT = re.compile(r"[^\s#]+")


@dataclass(frozen=True, order=True)
class LocationDecl:
    id: str
    fact: str
    value: int = 0


@dataclass(frozen=True)
class SystemSpec:
    """A named system: facts, located initial values and derivation edges.

    Declarations are kept in canonical sorted order, so two specs compare
    equal whenever they declare the same things. Construction validates the
    whole encoding model.
    """

    name: str
    facts: tuple[Fact, ...] = ()
    locations: tuple[LocationDecl, ...] = ()
    derive_edges: tuple[Edge, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "facts", tuple(sorted(self.facts, key=lambda f: f.id)))
        object.__setattr__(self, "locations", tuple(sorted(self.locations, key=lambda l: l.id)))
        object.__setattr__(self, "derive_edges", tuple(sorted(set(self.derive_edges), key=lambda e: (e[1], e[0]))))
        if not _IDENT.fullmatch(self.name):
            raise SpecSyntaxError(f"invalid system name {self.name!r}", 1)
        self.state  # noqa: B018 - validates

    @cached_property
    def fact_map(self) -> dict[str, Fact]:
        out: dict[str, Fact] = {}
        for f in self.facts:
            if f.id in out:
                raise DuplicateId(f"duplicate fact {f.id!r}", 0)
            out[f.id] = f
        return out

    @cached_property
    def graph(self) -> DerivationGraph:
        for loc in self.locations:
            if loc.fact not in self.fact_map:
                raise UnknownFact(loc.fact)
        seen: set[str] = set()
        for loc in self.locations:
            if loc.id in seen:
                raise DuplicateId(f"duplicate location {loc.id!r}", 0)
            seen.add(loc.id)
        g = DerivationGraph(frozenset(Location(l.id, l.fact) for l in self.locations), frozenset(self.derive_edges))
        cycle = g.find_cycle()
        if cycle:
            raise CycleDetected(f"derivation cycle: {' -> '.join(cycle + cycle[:1])}")
        return g

    @cached_property
    def state(self) -> SystemState:
        return SystemState(self.graph, self.fact_map, {l.id: l.value for l in self.locations})

    def fact(self, fact_id: str) -> Fact:
        try:
            return self.fact_map[fact_id]
        except KeyError:
            raise UnknownFact(fact_id) from None

    def with_derivations(self, edges: Iterable[Edge]) -> SystemSpec:
        """Add derivation edges, re-deriving values of newly derived locations from their sources."""
        all_edges = set(self.derive_edges) | set(edges)
        g = DerivationGraph(self.graph.locations, frozenset(all_edges))
        source_values = {l.id: l.value for l in self.locations}
        state = SystemState.from_sources(g, self.fact_map, source_values)
        locs = tuple(LocationDecl(l.id, l.fact, state.values[l.id]) for l in self.locations)
        return SystemSpec(self.name, self.facts, locs, tuple(all_edges))


def _tokens(line: str) -> list[tuple[str, int]]:
    body = line.split("#", 1)[0]
    return [(m.group(), m.start() + 1) for m in _TOKEN.finditer(body)]


def _int_token(tok: str, col: int, lineno: int, what: str) -> int:
    if not re.fullmatch(r"\d+", tok):
        raise SpecSyntaxError(f"{what} must be a non-negative integer, got {tok!r}", lineno, col)
    return int(tok)


def _expect(toks: list[tuple[str, int]], shape: tuple[str | None, ...], lineno: int, line: str) -> None:
    if len(toks) != len(shape):
        col = toks[len(shape)][1] if len(toks) > len(shape) else len(line.rstrip()) + 1
        raise SpecSyntaxError(f"expected {len(shape)} tokens for '{shape[0]}', got {len(toks)}", lineno, col)
    for (tok, col), want in zip(toks, shape):
        if want is not None and tok != want:
            raise SpecSyntaxError(f"expected {want!r}, got {tok!r}", lineno, col)


def parse_spec(text: str) -> SystemSpec:
    name: str | None = None
    facts: dict[str, Fact] = {}
    locations: dict[str, LocationDecl] = {}
    parent: dict[str, str] = {}
    edges: list[Edge] = []

    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = _tokens(line)
        if not toks:
            continue
        kw, kcol = toks[0]
        if name is None and kw != "system":
            raise SpecSyntaxError("first declaration must be 'system <name>'", lineno, kcol)
        if kw == "system":
            if name is not None:
                raise DuplicateId("second 'system' declaration", lineno, kcol)
            _expect(toks, ("system", None), lineno, line)
            name = toks[1][0]
        elif kw == "fact":
            _expect(toks, ("fact", None, "domain", None), lineno, line)
            fid, fcol = toks[1]
            if fid in facts:
                raise DuplicateId(f"fact {fid!r} already declared", lineno, fcol)
            k = _int_token(*toks[3], lineno, "domain size")
            if k < 1:
                raise SpecSyntaxError("domain size must be >= 1", lineno, toks[3][1])
            facts[fid] = Fact(fid, k)
        elif kw == "location":
            _expect(toks, ("location", None, "encodes", None, "value", None), lineno, line)
            lid, lcol = toks[1]
            if lid in locations:
                raise DuplicateId(f"location {lid!r} already declared", lineno, lcol)
            fid, fcol = toks[3]
            if fid not in facts:
                raise UndeclaredId(f"fact {fid!r} used before declaration", lineno, fcol)
            locations[lid] = LocationDecl(lid, fid, _int_token(*toks[5], lineno, "value token"))
        elif kw == "derive":
            _expect(toks, ("derive", None, "from", None), lineno, line)
            (did, dcol), (sid, scol) = toks[1], toks[3]
            for ident, col in ((did, dcol), (sid, scol)):
                if ident not in locations:
                    raise UndeclaredId(f"location {ident!r} used before declaration", lineno, col)
            # walking up from the source reaches the derived id iff this edge closes a cycle
            node: str | None = sid
            while node is not None:
                if node == did:
                    raise CycleDetected(f"line {lineno}: 'derive {did} from {sid}' closes a derivation cycle")
                node = parent.get(node)
            if did in locations and did not in parent:
                parent[did] = sid
            edges.append((sid, did))
        else:
            raise SpecSyntaxError(f"unknown keyword {kw!r}", lineno, kcol)

    if name is None:
        raise SpecSyntaxError("missing 'system <name>' header", 1)
    return SystemSpec(name, tuple(facts.values()), tuple(locations.values()), tuple(edges))


def serialize_spec(spec: SystemSpec) -> str:
    lines = [f"system {spec.name}"]
    lines += [f"fact {f.id} domain {f.domain_size}" for f in spec.facts]
    lines += [f"location {l.id} encodes {l.fact} value {l.value}" for l in spec.locations]
    lines += [f"derive {d} from {s}" for s, d in spec.derive_edges]
    return "\n".join(lines) + "\n"


def parse_script(text: str) -> tuple[EditEvent, ...]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = _tokens(line)
        if not toks:
            continue
        _expect(toks, ("edit", None, None), lineno, line)
        out.append(EditEvent(toks[1][0], _int_token(*toks[2], lineno, "value token")))
    return tuple(out)


def serialize_script(script: Iterable[EditEvent]) -> str:
    return "".join(f"edit {e.target} {e.new_value}\n" for e in script)
