"""Degrees of freedom, capacity decisions and derivation-lattice algebra.

These functions accept any :class:`~dofkit.model.DerivationGraph`, including
relations where a location has several parents; only acyclicity is required.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import CyclicGraph, EmptySystem, LocationSetMismatch, MixedFacts
from .model import DerivationGraph, Edge


class Regime(str, enum.Enum):
    NOT_ENCODED = "not_encoded"
    OPTIMAL = "optimal"
    ABOVE_CAPACITY = "above_capacity"


@dataclass(frozen=True)
class DofReport:
    dof: int
    sources: tuple[str, ...]
    redundancy: int | None
    regime: Regime


class _Undefined:
    """Marker for a lattice join whose union is cyclic."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNDEFINED"

    def __bool__(self) -> bool:
        return False


UNDEFINED = _Undefined()


def compute_dof(graph: DerivationGraph) -> DofReport:
    graph.topological_order()
    sources = tuple(i for i in graph.location_ids if not graph.parents[i])
    dof = len(sources)
    if dof == 0:
        return DofReport(0, (), None, Regime.NOT_ENCODED)
    return DofReport(dof, sources, dof - 1, Regime.OPTIMAL if dof == 1 else Regime.ABOVE_CAPACITY)


def is_capacity_achieving(graph: DerivationGraph) -> bool:
    return compute_dof(graph).dof == 1


def minimal_dof1_extension(graph: DerivationGraph) -> frozenset[Edge]:
    """Edges from the lexicographically smallest source to every other source.

    The root has in-degree 0, so nothing reaches it and none of the new edges
    can close a cycle. Each edge removes exactly one source, so ``dof - 1``
    edges is also the least that can work.
    """
    if not graph.locations:
        raise EmptySystem("cannot extend a system with no locations")
    if len(graph.facts) > 1:
        raise MixedFacts(f"graph spans facts {list(graph.facts)}; extend each fact separately")
    sources = compute_dof(graph).sources
    if len(sources) <= 1:
        return frozenset()
    root, rest = sources[0], sources[1:]
    added = frozenset((root, s) for s in rest)
    if not graph.with_edges(added).is_acyclic():  # pragma: no cover - unreachable by construction
        raise CyclicGraph("extension introduced a cycle")
    return added


def _check_same_locations(d1: DerivationGraph, d2: DerivationGraph) -> None:
    if d1.locations != d2.locations:
        raise LocationSetMismatch(
            f"location sets differ: {sorted(d1.by_id)} vs {sorted(d2.by_id)}"
        )


def transitive_closure(graph: DerivationGraph) -> DerivationGraph:
    closure = frozenset((s, d) for s, ds in graph.descendants.items() for d in ds)
    return DerivationGraph(graph.locations, closure)


def lattice_meet(d1: DerivationGraph, d2: DerivationGraph) -> DerivationGraph:
    _check_same_locations(d1, d2)
    return DerivationGraph(d1.locations, d1.edges & d2.edges)


def lattice_join(d1: DerivationGraph, d2: DerivationGraph) -> DerivationGraph | _Undefined:
    _check_same_locations(d1, d2)
    union = DerivationGraph(d1.locations, d1.edges | d2.edges)
    if not union.is_acyclic():
        return UNDEFINED
    return transitive_closure(union)


def lattice_bottom(graph: DerivationGraph) -> DerivationGraph:
    return DerivationGraph(graph.locations)
