"""Information-theoretic calculators: entropy, Fano inversion, side information, costs.

All logarithms are base 2. Fano quantities are lower bounds on the error of
*any* estimator; they say nothing about what is achievable.
"""

from __future__ import annotations

import math
from collections.abc import Hashable, Iterable
from dataclasses import dataclass

from .dof import Regime, compute_dof
from .errors import InvalidQuery, InvalidRegime, NotEncoded, OutOfRange, TooLarge
from .model import DerivationGraph, Fact

BISECTION_TOL = 1e-9
MAX_CLIQUE_VERTICES = 32


class _Unbounded:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNBOUNDED"

    def __str__(self) -> str:
        return "unbounded"


UNBOUNDED = _Unbounded()


def _check_probability(p: float, name: str = "p") -> None:
    if not (isinstance(p, (int, float)) and 0.0 <= p <= 1.0):
        raise OutOfRange(f"{name} must lie in [0, 1], got {p!r}")


def binary_entropy(p: float) -> float:
    _check_probability(p)
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def value_entropy(domain_size: int) -> float:
    if domain_size < 1:
        raise InvalidQuery(f"domain size must be >= 1, got {domain_size}")
    return math.log2(domain_size)


@dataclass(frozen=True)
class FanoQuery:
    K: int
    mutual_info: float

    def __post_init__(self) -> None:
        if not isinstance(self.K, int) or self.K < 2:
            raise InvalidQuery(f"K must be an integer >= 2, got {self.K!r}")
        if not 0.0 <= self.mutual_info <= math.log2(self.K):
            raise InvalidQuery(
                f"mutual information must lie in [0, log2 K = {math.log2(self.K):g}], got {self.mutual_info!r}"
            )

    @property
    def conditional_entropy(self) -> float:
        return math.log2(self.K) - self.mutual_info


def _fano_lhs(p: float, K: int) -> float:
    return binary_entropy(p) + p * math.log2(K - 1)


def fano_min_error(q: FanoQuery) -> float:
    """Smallest error probability compatible with Fano's inequality.

    Solves ``H_b(p) + p*log2(K-1) >= log2 K - I`` for the least ``p`` in
    ``[0, (K-1)/K]``; the left side increases on that interval.
    """
    target = q.conditional_entropy
    if target <= 0.0:
        return 0.0
    lo, hi = 0.0, (q.K - 1) / q.K
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if _fano_lhs(mid, q.K) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def fano_required_info(K: int, target_pe: float) -> float:
    if not isinstance(K, int) or K < 2:
        raise InvalidQuery(f"K must be an integer >= 2, got {K!r}")
    if not 0.0 <= target_pe <= (K - 1) / K:
        raise InvalidQuery(f"target error must lie in [0, (K-1)/K = {(K - 1) / K:g}], got {target_pe!r}")
    return max(0.0, math.log2(K) - _fano_lhs(target_pe, K))


def side_info_requirement(dof: int) -> float:
    """Bits needed to single out one authoritative source among ``dof`` independent ones."""
    if dof < 1:
        raise NotEncoded("a fact with no independent locations has nothing to resolve")
    return math.log2(dof)


def incoherence_entropy(k: int) -> float:
    """Uncertainty about the correct value when ``k`` independent locations disagree."""
    return side_info_requirement(k)


def rate_incoherence(epsilon: float) -> float | _Unbounded:
    _check_probability(epsilon, "epsilon")
    return 1 if epsilon == 0 else UNBOUNDED


def _max_clique_size(adj: list[int]) -> int:
    n = len(adj)
    best = 0

    def expand(size: int, cand: int) -> None:
        nonlocal best
        if cand == 0:
            best = max(best, size)
            return
        # Greedy colouring bound: vertices of one colour class are pairwise
        # non-adjacent, so a clique uses at most one vertex per class.
        colours = 0
        rest = cand
        while rest:
            colours += 1
            avail = rest
            while avail:
                v = (avail & -avail).bit_length() - 1
                avail &= ~adj[v] & ~(1 << v)
                rest &= ~(1 << v)
        if size + colours <= best:
            return
        while cand:
            if size + bin(cand).count("1") <= best:
                return
            v = (cand & -cand).bit_length() - 1
            cand &= ~(1 << v)
            expand(size + 1, cand & adj[v])

    expand(0, (1 << n) - 1)
    return best


def max_clique_size(vertices: Iterable[Hashable], edges: Iterable[tuple[Hashable, Hashable]]) -> int:
    verts = sorted(set(vertices), key=repr)
    if len(verts) > MAX_CLIQUE_VERTICES:
        raise TooLarge(f"exact clique search is capped at {MAX_CLIQUE_VERTICES} vertices, got {len(verts)}")
    index = {v: i for i, v in enumerate(verts)}
    adj = [0] * len(verts)
    for a, b in edges:
        if a not in index or b not in index:
            raise InvalidQuery(f"edge ({a!r}, {b!r}) references an unknown vertex")
        if a == b:
            continue
        adj[index[a]] |= 1 << index[b]
        adj[index[b]] |= 1 << index[a]
    return _max_clique_size(adj)


def confusability_required_bits(vertices: Iterable[Hashable], edges: Iterable[tuple[Hashable, Hashable]]) -> float:
    """log2 of the maximum clique of a value-confusability graph."""
    size = max_clique_size(vertices, edges)
    if size == 0:
        raise InvalidQuery("confusability graph has no vertices")
    return math.log2(size)


def error_compounding(p: float, n: int) -> float:
    _check_probability(p)
    if not isinstance(n, int) or n < 0:
        raise OutOfRange(f"n must be a non-negative integer, got {n!r}")
    return 1.0 - (1.0 - p) ** n


def amortized_cost(m: int, n: int, dof: int) -> int:
    if m < 0 or n < 1:
        raise InvalidRegime(f"need m >= 0 and n >= 1, got m={m}, n={n}")
    if dof == 1:
        return m
    if dof == n:
        return m * n
    raise InvalidRegime(f"dof must be 1 or n={n}, got {dof}")


@dataclass(frozen=True)
class RegimeReport:
    rate: int
    complexity: str
    coherence: int | None
    pareto_optimal: bool
    regime: Regime


def regime_report(graph: DerivationGraph, fact: Fact | str) -> RegimeReport:
    fid = fact.id if isinstance(fact, Fact) else fact
    report = compute_dof(graph.restrict(fid))
    if report.regime is Regime.NOT_ENCODED:
        return RegimeReport(0, "zero", None, False, report.regime)
    if report.regime is Regime.OPTIMAL:
        return RegimeReport(1, "constant", 1, True, report.regime)
    return RegimeReport(report.dof, "linear_in_R", 0, False, report.regime)
