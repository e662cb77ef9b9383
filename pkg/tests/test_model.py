import itertools

import pytest
from hypothesis import given, settings, strategies as st

from dofkit.errors import (
    CyclicGraph,
    DerivedTargetRejected,
    FactNotEncoded,
    InvariantViolation,
    UnknownLocation,
    ValueOutOfDomain,
)
from dofkit.model import (
    Capabilities,
    Classification,
    DerivationGraph,
    EditEvent,
    Fact,
    Location,
    SystemState,
    apply_edit,
    classify_capabilities,
    is_coherent,
    language_table,
)

from conftest import to_graph

F2 = {"f": Fact("f", 2)}


def chain_state():
    g = DerivationGraph.build("abc", [("a", "b"), ("b", "c")])
    return SystemState.initial(g, F2)


def test_fact_domain_must_be_positive():
    with pytest.raises(InvariantViolation):
        Fact("f", 0)


def test_edges_must_stay_within_one_fact():
    locs = frozenset({Location("a", "f"), Location("b", "g")})
    with pytest.raises(InvariantViolation):
        DerivationGraph(locs, frozenset({("a", "b")}))


def test_edge_to_unknown_location():
    with pytest.raises(UnknownLocation):
        DerivationGraph.build("a", [("a", "z")])


def test_topological_order_detects_cycles():
    g = DerivationGraph.build("ab", [("a", "b"), ("b", "a")])
    assert not g.is_acyclic()
    assert set(g.find_cycle()) == {"a", "b"}
    with pytest.raises(CyclicGraph):
        g.topological_order()


def test_state_rejects_multi_parent_locations():
    g = DerivationGraph.build("abc", [("a", "c"), ("b", "c")])
    with pytest.raises(InvariantViolation):
        SystemState.initial(g, F2)


def test_state_rejects_broken_propagation():
    g = DerivationGraph.build("ab", [("a", "b")])
    with pytest.raises(InvariantViolation):
        SystemState(g, F2, {"a": 0, "b": 1})


def test_state_rejects_out_of_domain_token():
    g = DerivationGraph.build("a")
    with pytest.raises(ValueOutOfDomain):
        SystemState(g, F2, {"a": 2})


def test_edit_propagates_along_chain():
    s = apply_edit(chain_state(), EditEvent("a", 1))
    assert dict(s.values) == {"a": 1, "b": 1, "c": 1}


def test_edit_leaves_independent_location_alone():
    g = DerivationGraph.build(["L1", "L2"])
    s = apply_edit(SystemState.initial(g, F2), EditEvent("L1", 1))
    assert dict(s.values) == {"L1": 1, "L2": 0}


def test_edit_of_derived_location_is_rejected():
    with pytest.raises(DerivedTargetRejected):
        apply_edit(chain_state(), EditEvent("b", 1))


def test_edit_errors():
    with pytest.raises(UnknownLocation):
        apply_edit(chain_state(), EditEvent("zz", 1))
    with pytest.raises(ValueOutOfDomain):
        apply_edit(chain_state(), EditEvent("a", 2))


def test_apply_edit_does_not_mutate_input():
    s = chain_state()
    apply_edit(s, EditEvent("a", 1))
    assert set(s.values.values()) == {0}


def test_coherence_predicate():
    g = DerivationGraph.build(["L1", "L2", "L3"])
    facts = {"f": Fact("f", 3)}
    assert is_coherent(SystemState.initial(g, facts), "f")
    assert not is_coherent(SystemState(g, facts, {"L1": 1, "L2": 2, "L3": 1}), "f")
    single = SystemState.initial(DerivationGraph.build(["x"]), facts)
    assert is_coherent(single, Fact("f", 3))


def test_coherence_undefined_without_locations():
    s = SystemState.initial(DerivationGraph.build([]), {"f": Fact("f")})
    with pytest.raises(FactNotEncoded):
        is_coherent(s, "f")


@pytest.mark.parametrize("causal,prov", list(itertools.product([False, True], repeat=2)))
def test_classification_truth_table(causal, prov):
    got = classify_capabilities(Capabilities(causal, prov))
    assert (got is Classification.COMPLETE) == (causal and prov)
    expected = {
        (True, True): Classification.COMPLETE,
        (False, True): Classification.MISSING_CAUSAL,
        (True, False): Classification.MISSING_PROVENANCE,
        (False, False): Classification.MISSING_BOTH,
    }[(causal, prov)]
    assert got is expected


def test_bundled_language_table():
    table = {name: classify_capabilities(c) for name, c in language_table().items()}
    assert table["Python"] is Classification.COMPLETE
    assert table["Java"] is Classification.MISSING_CAUSAL
    assert table["Rust"] is Classification.MISSING_PROVENANCE
    assert table["Go"] is table["C++"] is Classification.MISSING_BOTH
    assert [n for n, c in table.items() if c is Classification.COMPLETE] == ["Python", "CLOS", "Smalltalk"]


@st.composite
def forest_and_edit(draw):
    n = draw(st.integers(1, 10))
    parents = [None] + [draw(st.one_of(st.none(), st.integers(0, i - 1))) for i in range(1, n)]
    edges = [(p, i) for i, p in enumerate(parents) if p is not None]
    g = to_graph(n, edges)
    k = draw(st.integers(1, 4))
    facts = {"f": Fact("f", k)}
    src = {i: draw(st.integers(0, k - 1)) for i in g.location_ids if not g.parents[i]}
    state = SystemState.from_sources(g, facts, src)
    target = draw(st.sampled_from([i for i in g.location_ids if not g.parents[i]]))
    return state, EditEvent(target, draw(st.integers(0, k - 1)))


@settings(max_examples=300, deadline=None)
@given(forest_and_edit())
def test_edit_properties(case):
    state, edit = case
    out = apply_edit(state, edit)
    assert out == apply_edit(state, edit)
    g = state.graph
    for loc in g.location_ids:
        if g.parents[loc]:
            assert out.values[loc] == out.values[g.parents[loc][0]]
    reach = {edit.target, *g.descendants[edit.target]}
    for loc in g.location_ids:
        if loc not in reach:
            assert out.values[loc] == state.values[loc]
        else:
            assert out.values[loc] == edit.new_value
