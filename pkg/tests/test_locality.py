import itertools

import pytest
from hypothesis import given, strategies as st

from merocone import _kernels
from merocone.errors import InputError
from merocone.locality import (Axiom, FiniteLocalityStructure, Side, builtin_structure, check_axiom,
                               check_locality_by_polar_sets, coprime_naturals, disjoint_powerset,
                               polar_set, violates)

SCANNED = [a for a in Axiom if a is not Axiom.SelectiveOneObject]


def test_polar_set_examples():
    S = coprime_naturals(6)
    assert polar_set(S, [4], Side.Left) == {1, 3, 5}
    assert polar_set(S, [], Side.Left) == set(S.elements)
    P = disjoint_powerset("ab")
    assert polar_set(P, ["{a}"]) == {"{}", "{b}"}
    with pytest.raises(InputError):
        polar_set(S, [99])


def test_builtin_truncation():
    S = builtin_structure("CoprimeNaturals", 6)
    assert S.elements == (1, 2, 3, 4, 5, 6)
    assert S.related(2, 3) and S.mul(2, 3) == 6
    assert S.related(2, 5) and S.mul(2, 5) is None
    P = builtin_structure("DisjointPowerset", "a")
    assert P.elements == ("{}", "{a}") and P.mul("{}", "{a}") == "{a}"


@pytest.mark.parametrize("S", [coprime_naturals(8), disjoint_powerset("abc")], ids=["coprime8", "powerset3"])
@pytest.mark.parametrize("axiom", [Axiom.LocalitySemigroup, Axiom.PartialSemigroup, Axiom.Symmetric,
                                   Axiom.SelectiveOneObject])
def test_builtins_satisfy(S, axiom):
    assert check_axiom(S, axiom).holds


def test_transitivity_fails_with_sound_witness():
    S = coprime_naturals(6)
    rep = check_axiom(S, "Transitive")
    assert not rep.holds
    a, b, c = rep.witness
    assert S.related(a, b) and S.related(b, c) and not S.related(a, c)
    assert violates(S, Axiom.Transitive, (2, 3, 4))


def test_hand_built_locality_violation():
    # a T c, b T c, a T b but (ab) = c is not related to c
    S = FiniteLocalityStructure(("a", "b", "c"), frozenset({("a", "b"), ("a", "c"), ("b", "c")}),
                                {("a", "b"): "c"})
    rep = check_axiom(S, Axiom.LocalitySemigroup)
    assert not rep.holds and rep.witness == ("a", "b", "c")
    assert not check_locality_by_polar_sets(S)


def test_relation_with_single_pair_does_not_violate():
    S = FiniteLocalityStructure(("a", "b", "c"), frozenset({("a", "b")}), {("a", "b"): "c"})
    assert check_axiom(S, Axiom.LocalitySemigroup).holds
    assert not check_axiom(S, Axiom.Symmetric).holds


def test_selective_needs_unit():
    S = FiniteLocalityStructure(("a",), frozenset(), {})
    with pytest.raises(InputError):
        check_axiom(S, "SelectiveOneObject")


def test_selective_inverse_condition():
    # Z/3 with everything related except (2,1): 1*2 = 0 is the unit but (2,1) is missing
    els = (0, 1, 2)
    rel = frozenset(p for p in itertools.product(els, repeat=2) if p != (2, 1))
    S = FiniteLocalityStructure(els, rel, {(a, b): (a + b) % 3 for a, b in rel}, 0)
    rep = check_axiom(S, Axiom.SelectiveOneObject)
    assert not rep.holds and rep.witness == (1, 2)


def test_validation_errors():
    with pytest.raises(InputError):
        FiniteLocalityStructure(("a",), frozenset({("a", "b")}), {})
    with pytest.raises(InputError):
        FiniteLocalityStructure(("a", "b"), frozenset(), {("a", "b"): "a"})
    with pytest.raises(InputError):
        FiniteLocalityStructure(("a", "b"), frozenset({("a", "a"), ("a", "b"), ("b", "a")}), {}, unit="a")


def test_json_roundtrip():
    S = disjoint_powerset("ab")
    assert FiniteLocalityStructure.from_json(S.to_json()) == S


@st.composite
def random_structure(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    els = tuple(range(n))
    pairs = list(itertools.product(els, repeat=2))
    rel = frozenset(p for p in pairs if draw(st.booleans()))
    prod = {}
    for p in sorted(rel):
        if draw(st.integers(0, 3)):
            prod[p] = draw(st.sampled_from(els))
    return FiniteLocalityStructure(els, rel, prod)


@given(random_structure(), st.sampled_from(SCANNED))
def test_witnesses_replay_and_are_first(S, axiom):
    rep = check_axiom(S, axiom)
    tuples = list(itertools.product(S.elements, repeat=2 if axiom is Axiom.Symmetric else 3))
    bad = [t for t in tuples if violates(S, axiom, t)]
    if rep.holds:
        assert not bad
    else:
        assert violates(S, axiom, rep.witness)
        assert rep.witness == bad[0]


@given(random_structure())
def test_polar_and_pointwise_forms_agree(S):
    assert check_locality_by_polar_sets(S) == check_axiom(S, Axiom.LocalitySemigroup).holds


@given(random_structure())
def test_symmetric_relations_have_equal_polar_sides(S):
    sym = frozenset(S.relation | {(b, a) for a, b in S.relation})
    T = FiniteLocalityStructure(S.elements, sym, {})
    for r in range(len(T.elements) + 1):
        for U in itertools.combinations(T.elements, r):
            assert polar_set(T, U, Side.Left) == polar_set(T, U, Side.Right)


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba unavailable")
@given(random_structure(max_n=7), st.sampled_from(SCANNED))
def test_backends_agree(S, axiom):
    assert check_axiom(S, axiom, "numba") == check_axiom(S, axiom, "numpy")
