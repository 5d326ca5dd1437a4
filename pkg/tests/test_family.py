import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from schreier_kit import (
    CardinalityFamily,
    CounterFamily,
    DomainError,
    ExplicitFamily,
    FiniteSet,
    PredicateFamily,
    SchreierFamily,
    SpreadMap,
    WindowExceededError,
    hereditary_closure,
    is_spreading,
)
from schreier_kit.family import canonical_key, incidence_matrix, interval

from oracles import counter_pred, maximal_within, s1_is_maximal, s1_literal, subsets

S1 = SchreierFamily(1, 12)


def test_finite_set_sorted_and_deduplicated():
    F = FiniteSet([5, 2, 5, 3])
    assert tuple(F) == (2, 3, 5)
    assert F.min == 2 and F.max == 5
    with pytest.raises(DomainError):
        FiniteSet([0, 1])
    with pytest.raises(DomainError):
        FiniteSet().min


def test_interval_and_canonical_order():
    assert tuple(interval(3, 5)) == (3, 4, 5)
    assert tuple(interval(4, 3)) == ()
    sets = [FiniteSet(s) for s in ([2, 3], [1], [1, 4], [5])]
    assert [tuple(s) for s in sorted(sets, key=canonical_key)] == [(1,), (5,), (1, 4), (2, 3)]


@pytest.mark.parametrize("F, expected", [((2, 5), True), ((), True), ((1, 2), False), ((3, 4, 5), True)])
def test_s1_membership_examples(F, expected):
    assert S1.member(F) is expected


def test_lazy_window_is_enforced():
    with pytest.raises(WindowExceededError) as exc:
        S1.member((2, 13))
    assert exc.value.window == 12
    assert tuple(exc.value.offending) == (2, 13)


@pytest.mark.parametrize("F, expected", [((1,), True), ((2,), False), ((2, 3), True), ((3, 4), False)])
def test_s1_is_maximal(F, expected):
    assert S1.is_maximal(F) is expected


def test_is_maximal_rejects_non_members():
    with pytest.raises(DomainError):
        S1.is_maximal((1, 2))


def test_s1_maximality_matches_literal_rule_on_window():
    for F in S1.members():
        if F and F.max <= 11:
            assert S1.is_maximal(F) == s1_is_maximal(F), F


def test_maximal_elements_examples():
    assert [tuple(F) for F in S1.maximal_elements((1, 2, 3))] == [(1,), (2, 3)]
    assert [tuple(F) for F in S1.maximal_elements((1,))] == [(1,)]
    C = CounterFamily(window=12)
    assert [tuple(F) for F in C.maximal_elements((1, 2, 3))] == [(3,), (1, 2)]


def test_maximal_elements_agree_with_enumeration_oracle():
    rng = random.Random(3)
    for _ in range(60):
        W = sorted(rng.sample(range(1, 11), rng.randint(1, 7)))
        got = [tuple(F) for F in S1.maximal_elements(W)]
        assert got == maximal_within(s1_literal, W)


def test_in_closure_examples():
    assert S1.in_closure((2, 3))
    assert not S1.in_closure((1, 2, 3))
    assert CounterFamily(window=5).in_closure(())


def test_spreading_examples():
    assert is_spreading(SchreierFamily(1, 10), 8)
    res = is_spreading(CounterFamily(window=12), 4)
    assert not res
    assert tuple(res.witness[0]) == (1, 2) and tuple(res.witness[1]) == (2, 3)
    assert is_spreading(CardinalityFamily(1, 8), 8)


@pytest.mark.parametrize("alpha", [1, 2, 3])
def test_schreier_families_are_spreading(alpha):
    assert is_spreading(SchreierFamily(alpha, 9), 8)


def test_spread_map_validation():
    assert tuple(SpreadMap(FiniteSet((1, 3)), (2, 5)).image()) == (2, 5)
    with pytest.raises(DomainError):
        SpreadMap(FiniteSet((2, 3)), (1, 5))
    with pytest.raises(DomainError):
        SpreadMap(FiniteSet((1, 3)), (4, 4))


def test_hereditary_closure_examples():
    f = hereditary_closure([[1, 2]])
    assert [tuple(g) for g in f.generators] == [(1, 2)]
    g = hereditary_closure([[2, 3], [3, 4]])
    assert [tuple(x) for x in g.generators] == [(2, 3), (3, 4)]
    assert g.member((3,))
    h = hereditary_closure([], window=3)
    assert [tuple(F) for F in h.members()] == [(), (1,), (2,), (3,)]


def test_explicit_family_generators_are_reduced():
    f = ExplicitFamily([[1, 2, 3], [1, 2], [4], [2, 3, 5]], window=8)
    assert [tuple(g) for g in f.generators] == [(1, 2, 3), (2, 3, 5)]
    assert f.is_maximal((1, 2, 3)) and not f.is_maximal((2, 3))


def test_explicit_is_maximal_agrees_with_maximal_elements():
    f = ExplicitFamily([[1, 2], [3], [4]], window=8)
    top = f.maximal_elements()
    for F in f.members():
        if F:
            assert f.is_maximal(F) == (F in top)


def test_counter_family_rejects_bad_blocks():
    with pytest.raises(DomainError):
        CounterFamily([[2, 3]])
    with pytest.raises(DomainError):
        CounterFamily([[3, 5]])
    CounterFamily([[3, 4], [5, 6, 7]])


def test_predicate_family_membership_and_window():
    f = PredicateFamily(lambda F: sum(F) <= 6, 8)
    assert f.member((1, 2, 3)) and not f.member((3, 4))
    assert f.member((8,))
    with pytest.raises(WindowExceededError):
        f.member((9,))


def test_incidence_matrix_rows():
    A = incidence_matrix([FiniteSet((1,)), FiniteSet((2, 3))], 3)
    assert A.tolist() == [[1, 0, 0], [0, 1, 1]]


@pytest.mark.parametrize("fam", [SchreierFamily(1, 12), SchreierFamily(2, 12), SchreierFamily(3, 10),
                                 SchreierFamily("omega", 10), CounterFamily([[3, 4], [5, 6]], 8)],
                         ids=lambda f: f.describe())
def test_hereditary_and_singletons_exhaustive(fam):
    mem = set(fam.members())
    for n in range(1, fam.window + 1):
        assert FiniteSet((n,)) in mem
    for F in mem:
        for r in range(len(F)):
            for G in itertools.combinations(F, r):
                assert FiniteSet._trusted(G) in mem


def test_counter_members_match_literal_predicate():
    pred = counter_pred([(3, 4), (5, 6, 7)])
    fam = CounterFamily([[3, 4], [5, 6, 7]], 9)
    assert {tuple(F) for F in fam.members()} == {F for F in subsets(9) if pred(F)}


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(1, 12), min_size=1, max_size=6, unique=True), st.data())
def test_spreading_images_stay_in_s1(F, data):
    F = sorted(F)
    if not s1_literal(F):
        return
    images = []
    lo = 1
    for x in F:
        v = data.draw(st.integers(max(lo, x), max(lo, x) + 20))
        images.append(v)
        lo = v + 1
    big = SchreierFamily(1, 200)
    assert big.member(SpreadMap(FiniteSet(F), tuple(images)).image())


@pytest.mark.parametrize("alpha", [1, 2])
def test_spreading_randomized_ten_thousand(alpha):
    rng = random.Random(alpha)
    fam = SchreierFamily(alpha, 64)
    members = [F for F in SchreierFamily(alpha, 10).members() if F]
    for _ in range(10_000):
        F = rng.choice(members)
        img, lo = [], 1
        for x in F:
            v = rng.randint(max(lo, x), max(lo, x) + 4)
            img.append(v)
            lo = v + 1
        assert fam.member(img), (F, img)
