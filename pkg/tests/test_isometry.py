import itertools
import math

import numpy as np
import pytest

from schreier_kit import CardinalityFamily, CounterFamily, DomainError, IncompatiblePermutationError, SchreierFamily
from schreier_kit.family import FiniteSet, incidence_matrix
from schreier_kit.isometry import (
    SignedPermutation,
    all_signed_permutations,
    build_signed_permutation,
    check_isometry,
    classify,
    min_of_maximal,
    permutation_compatibility,
    probe_vectors,
    rigidity_suite,
    rotation_matrix,
    schreier_witness,
    search_isometry,
    sign_patterns,
    star_condition,
)
from schreier_kit.norms import norm

from oracles import counter_pred, s1_literal, schreier_finite

S1 = SchreierFamily(1, 12)
COUNTER = CounterFamily(window=12)
BLOCKS = CounterFamily([[3, 4], [5, 6, 7], [8, 9, 10, 11]], 12)


def test_signed_permutation_validation_and_matrix():
    sp = SignedPermutation((2, 1, 3), (1, -1, 1))
    J = sp.matrix()
    assert J @ np.array([1.0, 0, 0]) == pytest.approx([0, 1, 0])
    assert J @ np.array([0, 1.0, 0]) == pytest.approx([-1, 0, 0])
    assert sp.image((1, 3)) == FiniteSet((2, 3))
    with pytest.raises(DomainError):
        SignedPermutation((1, 1))
    with pytest.raises(DomainError):
        SignedPermutation((1, 2), (1, 2))


def test_classify():
    assert classify(np.eye(3)) == {"classification": "signed-permutation", "pi": [1, 2, 3],
                                   "signs": [1, 1, 1], "is_diagonal": True}
    c = classify(SignedPermutation((3, 1, 2), (-1, 1, 1)).matrix())
    assert c["pi"] == [3, 1, 2] and c["signs"] == [-1, 1, 1] and not c["is_diagonal"]
    assert classify(rotation_matrix(3, math.pi / 6))["classification"] == "other"


def test_sign_patterns_count():
    assert len(sign_patterns(3)) == (3 ** 3 - 1) // 2
    assert len(all_signed_permutations(3)) == 48


def test_rotation_on_counter_family_is_isometry():
    J = rotation_matrix(6, math.pi / 6)
    for fam in (COUNTER, BLOCKS):
        rep = check_isometry(fam, 2, J, samples=10_000, seed=0)
        assert rep.max_deviation < 1e-9 and rep.classification == "other"
    bad = check_isometry(S1, 2, J, samples=10_000, seed=0)
    assert bad.max_deviation > 0.1


def test_rotation_fails_away_from_p2():
    rep = check_isometry(COUNTER, 3, rotation_matrix(4, math.pi / 6), samples=500)
    assert rep.max_deviation > 1e-3


def test_identity_and_diagonal_signs_are_isometries():
    for signs in itertools.product((1, -1), repeat=4):
        rep = check_isometry(S1, 2.5, np.diag(signs).astype(float), samples=200)
        assert rep.max_deviation <= 1e-12 and rep.structure["is_diagonal"]


def test_inverse_of_isometry_is_isometry():
    J = rotation_matrix(5, math.pi / 5, 1, 2)
    a = check_isometry(COUNTER, 2, J, samples=500).max_deviation
    b = check_isometry(COUNTER, 2, np.linalg.inv(J), samples=500).max_deviation
    assert a < 1e-9 and b < 1e-9


def test_check_isometry_matches_direct_norms_on_its_probes():
    rng = np.random.default_rng(0)
    J = rng.standard_normal((3, 3))
    rep = check_isometry(S1, 2, J, samples=50, seed=3)
    A = incidence_matrix(S1.maximal_elements(range(1, 4)), 3)
    X = probe_vectors(A, 2.0, 3, 50, np.random.default_rng(3))
    direct = max(abs(norm(S1, 2, J @ x).value - norm(S1, 2, x).value) for x in X)
    assert rep.samples == len(X)
    assert abs(rep.max_deviation - direct) <= 1e-12 and direct > 1e-3


def test_check_isometry_rejects_bad_input():
    with pytest.raises(DomainError):
        check_isometry(S1, 2, np.ones((2, 3)))
    with pytest.raises(DomainError):
        check_isometry(S1, 2, np.full((2, 2), np.nan))
    with pytest.raises(DomainError):
        check_isometry(SchreierFamily(1, 3), 2, np.eye(4))


def test_swap_rejected_on_s1_with_witness():
    c = permutation_compatibility(S1, SignedPermutation.swap(1, 2, 5))
    assert not c
    assert c.witness == (FiniteSet((2, 3)), FiniteSet((1, 3)))
    with pytest.raises(IncompatiblePermutationError):
        build_signed_permutation(S1, SignedPermutation.swap(1, 2, 5))


def test_swap_accepted_on_counter_family():
    sp = SignedPermutation.swap(1, 2, 6)
    assert permutation_compatibility(COUNTER, sp)
    J = build_signed_permutation(COUNTER, sp)
    assert check_isometry(COUNTER, 2, J, samples=2000).max_deviation <= 1e-12
    assert check_isometry(COUNTER, 3, J, samples=2000).max_deviation <= 1e-12


@pytest.mark.parametrize("alpha", [1, 2])
def test_only_identity_compatible_on_schreier(alpha):
    fam = SchreierFamily(alpha, 12)
    members = fam.members()
    ok = [pi for pi in itertools.permutations(range(1, 6))
          if schreier_witness(alpha, pi) is None
          and permutation_compatibility(fam, SignedPermutation(pi), members=members)]
    assert ok == [(1, 2, 3, 4, 5)]
    out = rigidity_suite(alpha, 3, 5, restarts=20, samples=20)
    assert out["compatible_permutations"] == [[1, 2, 3, 4, 5]] and out["only_identity_permutation"]


def test_window_alone_misses_a_long_witness_on_s2():
    # the least S_2 witness against swap(3,4) runs past index 12
    sp = SignedPermutation((1, 2, 4, 3))
    assert permutation_compatibility(SchreierFamily(2, 12), sp)
    F, img = schreier_witness(2, sp.pi)
    assert F.max > 12 and schreier_finite(2, tuple(F)) and not schreier_finite(2, tuple(img))


@pytest.mark.parametrize("alpha, oracle", [(1, lambda F: s1_literal(F)), (2, lambda F: schreier_finite(2, F))])
def test_constructed_witnesses_are_valid(alpha, oracle):
    for pi in itertools.permutations(range(1, 5)):
        w = schreier_witness(alpha, pi)
        if pi == (1, 2, 3, 4):
            assert w is None
            continue
        F, img = w
        assert oracle(tuple(F)) and not oracle(tuple(img))
        moved = [pi[i - 1] if i <= 4 else i for i in F]
        assert sorted(moved) == list(img)


def test_compatibility_with_a_different_target():
    sp = SignedPermutation((2, 1))
    c = permutation_compatibility(CounterFamily(window=4), sp, target=CounterFamily(window=4))
    assert c
    c2 = permutation_compatibility(CounterFamily(window=4), SignedPermutation((1, 2)), target=SchreierFamily(1, 4))
    assert not c2


def test_star_condition_examples():
    r = star_condition(COUNTER, 1, 2)
    assert not r.holds and r.witness is None
    assert star_condition(S1, 1, 2).holds
    with pytest.raises(DomainError):
        star_condition(S1, 3, 3)


def test_star_condition_witnesses_verified_on_s1():
    for j, k in itertools.permutations(range(1, 9), 2):
        r = star_condition(S1, j, k)
        assert r.holds
        F = tuple(r.witness)
        assert s1_literal(F) and (j in F or k in F)
        assert not s1_literal(tuple(sorted(set(F) | {j, k})))


def test_star_condition_on_counter_blocks_matches_oracle():
    pred = counter_pred([])
    fam = CounterFamily(window=8)
    for j, k in itertools.combinations(range(1, 9), 2):
        want = any(pred(F) and (j in F or k in F) and not pred(tuple(sorted(set(F) | {j, k})))
                   for r in range(0, 3) for F in itertools.combinations(range(1, 9), r))
        assert star_condition(fam, j, k).holds == want


def test_min_of_maximal_examples():
    ok, table = min_of_maximal(S1, 4)
    assert ok
    assert [tuple(table[k]) for k in range(1, 5)] == [(1,), (2, 3), (3, 4, 5), (4, 5, 6, 7)]
    ok2, t2 = min_of_maximal(COUNTER, 3)
    assert not ok2 and t2[1] == FiniteSet((1, 2)) and t2[2] is None
    ok3, t3 = min_of_maximal(CardinalityFamily(1, 8), 3)
    assert ok3 and [tuple(t3[k]) for k in (1, 2, 3)] == [(1,), (2,), (3,)]
    with pytest.raises(DomainError):
        min_of_maximal(SchreierFamily(1, 6), 4)


def test_search_finds_rotation_on_counter_family():
    rep = search_isometry(CounterFamily(window=12), 2, 2, restarts=200, seed=0)
    assert rep.status == "candidate found" and rep.deviation < 1e-8
    assert classify(rep.matrix)["classification"] == "other"


def test_search_on_s1_p3_finds_nothing_small():
    rep = search_isometry(S1, 3, 3, restarts=300, seed=0)
    assert rep.status == "no counterexample found"
    assert rep.deviation > 1e-6


def test_search_on_s1_p2_dim2_finds_nothing():
    rep = search_isometry(S1, 2, 2, restarts=300, seed=2)
    assert rep.deviation > 1e-6


def test_search_is_deterministic():
    a = search_isometry(COUNTER, 2, 2, restarts=50, seed=7)
    b = search_isometry(COUNTER, 2, 2, restarts=50, seed=7)
    assert a.deviation == b.deviation and np.array_equal(a.matrix, b.matrix)


def test_search_dimension_bounds():
    with pytest.raises(DomainError):
        search_isometry(S1, 3, 5)


def test_rigidity_suite_small():
    out = rigidity_suite(1, 3, 4, restarts=50, samples=50)
    assert out["only_identity_permutation"] and out["diagonal_all_isometries"]
    assert out["permutations_checked"] == 24
    assert out["search"]["status"] == "no counterexample found"
