import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from reeb_grader.boothby_wang import BundleSpec, Convention, generator_degree
from reeb_grader.homology_engine import (
    GradedRanks,
    compare,
    compare_ranks,
    compute,
    enumerate_family,
    family_pairs,
    parse_records,
    poincare_series,
    to_records,
)
from reeb_grader.moduli import GateError
from reeb_grader.orbifold_base import custom, product_projective, wang_ziller, weighted_projective

import oracles


def spec(base, convention=Convention.REDUCED):
    return BundleSpec(base, convention)


def test_projective_line_to_12():
    g = compute(spec(product_projective([(1, 1)])), 12)
    assert g.ranks == {d: 1 for d in range(2, 13, 2)}
    assert g.smallest_omitted == 14


def test_projective_plane_to_14():
    g = compute(spec(product_projective([(2, 1)])), 14)
    assert g.ranks == {d: 1 for d in range(4, 15, 2)}


def test_wang_ziller_1_2_to_14():
    g = compute(spec(wang_ziller(1, 2)), 14)
    assert g.ranks == oracles.wang_ziller_ranks(1, 2, 14) == {10: 1, 12: 2, 14: 1}
    assert g.smallest_omitted == 22


@pytest.mark.parametrize(
    "dims, weights", [([1], [1]), ([2], [1]), ([3], [1]), ([1, 1], [1, 2]), ([1, 2], [2, 1]), ([2, 2], [1, 1])]
)
def test_products_match_brute_force(dims, weights):
    g = compute(spec(product_projective(list(zip(dims, weights)))), 60)
    assert g.ranks == oracles.projective_product_ranks(dims, weights, 60)


@pytest.mark.parametrize("a", [(1, 2), (1, 3), (2, 3), (1, 1, 2), (1, 2, 3), (2, 3, 5), (1, 1, 1, 3), (3, 4, 8)])
def test_weighted_projective_is_a_sphere(a):
    # With bundle degree 1 the total space is a sphere with a Reeb flow of ellipsoid type.
    g = compute(spec(weighted_projective(a)), 50)
    assert g.ranks == oracles.sphere_ranks(len(a), 50)


def test_rank_equals_provenance_length():
    g = compute(spec(weighted_projective((2, 3, 5))), 40)
    for d, r in g.ranks.items():
        assert len(g.provenance[d]) == r
        assert all(generator_degree(spec(weighted_projective((2, 3, 5))), k) == d for k in g.provenance[d])


def test_no_degrees_near_zero():
    for base in [product_projective([(1, 1)]), wang_ziller(1, 1), weighted_projective((1, 2, 3))]:
        g = compute(spec(base), 30)
        assert not set(g.ranks) & {-1, 0, 1}


def test_max_degree_is_inclusive_and_checked():
    g = compute(spec(wang_ziller(1, 1)), 10)
    assert max(g.ranks) == 10
    with pytest.raises(ValueError, match="max_degree"):
        compute(spec(wang_ziller(1, 1)), 1)


def test_nonpositive_pairing_is_refused():
    base = custom(2, [{"dim": 2, "betti": [1, 1], "chern_pairing": 0}], (1,), (2,))
    with pytest.raises(ValueError, match="non-terminating enumeration"):
        compute(spec(base), 10)


def test_gate_and_override():
    base = custom(2, [{"dim": 2, "betti": [1, 1], "chern_pairing": 2}], (1,), (1,))
    with pytest.raises(GateError):
        compute(spec(base), 10)
    g = compute(spec(base), 10, override_gate=True)
    assert g.gate_overridden and g.ranks == {2: 1, 4: 1, 6: 1, 8: 1, 10: 1}


def test_compare_examples():
    v = compare(spec(wang_ziller(2, 1)), spec(wang_ziller(3, 2)), 20)
    assert not v.equal_up_to_cutoff and v.first_difference == (10, 1, 0)
    s = spec(wang_ziller(2, 3))
    assert compare(s, s, 30).equal_up_to_cutoff
    swapped = compare(spec(wang_ziller(1, 2)), spec(wang_ziller(2, 1)), 40)
    assert swapped.equal_up_to_cutoff and swapped.first_difference is None


def test_compare_is_antisymmetric():
    a, b = spec(wang_ziller(3, 1)), spec(wang_ziller(5, 3))
    ab, ba = compare(a, b, 60), compare(b, a, 60)
    assert ab.first_difference == (ba.first_difference[0], ba.first_difference[2], ba.first_difference[1])


def test_compare_needs_same_convention():
    with pytest.raises(ValueError, match="convention"):
        compare(spec(wang_ziller(1, 1)), spec(wang_ziller(1, 1), Convention.UNREDUCED), 20)


def test_family_examples():
    t = enumerate_family(1, 5, 60)
    assert [(m.k, m.l) for m in t.members] == [(2, 1), (3, 2), (4, 3), (5, 4)]
    assert [m.min_degree for m in t.members] == [10, 18, 26, 34]
    assert t.all_distinguished
    assert t.common_chern_xi is not None and t.common_chern_xi.value == 2

    single = enumerate_family(0, 1, 20)
    assert [(m.k, m.l) for m in single.members] == [(1, 1)] and single.verdicts == {}

    two = enumerate_family(2, 5, 60)
    assert [(m.k, m.l) for m in two.members] == [(3, 1), (5, 3)]
    assert two.verdicts[((3, 1), (5, 3))].first_difference[0] == 14
    assert [m.min_degree for m in two.members] == [14, 30]


def test_family_bound_check():
    with pytest.raises(ValueError, match="bound"):
        enumerate_family(3, 3, 20)


def test_family_pairs_are_coprime():
    for c in range(0, 5):
        for k, l in family_pairs(c, 30):
            assert k - l == c and l >= 1 and math.gcd(k, l) == 1


def test_poincare_series():
    assert poincare_series(compute(spec(product_projective([(1, 1)])), 6)) == "q^2 + q^4 + q^6"
    assert poincare_series(compute(spec(wang_ziller(1, 1)), 10)) == "q^6 + 2·q^8 + q^10"
    empty = GradedRanks({}, {}, 4, Convention.REDUCED)
    assert poincare_series(empty) == "0"


def test_single_stratum_sum_rule():
    for k, l in [(1, 1), (2, 3), (4, 1)]:
        g = compute(spec(wang_ziller(k, l)), 200)
        for m in range(1, 200 // (4 * (k + l)) + 1):
            lo = 4 * m * (k + l) - 2
            if lo + 4 > 200:
                break
            assert sum(g.rank(d) for d in range(lo, lo + 5)) == 4


def test_records_round_trip():
    for base in [wang_ziller(1, 2), weighted_projective((2, 3, 5)), product_projective([(1, 1)])]:
        g = compute(spec(base), 40)
        text = to_records(g)
        assert parse_records(text, base) == g
        assert to_records(parse_records(text, base)) == text


def test_records_reject_garbage():
    base = wang_ziller(1, 1)
    with pytest.raises(ValueError, match="line 3"):
        parse_records("# x\n# convention=reduced max_degree=10\n6,1,top:1\n", base)


@settings(max_examples=25, deadline=None, derandomize=True)
@given(st.integers(0, 10_000))
def test_result_ignores_stratum_order(seed):
    base = weighted_projective((2, 3, 5, 7))
    lower = list(base.strata[1:])
    random.Random(seed).shuffle(lower)
    shuffled = custom(base.n, [base.top] + lower, base.w, base.w_tilde)
    a, b = compute(spec(base), 40), compute(spec(shuffled), 40)
    assert a.ranks == b.ranks
    assert {d: sorted(k.triple() for k in ks) for d, ks in a.provenance.items()} == {
        d: sorted(k.triple() for k in ks) for d, ks in b.provenance.items()
    }


def test_compare_ranks_cutoff_uses_smaller_range():
    a = compute(spec(wang_ziller(1, 1)), 30)
    b = compute(spec(wang_ziller(1, 1)), 10)
    assert compare_ranks(a, b).equal_up_to_cutoff
