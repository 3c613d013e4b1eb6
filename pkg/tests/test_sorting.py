import itertools

import pytest
from hypothesis import given, strategies as st

from multimatch.market import ComplementarityPattern, DiscreteMeasure, MarketInstance, MatchingMeasure, Quadratic
from multimatch.planner import enumerate_plans
from multimatch.sorting import (
    InsufficientMassError,
    Transfer,
    apply_transfer,
    check_global_pn,
    check_weak_pn,
    check_within_group,
    classify_pair,
    exists_global_pn,
)

from .conftest import PP, SCHEME1, SCHEME2, SCHEME3, T, unit_scheme

P11 = ComplementarityPattern([(1, 1)])


def test_comonotone_points_pn_concordant():
    c = classify_pair(((10, 10), (10, 10)), ((20, 20), (20, 20)), PP)
    assert c.pn_concordant and c.pn_weak_concordant and not c.np_weak_concordant


def test_scheme1_outer_couples_np_concordant():
    c = classify_pair(((10, 10), (20, 20)), ((20, 20), (10, 10)), PP)
    assert c.np_concordant and not c.pn_weak_concordant


def test_identical_couples_weak_both_ways():
    c = classify_pair(((1, 2), (3, 4)), ((1, 2), (3, 4)), PP)
    assert c.pn_weak_concordant and c.np_weak_concordant
    assert not c.pn_concordant and not c.np_concordant


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        classify_pair(((1, 2), (3,)), ((1, 2), (3, 4)), PP)


def test_global_holds_for_comonotone_1d():
    M = MatchingMeasure.from_dict({((1,), (1,)): 1, ((2,), (2,)): 2, ((3,), (3,)): 1})
    assert check_global_pn(M, P11).holds


def test_mixed_coupling_fails_global():
    M = MatchingMeasure.from_dict({((10, 10), (10, 20)): 1, ((20, 20), (20, 10)): 1})
    chk = check_global_pn(M, PP)
    assert not chk.holds
    (x, y), (xp, yp) = chk.witness
    # the violation sits on the second attributes
    assert (x[1] - xp[1]) * (y[1] - yp[1]) < 0


def test_intro_counts_fail_global(intro_counts):
    chk = check_global_pn(intro_counts, PP)
    assert not chk.holds
    assert chk.witness == (((10, 10), (20, 10)), ((20, 20), (10, 20)))


def test_scheme1_within_group_but_not_weak():
    M = unit_scheme(SCHEME1)
    assert check_within_group(M, PP).holds
    chk = check_weak_pn(M, PP)
    assert not chk.holds
    assert chk.witness == (((10, 10), (20, 20)), ((20, 20), (10, 10)))


def test_swapped_cross_coupling_within_group_vacuous():
    M = MatchingMeasure.from_dict({((10, 20), (20, 10)): 1, ((20, 10), (10, 20)): 1})
    assert check_within_group(M, PP).holds


def test_antimonotone_fails_within_group():
    M = MatchingMeasure.from_dict({((1,), (2,)): 1, ((2,), (1,)): 1})
    assert not check_within_group(M, P11).holds


def test_scheme3_and_intro_counts_weak_sorted(intro_counts):
    assert check_weak_pn(unit_scheme(SCHEME3), PP).holds
    assert check_weak_pn(intro_counts, PP).holds


def test_mass_threshold_hides_tiny_cells():
    M = MatchingMeasure.from_dict({((1,), (2,)): 1e-12, ((2,), (1,)): 1e-12, ((1,), (1,)): 1, ((2,), (2,)): 1})
    assert not check_global_pn(M, P11).holds
    assert check_global_pn(M, P11, mass_tol=1e-9).holds


def test_zero_transfer_is_identity(intro_counts):
    t = Transfer((10, 10), (10, 10), (20, 20), (20, 20), 0)
    assert apply_transfer(intro_counts, t) is intro_counts


def test_reverse_transfer_preserves_marginals():
    s2 = unit_scheme(SCHEME2)
    # swap the outer couples of scheme-2 back to those of scheme-1
    t = Transfer((10, 10), (20, 20), (20, 20), (10, 10), 1)
    s1 = apply_transfer(s2, t)
    assert s1 == unit_scheme(SCHEME1)
    assert s1.firm_marginal() == s2.firm_marginal()
    assert s1.worker_marginal() == s2.worker_marginal()


def test_swapped_transfer_raises_output_800_to_1000():
    Q = Quadratic([[1, 0], [0, 1]])
    M = MatchingMeasure.from_dict({((10, 20), (20, 10)): 1, ((20, 10), (10, 20)): 1})
    assert M.integrate(Q) == 800
    t = Transfer((10, 20), (10, 20), (20, 10), (20, 10), 1)
    assert t.is_pn_improving(PP)
    after = apply_transfer(M, t)
    assert after.integrate(Q) == 1000


def test_insufficient_mass():
    M = MatchingMeasure.from_dict({((1,), (2,)): 1, ((2,), (1,)): 1})
    with pytest.raises(InsufficientMassError):
        apply_transfer(M, Transfer((1,), (1,), (2,), (2,), 2))


def test_exists_global_examples(mixed_market):
    assert exists_global_pn(mixed_market, PP).exists is False
    star = MarketInstance(DiscreteMeasure.from_dict({(5, 5): 3}), DiscreteMeasure.from_dict({(1, 9): 1, (9, 1): 2}))
    res = exists_global_pn(star, PP)
    assert res.exists and res.status == "found"
    one_d = MarketInstance(DiscreteMeasure.from_dict({(1,): 2, (2,): 1, (3,): 1}),
                           DiscreteMeasure.from_dict({(1,): 1, (2,): 1, (3,): 2}))
    res = exists_global_pn(one_d, P11)
    assert res.exists and check_global_pn(res.witness, P11).holds


def test_exists_global_budget_is_inconclusive(intro_market):
    res = exists_global_pn(intro_market, PP, budget=1)
    assert res.exists is None and res.status == "inconclusive"


# --------------------------------------------------------------------------
# properties

vec2 = st.tuples(st.integers(0, 2), st.integers(0, 2))
couple = st.tuples(vec2, vec2)
patterns = st.sampled_from([
    PP, ComplementarityPattern([(1, 1)], [(2, 2)]), ComplementarityPattern([], [(1, 2)]),
    ComplementarityPattern([(1, 2), (2, 1)]),
])


@given(couple, couple, patterns)
def test_classify_pair_symmetric_and_swap(c1, c2, pattern):
    a, b = classify_pair(c1, c2, pattern), classify_pair(c2, c1, pattern)
    assert a == b
    s = classify_pair(c1, c2, pattern.swapped())
    assert (s.pn_weak_concordant, s.pn_concordant) == (a.np_weak_concordant, a.np_concordant)
    assert not (a.pn_concordant and a.np_concordant)
    assert a.pn_weak_concordant or not a.pn_concordant


cells = st.dictionaries(st.tuples(vec2, vec2), st.integers(1, 3), min_size=1, max_size=6)


@given(cells, patterns)
def test_sorting_chain(d, pattern):
    M = MatchingMeasure.from_dict(d)
    g, w, wg = check_global_pn(M, pattern), check_weak_pn(M, pattern), check_within_group(M, pattern)
    assert not g.holds or w.holds
    assert not w.holds or wg.holds


@given(cells, st.sampled_from(list(itertools.combinations(range(3), 2))),
       st.sampled_from(list(itertools.combinations(range(3), 2))), st.integers(1, 3))
def test_transfer_preserves_marginals_exactly(d, xr, yr, alpha):
    M = MatchingMeasure.from_dict(d)
    x, xp = (xr[0], 0), (xr[1], 0)
    y, yp = (yr[0], 1), (yr[1], 1)
    t = Transfer(x, y, xp, yp, alpha)
    try:
        after = apply_transfer(M, t)
    except InsufficientMassError:
        return
    for k in set(M.firm_marginal()) | set(after.firm_marginal()):
        assert M.firm_marginal().get(k, 0) == after.firm_marginal().get(k, 0)
    for k in set(M.worker_marginal()) | set(after.worker_marginal()):
        assert M.worker_marginal().get(k, 0) == after.worker_marginal().get(k, 0)


small_market = st.tuples(
    st.dictionaries(vec2, st.integers(1, 2), min_size=1, max_size=3),
    st.dictionaries(vec2, st.integers(1, 2), min_size=1, max_size=3),
).filter(lambda fg: sum(fg[0].values()) == sum(fg[1].values()))


@given(small_market, patterns)
def test_exists_global_matches_enumeration(fg, pattern):
    m = MarketInstance(DiscreteMeasure.from_dict(fg[0]), DiscreteMeasure.from_dict(fg[1]))
    res = exists_global_pn(m, pattern)
    # any sorted support carries an integral plan, so enumeration is exhaustive
    brute = any(
        check_global_pn(plan, pattern).holds for plan in enumerate_plans(m)
    )
    assert res.exists == brute
    if res.exists:
        assert check_global_pn(res.witness, pattern).holds
