import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from multimatch.association import (
    STANDARD_GAMMAS,
    AllTiedError,
    CoupleDataset,
    count_concordance,
    kruskal_gamma,
    standard_gammas,
)
from multimatch.data import REPORTED_GAMMAS, TABLE_AXES, YEARS, joint_table
from multimatch.market import BivariateTable

HH = (("W", "H"), ("M", "H"))


def pairwise_counts(w, a, b):
    """O(n^2) reference over unordered pairs of distinct records."""
    C = D = 0.0
    for i, j in itertools.combinations(range(len(w)), 2):
        s = (a[i] - a[j]) * (b[i] - b[j])
        if s > 0:
            C += w[i] * w[j]
        elif s < 0:
            D += w[i] * w[j]
    return C, D


def dataset(rows):
    return CoupleDataset.from_records(
        [(w, (xe, xh), (ye, yh)) for w, xe, xh, ye, yh in rows], ("E", "H"), ("E", "H")
    )


def test_two_aligned_couples():
    d = dataset([(1, 1, 1, 1, 1), (1, 2, 2, 2, 2)])
    c = count_concordance(d, HH)
    assert (c.C, c.D, c.ties) == (1, 0, 0)


def test_two_anti_aligned_couples():
    d = dataset([(1, 1, 1, 1, 2), (1, 2, 2, 2, 1)])
    c = count_concordance(d, HH)
    assert (c.C, c.D) == (0, 1)


def test_diagonal_table_gamma_one():
    assert kruskal_gamma(BivariateTable.from_array([[0.5, 0], [0, 0.5]])).gamma == 1


def test_all_tied_is_an_error():
    d = dataset([(1, 1, 3, 1, 3), (2, 2, 3, 1, 3)])
    with pytest.raises(AllTiedError):
        kruskal_gamma(d, HH)


def test_unknown_attribute():
    d = dataset([(1, 1, 1, 1, 1)])
    with pytest.raises(KeyError):
        kruskal_gamma(d, (("W", "Z"), ("M", "H")))
    with pytest.raises(KeyError):
        kruskal_gamma(d, (("Q", "H"), ("M", "H")))


def test_empty_dataset_rejected():
    with pytest.raises(ValueError):
        CoupleDataset.from_records([])


@pytest.mark.parametrize("stat", sorted(TABLE_AXES))
@pytest.mark.parametrize("year", YEARS)
def test_published_tables_reproduce_reported_gammas(stat, year):
    assert TABLE_AXES[stat] == STANDARD_GAMMAS[stat]
    g = kruskal_gamma(BivariateTable.from_array(joint_table(stat, year))).gamma
    assert g == pytest.approx(REPORTED_GAMMAS[stat][year], abs=0.02)


def test_health_pair_fractions():
    g = kruskal_gamma(BivariateTable.from_array(joint_table("WM_HH", 2010)))
    assert (g.C - g.D) / (g.C + g.D) == pytest.approx(0.7586, abs=0.02)
    assert g.C + g.D + g.ties == pytest.approx(1.0)


def test_table_route_matches_pair_enumeration():
    m = joint_table("WM_HE", 2013)
    # treat each cell as a weighted record; same-cell pairs are ties either way
    recs = [(m[r, c], r, c) for r in range(5) for c in range(5)]
    C, D = pairwise_counts([w for w, _, _ in recs], [r for _, r, _ in recs], [c for _, _, c in recs])
    cnt = count_concordance(BivariateTable.from_array(m))
    assert cnt.C == pytest.approx(C, rel=1e-12)
    assert cnt.D == pytest.approx(D, rel=1e-12)


rows = st.lists(
    st.tuples(st.integers(1, 5), st.integers(1, 5), st.integers(1, 5), st.integers(1, 5), st.integers(1, 5)),
    min_size=2, max_size=30,
)


@given(rows)
def test_prefix_sums_match_pair_loop(rs):
    d = dataset(rs)
    for name, spec in STANDARD_GAMMAS.items():
        c = count_concordance(d, spec)
        C, D = pairwise_counts(d.weights, d.column(spec[0]), d.column(spec[1]))
        assert c.C == pytest.approx(C) and c.D == pytest.approx(D)
        W = d.weights.sum()
        assert c.total == pytest.approx((W**2 - (d.weights**2).sum()) / 2)


@given(rows)
def test_reversal_negates_gamma(rs):
    d = dataset(rs)
    t = d.table(HH)
    try:
        g = kruskal_gamma(t).gamma
    except AllTiedError:
        return
    assert kruskal_gamma(t.reversed_rows()).gamma == pytest.approx(-g, abs=1e-12)


@given(rows)
def test_dataset_equals_its_table_and_doubling(rs):
    d = dataset(rs)
    try:
        g = kruskal_gamma(d, HH).gamma
    except AllTiedError:
        return
    assert kruskal_gamma(d.table(HH)).gamma == pytest.approx(g, abs=1e-12)
    assert kruskal_gamma(d.concat(d), HH).gamma == pytest.approx(g, abs=1e-12)
    assert -1 <= g <= 1


def test_standard_gammas_names():
    d = dataset([(1, 1, 2, 3, 4), (2, 3, 1, 2, 5), (1, 5, 5, 1, 1), (3, 2, 4, 4, 2)])
    out = standard_gammas(d)
    assert set(out) == set(STANDARD_GAMMAS)
