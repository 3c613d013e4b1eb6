import numpy as np
import pytest

from multimatch.data import TABLE_AXES, TABLE_CORRECTIONS, YEARS, joint_table, pooled_table


@pytest.mark.parametrize("table", sorted(TABLE_AXES))
@pytest.mark.parametrize("year", YEARS)
def test_tables_sum_to_one(table, year):
    t = joint_table(table, year)
    assert t.shape == (5, 5) and (t >= 0).all()
    assert t.sum() == pytest.approx(1.0, abs=0.005)


@pytest.mark.parametrize("key", sorted(TABLE_CORRECTIONS))
def test_corrections_repair_totals(key):
    table, year, r, c = key
    raw = joint_table(table, year, corrected=False)
    fixed = joint_table(table, year)
    assert abs(fixed.sum() - 1) < abs(raw.sum() - 1)
    assert abs(fixed.sum() - 1) < 0.005
    n_fixes = sum(1 for k in TABLE_CORRECTIONS if k[:2] == (table, year))
    assert np.count_nonzero(raw != fixed) == n_fixes and fixed[r - 1, c - 1] == TABLE_CORRECTIONS[key]


def test_pooled_table_normalized():
    p = pooled_table("WM_HH")
    assert p.sum() == pytest.approx(1.0)
    # health of spouses is strongly aligned
    assert np.trace(p) > 0.5


def test_unknown_table_year():
    with pytest.raises(KeyError):
        joint_table(9, 2010)
    with pytest.raises(KeyError):
        joint_table("WW_HE", 2009)
