import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import COVER_TAU, PAIR_TAU
from fibrenorm.limits import common_limit

ELLS = range(3, 40, 2)


@settings(max_examples=25, deadline=None)
@given(t=st.floats(-6, -2), c1=st.floats(-40, -2), p1=st.floats(0.6, 2.0),
       c2=st.floats(0.5, 10), p2=st.floats(0.6, 2.0))
def test_recovers_synthetic_limit(t, c1, p1, c2, p2):
    cover = {e: t + c1 * e ** -p1 for e in ELLS}
    homeo = {e: t + c2 * e ** -p2 for e in ELLS}
    fit = common_limit(cover, homeo, min_ell=11)
    assert fit.limit == pytest.approx(t, abs=1e-6)
    assert fit.rms < 1e-8


def test_needs_three_points_each():
    with pytest.raises(ValueError):
        common_limit({11: -4.0, 13: -3.9}, {11: -3.0, 13: -3.1, 15: -3.2}, min_ell=11)


def test_reference_tables_give_common_limit():
    fit = common_limit(COVER_TAU, PAIR_TAU, min_ell=11)
    assert abs(fit.limit + 3.71) < 0.05
    assert fit.spread < 0.05
    d = fit.to_dict()
    assert float(d["limit"]) == fit.limit and d["points"] == 12
