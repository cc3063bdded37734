import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fibrenorm.dimension import (
    CSV_HEADER,
    FiniteIFS,
    cylinders,
    dimension_estimate,
    dimension_sweep,
    measured_distortion,
    moran_dimension,
    pressure_bracket,
)
from fibrenorm.errors import PrecisionError


def test_middle_thirds_cantor():
    ifs = FiniteIFS.linear([1 / 3, 1 / 3])
    est = dimension_estimate(ifs, depth=10, tol=1e-8)
    target = math.log(2) / math.log(3)
    assert abs(est.s_lo - target) < 1e-4
    assert abs(est.s_hi - target) < 1e-4
    assert est.s_lo <= target + 1e-7 <= est.s_hi + 2e-7


@settings(max_examples=25, deadline=None)
@given(m=st.integers(2, 5), r=st.floats(0.05, 0.19))
def test_moran_equal_ratios(m, r):
    est = dimension_estimate(FiniteIFS.linear([r] * m), depth=4, tol=1e-9)
    assert abs(est.s_lo - moran_dimension(m, r)) < 1e-6


def test_unequal_ratios_solve_moran():
    ratios = [0.2, 0.3, 0.1]
    est = dimension_estimate(FiniteIFS.linear(ratios), depth=6, tol=1e-10)
    s = est.s_lo
    assert abs(sum(r ** s for r in ratios) - 1) < 1e-7


def test_cylinder_count_and_nesting():
    ifs = FiniteIFS.linear([0.3, 0.2, 0.25])
    c2, c3 = cylinders(ifs, 2), cylinders(ifs, 3)
    assert len(c2) == 9 and len(c3) == 27
    # lexicographic, outermost letter first
    assert [tuple(w) for w in c2.words[:3]] == [(0, 0), (0, 1), (0, 2)]
    for w, m, l in zip(c3.words, c3.mids, c3.lengths):
        k = [i for i, p in enumerate(c2.words) if tuple(p) == tuple(w[:2])][0]
        # the child sits inside its depth-2 ancestor
        assert abs(m - c2.mids[k]) <= 0.5 * c2.lengths[k] + 1e-15
        assert l < c2.lengths[k]
    assert np.isclose(c3.lengths.sum(), 0.75 ** 3)


def test_pressure_decreasing_in_s():
    ifs = FiniteIFS.linear([0.3, 0.4])
    cyl = cylinders(ifs, 5)
    prev = None
    for s in np.linspace(0, 1, 11):
        lo, hi = pressure_bracket(ifs, 5, s, cyl)
        assert lo <= hi
        if prev is not None:
            assert lo <= prev[0] and hi <= prev[1]
        prev = (lo, hi)


def test_underflow_guard():
    with pytest.raises(PrecisionError):
        cylinders(FiniteIFS.linear([1e-40, 1e-40]), 9)


def test_distortion_of_linear_is_one():
    assert measured_distortion(FiniteIFS.linear([0.2, 0.5])) == pytest.approx(1.0)


@pytest.fixture(scope="module")
def ifs3(cover3):
    return FiniteIFS.from_fixed_point(cover3, (0, 1, 2, 3))


def test_fixed_point_ifs_maps_into_domain(ifs3):
    lo, hi = ifs3.domain
    ys = np.linspace(lo, hi, 50)[1:-1]
    for g, dg in zip(ifs3.maps, ifs3.derivs):
        x = g(ys)
        assert np.all((x > lo) & (x < hi))
        assert np.all(np.abs(dg(ys)) < 1)
    # images are disjoint
    spans = sorted((g(np.array([lo + 1e-12]))[0], g(np.array([hi - 1e-12]))[0]) for g in ifs3.maps)
    spans = [tuple(sorted(s)) for s in spans]
    spans.sort()
    assert all(a[1] < b[0] for a, b in zip(spans, spans[1:]))


def test_derivative_matches_difference(ifs3):
    lo, hi = ifs3.domain
    y = np.array([lo + 0.3 * (hi - lo), lo + 0.7 * (hi - lo)])
    h = 1e-4 * (hi - lo)
    for g, dg in zip(ifs3.maps, ifs3.derivs):
        fd = (g(y + h) - g(y - h)) / (2 * h)
        assert np.allclose(fd, dg(y), rtol=1e-5)


def test_distortion_bound_valid(ifs3):
    # the inflated depth-2 bound also covers depth-3 words
    assert measured_distortion(ifs3, depth=3) <= ifs3.distortion_bound


def test_subsystem_monotone(cover3):
    small = dimension_estimate(FiniteIFS.from_fixed_point(cover3, (0, 1)), depth=6)
    big = dimension_estimate(FiniteIFS.from_fixed_point(cover3, (0, 1, 2, 3)), depth=6)
    assert big.s_lo >= small.s_lo
    assert big.s_hi >= small.s_hi


def test_deeper_bracket_narrower(ifs3):
    a = dimension_estimate(ifs3, depth=4)
    b = dimension_estimate(ifs3, depth=6)
    assert b.width <= a.width + 1e-9
    assert 0 < b.s_lo <= b.s_hi < 1


def test_sweep_csv_rows(cover3):
    sw = dimension_sweep([cover3], depth=4)
    assert len(CSV_HEADER) == len(sw.csv_rows()[0])
    assert sw.nondecreasing() is None
    assert sw.rows[0].ell == 3
