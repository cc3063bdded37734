import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fibrenorm.circlemap import (
    CircleMapLift,
    OrbitSegment,
    RigidRotation,
    closest_returns,
    critical_orbit,
    fibonacci,
    golden_mean,
    make_cover_family,
    make_family,
    make_homeo_family,
    order_conjugacy_check,
    rotation_number,
    tune_fibonacci_cover,
    tune_rotation,
    vanishing_order,
)
from fibrenorm.errors import CombinatoricsError

odd_ell = st.sampled_from([3, 5, 7, 9, 11, 21])


def test_golden_mean():
    g = golden_mean(40)
    with mp.workdps(40):
        assert abs(g * g + g - 1) < 10 * mp.eps
        assert abs(1 / (1 + g) - g) < 1e-15
    assert abs(float(g) - 0.6180339887498949) < 1e-16
    assert abs(fibonacci(39) / fibonacci(40) - float(g)) < 1e-12


def test_fibonacci_convention():
    assert [fibonacci(n) for n in range(7)] == [1, 2, 3, 5, 8, 13, 21]


def test_homeo_closed_form_l3():
    for w in (0.0, 0.25, 0.61):
        F = make_homeo_family(3, w, 30)
        for x in (0.1, 0.37, 0.5, 0.93):
            with mp.workdps(30):
                X = mp.mpf(x)
                exact = w + X + mp.sin(2 * mp.pi * X) / (2 * mp.pi)
                assert abs(F(X) - exact) < mp.mpf(10) ** -25
    with mp.workdps(30):
        assert abs(make_homeo_family(3, 0.25, 30)(mp.mpf("0.5")) - mp.mpf("0.75")) < 1e-25


def test_cover_closed_form_l3():
    F = make_cover_family(3, "0.3", 30)
    with mp.workdps(30):
        for x in ("0.1", "0.8"):
            x = mp.mpf(x)
            exact = mp.mpf("0.3") + 2 * x + mp.sin(2 * mp.pi * x) / mp.pi
            assert abs(F(x) - exact) < mp.mpf(10) ** -25
        assert make_cover_family(3, 0, 30)(mp.mpf(0)) == 0
        F7 = make_cover_family(7, "0.2", 30)
        assert abs(F7(mp.mpf("1.3")) - F7(mp.mpf("0.3")) - 2) < mp.mpf(10) ** -25


def test_vanishing_order_l5():
    assert abs(vanishing_order(make_homeo_family(5, 0.1, 30)) - 4) < 0.05


@pytest.mark.parametrize("bad", [2, 4, 1, -3])
def test_rejects_bad_exponent(bad):
    with pytest.raises(ValueError):
        make_homeo_family(bad, 0.1)
    with pytest.raises(ValueError):
        make_cover_family(bad, 0.1)


@settings(max_examples=25, deadline=None)
@given(ell=odd_ell, kind=st.sampled_from(["homeo", "cover"]), w=st.floats(0, 1),
       x=st.floats(-3, 3, allow_nan=False))
def test_lift_degree_and_monotonicity(ell, kind, w, x):
    F = make_family(kind, ell, w, 30)
    with mp.workdps(30):
        x = mp.mpf(x)
        assert abs(F(x + 1) - F(x) - F.degree) < mp.mpf(10) ** -25
        assert F.derivative(x) >= 0


def test_derivative_vanishes_only_at_half():
    F = make_homeo_family(5, 0.2, 16)
    grid = np.linspace(0, 1, 100_001)
    d = np.array([F.derivative_float(x) for x in grid[::50]])
    assert np.all(d >= 0)
    zeros = grid[::50][d < 1e-12]
    assert np.all(np.abs(zeros - 0.5) < 2e-2)
    # cos(pi/2) is not exactly zero in binary64; its fourth power is
    assert F.derivative_float(0.5) < 1e-60


def test_rotation_number_cases():
    r = rotation_number(RigidRotation(golden_mean(30), 30), max_iter=10_000_000, tol=1e-12)
    assert abs(float(r.value) - float(golden_mean())) < 1e-12
    assert rotation_number(make_homeo_family(3, 0.0, 30)).exact == 0
    for p, q in ((1, 3), (2, 5), (3, 7)):
        with mp.workdps(30):
            theta = mp.mpf(p) / q
        rr = rotation_number(RigidRotation(theta, 30))
        assert rr.exact == Fraction(p, q)
        assert rr.iterations <= 10 * q * q


def test_rotation_number_rejects_cover():
    with pytest.raises(ValueError):
        rotation_number(make_cover_family(3, 0.1))


def test_closest_returns_rigid_rotation():
    g = golden_mean(40)
    rets = closest_returns(RigidRotation(g, 40), 14)
    assert [r.q for r in rets] == [fibonacci(n) for n in range(15)]
    # |x_{q_n}| ~ gamma^(n+1) * const
    ratios = [float(abs(a.displacement) / abs(b.displacement)) for a, b in zip(rets, rets[1:])]
    assert all(abs(r - 1 / float(g)) < 1e-6 for r in ratios[3:])


def test_closest_returns_flag_non_golden():
    with pytest.raises(CombinatoricsError):
        closest_returns(RigidRotation(mp.mpf(2) / 5, 30), 6)


def test_order_check_rigid_and_reparameterized():
    g = golden_mean(30)
    orbit = critical_orbit(RigidRotation(g, 16), 400)
    assert order_conjugacy_check(orbit).passed
    # conjugate by an increasing circle diffeomorphism
    h = lambda x: (x + 0.1 * math.sin(2 * math.pi * x) / (2 * math.pi) + 0.3) % 1.0
    moved = OrbitSegment(h(orbit.base_point), orbit.length, tuple(h(p) for p in orbit.points), orbit.times)
    assert order_conjugacy_check(moved).passed


def test_order_check_fails_for_untuned_cover():
    chk = order_conjugacy_check(critical_orbit(make_cover_family(3, 0.0, 16), 200))
    assert not chk.passed and chk.index is not None and chk.index < 200


@pytest.fixture(scope="module")
def tuned_homeo3():
    return tune_rotation(3, precision=30, max_return_time=20000)


def test_tune_rotation_golden(tuned_homeo3):
    lift = make_homeo_family(3, tuned_homeo3.omega, 30)
    r = rotation_number(lift, tol=1e-11)
    assert abs(float(r.value) - float(golden_mean())) < 1e-10
    assert [c.q for c in closest_returns(lift, 15)] == [fibonacci(n) for n in range(16)]


def test_tune_rotation_rational_plateau():
    res = tune_rotation(3, target=Fraction(1, 2), precision=30)
    assert rotation_number(make_homeo_family(3, res.omega, 30)).exact == Fraction(1, 2)


def test_tune_rotation_depends_on_exponent(tuned_homeo3):
    r9 = tune_rotation(9, precision=16)
    assert abs(float(r9.omega) - float(tuned_homeo3.omega)) > 1e-3
    lift = make_homeo_family(9, r9.omega, 16)
    assert [c.q for c in closest_returns(lift, 12)] == [fibonacci(n) for n in range(13)]


def test_tune_cover_l3_nested():
    deep = tune_fibonacci_cover(3, depth=12, precision=16)
    lift = make_cover_family(3, deep.omega, 16)
    assert order_conjugacy_check(critical_orbit(lift, fibonacci(12) + 1)).passed
    shallow = tune_fibonacci_cover(3, depth=4, precision=16)
    assert order_conjugacy_check(critical_orbit(make_cover_family(3, shallow.omega, 16), fibonacci(4) + 1)).passed


def test_lift_json_roundtrip():
    F = make_cover_family(5, "0.1389079365303570", 30)
    G = CircleMapLift.from_dict(F.to_dict())
    assert G == F
