import json

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import COVER_TAU, PAIR_TAU, SWEEP_ELLS
from fibrenorm.errors import ConvergenceError
from fibrenorm.fixedpoint import (
    ChebyshevSeries,
    CollocationProblem,
    FixedPointMap,
    central_difference_jacobian,
    fixed_points_of_G,
    junction_points,
    locate_X,
    monotone_window,
    multipliers_ok,
    newton_solve,
    oddroot,
    polish,
    pw,
    verify_identities,
)


@settings(max_examples=60, deadline=None)
@given(t=st.floats(-50, 50, allow_nan=False), ell=st.sampled_from([3, 5, 7, 21]))
def test_oddroot_inverts_power(t, ell):
    with mp.workdps(40):
        t = mp.mpf(t)
        assert abs(oddroot(pw(t, ell), ell) - t) <= mp.mpf(10) ** -30 * max(1, abs(t))
        assert mp.sign(oddroot(t, ell)) == mp.sign(t)


def test_chebyshev_fit_and_derivative():
    with mp.workdps(30):
        s = ChebyshevSeries.fit(mp.exp, -1, 2, 30)
        for x in (-1, 0, "0.7", 2):
            x = mp.mpf(x)
            assert abs(s(x) - mp.exp(x)) < mp.mpf(10) ** -25
            assert abs(s.derivative()(x) - mp.exp(x)) < mp.mpf(10) ** -22
        assert s.tail() < mp.mpf(10) ** -25
        assert all(s.contains(x) for x in ChebyshevSeries.nodes(-1, 2, 7))


def test_anchor_close_to_reference(cover3_coarse, pair3_coarse):
    assert cover3_coarse.converged and pair3_coarse.converged
    assert abs(cover3_coarse.tau - mp.mpf(COVER_TAU[3])) < 1e-15
    assert abs(pair3_coarse.tau - mp.mpf(PAIR_TAU[3])) < 1e-15


def test_basis_refinement_converges(cover3_coarse, cover3):
    mid = polish(cover3_coarse, 34, 40)
    with mp.workdps(60):
        d_coarse = abs(cover3_coarse.tau - cover3.tau)
        d_mid = abs(mid.tau - cover3.tau)
    assert d_mid < d_coarse
    assert d_mid < 1e-25


def test_polish_is_idempotent(cover3):
    again = polish(cover3, 48, 60)
    with mp.workdps(60):
        assert abs(again.tau - cover3.tau) < mp.mpf(10) ** -45
    assert again.iterations <= 2


@pytest.mark.parametrize("name", ["cover3", "pair3"])
def test_identities_at_60_digits(name, request):
    fp = request.getfixturevalue(name)
    rep = verify_identities(fp)
    assert rep.ok, rep.lines()
    assert rep.worst() < 1e-8
    assert rep.ordering


def test_tau_perturbation_is_detected(cover3):
    with mp.workdps(60):
        prob = CollocationProblem("cover", 3, cover3.domain, len(cover3.E),
                                  monotone_window=monotone_window("cover", cover3.domain, cover3.x_c, cover3.tau))
        base = prob.residual(cover3.E_coeffs + [cover3.tau]).norm
        moved = prob.residual(cover3.E_coeffs + [cover3.tau * (1 + mp.mpf("1e-6"))]).norm
    assert base < mp.mpf(10) ** -40
    assert moved > 1e-8


def test_exact_and_difference_jacobians_agree(cover3_coarse):
    fp = cover3_coarse
    with mp.workdps(30):
        prob = CollocationProblem("cover", 3, fp.domain, len(fp.E))
        u = fp.E_coeffs + [fp.tau]
        Je = prob.jacobian(u)
        Jc = central_difference_jacobian(prob.residual, u)
        scale = mp.norm(Je, 1)
        assert mp.norm(Je - Jc, 1) / scale < 1e-6


def test_pair_jacobian_with_commutators(pair3_coarse):
    fp = pair3_coarse
    with mp.workdps(30):
        prob = CollocationProblem("pair", 3, fp.domain, len(fp.E), junction_points(fp.x_c, fp.tau))
        u = fp.E_coeffs + [fp.tau]
        Je, Jc = prob.jacobian(u), central_difference_jacobian(prob.residual, u)
        assert Je.rows == len(fp.E) + 1 + 3
        assert mp.norm(Je - Jc, 1) / mp.norm(Je, 1) < 1e-6


def test_newton_rejects_far_seed(cover3_coarse):
    fp = cover3_coarse
    with mp.workdps(30):
        prob = CollocationProblem("cover", 3, fp.domain, len(fp.E))
        bad = [c * 3 for c in fp.E_coeffs] + [mp.mpf(-1.5)]
        with pytest.raises(ConvergenceError):
            newton_solve(prob, bad, max_iter=4, jacobian="exact")


def test_json_roundtrip(cover3):
    d = json.loads(cover3.dumps())
    back = FixedPointMap.from_dict(d)
    with mp.workdps(60):
        assert abs(back.tau - cover3.tau) < mp.mpf(10) ** -55
        for x in (cover3.x_c, mp.mpf("-0.3"), 1 / cover3.tau):
            assert abs(back.phi(x) - cover3.phi(x)) < mp.mpf(10) ** -55
    bad = dict(d, schema="other/9")
    with pytest.raises(ValueError):
        FixedPointMap.from_dict(bad)


def test_locate_X(cover3, pair3):
    for fp in (cover3, pair3):
        with mp.workdps(fp.precision):
            X = locate_X(fp)
            assert 1 / fp.tau < X < 0
            assert abs(fp.phi(X) - fp.tau * X) < mp.mpf(10) ** -40


def test_cover_associated_dynamics(cover3):
    with mp.workdps(60):
        pts = fixed_points_of_G(cover3)
        assert len(pts) == 3
        (a, ma), (b, mb), (c, mc) = pts
        low = cover3.tau * cover3.phi(cover3.x_c / cover3.tau ** 2)
        # the three fixed points are tau*phi(x_c/tau^2) < tau^2 X < x_c
        assert a < b < c
        assert abs(a - low) < mp.mpf(10) ** -40
        assert abs(c - cover3.x_c) < mp.mpf(10) ** -40
        assert abs(b - cover3.tau ** 2 * cover3.X) < mp.mpf(10) ** -40
        target = cover3.alpha ** -2
        assert abs(ma - target) < 1e-6 and abs(mc - target) < 1e-6
        assert mb > 1
    assert multipliers_ok(cover3)


def test_cover_sweep_matches_frozen(cover_sweep):
    found, failures = cover_sweep
    assert not failures
    for ell in SWEEP_ELLS:
        assert abs(found[ell].tau - mp.mpf(COVER_TAU[ell])) < 1e-15, ell


def test_pair_sweep_matches_frozen(pair_sweep):
    found, failures = pair_sweep
    assert not failures
    for ell in SWEEP_ELLS:
        assert abs(found[ell].tau - mp.mpf(PAIR_TAU[ell])) < 1e-15, ell


def test_scaling_constants_monotone_in_ell():
    cov = [mp.mpf(COVER_TAU[e]) for e in SWEEP_ELLS]
    par = [mp.mpf(PAIR_TAU[e]) for e in SWEEP_ELLS]
    # covers come down from below, homeomorphisms go up from above
    assert all(b > a for a, b in zip(cov, cov[1:]))
    assert all(b < a for a, b in zip(par, par[1:]))
    assert cov[-1] < par[-1]
