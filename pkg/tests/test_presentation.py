import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fibrenorm.errors import DomainError
from fibrenorm.presentation import (
    FloatPhi,
    build_return_system,
    golden_order_check,
    h_eval,
    h_orbit,
    h_orbit_mp,
    max_gap_profile,
    nonescaping_membership,
    orbit_preimage_correspondence,
    preimage_tree,
    presentation_eval,
    tree_audit,
    zeckendorf_shift,
)


def _zeckendorf(j):
    fibs = [1, 2]
    while fibs[-1] <= j:
        fibs.append(fibs[-1] + fibs[-2])
    out = []
    for f in reversed(fibs):
        if f <= j:
            out.append(f)
            j -= f
    return out


def test_zeckendorf_shift_small():
    assert [zeckendorf_shift(j) for j in range(1, 9)] == [2, 3, 5, 7, 8, 10, 11, 13]


@settings(max_examples=200, deadline=None)
@given(j=st.integers(1, 10**6))
def test_zeckendorf_shift_ratio(j):
    # shifting every term multiplies by about the golden ratio
    terms = _zeckendorf(j)
    shifted = zeckendorf_shift(j)
    assert shifted > j
    assert abs(shifted - j * (1 + 5 ** 0.5) / 2) < len(terms) + 1


def test_float_view_matches_exact(cover3):
    v = FloatPhi(cover3)
    xs = np.linspace(float(cover3.x_c), float(cover3.X), 9)
    with mp.workdps(60):
        for x in xs:
            assert abs(v.phi(x)[0] - float(cover3.phi(x))) < 1e-13
    back = v.phi_inv(v.phi(xs[1:-1]), v.x_c, v.X)
    assert np.allclose(back, xs[1:-1], atol=1e-12)


def test_presentation_pieces(cover3):
    with mp.workdps(60):
        tau, X = cover3.tau, cover3.X
        x = tau ** 2 * X * mp.mpf("0.9") + tau * X * mp.mpf("0.1")
        assert presentation_eval(cover3, x) == tau * x
        y = tau * X * mp.mpf("1.01")
        assert abs(presentation_eval(cover3, y) - tau * cover3.phi(y / tau)) < mp.mpf(10) ** -50
        with pytest.raises(DomainError):
            presentation_eval(cover3, tau ** 3 * X * 2)
        assert abs(h_eval(cover3, 0) - 1) < mp.mpf(10) ** -50


def test_float_and_mp_orbits_agree_early(cover3):
    f = h_orbit(cover3, 40)
    m = h_orbit_mp(cover3, 40)
    # H expands along the orbit, so binary64 rounding grows with j
    err = np.abs(f - np.array([float(x) for x in m]))
    assert err[:10].max() < 1e-12
    assert err.max() < 1e-8


def test_return_system_structure(cover3):
    sys_ = build_return_system(cover3, 12)
    assert sys_.checks["disjoint"] and sys_.checks["inside"]
    assert sys_.checks["endpoint_error"] < 1e-40
    assert sys_.checks["min_expansion"] > 1
    assert 0 < sys_.checks["covered_fraction"] < 1
    # K^n shrink toward x_c
    lens = [br.length for br in sys_.branches]
    assert all(b < a for a, b in zip(lens, lens[1:]))


def test_nonescaping_membership(cover3):
    sys_ = build_return_system(cover3, 8)
    with mp.workdps(60):
        # the fixed point of psi_0 never leaves K^0
        lo, hi = sys_.branches[0].K
        f = lambda x: sys_.psi(0, x) - x
        p = mp.findroot(f, (lo, hi), solver="anderson")
        stays, _ = nonescaping_membership(sys_, p, 20)
        assert stays
        gap_pt = (sys_.branches[0].K[1] + cover3.X) / 2 if sys_.branches[0].K[1] < cover3.X else None
        if gap_pt is not None and all(not (br.K[0] < gap_pt < br.K[1]) for br in sys_.branches):
            assert nonescaping_membership(sys_, gap_pt, 3)[0] is False
        with pytest.raises(DomainError):
            nonescaping_membership(sys_, cover3.X + 1, 2)


def test_preimage_tree_labels_unique(cover3):
    tree = preimage_tree(cover3, 18)
    assert len(set(tree.labels.tolist())) == len(tree.labels)
    assert tree.values[0] == 1.0
    assert tree_audit(cover3, tree) < 1e-10


def test_orbit_preimage_correspondence(cover3):
    rep = orbit_preimage_correspondence(cover3, j_max=50, depth=25)
    assert rep.bijective
    assert rep.orbit_in_range
    assert rep.max_error < 1e-8


def test_max_gap_nonincreasing(cover3):
    prof = max_gap_profile(cover3, range(5, 16))
    gaps = [g for _, g in prof]
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < gaps[0]


def test_orbit_follows_golden_rotation(cover3):
    checks = golden_order_check(cover3, 100)
    assert any(c.passed for c in checks.values())
