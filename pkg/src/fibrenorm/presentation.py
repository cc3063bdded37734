"""Presentation function, first-return system and the orbit/preimage correspondence.

For a cover fixed point with critical point x_l and X (phi(X) = tau*X):

    Pi(x) = tau*x            on (tau^2 X, tau X]
    Pi(x) = tau*phi(x/tau)   on (tau X, tau^3 X)

and the circle map H is phi on (tau^2 X, tau X] and phi_{-1} = tau*phi(./tau)
beyond.  The first return of Pi to (x_l, X) has branches psi_n = tau^(2n+1) phi
on intervals K^n with psi_n(K^n) = (x_l, X).

Exact objects (Pi, K^n endpoints) are evaluated at the fixed point's working
precision; orbits and preimage trees use the binary64 kernels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from . import kernels
from .errors import DomainError, PrecisionError
from .fixedpoint import FixedPointMap, oddroot, pw
from .precision import to_mpf, workdps


class FloatPhi:
    """binary64 view of E and phi = E^l on the fitted domain."""

    def __init__(self, fp: FixedPointMap):
        self.fp = fp
        self.ell = float(fp.exponent)
        self.tau = float(fp.tau)
        self.a = float(fp.E.a)
        self.b = float(fp.E.b)
        self.coeffs = np.array([float(c) for c in fp.E.coeffs])
        dcoef = fp.E.derivative().coeffs
        self.dcoeffs = np.array([float(c) for c in dcoef])
        self.x_c = float(fp.x_c)
        self.X = float(fp.X)

    def E(self, x):
        return kernels.cheb_eval(self.coeffs, self.a, self.b, x)

    def dE(self, x):
        return kernels.cheb_eval(self.dcoeffs, self.a, self.b, x)

    def phi(self, x):
        e = self.E(x)
        return np.sign(e) * np.abs(e) ** self.ell

    def dphi(self, x):
        e = self.E(x)
        return self.ell * np.abs(e) ** (self.ell - 1) * self.dE(x)

    def phi_inv(self, t, lo=None, hi=None):
        """Inverse of phi on the increasing piece [lo, hi] (default [x_c, b])."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        target = np.sign(t) * np.abs(t) ** (1.0 / self.ell)
        lo = self.a if lo is None else lo
        hi = self.b if hi is None else hi
        return kernels.cheb_invert(self.coeffs, self.a, self.b, target, lo, hi)


# --------------------------------------------------------------------------
# presentation function and H


def presentation_eval(fp: FixedPointMap, x):
    """Pi(x) on (tau^2 X, tau^3 X)."""
    with workdps(fp.precision):
        x = to_mpf(x)
        tau, X = fp.tau, fp.X
        lo, hi = tau ** 2 * X, tau ** 3 * X
        if not (lo < x < hi):
            raise DomainError(f"{mp.nstr(x, 10)} outside the presentation domain")
        if x <= tau * X:
            return tau * x
        return tau * fp.phi(x / tau)


def h_eval(fp: FixedPointMap, x):
    """The circle map H: phi on (tau^2 X, tau X], tau*phi(x/tau) beyond."""
    with workdps(fp.precision):
        x = to_mpf(x)
        if x <= fp.tau * fp.X:
            return fp.phi(x)
        return fp.tau * fp.phi(x / fp.tau)


def h_orbit(fp: FixedPointMap, n: int, x0=0.0, view: FloatPhi | None = None) -> np.ndarray:
    """H^j(x0), j = 0..n, in binary64.

    Orbit points of 0 stay in [x_c, tau*x_c] where both pieces of H only
    evaluate phi inside the fitted domain.
    """
    v = view or FloatPhi(fp)
    out = np.empty(n + 1)
    x = float(x0)
    brk = v.tau * v.X
    for j in range(n + 1):
        out[j] = x
        if x <= brk:
            x = float(v.phi(x)[0])
        else:
            x = v.tau * float(v.phi(x / v.tau)[0])
    return out


def golden_order_check(fp: FixedPointMap, n: int = 100):
    """Cyclic order of H^j(0), j <= n, against j*rho on the circle [x_c, tau*x_c).

    Returns {rotation label: OrderCheck}; one of the two golden rotations
    (the two orientations) is expected to pass.
    """
    from .circlemap import OrbitSegment, order_conjugacy_check

    with workdps(fp.precision):
        orbit = h_orbit_mp(fp, n)
        x_c, right = fp.x_c, fp.tau * fp.x_c
        u = tuple(float((x - x_c) / (right - x_c)) for x in orbit)
    seg = OrbitSegment(u[0], n + 1, u, tuple(range(n + 1)))
    out = {}
    for name, rho in (("1/gamma", (math.sqrt(5) - 1) / 2), ("1-1/gamma", (3 - math.sqrt(5)) / 2)):
        out[name] = order_conjugacy_check(seg, rotation=rho)
    return out


# --------------------------------------------------------------------------
# first-return system


@dataclass(frozen=True)
class ReturnBranch:
    n: int
    K: tuple
    scale: object

    @property
    def length(self):
        return abs(self.K[1] - self.K[0])


@dataclass
class PresentationSystem:
    fp: FixedPointMap
    fundamental_domain: tuple
    branch_count: int
    branches: list
    checks: dict = field(default_factory=dict)

    def psi(self, n: int, x):
        with workdps(self.fp.precision):
            return self.branches[n].scale * self.fp.phi(to_mpf(x))

    def dpsi(self, n: int, x):
        with workdps(self.fp.precision):
            return self.branches[n].scale * self.fp.dphi(to_mpf(x))

    def locate(self, x, tol=mp.mpf("1e-10")):
        """(index n with x in K^n or None, flagged-if-within-tol-of-an-endpoint)."""
        for br in self.branches:
            lo, hi = br.K
            if lo - tol <= x <= hi + tol:
                near = min(abs(x - lo), abs(x - hi)) <= tol
                if lo < x < hi:
                    return br.n, near
                if near:
                    return br.n, True
        return None, False


def _phi_inverse_mp(fp: FixedPointMap, t, lo, hi):
    """phi^{-1}(t) on [lo, hi] where phi increases; bisection then Newton."""
    f = lambda x: fp.phi(x) - t
    flo, fhi = f(lo), f(hi)
    if flo > 0 or fhi < 0:
        raise PrecisionError("value outside the branch range")
    # work in the l-th root, where the root is simple even next to x_c
    g = lambda x: fp.E(x) - oddroot(t, fp.exponent)
    a, b = lo, hi
    for _ in range(mp.mp.prec // 4):
        m = (a + b) / 2
        if g(m) < 0:
            a = m
        else:
            b = m
    x = (a + b) / 2
    dE = fp.E.derivative()
    for _ in range(20):
        step = g(x) / dE(x)
        x -= step
        if abs(step) <= mp.mpf(10) ** (-(mp.mp.dps - 3)) * max(abs(x), mp.mpf("1e-30")):
            break
    return x


def build_return_system(fp: FixedPointMap, N: int = 12) -> PresentationSystem:
    """K^n = psi_n^{-1}((x_c, X)) for n = 0..N with the structural checks."""
    if fp.X is None:
        raise DomainError("X not located for this fixed point")
    with workdps(fp.precision):
        x_c, X, tau = fp.x_c, fp.X, fp.tau
        branches = []
        for n in range(N + 1):
            scale = tau ** (2 * n + 1)
            # psi_n decreases: the left end goes to X, the right end to x_c
            left = _phi_inverse_mp(fp, X / scale, x_c, X)
            right = _phi_inverse_mp(fp, x_c / scale, x_c, X)
            branches.append(ReturnBranch(n, (left, right), scale))
        sys_ = PresentationSystem(fp, (x_c, X), N, branches)
        ks = sorted((br.K for br in branches), key=lambda k: k[0])
        disjoint = all(k1[1] <= k2[0] for k1, k2 in zip(ks, ks[1:]))
        inside = all(x_c < br.K[0] < br.K[1] < X for br in branches)
        endpoint_err = max(max(abs(sys_.psi(br.n, br.K[0]) - X), abs(sys_.psi(br.n, br.K[1]) - x_c)) for br in branches)
        min_expansion = min(min(abs(sys_.dpsi(br.n, x)) for x in (br.K[0], (br.K[0] + br.K[1]) / 2, br.K[1]))
                            for br in branches)
        covered = sum(br.length for br in branches) / (X - x_c)
        sys_.checks = {
            "disjoint": disjoint,
            "inside": inside,
            "endpoint_error": endpoint_err,
            "min_expansion": min_expansion,
            "covered_fraction": covered,
        }
        return sys_


def nonescaping_membership(system: PresentationSystem, x, n_steps: int, tol=mp.mpf("1e-10")):
    """(stays, flagged): whether x survives n_steps returns inside the retained branches."""
    with workdps(system.fp.precision):
        x = to_mpf(x)
        lo, hi = system.fundamental_domain
        if not (lo < x < hi):
            raise DomainError("point outside the fundamental domain")
        flagged = False
        for _ in range(n_steps):
            n, near = system.locate(x, tol)
            flagged = flagged or near
            if n is None:
                return False, flagged
            x = system.psi(n, x)
            if not (lo < x < hi):
                return False, flagged
        return True, flagged


# --------------------------------------------------------------------------
# preimage tree


def zeckendorf_shift(j: int) -> int:
    """Replace every Fibonacci term F_k (1, 2, 3, 5, ...) of the greedy expansion of j by F_{k+1}."""
    fibs = [1, 2]
    while fibs[-1] <= j:
        fibs.append(fibs[-1] + fibs[-2])
    out, rest = 0, j
    for k in range(len(fibs) - 1, -1, -1):
        if fibs[k] <= rest:
            rest -= fibs[k]
            out += fibs[k + 1] if k + 1 < len(fibs) else fibs[k] + fibs[k - 1]
    return out


@dataclass
class PreimageTree:
    depth: int
    values: np.ndarray
    depths: np.ndarray
    parents: np.ndarray
    branch: np.ndarray
    labels: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return np.sort(self.values)

    def max_gap(self, upto: int, window: tuple) -> float:
        pts = np.sort(np.concatenate([self.values[self.depths <= upto], list(window)]))
        return float(kernels.insertion_gaps(pts))


def preimage_tree(fp: FixedPointMap, depth: int, root: float = 1.0, view: FloatPhi | None = None) -> PreimageTree:
    """All Pi-preimages of ``root`` up to ``depth`` inside [x_c, tau*x_c].

    Two inverse branches: the linear one y -> y/tau (kept when y/tau <= tau*X)
    and the nonlinear one y -> tau*phi^{-1}(y/tau) taken on the increasing
    piece [x_c, X] of phi (available when x_c <= y <= 0).  Labels carry the
    orbit index: a node equal to H^j(0) has label j, the nonlinear preimage of
    H^j(0) is H^{j-1}(0) and the linear one H^{zeckendorf_shift(j)}(0).
    A node whose label is already present is dropped with its subtree.
    """
    v = view or FloatPhi(fp)
    tau, X, x_c = v.tau, v.X, v.x_c
    right = tau * x_c
    brk = tau * X
    vals, deps, pars, brs, labs = [root], [0], [-1], [-1], [1]
    seen = {1}
    frontier = np.array([0])
    for d in range(1, depth + 1):
        fv = np.asarray(vals)[frontier]
        fl = np.asarray(labs)[frontier]
        # linear branch
        lin = fv / tau
        ok_lin = (lin <= brk) & (lin >= x_c) & (lin <= right)
        # nonlinear branch
        ok_nl = (fv >= x_c) & (fv <= 0)
        nl = np.full_like(fv, np.nan)
        if ok_nl.any():
            z = v.phi_inv(fv[ok_nl] / tau, x_c, X)
            nl[ok_nl] = tau * z
            ok_nl &= (nl > brk) & (nl <= right)
        new = []
        cands = [(i, float(lin[i]), 0, zeckendorf_shift(int(fl[i]))) for i in np.nonzero(ok_lin)[0]]
        cands += [(i, float(nl[i]), 1, int(fl[i]) - 1) for i in np.nonzero(ok_nl)[0]]
        for i, val, br, lab in cands:
            if lab in seen:
                # the period-two cycle 1 <-> 1/tau re-enters known nodes
                continue
            seen.add(lab)
            new.append(len(vals))
            vals.append(val); deps.append(d); pars.append(int(frontier[i])); brs.append(br); labs.append(lab)
        frontier = np.array(new, dtype=int)
        if frontier.size == 0:
            break
    return PreimageTree(depth, np.array(vals), np.array(deps), np.array(pars), np.array(brs), np.array(labs))


def tree_audit(fp: FixedPointMap, tree: PreimageTree, sample: int = 400) -> float:
    """max |Pi(node) - parent| over a sample of nodes, with the exact Pi.

    One step at a time: Pi expands, so iterating it to the root would only
    measure the amplification of binary64 rounding.
    """
    idx = np.linspace(1, len(tree.values) - 1, min(sample, len(tree.values) - 1)).astype(int)
    worst = mp.mpf(0)
    with workdps(fp.precision):
        for i in idx:
            x = presentation_eval(fp, float(tree.values[i]))
            worst = max(worst, abs(x - tree.values[tree.parents[i]]))
    return float(worst)


@dataclass
class CorrespondenceReport:
    j_max: int
    depth: int
    tree_size: int
    missing_orbit: list
    mismatched: list
    duplicate_labels: int
    max_error: float
    audit_error: float
    orbit_in_range: bool
    bijective: bool


def h_orbit_mp(fp: FixedPointMap, n: int) -> list:
    """H^j(0), j = 0..n, at the fixed point's precision."""
    with workdps(fp.precision):
        out = [mp.mpf(0)]
        for _ in range(n):
            out.append(h_eval(fp, out[-1]))
        return out


def orbit_preimage_correspondence(fp: FixedPointMap, j_max: int = 50, depth: int = 25,
                                  tol: float = 1e-8) -> CorrespondenceReport:
    """Label-matched comparison of H^j(0), 1 <= j <= j_max, with the preimage tree of 1.

    H expands along the post-critical set, so its forward orbit is only
    trustworthy for moderate j; the remaining nodes are checked one step at a
    time, each against its parent under the exact Pi.  The correspondence
    is bijective when every j <= j_max occurs as a label exactly once and
    the labelled node sits within tol of H^j(0).
    """
    tree = preimage_tree(fp, depth)
    labels = tree.labels.tolist()
    orbit = h_orbit_mp(fp, j_max)
    pos = {lab: k for k, lab in enumerate(labels)}
    missing = [j for j in range(1, j_max + 1) if j not in pos]
    errs = {j: abs(float(orbit[j]) - tree.values[pos[j]]) for j in range(1, j_max + 1) if j in pos}
    mismatched = [j for j, e in errs.items() if e > tol]
    dup = len(labels) - len(set(labels))
    x_c, right = fp.x_c, fp.tau * fp.x_c
    in_range = all(x_c - tol <= orbit[j] <= right + tol for j in range(1, j_max + 1))
    audit = tree_audit(fp, tree)
    ok = not missing and not mismatched and dup == 0 and audit < tol
    return CorrespondenceReport(j_max, depth, len(labels), missing, mismatched, dup,
                                max(errs.values()) if errs else float("nan"), audit, bool(in_range), ok)


def max_gap_profile(fp: FixedPointMap, depths=range(5, 16)) -> list:
    """Largest gap of the preimage set inside [x_c, tau*x_c] at each depth."""
    tree = preimage_tree(fp, max(depths))
    window = (float(fp.x_c), float(fp.tau * fp.x_c))
    return [(d, tree.max_gap(d, window)) for d in depths]
