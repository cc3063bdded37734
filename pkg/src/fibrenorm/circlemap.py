"""Circle-map lifts with a single odd-order critical point.

Two one-parameter families are provided, both built from the integrand
``sin^(l-1)(pi (t - 1/2))`` whose antiderivative is an exact trigonometric
polynomial:

* degree 1 (critical circle homeomorphisms),
* degree 2 (critical circle covers).

The module also supplies the golden-mean combinatorics helpers: Fibonacci
return times (``q_0 = 1, q_1 = 2``), rotation numbers, closest returns, the
order-conjugacy predicate and the two parameter tuners.
"""
from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import mpmath as mp
import numpy as np

from . import kernels
from .errors import BracketError, CombinatoricsError
from .mpfr_engine import OrbitEngine
from .precision import DEFAULT_DPS, to_mpf, workdps

FLOAT_DPS = 15


# --------------------------------------------------------------------------
# golden mean and Fibonacci numbers


def golden_mean(dps: int | None = None) -> mp.mpf:
    """gamma = (sqrt(5) - 1)/2 at ``dps`` digits (ambient precision if None)."""
    with workdps(dps):
        return (mp.sqrt(5) - 1) / 2


def fibonacci(n: int) -> int:
    """Return time q_n with q_0 = 1, q_1 = 2."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    a, b = 1, 2
    for _ in range(n):
        a, b = b, a + b
    return a


def fibonacci_pairs(n_max: int) -> list[tuple[int, int]]:
    """(q_n, p_n) for n = 0..n_max, with p_n = q_{n-1} and p_0 = 1.

    p_n/q_n are the convergents of gamma: 1/1, 1/2, 2/3, 3/5, ...
    """
    out = []
    p, q = 1, 1
    for _ in range(n_max + 1):
        out.append((q, p))
        p, q = q, p + q
    return out


def continued_fraction_convergents(x, count: int) -> list[Fraction]:
    """First ``count`` convergents of a real number in (0, 1)."""
    x = to_mpf(x)
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    out: list[Fraction] = []
    frac = x
    for _ in range(count):
        a = int(mp.floor(frac))
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > 0:
            out.append(Fraction(h1, k1))
        rest = frac - a
        if rest == 0:
            break
        frac = 1 / rest
    return [c for c in out if c.denominator >= 1]


# --------------------------------------------------------------------------
# lifts


def family_amplitudes(exponent: int, degree: int) -> list[Fraction]:
    """Coefficients b_j with F(x) = omega + degree*x + sum_j b_j sin(2 pi j x)/pi.

    Expanding cos^{2k}(pi t) by the binomial theorem and integrating term by
    term gives b_j = degree*C(2k, k-j) / (j*C(2k, k)) with k = (l-1)/2.
    """
    k = (exponent - 1) // 2
    mid = math.comb(2 * k, k)
    return [Fraction(degree * math.comb(2 * k, k - j), j * mid) for j in range(1, k + 1)]


def _check_exponent(exponent: int) -> None:
    if not isinstance(exponent, (int, np.integer)) or exponent < 3 or exponent % 2 == 0:
        raise ValueError(f"critical exponent must be an odd integer >= 3, got {exponent!r}")


@dataclass(frozen=True)
class CircleMapLift:
    """Lift ``F(x) = omega + degree*x + sum_j a_j sin(2 pi j x)``.

    The derivative ``degree*cos(pi x)^(l-1)/m_l`` vanishes only at x = 1/2
    (mod 1), to order l - 1.
    """

    degree: int
    exponent: int
    omega: mp.mpf
    precision: int = DEFAULT_DPS
    critical_point: mp.mpf = field(default_factory=lambda: mp.mpf(1) / 2)

    def __post_init__(self):
        if self.degree not in (1, 2):
            raise ValueError("degree must be 1 or 2")
        _check_exponent(self.exponent)
        with workdps(self.precision):
            object.__setattr__(self, "omega", to_mpf(self.omega))
            object.__setattr__(self, "critical_point", to_mpf(self.critical_point))

    # -- coefficients
    @cached_property
    def _amps_mp(self) -> list[mp.mpf]:
        with workdps(self.precision + 5):
            return [mp.mpf(b.numerator) / b.denominator / mp.pi for b in family_amplitudes(self.exponent, self.degree)]

    @cached_property
    def amps_float(self) -> np.ndarray:
        return np.array([float(a) for a in self._amps_mp])

    @cached_property
    def _deriv_scale(self) -> mp.mpf:
        k = (self.exponent - 1) // 2
        with workdps(self.precision + 5):
            return self.degree * mp.mpf(4) ** k / math.comb(2 * k, k)

    @property
    def is_float(self) -> bool:
        return self.precision <= FLOAT_DPS

    # -- evaluation (ambient mpmath precision; callers set it)
    def __call__(self, x):
        th = 2 * x
        s1 = mp.sinpi(th)
        c1 = mp.cospi(th)
        total = self.omega + self.degree * x
        s_prev, s_cur = mp.mpf(0), s1
        for a in self._amps_mp:
            total += a * s_cur
            s_prev, s_cur = s_cur, 2 * c1 * s_cur - s_prev
        return total

    def eval_float(self, x: float) -> float:
        return kernels.lift_eval(float(self.omega), float(self.degree), self.amps_float, float(x))

    def derivative(self, x):
        return self._deriv_scale * mp.cospi(x) ** (self.exponent - 1)

    def derivative_float(self, x):
        k = (self.exponent - 1) // 2
        return float(self._deriv_scale) * np.cos(np.pi * np.asarray(x, dtype=float)) ** (2 * k)

    @cached_property
    def _engine(self) -> OrbitEngine:
        k = (self.exponent - 1) // 2
        return OrbitEngine(self.omega, self.degree, self._amps_mp, self._deriv_scale, k, self.precision)

    def iterate(self, x, n: int):
        """F^n(x) on the lift."""
        if self.is_float:
            return kernels.lift_iterate(float(self.omega), float(self.degree), self.amps_float, float(x), int(n))
        return self._engine.iterate(to_mpf(x), int(n))

    def iterate_with_derivative(self, x, n: int):
        """(F^n(x), (F^n)'(x), d F^n(x)/d omega) on the lift."""
        return self._engine.iterate_with_derivative(to_mpf(x), int(n))

    def orbit_mod1(self, x, n: int) -> list:
        """[F^k(x) mod 1 for k = 0..n]."""
        if self.is_float:
            return list(kernels.lift_orbit(float(self.omega), float(self.degree), self.amps_float, float(x), int(n), True))
        return self._engine.orbit(to_mpf(x), int(n), True)

    @property
    def critical_value(self):
        with workdps(self.precision):
            return self(self.critical_point)

    def with_omega(self, omega) -> "CircleMapLift":
        return CircleMapLift(self.degree, self.exponent, omega, self.precision, self.critical_point)

    def with_precision(self, precision: int) -> "CircleMapLift":
        return CircleMapLift(self.degree, self.exponent, self.omega, precision, self.critical_point)

    def to_dict(self) -> dict:
        with workdps(self.precision):
            return {
                "degree": self.degree,
                "exponent": self.exponent,
                "omega": mp.nstr(self.omega, self.precision, strip_zeros=False),
                "precision": self.precision,
            }

    @classmethod
    def from_dict(cls, d: dict) -> "CircleMapLift":
        prec = int(d.get("precision", DEFAULT_DPS))
        with workdps(prec):
            return cls(int(d["degree"]), int(d["exponent"]), mp.mpf(d["omega"]), prec)


@dataclass(frozen=True)
class RigidRotation:
    """Rigid rotation x -> x + theta with a marked point at 0.

    Used as the degenerate end-to-end oracle: it shares the lift interface of
    :class:`CircleMapLift` but has no critical point.
    """

    theta: mp.mpf
    precision: int = DEFAULT_DPS
    degree: int = 1
    exponent: int | None = None
    critical_point: mp.mpf = field(default_factory=lambda: mp.mpf(0))

    def __post_init__(self):
        with workdps(self.precision):
            object.__setattr__(self, "theta", to_mpf(self.theta))

    @property
    def is_float(self) -> bool:
        return self.precision <= FLOAT_DPS

    @property
    def omega(self):
        return self.theta

    def __call__(self, x):
        return x + self.theta

    def eval_float(self, x: float) -> float:
        return float(x) + float(self.theta)

    def derivative(self, x):
        return mp.mpf(1)

    def iterate(self, x, n: int):
        if self.is_float:
            return float(x) + n * float(self.theta)
        with workdps(self.precision):
            return to_mpf(x) + n * self.theta

    def iterate_with_derivative(self, x, n: int):
        with workdps(self.precision):
            return to_mpf(x) + n * self.theta, mp.mpf(1), mp.mpf(n)

    def orbit_mod1(self, x, n: int) -> list:
        with workdps(self.precision):
            x0 = to_mpf(x)
            pts = [(x0 + k * self.theta) % 1 for k in range(n + 1)]
        if self.is_float:
            return [float(p) for p in pts]
        return pts

    @property
    def critical_value(self):
        return self.critical_point

    def with_omega(self, omega) -> "RigidRotation":
        return RigidRotation(omega, self.precision)

    def with_precision(self, precision: int) -> "RigidRotation":
        return RigidRotation(self.theta, precision)


def make_homeo_family(ell: int, omega, precision: int = DEFAULT_DPS) -> CircleMapLift:
    """Degree-1 lift omega + (1/m_l) int_0^x sin^{l-1}(pi(t - 1/2)) dt."""
    _check_exponent(ell)
    return CircleMapLift(1, int(ell), omega, precision)


def make_cover_family(ell: int, omega, precision: int = DEFAULT_DPS) -> CircleMapLift:
    """Degree-2 lift omega + (2/m_l) int_0^x sin^{l-1}(pi(t - 1/2)) dt."""
    _check_exponent(ell)
    return CircleMapLift(2, int(ell), omega, precision)


def make_family(kind: str, ell: int, omega, precision: int = DEFAULT_DPS) -> CircleMapLift:
    if kind in ("homeo", "pair"):
        return make_homeo_family(ell, omega, precision)
    if kind == "cover":
        return make_cover_family(ell, omega, precision)
    raise ValueError(f"unknown family kind {kind!r}")


def vanishing_order(lift: CircleMapLift, h_min: float = 1e-4, h_max: float = 1e-2) -> float:
    """Log-log slope of F'(c + h) against h, i.e. the order of the zero of F'."""
    with workdps(max(lift.precision, 30)):
        c = lift.critical_point
        hs = [mp.mpf(h_min), mp.mpf(h_max)]
        vals = [abs(lift.derivative(c + h)) for h in hs]
        return float((mp.log(vals[1]) - mp.log(vals[0])) / (mp.log(hs[1]) - mp.log(hs[0])))


# --------------------------------------------------------------------------
# orbits and order


@dataclass(frozen=True)
class OrbitSegment:
    """points[k] = frac(F^{times[k]}(base_point))."""

    base_point: object
    length: int
    points: tuple
    times: tuple

    def __post_init__(self):
        if len(self.points) != len(self.times):
            raise ValueError("points and times must have equal length")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")


def critical_orbit(lift, length: int) -> OrbitSegment:
    """Forward orbit of the critical (marked) point, reduced mod 1."""
    pts = lift.orbit_mod1(lift.critical_point, length - 1)
    return OrbitSegment(lift.critical_point, length, tuple(pts), tuple(range(length)))


@dataclass(frozen=True)
class OrderCheck:
    passed: bool
    index: int | None = None
    pair: tuple[int, int] | None = None
    side: int = 0
    checked: int = 0

    def __bool__(self) -> bool:
        return self.passed


def _rotation_targets(times: Sequence[int], rotation, use_float: bool):
    if use_float:
        r = float(rotation)
        t = np.asarray(times, dtype=np.float64)
        return np.mod((t - t[0]) * r, 1.0)
    base = times[0]
    return [((k - base) * rotation) % 1 for k in times]


def order_conjugacy_check(orbit: OrbitSegment, n_points: int | None = None, rotation=None) -> OrderCheck:
    """Does the cyclic order of the orbit agree with that of {k*rotation}?

    Cyclic order is compared by cutting both circles at their base point, so
    the test is invariant under orientation-preserving changes of circle
    coordinate.  Points within 10 ulp of a neighbour count as violations.
    On failure the first offending time index and its neighbour are returned,
    together with the side (+1: placed too far counterclockwise).
    """
    n = len(orbit.points) if n_points is None else min(int(n_points), len(orbit.points))
    pts = orbit.points[:n]
    times = orbit.times[:n]
    use_float = isinstance(pts[0], (float, np.floating))
    if rotation is None:
        rotation = golden_mean()
    if use_float:
        arr = np.asarray(pts, dtype=np.float64)
        rel = np.mod(arr - arr[0], 1.0)
        tgt = _rotation_targets(times, rotation, True)
        tie = 10 * np.finfo(float).eps
        k, side, nb = kernels.order_violation(rel, tgt, tie)
    else:
        base = pts[0]
        rel = [(p - base) % 1 for p in pts]
        tgt = _rotation_targets(times, to_mpf(rotation), False)
        tie = 10 * mp.eps
        k, side, nb = _order_violation_mp(rel, tgt, tie)
    if k < 0:
        return OrderCheck(True, checked=n)
    return OrderCheck(False, index=int(k), pair=(int(k), int(nb)), side=int(side), checked=n)


def _order_violation_mp(xs_in, us_in, tie):
    xs = [xs_in[0]]
    us = [us_in[0]]
    for k in range(1, len(xs_in)):
        x, u = xs_in[k], us_in[k]
        rx = bisect_left(xs, x)
        ru = bisect_left(us, u)
        if rx != ru:
            return k, (1 if rx > ru else -1), (rx - 1 if rx > ru else rx)
        lo = xs[rx - 1] if rx > 0 else xs[-1] - 1
        hi = xs[rx] if rx < len(xs) else xs[0] + 1
        if x - lo <= tie or hi - x <= tie:
            return k, 0, rx
        xs.insert(rx, x)
        us.insert(ru, u)
    return -1, 0, -1


# --------------------------------------------------------------------------
# rotation number


@dataclass(frozen=True)
class RotationNumber:
    value: object
    lower: Fraction
    upper: Fraction
    exact: Fraction | None
    iterations: int
    converged: bool

    def __float__(self) -> float:
        return float(self.value)


def _displacement_sign(lift, x, p: int, q: int) -> int:
    if lift.is_float:
        d = lift.iterate(x, q) - float(x) - p
        tol = 1e-13 * max(1, q)
    else:
        with workdps(lift.precision):
            d = lift.iterate(x, q) - x - p
            tol = mp.mpf(10) ** (-lift.precision + 3) * max(1, q)
    if abs(d) <= tol:
        return 0
    return 1 if d > 0 else -1


def _has_periodic_orbit(lift, frac: Fraction, samples: int = 96) -> bool:
    """p/q is the rotation number iff F^q(x) - x - p changes sign."""
    p, q = frac.numerator, frac.denominator
    signs = set()
    with workdps(lift.precision):
        for i in range(samples):
            s = _displacement_sign(lift, mp.mpf(i) / samples, p, q)
            if s == 0:
                return True
            signs.add(s)
            if len(signs) == 2:
                return True
    return False


def rotation_number(lift, max_iter: int = 2_000_000, tol: float = 1e-10) -> RotationNumber:
    """Rotation number of a degree-1 lift by Farey (Stern-Brocot) descent.

    For a homeomorphism lift, ``F^q(c) - c - p > 0`` implies rho >= p/q and
    ``< 0`` implies rho <= p/q, so each mediant test halves the Farey
    interval; the descent follows the continued-fraction expansion.  A zero
    displacement means a periodic orbit and returns the rational exactly.
    """
    if lift.degree != 1:
        raise ValueError("rotation number needs a degree-1 lift")
    with workdps(lift.precision):
        c = lift.critical_point
        d0 = lift.iterate(c, 1) - c
        base = int(math.floor(float(d0)))
        lo, hi = Fraction(base), Fraction(base + 1)
        for cand in (lo, hi):
            if _displacement_sign(lift, c, cand.numerator, cand.denominator) == 0:
                return RotationNumber(cand, cand, cand, cand, 1, True)
        used = 0
        stuck_lo = stuck_hi = 0
        while hi - lo >= tol:
            med = Fraction(lo.numerator + hi.numerator, lo.denominator + hi.denominator)
            if used + med.denominator > max_iter:
                break
            s = _displacement_sign(lift, c, med.numerator, med.denominator)
            used += med.denominator
            if s == 0:
                return RotationNumber(med, med, med, med, used, True)
            if s > 0:
                lo = med
                stuck_hi += 1
                stuck_lo = 0
            else:
                hi = med
                stuck_lo += 1
                stuck_hi = 0
            # one endpoint kept for many steps: test for a mode-locking plateau
            for count, frac in ((stuck_hi, hi), (stuck_lo, lo)):
                if count == 12 and _has_periodic_orbit(lift, frac):
                    return RotationNumber(frac, frac, frac, frac, used, True)
        value = (mp.mpf(lo.numerator) / lo.denominator + mp.mpf(hi.numerator) / hi.denominator) / 2
        return RotationNumber(value, lo, hi, None, used, hi - lo < tol)


# --------------------------------------------------------------------------
# closest returns


@dataclass(frozen=True)
class ClosestReturn:
    n: int
    q: int
    point: object
    displacement: object


def _centered(d):
    return d - math.floor(float(d) + 0.5) if isinstance(d, float) else d - mp.nint(d)


def closest_returns(lift, n_max: int) -> list[ClosestReturn]:
    """Closest returns of the critical-value orbit at Fibonacci times.

    A time k is a closest return when |F^k(v) - v| (mod 1) is smaller than at
    every earlier time.  For golden-mean combinatorics these times are
    exactly q_0, q_1, ... and the displacements alternate in sign.
    """
    q_last = fibonacci(n_max)
    with workdps(lift.precision):
        v = lift.critical_value
        pts = lift.orbit_mod1(v, q_last)
        v0 = pts[0]
        best = None
        times = []
        out = []
        for k in range(1, q_last + 1):
            d = _centered(pts[k] - v0)
            if best is None or abs(d) < best:
                best = abs(d)
                times.append(k)
                out.append((k, pts[k], d))
    expected = [fibonacci(i) for i in range(n_max + 1)]
    if times != expected:
        bad = next((i for i, (a, b) in enumerate(zip(times, expected)) if a != b), min(len(times), len(expected)))
        raise CombinatoricsError(f"closest-return times {times[: bad + 2]} are not Fibonacci (first mismatch at n={bad})")
    for (k0, _, d0), (k1, _, d1) in zip(out, out[1:]):
        if (d0 > 0) == (d1 > 0):
            raise CombinatoricsError(f"closest returns at times {k0} and {k1} lie on the same side")
    return [ClosestReturn(i, k, p, d) for i, (k, p, d) in enumerate(out)]


# --------------------------------------------------------------------------
# tuning


def _convergent_data(target, count: int):
    convs = [c for c in continued_fraction_convergents(target, count + 2) if c.denominator >= 1]
    t = to_mpf(target)
    qs, ps, wants = [], [], []
    for c in convs:
        diff = c.denominator * t - c.numerator
        if diff == 0:
            break
        qs.append(c.denominator)
        ps.append(c.numerator)
        wants.append(1 if diff > 0 else -1)
    return qs[:count], ps[:count], wants[:count]


def _comparator(lift: CircleMapLift, qs, ps, wants) -> tuple[int, int]:
    """(level, sign of rho - target) from the first decisive convergent."""
    if lift.is_float:
        return kernels.rotation_comparator(
            float(lift.omega), lift.amps_float, float(lift.critical_point),
            np.asarray(qs, dtype=np.int64), np.asarray(ps, dtype=np.float64), np.asarray(wants, dtype=np.int64),
        )
    with workdps(lift.precision):
        c = lift.critical_point
        x = c
        t = 0
        for i, (q, p, w) in enumerate(zip(qs, ps, wants)):
            while t < q:
                x = lift(x)
                t += 1
            d = x - c - p
            if d == 0:
                return i, -w
            s = 1 if d > 0 else -1
            if s != w:
                return i, s
    return -1, 0


def _float_limit_depth(target, float_tol=1e-13) -> int:
    # deepest convergent whose displacement is still resolved in binary64
    qs, _, _ = _convergent_data(target, 60)
    n = 0
    for i, q in enumerate(qs):
        if q * 2.2e-16 * 50 < 1.0 / (q * 2.0):
            n = i
    return n


@dataclass(frozen=True)
class TuneResult:
    omega: mp.mpf
    lower: mp.mpf
    upper: mp.mpf
    depth: int
    precision: int
    approximants: tuple = ()


def tune_rotation(ell: int, target=None, tol: float = 1e-10, precision: int = DEFAULT_DPS,
                  omega_tol=None, max_level: int = 40, max_return_time: int = 50_000) -> TuneResult:
    """omega* with rotation number ``target`` for the degree-1 family.

    Binary64 bisection on the convergent comparator (certified by the sign of
    rho - target at the bracket ends) gives |rho - target| < tol.  At extended
    precision the bracket is then narrowed through the superstable
    approximants omega_n (F^{q_n}(c) = c + p_n), which alternate around
    omega* and are accelerated by Aitken extrapolation.  The refinement stops
    when the Aitken correction drops below ``omega_tol`` (default 1e-18) or
    the return time exceeds ``max_return_time``.

    A rational ``target`` (Fraction) returns a parameter inside the
    mode-locking plateau.
    """
    if target is None:
        target = golden_mean(precision + 10)
    if isinstance(target, Fraction):
        return _tune_rational(ell, target, precision)
    qs, ps, wants = _convergent_data(target, max_level)
    if not qs:
        raise ValueError("target must be irrational")
    fdepth = min(_float_limit_depth(target), len(qs) - 1)
    while fdepth > 3 and Fraction(1, qs[fdepth - 1] * qs[fdepth - 2]) < Fraction(str(tol)) / 100:
        fdepth -= 1
    fq, fp, fw = qs[: fdepth + 1], ps[: fdepth + 1], wants[: fdepth + 1]

    def side(w):
        return _comparator(make_homeo_family(ell, w, FLOAT_DPS), fq, fp, fw)[1]

    lo, hi = Fraction(0), Fraction(1)
    if not (side(0.0) < 0 < side(1.0)):
        raise BracketError("rho(0) and rho(1) do not straddle the target")
    while hi - lo > Fraction(1, 2**50):
        mid = (lo + hi) / 2
        s = side(float(mid))
        if s == 0:
            break
        if s > 0:
            hi = mid
        else:
            lo = mid
    with workdps(precision + 10):
        lo_m, hi_m = _frac_mpf(lo), _frac_mpf(hi)
        if precision <= FLOAT_DPS:
            w = (lo_m + hi_m) / 2
            return TuneResult(w, lo_m, hi_m, fdepth, precision)
        omega_tol = mp.mpf("1e-18") if omega_tol is None else to_mpf(omega_tol)
        omega_tol = max(omega_tol, mp.mpf(10) ** (-(precision - 5)))
        approx: list = []
        w = (lo_m + hi_m) / 2
        best = w
        n = start = 6
        for n in range(start, len(qs)):
            if qs[n] > max_return_time and len(approx) >= 3:
                break
            # omega_n lies between the two previous approximants
            if len(approx) >= 2:
                blo, bhi = sorted(approx[-2:])
            else:
                blo, bhi = mp.mpf(0), mp.mpf(1)
            wn = _superstable(make_homeo_family(ell, w, precision + 10), qs[n], ps[n], blo, bhi, w)
            approx.append(wn)
            if len(approx) < 3:
                w = wn
                continue
            a0, a1, a2 = approx[-3:]
            den = a2 - 2 * a1 + a0
            best = a2 - (a2 - a1) ** 2 / den if den != 0 else a2
            # seed the next approximant by geometric extrapolation of the step
            w = a2 + (a2 - a1) ** 2 / (a1 - a0) if a1 != a0 else a2
            if abs(best - a2) < omega_tol:
                break
        lower, upper = sorted(approx[-2:])
        if not (lower <= best <= upper):
            best = (lower + upper) / 2
    with workdps(precision):
        return TuneResult(+best, +lower, +upper, n, precision, tuple(+a for a in approx))


def _superstable(lift: CircleMapLift, q: int, p: int, lo, hi, guess) -> mp.mpf:
    """Safeguarded Newton on omega for F_omega^q(c) = c + p inside [lo, hi].

    The displacement is increasing in omega, so the bracket is kept and a
    bisection step replaces any Newton step that leaves it.
    """
    c = lift.critical_point
    eps = mp.mpf(10) ** (-lift.precision + 5)
    w = guess if lo < guess < hi else (lo + hi) / 2
    for _ in range(200):
        y, _, dw = lift.with_omega(w).iterate_with_derivative(c, q)
        r = y - c - p
        if r > 0:
            hi = w
        else:
            lo = w
        step = r / dw if dw != 0 else 0
        w_new = w - step
        if not (lo < w_new < hi) or dw == 0:
            w_new = (lo + hi) / 2
        if abs(w_new - w) < eps * max(1, abs(w)) or hi - lo < eps:
            return w_new
        w = w_new
    return w


def _tune_rational(ell: int, target: Fraction, precision: int) -> TuneResult:
    lo, hi = Fraction(0), Fraction(1)
    for _ in range(200):
        mid = (lo + hi) / 2
        lift = make_homeo_family(ell, mp.mpf(mid.numerator) / mid.denominator, precision)
        rho = rotation_number(lift, max_iter=200_000, tol=1e-12)
        if rho.exact == target:
            with workdps(precision):
                w = mp.mpf(mid.numerator) / mid.denominator
            return TuneResult(w, w, w, 0, precision)
        if Fraction(rho.lower) >= target or (rho.exact is not None and rho.exact > target):
            hi = mid
        else:
            lo = mid
    raise BracketError(f"no parameter with rotation number {target} found")


# ---- covers


def _cover_side(lift: CircleMapLift, length: int, rotation) -> tuple[int, int]:
    chk = order_conjugacy_check(critical_orbit(lift, length), rotation=rotation)
    if chk.passed:
        return -1, 0
    return chk.index, chk.side


def cover_check_length(precision: int, ell: int) -> int:
    """Orbit length used by the cover tuner at a given precision."""
    depth = 14 if precision <= FLOAT_DPS else 18 + max(0, (precision - 30) // 10)
    return fibonacci(depth)


def tune_fibonacci_cover(ell: int, depth: int = 12, tol=None, precision: int = DEFAULT_DPS,
                         rotation=None, grid: int = 400, attempts: int = 6,
                         bracket: tuple | None = None) -> TuneResult:
    """omega* whose critical orbit is order-conjugate to the golden rotation.

    Bisection is driven by the side of the first order violation: on one side
    of omega* the offending orbit point lands counterclockwise of its
    golden-ordered slot, on the other side clockwise.  A coarse binary64 scan
    locates candidate brackets (sign changes of the side with the deepest
    first violation); each is bisected and kept once the predicate passes
    through q_depth.
    """
    if rotation is None:
        rotation = golden_mean(precision + 10)
    need = fibonacci(depth) + 1
    if tol is None:
        tol = mp.mpf(10) ** (-(precision - 8)) if precision > FLOAT_DPS else 1e-14
    if bracket is None:
        candidates = _cover_candidates(ell, rotation, grid)
    else:
        candidates = [tuple(Fraction(str(b)) for b in bracket)]
    if not candidates:
        raise BracketError("no side change of the order predicate found")
    last_err = None
    for lo, hi in candidates[:attempts]:
        try:
            res = _bisect_cover(ell, lo, hi, rotation, tol, precision, need)
        except BracketError as err:
            last_err = err
            continue
        lift = make_cover_family(ell, res.omega, precision)
        if order_conjugacy_check(critical_orbit(lift, need), rotation=rotation).passed:
            return TuneResult(res.omega, res.lower, res.upper, depth, precision)
        last_err = BracketError(f"bracket [{float(lo)}, {float(hi)}] did not reach depth {depth}")
    if bracket is None:
        # the side predicate need not be monotone across a coarse cell; zoom on
        # the deepest first violation instead, then bisect the clean bracket
        for lo, hi in _zoom_candidates(ell, rotation, grid, attempts):
            try:
                res = _bisect_cover(ell, lo, hi, rotation, tol, precision, need)
            except BracketError as err:
                last_err = err
                continue
            lift = make_cover_family(ell, res.omega, precision)
            if order_conjugacy_check(critical_orbit(lift, need), rotation=rotation).passed:
                return TuneResult(res.omega, res.lower, res.upper, depth, precision)
    raise last_err or BracketError("cover tuning failed")


def _zoom_candidates(ell: int, rotation, grid: int, attempts: int, samples: int = 32, beam: int = 4):
    """Brackets with opposite sides around parameters passing at binary64 length.

    Beam search on the index of the first order violation: each round
    resamples small windows around the ``beam`` deepest points seen so far
    (several parameters share long combinatorial prefixes, so a single
    greedy zoom can settle on a decoy).  Once a run of passing samples
    appears its two failing neighbours form the bracket.
    """
    length = cover_check_length(FLOAT_DPS, ell)
    coarse = fibonacci(9)
    rows = [_cover_side(make_cover_family(ell, i / grid, FLOAT_DPS), coarse, rotation)[0] for i in range(grid)]
    order = sorted(range(grid), key=lambda i: -(rows[i] if rows[i] >= 0 else coarse))
    windows = [(Fraction(i - 1, grid), Fraction(i + 1, grid)) for i in order[:attempts]]
    found = 0
    for _ in range(30):
        pts = []
        for lo, hi in windows:
            ws = [lo + (hi - lo) * k / (samples - 1) for k in range(samples)]
            sides = [_cover_side(make_cover_family(ell, float(w), FLOAT_DPS), length, rotation) for w in ws]
            passing = [k for k, (idx, _) in enumerate(sides) if idx < 0]
            if passing:
                a, b = passing[0] - 1, passing[-1] + 1
                if a >= 0 and b < samples and sides[a][1] * sides[b][1] < 0:
                    found += 1
                    yield ws[a], ws[b]
                continue
            step = (hi - lo) / (samples - 1)
            pts += [(sides[k][0], ws[k], step) for k in range(samples)]
        if found or not pts:
            return
        pts.sort(key=lambda t: -t[0])
        windows = []
        for idx, w, step in pts:
            if all(abs(w - (a + b) / 2) > 4 * step for a, b in windows):
                windows.append((w - 2 * step, w + 2 * step))
            if len(windows) == beam:
                break
        if windows[0][1] - windows[0][0] < Fraction(1, 10**15):
            return


def _cover_candidates(ell: int, rotation, grid: int):
    length = fibonacci(9)
    rows = []
    for i in range(grid):
        lift = make_cover_family(ell, i / grid, FLOAT_DPS)
        rows.append(_cover_side(lift, length, rotation))
    cands = []
    for i in range(grid):
        (k0, s0), (k1, s1) = rows[i], rows[(i + 1) % grid]
        if s0 * s1 < 0 or k0 < 0 or k1 < 0:
            score = min(k0 if k0 >= 0 else length, k1 if k1 >= 0 else length)
            cands.append((score, Fraction(i, grid), Fraction(i + 1, grid)))
    cands.sort(key=lambda t: -t[0])
    return [(a, b) for _, a, b in cands]


def _bisect_cover(ell, lo: Fraction, hi: Fraction, rotation, tol, precision, need) -> TuneResult:
    """Side-driven bisection: binary64 first, then extended precision."""
    stages = [(FLOAT_DPS, Fraction(1, 10**13))]
    if precision > FLOAT_DPS:
        stages.append((precision, Fraction(str(mp.nstr(to_mpf(tol), 3)))))
    for dps, stol in stages:
        length = max(need, cover_check_length(dps, ell))

        def side(w: Fraction):
            with workdps(dps + 10):
                return _cover_side(make_cover_family(ell, _frac_mpf(w), dps), length, rotation)

        s_lo, s_hi = side(lo)[1], side(hi)[1]
        widen = 0
        while not (s_lo * s_hi < 0):
            # the previous stage's bracket was too tight for this precision
            widen += 1
            if widen > 12:
                raise BracketError("order predicate has no side change across the bracket")
            width = (hi - lo) * 4
            lo, hi = lo - width, hi + width
            s_lo, s_hi = side(lo)[1], side(hi)[1]
        while hi - lo > stol:
            mid = (lo + hi) / 2
            k, s = side(mid)
            if s == 0:
                # passes at full length (or an exact tie): resolution reached
                break
            if s == s_lo:
                lo = mid
            else:
                hi = mid
    with workdps(precision + 5):
        return TuneResult(_frac_mpf((lo + hi) / 2), _frac_mpf(lo), _frac_mpf(hi), 0, precision)


def _frac_mpf(f: Fraction) -> mp.mpf:
    return mp.mpf(f.numerator) / f.denominator
