"""Pure-Python reference implementations of the binary64 hot loops.

The compiled module ``_ckernels`` exposes exactly the same functions; the
dispatcher in :mod:`fibrenorm.kernels` picks one at import time.
"""
from __future__ import annotations

import math
from bisect import bisect_left

import numpy as np

TWO_PI = 2.0 * math.pi


def lift_eval(omega, degree, amps, x):
    """One step of ``omega + degree*x + sum_j amps[j-1]*sin(2*pi*j*x)``."""
    th = TWO_PI * x
    s1 = math.sin(th)
    c1 = math.cos(th)
    total = omega + degree * x
    s_prev, s_cur = 0.0, s1
    for a in amps:
        total += a * s_cur
        s_prev, s_cur = s_cur, 2.0 * c1 * s_cur - s_prev
    return total


def lift_iterate(omega, degree, amps, x0, n, reduce=False):
    x = float(x0)
    for _ in range(int(n)):
        x = lift_eval(omega, degree, amps, x)
        if reduce:
            x -= math.floor(x)
    return x


def lift_orbit(omega, degree, amps, x0, n, reduce=False):
    out = np.empty(int(n) + 1)
    x = float(x0)
    out[0] = x
    for k in range(1, int(n) + 1):
        x = lift_eval(omega, degree, amps, x)
        if reduce:
            x -= math.floor(x)
        out[k] = x
    return out


def rotation_comparator(omega, amps, c, qs, ps, wants):
    """Sign of rho - target decided along the convergents (q_i, p_i).

    ``wants[i]`` is the sign of ``q_i*target - p_i``.  Returns
    ``(index, sign)``: at the first convergent where the displacement
    ``F^q(c) - c - p`` disagrees in sign with ``wants`` the rotation number
    is known to lie on the displacement's side.  ``(-1, 0)`` means all
    convergents agree.
    """
    x = float(c)
    t = 0
    for i in range(len(qs)):
        q = int(qs[i])
        while t < q:
            x = lift_eval(omega, 1.0, amps, x)
            t += 1
        d = x - c - ps[i]
        want = wants[i]
        if d == 0.0:
            # periodic critical point: rho = p/q exactly
            return i, -want
        sgn = 1 if d > 0 else -1
        if sgn != want:
            return i, sgn
    return -1, 0


def order_violation(points, targets, tie):
    """First index where insertion ranks of ``points`` and ``targets`` differ.

    Both arrays are positions in [0, 1) measured from their own base point.
    Returns ``(index, side, neighbour)``; index -1 when the orders agree.
    Points closer than ``tie`` to an already inserted point count as
    violations.
    """
    xs = [float(points[0])]
    us = [float(targets[0])]
    for k in range(1, len(points)):
        x = float(points[k])
        u = float(targets[k])
        rx = bisect_left(xs, x)
        ru = bisect_left(us, u)
        if rx != ru:
            nb = rx - 1 if rx > ru else rx
            return k, (1 if rx > ru else -1), nb
        lo = xs[rx - 1] if rx > 0 else xs[-1] - 1.0
        hi = xs[rx] if rx < len(xs) else xs[0] + 1.0
        if x - lo <= tie or hi - x <= tie:
            return k, 0, rx
        xs.insert(rx, x)
        us.insert(ru, u)
    return -1, 0, -1


def cheb_eval(coeffs, a, b, x):
    """Clenshaw evaluation of a Chebyshev series on [a, b] at an array."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xs)
    scale = 2.0 / (b - a)
    shift = (a + b) / (b - a)
    for i in range(xs.shape[0]):
        t = xs[i] * scale - shift
        b1 = 0.0
        b2 = 0.0
        for k in range(len(coeffs) - 1, 0, -1):
            b1, b2 = 2.0 * t * b1 - b2 + coeffs[k], b1
        out[i] = t * b1 - b2 + coeffs[0]
    return out


def cheb_invert(coeffs, a, b, y, lo, hi):
    """Invert an increasing Chebyshev series by bisection on [lo, hi]."""
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.empty_like(ys)
    for i in range(ys.shape[0]):
        l, h = lo, hi
        for _ in range(80):
            m = 0.5 * (l + h)
            if cheb_eval(coeffs, a, b, m)[0] < ys[i]:
                l = m
            else:
                h = m
            if h - l <= 4e-16 * max(1.0, abs(m)):
                break
        out[i] = 0.5 * (l + h)
    return out


def insertion_gaps(sorted_points):
    """Largest gap between consecutive sorted reals."""
    pts = np.asarray(sorted_points, dtype=float)
    if pts.shape[0] < 2:
        return 0.0
    return float(np.max(np.diff(pts)))


def pressure_sum(lengths, s):
    return float(np.sum(np.asarray(lengths, dtype=float) ** s))


__all__ = [
    "lift_eval",
    "lift_iterate",
    "lift_orbit",
    "rotation_comparator",
    "order_violation",
    "cheb_eval",
    "cheb_invert",
    "insertion_gaps",
    "pressure_sum",
]

