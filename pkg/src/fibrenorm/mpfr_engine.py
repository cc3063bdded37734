"""Extended-precision orbit loops for the trigonometric lifts.

MPFR through gmpy2 is roughly six times faster than mpmath for these loops;
mpmath is used when gmpy2 is missing.  Inputs and outputs are mpmath numbers
so callers never see the backend.
"""
from __future__ import annotations

import mpmath as mp

try:  # pragma: no branch
    import gmpy2

    HAVE_GMPY2 = True
except ImportError:  # pragma: no cover
    gmpy2 = None
    HAVE_GMPY2 = False


def _bits(dps: int) -> int:
    return int(dps * 3.3219280948873622) + 16


def _to_mpfr(x):
    m, e = mp.mpf(x).man_exp
    return gmpy2.mul_2exp(gmpy2.mpfr(m), e)


def _to_mpf(y) -> mp.mpf:
    if not gmpy2.is_finite(y):
        raise OverflowError("non-finite value in orbit")
    if y == 0:
        return mp.mpf(0)
    num, den = y.as_integer_ratio()
    return mp.mpf(num) / den


class OrbitEngine:
    """Iterates x -> omega + degree*x + sum_j a_j sin(2 pi j x).

    ``deriv_scale`` and ``k`` give F'(x) = deriv_scale*cos(pi x)^{2k}.
    """

    def __init__(self, omega, degree: int, amps, deriv_scale, k: int, dps: int):
        self.dps = dps
        self.degree = degree
        self.k = k
        if HAVE_GMPY2:
            self.ctx = gmpy2.context(gmpy2.get_context(), precision=_bits(dps))
            with gmpy2.context(self.ctx):
                self.omega = _to_mpfr(omega)
                self.amps = [_to_mpfr(a) for a in amps]
                self.scale = _to_mpfr(deriv_scale)
                self.two_pi = 2 * gmpy2.const_pi()
        else:
            self.omega = mp.mpf(omega)
            self.amps = [mp.mpf(a) for a in amps]
            self.scale = mp.mpf(deriv_scale)

    # gmpy2 paths -----------------------------------------------------------
    def _step(self, x):
        s1, c1 = gmpy2.sin_cos(self.two_pi * x)
        total = self.omega + self.degree * x
        sp, sc = 0, s1
        for a in self.amps:
            total += a * sc
            sp, sc = sc, 2 * c1 * sc - sp
        return total, c1

    def iterate(self, x, n: int, mod1: bool = False):
        if not HAVE_GMPY2:
            return self._mp_iterate(x, n, mod1)
        with gmpy2.context(self.ctx):
            y = _to_mpfr(x)
            for _ in range(n):
                y = self._step(y)[0]
                if mod1:
                    y -= gmpy2.floor(y)
            return _to_mpf(y)

    def orbit(self, x, n: int, mod1: bool = True) -> list:
        if not HAVE_GMPY2:
            return self._mp_orbit(x, n, mod1)
        with gmpy2.context(self.ctx):
            y = _to_mpfr(x)
            if mod1:
                y -= gmpy2.floor(y)
            out = [y]
            for _ in range(n):
                y = self._step(y)[0]
                if mod1:
                    y -= gmpy2.floor(y)
                out.append(y)
            return [_to_mpf(v) for v in out]

    def iterate_with_derivative(self, x, n: int):
        """(F^n(x), (F^n)'(x), dF^n(x)/d omega)."""
        if not HAVE_GMPY2:
            return self._mp_iterate_d(x, n)
        with gmpy2.context(self.ctx):
            y = _to_mpfr(x)
            dx = gmpy2.mpfr(1)
            dw = gmpy2.mpfr(0)
            for _ in range(n):
                y_new, c1 = self._step(y)
                d = self.scale * ((1 + c1) / 2) ** self.k
                dw = 1 + d * dw
                dx = d * dx
                y = y_new
            return _to_mpf(y), _to_mpf(dx), _to_mpf(dw)

    # mpmath fallbacks ------------------------------------------------------
    def _mp_step(self, x):
        s1 = mp.sinpi(2 * x)
        c1 = mp.cospi(2 * x)
        total = self.omega + self.degree * x
        sp, sc = mp.mpf(0), s1
        for a in self.amps:
            total += a * sc
            sp, sc = sc, 2 * c1 * sc - sp
        return total, c1

    def _mp_iterate(self, x, n, mod1):
        with mp.workdps(self.dps):
            y = mp.mpf(x)
            for _ in range(n):
                y = self._mp_step(y)[0]
                if mod1:
                    y -= mp.floor(y)
            return y

    def _mp_orbit(self, x, n, mod1):
        with mp.workdps(self.dps):
            y = mp.mpf(x)
            if mod1:
                y -= mp.floor(y)
            out = [y]
            for _ in range(n):
                y = self._mp_step(y)[0]
                if mod1:
                    y -= mp.floor(y)
                out.append(y)
            return out

    def _mp_iterate_d(self, x, n):
        with mp.workdps(self.dps):
            y = mp.mpf(x)
            dx, dw = mp.mpf(1), mp.mpf(0)
            for _ in range(n):
                y_new, c1 = self._mp_step(y)
                d = self.scale * ((1 + c1) / 2) ** self.k
                dw = 1 + d * dw
                dx = d * dx
                y = y_new
            return y, dx, dw
