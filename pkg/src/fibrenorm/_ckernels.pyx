# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled binary64 hot loops; same API as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, floor, M_PI
from libc.string cimport memmove

cnp.import_array()


cdef inline double _lift(double omega, double degree, double[::1] amps, double x) nogil:
    cdef double th = 2.0 * M_PI * x
    cdef double c1 = cos(th)
    cdef double s_prev = 0.0
    cdef double s_cur = sin(th)
    cdef double s_next
    cdef double total = omega + degree * x
    cdef Py_ssize_t j
    for j in range(amps.shape[0]):
        total += amps[j] * s_cur
        s_next = 2.0 * c1 * s_cur - s_prev
        s_prev = s_cur
        s_cur = s_next
    return total


def lift_eval(double omega, double degree, amps, double x):
    cdef double[::1] a = np.ascontiguousarray(amps, dtype=np.float64)
    return _lift(omega, degree, a, x)


def lift_iterate(double omega, double degree, amps, double x0, long n, bint reduce=False):
    cdef double[::1] a = np.ascontiguousarray(amps, dtype=np.float64)
    cdef double x = x0
    cdef long k
    with nogil:
        for k in range(n):
            x = _lift(omega, degree, a, x)
            if reduce:
                x -= floor(x)
    return x


def lift_orbit(double omega, double degree, amps, double x0, long n, bint reduce=False):
    cdef double[::1] a = np.ascontiguousarray(amps, dtype=np.float64)
    out = np.empty(n + 1)
    cdef double[::1] o = out
    cdef double x = x0
    cdef long k
    o[0] = x
    with nogil:
        for k in range(1, n + 1):
            x = _lift(omega, degree, a, x)
            if reduce:
                x -= floor(x)
            o[k] = x
    return out


def rotation_comparator(double omega, amps, double c, qs, ps, wants):
    cdef double[::1] a = np.ascontiguousarray(amps, dtype=np.float64)
    cdef long[::1] q = np.ascontiguousarray(qs, dtype=np.int64)
    cdef double[::1] p = np.ascontiguousarray(ps, dtype=np.float64)
    cdef long[::1] w = np.ascontiguousarray(wants, dtype=np.int64)
    cdef double x = c
    cdef double d
    cdef long t = 0
    cdef Py_ssize_t i
    cdef int sgn
    for i in range(q.shape[0]):
        while t < q[i]:
            x = _lift(omega, 1.0, a, x)
            t += 1
        d = x - c - p[i]
        if d == 0.0:
            return i, -w[i]
        sgn = 1 if d > 0 else -1
        if sgn != w[i]:
            return i, sgn
    return -1, 0


cdef Py_ssize_t _bisect_left(double[::1] arr, Py_ssize_t n, double v) nogil:
    cdef Py_ssize_t lo = 0
    cdef Py_ssize_t hi = n
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    return lo


def order_violation(points, targets, double tie):
    cdef double[::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[::1] tgt = np.ascontiguousarray(targets, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    xs_arr = np.empty(n)
    us_arr = np.empty(n)
    cdef double[::1] xs = xs_arr
    cdef double[::1] us = us_arr
    cdef Py_ssize_t size = 1
    cdef Py_ssize_t k, rx, ru
    cdef double x, u, lo, hi
    xs[0] = pts[0]
    us[0] = tgt[0]
    for k in range(1, n):
        x = pts[k]
        u = tgt[k]
        rx = _bisect_left(xs, size, x)
        ru = _bisect_left(us, size, u)
        if rx != ru:
            return k, (1 if rx > ru else -1), (rx - 1 if rx > ru else rx)
        lo = xs[rx - 1] if rx > 0 else xs[size - 1] - 1.0
        hi = xs[rx] if rx < size else xs[0] + 1.0
        if x - lo <= tie or hi - x <= tie:
            return k, 0, rx
        memmove(&xs[rx + 1], &xs[rx], (size - rx) * sizeof(double))
        memmove(&us[ru + 1], &us[ru], (size - ru) * sizeof(double))
        xs[rx] = x
        us[ru] = u
        size += 1
    return -1, 0, -1


cdef inline double _cheb(double[::1] c, double a, double b, double x) nogil:
    cdef double t = (2.0 * x - a - b) / (b - a)
    cdef double b1 = 0.0
    cdef double b2 = 0.0
    cdef double tmp
    cdef Py_ssize_t k
    for k in range(c.shape[0] - 1, 0, -1):
        tmp = 2.0 * t * b1 - b2 + c[k]
        b2 = b1
        b1 = tmp
    return t * b1 - b2 + c[0]


def cheb_eval(coeffs, double a, double b, x):
    cdef double[::1] c = np.ascontiguousarray(coeffs, dtype=np.float64)
    xs = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=np.float64)))
    out = np.empty_like(xs)
    cdef double[::1] xv = xs
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(xv.shape[0]):
            ov[i] = _cheb(c, a, b, xv[i])
    return out


def cheb_invert(coeffs, double a, double b, y, double lo, double hi):
    cdef double[::1] c = np.ascontiguousarray(coeffs, dtype=np.float64)
    ys = np.ascontiguousarray(np.atleast_1d(np.asarray(y, dtype=np.float64)))
    out = np.empty_like(ys)
    cdef double[::1] yv = ys
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    cdef int it
    cdef double l, h, m, scale
    with nogil:
        for i in range(yv.shape[0]):
            l = lo
            h = hi
            for it in range(80):
                m = 0.5 * (l + h)
                if _cheb(c, a, b, m) < yv[i]:
                    l = m
                else:
                    h = m
                scale = m if m > 0 else -m
                if scale < 1.0:
                    scale = 1.0
                if h - l <= 4e-16 * scale:
                    break
            ov[i] = 0.5 * (l + h)
    return out


def insertion_gaps(sorted_points):
    cdef double[::1] p = np.ascontiguousarray(sorted_points, dtype=np.float64)
    cdef double best = 0.0
    cdef Py_ssize_t i
    for i in range(1, p.shape[0]):
        if p[i] - p[i - 1] > best:
            best = p[i] - p[i - 1]
    return best


def pressure_sum(lengths, double s):
    # numpy's vectorised power beats a scalar pow() loop here
    return float(np.sum(np.power(np.asarray(lengths, dtype=np.float64), s)))
