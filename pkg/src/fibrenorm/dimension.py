"""Dimension brackets for finite subsystems of the first-return IFS.

The inverse branches g_n = psi_n^{-1}, psi_n = tau^(2n+1) phi, map the
fundamental domain (x_c, X) into K^n.  Depth-d cylinders I_w = g_w(domain)
get very short (well below binary64 spacing near x_c), so each cylinder is
carried as a (midpoint, length) pair and lengths are propagated
multiplicatively: |I_{nw}| = |g_n'(mid_w)| |I_w|.  The relative error of
that step is the distortion of g_n across I_w, which is negligible at the
depths used here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .errors import BracketError, PrecisionError
from .fixedpoint import FixedPointMap
from .presentation import FloatPhi

# lengths are binary64 numbers; stop well before they underflow
MIN_LENGTH = 1e-290


@dataclass
class FiniteIFS:
    """Contracting branches on a common domain.

    ``maps[k]`` and ``derivs[k]`` are vectorised g and g' for index
    ``indices[k]``.  ``distortion_bound`` is D >= 1, the sup/inf ratio of
    derivatives of the compositions.
    """

    indices: tuple
    maps: tuple
    derivs: tuple
    domain: tuple
    distortion_bound: float = 1.0

    @property
    def width(self) -> float:
        return self.domain[1] - self.domain[0]

    @classmethod
    def linear(cls, ratios: Sequence[float], offsets: Sequence[float] | None = None,
               domain=(0.0, 1.0)) -> "FiniteIFS":
        """Affine branches x -> lo + off + r (x - lo); D = 1 exactly."""
        lo, hi = domain
        if offsets is None:
            # spread the images evenly
            free = (hi - lo) - sum(abs(r) for r in ratios) * (hi - lo)
            gap = free / max(len(ratios) - 1, 1)
            offsets, pos = [], 0.0
            for r in ratios:
                offsets.append(pos)
                pos += abs(r) * (hi - lo) + gap
        maps, derivs = [], []
        for r, off in zip(ratios, offsets):
            maps.append(lambda x, r=r, off=off: lo + off + r * (np.asarray(x) - lo))
            derivs.append(lambda x, r=r: np.full_like(np.asarray(x, dtype=float), r))
        return cls(tuple(range(len(ratios))), tuple(maps), tuple(derivs), (lo, hi), 1.0)

    @classmethod
    def from_fixed_point(cls, fp: FixedPointMap, A: Sequence[int], inflate: float = 1.1) -> "FiniteIFS":
        """R(A) for a cover fixed point, with D measured on depth-2 cylinders."""
        v = FloatPhi(fp)
        ell, tau = v.ell, v.tau
        lo, hi = v.x_c, v.X
        maps, derivs = [], []
        for n in A:
            s = tau ** (2 * n + 1)
            maps.append(_branch(v, s, lo, hi))
            derivs.append(_branch_derivative(v, s, lo, hi, ell))
        ifs = cls(tuple(int(n) for n in A), tuple(maps), tuple(derivs), (lo, hi), 1.0)
        ifs.distortion_bound = inflate * measured_distortion(ifs, depth=2)
        return ifs


def _branch(v: FloatPhi, s: float, lo: float, hi: float) -> Callable:
    def g(y):
        t = np.asarray(y, dtype=float) / s
        root = np.sign(t) * np.abs(t) ** (1.0 / v.ell)
        return kernels.cheb_invert(v.coeffs, v.a, v.b, root, lo, hi)

    return g


def _branch_derivative(v: FloatPhi, s: float, lo: float, hi: float, ell: float) -> Callable:
    def dg(y):
        t = np.asarray(y, dtype=float) / s
        root = np.sign(t) * np.abs(t) ** (1.0 / ell)
        x = kernels.cheb_invert(v.coeffs, v.a, v.b, root, lo, hi)
        # g = E^{-1}(t^(1/l)),  g' = t^(1/l - 1) / (l s E'(g))
        return np.abs(t) ** (1.0 / ell - 1.0) / (ell * s * v.dE(x))

    return dg


def measured_distortion(ifs: FiniteIFS, depth: int = 2, samples: int = 9) -> float:
    """max over words of length ``depth`` of sup|g_w'| / inf|g_w'| on a sample grid."""
    lo, hi = ifs.domain
    pts = np.linspace(lo, hi, samples + 2)[1:-1]
    worst = 1.0
    for word in np.ndindex(*(len(ifs.maps),) * depth):
        x = pts.copy()
        d = np.ones_like(pts)
        for k in reversed(word):
            d = d * np.abs(ifs.derivs[k](x))
            x = ifs.maps[k](x)
        worst = max(worst, float(d.max() / d.min()))
    return worst


@dataclass
class CylinderSet:
    depth: int
    words: np.ndarray
    mids: np.ndarray
    lengths: np.ndarray

    def __len__(self):
        return self.lengths.shape[0]


def cylinders(ifs: FiniteIFS, depth: int) -> CylinderSet:
    """All |A|^depth cylinders g_{w_1} o ... o g_{w_d}(domain).

    Words are stored with the outermost map first, in lexicographic order.
    """
    lo, hi = ifs.domain
    mids = np.array([0.5 * (lo + hi)])
    lengths = np.array([hi - lo])
    words = np.zeros((1, 0), dtype=np.int16)
    m = len(ifs.maps)
    for _ in range(depth):
        new_m, new_l, new_w = [], [], []
        for k in range(m):
            new_m.append(ifs.maps[k](mids))
            new_l.append(np.abs(ifs.derivs[k](mids)) * lengths)
            new_w.append(np.hstack([np.full((len(mids), 1), k, dtype=np.int16), words]))
        mids = np.concatenate(new_m)
        lengths = np.concatenate(new_l)
        words = np.vstack(new_w)
        if lengths.min() < MIN_LENGTH:
            raise PrecisionError(f"cylinder length {lengths.min():.3e} below the binary64 guard")
    # lexicographic order of words, outermost letter first
    order = np.lexsort(words.T[::-1]) if depth else np.arange(1)
    return CylinderSet(depth, words[order], mids[order], lengths[order])


def pressure_bracket(ifs: FiniteIFS, depth: int, s: float, cyl: CylinderSet | None = None):
    """(sum (|I_w|/(D|domain|))^s, sum (D|I_w|/|domain|)^s); both decrease in s."""
    cyl = cyl if cyl is not None else cylinders(ifs, depth)
    rel = cyl.lengths / ifs.width
    D = ifs.distortion_bound
    return kernels.pressure_sum(rel / D, s), kernels.pressure_sum(np.minimum(rel * D, 1.0), s)


@dataclass(frozen=True)
class DimensionEstimate:
    s_lo: float
    s_hi: float
    depth: int
    cylinder_count: int
    distortion_bound: float

    @property
    def width(self) -> float:
        return self.s_hi - self.s_lo

    def to_dict(self) -> dict:
        return {"s_lo": repr(self.s_lo), "s_hi": repr(self.s_hi), "depth": self.depth,
                "cylinder_count": self.cylinder_count, "distortion_bound": repr(self.distortion_bound)}


def _moran_root(rel: np.ndarray, tol: float) -> float:
    """Root in [0, 1] of sum rel^s = 1 (0 if the sum is already <= 1 at s = 0)."""
    f = lambda s: kernels.pressure_sum(rel, s) - 1.0
    if f(0.0) <= 0:
        return 0.0
    if f(1.0) >= 0:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def dimension_estimate(ifs: FiniteIFS, depth: int = 8, tol: float = 1e-6) -> DimensionEstimate:
    """Bracket for the dimension of the limit set of ``ifs``.

    With |I_w| = |g_w'(xi)| |domain| and the distortion bound D, the
    contraction of g_w lies between |I_w|/(D|domain|) and D|I_w|/|domain|,
    so the Moran roots of the two sums enclose the dimension.
    """
    cyl = cylinders(ifs, depth)
    rel = cyl.lengths / ifs.width
    D = ifs.distortion_bound
    s_lo = _moran_root(rel / D, tol)
    s_hi = _moran_root(np.minimum(rel * D, 1.0), tol)
    if s_lo > s_hi + tol:
        raise BracketError(f"bracket inverted at depth {depth}: {s_lo} > {s_hi}")
    return DimensionEstimate(s_lo, s_hi, depth, len(cyl), D)


@dataclass
class DimensionRow:
    ell: int
    size: int
    depth: int
    estimate: DimensionEstimate | None
    error: str = ""


@dataclass
class DimensionSweep:
    rows: list
    A: tuple
    depth: int

    def s_lo(self) -> list:
        return [(r.ell, r.estimate.s_lo) for r in self.rows if r.estimate is not None]

    def nondecreasing(self, noise: float = 1e-6) -> bool | None:
        """Trend verdict over the solved rows; None for fewer than two rows."""
        vals = [s for _, s in self.s_lo()]
        if len(vals) < 2:
            return None
        return all(b >= a - noise for a, b in zip(vals, vals[1:]))

    def csv_rows(self) -> list:
        out = []
        for r in self.rows:
            if r.estimate is None:
                out.append([r.ell, r.size, r.depth, "", ""])
            else:
                out.append([r.ell, r.size, r.depth, f"{r.estimate.s_lo:.9f}", f"{r.estimate.s_hi:.9f}"])
        return out


CSV_HEADER = ["ell", "A_size", "depth", "s_lo", "s_hi"]


def dimension_sweep(fps: Sequence[FixedPointMap], A: Sequence[int] = (0, 1, 2, 3), depth: int = 8) -> DimensionSweep:
    """(ell, s_lo, s_hi) for each fixed point; failures leave a gap in the table."""
    rows = []
    for fp in sorted(fps, key=lambda f: float(f.exponent)):
        ell = int(round(float(fp.exponent)))
        try:
            est = dimension_estimate(FiniteIFS.from_fixed_point(fp, A), depth)
            rows.append(DimensionRow(ell, len(A), depth, est))
        except (PrecisionError, BracketError, ValueError) as exc:
            rows.append(DimensionRow(ell, len(A), depth, None, str(exc)))
    return DimensionSweep(rows, tuple(A), depth)


def moran_dimension(count: int, ratio: float) -> float:
    return math.log(count) / math.log(1.0 / ratio)
