"""Common large-l limit of the cover and homeomorphism scaling constants.

Both families approach the same limit from opposite sides (covers from
below, homeomorphisms from above), so they are fitted jointly:

    tau_cover(l) = t + C1 l^(-p1),     tau_homeo(l) = t + C2 l^(-p2)

with a shared t.  Only the tail l >= ``min_ell`` enters the fit; the spread
of t over neighbouring choices of that cut is reported as the uncertainty.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares


@dataclass(frozen=True)
class LimitFit:
    limit: float
    spread: float
    min_ell: int
    cover_params: tuple
    homeo_params: tuple
    rms: float
    points: int

    def to_dict(self) -> dict:
        return {
            "limit": repr(self.limit),
            "spread": repr(self.spread),
            "min_ell": self.min_ell,
            "cover_params": [repr(v) for v in self.cover_params],
            "homeo_params": [repr(v) for v in self.homeo_params],
            "rms": repr(self.rms),
            "points": self.points,
        }


def _fit(cover: dict, homeo: dict, min_ell: int):
    lc = np.array(sorted(k for k in cover if k >= min_ell), dtype=float)
    lh = np.array(sorted(k for k in homeo if k >= min_ell), dtype=float)
    if len(lc) < 3 or len(lh) < 3:
        raise ValueError("need at least three values of each kind above the cut")
    yc = np.array([float(cover[int(k)]) for k in lc])
    yh = np.array([float(homeo[int(k)]) for k in lh])

    def resid(p):
        t, c1, p1, c2, p2 = p
        return np.concatenate([t + c1 * lc ** -p1 - yc, t + c2 * lh ** -p2 - yh])

    guess = [0.5 * (yc[-1] + yh[-1]), (yc[-1] - yh[-1]) * lc[-1] / 2, 1.0,
             (yh[-1] - yc[-1]) * lh[-1] / 2, 1.0]
    sol = least_squares(resid, guess, bounds=([-np.inf, -np.inf, 0.05, -np.inf, 0.05],
                                              [np.inf, np.inf, 5.0, np.inf, 5.0]),
                        xtol=1e-14, ftol=1e-14)
    rms = float(np.sqrt(np.mean(sol.fun ** 2)))
    return sol.x, rms, len(lc) + len(lh)


def common_limit(cover: dict, homeo: dict, min_ell: int = 11) -> LimitFit:
    """Joint extrapolation of {l: tau} tables to l -> infinity."""
    x, rms, npts = _fit(cover, homeo, min_ell)
    alts = []
    for cut in (min_ell - 2, min_ell + 2):
        try:
            alts.append(_fit(cover, homeo, cut)[0][0])
        except ValueError:
            pass
    spread = max((abs(a - x[0]) for a in alts), default=float("nan"))
    return LimitFit(float(x[0]), float(spread), min_ell, (float(x[1]), float(x[2])),
                    (float(x[3]), float(x[4])), rms, npts)
