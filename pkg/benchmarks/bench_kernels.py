"""Compiled vs pure-Python binary64 kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly, so the comparison does not depend on
FIBRENORM_PURE.  Every kernel is run on identical inputs and the outputs are
compared before timing.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from fibrenorm import _pykernels as py
from fibrenorm.circlemap import family_amplitudes, golden_mean

try:
    from fibrenorm import _ckernels as cy
except ImportError:  # pragma: no cover
    cy = None


def cases():
    rng = np.random.default_rng(7)
    amps = np.array([float(a) for a in family_amplitudes(3, 1)])
    omega = 0.6066610634701121
    coeffs = np.array([1.0 / (k + 1) ** 3 for k in range(48)])
    xs = rng.uniform(-1.0, 1.0, 20_000)
    # an increasing series for the inverse
    inc = np.zeros(8)
    inc[0], inc[1] = 0.5, 1.0
    ys = rng.uniform(-0.4, 1.4, 2_000)
    n = 4_000
    g = float(golden_mean())
    pts = np.mod(np.arange(n) * g + 1e-3 * np.sin(np.arange(n)), 1.0)
    tg = np.mod(np.arange(n) * g, 1.0)
    lengths = rng.uniform(1e-9, 1e-3, 200_000)
    return {
        "lift_orbit (20k steps)": lambda k: k.lift_orbit(omega, 1, amps, 0.5, 20_000),
        "cheb_eval (48 terms x 20k)": lambda k: k.cheb_eval(coeffs, -1.0, 1.0, xs),
        "cheb_invert (2k values)": lambda k: k.cheb_invert(inc, -1.0, 1.0, ys, -1.0, 1.0),
        "order_violation (4k points)": lambda k: k.order_violation(pts, tg, 1e-12),
        "pressure_sum (200k lengths)": lambda k: k.pressure_sum(lengths, 0.6),
    }


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return bool(np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rtol=1e-12, atol=1e-12))


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if cy is None:
        print("compiled kernels not built; only the Python backend is available")
        return
    print(f"{'kernel':32s} {'python [s]':>12s} {'cython [s]':>12s} {'speed-up':>9s}  agree")
    for name, run in cases().items():
        agree = _same(run(py), run(cy))
        tp = min(timeit.repeat(lambda: run(py), number=1, repeat=args.repeat))
        tc = min(timeit.repeat(lambda: run(cy), number=1, repeat=args.repeat))
        print(f"{name:32s} {tp:12.4f} {tc:12.5f} {tp / tc:9.1f}  {agree}")


if __name__ == "__main__":
    main()
