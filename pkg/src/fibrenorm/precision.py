"""Working-precision helpers around mpmath's global context."""
from __future__ import annotations

from contextlib import contextmanager

import mpmath as mp

DEFAULT_DPS = 30
EXTENDED_DPS = 60


@contextmanager
def workdps(dps: int | None):
    """Temporarily set mpmath decimal precision; ``None`` keeps the ambient one."""
    if dps is None:
        yield
        return
    with mp.workdps(max(int(dps), 15)):
        yield


def to_mpf(x) -> mp.mpf:
    """Convert floats, ints, Fractions and decimal strings to mpf."""
    if isinstance(x, mp.mpf):
        return +x
    if hasattr(x, "numerator") and hasattr(x, "denominator") and not isinstance(x, float):
        return mp.mpf(x.numerator) / x.denominator
    return mp.mpf(x)


def decimal_str(x, digits: int) -> str:
    """Decimal string with ``digits`` significant digits (JSON/CSV output)."""
    with mp.workdps(max(digits + 5, 20)):
        return mp.nstr(to_mpf(x), digits, strip_zeros=False, min_fixed=-5, max_fixed=5)


def tiny(dps: int, margin: int = 0) -> mp.mpf:
    return mp.mpf(10) ** (-(dps - margin))
