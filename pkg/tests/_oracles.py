"""High-precision quadrature oracles, independent of the package code paths."""

from __future__ import annotations

import mpmath as mp

mp.mp.dps = 50
_DELTA = mp.mpf("1e-12")


def _breaks(y):
    pts = [_DELTA]
    p = mp.mpf("1e-11")
    while p < 1:
        pts.append(p)
        p *= 10
    if y > 1:
        pts.append(1 / mp.mpf(y))
    pts.append(mp.mpf(1))
    return sorted(set(pts))


def stable_A(y: float, alpha: float) -> float:
    """int_0^1 (e^{-uy}-1+uy) u^{-1-alpha} du, head on (0, delta) by Taylor."""
    y = mp.mpf(y)
    a = mp.mpf(alpha)
    head = y**2 * _DELTA ** (2 - a) / (2 * (2 - a)) - y**3 * _DELTA ** (3 - a) / (6 * (3 - a))
    body = mp.quad(lambda u: (mp.exp(-u * y) - 1 + u * y) * u ** (-1 - a), _breaks(y))
    return float(head + body)


def stable_B(y: float, alpha: float) -> float:
    """int_0^1 (1-e^{-uy}) u^{-1-alpha} du, head on (0, delta) by Taylor."""
    y = mp.mpf(y)
    a = mp.mpf(alpha)
    head = y * _DELTA ** (1 - a) / (1 - a) - y**2 * _DELTA ** (2 - a) / (2 * (2 - a))
    body = mp.quad(lambda u: (1 - mp.exp(-u * y)) * u ** (-1 - a), _breaks(y))
    return float(head + body)
