"""Closed forms for the truncated stable density ``u**(-1-alpha)`` on (0, 1].

Two integrals appear in mechanism evaluation::

    A(y) = int_0^1 (exp(-u y) - 1 + u y) u**(-1-alpha) du      0 < alpha < 2
    B(y) = int_0^1 (1 - exp(-u y)) u**(-1-alpha) du            0 < alpha < 1

For ``y <= 1`` both are summed from their power series. For ``y > 1`` the
range is split at ``u = 1/y``; the piece on ``(0, 1/y]`` is a constant times
``y**alpha`` and the rest reduces to elementary terms plus a difference of
upper incomplete gamma functions with negative index.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

_SERIES_TERMS = 40
_CF_MAX_ITER = 500
_CF_EPS = 1e-16
_TINY = 1e-300


def upper_gamma_neg(a: float, x: np.ndarray) -> np.ndarray:
    """Upper incomplete gamma ``Gamma(a, x)`` for ``x >= 1`` by continued fraction.

    Parameters
    ----------
    a : float
        Index; any real value is accepted, the package only needs ``a < 0``.
    x : ndarray
        Arguments, each at least 1.

    Returns
    -------
    ndarray
        Values of ``int_x^inf t**(a-1) exp(-t) dt``.
    """
    x = np.asarray(x, dtype=float)
    if x.size <= 8:
        # scalar loop: numpy overhead dominates the iteration for few points
        return np.array([_upper_gamma_scalar(a, float(v)) for v in x.ravel()]).reshape(x.shape)
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, _CF_MAX_ITER + 1):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = b + an / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) < _CF_EPS):
            break
    with np.errstate(under="ignore"):
        return np.exp(-x + a * np.log(x)) * h


def _upper_gamma_scalar(a: float, x: float) -> float:
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _CF_MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            break
    return math.exp(-x + a * math.log(x)) * h if x < 745.0 else 0.0


@lru_cache(maxsize=256)
def _constants(alpha: float) -> tuple[float, float, float]:
    """Return ``(c1, c2, Gamma(-alpha, 1))``.

    ``c2 = sum_{k>=2} (-1)^k / (k! (k - alpha))`` and ``c1`` is the analogous
    signed sum from ``k = 1`` used by ``B``; ``c1`` is ``nan`` for ``alpha >= 1``.
    """
    c2 = 0.0
    for k in range(_SERIES_TERMS, 1, -1):
        c2 += (-1.0) ** k / (math.factorial(k) * (k - alpha))
    c1 = -(c2 - 1.0 / (1.0 - alpha)) if alpha < 1.0 else math.nan
    g1 = float(upper_gamma_neg(-alpha, np.array([1.0]))[0])
    return c1, c2, g1


def _series(y: np.ndarray, alpha: float, kmin: int) -> np.ndarray:
    acc = np.zeros_like(y)
    for k in range(_SERIES_TERMS, kmin - 1, -1):
        acc = acc + 1.0 / (math.factorial(k) * (k - alpha)) * (-y) ** k
    return acc


def stable_compensated(y, alpha: float):
    """``A(y)``: the fully compensated stable integral over (0, 1].

    Parameters
    ----------
    y : float or array_like
        Nonnegative arguments; ``inf`` maps to ``inf``.
    alpha : float
        Index in (0, 2).
    """
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.empty_like(y_arr)
    small = y_arr <= 1.0
    out[small] = _series(y_arr[small], alpha, 2)
    big = ~small & np.isfinite(y_arr)
    if np.any(big):
        yb = y_arr[big]
        _, c2, g1 = _constants(alpha)
        ly = np.log(yb)
        ya = np.exp(alpha * ly)
        t12 = ya * (c2 + g1 - upper_gamma_neg(-alpha, yb))
        t3 = -np.expm1(alpha * ly) / alpha
        if alpha == 1.0:
            t4 = yb * ly
        else:
            t4 = -yb * np.expm1((alpha - 1.0) * ly) / (1.0 - alpha)
        out[big] = t12 + t3 + t4
    out[np.isinf(y_arr)] = math.inf
    return out if np.ndim(y) else float(out[0])


def stable_subordinator(y, alpha: float):
    """``B(y)``: the uncompensated stable integral over (0, 1], ``alpha < 1``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.empty_like(y_arr)
    small = y_arr <= 1.0
    out[small] = -_series(y_arr[small], alpha, 1)
    big = ~small & np.isfinite(y_arr)
    if np.any(big):
        yb = y_arr[big]
        c1, _, g1 = _constants(alpha)
        ly = np.log(yb)
        ya = np.exp(alpha * ly)
        out[big] = ya * (c1 - g1 + upper_gamma_neg(-alpha, yb)) + np.expm1(alpha * ly) / alpha
    out[np.isinf(y_arr)] = math.inf
    return out if np.ndim(y) else float(out[0])
