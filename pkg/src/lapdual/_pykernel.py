"""Vectorized numpy implementation of the Euler kernel.

This is the fallback backend; the compiled extension mirrors it step for
step and draws the same uniforms, so both produce the same law and, up to
last-bit differences in transcendental functions, the same paths.
"""

from __future__ import annotations

import math

import numpy as np

from ._plan import MECH_NOTUP, MECH_SPLP, MECH_SUB, RATE_POWER, Plan
from ._special import stable_compensated, stable_subordinator
from .rng import uniforms

ALIVE, ZERO, INF_KILLED, INF_EXPLODED = 0, 1, 2, 3
_POISSON_CHUNK = 8.0
_POISSON_NORMAL = 1e4
_TWO_PI = 2.0 * math.pi
_POISSON_KMAX = 200


def mech_rate(plan: Plan, i: int, x: np.ndarray) -> np.ndarray:
    """Evaluate mechanism ``i`` of the plan table at ``x >= 0``."""
    kind = plan.mech_kind[i]
    lo, hi = plan.mech_ptr[i], plan.mech_ptr[i + 1]
    out = np.zeros_like(x)
    for u, m in zip(plan.atom_loc[lo:hi], plan.atom_mass[lo:hi]):
        e = np.expm1(-u * x)
        if kind == MECH_SUB:
            out += m * -e
        elif kind == MECH_NOTUP or u <= 1.0:
            out += m * (e + u * x)
        else:
            out += m * e
    s = plan.mech_scale[i]
    if s > 0.0:
        al = plan.mech_alpha[i]
        out += s * (stable_subordinator(x, al) if kind == MECH_SUB else stable_compensated(x, al))
    if kind == MECH_SPLP:
        out += plan.mech_a[i] * x * x - plan.mech_b[i] * x - plan.mech_c[i]
    elif kind == MECH_SUB:
        out += plan.mech_d[i] * x + plan.mech_c[i]
    else:
        out += plan.mech_a[i] * x * x + plan.mech_d[i] * x
    return out


def rates(plan: Plan, x: np.ndarray) -> list[np.ndarray]:
    out = []
    for kind, arg in zip(plan.rate_kind, plan.rate_arg):
        if kind == RATE_POWER:
            out.append(np.ones_like(x) if arg == 0 else (x if arg == 1 else x * x))
        else:
            out.append(mech_rate(plan, int(arg), x))
    return out


def _poisson_inv(lam: np.ndarray, u: np.ndarray) -> np.ndarray:
    p = np.exp(-lam)
    f = p.copy()
    k = np.zeros(lam.size, dtype=np.int64)
    act = u > f
    while act.any():
        a = np.flatnonzero(act)
        k[a] += 1
        p[a] *= lam[a] / k[a]
        f[a] += p[a]
        act[a] = (u[a] > f[a]) & (k[a] < _POISSON_KMAX)
    return k


def poisson(lam: np.ndarray, keys: np.ndarray, step: int, slot: int) -> np.ndarray:
    """Poisson counts, nondecreasing in ``lam`` for a fixed stream.

    The rate is cut into chunks of ``_POISSON_CHUNK`` plus a remainder,
    each drawn by inversion from its own uniform; above ``_POISSON_NORMAL``
    a rounded normal is used.
    """
    lam = np.maximum(lam, 0.0)
    n = np.zeros(lam.shape, dtype=np.int64)
    big = lam > _POISSON_NORMAL
    if big.any():
        i = np.flatnonzero(big)
        z = np.sqrt(-2.0 * np.log(uniforms(keys[i], step, slot, 0))) * np.cos(_TWO_PI * uniforms(keys[i], step, slot, 1))
        n[i] = np.floor(lam[i] + np.sqrt(lam[i]) * z + 0.5).astype(np.int64)
    idx = np.flatnonzero(~big & (lam > 0.0))
    if idx.size:
        lm = lam[idx]
        full = np.floor(lm / _POISSON_CHUNK).astype(np.int64)
        acc = np.zeros(idx.size, dtype=np.int64)
        for j in range(int(full.max())):
            a = np.flatnonzero(full > j)
            acc[a] += _poisson_inv(np.full(a.size, _POISSON_CHUNK), uniforms(keys[idx[a]], step, slot, j))
        acc += _poisson_inv(lm - full * _POISSON_CHUNK, uniforms(keys[idx], step, slot, full))
        n[idx] = acc
    return n


def stable_sizes(alpha: float, eps: float, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw from ``u**(-1-alpha)`` on ``[eps, 1]``."""
    top = eps**-alpha
    return (top - u * (top - 1.0)) ** (-1.0 / alpha)


def stable_mass(alpha: float, scale: float, eps: float) -> float:
    return scale * (eps**-alpha - 1.0) / alpha


def _step(plan: Plan, xa: np.ndarray, keys: np.ndarray, step: int, h: float, growth: float):
    """One Euler step for alive paths; returns new values and kill increments."""
    R = rates(plan, xa)
    dx = np.zeros_like(xa)
    for coef, r in zip(plan.drift_coef, plan.drift_rate):
        dx += coef * R[r]
    dx *= h
    if len(plan.var_coef):
        var = np.zeros_like(xa)
        for coef, r in zip(plan.var_coef, plan.var_rate):
            var += coef * R[r]
        var = np.maximum(var, 0.0)
        u1 = uniforms(keys, step, 0, 0)
        u2 = uniforms(keys, step, 0, 1)
        z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * math.pi * u2)
        dx += np.sqrt(var * h) * z
    factor = None
    nj = len(plan.jump_size)
    for c in range(nj):
        lam = plan.jump_mass[c] * R[plan.jump_rate[c]] * h
        n = poisson(lam, keys, step, 2 + 2 * c)
        if plan.jump_mult[c]:
            f = (1.0 + plan.jump_size[c]) ** n
            factor = f if factor is None else factor * f
        else:
            dx += plan.jump_size[c] * n
    for j in range(len(plan.stab_alpha)):
        c = nj + j
        al, eps = plan.stab_alpha[j], plan.stab_eps[j]
        lam = stable_mass(al, plan.stab_scale[j], eps) * R[plan.stab_rate[j]] * h
        n = poisson(lam, keys, step, 2 + 2 * c)
        mult = plan.stab_mult[j]
        if mult and factor is None:
            factor = np.ones_like(xa)
        for k in range(int(n.max()) if n.size else 0):
            hit = np.flatnonzero(n > k)
            size = stable_sizes(al, eps, uniforms(keys[hit], step, 3 + 2 * c, k))
            if mult:
                factor[hit] *= 1.0 + size
            else:
                dx[hit] += size
    new = xa * growth + dx
    if factor is not None:
        new += xa * (factor - 1.0)
    kinc = None
    if plan.has_kill:
        kinc = np.zeros_like(xa)
        for coef, r in zip(plan.kill_coef, plan.kill_rate):
            kinc += coef * R[r]
        kinc = np.maximum(kinc, 0.0) * h
    return new, kinc


def advance(
    plan: Plan,
    x: np.ndarray,
    st: np.ndarray,
    clock: np.ndarray,
    thr: np.ndarray,
    keys: np.ndarray,
    step0: int,
    n_steps: int,
    h: float,
    snaps: np.ndarray,
    out_x: np.ndarray,
    out_st: np.ndarray,
) -> None:
    """Advance all paths ``n_steps`` steps in place, recording snapshots.

    ``snaps`` holds sorted step counts in ``[0, n_steps]``; row ``j`` of the
    outputs receives the state after ``snaps[j]`` steps.
    """
    j = 0
    nsnap = len(snaps)
    growth = math.exp(plan.lin_drift * h)
    while j < nsnap and snaps[j] == 0:
        out_x[j] = x
        out_st[j] = st
        j += 1
    for k in range(n_steps):
        alive = st == ALIVE
        if plan.is_static or not alive.any():
            idx = None
        elif alive.all():
            idx = slice(None)
        else:
            idx = np.flatnonzero(alive)
        if idx is not None:
            xa = x[idx]
            new, kinc = _step(plan, xa, keys[idx], step0 + k, h, growth)
            sa = np.zeros(xa.shape, dtype=st.dtype)
            if kinc is not None:
                ca = clock[idx] + kinc
                clock[idx] = ca
                sa[ca >= thr[idx]] = INF_KILLED
            live = sa == ALIVE
            boom = live & ~(new < plan.cap)
            sa[boom] = INF_EXPLODED
            live &= ~boom
            low = live & (new <= plan.floor)
            if plan.zero_trap:
                sa[low] = ZERO
                new[low] = 0.0
            else:
                new[low] = np.maximum(new[low], 0.0)
            new[sa >= INF_KILLED] = math.inf
            x[idx] = new
            st[idx] = sa
        while j < nsnap and snaps[j] == k + 1:
            out_x[j] = x
            out_st[j] = st
            j += 1
