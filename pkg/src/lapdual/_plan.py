"""Flat array description of one Euler step, shared by both kernels.

A plan lists rate functions ``R_i(x)`` and terms that reference them:

* drift terms ``coef * R(x)`` per unit time, plus a linear growth rate
  ``lin_drift`` integrated exactly as ``x exp(lin_drift h)``; jump
  compensators always stay in the Euler drift so they cancel the mean of
  the jumps step by step;
* variance terms ``coef * R(x)``, summed and fed to one Gaussian increment;
* atom channels: jumps of fixed size at intensity ``mass * R(x)``;
* stable channels: sizes in ``[eps, 1]`` drawn from ``u**(-1-alpha)`` at
  intensity ``scale * (eps**-alpha - 1) / alpha * R(x)``;
* killing terms ``coef * R(x)`` feeding the clock compared with Exp(1).

A channel flagged multiplicative maps ``x`` to ``x (1 + size)`` per jump.
Rate functions are either powers ``x**p`` (``p`` in 0, 1, 2) or a mechanism
from the table evaluated in place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mechanisms import NotUpMechanism, SpLpMechanism, SubordinatorMechanism

RATE_POWER = 0
RATE_MECH = 1
MECH_SPLP = 0
MECH_SUB = 1
MECH_NOTUP = 2

_MECH_KIND = {SpLpMechanism: MECH_SPLP, SubordinatorMechanism: MECH_SUB, NotUpMechanism: MECH_NOTUP}


@dataclass
class Plan:
    rate_kind: np.ndarray
    rate_arg: np.ndarray
    mech_kind: np.ndarray
    mech_a: np.ndarray
    mech_b: np.ndarray
    mech_c: np.ndarray
    mech_d: np.ndarray
    mech_alpha: np.ndarray
    mech_scale: np.ndarray
    mech_ptr: np.ndarray
    atom_loc: np.ndarray
    atom_mass: np.ndarray
    drift_coef: np.ndarray
    drift_rate: np.ndarray
    var_coef: np.ndarray
    var_rate: np.ndarray
    jump_size: np.ndarray
    jump_mass: np.ndarray
    jump_rate: np.ndarray
    jump_mult: np.ndarray
    stab_alpha: np.ndarray
    stab_scale: np.ndarray
    stab_eps: np.ndarray
    stab_rate: np.ndarray
    stab_mult: np.ndarray
    kill_coef: np.ndarray
    kill_rate: np.ndarray
    lin_drift: float
    zero_trap: bool
    floor: float
    cap: float
    mechanisms: tuple = field(default=(), repr=False)

    @property
    def has_kill(self) -> bool:
        return len(self.kill_coef) > 0

    @property
    def is_static(self) -> bool:
        """No term at all: paths never move."""
        return not (
            self.lin_drift or len(self.drift_coef) or len(self.var_coef) or len(self.jump_size) or len(self.stab_alpha) or self.has_kill
        )


class PlanBuilder:
    """Accumulates terms; ``build`` freezes them into a :class:`Plan`."""

    def __init__(self, eps: float) -> None:
        self.eps = float(eps)
        self._rates: list[tuple[int, int]] = []
        self._mechs: list = []
        self.drift: list[tuple[float, int]] = []
        self.var: list[tuple[float, int]] = []
        self.jumps: list[tuple[float, float, int, int]] = []
        self.stables: list[tuple[float, float, float, int, int]] = []
        self.kill: list[tuple[float, int]] = []
        self.linear = 0.0
        self.force_trap = False

    def power(self, p: int) -> int:
        return self._rate(RATE_POWER, int(p))

    def mech(self, m) -> int:
        for i, known in enumerate(self._mechs):
            if known is m or known == m:
                return self._rate(RATE_MECH, i)
        self._mechs.append(m)
        return self._rate(RATE_MECH, len(self._mechs) - 1)

    def _rate(self, kind: int, arg: int) -> int:
        key = (kind, arg)
        if key not in self._rates:
            self._rates.append(key)
        return self._rates.index(key)

    def add_drift(self, coef: float, rate: int) -> None:
        if coef != 0.0:
            self.drift.append((float(coef), rate))

    def add_linear(self, coef: float) -> None:
        """Drift ``coef * x``, integrated exactly."""
        self.linear += float(coef)

    def add_var(self, coef: float, rate: int) -> None:
        if coef != 0.0:
            self.var.append((float(coef), rate))

    def add_kill(self, coef: float, rate: int) -> None:
        if coef != 0.0:
            self.kill.append((float(coef), rate))

    def add_measure(self, measure, rate: int, compensate_upto: float, mult: bool = False) -> None:
        """Jumps of ``measure`` at intensity ``R(x)``.

        Atoms with ``|size| <= compensate_upto`` are compensated. For a
        multiplicative channel the compensator is ``x`` times larger, so the
        drift references ``x * R``; only constant ``R`` is supported there.
        """
        comp_rate = self.power(1) if mult else rate
        if mult and self._rates[rate] != (RATE_POWER, 0):
            raise ValueError("multiplicative channels need a constant rate")
        for u, m in measure.atoms:
            self.jumps.append((u, m, rate, int(mult)))
            if abs(u) <= compensate_upto:
                self.add_drift(-u * m, comp_rate)
        st = measure.stable
        if st is None:
            return
        a, s, eps = st.alpha, st.scale, self.eps
        self.stables.append((a, s, eps, rate, int(mult)))
        if compensate_upto >= 1.0:
            # mean of the simulated part on [eps, 1]
            big = -s * math.log(eps) if a == 1.0 else s * (1.0 - eps ** (1.0 - a)) / (1.0 - a)
            self.add_drift(-big, comp_rate)
        else:
            # uncompensated: the part below eps contributes its mean
            self.add_drift(s * eps ** (1.0 - a) / (1.0 - a), comp_rate)

    def build(self, floor: float, cap: float) -> Plan:
        def arr(items, i, dtype):
            return np.array([t[i] for t in items], dtype=dtype)

        mk, ma, mb, mc, md, mal, msc, ptr, loc, mass = [], [], [], [], [], [], [], [0], [], []
        for m in self._mechs:
            mk.append(_MECH_KIND[type(m)])
            ma.append(getattr(m, "a", 0.0))
            mb.append(getattr(m, "b", 0.0))
            mc.append(getattr(m, "c", 0.0))
            md.append(getattr(m, "d", 0.0))
            st = m.measure.stable
            mal.append(0.0 if st is None else st.alpha)
            msc.append(0.0 if st is None else st.scale)
            for u, w in m.measure.atoms:
                loc.append(u)
                mass.append(w)
            ptr.append(len(loc))
        drift = self.drift
        f8, i8 = np.float64, np.int64
        return Plan(
            rate_kind=arr(self._rates, 0, i8),
            rate_arg=arr(self._rates, 1, i8),
            mech_kind=np.array(mk, dtype=i8),
            mech_a=np.array(ma, dtype=f8),
            mech_b=np.array(mb, dtype=f8),
            mech_c=np.array(mc, dtype=f8),
            mech_d=np.array(md, dtype=f8),
            mech_alpha=np.array(mal, dtype=f8),
            mech_scale=np.array(msc, dtype=f8),
            mech_ptr=np.array(ptr, dtype=i8),
            atom_loc=np.array(loc, dtype=f8),
            atom_mass=np.array(mass, dtype=f8),
            drift_coef=arr(drift, 0, f8),
            drift_rate=arr(drift, 1, i8),
            var_coef=arr(self.var, 0, f8),
            var_rate=arr(self.var, 1, i8),
            jump_size=arr(self.jumps, 0, f8),
            jump_mass=arr(self.jumps, 1, f8),
            jump_rate=arr(self.jumps, 2, i8),
            jump_mult=arr(self.jumps, 3, i8),
            stab_alpha=arr(self.stables, 0, f8),
            stab_scale=arr(self.stables, 1, f8),
            stab_eps=arr(self.stables, 2, f8),
            stab_rate=arr(self.stables, 3, i8),
            stab_mult=arr(self.stables, 4, i8),
            kill_coef=arr(self.kill, 0, f8),
            kill_rate=arr(self.kill, 1, i8),
            lin_drift=self.linear,
            zero_trap=self.force_trap or self._vanishes_at_zero(),
            floor=float(floor),
            cap=float(cap),
            mechanisms=tuple(self._mechs),
        )

    def _vanishes_at_zero(self) -> bool:
        """Whether every term is zero at ``x = 0``, making 0 a trap."""

        def zero_at_0(r: int) -> bool:
            kind, arg = self._rates[r]
            if kind == RATE_POWER:
                return arg > 0
            m = self._mechs[arg]
            return getattr(m, "c", 0.0) == 0.0

        rates = [r for _, r in self.drift + self.var + self.kill]
        rates += [j[2] for j in self.jumps if not j[3]] + [s[3] for s in self.stables if not s[4]]
        return all(zero_at_0(r) for r in rates)
