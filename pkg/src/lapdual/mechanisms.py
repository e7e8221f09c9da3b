"""Levy-Khintchine mechanisms with atomic plus truncated-stable jump measures.

Four classes are provided:

``SpLpMechanism``
    ``Psi(y) = int (e^{-uy} - 1 + uy 1_{(0,1]}(u)) nu(du) + a y^2 - b y - c``
``SubordinatorMechanism``
    ``Phi(y) = int (1 - e^{-uy}) nu(du) + d y + c``
``NotUpMechanism``
    ``Sigma(y) = int (e^{-uy} - 1 + uy) nu(du) + a y^2 + d y``
``EnvMechanism``
    ``kappa(z) = int (e^{-zm} - 1 + zm 1_{[-1,1]}(m)) nu(dm) + a z^2 - b z - c``

All mechanisms are immutable. Every evaluator accepts a scalar or an array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Union

import numpy as np

from ._special import stable_compensated, stable_subordinator
from .errors import ValidationError

__all__ = [
    "StableSpec",
    "JumpMeasureSpec",
    "SpLpMechanism",
    "SubordinatorMechanism",
    "NotUpMechanism",
    "EnvMechanism",
    "Mechanism",
    "splp",
    "subordinator",
    "not_up",
    "env",
    "eval_splp",
    "eval_subordinator",
    "eval_not_up",
    "eval_env",
    "derivative_at_zero",
    "mechanism_to_config",
    "mechanism_from_config",
    "merge_mechanisms",
]


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class StableSpec:
    """Density ``scale * u**(-1-alpha)`` on (0, 1]."""

    alpha: float
    scale: float

    def __post_init__(self) -> None:
        a = _finite("stable.alpha", self.alpha)
        s = _finite("stable.scale", self.scale)
        if not 0.0 < a < 2.0:
            raise ValidationError("stable.alpha must lie in (0, 2)")
        if s <= 0.0:
            raise ValidationError("stable.scale must be positive")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "scale", s)


@dataclass(frozen=True)
class JumpMeasureSpec:
    """Finite atomic measure plus an optional truncated stable density.

    Parameters
    ----------
    atoms : sequence of (location, mass)
        Locations must be nonzero and at least ``support_floor``.
    stable : StableSpec, optional
        Density component on (0, 1].
    support_floor : float
        Smallest admissible atom location.
    """

    atoms: tuple[tuple[float, float], ...] = ()
    stable: StableSpec | None = None
    support_floor: float = 0.0

    def __post_init__(self) -> None:
        clean = []
        for item in self.atoms:
            if len(item) != 2:
                raise ValidationError("atoms must be (location, mass) pairs")
            loc = _finite("atom location", item[0])
            mass = _finite("atom mass", item[1])
            if loc == 0.0:
                raise ValidationError("atom location must be nonzero")
            if loc < self.support_floor:
                raise ValidationError(
                    f"atom location {loc!r} is below the support floor {self.support_floor!r}"
                )
            if mass <= 0.0:
                raise ValidationError("atom mass must be positive")
            clean.append((loc, mass))
        object.__setattr__(self, "atoms", tuple(clean))
        if isinstance(self.stable, dict):
            object.__setattr__(self, "stable", StableSpec(**self.stable))

    @property
    def is_zero(self) -> bool:
        return not self.atoms and self.stable is None

    def locations(self) -> np.ndarray:
        return np.array([u for u, _ in self.atoms], dtype=float)

    def masses(self) -> np.ndarray:
        return np.array([m for _, m in self.atoms], dtype=float)

    def scaled(self, w: float) -> JumpMeasureSpec:
        # parts whose mass underflows to 0 are dropped
        st = None
        if self.stable is not None and self.stable.scale * w > 0.0:
            st = StableSpec(self.stable.alpha, self.stable.scale * w)
        atoms = tuple((u, m * w) for u, m in self.atoms if m * w > 0.0)
        return JumpMeasureSpec(atoms, st, self.support_floor)

    def merged(self, other: JumpMeasureSpec) -> JumpMeasureSpec:
        if self.stable is not None and other.stable is not None:
            if self.stable.alpha != other.stable.alpha:
                raise ValidationError("cannot merge stable parts with different alpha")
            st = StableSpec(self.stable.alpha, self.stable.scale + other.stable.scale)
        else:
            st = self.stable if self.stable is not None else other.stable
        floor = min(self.support_floor, other.support_floor)
        return JumpMeasureSpec(self.atoms + other.atoms, st, floor)


def _measure(atoms: Iterable, stable: StableSpec | dict | None, floor: float) -> JumpMeasureSpec:
    if isinstance(stable, dict):
        stable = StableSpec(**stable)
    return JumpMeasureSpec(tuple(tuple(a) for a in atoms), stable, floor)


def _check_measure(measure: JumpMeasureSpec, floor: float, alpha_max: float, cls: str) -> None:
    if measure.support_floor != floor:
        raise ValidationError(f"{cls} requires support_floor {floor}")
    if measure.stable is not None and not measure.stable.alpha < alpha_max:
        raise ValidationError(f"{cls} requires stable.alpha in (0, {alpha_max:g})")


def _as_array(y) -> tuple[np.ndarray, bool]:
    arr = np.asarray(y, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0):
        raise ValidationError("mechanisms are evaluated at finite nonnegative arguments")
    return np.atleast_1d(arr), arr.ndim == 0


def _compensated_atoms(measure: JumpMeasureSpec, y: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Sum of ``m (e^{-uy} - 1 + uy 1_{[lo,hi]}(u))`` over atoms."""
    acc = np.zeros_like(y)
    for u, m in measure.atoms:
        term = np.expm1(-u * y)
        if lo <= u <= hi:
            term = term + u * y
        acc = acc + m * term
    return acc


@dataclass(frozen=True)
class SpLpMechanism:
    """Spectrally positive Levy exponent with killing, quadruplet ``(nu, a, b, c)``."""

    measure: JumpMeasureSpec = field(default_factory=JumpMeasureSpec)
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0

    def __post_init__(self) -> None:
        _check_measure(self.measure, 0.0, 2.0, "SpLpMechanism")
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if self.a < 0.0 or self.c < 0.0:
            raise ValidationError("SpLpMechanism requires a >= 0 and c >= 0")

    def __call__(self, y):
        return eval_splp(self, y)

    @property
    def is_zero(self) -> bool:
        return self.measure.is_zero and self.a == 0.0 and self.b == 0.0 and self.c == 0.0

    def scaled(self, w: float) -> SpLpMechanism:
        return SpLpMechanism(self.measure.scaled(w), self.a * w, self.b * w, self.c * w)


@dataclass(frozen=True)
class SubordinatorMechanism:
    """Killed subordinator exponent, triplet ``(nu, d, c)``."""

    measure: JumpMeasureSpec = field(default_factory=JumpMeasureSpec)
    d: float = 0.0
    c: float = 0.0

    def __post_init__(self) -> None:
        _check_measure(self.measure, 0.0, 1.0, "SubordinatorMechanism")
        for name in ("d", "c"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if self.d < 0.0 or self.c < 0.0:
            raise ValidationError("SubordinatorMechanism requires d >= 0 and c >= 0")

    def __call__(self, y):
        return eval_subordinator(self, y)

    @property
    def is_zero(self) -> bool:
        return self.measure.is_zero and self.d == 0.0 and self.c == 0.0

    def scaled(self, w: float) -> SubordinatorMechanism:
        return SubordinatorMechanism(self.measure.scaled(w), self.d * w, self.c * w)


@dataclass(frozen=True)
class NotUpMechanism:
    """Nonnegative spectrally positive exponent, triplet ``(nu, a, d)``."""

    measure: JumpMeasureSpec = field(default_factory=JumpMeasureSpec)
    a: float = 0.0
    d: float = 0.0

    def __post_init__(self) -> None:
        _check_measure(self.measure, 0.0, 2.0, "NotUpMechanism")
        for name in ("a", "d"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if self.a < 0.0 or self.d < 0.0:
            raise ValidationError("NotUpMechanism requires a >= 0 and d >= 0")

    def __call__(self, y):
        return eval_not_up(self, y)

    @property
    def is_zero(self) -> bool:
        return self.measure.is_zero and self.a == 0.0 and self.d == 0.0

    def scaled(self, w: float) -> NotUpMechanism:
        return NotUpMechanism(self.measure.scaled(w), self.a * w, self.d * w)


@dataclass(frozen=True)
class EnvMechanism:
    """Exponent of a Levy environment with jumps no smaller than -1, ``(nu, a, b, c)``."""

    measure: JumpMeasureSpec = field(default_factory=lambda: JumpMeasureSpec(support_floor=-1.0))
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0

    def __post_init__(self) -> None:
        _check_measure(self.measure, -1.0, 2.0, "EnvMechanism")
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if self.a < 0.0 or self.c < 0.0:
            raise ValidationError("EnvMechanism requires a >= 0 and c >= 0")

    def __call__(self, z):
        return eval_env(self, z)

    @property
    def is_zero(self) -> bool:
        return self.measure.is_zero and self.a == 0.0 and self.b == 0.0 and self.c == 0.0

    def scaled(self, w: float) -> EnvMechanism:
        return EnvMechanism(self.measure.scaled(w), self.a * w, self.b * w, self.c * w)


Mechanism = Union[SpLpMechanism, SubordinatorMechanism, NotUpMechanism, EnvMechanism]


def splp(atoms: Iterable = (), stable=None, a: float = 0.0, b: float = 0.0, c: float = 0.0) -> SpLpMechanism:
    """Build an ``SpLpMechanism`` from plain values."""
    return SpLpMechanism(_measure(atoms, stable, 0.0), a, b, c)


def subordinator(atoms: Iterable = (), stable=None, d: float = 0.0, c: float = 0.0) -> SubordinatorMechanism:
    """Build a ``SubordinatorMechanism`` from plain values."""
    return SubordinatorMechanism(_measure(atoms, stable, 0.0), d, c)


def not_up(atoms: Iterable = (), stable=None, a: float = 0.0, d: float = 0.0) -> NotUpMechanism:
    """Build a ``NotUpMechanism`` from plain values."""
    return NotUpMechanism(_measure(atoms, stable, 0.0), a, d)


def env(atoms: Iterable = (), stable=None, a: float = 0.0, b: float = 0.0, c: float = 0.0) -> EnvMechanism:
    """Build an ``EnvMechanism`` from plain values."""
    return EnvMechanism(_measure(atoms, stable, -1.0), a, b, c)


def _ret(out: np.ndarray, scalar: bool):
    return float(out[0]) if scalar else out


def eval_splp(m: SpLpMechanism, y):
    """Evaluate ``Psi(y)``.

    Examples
    --------
    >>> eval_splp(splp(a=1.0), 2.0)
    4.0
    """
    yy, scalar = _as_array(y)
    out = _compensated_atoms(m.measure, yy, 0.0, 1.0)
    if m.measure.stable is not None:
        out = out + m.measure.stable.scale * stable_compensated(yy, m.measure.stable.alpha)
    out = out + m.a * yy * yy - m.b * yy - m.c
    return _ret(out, scalar)


def eval_subordinator(m: SubordinatorMechanism, y):
    """Evaluate ``Phi(y)``; ``Phi(0) = c``."""
    yy, scalar = _as_array(y)
    out = np.zeros_like(yy)
    for u, mass in m.measure.atoms:
        out = out - mass * np.expm1(-u * yy)
    if m.measure.stable is not None:
        out = out + m.measure.stable.scale * stable_subordinator(yy, m.measure.stable.alpha)
    out = out + m.d * yy + m.c
    return _ret(out, scalar)


def eval_not_up(m: NotUpMechanism, y):
    """Evaluate ``Sigma(y)``; nonnegative with ``Sigma(0) = 0``."""
    yy, scalar = _as_array(y)
    out = _compensated_atoms(m.measure, yy, 0.0, math.inf)
    if m.measure.stable is not None:
        out = out + m.measure.stable.scale * stable_compensated(yy, m.measure.stable.alpha)
    out = out + m.a * yy * yy + m.d * yy
    return _ret(out, scalar)


def eval_env(m: EnvMechanism, z):
    """Evaluate ``kappa(z)``; ``kappa(0) = -c``."""
    zz, scalar = _as_array(z)
    out = _compensated_atoms(m.measure, zz, -1.0, 1.0)
    if m.measure.stable is not None:
        out = out + m.measure.stable.scale * stable_compensated(zz, m.measure.stable.alpha)
    out = out + m.a * zz * zz - m.b * zz - m.c
    return _ret(out, scalar)


def evaluate(m: Mechanism, y):
    """Dispatch to the evaluator matching the mechanism class."""
    if isinstance(m, SpLpMechanism):
        return eval_splp(m, y)
    if isinstance(m, SubordinatorMechanism):
        return eval_subordinator(m, y)
    if isinstance(m, NotUpMechanism):
        return eval_not_up(m, y)
    if isinstance(m, EnvMechanism):
        return eval_env(m, y)
    raise ValidationError(f"not a mechanism: {type(m).__name__}")


def derivative_at_zero(m: Mechanism) -> float:
    """Right derivative at 0, possibly infinite.

    The stable part sits on (0, 1], where ``SpLp`` compensation makes its
    contribution vanish; for a subordinator it adds ``scale / (1 - alpha)``.
    Atomic moments are always finite, so the result is finite here, but the
    return type is extended real and callers must branch on ``math.isinf``.

    Examples
    --------
    >>> derivative_at_zero(subordinator(stable={"alpha": 0.5, "scale": 1.0}))
    2.0
    """
    if isinstance(m, SpLpMechanism):
        return -m.b - math.fsum(u * w for u, w in m.measure.atoms if u > 1.0)
    if isinstance(m, SubordinatorMechanism):
        st = m.measure.stable
        tail = 0.0 if st is None else st.scale / (1.0 - st.alpha)
        return math.fsum([m.d, tail] + [u * w for u, w in m.measure.atoms])
    if isinstance(m, NotUpMechanism):
        return m.d
    if isinstance(m, EnvMechanism):
        return -m.b - math.fsum(u * w for u, w in m.measure.atoms if u > 1.0)
    raise ValidationError(f"not a mechanism: {type(m).__name__}")


def merge_mechanisms(first: Mechanism, second: Mechanism) -> Mechanism:
    """Sum of two mechanisms of the same class (measures added)."""
    if type(first) is not type(second):
        raise ValidationError("can only merge mechanisms of the same class")
    measure = first.measure.merged(second.measure)
    scalars = {k: getattr(first, k) + getattr(second, k) for k in _SCALARS[type(first)]}
    return replace(first, measure=measure, **scalars)


_CLASS_TOKENS: dict[str, type] = {
    "splp": SpLpMechanism,
    "subordinator": SubordinatorMechanism,
    "not_up": NotUpMechanism,
    "env": EnvMechanism,
}
_TOKEN_OF = {v: k for k, v in _CLASS_TOKENS.items()}
_SCALARS: dict[type, tuple[str, ...]] = {
    SpLpMechanism: ("a", "b", "c"),
    SubordinatorMechanism: ("d", "c"),
    NotUpMechanism: ("a", "d"),
    EnvMechanism: ("a", "b", "c"),
}
_FLOORS = {SpLpMechanism: 0.0, SubordinatorMechanism: 0.0, NotUpMechanism: 0.0, EnvMechanism: -1.0}


def mechanism_to_config(m: Mechanism) -> dict[str, Any]:
    """Serialize to ``{class, atoms, stable?, <scalars>}``; zero scalars are omitted."""
    cfg: dict[str, Any] = {"class": _TOKEN_OF[type(m)], "atoms": [[u, w] for u, w in m.measure.atoms]}
    if m.measure.stable is not None:
        cfg["stable"] = {"alpha": m.measure.stable.alpha, "scale": m.measure.stable.scale}
    for k in _SCALARS[type(m)]:
        v = getattr(m, k)
        if v != 0.0:
            cfg[k] = v
    return cfg


def mechanism_from_config(cfg: dict[str, Any], expected: type | None = None) -> Mechanism:
    """Parse a mechanism config, optionally requiring a class.

    Raises
    ------
    ValidationError
        Unknown class token, unknown keys, or any invariant violation.
    """
    if not isinstance(cfg, dict):
        raise ValidationError("mechanism config must be a mapping")
    token = cfg.get("class")
    if token not in _CLASS_TOKENS:
        raise ValidationError(f"unknown mechanism class {token!r}")
    cls = _CLASS_TOKENS[token]
    if expected is not None and cls is not expected:
        raise ValidationError(f"expected a {_TOKEN_OF[expected]} mechanism, got {token!r}")
    allowed = {"class", "atoms", "stable", *_SCALARS[cls]}
    extra = set(cfg) - allowed
    if extra:
        raise ValidationError(f"unknown keys for {token}: {sorted(extra)}")
    atoms = cfg.get("atoms") or []
    try:
        atoms = [(float(u), float(w)) for u, w in atoms]
    except (TypeError, ValueError) as exc:
        raise ValidationError("atoms must be a list of [location, mass] pairs") from exc
    stable = cfg.get("stable")
    if stable is not None:
        if not isinstance(stable, dict) or set(stable) != {"alpha", "scale"}:
            raise ValidationError("stable must be {alpha, scale}")
        stable = StableSpec(float(stable["alpha"]), float(stable["scale"]))
    measure = JumpMeasureSpec(tuple(atoms), stable, _FLOORS[cls])
    scalars = {k: float(cfg.get(k, 0.0)) for k in _SCALARS[cls]}
    return cls(measure, **scalars)
