"""Euler simulation of positive Markov processes driven by Poisson noise.

Every process is described by a :class:`ProcessSpec`. Stochastic kinds are
compiled into a flat term table (see ``_plan``) and advanced by the selected
kernel backend; deterministic kinds (flows, possibly killed) are evaluated
from :mod:`lapdual.flows` and only draw their Exp(1) killing thresholds.

Boundaries are states: paths hitting 0 (when 0 is a trap) or crossing the
explosion cap, or killed, are frozen there.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _backend
from ._plan import Plan, PlanBuilder
from .errors import ContractError, ValidationError
from .flows import cbi_flow
from .mechanisms import (
    EnvMechanism,
    NotUpMechanism,
    SpLpMechanism,
    SubordinatorMechanism,
    derivative_at_zero,
    eval_subordinator,
    merge_mechanisms,
    subordinator,
)
from .rng import PathRng, path_keys, uniforms
from .symbols import BivariateTerm, LdsSymbol, Product

__all__ = [
    "Kind",
    "Status",
    "ProcessSpec",
    "SimConfig",
    "PathState",
    "PathSample",
    "Trajectory",
    "ScreenResult",
    "compile_plan",
    "dual_spec",
    "is_dual_pair",
    "symbol_of",
    "non_explosion_screen",
    "step_cb",
    "step_cbc",
    "step_cbci",
    "step_cbre",
    "step_decomposable",
    "simulate_dual_killed_flow",
    "simulate_diffusion_dual",
    "run_paths",
    "write_trajectories",
]

DIFFUSIVE_FLOOR = 1e-12


class Kind(str, enum.Enum):
    CB = "cb"
    SUBORDINATOR = "subordinator"
    KILLED_CONSTANT = "killed_constant"
    DETERMINISTIC_FLOW = "deterministic_flow"
    KILLED_FLOW = "killed_flow"
    CBC = "cbc"
    DIFFUSION_DUAL = "diffusion_dual"
    CBCI = "cbci"
    CBCI_DUAL = "cbci_dual"
    CBRE = "cbre"
    CBRE_DUAL = "cbre_dual"
    DECOMPOSABLE = "decomposable"


class Status(enum.IntEnum):
    ALIVE = 0
    ABSORBED_ZERO = 1
    ABSORBED_INF = 2


# kernel codes: 0 alive, 1 zero, 2 killed, 3 exploded
_KILLED, _EXPLODED = 2, 3
_DETERMINISTIC = {Kind.KILLED_CONSTANT, Kind.DETERMINISTIC_FLOW, Kind.KILLED_FLOW}
_DIFFUSIVE_DUALS = {Kind.DIFFUSION_DUAL, Kind.CBCI_DUAL}

# fields each kind needs; the rest must stay at their zero default
_FIELDS: dict[Kind, tuple[str, ...]] = {
    Kind.CB: ("psi",),
    Kind.SUBORDINATOR: ("phi",),
    Kind.KILLED_CONSTANT: ("phi",),
    Kind.DETERMINISTIC_FLOW: ("psi",),
    Kind.KILLED_FLOW: ("psi", "phi"),
    Kind.CBC: ("psi", "sigma"),
    Kind.DIFFUSION_DUAL: ("sigma", "psi"),
    Kind.CBCI: ("psi", "sigma", "phi"),
    Kind.CBCI_DUAL: ("sigma", "psi", "phi"),
    Kind.CBRE: ("psi", "kappa"),
    Kind.CBRE_DUAL: ("psi", "kappa"),
    Kind.DECOMPOSABLE: ("sigma_pairs", "phi_pairs"),
}
_TYPES = {
    "psi": SpLpMechanism,
    "phi": SubordinatorMechanism,
    "sigma": NotUpMechanism,
    "kappa": EnvMechanism,
}


@dataclass(frozen=True)
class ProcessSpec:
    """Tagged description of one simulatable process.

    Use the classmethod constructors (``ProcessSpec.cb(psi)`` and so on);
    unused mechanism slots stay at zero.

    Attributes
    ----------
    kind : Kind
    psi, phi, sigma, kappa
        Branching, immigration or killing, collision, and environment
        mechanisms.
    sigma_pairs, phi_pairs
        Decomposable building blocks ``(hat, plain)``: the process jumps
        with the measure of ``plain`` at rate ``hat(x)``.
    zero_absorbing : bool
        Only for ``killed_constant`` and ``subordinator``: whether a path
        started at 0 is frozen there instead of being killed at rate
        ``Phi(0)`` or pushed up by the drift and jumps.
    """

    kind: Kind
    psi: SpLpMechanism = field(default_factory=SpLpMechanism)
    phi: SubordinatorMechanism = field(default_factory=SubordinatorMechanism)
    sigma: NotUpMechanism = field(default_factory=NotUpMechanism)
    kappa: EnvMechanism = field(default_factory=EnvMechanism)
    sigma_pairs: tuple[tuple[NotUpMechanism, NotUpMechanism], ...] = ()
    phi_pairs: tuple[tuple[SubordinatorMechanism, SubordinatorMechanism], ...] = ()
    zero_absorbing: bool = False

    def __post_init__(self) -> None:
        try:
            kind = Kind(self.kind)
        except ValueError:
            raise ValidationError(f"unknown process kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        for name, cls in _TYPES.items():
            if not isinstance(getattr(self, name), cls):
                raise ValidationError(f"{kind.value}: {name} must be a {cls.__name__}")
        used = _FIELDS[kind]
        for name in _TYPES:
            if name not in used and not getattr(self, name).is_zero:
                raise ValidationError(f"{kind.value} does not take a {name} mechanism")
        pairs = {"sigma_pairs": NotUpMechanism, "phi_pairs": SubordinatorMechanism}
        for name, cls in pairs.items():
            items = tuple(tuple(p) for p in getattr(self, name))
            if items and kind is not Kind.DECOMPOSABLE:
                raise ValidationError(f"{kind.value} does not take {name}")
            for p in items:
                if len(p) != 2 or not all(isinstance(m, cls) for m in p):
                    raise ValidationError(f"{name} entries must be pairs of {cls.__name__}")
            object.__setattr__(self, name, items)
        if self.zero_absorbing and kind not in (Kind.KILLED_CONSTANT, Kind.SUBORDINATOR):
            raise ValidationError("zero_absorbing only applies to killed_constant and subordinator")
        if kind in (Kind.CBRE, Kind.CBRE_DUAL):
            if self.kappa.c != 0.0:
                raise ValidationError("environment mechanism must have c = 0")
            if any(m == -1.0 for m, _ in self.kappa.measure.atoms):
                raise ValidationError("environment mechanism must not have an atom at -1")

    # constructors
    @classmethod
    def cb(cls, psi: SpLpMechanism) -> ProcessSpec:
        return cls(Kind.CB, psi=psi)

    @classmethod
    def subordinator(cls, phi: SubordinatorMechanism, zero_absorbing: bool = False) -> ProcessSpec:
        return cls(Kind.SUBORDINATOR, phi=phi, zero_absorbing=zero_absorbing)

    @classmethod
    def killed_constant(cls, phi: SubordinatorMechanism, zero_absorbing: bool = False) -> ProcessSpec:
        return cls(Kind.KILLED_CONSTANT, phi=phi, zero_absorbing=zero_absorbing)

    @classmethod
    def deterministic_flow(cls, psi: SpLpMechanism) -> ProcessSpec:
        return cls(Kind.DETERMINISTIC_FLOW, psi=psi)

    @classmethod
    def killed_flow(cls, psi: SpLpMechanism, phi: SubordinatorMechanism) -> ProcessSpec:
        return cls(Kind.KILLED_FLOW, psi=psi, phi=phi)

    @classmethod
    def cbc(cls, psi: SpLpMechanism, sigma: NotUpMechanism) -> ProcessSpec:
        return cls(Kind.CBC, psi=psi, sigma=sigma)

    @classmethod
    def diffusion_dual(cls, sigma: NotUpMechanism, psi: SpLpMechanism) -> ProcessSpec:
        return cls(Kind.DIFFUSION_DUAL, psi=psi, sigma=sigma)

    @classmethod
    def cbci(cls, psi: SpLpMechanism, sigma: NotUpMechanism, phi: SubordinatorMechanism) -> ProcessSpec:
        return cls(Kind.CBCI, psi=psi, sigma=sigma, phi=phi)

    @classmethod
    def cbci_dual(cls, sigma: NotUpMechanism, psi: SpLpMechanism, phi: SubordinatorMechanism) -> ProcessSpec:
        return cls(Kind.CBCI_DUAL, psi=psi, sigma=sigma, phi=phi)

    @classmethod
    def cbre(cls, psi: SpLpMechanism, kappa: EnvMechanism) -> ProcessSpec:
        return cls(Kind.CBRE, psi=psi, kappa=kappa)

    @classmethod
    def cbre_dual(cls, psi: SpLpMechanism, kappa: EnvMechanism) -> ProcessSpec:
        return cls(Kind.CBRE_DUAL, psi=psi, kappa=kappa)

    @classmethod
    def decomposable(cls, sigma_pairs: Sequence = (), phi_pairs: Sequence = ()) -> ProcessSpec:
        return cls(Kind.DECOMPOSABLE, sigma_pairs=tuple(sigma_pairs), phi_pairs=tuple(phi_pairs))

    @property
    def is_deterministic(self) -> bool:
        return self.kind in _DETERMINISTIC


@dataclass(frozen=True)
class SimConfig:
    """Discretization and Monte Carlo settings.

    ``absorption_floor=None`` picks 0, or ``1e-12`` for the diffusive duals
    where Euler steps can overshoot below zero.
    """

    step: float = 1e-3
    horizon: float = 1.0
    paths: int = 10_000
    seed: int = 0
    explosion_cap: float = 1e12
    small_jump_cut: float = 1e-3
    absorption_floor: float | None = None

    def __post_init__(self) -> None:
        for name in ("step", "horizon", "explosion_cap"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0.0):
                raise ValidationError(f"sim.{name} must be positive and finite")
            object.__setattr__(self, name, v)
        if not self.step < self.horizon:
            raise ValidationError("sim.step must be smaller than sim.horizon")
        if isinstance(self.paths, bool) or int(self.paths) != self.paths or self.paths < 1:
            raise ValidationError("sim.paths must be a positive integer")
        object.__setattr__(self, "paths", int(self.paths))
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValidationError("sim.seed must be an integer in [0, 2**64)")
        object.__setattr__(self, "seed", int(self.seed))
        eps = float(self.small_jump_cut)
        if not 0.0 < eps <= 1.0:
            raise ValidationError("sim.small_jump_cut must lie in (0, 1]")
        object.__setattr__(self, "small_jump_cut", eps)
        if self.absorption_floor is not None:
            fl = float(self.absorption_floor)
            if not (math.isfinite(fl) and fl >= 0.0):
                raise ValidationError("sim.absorption_floor must be finite and nonnegative")
            object.__setattr__(self, "absorption_floor", fl)

    def floor_for(self, kind: Kind) -> float:
        if self.absorption_floor is not None:
            return self.absorption_floor
        return DIFFUSIVE_FLOOR if kind in _DIFFUSIVE_DUALS else 0.0

    def steps_to(self, t: float) -> int:
        """Number of steps reaching time ``t``; ``t`` must be on the step grid."""
        n = round(t / self.step)
        if n < 0 or abs(n * self.step - t) > 1e-9 * max(t, self.step):
            raise ValidationError(f"time {t!r} is not a multiple of sim.step={self.step!r}")
        return int(n)


@dataclass(frozen=True)
class PathState:
    """State of one path.

    Attributes
    ----------
    value : float
        Current position, ``0`` or ``inf`` once absorbed.
    status : Status
    kill_clock : float
        Accumulated killing rate integral.
    kill_threshold : float
        Exp(1) draw; the path is killed when the clock reaches it.
    exploded : bool
        Whether an infinite value came from crossing the cap rather than
        from killing.
    """

    value: float
    status: Status = Status.ALIVE
    kill_clock: float = 0.0
    kill_threshold: float = math.inf
    exploded: bool = False

    @classmethod
    def start(cls, x: float, rng: PathRng | None = None) -> PathState:
        """Fresh state at ``x``; the threshold comes from ``rng`` when given."""
        x = float(x)
        if math.isnan(x) or x < 0.0:
            raise ValidationError("start value must be nonnegative")
        thr = rng.exp1() if rng is not None else math.inf
        if math.isinf(x):
            return cls(math.inf, Status.ABSORBED_INF, 0.0, thr)
        return cls(x, Status.ALIVE, 0.0, thr)


@dataclass
class PathSample:
    """Snapshots of ``n`` paths at the requested times.

    ``values[j, i]`` and ``codes[j, i]`` describe path ``i`` at ``times[j]``;
    codes are 0 alive, 1 absorbed at 0, 2 killed, 3 exploded.
    """

    times: tuple[float, ...]
    values: np.ndarray
    codes: np.ndarray

    def _row(self, t: float | None) -> int:
        if t is None:
            return len(self.times) - 1
        for j, s in enumerate(self.times):
            if abs(s - t) <= 1e-12 * max(1.0, t):
                return j
        raise KeyError(f"no snapshot at t={t!r}")

    def terminal(self, t: float | None = None) -> np.ndarray:
        return self.values[self._row(t)]

    def statuses(self, t: float | None = None) -> np.ndarray:
        """Codes mapped to :class:`Status` values (killed and exploded both ``ABSORBED_INF``)."""
        return np.minimum(self.codes[self._row(t)], Status.ABSORBED_INF)

    def frac_zero(self, t: float | None = None) -> float:
        return float(np.mean(self.codes[self._row(t)] == 1))

    def frac_inf(self, t: float | None = None) -> float:
        return float(np.mean(self.codes[self._row(t)] >= _KILLED))

    def frac_exploded(self, t: float | None = None) -> float:
        return float(np.mean(self.codes[self._row(t)] == _EXPLODED))

    @property
    def n(self) -> int:
        return self.values.shape[1]


@dataclass
class Trajectory:
    """One path sampled on a time grid."""

    times: np.ndarray
    values: np.ndarray
    statuses: np.ndarray

    @property
    def final(self) -> PathState:
        code = int(self.statuses[-1])
        return PathState(float(self.values[-1]), Status(min(code, 2)), exploded=code == _EXPLODED)


@dataclass(frozen=True)
class ScreenResult:
    """Outcome of the analytic non-explosion screen."""

    holds: bool
    reason: str

    def __bool__(self) -> bool:
        return self.holds


# ---------------------------------------------------------------- compile


def _add_cb(b: PlanBuilder, psi: SpLpMechanism) -> None:
    p1 = b.power(1)
    b.add_var(2.0 * psi.a, p1)
    b.add_linear(psi.b)
    b.add_measure(psi.measure, p1, compensate_upto=1.0)
    b.add_kill(psi.c, p1)


def _add_collision(b: PlanBuilder, sigma: NotUpMechanism) -> None:
    p2 = b.power(2)
    b.add_var(2.0 * sigma.a, p2)
    b.add_drift(-sigma.d, p2)
    b.add_measure(sigma.measure, p2, compensate_upto=math.inf)


def _add_immigration(b: PlanBuilder, phi: SubordinatorMechanism, rate: int) -> None:
    b.add_drift(phi.d, rate)
    b.add_measure(phi.measure, rate, compensate_upto=-1.0)
    b.add_kill(phi.c, rate)


def _add_environment(b: PlanBuilder, kappa: EnvMechanism) -> None:
    b.add_var(2.0 * kappa.a, b.power(2))
    b.add_linear(kappa.b)
    b.add_measure(kappa.measure, b.power(0), compensate_upto=1.0, mult=True)


@lru_cache(maxsize=256)
def compile_plan(spec: ProcessSpec, eps: float = 1e-3, cap: float = 1e12, floor: float = 0.0) -> Plan:
    """Translate a stochastic spec into kernel terms.

    Raises
    ------
    ValidationError
        For deterministic kinds, which are not stepped by the kernel.
    """
    b = PlanBuilder(eps)
    k = spec.kind
    if k is Kind.CB:
        _add_cb(b, spec.psi)
    elif k is Kind.SUBORDINATOR:
        _add_immigration(b, spec.phi, b.power(0))
        b.force_trap = spec.zero_absorbing
    elif k in (Kind.CBC, Kind.CBCI):
        _add_cb(b, spec.psi)
        _add_collision(b, spec.sigma)
        if k is Kind.CBCI:
            _add_immigration(b, spec.phi, b.power(0))
    elif k in _DIFFUSIVE_DUALS:
        b.add_var(2.0, b.mech(spec.sigma))
        b.add_drift(-1.0, b.mech(spec.psi))
        if k is Kind.CBCI_DUAL:
            b.add_kill(1.0, b.mech(spec.phi))
        b.force_trap = True
    elif k is Kind.CBRE:
        _add_cb(b, spec.psi)
        _add_environment(b, spec.kappa)
    elif k is Kind.CBRE_DUAL:
        b.add_drift(-1.0, b.mech(spec.psi))
        _add_environment(b, spec.kappa)
    elif k is Kind.DECOMPOSABLE:
        for hat, plain in spec.sigma_pairs:
            r = b.mech(hat)
            b.add_var(2.0 * plain.a, r)
            b.add_drift(-plain.d, r)
            b.add_measure(plain.measure, r, compensate_upto=math.inf)
        for hat, plain in spec.phi_pairs:
            _add_immigration(b, plain, b.mech(hat))
    else:
        raise ValidationError(f"{k.value} is deterministic and has no step plan")
    return b.build(floor=floor, cap=cap)


# ---------------------------------------------------------------- duals and symbols

_DUAL_KIND = {
    Kind.CB: Kind.DETERMINISTIC_FLOW,
    Kind.SUBORDINATOR: Kind.KILLED_CONSTANT,
    Kind.CBC: Kind.DIFFUSION_DUAL,
    Kind.CBCI: Kind.CBCI_DUAL,
    Kind.CBRE: Kind.CBRE_DUAL,
}
_DUAL_KIND.update({v: k for k, v in list(_DUAL_KIND.items())})


def dual_spec(spec: ProcessSpec) -> ProcessSpec:
    """The Laplace dual of ``spec``.

    A CBCI without collisions maps to the killed flow; a killed flow maps
    back to a CBCI with zero collision mechanism. Decomposable specs swap
    hatted and plain roles.
    """
    k = spec.kind
    if k is Kind.DECOMPOSABLE:
        return ProcessSpec.decomposable(
            tuple((p, h) for h, p in spec.sigma_pairs), tuple((p, h) for h, p in spec.phi_pairs)
        )
    if k is Kind.CBCI and spec.sigma.is_zero:
        return ProcessSpec.killed_flow(spec.psi, spec.phi)
    if k is Kind.KILLED_FLOW:
        return ProcessSpec.cbci(spec.psi, NotUpMechanism(), spec.phi)
    if k is Kind.KILLED_CONSTANT:
        return ProcessSpec.subordinator(spec.phi)
    if k is Kind.SUBORDINATOR:
        return ProcessSpec.killed_constant(spec.phi)
    return replace(spec, kind=_DUAL_KIND[k])


def is_dual_pair(x: ProcessSpec, y: ProcessSpec) -> bool:
    """Whether ``y`` is a recognized dual of ``x`` (in either orientation).

    Both killed-constant variants count as duals of the subordinator, and a
    CBCI without collisions accepts either the killed flow or the
    collision-free diffusive dual.
    """
    kinds = {x.kind, y.kind}
    if kinds == {Kind.SUBORDINATOR, Kind.KILLED_CONSTANT}:
        return x.phi == y.phi
    if kinds == {Kind.CBCI, Kind.CBCI_DUAL}:
        return (x.psi, x.sigma, x.phi) == (y.psi, y.sigma, y.phi)
    if kinds == {Kind.CBCI, Kind.KILLED_FLOW}:
        return x.sigma.is_zero and y.sigma.is_zero and (x.psi, x.phi) == (y.psi, y.phi)
    if x.kind is Kind.KILLED_FLOW or x.kind is Kind.KILLED_CONSTANT:
        x, y = y, x
    try:
        return dual_spec(x) == y
    except KeyError:
        return False


def _unit_phi() -> SubordinatorMechanism:
    return subordinator(c=1.0)


def symbol_of(spec: ProcessSpec) -> LdsSymbol:
    """Laplace symbol ``psi(x, y)`` of the process described by ``spec``.

    Terms that are a function of ``y`` alone are written as products with
    the constant subordinator ``Phi = 1``.
    """
    k = spec.kind
    one = _unit_phi()
    if k is Kind.DECOMPOSABLE:
        return LdsSymbol(
            big_sigma=BivariateTerm("sigma", products=tuple(Product(h, p) for h, p in spec.sigma_pairs)),
            big_phi=BivariateTerm("phi", products=tuple(Product(h, p) for h, p in spec.phi_pairs)),
        )
    if k is Kind.KILLED_CONSTANT:
        return LdsSymbol(big_phi=BivariateTerm("phi", products=(Product(spec.phi, one),)))
    if k in (Kind.DETERMINISTIC_FLOW, Kind.DIFFUSION_DUAL, Kind.CBCI_DUAL, Kind.KILLED_FLOW, Kind.CBRE_DUAL):
        from .symbols import dual_symbol

        return dual_symbol(symbol_of(dual_spec(spec)))
    phi_term = BivariateTerm("phi")
    if k in (Kind.SUBORDINATOR, Kind.CBCI) and not spec.phi.is_zero:
        phi_term = BivariateTerm("phi", products=(Product(one, spec.phi),))
    return LdsSymbol(psi=spec.psi, sigma=spec.sigma, big_phi=phi_term, kappa=spec.kappa)


def non_explosion_screen(spec: ProcessSpec) -> ScreenResult:
    """Analytic sufficient conditions for non-explosion.

    Decomposable specs need ``Phi = sum Phi_i`` and ``Phi_hat = sum Phi_hat_i``
    to vanish at 0 with a finite derivative there (so ``1/Phi`` is not
    integrable at 0). CBCI-type specs need ``Psi(0) = Phi(0) = 0``, a finite
    ``Psi'(0)`` and either ``Psi'(0) >= 0`` or ``Phi'(0) < inf``. The atomic
    and truncated-stable measures used here always have finite first moments,
    so the derivative conditions are checked for completeness.
    """
    k = spec.kind
    if k is Kind.DECOMPOSABLE:
        for label, pairs in (("Phi_hat", [h for h, _ in spec.phi_pairs]), ("Phi", [p for _, p in spec.phi_pairs])):
            if not pairs:
                continue
            total = pairs[0]
            for m in pairs[1:]:
                total = merge_mechanisms(total, m)
            if total.c != 0.0:
                return ScreenResult(False, f"{label}(0) > 0")
            if math.isinf(derivative_at_zero(total)):
                return ScreenResult(False, f"{label}'(0) is infinite")
        return ScreenResult(True, "Phi and Phi_hat vanish at 0 with finite slope")
    if k in (Kind.CB, Kind.CBC, Kind.CBCI, Kind.CBRE):
        psi = spec.psi
        if psi.c != 0.0:
            return ScreenResult(False, "Psi(0) != 0")
        if spec.phi.c != 0.0:
            return ScreenResult(False, "Phi(0) != 0")
        d_psi = derivative_at_zero(psi)
        if not math.isfinite(d_psi):
            return ScreenResult(False, "Psi'(0) is not finite")
        if d_psi >= 0.0 or math.isfinite(derivative_at_zero(spec.phi)):
            return ScreenResult(True, "Psi'(0) finite and Phi'(0) finite")
        return ScreenResult(False, "Psi'(0) < 0 with infinite Phi'(0)")
    if k is Kind.SUBORDINATOR:
        return ScreenResult(True, "subordinators do not explode")
    return ScreenResult(True, f"{k.value}: no explosion mechanism beyond its dual's")


# ---------------------------------------------------------------- one-step API


def _rng_coords(rng: PathRng) -> tuple[np.ndarray, int]:
    return np.array([rng.key], dtype=np.uint64), rng.step


def _step_spec(state: PathState, spec: ProcessSpec, h: float, rng: PathRng, eps: float, cap: float, floor: float):
    if not h > 0.0:
        raise ValidationError("step size must be positive")
    if state.status is not Status.ALIVE:
        rng.step += 1
        return state
    plan = compile_plan(spec, eps, cap, floor)
    x = np.array([state.value], dtype=np.float64)
    st = np.zeros(1, dtype=np.int8)
    clock = np.array([state.kill_clock], dtype=np.float64)
    thr = np.array([state.kill_threshold], dtype=np.float64)
    keys, step = _rng_coords(rng)
    out_x = np.empty((0, 1))
    out_st = np.empty((0, 1), dtype=np.int8)
    _backend.get().advance(plan, x, st, clock, thr, keys, step, 1, float(h), np.empty(0, np.int64), out_x, out_st)
    rng.step += 1
    code = int(st[0])
    return PathState(
        float(x[0]), Status(min(code, 2)), float(clock[0]), state.kill_threshold, exploded=code == _EXPLODED
    )


def step_cb(state: PathState, psi: SpLpMechanism, h: float, rng: PathRng, *, eps=1e-3, cap=1e12, floor=0.0):
    """One Euler step of the CB dynamics; ``rng.step`` is advanced.

    Examples
    --------
    >>> from lapdual.mechanisms import splp
    >>> step_cb(PathState.start(3.0), splp(), 0.1, PathRng(1)).value
    3.0
    """
    return _step_spec(state, ProcessSpec.cb(psi), h, rng, eps, cap, floor)


def step_cbc(state, psi, sigma, h, rng, *, eps=1e-3, cap=1e12, floor=0.0) -> PathState:
    """CB step plus collisions at rate ``x**2``, fully compensated."""
    return _step_spec(state, ProcessSpec.cbc(psi, sigma), h, rng, eps, cap, floor)


def step_cbci(state, psi, sigma, phi, h, rng, *, eps=1e-3, cap=1e12, floor=0.0) -> PathState:
    """CBC step plus uncompensated immigration driven by ``phi``."""
    return _step_spec(state, ProcessSpec.cbci(psi, sigma, phi), h, rng, eps, cap, floor)


def step_cbre(state, psi, kappa, h, rng, *, eps=1e-3, cap=1e12, floor=0.0) -> PathState:
    """CB step plus the multiplicative environment ``x -> x (1 + m)``."""
    return _step_spec(state, ProcessSpec.cbre(psi, kappa), h, rng, eps, cap, floor)


def step_decomposable(
    state, sigma_pairs, phi_pairs, h, rng, *, dual: bool = False, eps=1e-3, cap=1e12, floor=0.0
) -> PathState:
    """Step of the decomposable process; ``dual=True`` swaps the roles."""
    spec = ProcessSpec.decomposable(sigma_pairs, phi_pairs)
    if dual:
        spec = dual_spec(spec)
    return _step_spec(state, spec, h, rng, eps, cap, floor)


# ---------------------------------------------------------------- trajectories


def _thresholds(keys: np.ndarray) -> np.ndarray:
    return -np.log(uniforms(keys, 0, 1, 0))


def simulate_dual_killed_flow(
    psi: SpLpMechanism,
    phi: SubordinatorMechanism,
    y0: float,
    T: float,
    tol: float = 1e-10,
    rng: PathRng | None = None,
    n_points: int = 11,
    frozen: bool = False,
) -> Trajectory:
    """Flow ``u_t(y0)`` killed at rate ``Phi(u_t)``, sent to ``inf`` on killing.

    With ``frozen=True`` the flow is replaced by the constant ``y0`` and the
    rate by ``Phi(y0)``.
    """
    rng = rng if rng is not None else PathRng(0)
    thr = rng.exp1()
    times = np.linspace(0.0, float(T), int(n_points))
    vals = np.empty_like(times)
    codes = np.zeros(times.size, dtype=np.int8)
    for j, t in enumerate(times):
        u, H, boom = _killed_flow_point(psi, phi, float(y0), float(t), tol, frozen)
        if H >= thr:
            vals[j], codes[j] = math.inf, _KILLED
        elif boom:
            vals[j], codes[j] = math.inf, _EXPLODED
        else:
            vals[j] = u
    return Trajectory(times, vals, codes)


def _killed_flow_point(psi, phi, y, t, tol, frozen) -> tuple[float, float, bool]:
    """``(u_t(y), int_0^t Phi(u_s) ds, blew_up)``."""
    if math.isinf(y):
        return math.inf, math.inf, False
    if frozen:
        rate = float(eval_subordinator(phi, y))
        return y, rate * t, False
    r = cbi_flow(psi, phi, y, t, tol)
    H = -math.log(r.killed_weight) if r.killed_weight > 0.0 else math.inf
    return r.u, H, r.blow_up


def simulate_diffusion_dual(
    sigma: NotUpMechanism,
    psi: SpLpMechanism,
    y0: float,
    T: float,
    h: float,
    rng: PathRng | None = None,
    phi: SubordinatorMechanism | None = None,
    cap: float = 1e12,
    floor: float = DIFFUSIVE_FLOOR,
) -> Trajectory:
    """Euler-Maruyama path of ``dY = sqrt(2 Sigma(Y)) dW - Psi(Y) dt``.

    With ``phi`` the path is also killed at rate ``Phi(Y)``.
    """
    rng = rng if rng is not None else PathRng(0)
    spec = ProcessSpec.diffusion_dual(sigma, psi) if phi is None else ProcessSpec.cbci_dual(sigma, psi, phi)
    cfg = SimConfig(step=h, horizon=T, paths=1, seed=rng.seed, explosion_cap=cap, absorption_floor=floor)
    n = cfg.steps_to(T)
    sample = _run_kernel(spec, float(y0), cfg, np.arange(n + 1, dtype=np.int64), rng.path)
    rng.step += n
    return Trajectory(np.arange(n + 1) * h, sample[0][:, 0], sample[1][:, 0])


# ---------------------------------------------------------------- batch runner


def _run_kernel(spec, x0, cfg, snaps, path_offset=0, n=None, backend=None):
    n = cfg.paths if n is None else n
    floor = cfg.floor_for(spec.kind)
    plan = compile_plan(spec, cfg.small_jump_cut, cfg.explosion_cap, floor)
    keys = path_keys(cfg.seed, np.arange(path_offset, path_offset + n, dtype=np.uint64))
    x = np.full(n, x0, dtype=np.float64)
    st = np.zeros(n, dtype=np.int8)
    if math.isinf(x0):
        st[:] = _KILLED
    elif x0 <= floor and plan.zero_trap:
        x[:] = 0.0
        st[:] = 1
    clock = np.zeros(n)
    thr = _thresholds(keys) if plan.has_kill else np.full(n, math.inf)
    out_x = np.empty((len(snaps), n))
    out_st = np.empty((len(snaps), n), dtype=np.int8)
    n_steps = int(snaps[-1]) if len(snaps) else 0
    _backend.get(backend).advance(plan, x, st, clock, thr, keys, 0, n_steps, cfg.step, snaps, out_x, out_st)
    return out_x, out_st


def _run_deterministic(spec, x0, cfg, times, path_offset=0):
    n = cfg.paths
    keys = path_keys(cfg.seed, np.arange(path_offset, path_offset + n, dtype=np.uint64))
    thr = _thresholds(keys)
    vals = np.empty((len(times), n))
    codes = np.zeros((len(times), n), dtype=np.int8)
    frozen = spec.kind is Kind.KILLED_CONSTANT
    phi = spec.phi if spec.kind is not Kind.DETERMINISTIC_FLOW else None
    for j, t in enumerate(times):
        if math.isinf(x0):
            vals[j], codes[j] = math.inf, _KILLED
            continue
        if frozen and spec.zero_absorbing and x0 == 0.0:
            vals[j], codes[j] = 0.0, 1
            continue
        if phi is None:
            r = cbi_flow(spec.psi, None, x0, t)
            u, H, boom = r.u, 0.0, r.blow_up
        else:
            u, H, boom = _killed_flow_point(spec.psi, phi, x0, t, 1e-10, frozen)
        killed = H >= thr
        vals[j] = np.where(killed | boom, math.inf, u)
        codes[j] = np.where(killed, _KILLED, _EXPLODED if boom else (1 if u == 0.0 and not frozen else 0))
    return vals, codes


def run_paths(
    spec: ProcessSpec,
    x0: float,
    cfg: SimConfig,
    times: Sequence[float] | None = None,
    *,
    path_offset: int = 0,
    backend: str | None = None,
) -> PathSample:
    """Simulate ``cfg.paths`` independent paths from ``x0``.

    Parameters
    ----------
    spec : ProcessSpec
    x0 : float
        Start, possibly ``inf`` (every path is then at ``inf``).
    cfg : SimConfig
    times : sequence of float, optional
        Snapshot times on the step grid; defaults to ``(cfg.horizon,)``.
    path_offset : int
        Index of the first path, for batching runs over disjoint substreams.
    backend : str, optional
        ``"cython"`` or ``"python"``; defaults to the selected backend.

    Returns
    -------
    PathSample
    """
    if not isinstance(spec, ProcessSpec):
        raise ValidationError("run_paths needs a ProcessSpec")
    x0 = float(x0)
    if math.isnan(x0) or x0 < 0.0:
        raise ValidationError("x0 must be nonnegative")
    times = tuple(float(t) for t in (times if times is not None else (cfg.horizon,)))
    if not times or any(t < 0.0 or not math.isfinite(t) for t in times):
        raise ValidationError("snapshot times must be finite and nonnegative")
    if list(times) != sorted(times):
        raise ValidationError("snapshot times must be sorted")
    if spec.is_deterministic:
        vals, codes = _run_deterministic(spec, x0, cfg, times, path_offset)
    else:
        snaps = np.array([cfg.steps_to(t) for t in times], dtype=np.int64)
        vals, codes = _run_kernel(spec, x0, cfg, snaps, path_offset, backend=backend)
    return PathSample(times, vals, codes)


def write_trajectories(sample: PathSample, path: str, max_paths: int | None = None) -> None:
    """Dump snapshots as CSV rows ``path_id,t,value,status``."""
    n = sample.n if max_paths is None else min(max_paths, sample.n)
    names = {0: "alive", 1: "zero", 2: "inf", 3: "inf"}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path_id", "t", "value", "status"])
        for i in range(n):
            for j, t in enumerate(sample.times):
                w.writerow([i, repr(t), repr(float(sample.values[j, i])), names[int(sample.codes[j, i])]])
