"""Deterministic flows ``du/ds = -Psi(u)`` and the CB / CBI Laplace transforms.

The flow is integrated with an embedded Dormand-Prince 5(4) pair on the
augmented state ``(u, H)`` where ``dH/ds = Phi(u)``. The CBI survival factor
``exp(-H_t)`` therefore shares the adaptive mesh of the flow itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import StiffnessError, ValidationError
from .mechanisms import SpLpMechanism, SubordinatorMechanism, eval_splp, eval_subordinator, splp

__all__ = [
    "FlowResult",
    "cb_flow",
    "cbi_flow",
    "cb_laplace",
    "cbi_laplace",
    "flow_semigroup_gap",
    "FlowCase",
    "random_flow_cases",
    "subordinator_limit",
    "BLOW_UP_CAP",
    "POSITIVITY_FLOOR",
]

BLOW_UP_CAP = 1e12
POSITIVITY_FLOOR = 1e-300
DEFAULT_TOL = 1e-10
_MAX_STEPS = 1_000_000

# Dormand-Prince tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


@dataclass(frozen=True)
class FlowResult:
    """Value of the flow at the requested time.

    Attributes
    ----------
    u : float
        ``u_t(y)``; ``inf`` after blow-up.
    killed_weight : float
        ``exp(-int_0^t Phi(u_s) ds)``; 1 when no ``Phi`` is given.
    steps_used : int
        Accepted steps.
    blow_up : bool
        Whether ``u`` crossed the cap before ``t``.
    """

    u: float
    killed_weight: float
    steps_used: int
    blow_up: bool


def subordinator_limit(phi: SubordinatorMechanism) -> float:
    """``lim_{y -> inf} Phi(y)``: infinite with drift or a stable part."""
    if phi.d > 0.0 or phi.measure.stable is not None:
        return math.inf
    return math.fsum([phi.c] + [m for _, m in phi.measure.atoms])


def cbi_flow(
    psi: SpLpMechanism,
    phi: SubordinatorMechanism | None,
    y: float,
    t: float,
    tol: float = DEFAULT_TOL,
) -> FlowResult:
    """Integrate ``u' = -Psi(u)``, ``H' = Phi(u)`` from ``(y, 0)`` to time ``t``.

    Raises
    ------
    StiffnessError
        If the step size falls below ``1e-14 * max(t, 1)``.
    """
    y = float(y)
    t = float(t)
    if not (y >= 0.0 and math.isfinite(y)):
        raise ValidationError("flow start must be finite and nonnegative")
    if not (t >= 0.0 and math.isfinite(t)):
        raise ValidationError("flow time must be finite and nonnegative")
    if not tol > 0.0:
        raise ValidationError("tol must be positive")

    def rhs(u: float) -> tuple[float, float]:
        du = -eval_splp(psi, u)
        dh = 0.0 if phi is None else eval_subordinator(phi, u)
        return du, dh

    if t == 0.0:
        return FlowResult(y, 1.0, 0, False)
    if psi.is_zero and phi is None:
        return FlowResult(y, 1.0, 0, False)
    if y == 0.0 and psi.c == 0.0:
        # 0 is a fixed point of the flow
        w = 1.0 if phi is None else math.exp(-phi.c * t)
        return FlowResult(0.0, w, 0, False)

    u, H, s = y, 0.0, 0.0
    h = min(t, 1e-2 / max(1.0, abs(rhs(u)[0])))
    h_min = 1e-14 * max(t, 1.0)
    k1 = rhs(u)
    steps = 0
    while s < t:
        if steps >= _MAX_STEPS:
            raise StiffnessError("flow exceeded the step budget")
        h = min(h, t - s)
        ks = [k1]
        for i in range(1, 7):
            ui = u + h * sum(a * k[0] for a, k in zip(_A[i], ks))
            ks.append(rhs(max(ui, 0.0)))
        u5 = u + h * math.fsum(b * k[0] for b, k in zip(_B5, ks))
        H5 = H + h * math.fsum(b * k[1] for b, k in zip(_B5, ks))
        eu = h * math.fsum(e * k[0] for e, k in zip(_E, ks))
        eh = h * math.fsum(e * k[1] for e, k in zip(_E, ks))
        err = max(abs(eu) / (tol * max(1.0, abs(u), abs(u5))), abs(eh) / (tol * max(1.0, abs(H5))))
        if not math.isfinite(err):
            err = math.inf
        if err <= 1.0:
            s = t if h >= t - s else s + h
            u = max(u5, POSITIVITY_FLOOR)
            H = H5
            k1 = ks[6] if u == u5 else rhs(u)
            steps += 1
            if u > BLOW_UP_CAP:
                rest = t - s
                tail = 0.0
                if phi is not None and rest > 0.0:
                    tail = subordinator_limit(phi) * rest
                return FlowResult(math.inf, math.exp(-(H + tail)), steps, True)
        factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h = h * factor
        if h < h_min and s < t:
            raise StiffnessError(f"step size underflow at s={s!r}, u={u!r}")
    return FlowResult(u, math.exp(-H) if phi is not None else 1.0, steps, False)


def cb_flow(psi: SpLpMechanism, y: float, t: float, tol: float = DEFAULT_TOL) -> FlowResult:
    """``u_t(y)`` for ``du/ds = -Psi(u)``, ``u_0 = y``.

    Examples
    --------
    >>> from lapdual.mechanisms import splp
    >>> round(cb_flow(splp(a=1.0), 1.0, 1.0).u, 9)
    0.5
    """
    return cbi_flow(psi, None, y, t, tol)


def cb_laplace(psi: SpLpMechanism, x: float, y: float, t: float, tol: float = DEFAULT_TOL) -> float:
    """``E_x[exp(-X_t y)] = exp(-x u_t(y))`` for the CB process with mechanism ``psi``."""
    if x == 0.0:
        return 1.0
    r = cb_flow(psi, y, t, tol)
    if r.blow_up:
        return 0.0
    return math.exp(-x * r.u)


def cbi_laplace(
    psi: SpLpMechanism,
    phi: SubordinatorMechanism,
    x: float,
    y: float,
    t: float,
    tol: float = DEFAULT_TOL,
) -> float:
    """``exp(-x u_t(y) - int_0^t Phi(u_s(y)) ds)`` for the CBI process."""
    r = cbi_flow(psi, phi, y, t, tol)
    if r.blow_up:
        return 0.0 if x > 0.0 else r.killed_weight
    return math.exp(-x * r.u) * r.killed_weight


def flow_semigroup_gap(psi: SpLpMechanism, y: float, t: float, s: float, tol: float = DEFAULT_TOL) -> float:
    """``|u_{t+s}(y) - u_t(u_s(y))|``; 0 when both sides blow up."""
    direct = cb_flow(psi, y, t + s, tol)
    mid = cb_flow(psi, y, s, tol)
    if mid.blow_up:
        return 0.0 if direct.blow_up else math.inf
    two = cb_flow(psi, mid.u, t, tol)
    if direct.blow_up or two.blow_up:
        return 0.0 if direct.blow_up == two.blow_up else math.inf
    return abs(direct.u - two.u)


@dataclass(frozen=True)
class FlowCase:
    psi: SpLpMechanism
    y: float
    t: float
    s: float


def random_flow_cases(seed: int, n: int) -> list[FlowCase]:
    """``n`` random branching mechanisms with start points and two durations.

    Each mechanism gets one to three atoms on ``(0, 3)``, a stable part half
    of the time, and random ``a >= 0``, real ``b`` and ``c >= 0``.
    """
    g = np.random.default_rng(seed)
    out = []
    for _ in range(int(n)):
        atoms = [(float(g.uniform(0.05, 3.0)), float(g.uniform(0.05, 1.0))) for _ in range(g.integers(1, 4))]
        stable = None
        if g.random() < 0.5:
            stable = {"alpha": float(g.uniform(0.2, 1.9)), "scale": float(g.uniform(0.05, 1.0))}
        psi = splp(atoms, stable, a=float(g.uniform(0.0, 1.0)), b=float(g.normal()), c=float(g.uniform(0.0, 0.5)))
        out.append(FlowCase(psi, float(g.uniform(0.0, 5.0)), float(g.uniform(0.05, 2.0)), float(g.uniform(0.05, 2.0))))
    return out
