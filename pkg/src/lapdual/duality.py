"""Monte Carlo and closed-form Laplace transforms, and the checks built on them.

Both sides of ``E_x[exp(-X_t y)] = E^y[exp(-x Y_t)]`` are estimated on a grid
of ``(x, y, t)``, each side from its own random stream, and compared through
z-scores. Boundary values are scored with :func:`~lapdual.symbols.exp_conv`
so the chosen convention pair is honored exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ContractError, ValidationError
from .flows import cbi_flow, subordinator_limit
from .mechanisms import eval_subordinator
from .paths import Kind, ProcessSpec, SimConfig, is_dual_pair, run_paths
from .rng import side_seed
from .symbols import DEFAULT_CONVENTION, ConventionPair, LdsSymbol, exp_conv, exp_conv_array, pregenerator_apply

__all__ = [
    "McEstimate",
    "DualityRow",
    "DualityReport",
    "CmResult",
    "FdRow",
    "mc_laplace",
    "laplace_table",
    "analytic_laplace",
    "duality_gap",
    "z_score",
    "cm_check",
    "generator_fd_check",
    "null_z_scores",
    "BoundaryRow",
    "BoundaryReport",
    "boundary_pair",
    "boundary_probability",
    "boundary_identities",
]

INF = math.inf
# gaps below this count as round-off when both sides are exact
ROUNDOFF = 1e-12


@dataclass(frozen=True)
class McEstimate:
    """Sample mean of a ``[0, 1]``-valued score.

    ``stderr`` uses the population standard deviation, so it never exceeds
    ``0.5 / sqrt(n)``. Exact values carry ``n = 0`` and ``stderr = 0``.
    """

    mean: float
    stderr: float
    n: int
    frac_zero: float = 0.0
    frac_inf: float = 0.0
    frac_exploded: float = 0.0

    @classmethod
    def exact(cls, value: float) -> McEstimate:
        return cls(float(value), 0.0, 0)

    @classmethod
    def from_scores(cls, scores: np.ndarray, codes: np.ndarray) -> McEstimate:
        n = scores.size
        return cls(
            float(np.mean(scores)),
            float(np.std(scores) / math.sqrt(n)),
            n,
            float(np.mean(codes == 1)),
            float(np.mean(codes >= 2)),
            float(np.mean(codes == 3)),
        )

    @property
    def is_exact(self) -> bool:
        return self.n == 0


def z_score(left: McEstimate, right: McEstimate) -> tuple[float, float]:
    """``(gap, z)`` with ``gap = left - right``.

    With both sides exact, ``z`` is 0 when the gap is within round-off and
    ``+-inf`` otherwise.
    """
    gap = left.mean - right.mean
    se = math.hypot(left.stderr, right.stderr)
    if se == 0.0:
        return gap, 0.0 if abs(gap) <= ROUNDOFF else math.copysign(INF, gap)
    return gap, gap / se


def laplace_table(
    spec: ProcessSpec,
    x0: float,
    ys: Sequence[float],
    ts: Sequence[float],
    cfg: SimConfig,
    conv: ConventionPair = DEFAULT_CONVENTION,
    *,
    transpose: bool = False,
    backend: str | None = None,
) -> dict[tuple[float, float], McEstimate]:
    """Estimates keyed by ``(y, t)`` from a single batch of paths started at ``x0``.

    With ``transpose=True`` the score is ``exp_conv(y, value)``, as needed on
    the dual side of an identity.
    """
    times = sorted(set(float(t) for t in ts))
    sample = run_paths(spec, x0, cfg, times, backend=backend)
    out = {}
    for t in times:
        vals, codes = sample.terminal(t), sample.codes[sample._row(t)]
        for y in ys:
            y = float(y)
            scores = exp_conv_array(y, vals, conv) if transpose else exp_conv_array(vals, y, conv)
            out[(y, t)] = McEstimate.from_scores(scores, codes)
    return out


def mc_laplace(
    spec: ProcessSpec,
    x0: float,
    y: float,
    t: float,
    cfg: SimConfig,
    conv: ConventionPair = DEFAULT_CONVENTION,
    *,
    backend: str | None = None,
) -> McEstimate:
    """Monte Carlo estimate of ``E_x0[exp_conv(X_t, y)]``.

    Examples
    --------
    >>> from lapdual.mechanisms import splp
    >>> cfg = SimConfig(step=0.5, horizon=5.0, paths=4, seed=1)
    >>> round(mc_laplace(ProcessSpec.cb(splp()), 2.0, 1.0, 5.0, cfg).mean, 7)
    0.1353353
    """
    return laplace_table(spec, x0, [y], [t], cfg, conv, backend=backend)[(float(y), float(t))]


# ---------------------------------------------------------------- closed forms


def _flow(psi, phi, y, t):
    r = cbi_flow(psi, phi, y, t)
    return (INF if r.blow_up else r.u), r.killed_weight


def analytic_laplace(
    spec: ProcessSpec, x: float, y: float, t: float, conv: ConventionPair = DEFAULT_CONVENTION
) -> float | None:
    """``E_x[exp_conv(X_t, y)]`` in closed form, or ``None`` when unavailable.

    Covered: subordinators, killed constants, CB and collision-free CBCI
    processes (through the flow), and deterministic or killed flows. ``inf``
    is absorbing for every kind.
    """
    x, y, t = float(x), float(y), float(t)
    k = spec.kind
    if x == INF:
        return exp_conv(INF, y, conv)
    if k is Kind.SUBORDINATOR:
        phi = spec.phi
        if x == 0.0 and spec.zero_absorbing:
            return exp_conv(0.0, y, conv)
        dead = -math.expm1(-phi.c * t)
        if y == INF:
            if x > 0.0 or phi.d > 0.0 or phi.measure.stable is not None:
                return 0.0
            stay = math.exp(-t * subordinator_limit(phi))
            return stay * exp_conv(0.0, INF, conv)
        return math.exp(-x * y - t * float(eval_subordinator(phi, y))) + dead * exp_conv(INF, y, conv)
    if k is Kind.KILLED_CONSTANT:
        if x == 0.0 and spec.zero_absorbing:
            return exp_conv(0.0, y, conv)
        p = math.exp(-t * float(eval_subordinator(spec.phi, x)))
        return p * exp_conv(x, y, conv) + (1.0 - p) * exp_conv(INF, y, conv)
    if k is Kind.DETERMINISTIC_FLOW:
        u, _ = _flow(spec.psi, None, x, t)
        return exp_conv(u, y, conv)
    if k is Kind.KILLED_FLOW:
        u, w = _flow(spec.psi, spec.phi, x, t)
        return w * exp_conv(u, y, conv) + (1.0 - w) * exp_conv(INF, y, conv)
    if k is Kind.CB or (k is Kind.CBCI and spec.sigma.is_zero):
        phi = spec.phi if k is Kind.CBCI else None
        if y == INF:
            return exp_conv(0.0, INF, conv) if (x == 0.0 and phi is None) else None
        u, w = _flow(spec.psi, phi, y, t)
        finite = 0.0 if (u == INF and x > 0.0) else math.exp(-x * u) * w if u < INF else w
        if y == 0.0:
            return finite + (1.0 - finite) * exp_conv(INF, 0.0, conv)
        return finite
    return None


# ---------------------------------------------------------------- two-sided comparison


@dataclass(frozen=True)
class DualityRow:
    x: float
    y: float
    t: float
    left: McEstimate
    right: McEstimate
    gap: float
    z: float


@dataclass
class DualityReport:
    """Grid of two-sided estimates under one convention pair."""

    rows: list[DualityRow]
    convention: ConventionPair
    meta: dict = field(default_factory=dict)

    @property
    def worst_abs_z(self) -> float:
        return max((abs(r.z) for r in self.rows), default=0.0)

    @property
    def max_frac_exploded(self) -> float:
        return max((max(r.left.frac_exploded, r.right.frac_exploded) for r in self.rows), default=0.0)

    def passed(self, z_max: float = 3.0) -> bool:
        return self.worst_abs_z <= z_max

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "t", "left_mean", "left_se", "right_mean", "right_se", "gap", "z"])
            for r in self.rows:
                w.writerow(
                    [r.x, r.y, r.t, repr(r.left.mean), repr(r.left.stderr), repr(r.right.mean),
                     repr(r.right.stderr), repr(r.gap), repr(r.z)]
                )

    def summary_line(self) -> str:
        return f"worst_abs_z={self.worst_abs_z!r}"


def _stream_seed(cfg: SimConfig, spec: ProcessSpec, other: ProcessSpec, role: str) -> int:
    # tied to the spec so that swapping sides reuses the same streams
    tag = repr(spec) if spec != other else repr(spec) + "|" + role
    return side_seed(cfg.seed, tag)


def _side(spec, starts, opposite, ts, cfg, conv, analytic, transpose, backend):
    """Estimates keyed by ``(start, opposite, t)`` for one side."""
    out = {}
    for s in starts:
        if analytic:
            for o in opposite:
                for t in ts:
                    v = analytic_laplace(spec, s, o, t, conv.transposed() if transpose else conv)
                    if v is None:
                        raise ContractError(f"no closed form for {spec.kind.value} at ({s}, {o}, {t})")
                    out[(s, o, t)] = McEstimate.exact(v)
            continue
        table = laplace_table(spec, s, opposite, ts, cfg, conv, transpose=transpose, backend=backend)
        for (o, t), est in table.items():
            out[(s, o, t)] = est
    return out


def duality_gap(
    spec_x: ProcessSpec,
    spec_y: ProcessSpec,
    grid: Iterable[tuple[float, float, float]],
    cfg: SimConfig,
    conv: ConventionPair = DEFAULT_CONVENTION,
    analytic_x: bool = False,
    analytic_y: bool = False,
    *,
    backend: str | None = None,
    allow_same: bool = False,
) -> DualityReport:
    """Compare ``E_x[exp_conv(X_t, y)]`` with ``E^y[exp_conv(x, Y_t)]`` on ``grid``.

    Parameters
    ----------
    spec_x, spec_y : ProcessSpec
        A recognized dual pair.
    grid : iterable of (x, y, t)
    cfg : SimConfig
        Shared settings; each side derives its own seed from ``cfg.seed``.
    analytic_x, analytic_y : bool
        Use the closed form for that side.
    allow_same : bool
        Accept ``spec_x == spec_y`` even if not self-dual (null experiments).

    Raises
    ------
    ContractError
        If the pair is not a recognized duality, or a requested closed form
        does not exist.
    """
    if not (is_dual_pair(spec_x, spec_y) or (allow_same and spec_x == spec_y)):
        raise ContractError(f"{spec_x.kind.value} and {spec_y.kind.value} are not a recognized dual pair")
    grid = [(float(x), float(y), float(t)) for x, y, t in grid]
    if not grid:
        raise ValidationError("grid must be nonempty")
    xs = sorted({g[0] for g in grid})
    ys = sorted({g[1] for g in grid})
    ts = sorted({g[2] for g in grid})
    cfg_x = _with_seed(cfg, _stream_seed(cfg, spec_x, spec_y, "left"))
    cfg_y = _with_seed(cfg, _stream_seed(cfg, spec_y, spec_x, "right"))
    left = _side(spec_x, xs, ys, ts, cfg_x, conv, analytic_x, False, backend)
    right = _side(spec_y, ys, xs, ts, cfg_y, conv, analytic_y, True, backend)
    rows = []
    for x, y, t in grid:
        lo, ro = left[(x, y, t)], right[(y, x, t)]
        gap, z = z_score(lo, ro)
        rows.append(DualityRow(x, y, t, lo, ro, gap, z))
    return DualityReport(rows, conv, {"left": spec_x.kind.value, "right": spec_y.kind.value})


def _with_seed(cfg: SimConfig, seed: int) -> SimConfig:
    return replace(cfg, seed=seed)


def null_z_scores(
    spec: ProcessSpec,
    grid: Sequence[tuple[float, float, float]],
    cfg: SimConfig,
    seeds: Sequence[int],
    conv: ConventionPair = DEFAULT_CONVENTION,
    *,
    backend: str | None = None,
) -> np.ndarray:
    """z-scores of ``spec`` against itself over independent seeds.

    Both sides estimate ``E_x[exp_conv(X_t, y)]`` from independent streams,
    so the z-scores should be approximately standard normal.
    """
    out = []
    for seed in seeds:
        c = _with_seed(cfg, int(seed))
        a = _side(spec, sorted({g[0] for g in grid}), sorted({g[1] for g in grid}), sorted({g[2] for g in grid}),
                  _with_seed(c, side_seed(c.seed, "null-a")), conv, False, False, backend)
        b = _side(spec, sorted({g[0] for g in grid}), sorted({g[1] for g in grid}), sorted({g[2] for g in grid}),
                  _with_seed(c, side_seed(c.seed, "null-b")), conv, False, False, backend)
        out.extend(z_score(a[g], b[g])[1] for g in ((float(x), float(y), float(t)) for x, y, t in grid))
    return np.array(out)


# ---------------------------------------------------------------- complete monotonicity


@dataclass(frozen=True)
class CmResult:
    """Outcome of :func:`cm_check`.

    ``violation`` is ``None`` on success, else ``(k, i, value, tolerance)``
    for the first failing order ``k`` and index ``i``.
    """

    passed: bool
    violation: tuple[int, int, float, float] | None = None

    def __bool__(self) -> bool:
        return self.passed

    def report(self) -> str:
        if self.violation is None:
            return ""
        k, i, v, tol = self.violation
        return f"order {k} at index {i}: (-1)^k diff = {v!r} < -{tol!r}"


def cm_check(samples: Sequence[tuple[float, float]], order: int, noise: float = 0.0) -> CmResult:
    """Alternating forward differences ``(-1)^k D^k f >= -noise 2^k`` for ``k <= order``.

    Examples
    --------
    >>> xs = [0.5 * i for i in range(11)]
    >>> bool(cm_check([(x, math.exp(-x)) for x in xs], 4))
    True
    >>> cm_check([(x, (1 + x) ** 2) for x in xs], 4).violation[0]
    1
    """
    if order < 1:
        raise ValidationError("order must be at least 1")
    if noise < 0.0:
        raise ValidationError("noise must be nonnegative")
    if len(samples) < order + 1:
        raise ValidationError("need at least order + 1 samples")
    xs = np.array([s[0] for s in samples], dtype=float)
    if np.any(np.diff(xs) <= 0.0):
        raise ValidationError("sample abscissae must be strictly increasing")
    d = np.array([s[1] for s in samples], dtype=float)
    for k in range(1, order + 1):
        d = np.diff(d)
        signed = (-1) ** k * d
        tol = noise * 2.0**k
        bad = np.flatnonzero(signed < -tol)
        if bad.size:
            i = int(bad[0])
            return CmResult(False, (k, i, float(signed[i]), tol))
    return CmResult(True)


# ---------------------------------------------------------------- generator check


@dataclass(frozen=True)
class FdRow:
    h: float
    fd_value: float
    symbol_value: float
    abs_gap: float


def generator_fd_check(
    s: LdsSymbol,
    semigroup: ProcessSpec | Callable[[float, float, float], float],
    x: float,
    y: float,
    h_list: Sequence[float],
    cfg: SimConfig | None = None,
) -> list[FdRow]:
    """Finite-difference generator ``(P_h e_y(x) - e^{-xy}) / h`` against the symbol.

    ``semigroup`` is a callable ``(x, y, h) -> E_x[exp(-X_h y)]`` or a spec;
    a spec uses its closed form when one exists and Monte Carlo with ``cfg``
    otherwise.
    """
    if not (x >= 0.0 and math.isfinite(x) and 0.0 < y < INF):
        raise ValidationError("generator check needs finite x >= 0 and y in (0, inf)")
    if isinstance(semigroup, ProcessSpec):
        spec = semigroup

        def p(xx: float, yy: float, hh: float) -> float:
            v = analytic_laplace(spec, xx, yy, hh)
            if v is None:
                if cfg is None:
                    raise ContractError(f"{spec.kind.value} has no closed form; pass cfg for Monte Carlo")
                c = replace(cfg, step=hh / max(1, round(hh / cfg.step)), horizon=max(cfg.horizon, 2 * hh))
                v = mc_laplace(spec, xx, yy, hh, c).mean
            return v

    else:
        p = semigroup
    target = pregenerator_apply(s, x, y)
    base = math.exp(-x * y)
    rows = []
    for h in h_list:
        fd = (p(x, y, h) - base) / h
        rows.append(FdRow(float(h), fd, target, abs(fd - target)))
    return rows


# ---------------------------------------------------------------- boundary identities

# Each regime has two boundary identities. ("X", b) reads
# E_b[exp_conv(X_t, v)] = P^v(Y_t in B) and ("Y", b) reads
# P_v(X_t in B) = E^b[exp_conv(v, Y_t)], with B = {< inf} for b = 0 and
# B = {0} for b = inf.
_IDENTITIES = {
    ("0+inf", "inf0+"): (("X", 0.0), ("Y", 0.0)),
    ("0inf-", "inf-0"): (("X", INF), ("Y", INF)),
    ("0inf-", "inf0+"): (("Y", 0.0), ("Y", INF)),
    ("0+inf", "inf-0"): (("X", 0.0), ("X", INF)),
}


def boundary_pair(phi, conv: ConventionPair) -> tuple[ProcessSpec, ProcessSpec]:
    """The subordinator / killed-constant pair that is dual under ``conv``.

    The boundary behaviour at 0 is what changes between regimes: whether
    the subordinator started at 0 is frozen and whether the killed constant
    at 0 escapes the killing.
    """
    sub, sub0 = ProcessSpec.subordinator(phi), ProcessSpec.subordinator(phi, zero_absorbing=True)
    kc, kc0 = ProcessSpec.killed_constant(phi), ProcessSpec.killed_constant(phi, zero_absorbing=True)
    return {
        ("0+inf", "inf0+"): (sub, kc),
        ("0inf-", "inf-0"): (kc0, sub0),
        ("0inf-", "inf0+"): (kc0, sub),
        ("0+inf", "inf-0"): (sub, kc0),
    }[tuple(conv.tokens())]


def boundary_probability(spec: ProcessSpec, v: float, t: float, target: str) -> float:
    """``P_v(Z_t < inf)`` (``target="finite"``) or ``P_v(Z_t = 0)`` (``"zero"``).

    Closed forms for subordinators and killed constants; they do not go
    through :func:`exp_conv`, so they serve as an independent reference.
    """
    phi = spec.phi
    if v == INF:
        return 0.0
    frozen = v == 0.0 and spec.zero_absorbing
    if spec.kind is Kind.SUBORDINATOR:
        if frozen:
            return 1.0
        if target == "finite":
            return math.exp(-phi.c * t)
        return math.exp(-t * subordinator_limit(phi)) if v == 0.0 else 0.0
    if spec.kind is Kind.KILLED_CONSTANT:
        if frozen:
            return 1.0
        if target == "zero" and v > 0.0:
            return 0.0
        return math.exp(-t * float(eval_subordinator(phi, v)))
    raise ContractError(f"no boundary probabilities for {spec.kind.value}")


@dataclass(frozen=True)
class BoundaryRow:
    """One boundary identity at one ``(v, t)``, in closed form and by Monte Carlo."""

    regime: str
    identity: str
    v: float
    t: float
    exact_left: float
    exact_right: float
    left: McEstimate | None = None
    right: McEstimate | None = None

    @property
    def exact_gap(self) -> float:
        if self.exact_left == self.exact_right:
            return 0.0
        return abs(self.exact_left - self.exact_right)

    @property
    def z(self) -> float:
        if self.left is None or self.right is None:
            return 0.0
        return z_score(self.left, self.right)[1]


@dataclass
class BoundaryReport:
    rows: list[BoundaryRow]
    meta: dict = field(default_factory=dict)

    @property
    def worst_exact_gap(self) -> float:
        return max((r.exact_gap for r in self.rows), default=0.0)

    @property
    def worst_abs_z(self) -> float:
        return max((abs(r.z) for r in self.rows), default=0.0)

    @property
    def worst_pair_residual(self) -> float:
        """Largest full-grid duality gap of the regime pairs, in closed form."""
        return max(self.meta.get("pair_residual", {}).values(), default=0.0)

    def passed(self, tol: float = ROUNDOFF, z_max: float = 3.0) -> bool:
        return max(self.worst_exact_gap, self.worst_pair_residual) <= tol and self.worst_abs_z <= z_max

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["regime", "identity", "v", "t", "exact_left", "exact_right", "left_mean", "left_se",
                        "right_mean", "right_se", "exact_gap", "z"])
            for r in self.rows:
                mc = [math.nan] * 4
                if r.left is not None and r.right is not None:
                    mc = [r.left.mean, r.left.stderr, r.right.mean, r.right.stderr]
                w.writerow([r.regime, r.identity, r.v, r.t, repr(r.exact_left), repr(r.exact_right),
                            *map(repr, mc), repr(r.exact_gap), repr(r.z)])

    def summary_line(self) -> str:
        return (f"worst_exact_gap={self.worst_exact_gap!r} worst_pair_residual={self.worst_pair_residual!r} "
                f"worst_abs_z={self.worst_abs_z!r}")


def _identity_label(side: str, b: float) -> str:
    bs = "0" if b == 0.0 else "inf"
    target = "<inf" if b == 0.0 else "=0"
    if side == "X":
        return f"E_{bs}[e(X_t,v)] = P^v(Y_t{target})"
    return f"P_v(X_t{target}) = E^{bs}[e(v,Y_t)]"


def _mc_indicators(spec, values, ts, target, cfg, backend) -> dict[tuple[float, float], McEstimate]:
    times = sorted(set(map(float, ts)))
    out = {}
    for v in map(float, values):
        s = run_paths(spec, v, cfg, times, backend=backend)
        for j, t in enumerate(times):
            vals = s.values[j]
            hit = np.isfinite(vals) if target == "finite" else vals == 0.0
            out[(v, t)] = McEstimate.from_scores(hit.astype(np.float64), s.codes[j])
    return out


def boundary_identities(
    phi,
    values: Sequence[float],
    ts: Sequence[float],
    regimes: Sequence[ConventionPair] | None = None,
    cfg: SimConfig | None = None,
    *,
    backend: str | None = None,
) -> BoundaryReport:
    """Check the two boundary identities of each convention regime.

    For every regime the dual pair comes from :func:`boundary_pair`. Each
    identity is evaluated for every ``v`` in ``values`` and ``t`` in ``ts``
    with :func:`analytic_laplace` on the expectation side and
    :func:`boundary_probability` on the probability side. With ``cfg`` both
    sides are also simulated from independent streams.

    Parameters
    ----------
    phi : SubordinatorMechanism
        Killed-subordinator exponent; ``phi.c > 0`` makes the regimes differ.
    values : sequence of float
        Points in ``[0, inf]`` where the identities are evaluated.
    ts : sequence of float
    regimes : sequence of ConventionPair, optional
        Defaults to all four.
    cfg : SimConfig, optional
    """
    if regimes is None:
        regimes = [ConventionPair.parse(list(k)) for k in _IDENTITIES]
    rows = []
    residual = {}
    for conv in regimes:
        key = tuple(conv.tokens())
        spec_x, spec_y = boundary_pair(phi, conv)
        label = ",".join(key)
        residual[label] = max(
            abs(analytic_laplace(spec_x, x, y, t, conv) - analytic_laplace(spec_y, y, x, t, conv.transposed()))
            for x in values for y in values for t in ts
        )
        for side, b in _IDENTITIES[key]:
            target = "finite" if b == 0.0 else "zero"
            if cfg is not None:
                tag = f"{label}|{side}|{b}"
                cx = _with_seed(cfg, side_seed(cfg.seed, tag + "|left"))
                cy = _with_seed(cfg, side_seed(cfg.seed, tag + "|right"))
                if side == "X":
                    table = laplace_table(spec_x, b, values, ts, cx, conv, backend=backend)
                    probs = _mc_indicators(spec_y, values, ts, target, cy, backend)
                else:
                    probs = _mc_indicators(spec_x, values, ts, target, cx, backend)
                    table = laplace_table(spec_y, b, values, ts, cy, conv, transpose=True, backend=backend)
            for v in map(float, values):
                for t in map(float, ts):
                    if side == "X":
                        el = analytic_laplace(spec_x, b, v, t, conv)
                        er = boundary_probability(spec_y, v, t, target)
                    else:
                        el = boundary_probability(spec_x, v, t, target)
                        er = analytic_laplace(spec_y, b, v, t, conv.transposed())
                    lo = ro = None
                    if cfg is not None:
                        lo, ro = (table[(v, t)], probs[(v, t)]) if side == "X" else (probs[(v, t)], table[(v, t)])
                    rows.append(BoundaryRow(label, _identity_label(side, b), v, t, el, er, lo, ro))
    return BoundaryReport(rows, {"pair_residual": residual})
