"""Laplace dual symbols of the seven-term class and boundary conventions.

A symbol is::

    psi(x, y) = x Psi(y) + x^2 Sigma(y) + BS(x, y) - BP(x, y)
                + SigmaHat(x) y^2 + PsiHat(x) y + kappa(x y)

on finite ``(x, y)``, extended by 0 when either argument is infinite. ``BS``
and ``BP`` are bivariate terms in the Sigma role and the Phi role. Each is
a sum of bivariate atoms, products of two univariate mechanisms, and
parametric mixtures over ``r in (0, 1)`` discretized by Gauss-Legendre.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import NumericAccuracyError, ValidationError
from .mechanisms import (
    EnvMechanism,
    NotUpMechanism,
    SpLpMechanism,
    SubordinatorMechanism,
    derivative_at_zero,
    eval_env,
    eval_not_up,
    eval_splp,
    eval_subordinator,
    mechanism_from_config,
    mechanism_to_config,
    merge_mechanisms,
)

__all__ = [
    "ZeroInf",
    "InfZero",
    "ConventionPair",
    "exp_conv",
    "exp_conv_array",
    "Product",
    "Mixture",
    "BivariateTerm",
    "LdsSymbol",
    "eval_lds",
    "eval_lds_grid",
    "dual_symbol",
    "check_symbol_duality",
    "pregenerator_apply",
    "check_negative_part_bound",
    "cross_derivative_phi",
    "combine_symbols",
    "random_lds_symbol",
    "symbol_to_config",
    "symbol_from_config",
]

INF = math.inf


class ZeroInf(enum.Enum):
    """Value of ``exp(-0 * inf)``: ``0+inf`` gives 0, ``0inf-`` gives 1."""

    ZeroPlusInf = "0+inf"
    ZeroInfMinus = "0inf-"


class InfZero(enum.Enum):
    """Value of ``exp(-inf * 0)``: ``inf0+`` gives 0, ``inf-0`` gives 1.

    The marked factor is the one approached by a limit, so ``inf * 0+`` is
    the product ``inf`` and ``inf- * 0`` is the product 0.
    """

    InfZeroPlus = "inf0+"
    InfMinusZero = "inf-0"


@dataclass(frozen=True)
class ConventionPair:
    zero_inf: ZeroInf = ZeroInf.ZeroPlusInf
    inf_zero: InfZero = InfZero.InfZeroPlus

    @classmethod
    def parse(cls, tokens: Sequence[str]) -> ConventionPair:
        """Build from the two config tokens, in either order."""
        if len(tokens) != 2:
            raise ValidationError("convention needs exactly two tokens")
        zi = [t for t in tokens if t in {e.value for e in ZeroInf}]
        iz = [t for t in tokens if t in {e.value for e in InfZero}]
        if len(zi) != 1 or len(iz) != 1:
            raise ValidationError(f"invalid convention tokens {list(tokens)!r}")
        return cls(ZeroInf(zi[0]), InfZero(iz[0]))

    def tokens(self) -> list[str]:
        return [self.zero_inf.value, self.inf_zero.value]

    @property
    def zero_times_inf(self) -> float:
        return 0.0 if self.zero_inf is ZeroInf.ZeroPlusInf else 1.0

    @property
    def inf_times_zero(self) -> float:
        return 0.0 if self.inf_zero is InfZero.InfZeroPlus else 1.0

    def transposed(self) -> ConventionPair:
        """Pair seen with the two arguments of ``exp_conv`` swapped."""
        zi = ZeroInf.ZeroPlusInf if self.inf_zero is InfZero.InfZeroPlus else ZeroInf.ZeroInfMinus
        iz = InfZero.InfZeroPlus if self.zero_inf is ZeroInf.ZeroPlusInf else InfZero.InfMinusZero
        return ConventionPair(zi, iz)


DEFAULT_CONVENTION = ConventionPair()


def exp_conv(x: float, y: float, conv: ConventionPair = DEFAULT_CONVENTION) -> float:
    """``exp(-x y)`` on ``[0, inf]^2`` with the boundary products fixed by ``conv``.

    Examples
    --------
    >>> exp_conv(0.0, math.inf, ConventionPair(ZeroInf.ZeroPlusInf))
    0.0
    >>> exp_conv(0.0, math.inf, ConventionPair(ZeroInf.ZeroInfMinus))
    1.0
    """
    if x == 0.0 and y == INF:
        return conv.zero_times_inf
    if x == INF and y == 0.0:
        return conv.inf_times_zero
    return math.exp(-x * y)


def exp_conv_array(x, y, conv: ConventionPair = DEFAULT_CONVENTION) -> np.ndarray:
    """Broadcasting form of :func:`exp_conv`."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    with np.errstate(invalid="ignore", over="ignore"):
        out = np.exp(-(x * y))
    out = np.where((x == 0.0) & (y == INF), conv.zero_times_inf, out)
    out = np.where((x == INF) & (y == 0.0), conv.inf_times_zero, out)
    return out


# --------------------------------------------------------------------------
# bivariate terms

_SIGMA, _PHI = "sigma", "phi"

_FAMILIES = {
    "stable_sigma": _SIGMA,
    "stable_phi": _PHI,
    "gamma_phi": _PHI,
}
# exponent of the substitution r = s**p before Gauss-Legendre in s
_SUBST = {"stable_sigma": 1, "stable_phi": 1, "gamma_phi": 3}
_MIX_RTOL = 1e-8


@lru_cache(maxsize=64)
def _mixture_nodes(family: str, gamma: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    s, w = np.polynomial.legendre.leggauss(n)
    s = 0.5 * (s + 1.0)
    w = 0.5 * w
    p = _SUBST[family]
    if family == "gamma_phi" and gamma < 0.0:
        # keeps r**gamma dr polynomial in s
        p = min(p / (1.0 + gamma), 30.0)
    r = s**p
    w = w * p * s ** (p - 1)
    if family == "gamma_phi":
        w = w * r**gamma
    r.setflags(write=False)
    w.setflags(write=False)
    return r, w


def _mixture_kernel(family: str, r: np.ndarray, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Factor values ``f_r(x)`` and ``g_r(y)``, shape ``x.shape + r.shape``."""
    xx = x[..., None]
    yy = y[..., None]
    with np.errstate(divide="ignore"):
        if family == "stable_sigma":
            return xx ** (r + 1.0), yy ** (r + 1.0)
        if family == "stable_phi":
            return xx**r, yy ** (1.0 - r)
        if family == "gamma_phi":
            return np.log1p(xx * r), np.log1p(yy / r)
    raise ValidationError(f"unknown mixture family {family!r}")


@dataclass(frozen=True)
class Mixture:
    """Mixture of simple symbols over ``r in (0, 1)``.

    Families
    --------
    ``stable_sigma``
        ``int_0^1 (x y)^(r+1) dr`` in the Sigma role.
    ``stable_phi``
        ``int_0^1 x^r y^(1-r) dr`` in the Phi role.
    ``gamma_phi``
        ``int_0^1 log(1+xr) log(1+y/r) r^gamma dr`` in the Phi role.

    ``transposed`` swaps the two arguments; it is how a dual symbol stores
    the mixture without changing the family.
    """

    family: str
    gamma: float = 0.0
    nodes: int = 64
    weight: float = 1.0
    transposed: bool = False

    def __post_init__(self) -> None:
        if self.family not in _FAMILIES:
            raise ValidationError(f"unknown mixture family {self.family!r}")
        if int(self.nodes) != self.nodes or self.nodes < 2:
            raise ValidationError("mixture nodes must be an integer >= 2")
        object.__setattr__(self, "nodes", int(self.nodes))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "weight", float(self.weight))
        if self.family == "gamma_phi" and not self.gamma > -1.0:
            raise ValidationError("gamma must exceed -1")
        if self.family != "gamma_phi" and self.gamma != 0.0:
            raise ValidationError(f"{self.family} takes no gamma parameter")
        if not self.weight > 0.0:
            raise ValidationError("mixture weight must be positive")

    @property
    def role(self) -> str:
        return _FAMILIES[self.family]

    def _sum(self, x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
        r, w = _mixture_nodes(self.family, self.gamma, n)
        if self.transposed:
            x, y = y, x
        f, g = _mixture_kernel(self.family, r, x, y)
        return (f * g) @ w

    def evaluate(self, x, y) -> np.ndarray:
        """Quadrature value, checked against the doubled rule.

        Raises
        ------
        NumericAccuracyError
            When rules with N and 2N nodes differ by more than 1e-8 relative.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        lo = self._sum(x, y, self.nodes)
        hi = self._sum(x, y, 2 * self.nodes)
        bad = np.abs(hi - lo) > _MIX_RTOL * np.maximum(np.abs(hi), 1e-300)
        if np.any(bad):
            raise NumericAccuracyError(
                f"{self.family} quadrature did not converge with {self.nodes} nodes"
            )
        return self.weight * lo

    def cross_moment(self) -> float:
        """Mixed derivative at the origin."""
        if self.family == "gamma_phi":
            _, w = _mixture_nodes(self.family, self.gamma, self.nodes)
            return self.weight * float(np.sum(w))
        return INF


@dataclass(frozen=True)
class Product:
    """``weight * left(x) * right(y)`` with both factors of the role's class."""

    left: NotUpMechanism | SubordinatorMechanism
    right: NotUpMechanism | SubordinatorMechanism
    weight: float = 1.0

    def __post_init__(self) -> None:
        if type(self.left) is not type(self.right):
            raise ValidationError("product factors must share a mechanism class")
        if not isinstance(self.left, (NotUpMechanism, SubordinatorMechanism)):
            raise ValidationError("product factors must be not_up or subordinator mechanisms")
        if not float(self.weight) > 0.0:
            raise ValidationError("product weight must be positive")
        object.__setattr__(self, "weight", float(self.weight))

    @property
    def role(self) -> str:
        return _SIGMA if isinstance(self.left, NotUpMechanism) else _PHI


def _eval_mech(m, z):
    if isinstance(m, NotUpMechanism):
        return eval_not_up(m, z)
    return eval_subordinator(m, z)


@dataclass(frozen=True)
class BivariateTerm:
    """Bivariate measure term in one role.

    Parameters
    ----------
    role : {"sigma", "phi"}
        Kernel ``(e^{-xv}-1+xv)(e^{-uy}-1+uy)`` or
        ``(1-e^{-xv} 1_{v<inf})(1-e^{-uy} 1_{u<inf})``.
    atoms : sequence of (v, u, mass)
        ``inf`` coordinates are allowed only in the phi role.
    products, mixtures
        Sum-of-products parts.
    """

    role: str = _SIGMA
    atoms: tuple[tuple[float, float, float], ...] = ()
    products: tuple[Product, ...] = ()
    mixtures: tuple[Mixture, ...] = ()

    def __post_init__(self) -> None:
        if self.role not in (_SIGMA, _PHI):
            raise ValidationError(f"unknown bivariate role {self.role!r}")
        clean = []
        for item in self.atoms:
            if len(item) != 3:
                raise ValidationError("bivariate atoms must be (v, u, mass)")
            v, u, mass = (float(t) for t in item)
            for c in (v, u):
                if math.isnan(c) or c <= 0.0:
                    raise ValidationError("bivariate atom coordinates must be positive")
                if math.isinf(c) and self.role == _SIGMA:
                    raise ValidationError("infinite coordinates are only allowed in the phi role")
            if not (math.isfinite(mass) and mass > 0.0):
                raise ValidationError("bivariate atom mass must be positive and finite")
            clean.append((v, u, mass))
        object.__setattr__(self, "atoms", tuple(clean))
        object.__setattr__(self, "products", tuple(self.products))
        object.__setattr__(self, "mixtures", tuple(self.mixtures))
        for p in self.products:
            if p.role != self.role:
                raise ValidationError(f"product of role {p.role} inside a {self.role} term")
        for mx in self.mixtures:
            if mx.role != self.role:
                raise ValidationError(f"mixture {mx.family} does not belong to the {self.role} role")

    @property
    def is_zero(self) -> bool:
        return not (self.atoms or self.products or self.mixtures)

    def _atom_factor(self, z: float, c: float) -> float:
        if self.role == _SIGMA:
            return math.expm1(-z * c) + z * c
        if math.isinf(c):
            return 1.0
        return -math.expm1(-z * c)

    def parts(self, x: float, y: float) -> list[float]:
        """Nonnegative summands at finite ``(x, y)``."""
        out = [m * (self._atom_factor(x, v) * self._atom_factor(y, u)) for v, u, m in self.atoms]
        for p in self.products:
            out.append(p.weight * (_eval_mech(p.left, x) * _eval_mech(p.right, y)))
        for mx in self.mixtures:
            out.append(float(mx.evaluate(x, y)))
        return out

    def evaluate(self, x: float, y: float) -> float:
        return math.fsum(self.parts(x, y))

    def evaluate_grid(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        acc = np.zeros(np.broadcast(x, y).shape)
        for v, u, m in self.atoms:
            if self.role == _SIGMA:
                fx = np.expm1(-x * v) + x * v
                gy = np.expm1(-u * y) + u * y
            else:
                fx = np.ones_like(x) if math.isinf(v) else -np.expm1(-x * v)
                gy = np.ones_like(y) if math.isinf(u) else -np.expm1(-u * y)
            acc = acc + m * (fx * gy)
        for p in self.products:
            acc = acc + p.weight * (_eval_mech(p.left, x) * _eval_mech(p.right, y))
        for mx in self.mixtures:
            acc = acc + mx.evaluate(x, y)
        return acc

    def transposed(self) -> BivariateTerm:
        return BivariateTerm(
            self.role,
            tuple((u, v, m) for v, u, m in self.atoms),
            tuple(Product(p.right, p.left, p.weight) for p in self.products),
            tuple(replace(mx, transposed=not mx.transposed) for mx in self.mixtures),
        )

    def scaled(self, w: float) -> BivariateTerm:
        return BivariateTerm(
            self.role,
            tuple((v, u, m * w) for v, u, m in self.atoms if m * w > 0.0),
            tuple(Product(p.left, p.right, p.weight * w) for p in self.products if p.weight * w > 0.0),
            tuple(replace(mx, weight=mx.weight * w) for mx in self.mixtures if mx.weight * w > 0.0),
        )


def cross_derivative_phi(t: BivariateTerm) -> float:
    """``int v u nu(dv, du)``, the mixed derivative of a phi-role term at 0.

    Returns ``inf`` when an atom has an infinite coordinate or a mixture has
    a divergent moment.

    Examples
    --------
    >>> cross_derivative_phi(BivariateTerm("phi", atoms=((2.0, 3.0, 0.5),)))
    3.0
    """
    if t.role != _PHI:
        raise ValidationError("cross_derivative_phi needs a phi-role term")
    parts = []
    for v, u, m in t.atoms:
        if math.isinf(v) or math.isinf(u):
            return INF
        parts.append(v * u * m)
    for p in t.products:
        parts.append(p.weight * derivative_at_zero(p.left) * derivative_at_zero(p.right))
    for mx in t.mixtures:
        parts.append(mx.cross_moment())
    if any(math.isinf(q) for q in parts):
        return INF
    return math.fsum(parts)


def _vanishes_on_axes(t: BivariateTerm) -> bool:
    if any(math.isinf(v) or math.isinf(u) for v, u, _ in t.atoms):
        return False
    return all(p.left.c == 0.0 and p.right.c == 0.0 for p in t.products)


# --------------------------------------------------------------------------
# the symbol


@dataclass(frozen=True)
class LdsSymbol:
    """Seven-term Laplace dual symbol; every part defaults to zero."""

    psi: SpLpMechanism = field(default_factory=SpLpMechanism)
    sigma: NotUpMechanism = field(default_factory=NotUpMechanism)
    big_sigma: BivariateTerm = field(default_factory=lambda: BivariateTerm(_SIGMA))
    big_phi: BivariateTerm = field(default_factory=lambda: BivariateTerm(_PHI))
    sigma_hat: NotUpMechanism = field(default_factory=NotUpMechanism)
    psi_hat: SpLpMechanism = field(default_factory=SpLpMechanism)
    kappa: EnvMechanism = field(default_factory=EnvMechanism)

    def __post_init__(self) -> None:
        checks = (
            ("psi", SpLpMechanism),
            ("sigma", NotUpMechanism),
            ("sigma_hat", NotUpMechanism),
            ("psi_hat", SpLpMechanism),
            ("kappa", EnvMechanism),
            ("big_sigma", BivariateTerm),
            ("big_phi", BivariateTerm),
        )
        for name, cls in checks:
            if not isinstance(getattr(self, name), cls):
                raise ValidationError(f"{name} must be a {cls.__name__}")
        if self.big_sigma.role != _SIGMA or self.big_phi.role != _PHI:
            raise ValidationError("big_sigma and big_phi must carry the sigma and phi roles")

    def terms(self, x: float, y: float) -> list[float]:
        """Every summand of the symbol at finite ``(x, y)``."""
        x2 = x * x
        y2 = y * y
        out = [
            x * eval_splp(self.psi, y),
            x2 * eval_not_up(self.sigma, y),
            eval_not_up(self.sigma_hat, x) * y2,
            eval_splp(self.psi_hat, x) * y,
            eval_env(self.kappa, x * y),
        ]
        out.extend(self.big_sigma.parts(x, y))
        out.extend(-q for q in self.big_phi.parts(x, y))
        return out


def eval_lds(s: LdsSymbol, x: float, y: float) -> float:
    """Evaluate the symbol; 0 whenever an argument is infinite.

    Examples
    --------
    >>> from lapdual.mechanisms import splp
    >>> eval_lds(LdsSymbol(psi=splp(a=1.0)), 3.0, 2.0)
    12.0
    """
    x = float(x)
    y = float(y)
    if math.isnan(x) or math.isnan(y) or x < 0.0 or y < 0.0:
        raise ValidationError("symbol arguments must lie in [0, inf]")
    if math.isinf(x) or math.isinf(y):
        return 0.0
    return math.fsum(s.terms(x, y))


def eval_lds_grid(s: LdsSymbol, x, y) -> np.ndarray:
    """Vectorized evaluation on finite broadcastable arrays (plain summation)."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    out = (
        x * eval_splp(s.psi, y)
        + (x * x) * eval_not_up(s.sigma, y)
        + s.big_sigma.evaluate_grid(x, y)
        - s.big_phi.evaluate_grid(x, y)
        + eval_not_up(s.sigma_hat, x) * (y * y)
        + eval_splp(s.psi_hat, x) * y
        + eval_env(s.kappa, x * y)
    )
    return np.asarray(out, dtype=float)


def dual_symbol(s: LdsSymbol) -> LdsSymbol:
    """Structural dual: hatted and unhatted parts swap, bivariate terms transpose."""
    return LdsSymbol(
        psi=s.psi_hat,
        sigma=s.sigma_hat,
        big_sigma=s.big_sigma.transposed(),
        big_phi=s.big_phi.transposed(),
        sigma_hat=s.sigma,
        psi_hat=s.psi,
        kappa=s.kappa,
    )


def check_symbol_duality(s: LdsSymbol, grid: Iterable[tuple[float, float]]) -> float:
    """Largest ``|psi(x, y) - dual(psi)(y, x)|`` over the grid."""
    d = dual_symbol(s)
    gap = 0.0
    for x, y in grid:
        gap = max(gap, abs(eval_lds(s, x, y) - eval_lds(d, y, x)))
    return gap


def pregenerator_apply(s: LdsSymbol, x: float, y: float) -> float:
    """Action of the pregenerator on ``exp(-. y)`` at ``x``.

    Equal to ``psi(x, y) exp(-x y)`` for interior ``x``, ``psi(0, y)`` at 0
    and 0 at infinity.
    """
    if not 0.0 < y < INF:
        raise ValidationError("pregenerator_apply needs y in (0, inf)")
    if x == INF:
        return 0.0
    if x == 0.0:
        return eval_lds(s, 0.0, y)
    return eval_lds(s, x, y) * math.exp(-x * y)


@dataclass(frozen=True)
class NegativePartBound:
    sup_estimate: float
    hypotheses_hold: bool

    def __iter__(self):
        return iter((self.sup_estimate, self.hypotheses_hold))


def check_negative_part_bound(s: LdsSymbol, grid_cap: float, grid_n: int) -> NegativePartBound:
    """Grid probe of ``sup psi_-(x, y) exp(-x y)`` plus the analytic moment test.

    ``hypotheses_hold`` reports: ``Psi(0) = 0 = PsiHat(0)``, the phi-role term
    vanishing on both axes, and finite ``Psi'(0)``, ``PsiHat'(0)`` and mixed
    moment of the phi-role measure.
    """
    if not grid_cap > 0.0 or int(grid_n) < 2:
        raise ValidationError("grid_cap must be positive and grid_n at least 2")
    g = np.linspace(0.0, float(grid_cap), int(grid_n))
    xx, yy = np.meshgrid(g, g, indexing="ij")
    psi = eval_lds_grid(s, xx, yy)
    sup = float(np.max(np.maximum(-psi, 0.0) * np.exp(-xx * yy)))
    finite = [
        abs(derivative_at_zero(s.psi)),
        abs(derivative_at_zero(s.psi_hat)),
        cross_derivative_phi(s.big_phi),
    ]
    holds = (
        s.psi.c == 0.0
        and s.psi_hat.c == 0.0
        and _vanishes_on_axes(s.big_phi)
        and all(math.isfinite(v) for v in finite)
    )
    return NegativePartBound(sup, bool(holds))


def combine_symbols(pairs: Sequence[tuple[float, LdsSymbol]]) -> LdsSymbol:
    """Nonnegative combination ``sum w_i s_i`` of symbols (the cone operation)."""
    if not pairs:
        return LdsSymbol()
    out = None
    for w, s in pairs:
        if not w >= 0.0:
            raise ValidationError("cone weights must be nonnegative")
        if w == 0.0:
            scaled = LdsSymbol()
        else:
            scaled = LdsSymbol(
                s.psi.scaled(w),
                s.sigma.scaled(w),
                s.big_sigma.scaled(w),
                s.big_phi.scaled(w),
                s.sigma_hat.scaled(w),
                s.psi_hat.scaled(w),
                s.kappa.scaled(w),
            )
        if out is None:
            out = scaled
            continue
        out = LdsSymbol(
            merge_mechanisms(out.psi, scaled.psi),
            merge_mechanisms(out.sigma, scaled.sigma),
            _merge_terms(out.big_sigma, scaled.big_sigma),
            _merge_terms(out.big_phi, scaled.big_phi),
            merge_mechanisms(out.sigma_hat, scaled.sigma_hat),
            merge_mechanisms(out.psi_hat, scaled.psi_hat),
            merge_mechanisms(out.kappa, scaled.kappa),
        )
    return out


def _merge_terms(a: BivariateTerm, b: BivariateTerm) -> BivariateTerm:
    return BivariateTerm(a.role, a.atoms + b.atoms, a.products + b.products, a.mixtures + b.mixtures)


# --------------------------------------------------------------------------
# random symbols for property checks


def random_lds_symbol(seed: int) -> LdsSymbol:
    """A symbol with all seven terms populated, drawn from ``numpy`` with ``seed``."""
    from .mechanisms import env, not_up, splp, subordinator

    g = np.random.default_rng(seed)

    def atoms(lo: float, hi: float, k: int) -> list[tuple[float, float]]:
        return [(float(g.uniform(lo, hi)), float(g.uniform(0.1, 1.0))) for _ in range(k)]

    def stable(hi: float) -> dict[str, float]:
        return {"alpha": float(g.uniform(0.1, hi)), "scale": float(g.uniform(0.1, 1.0))}

    psi = splp(atoms(0.1, 3.0, 2), stable(1.9), a=float(g.uniform(0, 1)), b=float(g.normal()), c=float(g.uniform(0, 1)))
    psi_hat = splp(atoms(0.1, 3.0, 2), stable(1.9), a=float(g.uniform(0, 1)), b=float(g.normal()))
    sigma = not_up(atoms(0.1, 2.0, 2), stable(1.9), a=float(g.uniform(0, 1)), d=float(g.uniform(0, 1)))
    sigma_hat = not_up(atoms(0.1, 2.0, 2), stable(1.9), a=float(g.uniform(0, 1)), d=float(g.uniform(0, 1)))
    kappa = env(atoms(-1.0, 2.0, 3), stable(1.9), a=float(g.uniform(0, 1)), b=float(g.normal()))
    big_sigma = BivariateTerm(
        _SIGMA,
        atoms=tuple((float(g.uniform(0.1, 2)), float(g.uniform(0.1, 2)), float(g.uniform(0.1, 1))) for _ in range(2)),
        products=(Product(not_up(atoms(0.1, 2.0, 1), d=0.3), not_up(atoms(0.1, 2.0, 2), a=0.2)),),
        mixtures=(Mixture("stable_sigma", weight=float(g.uniform(0.1, 1.0))),),
    )
    big_phi = BivariateTerm(
        _PHI,
        atoms=((float(g.uniform(0.1, 2)), INF, float(g.uniform(0.1, 1))), (float(g.uniform(0.1, 2)), float(g.uniform(0.1, 2)), 0.5)),
        products=(Product(subordinator(atoms(0.1, 2.0, 2), stable(0.9), d=0.1), subordinator(atoms(0.1, 2.0, 1), c=0.2)),),
        mixtures=(
            Mixture("gamma_phi", gamma=float(g.uniform(-0.5, 2.0)), weight=float(g.uniform(0.1, 1.0))),
            Mixture("stable_phi", weight=float(g.uniform(0.1, 1.0)), transposed=True),
        ),
    )
    return LdsSymbol(psi, sigma, big_sigma, big_phi, sigma_hat, psi_hat, kappa)


# --------------------------------------------------------------------------
# config round trip


def _term_to_config(t: BivariateTerm) -> dict[str, Any]:
    def tok(c: float) -> Any:
        return "inf" if math.isinf(c) else c

    cfg: dict[str, Any] = {}
    if t.atoms:
        cfg["atoms"] = [[tok(v), tok(u), m] for v, u, m in t.atoms]
    if t.products:
        cfg["products"] = [
            {"left": mechanism_to_config(p.left), "right": mechanism_to_config(p.right), "weight": p.weight}
            for p in t.products
        ]
    if t.mixtures:
        mixes = []
        for mx in t.mixtures:
            item: dict[str, Any] = {"family": mx.family, "nodes": mx.nodes, "weight": mx.weight}
            if mx.family == "gamma_phi":
                item["gamma"] = mx.gamma
            if mx.transposed:
                item["transposed"] = True
            mixes.append(item)
        cfg["mixtures"] = mixes
    return cfg


def _term_from_config(cfg: dict[str, Any], role: str) -> BivariateTerm:
    if not isinstance(cfg, dict):
        raise ValidationError("bivariate term config must be a mapping")
    extra = set(cfg) - {"atoms", "products", "mixtures"}
    if extra:
        raise ValidationError(f"unknown bivariate keys {sorted(extra)}")

    def num(c: Any) -> float:
        if isinstance(c, str) and c.strip().lower() == "inf":
            return INF
        return float(c)

    atoms = tuple(tuple(num(c) for c in a) for a in cfg.get("atoms") or [])
    cls = NotUpMechanism if role == _SIGMA else SubordinatorMechanism
    products = tuple(
        Product(
            mechanism_from_config(p["left"], cls),
            mechanism_from_config(p["right"], cls),
            float(p.get("weight", 1.0)),
        )
        for p in cfg.get("products") or []
    )
    mixtures = tuple(Mixture(**m) for m in cfg.get("mixtures") or [])
    return BivariateTerm(role, atoms, products, mixtures)


_UNIVARIATE = (
    ("psi", SpLpMechanism),
    ("sigma", NotUpMechanism),
    ("sigma_hat", NotUpMechanism),
    ("psi_hat", SpLpMechanism),
    ("kappa", EnvMechanism),
)


def symbol_to_config(s: LdsSymbol) -> dict[str, Any]:
    """Nested config; zero components are omitted."""
    cfg: dict[str, Any] = {}
    for name, _ in _UNIVARIATE:
        m = getattr(s, name)
        if not m.is_zero:
            cfg[name] = mechanism_to_config(m)
    if not s.big_sigma.is_zero:
        cfg["big_sigma"] = _term_to_config(s.big_sigma)
    if not s.big_phi.is_zero:
        cfg["big_phi"] = _term_to_config(s.big_phi)
    return cfg


def symbol_from_config(cfg: dict[str, Any]) -> LdsSymbol:
    if not isinstance(cfg, dict):
        raise ValidationError("symbol config must be a mapping")
    extra = set(cfg) - {n for n, _ in _UNIVARIATE} - {"big_sigma", "big_phi"}
    if extra:
        raise ValidationError(f"unknown symbol keys {sorted(extra)}")
    kw: dict[str, Any] = {}
    for name, cls in _UNIVARIATE:
        if name in cfg:
            kw[name] = mechanism_from_config(cfg[name], cls)
    if "big_sigma" in cfg:
        kw["big_sigma"] = _term_from_config(cfg["big_sigma"], _SIGMA)
    if "big_phi" in cfg:
        kw["big_phi"] = _term_from_config(cfg["big_phi"], _PHI)
    return LdsSymbol(**kw)
