"""Experiment configuration: YAML schema, validation and overrides.

A config is a mapping with these top-level keys::

    name: str                    # required
    experiment: str              # one of EXPERIMENTS
    description: str             # optional, one line
    process: {kind, psi, ...}    # process under test (most experiments)
    dual: {kind, ...}            # duality only; defaults to dual_spec(process)
    grid: {x: [...], y: [...], t: [...]}
    sim: {seed, step, horizon, paths, explosion_cap, small_jump_cut, absorption_floor}
    convention: [tok, tok]       # from {"0+inf", "0inf-"} x {"inf0+", "inf-0"}
    analytic: {x: bool, y: bool}
    gates: {...}                 # pass thresholds, experiment specific
    params: {...}                # experiment specific inputs
    output: str                  # prefix for <prefix>_report.csv etc.

Grid values accept ``inf`` (as the string ``"inf"`` or YAML ``.inf``).
Errors are raised as :class:`ConfigError` naming the offending key path.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ContractError, ValidationError
from .mechanisms import mechanism_from_config, mechanism_to_config
from .paths import Kind, ProcessSpec, SimConfig, dual_spec, is_dual_pair
from .symbols import ConventionPair

__all__ = [
    "EXPERIMENTS",
    "ConfigError",
    "ExperimentConfig",
    "Grid",
    "load_config",
    "apply_overrides",
    "process_from_config",
    "process_to_config",
]

EXPERIMENTS = (
    "duality",
    "cm",
    "generator_fd",
    "flow",
    "symbol_check",
    "negative_part",
    "conventions",
    "null_calibration",
)
_NEEDS_PROCESS = {"duality", "cm", "null_calibration"}
_NEEDS_GRID = {"duality", "cm", "null_calibration", "conventions"}
_NEEDS_SIM = {"duality", "cm", "null_calibration"}
_TOP_KEYS = {
    "name", "experiment", "description", "process", "dual", "grid", "sim",
    "convention", "analytic", "gates", "params", "output",
}
_SIM_KEYS = {"step", "horizon", "paths", "seed", "explosion_cap", "small_jump_cut", "absorption_floor"}
_MECH_SLOTS = ("psi", "phi", "sigma", "kappa")


class ConfigError(ValidationError):
    """A config failed validation; ``path`` names the offending key."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


def _num(value: Any, path: str) -> float:
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    if isinstance(value, bool):
        raise ConfigError(path, "expected a number")
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(path, f"expected a number, got {value!r}") from None
    if math.isnan(out):
        raise ConfigError(path, "nan is not allowed")
    return out


def _tok(v: float) -> Any:
    return "inf" if math.isinf(v) else v


# ---------------------------------------------------------------- process specs


def process_from_config(cfg: Any, path: str = "process") -> ProcessSpec:
    """Build a :class:`ProcessSpec` from ``{kind, psi?, phi?, sigma?, kappa?, ...}``."""
    if not isinstance(cfg, dict):
        raise ConfigError(path, "expected a mapping")
    extra = set(cfg) - {"kind", *_MECH_SLOTS, "sigma_pairs", "phi_pairs", "zero_absorbing"}
    if extra:
        raise ConfigError(path, f"unknown keys {sorted(extra)}")
    try:
        kind = Kind(cfg.get("kind"))
    except ValueError:
        raise ConfigError(f"{path}.kind", f"unknown process kind {cfg.get('kind')!r}") from None
    kw: dict[str, Any] = {}
    for slot in _MECH_SLOTS:
        if slot in cfg:
            try:
                kw[slot] = mechanism_from_config(cfg[slot])
            except ValidationError as exc:
                raise ConfigError(f"{path}.{slot}", str(exc)) from None
    for name in ("sigma_pairs", "phi_pairs"):
        pairs = []
        for i, pair in enumerate(cfg.get(name) or []):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ConfigError(f"{path}.{name}[{i}]", "expected [hat, plain]")
            try:
                pairs.append(tuple(mechanism_from_config(m) for m in pair))
            except ValidationError as exc:
                raise ConfigError(f"{path}.{name}[{i}]", str(exc)) from None
        if pairs:
            kw[name] = tuple(pairs)
    za = cfg.get("zero_absorbing", False)
    if not isinstance(za, bool):
        raise ConfigError(f"{path}.zero_absorbing", "expected true or false")
    try:
        return ProcessSpec(kind, zero_absorbing=za, **kw)
    except ValidationError as exc:
        raise ConfigError(path, str(exc)) from None


def process_to_config(spec: ProcessSpec) -> dict[str, Any]:
    out: dict[str, Any] = {"kind": spec.kind.value}
    for slot in _MECH_SLOTS:
        m = getattr(spec, slot)
        if not m.is_zero:
            out[slot] = mechanism_to_config(m)
    for name in ("sigma_pairs", "phi_pairs"):
        pairs = getattr(spec, name)
        if pairs:
            out[name] = [[mechanism_to_config(h), mechanism_to_config(p)] for h, p in pairs]
    if spec.zero_absorbing:
        out["zero_absorbing"] = True
    return out


# ---------------------------------------------------------------- experiment config


@dataclass(frozen=True)
class Grid:
    x: tuple[float, ...] = ()
    y: tuple[float, ...] = ()
    t: tuple[float, ...] = ()

    def cells(self) -> list[tuple[float, float, float]]:
        return [(x, y, t) for x in self.x for y in self.y for t in self.t]

    def to_dict(self) -> dict[str, list]:
        return {k: [_tok(v) for v in getattr(self, k)] for k in ("x", "y", "t") if getattr(self, k)}


def _grid(raw: Any, needed: bool) -> Grid:
    if raw is None:
        if needed:
            raise ConfigError("grid", "required for this experiment")
        return Grid()
    if not isinstance(raw, dict):
        raise ConfigError("grid", "expected a mapping with x, y, t lists")
    extra = set(raw) - {"x", "y", "t"}
    if extra:
        raise ConfigError("grid", f"unknown keys {sorted(extra)}")
    out = {}
    for k in ("x", "y", "t"):
        vals = raw.get(k, [])
        if not isinstance(vals, list):
            vals = [vals]
        parsed = tuple(_num(v, f"grid.{k}[{i}]") for i, v in enumerate(vals))
        for i, v in enumerate(parsed):
            if v < 0.0:
                raise ConfigError(f"grid.{k}[{i}]", "must be nonnegative")
            if k == "t" and math.isinf(v):
                raise ConfigError(f"grid.t[{i}]", "times must be finite")
        out[k] = parsed
    g = Grid(**out)
    if needed and not g.t:
        raise ConfigError("grid.t", "must be nonempty")
    return g


def _sim(raw: Any, grid: Grid, needed: bool) -> SimConfig | None:
    if raw is None:
        if needed:
            raise ConfigError("sim", "required for this experiment (sim.seed is mandatory)")
        return None
    if not isinstance(raw, dict):
        raise ConfigError("sim", "expected a mapping")
    extra = set(raw) - _SIM_KEYS
    if extra:
        raise ConfigError("sim", f"unknown keys {sorted(extra)}")
    if "seed" not in raw:
        raise ConfigError("sim.seed", "a seed is required")
    kw = dict(raw)
    if "horizon" not in kw:
        kw["horizon"] = max(grid.t, default=1.0)
    try:
        return SimConfig(**kw)
    except (ValidationError, TypeError) as exc:
        raise ConfigError("sim", str(exc)) from None


def _sim_to_dict(sim: SimConfig) -> dict[str, Any]:
    out = {"seed": sim.seed, "step": sim.step, "horizon": sim.horizon, "paths": sim.paths}
    defaults = SimConfig()
    for k in ("explosion_cap", "small_jump_cut", "absorption_floor"):
        if getattr(sim, k) != getattr(defaults, k):
            out[k] = getattr(sim, k)
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment description.

    Build with :meth:`from_dict` or :func:`load_config`; :meth:`to_dict`
    gives back a plain mapping that parses to an equal config.
    """

    name: str
    experiment: str
    description: str = ""
    process: ProcessSpec | None = None
    dual: ProcessSpec | None = None
    grid: Grid = field(default_factory=Grid)
    sim: SimConfig | None = None
    convention: ConventionPair = field(default_factory=lambda: ConventionPair.parse(["0+inf", "inf0+"]))
    analytic_x: bool = False
    analytic_y: bool = False
    gates: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    output: str = ""

    @classmethod
    def from_dict(cls, raw: Any) -> ExperimentConfig:
        if not isinstance(raw, dict):
            raise ConfigError("", "config must be a mapping")
        extra = set(raw) - _TOP_KEYS
        if extra:
            raise ConfigError("", f"unknown top-level keys {sorted(extra)}")
        name = raw.get("name")
        if not isinstance(name, str) or not name:
            raise ConfigError("name", "a nonempty string is required")
        exp = raw.get("experiment")
        if exp not in EXPERIMENTS:
            raise ConfigError("experiment", f"must be one of {list(EXPERIMENTS)}, got {exp!r}")
        desc = raw.get("description", "")
        if not isinstance(desc, str):
            raise ConfigError("description", "expected a string")

        process = process_from_config(raw["process"], "process") if "process" in raw else None
        if process is None and exp in _NEEDS_PROCESS:
            raise ConfigError("process", "required for this experiment")
        dual = None
        if "dual" in raw:
            if exp != "duality":
                raise ConfigError("dual", "only duality experiments take a dual process")
            dual = process_from_config(raw["dual"], "dual")
            if not is_dual_pair(process, dual):
                raise ConfigError("dual", f"{process.kind.value} and {dual.kind.value} are not a recognized dual pair")
        elif exp == "duality":
            try:
                dual = dual_spec(process)
            except (KeyError, ContractError, ValidationError):
                raise ConfigError("process", f"{process.kind.value} has no default dual; give one under dual") from None

        grid = _grid(raw.get("grid"), exp in _NEEDS_GRID)
        if exp in ("duality", "null_calibration") and not (grid.x and grid.y):
            raise ConfigError("grid", "x, y and t must all be nonempty")
        sim = _sim(raw.get("sim"), grid, exp in _NEEDS_SIM)

        conv_raw = raw.get("convention", ["0+inf", "inf0+"])
        try:
            conv = ConventionPair.parse(conv_raw)
        except (ValidationError, TypeError, ValueError) as exc:
            raise ConfigError("convention", str(exc)) from None

        analytic = raw.get("analytic", {}) or {}
        if not isinstance(analytic, dict) or set(analytic) - {"x", "y"}:
            raise ConfigError("analytic", "expected a mapping with optional x, y flags")
        for k, v in analytic.items():
            if not isinstance(v, bool):
                raise ConfigError(f"analytic.{k}", "expected true or false")

        gates = raw.get("gates", {}) or {}
        params = raw.get("params", {}) or {}
        for key, val in (("gates", gates), ("params", params)):
            if not isinstance(val, dict):
                raise ConfigError(key, "expected a mapping")
        output = raw.get("output", name)
        if not isinstance(output, str) or not output:
            raise ConfigError("output", "expected a nonempty path prefix")
        return cls(
            name, exp, desc, process, dual, grid, sim, conv,
            bool(analytic.get("x", False)), bool(analytic.get("y", False)),
            copy.deepcopy(gates), copy.deepcopy(params), output,
        )

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"name": self.name, "experiment": self.experiment}
        if self.description:
            out["description"] = self.description
        if self.process is not None:
            out["process"] = process_to_config(self.process)
        if self.dual is not None:
            out["dual"] = process_to_config(self.dual)
        g = self.grid.to_dict()
        if g:
            out["grid"] = g
        if self.sim is not None:
            out["sim"] = _sim_to_dict(self.sim)
        out["convention"] = self.convention.tokens()
        if self.analytic_x or self.analytic_y:
            out["analytic"] = {"x": self.analytic_x, "y": self.analytic_y}
        if self.gates:
            out["gates"] = copy.deepcopy(self.gates)
        if self.params:
            out["params"] = copy.deepcopy(self.params)
        out["output"] = self.output
        return out

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def gate(self, key: str, default: Any) -> Any:
        return self.gates.get(key, default)

    def param(self, key: str, default: Any = None) -> Any:
        return self.params.get(key, default)


# ---------------------------------------------------------------- loading and overrides


def apply_overrides(raw: dict, overrides: list[str] | tuple[str, ...]) -> dict:
    """Return a copy of ``raw`` with ``dotted.key=value`` overrides applied.

    Values are parsed as YAML scalars or flow collections, so ``sim.seed=7``
    sets an integer and ``grid.t=[0.5,1]`` a list.
    """
    out = copy.deepcopy(raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, text = item.split("=", 1)
        parts = [p for p in key.strip().split(".") if p]
        if not parts:
            raise ConfigError(item, "empty override key")
        try:
            value = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(key, f"cannot parse value {text!r}: {exc}") from None
        node = out
        for i, p in enumerate(parts[:-1]):
            nxt = node.get(p)
            if nxt is None:
                nxt = node[p] = {}
            if not isinstance(nxt, dict):
                raise ConfigError(".".join(parts[: i + 1]), "is not a mapping")
            node = nxt
        node[parts[-1]] = value
    return out


def read_raw(path: str | Path) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError("", f"cannot read {p}: {exc.strerror}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("", f"{p} is not valid YAML: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("", f"{p} must contain a mapping")
    return raw


def load_config(path: str | Path, overrides: list[str] | tuple[str, ...] = ()) -> ExperimentConfig:
    return ExperimentConfig.from_dict(apply_overrides(read_raw(path), overrides))
