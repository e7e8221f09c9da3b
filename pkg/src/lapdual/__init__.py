"""Monte Carlo and closed-form verification of Laplace duality.

Two positive Markov processes ``X`` and ``Y`` are Laplace dual when
``E_x[exp(-X_t y)] = E^y[exp(-x Y_t)]`` for all ``x, y, t``. The package
builds the processes from Levy-Khintchine mechanisms, simulates them with a
compiled Euler kernel (numpy fallback), and compares both sides.
"""

from __future__ import annotations

from ._backend import BACKEND
from .duality import (
    DualityReport,
    McEstimate,
    analytic_laplace,
    boundary_identities,
    cm_check,
    duality_gap,
    generator_fd_check,
    mc_laplace,
    null_z_scores,
)
from .errors import ContractError, NumericAccuracyError, StiffnessError, ValidationError
from .flows import cb_flow, cb_laplace, cbi_flow, cbi_laplace, flow_semigroup_gap
from .mechanisms import env, evaluate, not_up, splp, subordinator
from .paths import Kind, ProcessSpec, SimConfig, dual_spec, run_paths, symbol_of
from .symbols import ConventionPair, LdsSymbol, check_symbol_duality, dual_symbol, eval_lds, exp_conv

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConventionPair",
    "ContractError",
    "DualityReport",
    "Kind",
    "LdsSymbol",
    "McEstimate",
    "NumericAccuracyError",
    "ProcessSpec",
    "SimConfig",
    "StiffnessError",
    "ValidationError",
    "analytic_laplace",
    "boundary_identities",
    "cb_flow",
    "cb_laplace",
    "cbi_flow",
    "cbi_laplace",
    "check_symbol_duality",
    "cm_check",
    "dual_spec",
    "dual_symbol",
    "duality_gap",
    "env",
    "eval_lds",
    "evaluate",
    "exp_conv",
    "flow_semigroup_gap",
    "generator_fd_check",
    "mc_laplace",
    "not_up",
    "null_z_scores",
    "run_paths",
    "splp",
    "subordinator",
    "symbol_of",
]
