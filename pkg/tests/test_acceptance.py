"""Acceptance suite: one catalog experiment per criterion.

Run under pytest, or directly with ``python tests/test_acceptance.py`` to get
only the ``criterion N: PASS/FAIL`` lines.
"""

from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass

import pytest

from lapdual.cli import catalog
from lapdual.config import load_config, read_raw
from lapdual.experiments import run_experiment
from lapdual.flows import cb_flow
from lapdual.mechanisms import not_up, splp
from lapdual.paths import non_explosion_screen
from lapdual.symbols import random_lds_symbol


@dataclass(frozen=True)
class Criterion:
    number: int
    config: str
    # fragments of the raw config that pin the criterion's parameters
    expect: dict
    max_seconds: float = math.inf


def _sub(raw: dict, path: str):
    for key in path.split("."):
        raw = raw[key]
    return raw


CRITERIA = [
    Criterion(1, "subordinator_duality", {
        "process.phi.atoms": [[1.0, 0.5], [2.0, 0.3]], "process.phi.d": 0.2,
        "grid.x": [0.0, 1.0, 2.0], "grid.y": [0.5, 1.0, 2.0], "grid.t": [0.5, 1.0],
        "sim.paths": 100_000, "sim.step": 1e-3, "gates.z_max": 3.0,
    }, max_seconds=60.0),
    Criterion(2, "cb_feller_duality", {
        "process.psi.a": 1.0, "grid.x": [0.5, 1.0, 2.0], "grid.y": [0.5, 1.0], "grid.t": [0.5, 1.0],
        "sim.paths": 100_000, "gates.z_max": 3.0,
    }),
    Criterion(3, "cbi_laplace", {
        "process.kind": "cbci", "sim.paths": 100_000, "gates.z_max": 3.0,
    }),
    Criterion(4, "cbc_duality", {
        "process.psi.b": -1.0, "process.sigma.a": 1.0, "grid.x": [1.0], "grid.y": [1.0],
        "grid.t": [0.5, 1.0], "sim.paths": 100_000, "sim.step": 1e-3, "gates.z_max": 3.0,
    }),
    Criterion(5, "cbre_duality", {
        "process.psi.a": 1.0, "process.kappa.atoms": [[1.0, 0.5]], "grid.x": [1.0], "grid.y": [1.0],
        "grid.t": [0.5], "sim.paths": 100_000, "gates.z_max": 3.0,
    }),
    Criterion(6, "decomposable_duality", {
        "grid.x": [1.0], "grid.y": [1.0], "grid.t": [0.5], "sim.paths": 100_000,
        "gates.z_max": 3.0, "gates.max_frac_exploded": 1e-3, "gates.screen": True,
    }),
    Criterion(7, "symbol_duality", {
        "params.grid_n": 20, "params.grid_cap": 10.0, "params.gammas": [0.0, 0.5, 2.0],
        "gates.tol": 1e-12, "gates.gamma_rtol": 1e-3,
    }),
    Criterion(8, "cb_complete_monotonicity", {
        "process.psi.a": 1.0, "grid.x": [0.25 * i for i in range(21)], "params.order": 4,
        "params.counterexample": True, "gates.noise_factor": 3.0,
    }),
    Criterion(9, "flow_semigroup", {"params.n_cases": 50, "gates.tol": 1e-8}),
    Criterion(10, "generator_symbol", {"gates.tol": 1e-3}),
    Criterion(11, "boundary_conventions", {"process.kind": "subordinator", "gates.tol": 1e-12, "gates.z_max": 3.0}),
    Criterion(12, "null_calibration", {"params.seeds": 20, "gates.z_max": 3.0, "gates.min_fraction": 0.99}),
]


def _extra_checks(number: int, cfg) -> list[str]:
    """Criterion-specific checks outside the config gates; returns failures."""
    bad = []
    if number == 2:
        u = cb_flow(splp(a=1.0), 1.0, 1.0, 1e-10).u
        if abs(u - 0.5) > 1e-9:
            bad.append(f"u_1(1)={u!r}")
    if number == 3 and cfg.process.sigma not in (None, not_up()):
        bad.append("collision mechanism is not zero")
    if number == 6 and not non_explosion_screen(cfg.process):
        bad.append("non-explosion screen is false")
    if number == 7:
        s = random_lds_symbol(cfg.params["seed"])
        empty = [p for p in (s.psi, s.sigma, s.sigma_hat, s.psi_hat, s.kappa) if p == type(p)()]
        empty += [t for t in (s.big_sigma, s.big_phi) if not (t.atoms or t.products or t.mixtures)]
        if empty:
            bad.append("random symbol misses a term")
    if number == 10:
        kinds = sorted(c["process"]["kind"] for c in cfg.params["cases"])
        if kinds != ["cb", "subordinator"] or 1e-4 not in cfg.params["h_list"]:
            bad.append(f"cases {kinds}")
    return bad


def evaluate(c: Criterion) -> tuple[bool, str]:
    path = catalog()[c.config]
    raw = read_raw(path)
    wrong = [k for k, v in c.expect.items() if _sub(raw, k) != v]
    cfg = load_config(path)
    start = time.perf_counter()
    result = run_experiment(cfg)
    elapsed = time.perf_counter() - start
    bad = _extra_checks(c.number, cfg)
    if wrong:
        bad.append(f"parameters differ at {wrong}")
    if elapsed > c.max_seconds:
        bad.append(f"runtime {elapsed:.1f}s over {c.max_seconds:.0f}s")
    headline = result.summary[0] if result.summary else ""
    ok = result.passed and not bad
    detail = "; ".join([headline, f"{elapsed:.1f}s", *bad])
    return ok, f"criterion {c.number}: {'PASS' if ok else 'FAIL'} [{c.config}] {detail}"


@pytest.mark.parametrize("c", CRITERIA, ids=[f"criterion_{c.number}" for c in CRITERIA])
def test_criterion(c: Criterion, capsys):
    ok, line = evaluate(c)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def test_one_catalog_entry_per_criterion():
    assert sorted(c.config for c in CRITERIA) == sorted(catalog())


if __name__ == "__main__":
    results = [evaluate(c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
