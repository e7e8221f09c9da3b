"""Property tests for the invariants of each module."""

from __future__ import annotations

import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from lapdual.duality import McEstimate, mc_laplace
from lapdual.flows import cb_flow, flow_semigroup_gap
from lapdual.mechanisms import (
    env,
    eval_env,
    eval_not_up,
    eval_splp,
    eval_subordinator,
    not_up,
    splp,
    subordinator,
)
from lapdual.paths import PathState, ProcessSpec, SimConfig, dual_spec, run_paths, step_cb, symbol_of
from lapdual.rng import PathRng
from lapdual.symbols import (
    ConventionPair,
    check_symbol_duality,
    combine_symbols,
    dual_symbol,
    eval_lds,
    exp_conv,
    random_lds_symbol,
)

SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
INF = math.inf

pos = st.floats(0.05, 3.0)
mass = st.floats(0.01, 2.0)
atoms = st.lists(st.tuples(pos, mass), max_size=3)
ys = st.floats(0.0, 20.0)
seeds = st.integers(0, 2**32)


def stable_part(hi: float):
    return st.none() | st.fixed_dictionaries({"alpha": st.floats(0.1, hi - 0.05), "scale": st.floats(0.01, 1.0)})


splps = st.builds(splp, atoms, stable_part(2.0), a=st.floats(0, 2), b=st.floats(-2, 2), c=st.floats(0, 1))
subs = st.builds(subordinator, atoms, stable_part(1.0), d=st.floats(0, 2), c=st.floats(0, 1))
not_ups = st.builds(not_up, atoms, stable_part(2.0), a=st.floats(0, 2), d=st.floats(0, 2))
pure_jump_splps = st.builds(splp, st.lists(st.tuples(pos, mass), min_size=1, max_size=3))


def second_diffs(f, grid):
    v = np.asarray(f(grid), dtype=float)
    return v[2:] - 2 * v[1:-1] + v[:-2]


GRID = np.linspace(0.0, 10.0, 41)


class TestMechanismShape:
    @SETTINGS
    @given(splps)
    def test_splp_convex(self, m):
        assert np.all(second_diffs(lambda y: eval_splp(m, y), GRID) >= -1e-9)

    @SETTINGS
    @given(subs)
    def test_subordinator_nonneg_increasing_concave(self, m):
        v = eval_subordinator(m, GRID)
        assert np.all(v >= 0.0) and np.all(np.diff(v) >= -1e-12)
        assert np.all(second_diffs(lambda y: eval_subordinator(m, y), GRID) <= 1e-9)

    @SETTINGS
    @given(not_ups)
    def test_not_up_nonneg_convex(self, m):
        assert np.all(eval_not_up(m, GRID) >= -1e-12)
        assert np.all(second_diffs(lambda y: eval_not_up(m, y), GRID) >= -1e-9)

    @SETTINGS
    @given(st.lists(st.tuples(st.floats(-1.0, 3.0).filter(lambda u: abs(u) > 0.01), mass), max_size=3),
           st.floats(0, 2), st.floats(-2, 2))
    def test_env_convex(self, at, a, b):
        m = env(at, a=a, b=b)
        assert np.all(second_diffs(lambda z: eval_env(m, z), GRID) >= -1e-9)

    @settings(max_examples=10, deadline=None)
    @given(st.floats(0.2, 1.8), st.floats(0.5, 5.0))
    def test_atomic_approximations_converge_to_stable(self, alpha, y):
        # midpoint atoms of the density on (delta, 1] with delta -> 0: each is
        # a valid convex exponent and their values approach the closed form
        target = float(eval_splp(splp(stable={"alpha": alpha, "scale": 1.0}), y))
        errs = []
        for n, delta in ((100, 1e-4), (400, 1e-8), (1600, 1e-16)):
            edges = np.geomspace(delta, 1.0, n + 1)
            mid = np.sqrt(edges[1:] * edges[:-1])
            w = (edges[1:] ** -alpha - edges[:-1] ** -alpha) / -alpha
            m = splp(list(zip(mid, w)))
            assert np.all(second_diffs(lambda v: eval_splp(m, v), GRID) >= -1e-9)
            errs.append(abs(float(eval_splp(m, y)) - target))
        # near alpha = 1 the error changes sign, so allow a small noise floor
        scale = max(1.0, abs(target))
        assert errs[2] <= errs[0] + 1e-5 * scale and errs[2] <= 2e-3 * scale


class TestSymbols:
    @SETTINGS
    @given(seeds)
    def test_transposition(self, seed):
        s = random_lds_symbol(seed)
        g = np.linspace(0.0, 10.0, 8)
        assert check_symbol_duality(s, [(a, b) for a in g for b in g]) <= 1e-12
        assert dual_symbol(dual_symbol(s)) == s

    @SETTINGS
    @given(seeds, st.floats(0.0, 50.0))
    def test_vanishing_at_infinity(self, seed, v):
        s = random_lds_symbol(seed)
        assert eval_lds(s, INF, v) == 0.0 and eval_lds(s, v, INF) == 0.0

    @SETTINGS
    @given(seeds, st.floats(0.1, 5.0))
    def test_continuity_at_zero(self, seed, y):
        # stable_phi mixtures vanish only like 1 / log(1/eps), hence the
        # geometric ladder of eps and the loose final tolerance
        s = random_lds_symbol(seed)
        eps = (1e-4, 1e-16, 1e-64, 1e-256)
        for at in (lambda e: eval_lds(s, e, y) - eval_lds(s, 0.0, y),
                   lambda e: eval_lds(s, y, e) - eval_lds(s, y, 0.0)):
            gaps = [abs(at(e)) for e in eps]
            assert all(b <= a + 1e-15 for a, b in zip(gaps, gaps[1:]))
            assert gaps[-1] <= 1e-2 * max(1.0, y)

    @SETTINGS
    @given(seeds, st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(0.0, 5.0), st.floats(0.0, 5.0))
    def test_cone_linearity_same_family(self, seed, w1, w2, x, y):
        s = random_lds_symbol(seed)
        c = combine_symbols([(w1, s), (w2, s)])
        assert math.isclose(eval_lds(c, x, y), (w1 + w2) * eval_lds(s, x, y), rel_tol=1e-12, abs_tol=1e-12)

    @SETTINGS
    @given(st.floats(0.0, 10.0) | st.just(INF), st.floats(0.0, 10.0) | st.just(INF),
           st.sampled_from([["0+inf", "inf0+"], ["0inf-", "inf-0"], ["0inf-", "inf0+"], ["0+inf", "inf-0"]]))
    def test_exp_conv_range(self, x, y, tokens):
        c = ConventionPair.parse(tokens)
        v = exp_conv(x, y, c)
        assert 0.0 <= v <= 1.0 and v == exp_conv(y, x, c.transposed())


class TestSymbolOfSpecs:
    @SETTINGS
    @given(splps, not_ups, subs, st.floats(0.0, 5.0), st.floats(0.0, 5.0))
    def test_dual_spec_has_dual_symbol(self, psi, sigma, phi, x, y):
        spec = ProcessSpec.cbci(psi, sigma, phi)
        a = eval_lds(symbol_of(dual_spec(spec)), y, x)
        b = eval_lds(symbol_of(spec), x, y)
        assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)

    @SETTINGS
    @given(subs, st.floats(0.0, 5.0), st.floats(0.0, 5.0))
    def test_subordinator_pair(self, phi, x, y):
        spec = ProcessSpec.subordinator(phi)
        a = eval_lds(symbol_of(dual_spec(spec)), y, x)
        assert math.isclose(a, eval_lds(symbol_of(spec), x, y), rel_tol=1e-12, abs_tol=1e-12)


class TestFlows:
    @SETTINGS
    @given(splps, st.floats(0.01, 5.0), st.floats(0.01, 5.0), st.floats(0.0, 2.0))
    def test_monotone_in_start(self, psi, y1, y2, t):
        lo, hi = sorted((y1, y2))
        a, b = cb_flow(psi, lo, t, 1e-10), cb_flow(psi, hi, t, 1e-10)
        assert a.u <= b.u * (1 + 1e-9) + 1e-12

    @SETTINGS
    @given(splps, st.floats(0.01, 5.0), st.floats(0.0, 2.0), st.floats(0.0, 2.0))
    def test_semigroup(self, psi, y, t, s):
        assert flow_semigroup_gap(psi, y, t, s, 1e-10) <= 1e-8

    @SETTINGS
    @given(st.builds(splp, st.lists(st.tuples(st.floats(0.05, 1.0), mass), max_size=3), stable_part(2.0),
                     a=st.floats(0, 2), b=st.floats(-2, 0)), st.floats(0.01, 5.0))
    def test_nonincreasing_when_psi_nonneg(self, psi, y):
        # b <= 0, c = 0 and jumps in (0, 1] make every term nonnegative
        us = [cb_flow(psi, y, t, 1e-10).u for t in (0.0, 0.5, 1.0, 2.0)]
        assert all(b <= a * (1 + 1e-9) for a, b in zip(us, us[1:]))

    @SETTINGS
    @given(st.builds(splp, b=st.floats(0, 2), c=st.floats(0, 1)), st.floats(0.01, 5.0))
    def test_nondecreasing_when_minus_psi_is_subordinator(self, psi, y):
        us = [cb_flow(psi, y, t, 1e-10).u for t in (0.0, 0.5, 1.0, 2.0)]
        assert all(b >= a * (1 - 1e-9) for a, b in zip(us, us[1:]))


PATH_SETTINGS = settings(max_examples=15, deadline=None)


class TestPaths:
    @PATH_SETTINGS
    @given(pure_jump_splps, st.floats(0.0, 3.0), st.floats(0.0, 3.0), seeds)
    def test_monotone_in_start(self, psi, x1, x2, seed):
        lo, hi = sorted((x1, x2))
        cfg = SimConfig(step=0.05, horizon=1.0, paths=200, seed=seed)
        a = run_paths(ProcessSpec.cb(psi), lo, cfg).terminal()
        b = run_paths(ProcessSpec.cb(psi), hi, cfg).terminal()
        assert np.all(a <= b)

    @PATH_SETTINGS
    @given(splps, st.floats(0.0, 3.0), seeds)
    def test_seed_determinism(self, psi, x, seed):
        cfg = SimConfig(step=0.05, horizon=0.5, paths=50, seed=seed)
        a, b = run_paths(ProcessSpec.cb(psi), x, cfg), run_paths(ProcessSpec.cb(psi), x, cfg)
        assert np.array_equal(a.values, b.values) and np.array_equal(a.codes, b.codes)

    @PATH_SETTINGS
    @given(splps, st.floats(0.1, 3.0), seeds, st.integers(0, 20))
    def test_step_api_equals_batch(self, psi, x, seed, path):
        cfg = SimConfig(step=0.1, horizon=0.5, paths=path + 1, seed=seed)
        batch = run_paths(ProcessSpec.cb(psi), x, cfg)
        rng = PathRng(seed, path)
        s = PathState.start(x, rng)
        for _ in range(5):
            s = step_cb(s, psi, 0.1, rng)
        assert s.value == batch.terminal()[path] or (np.isnan(s.value) and np.isnan(batch.terminal()[path]))
        assert int(s.status) == int(batch.statuses()[path])

    @PATH_SETTINGS
    @given(splps, seeds)
    def test_strong_absorption(self, psi, seed):
        times = tuple(round(0.1 * k, 10) for k in range(1, 11))
        out = run_paths(ProcessSpec.cb(psi), 0.5, SimConfig(step=0.05, horizon=1.0, paths=200, seed=seed), times)
        for j in range(1, len(times)):
            done = out.codes[j - 1] != 0
            assert np.array_equal(out.codes[j][done], out.codes[j - 1][done])
            assert np.array_equal(out.values[j][done], out.values[j - 1][done])


class TestEstimates:
    @settings(max_examples=10, deadline=None)
    @given(pure_jump_splps, seeds)
    def test_laplace_monotone_in_start_and_argument(self, psi, seed):
        cfg = SimConfig(step=0.05, horizon=1.0, paths=300, seed=seed)
        spec = ProcessSpec.cb(psi)
        by_x = [mc_laplace(spec, x, 1.0, 1.0, cfg).mean for x in (0.5, 1.0, 2.0)]
        by_y = [mc_laplace(spec, 1.0, y, 1.0, cfg).mean for y in (0.5, 1.0, 2.0)]
        assert by_x == sorted(by_x, reverse=True) and by_y == sorted(by_y, reverse=True)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=200))
    def test_estimate_invariants(self, scores):
        s = np.array(scores)
        est = McEstimate.from_scores(s, np.zeros(s.size, dtype=np.int8))
        assert 0.0 <= est.mean <= 1.0
        assert est.stderr <= 0.5 / math.sqrt(est.n) + 1e-15
        assert est.frac_zero + est.frac_inf <= 1.0
