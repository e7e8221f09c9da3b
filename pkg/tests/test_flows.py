from __future__ import annotations

import math

import pytest

from lapdual.errors import ValidationError
from lapdual.flows import (
    BLOW_UP_CAP,
    cb_flow,
    cb_laplace,
    cbi_flow,
    cbi_laplace,
    flow_semigroup_gap,
    random_flow_cases,
    subordinator_limit,
)
from lapdual.mechanisms import splp, subordinator

TOL = 1e-10


class TestCbFlow:
    def test_zero_mechanism(self):
        assert cb_flow(splp(), 5.0, 7.0).u == 5.0

    def test_quadratic(self):
        # u_t = y / (1 + a y t)
        assert cb_flow(splp(a=1.0), 1.0, 1.0, TOL).u == pytest.approx(0.5, abs=1e-10)
        assert cb_flow(splp(a=2.0), 3.0, 0.25, TOL).u == pytest.approx(3.0 / 2.5, abs=1e-10)

    def test_linear(self):
        assert cb_flow(splp(b=1.0), 1.0, math.log(2.0), TOL).u == pytest.approx(2.0, abs=1e-10)

    def test_time_zero(self):
        r = cb_flow(splp(a=1.0), 3.0, 0.0)
        assert (r.u, r.killed_weight, r.steps_used, r.blow_up) == (3.0, 1.0, 0, False)

    def test_blow_up(self):
        r = cb_flow(splp(b=40.0), 1.0, 1.0)
        assert r.blow_up and r.u == math.inf
        assert math.log(BLOW_UP_CAP) / 40.0 < 1.0
        assert cb_laplace(splp(b=40.0), 1.0, 1.0, 1.0) == 0.0

    def test_killing_lifts_zero(self):
        # Psi(0) = -c < 0 pushes the flow off 0 at speed c
        r = cb_flow(splp(c=0.5), 0.0, 2.0, TOL)
        assert r.u == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("y,t", [(-1.0, 1.0), (1.0, -1.0), (math.inf, 1.0), (1.0, math.nan)])
    def test_bad_arguments(self, y, t):
        with pytest.raises(ValidationError):
            cb_flow(splp(a=1.0), y, t)


class TestLaplace:
    def test_cb_example(self):
        assert cb_laplace(splp(a=1.0), 2.0, 1.0, 1.0, TOL) == pytest.approx(math.exp(-1.0), rel=1e-9)

    def test_trivial_cases(self):
        psi = splp([(0.5, 1.0)], a=1.0, b=0.3)
        assert cb_laplace(psi, 0.0, 2.0, 1.0) == 1.0
        assert cb_laplace(psi, 1.5, 2.0, 0.0) == math.exp(-3.0)

    def test_cbi_reduces_to_cb(self):
        psi = splp([(0.5, 1.0)], a=1.0, b=0.3)
        got = cbi_laplace(psi, subordinator(), 1.2, 0.7, 0.9, TOL)
        assert got == pytest.approx(cb_laplace(psi, 1.2, 0.7, 0.9, TOL), rel=1e-12)

    def test_cbi_immigration_only(self):
        assert cbi_laplace(splp(), subordinator(d=1.0), 0.0, 1.0, 2.0, TOL) == pytest.approx(math.exp(-2.0), rel=1e-10)

    def test_cbi_linear_growth(self):
        # u_s = e^s, int_0^1 e^s ds = e - 1
        got = cbi_laplace(splp(b=1.0), subordinator(d=1.0), 0.0, 1.0, 1.0, TOL)
        assert got == pytest.approx(math.exp(-(math.e - 1.0)), rel=1e-9)
        assert round(got, 7) == 0.1793741

    def test_cbi_against_scipy_oracle(self):
        # frozen output of scipy DOP853 (rtol 1e-13) on the augmented system
        psi = splp([(0.4, 0.7), (2.0, 0.2)], a=0.5, b=0.3, c=0.1)
        phi = subordinator([(1.2, 0.6)], d=0.3, c=0.25)
        r = cbi_flow(psi, phi, 2.0, 1.5, 1e-11)
        assert r.u == pytest.approx(1.2344397625860721, rel=1e-9)
        assert r.killed_weight == pytest.approx(0.16608430538415186, rel=1e-9)
        assert cbi_laplace(psi, phi, 0.8, 2.0, 1.5, 1e-11) == pytest.approx(0.061864327002940964, rel=1e-9)

    def test_cbi_blow_up_uses_limit(self):
        # after blow-up the survival integrand is Phi(inf) = c + total mass
        phi = subordinator([(1.0, 0.5)], c=0.25)
        assert subordinator_limit(phi) == 0.75
        assert subordinator_limit(subordinator(d=1.0)) == math.inf
        r = cbi_flow(splp(b=40.0), phi, 1.0, 2.0)
        assert r.blow_up
        assert 0.0 < r.killed_weight < math.exp(-0.75 * (2.0 - math.log(BLOW_UP_CAP) / 40.0) + 1e-9)
        assert cbi_laplace(splp(b=40.0), phi, 0.0, 1.0, 2.0) == r.killed_weight
        assert cbi_laplace(splp(b=40.0), phi, 1.0, 1.0, 2.0) == 0.0

    def test_branching_identity(self):
        psi = splp([(0.3, 2.0), (1.5, 0.4)], {"alpha": 1.4, "scale": 0.3}, a=0.2, b=-0.5)
        for x, xp in ((0.5, 1.5), (2.0, 0.25)):
            joint = cb_laplace(psi, x + xp, 1.3, 0.8)
            assert joint == pytest.approx(cb_laplace(psi, x, 1.3, 0.8) * cb_laplace(psi, xp, 1.3, 0.8), rel=1e-14)


class TestSemigroup:
    def test_examples(self):
        assert flow_semigroup_gap(splp(), 1.0, 1.0, 1.0) == 0.0
        assert flow_semigroup_gap(splp(a=1.0), 1.0, 0.5, 0.5, TOL) <= 1e-8
        assert flow_semigroup_gap(splp(b=1.0), 1.0, 1.0, 1.0, TOL) <= 1e-8

    def test_random_suite(self):
        cases = random_flow_cases(2024, 50)
        assert len(cases) == 50
        worst = max(flow_semigroup_gap(c.psi, c.y, c.t, c.s, TOL) for c in cases)
        assert worst <= 1e-8

    def test_cases_are_reproducible(self):
        assert random_flow_cases(3, 4) == random_flow_cases(3, 4)
