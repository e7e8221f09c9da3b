from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from lapdual.errors import ValidationError
from lapdual.mechanisms import JumpMeasureSpec, env, not_up, splp, subordinator
from lapdual.symbols import (
    BivariateTerm,
    ConventionPair,
    InfZero,
    LdsSymbol,
    Mixture,
    Product,
    ZeroInf,
    check_negative_part_bound,
    check_symbol_duality,
    combine_symbols,
    cross_derivative_phi,
    dual_symbol,
    eval_lds,
    exp_conv,
    exp_conv_array,
    pregenerator_apply,
    random_lds_symbol,
    symbol_from_config,
    symbol_to_config,
)

INF = math.inf
PAIRS = [ConventionPair.parse(t) for t in (["0+inf", "inf0+"], ["0inf-", "inf-0"], ["0inf-", "inf0+"], ["0+inf", "inf-0"])]


class TestExpConv:
    def test_zero_times_inf(self):
        assert exp_conv(0.0, INF, ConventionPair(ZeroInf.ZeroPlusInf)) == 0.0
        assert exp_conv(0.0, INF, ConventionPair(ZeroInf.ZeroInfMinus)) == 1.0

    def test_inf_times_zero(self):
        # the unadorned factor is the value of the product: inf * 0+ = inf
        assert exp_conv(INF, 0.0, ConventionPair(inf_zero=InfZero.InfZeroPlus)) == 0.0
        assert exp_conv(INF, 0.0, ConventionPair(inf_zero=InfZero.InfMinusZero)) == 1.0

    def test_interior(self):
        for c in PAIRS:
            assert exp_conv(2.0, 3.0, c) == pytest.approx(0.00247875217666636, rel=1e-14)
            assert exp_conv(INF, 2.0, c) == 0.0
            assert exp_conv(0.0, 0.0, c) == 1.0

    def test_transposed_swaps_arguments(self):
        for c in PAIRS:
            for x, y in ((0.0, INF), (INF, 0.0), (1.0, 2.0)):
                assert exp_conv(x, y, c) == exp_conv(y, x, c.transposed())
            assert c.transposed().transposed() == c

    def test_array_form(self):
        xs = np.array([0.0, INF, 1.0, 0.0])
        ys = np.array([INF, 0.0, 2.0, 0.0])
        for c in PAIRS:
            assert list(exp_conv_array(xs, ys, c)) == [exp_conv(x, y, c) for x, y in zip(xs, ys)]

    def test_parse_rejects(self):
        with pytest.raises(ValidationError):
            ConventionPair.parse(["0+inf", "0inf-"])
        with pytest.raises(ValidationError):
            ConventionPair.parse(["0+inf"])


def _stable_sigma_symbol():
    return LdsSymbol(big_sigma=BivariateTerm("sigma", mixtures=(Mixture("stable_sigma"),)))


class TestEvalLds:
    def test_branching_term(self):
        assert eval_lds(LdsSymbol(psi=splp(a=1.0)), 3.0, 2.0) == 12.0

    def test_stable_mixture_closed_form(self):
        # int_0^1 z^{r+1} dr = z (z - 1) / ln z at z = x y = e
        z = math.e
        want = z * (z - 1.0) / math.log(z)
        assert eval_lds(_stable_sigma_symbol(), 1.0, math.e) == pytest.approx(want, rel=1e-10)
        assert want == pytest.approx(4.670774270471604, rel=1e-15)

    def test_stable_phi_mixture_closed_form(self):
        # int_0^1 x^r y^{1-r} dr = (x - y) / ln(x / y)
        s = LdsSymbol(big_phi=BivariateTerm("phi", mixtures=(Mixture("stable_phi"),)))
        x, y = 3.0, 0.5
        assert eval_lds(s, x, y) == pytest.approx(-(x - y) / math.log(x / y), rel=1e-10)

    def test_kappa_term(self):
        assert eval_lds(LdsSymbol(kappa=env(a=2.0)), 1.0, 3.0) == 18.0

    def test_vanishes_at_infinity(self):
        s = random_lds_symbol(3)
        for v in (0.0, 1.0, 5.0):
            assert eval_lds(s, INF, v) == 0.0
            assert eval_lds(s, v, INF) == 0.0

    def test_rejects_negative(self):
        with pytest.raises(ValidationError):
            eval_lds(LdsSymbol(), -1.0, 1.0)

    def test_gamma_mixture_against_quadrature(self):
        import mpmath as mp

        gam = 0.5
        s = LdsSymbol(big_phi=BivariateTerm("phi", mixtures=(Mixture("gamma_phi", gamma=gam),)))
        x, y = 1.5, 2.0
        want = mp.quad(lambda r: mp.log(1 + x * r) * mp.log(1 + y / r) * r**gam, [0, 1])
        assert -eval_lds(s, x, y) == pytest.approx(float(want), rel=1e-9)


class TestDualSymbol:
    def test_transposes_branching(self):
        d = dual_symbol(LdsSymbol(psi=splp(a=1.0)))
        assert d.psi_hat == splp(a=1.0) and d.psi.is_zero
        assert eval_lds(d, 2.0, 3.0) == 12.0

    def test_involution(self):
        s = random_lds_symbol(11)
        assert dual_symbol(dual_symbol(s)) == s

    def test_kappa_is_self_dual(self):
        s = LdsSymbol(kappa=env([(-0.5, 1.0), (2.0, 0.3)], a=1.0, b=0.2))
        assert dual_symbol(s) == s

    def test_cbc_symbol(self):
        s = LdsSymbol(psi=splp(b=-1.0), sigma=not_up(a=1.0))
        assert check_symbol_duality(s, [(1.0, 2.0)]) == 0.0
        assert eval_lds(s, 1.0, 2.0) == 6.0

    def test_random_symbol_grid(self):
        s = random_lds_symbol(5)
        g = np.linspace(0.0, 10.0, 20)
        assert check_symbol_duality(s, [(a, b) for a in g for b in g]) <= 1e-12

    def test_gamma_mixture_both_orientations(self):
        s = LdsSymbol(big_phi=BivariateTerm("phi", mixtures=(Mixture("gamma_phi"),)))
        assert check_symbol_duality(s, [(1.0, 1.0)]) <= 1e-12


class TestPregenerator:
    def test_cb(self):
        assert pregenerator_apply(LdsSymbol(psi=splp(a=1.0)), 1.0, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-15)

    def test_at_infinity(self):
        assert pregenerator_apply(random_lds_symbol(2), INF, 1.0) == 0.0

    def test_at_zero(self):
        s = LdsSymbol(big_phi=BivariateTerm("phi", products=(Product(subordinator(c=1.0), subordinator(d=1.0)),)))
        assert pregenerator_apply(s, 0.0, 2.0) == -2.0

    def test_subordinator_dual(self):
        s = LdsSymbol(big_phi=BivariateTerm("phi", products=(Product(subordinator(d=1.0), subordinator(d=1.0)),)))
        assert pregenerator_apply(s, 1.0, 1.0) == pytest.approx(-math.exp(-1.0), rel=1e-15)


class TestNegativePart:
    def test_cb_bound(self):
        sup, holds = check_negative_part_bound(LdsSymbol(psi=splp(a=1.0, b=1.0)), 10.0, 100)
        assert holds
        # x (y - y^2)_+ e^{-xy} <= x y e^{-xy} <= 1/e
        assert 0.0 < sup <= math.exp(-1.0)

    def test_pure_sigma(self):
        s = LdsSymbol(big_sigma=BivariateTerm("sigma", atoms=((1.0, 2.0, 0.5),)), sigma=not_up(a=1.0))
        assert tuple(check_negative_part_bound(s, 10.0, 50)) == (0.0, True)

    def test_gamma_mixture(self):
        s = LdsSymbol(big_phi=BivariateTerm("phi", mixtures=(Mixture("gamma_phi"),)))
        _, holds = check_negative_part_bound(s, 5.0, 20)
        assert holds
        assert cross_derivative_phi(s.big_phi) == pytest.approx(1.0, rel=1e-12)

    def test_killing_breaks_hypotheses(self):
        _, holds = check_negative_part_bound(LdsSymbol(psi=splp(c=0.1)), 1.0, 5)
        assert not holds

    def test_bad_grid(self):
        with pytest.raises(ValidationError):
            check_negative_part_bound(LdsSymbol(), 0.0, 10)


class TestCrossDerivative:
    @pytest.mark.parametrize("gamma", [0.0, 0.5, 2.0])
    def test_gamma_mixture(self, gamma):
        t = BivariateTerm("phi", mixtures=(Mixture("gamma_phi", gamma=gamma),))
        assert cross_derivative_phi(t) == pytest.approx(1.0 / (1.0 + gamma), rel=1e-12)

    def test_gamma_mixture_finite_difference(self):
        # independent check: d^2/dxdy at the origin from the quadrature kernel
        import mpmath as mp

        h = mp.mpf("1e-6")
        f = mp.quad(lambda r: mp.log(1 + h * r) * mp.log(1 + h / r), [0, h, 1])
        assert float(f / h**2) == pytest.approx(1.0, rel=1e-4)

    def test_atom(self):
        assert cross_derivative_phi(BivariateTerm("phi", atoms=((2.0, 3.0, 0.5),))) == 3.0

    def test_product_of_unit_atoms(self):
        t = BivariateTerm("phi", products=(Product(subordinator([(1.0, 1.0)]), subordinator([(1.0, 1.0)])),))
        assert cross_derivative_phi(t) == pytest.approx(1.0)

    def test_infinite_coordinate(self):
        assert cross_derivative_phi(BivariateTerm("phi", atoms=((INF, 1.0, 1.0),))) == INF

    def test_sigma_role_rejected(self):
        with pytest.raises(ValidationError):
            cross_derivative_phi(BivariateTerm("sigma"))


def _without_stable(s: LdsSymbol) -> LdsSymbol:
    def strip(m):
        return replace(m, measure=JumpMeasureSpec(m.measure.atoms, None, m.measure.support_floor))

    return replace(s, **{f: strip(getattr(s, f)) for f in ("psi", "sigma", "sigma_hat", "psi_hat", "kappa")})


class TestConeAndConfig:
    def test_combination_is_linear(self):
        # one stable density per measure: the second symbol carries atoms only
        a, b = random_lds_symbol(1), _without_stable(random_lds_symbol(2))
        c = combine_symbols([(0.3, a), (2.0, b)])
        for x, y in ((0.5, 1.0), (2.0, 0.1), (3.0, 4.0)):
            assert eval_lds(c, x, y) == pytest.approx(0.3 * eval_lds(a, x, y) + 2.0 * eval_lds(b, x, y), rel=1e-12)

    def test_combination_same_index_merges(self):
        a = LdsSymbol(psi=splp(stable={"alpha": 1.5, "scale": 1.0}))
        c = combine_symbols([(1.0, a), (2.0, a)])
        assert c.psi.measure.stable.scale == 3.0
        assert eval_lds(c, 1.0, 2.0) == pytest.approx(3.0 * eval_lds(a, 1.0, 2.0), rel=1e-14)

    def test_combination_rejects_two_indices(self):
        a = LdsSymbol(psi=splp(stable={"alpha": 1.5, "scale": 1.0}))
        b = LdsSymbol(psi=splp(stable={"alpha": 0.5, "scale": 1.0}))
        with pytest.raises(ValidationError, match="different alpha"):
            combine_symbols([(1.0, a), (1.0, b)])

    def test_round_trip(self):
        s = random_lds_symbol(9)
        assert symbol_from_config(symbol_to_config(s)) == s

    def test_inf_token(self):
        s = LdsSymbol(big_phi=BivariateTerm("phi", atoms=((INF, 1.0, 0.5),)))
        cfg = symbol_to_config(s)
        assert cfg["big_phi"]["atoms"] == [["inf", 1.0, 0.5]]
        assert symbol_from_config(cfg) == s
