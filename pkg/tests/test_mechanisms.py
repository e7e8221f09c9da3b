from __future__ import annotations

import math

import numpy as np
import pytest

from lapdual.errors import ValidationError
from lapdual.mechanisms import (
    derivative_at_zero,
    env,
    eval_env,
    eval_not_up,
    eval_splp,
    eval_subordinator,
    mechanism_from_config,
    mechanism_to_config,
    merge_mechanisms,
    not_up,
    splp,
    subordinator,
)

from ._oracles import stable_A, stable_B


class TestEvalSplp:
    def test_pure_diffusion(self):
        assert eval_splp(splp(a=1.0), 2.0) == 4.0

    def test_small_atom_is_compensated(self):
        assert eval_splp(splp([(1.0, 1.0)]), 1.0) == pytest.approx(math.exp(-1.0), abs=1e-15)

    def test_drift_and_killing(self):
        assert eval_splp(splp(b=1.0, c=0.5), 3.0) == -3.5

    def test_large_atom_is_not_compensated(self):
        # truncation 1_(0,1]: an atom at 2 contributes e^{-2y} - 1 only
        assert eval_splp(splp([(2.0, 1.0)]), 0.5) == pytest.approx(math.exp(-1.0) - 1.0, abs=1e-15)

    def test_value_at_zero(self):
        assert eval_splp(splp([(0.5, 2.0)], {"alpha": 1.5, "scale": 1.0}, a=1, b=2, c=0.3), 0.0) == -0.3

    def test_vectorized_matches_scalar(self):
        m = splp([(0.5, 1.0), (3.0, 0.2)], {"alpha": 1.3, "scale": 0.7}, a=0.5, b=-1.0)
        ys = np.linspace(0, 20, 41)
        vec = eval_splp(m, ys)
        assert np.allclose(vec, [eval_splp(m, float(y)) for y in ys], rtol=0, atol=1e-13)


class TestStableClosedForm:
    # mpmath quadrature oracle, frozen at 50 digits
    @pytest.mark.parametrize("alpha", [0.3, 0.9, 1.0, 1.5, 1.95])
    @pytest.mark.parametrize("y", [0.01, 0.5, 1.0, 1.7, 10.0, 200.0])
    def test_compensated_against_quadrature(self, alpha, y):
        got = eval_splp(splp(stable={"alpha": alpha, "scale": 1.0}), y)
        assert got == pytest.approx(stable_A(y, alpha), rel=1e-12)

    @pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
    @pytest.mark.parametrize("y", [0.01, 0.5, 1.0, 3.0, 50.0])
    def test_subordinator_against_quadrature(self, alpha, y):
        got = eval_subordinator(subordinator(stable={"alpha": alpha, "scale": 1.0}), y)
        assert got == pytest.approx(stable_B(y, alpha), rel=1e-12)

    def test_frozen_values(self):
        # values of the mpmath oracle above, frozen
        assert eval_splp(splp(stable={"alpha": 1.5, "scale": 1.0}), 2.0) == pytest.approx(3.317539970860469, rel=1e-12)
        assert eval_subordinator(subordinator(stable={"alpha": 0.5, "scale": 1.0}), 1.0) == pytest.approx(
            1.7230554135925928, rel=1e-12
        )


class TestOtherClasses:
    def test_subordinator_examples(self):
        assert eval_subordinator(subordinator([(2.0, 1.0)]), 0.5) == pytest.approx(1 - math.exp(-1), abs=1e-15)
        assert eval_subordinator(subordinator(d=1.0, c=0.5), 2.0) == 2.5
        assert eval_subordinator(subordinator([(1.0, 3.0)], d=2.0, c=0.7), 0.0) == 0.7

    def test_not_up_examples(self):
        assert eval_not_up(not_up(a=1.0), 3.0) == 9.0
        assert eval_not_up(not_up([(1.0, 1.0)]), 1.0) == pytest.approx(math.exp(-1), abs=1e-15)
        assert eval_not_up(not_up([(4.0, 1.0)], a=2.0, d=1.0), 0.0) == 0.0

    def test_env_examples(self):
        assert eval_env(env([(-0.5, 1.0)]), 1.0) == pytest.approx(math.exp(0.5) - 1.5, abs=1e-15)
        assert eval_env(env(a=2.0), 1.0) == 2.0
        assert eval_env(env([(1.0, 1.0)], a=1.0, b=2.0, c=0.25), 0.0) == -0.25

    def test_env_atom_outside_truncation(self):
        # m = 2 lies outside [-1, 1]
        assert eval_env(env([(2.0, 1.0)]), 1.0) == pytest.approx(math.exp(-2.0) - 1.0, abs=1e-15)


class TestDerivativeAtZero:
    def test_splp_drift(self):
        assert derivative_at_zero(splp(a=1.0, b=2.0)) == -2.0

    def test_subordinator_drift(self):
        assert derivative_at_zero(subordinator(d=1.0)) == 1.0

    def test_stable_subordinator_moment(self):
        # int_0^1 u u^{-1.5} du = 2
        assert derivative_at_zero(subordinator(stable={"alpha": 0.5, "scale": 1.0})) == pytest.approx(2.0)

    def test_large_atom_moment(self):
        # Psi'(0) = -b - int_{(1,inf)} u nu(du)
        assert derivative_at_zero(splp([(3.0, 0.5), (0.5, 1.0)], b=1.0)) == pytest.approx(-1.0 - 1.5)

    def test_finite_difference_agrees(self):
        m = splp([(3.0, 0.5), (0.5, 1.0)], {"alpha": 1.5, "scale": 0.3}, a=0.2, b=1.0)
        h = 1e-6
        fd = (eval_splp(m, h) - eval_splp(m, 0.0)) / h
        assert derivative_at_zero(m) == pytest.approx(fd, abs=1e-4)


class TestValidation:
    @pytest.mark.parametrize("atoms", [[(0.0, 1.0)], [(-0.5, 1.0)]])
    def test_bad_atom_locations(self, atoms):
        with pytest.raises(ValidationError):
            splp(atoms)

    def test_zero_location_message(self):
        with pytest.raises(ValidationError, match="atom location must be nonzero"):
            subordinator([(0.0, 1.0)])

    def test_env_floor(self):
        env([(-1.0, 0.5)])
        with pytest.raises(ValidationError):
            env([(-1.5, 0.5)])

    def test_signs(self):
        with pytest.raises(ValidationError):
            splp(a=-1.0)
        with pytest.raises(ValidationError):
            subordinator(c=-0.1)
        with pytest.raises(ValidationError):
            not_up(d=-1.0)

    def test_stable_index_ranges(self):
        with pytest.raises(ValidationError):
            subordinator(stable={"alpha": 1.2, "scale": 1.0})
        with pytest.raises(ValidationError):
            splp(stable={"alpha": 2.0, "scale": 1.0})

    def test_nonpositive_mass(self):
        with pytest.raises(ValidationError):
            splp([(1.0, 0.0)])


class TestConfig:
    def test_round_trip_exact(self):
        m = splp([(0.1, 0.3), (2.5, 1e-7)], {"alpha": 1.25, "scale": 0.2}, a=0.5, b=-0.1, c=0.01)
        cfg = mechanism_to_config(m)
        assert mechanism_from_config(cfg) == m
        assert cfg["atoms"] == [[0.1, 0.3], [2.5, 1e-7]]

    def test_unknown_class(self):
        with pytest.raises(ValidationError, match="unknown mechanism class"):
            mechanism_from_config({"class": "bogus"})

    def test_unknown_key(self):
        with pytest.raises(ValidationError):
            mechanism_from_config({"class": "subordinator", "b": 1.0})

    def test_merge_is_additive(self):
        a = subordinator([(1.0, 0.5)], d=0.2)
        b = subordinator([(2.0, 0.3)], c=0.1)
        m = merge_mechanisms(a, b)
        for y in (0.0, 0.3, 2.0, 9.0):
            assert eval_subordinator(m, y) == pytest.approx(eval_subordinator(a, y) + eval_subordinator(b, y), abs=1e-12)
