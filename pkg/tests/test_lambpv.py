import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gsesim.core import ModelError
from gsesim.lambpv import (
    PvDivergence,
    ci,
    decay_shift_decomposition,
    m_aux,
    n_aux,
    pv_closed,
    pv_quadrature,
    si,
)


class TestSiCi:
    @pytest.mark.parametrize("x", [1e-8, 0.1, 0.5, 1.0, 3.9, 4.0, 4.1, 10.0, 50.0, 200.0])
    def test_against_multiprecision(self, x):
        assert si(x) == pytest.approx(float(mpmath.si(x)), rel=1e-14, abs=1e-15)
        assert ci(x) == pytest.approx(float(mpmath.ci(x)), rel=1e-13, abs=1e-15)

    def test_si_odd_and_asymptote(self):
        assert si(0.0) == 0.0
        assert si(-2.0) == -si(2.0)
        assert si(1e4) == pytest.approx(math.pi / 2, abs=2e-4)

    def test_ci_domain(self):
        with pytest.raises(ModelError):
            ci(0.0)
        with pytest.raises(ModelError):
            ci(-1.0)

    @given(x=st.floats(1e-3, 100.0))
    @settings(max_examples=60)
    def test_series_and_fraction_consistent(self, x):
        # derivative identity d/dx [Si] = sin(x)/x via a central difference
        h = 1e-5 * max(x, 1.0)
        deriv = (si(x + h) - si(x - h)) / (2 * h)
        assert deriv == pytest.approx(math.sin(x) / x, abs=1e-7)


class TestClosedForms:
    @pytest.mark.parametrize("branch", ["+", "-"])
    @pytest.mark.parametrize("x", [0.5, 1.0, 2.5, 7.0, 20.0, 50.0])
    def test_matches_quadrature_oracle(self, x, branch):
        closed = pv_closed(x, branch)
        quad = pv_quadrature(x, branch)
        assert closed.a_value == pytest.approx(quad.a_value, abs=1e-6)
        assert closed.b_value == pytest.approx(quad.b_value, abs=1e-6)

    def test_b_dominated_by_1_over_x_at_small_argument(self):
        # the delta-function-like 1/x piece of B survives on both branches
        for branch in ("+", "-"):
            r = pv_closed(0.01, branch)
            assert r.b_value == pytest.approx(1.0 / 0.01, rel=0.05)

    def test_auxiliary_function_identities(self):
        # A and B re-expressed through the standard auxiliary pair
        for x in (0.7, 3.0, 12.0):
            plus = pv_closed(x, "+")
            assert plus.a_value == pytest.approx(-math.pi * m_aux(x), rel=1e-12)
            assert plus.b_value == pytest.approx(1.0 / x - math.pi * n_aux(x), rel=1e-12)

    def test_divergence_at_zero(self):
        with pytest.raises(PvDivergence):
            pv_closed(0.0, "+")
        with pytest.raises(PvDivergence):
            pv_quadrature(0.0, "-")

    def test_branch_validation(self):
        with pytest.raises(ModelError):
            pv_closed(1.0, "x")
        with pytest.raises(ModelError):
            pv_closed(-1.0, "+")


class TestDecomposition:
    @given(x=st.floats(0.01, 60.0))
    @settings(max_examples=60)
    def test_assembles_into_decay_and_shift(self, x):
        # per-pair self-energy factors scaled by kappa/pi plus the local
        # 2*kappa term give the interference-modulated decay and shift
        kappa = 0.76e6
        decay_factor, shift_factor = decay_shift_decomposition(x)
        kappa_g = 2 * kappa + (kappa / math.pi) * decay_factor
        shift = -(kappa / math.pi) * shift_factor
        assert kappa_g == pytest.approx(2 * kappa * (1 + math.cos(x)), rel=1e-12, abs=1e-3)
        assert shift == pytest.approx(kappa * math.sin(x), rel=1e-12, abs=1e-3)

    def test_quadratures(self):
        d, s = decay_shift_decomposition(math.pi / 2)
        assert d == pytest.approx(0.0, abs=1e-12)
        assert s == pytest.approx(-math.pi, rel=1e-15)
