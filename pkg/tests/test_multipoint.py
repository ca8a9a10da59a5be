import math
import warnings

import numpy as np
import pytest

from gsesim.core import Emitter, FrequencyGrid, ModelError, Topology, Waveguide
from gsesim.multipoint import (
    EffectiveModel,
    MarkovWarning,
    build_effective,
    drive_vector,
    pair_sums,
    s_matrix,
)
from gsesim.nested import NestedParams, coupling_strengths, s21_nested_matrix
from gsesim.single import SingleGseParams, giant_decay, lamb_shift, s21_single
from conftest import (
    BETA_INNER,
    BETA_OUTER,
    KAPPA_INNER,
    KAPPA_OUTER,
    L_INNER,
    L_OUTER,
    SPEED,
    grid_around,
)


def random_two_point(rng, name, x0=0.0):
    kappa = rng.uniform(1e5, 2e6)
    length = rng.uniform(0.01, 0.3)
    f_res = rng.uniform(4e9, 5e9)
    return (
        Emitter(name, f_res, 0.0, (kappa, kappa), (x0, x0 + length)),
        SingleGseParams(kappa, 0.0, length, f_res, Waveguide(SPEED)),
    )


class TestPairSums:
    def test_self_terms_reproduce_single_gse_rates(self):
        # the j == l pair sums must equal the closed-form giant decay and
        # interference shift over random geometries
        rng = np.random.default_rng(11)
        for _ in range(100):
            em, p = random_two_point(rng, "e")
            j, gamma = pair_sums(
                em.positions, em.kappa_points, em.positions, em.kappa_points,
                em.f_res, SPEED,
            )
            assert gamma == pytest.approx(giant_decay(p), rel=1e-12)
            assert j == pytest.approx(lamb_shift(p), rel=1e-12, abs=1e-6)

    def test_cross_terms_reproduce_nested_couplings(self):
        rng = np.random.default_rng(12)
        wg = Waveguide(SPEED)
        for _ in range(100):
            f_res = rng.uniform(4e9, 5e9)
            l_i = rng.uniform(0.02, 0.1)
            l_o = l_i + rng.uniform(0.02, 0.2)
            k_i, k_o = rng.uniform(1e5, 2e6, 2)
            inner = SingleGseParams(k_i, BETA_INNER, l_i, f_res, wg)
            outer = SingleGseParams(k_o, BETA_OUTER, l_o, f_res, wg)
            p = NestedParams.from_geometry(inner, outer)
            j_ref, gamma_ref = coupling_strengths(p)
            x0 = (l_o - l_i) / 2
            j, gamma = pair_sums(
                (0.0, l_o), (k_o, k_o), (x0, x0 + l_i), (k_i, k_i), f_res, SPEED
            )
            scale = math.sqrt(k_i * k_o)
            assert gamma == pytest.approx(gamma_ref, rel=1e-12, abs=1e-12 * scale)
            assert j == pytest.approx(j_ref, rel=1e-12, abs=1e-12 * scale)

    def test_vectorized_over_frequency(self):
        em = Emitter("e", 4.35e9, 0.0, (1e6, 1e6), (0.0, 0.0828))
        f = np.linspace(4.3e9, 4.4e9, 7)
        j, gamma = pair_sums(em.positions, em.kappa_points, em.positions, em.kappa_points, f, SPEED)
        assert j.shape == gamma.shape == (7,)
        j0, g0 = pair_sums(em.positions, em.kappa_points, em.positions, em.kappa_points, f[3], SPEED)
        assert j[3] == j0 and gamma[3] == g0


class TestEffectiveModel:
    def test_symmetric_coupling_enforced(self):
        bad = np.array([[0.0, 1.0], [2.0, 0.0]], dtype=complex)
        with pytest.raises(ModelError):
            EffectiveModel(2, np.array([4e9 - 1j, 4e9 - 1j]), bad, np.ones(2, dtype=complex))

    def test_build_matches_closed_forms(self):
        wg = Waveguide(SPEED)
        t = Topology((
            Emitter("o", 4.35e9, BETA_OUTER, (KAPPA_OUTER,) * 2, (0.0, L_OUTER)),
            Emitter("i", 4.35e9, BETA_INNER, (KAPPA_INNER,) * 2,
                    ((L_OUTER - L_INNER) / 2, (L_OUTER + L_INNER) / 2)),
        ))
        model = build_effective(t, wg)
        inner = SingleGseParams(KAPPA_INNER, BETA_INNER, L_INNER, 4.35e9, wg)
        outer = SingleGseParams(KAPPA_OUTER, BETA_OUTER, L_OUTER, 4.35e9, wg)
        p = NestedParams.from_geometry(inner, outer)
        j_ref, gamma_ref = coupling_strengths(p)
        assert model.coupling[0, 1] == pytest.approx(j_ref - 1j * gamma_ref, rel=1e-12)
        assert -model.diag[1].imag == pytest.approx(giant_decay(inner) + BETA_INNER, rel=1e-12)

    def test_markov_warning_for_long_delay(self):
        wg = Waveguide(SPEED)
        t = Topology((Emitter("e", 4.35e9, 0.0, (1e8, 1e8), (0.0, 3.0)),))
        with pytest.warns(MarkovWarning):
            build_effective(t, wg)


class TestSMatrix:
    def test_single_emitter_matches_closed_form(self, waveguide):
        t = Topology((Emitter("i", 4.35e9, BETA_INNER, (KAPPA_INNER,) * 2, (0.0, L_INNER)),))
        p = SingleGseParams(KAPPA_INNER, BETA_INNER, L_INNER, 4.35e9, waveguide)
        grid = grid_around(4.35e9, 10e6)
        engine = s_matrix(t, waveguide, grid).transmission.s21
        closed = s21_single(p, grid).s21
        assert np.max(np.abs(engine - closed)) < 1e-12

    def test_two_emitters_match_nested_matrix(self, waveguide, nested_topology):
        inner = SingleGseParams(KAPPA_INNER, BETA_INNER, L_INNER, 4.35e9, waveguide)
        outer = SingleGseParams(KAPPA_OUTER, BETA_OUTER, L_OUTER, 4.35e9, waveguide)
        p = NestedParams.from_geometry(inner, outer)
        grid = grid_around(4.35e9, 10e6)
        engine = s_matrix(nested_topology, waveguide, grid, convention="mixed").transmission.s21
        closed = s21_nested_matrix(p, grid).s21
        assert np.max(np.abs(engine - closed)) < 1e-12

    def test_probe_unitarity_random_lossless(self, waveguide):
        rng = np.random.default_rng(3)
        worst = 0.0
        for k in range(10):
            emitters = []
            for m in range(int(rng.integers(1, 4))):
                npts = int(rng.integers(1, 4))
                pos = tuple(np.sort(rng.uniform(0, 0.25, npts)) + 0.3 * m)
                kap = tuple(rng.uniform(1e5, 1.5e6, npts))
                emitters.append(Emitter(f"e{m}", rng.uniform(4.3e9, 4.4e9), 0.0, kap, pos))
            t = Topology(tuple(emitters))
            grid = FrequencyGrid(4.3e9, 4.4e9, 401)
            with warnings.catch_warnings():
                # wide random layouts can sit outside the Markov regime;
                # unitarity is an algebraic property and must hold anyway
                warnings.simplefilter("ignore", MarkovWarning)
                res = s_matrix(t, waveguide, grid, convention="probe")
            total = np.abs(res.transmission.s21) ** 2 + np.abs(res.reflection) ** 2
            worst = max(worst, float(np.max(np.abs(total - 1.0))))
        assert worst < 1e-12

    def test_reflection_vanishes_without_emitters_coupling(self, waveguide):
        t = Topology((Emitter("e", 4.35e9, 1e6, (0.0, 0.0), (0.0, 0.1)),))
        grid = grid_around(4.35e9, 5e6, 101)
        res = s_matrix(t, waveguide, grid)
        assert np.max(np.abs(res.reflection)) < 1e-15
        assert np.max(np.abs(res.transmission.s21 - 1.0)) < 1e-15

    def test_unknown_convention_rejected(self, waveguide, nested_topology):
        with pytest.raises(ModelError):
            s_matrix(nested_topology, waveguide, grid_around(4.35e9, 5e6, 11), convention="bogus")


class TestDriveVector:
    def test_single_point_magnitude(self):
        em = Emitter("e", 4.35e9, 0.0, (9e5,), (0.05,))
        u = drive_vector(em, 4.35e9, SPEED)
        assert abs(u) == pytest.approx(math.sqrt(9e5), rel=1e-12)

    def test_two_point_interference(self):
        # |u|^2 equals the giant decay rate at the same frequency
        em = Emitter("e", 4.35e9, 0.0, (KAPPA_INNER,) * 2, (0.0, L_INNER))
        p = SingleGseParams(KAPPA_INNER, 0.0, L_INNER, 4.35e9, Waveguide(SPEED))
        u = drive_vector(em, 4.35e9, SPEED)
        assert abs(u) ** 2 == pytest.approx(giant_decay(p), rel=1e-12)
