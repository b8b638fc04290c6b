# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md
#
# Unit tests for common/decoherence.py
#

import os
import sys
import tempfile
import unittest

import numpy as np

sys.path.append('../')

import common.decoherence as decoherence


class TestGrid(unittest.TestCase):
    def test_quadrature(self):
        grid = decoherence.SpectralGrid(2.0, 4, 8)
        self.assertEqual(grid.size, 32)
        self.assertAlmostEqual(grid.integrate(grid.nodes**3), 4.0, places=12)
        self.assertAlmostEqual(grid.integrate(np.ones(grid.size)), 2.0, places=12)
        self.assertRaises(ValueError, decoherence.SpectralGrid, 0.0, 4)
        self.assertRaises(ValueError, decoherence.SpectralGrid, 1.0, 0)

    def test_panels_follow_phase(self):
        grid = decoherence.spectral_grid(100.0, n_nodes=64, t_max=20.0)
        # 100 * 20 / 16 = 125 panels
        self.assertEqual(grid.panels, 125)
        self.assertEqual(decoherence.spectral_grid(100.0, n_nodes=64).panels, 2)

    def test_state_validation(self):
        grid = decoherence.SpectralGrid(1.0, 2, 8)
        flat = np.ones(grid.size)
        decoherence.SpectralState(grid, flat)
        self.assertRaises(ValueError, decoherence.SpectralState, grid, 2 * flat)
        negative = flat.copy()
        negative[0] = -1.0
        self.assertRaises(ValueError, decoherence.SpectralState, grid, negative + 2.0 / grid.size)
        self.assertRaises(decoherence.GridMismatchError, decoherence.SpectralState, grid, np.ones(3))
        skew = np.zeros((grid.size, grid.size), dtype=complex)
        skew[0, 1] = 1j
        skew[1, 0] = 1j
        self.assertRaises(ValueError, decoherence.SpectralState, grid, flat, kernel=skew)
        self.assertRaises(ValueError, decoherence.SpectralState, grid, flat, kernel=np.eye(grid.size), factor=flat)

    def test_grid_mismatch(self):
        state, _ = decoherence.gaussian_pair(1.0, t_max=5.0)
        other = decoherence.observable_family(decoherence.SpectralGrid(3.0, 2, 8), ['flat'])[0]
        self.assertRaises(decoherence.GridMismatchError, decoherence.mean_value, state, other, 0.0)
        self.assertRaises(ValueError, decoherence.observable_family, state.grid, ['cubic'])
        self.assertEqual(len(decoherence.observable_family(state.grid)), 3)


class TestEnvelope(unittest.TestCase):
    def test_lorentzian_oracle(self):
        gamma = 0.3
        state, obs = decoherence.lorentzian_pair(gamma, t_max=20.0)
        t = np.linspace(-20.0, 20.0, 401)
        result = decoherence.offdiag_envelope(state, obs, t)
        ratio = result.envelope / result.envelope[200]
        inside = gamma * np.abs(t) <= 5
        self.assertLessEqual(np.max(np.abs(ratio - np.exp(-gamma * np.abs(t)))[inside]), 1e-3)
        self.assertLessEqual(result.twin_asymmetry, 1e-10)

    def test_gaussian_oracle(self):
        sigma = 1.0
        state, obs = decoherence.gaussian_pair(sigma, t_max=20.0)
        t = np.linspace(-20.0, 20.0, 401)
        result = decoherence.offdiag_envelope(state, obs, t)
        ratio = result.envelope / result.envelope[200]
        self.assertLessEqual(np.max(np.abs(ratio - np.exp(-0.5 * sigma**2 * t**2))), 1e-3)
        self.assertLessEqual(result.twin_asymmetry, 1e-10)

        fit = decoherence.fit_decoherence_time(t, result.envelope, form='gaussian')
        self.assertAlmostEqual(fit.rate, 0.5, delta=0.005)

    def test_late_time_limit(self):
        sigma = 1.0
        state, obs = decoherence.gaussian_pair(sigma, t_max=200.0 / sigma)
        late = decoherence.mean_value(state, obs, 200.0 / sigma)
        self.assertLess(abs(late - decoherence.equilibrium_mean(state, obs)), 1e-8)

    def test_diagonal_state_is_stationary(self):
        state, obs = decoherence.lorentzian_pair(0.3, t_max=20.0)
        diagonal = state.stripped()
        self.assertFalse(diagonal.has_kernel)
        t = np.linspace(-20.0, 20.0, 41)
        values = decoherence.mean_value(diagonal, obs, t)
        self.assertLessEqual(np.max(np.abs(values - decoherence.mean_value(diagonal, obs, 0.0))), 1e-10)

    def test_full_kernel_matches_separable(self):
        state, obs = decoherence.gaussian_pair(1.0, t_max=5.0)
        full = decoherence.SpectralState(state.grid, state.diag, kernel=np.outer(state.factor, state.factor.conj()))
        t = np.array([0.0, 0.5, 1.0, 2.5])
        np.testing.assert_allclose(decoherence.mean_value(full, obs, t), decoherence.mean_value(state, obs, t), rtol=1e-10)

    def test_asymmetric_grid(self):
        state, obs = decoherence.gaussian_pair(1.0, t_max=5.0)
        self.assertRaises(ValueError, decoherence.offdiag_envelope, state, obs, np.linspace(0.0, 5.0, 11))

    def test_weak_limit_times(self):
        gamma = 0.3
        state, obs = decoherence.lorentzian_pair(gamma, t_max=30.0)
        t = np.linspace(-30.0, 30.0, 601)
        found = decoherence.weak_limit_times(state, [obs], t, threshold=1e-3)[0]
        self.assertEqual(found.name, 'flat')
        # D(0) is the squared mass of the kernel factor, just under 1
        expected = np.log(1e3) / gamma
        self.assertAlmostEqual(found.future, expected, delta=0.15)
        self.assertAlmostEqual(found.past, found.future, places=12)

    def test_export(self):
        state, obs = decoherence.gaussian_pair(1.0, t_max=5.0)
        result = decoherence.offdiag_envelope(state, obs, np.linspace(-5.0, 5.0, 11))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'envelope.csv')
            decoherence.export_envelope_csv(result, path)
            with open(path) as f:
                lines = f.read().splitlines()
        self.assertEqual(lines[0], 't,mean,envelope')
        self.assertEqual(len(lines), 12)


class TestPoles(unittest.TestCase):
    def test_nearest_pole(self):
        model = decoherence.make_pole_model([1 - 0.2j, 1 + 0.2j, 2 - 0.5j, 2 + 0.5j])
        self.assertTrue(decoherence.is_conjugate_symmetric(model))
        self.assertAlmostEqual(decoherence.decoherence_time_from_poles(model), 5.0)
        self.assertAlmostEqual(decoherence.growth_time_from_poles(model), 5.0)

    def test_missing_half_plane(self):
        model = decoherence.make_pole_model([1 + 0.2j])
        self.assertFalse(decoherence.is_conjugate_symmetric(model))
        self.assertRaises(decoherence.NoLowerPoleError, decoherence.decoherence_time_from_poles, model)
        model = decoherence.make_pole_model([1 - 0.2j])
        self.assertRaises(decoherence.NoUpperPoleError, decoherence.growth_time_from_poles, model)

    def test_ties(self):
        model = decoherence.make_pole_model([1 - 0.3j, -0.5 - 0.3j])
        pole, ties = decoherence._nearest_pole(model.poles, lower=True)
        self.assertEqual(pole, -0.5 - 0.3j)
        self.assertEqual(len(ties), 2)
        self.assertAlmostEqual(decoherence.decoherence_time_from_poles(model), 1.0 / 0.3)

    def test_pole_rule(self):
        for z in [1 - 0.2j, 2 - 0.5j, 0.5 - 1j]:
            rate = abs(z.imag)
            t_max = 8.0 / rate
            state, obs = decoherence.pair_from_pole(z, t_max)
            t = np.linspace(-t_max, t_max, 201)
            result = decoherence.offdiag_envelope(state, obs, t)
            fit = decoherence.fit_decoherence_time(t, result.envelope)
            self.assertAlmostEqual(fit.rate, rate, delta=0.01 * rate)
            model = decoherence.make_pole_model([z, z.conjugate()])
            self.assertAlmostEqual(1.0 / fit.rate, decoherence.decoherence_time_from_poles(model), delta=0.01 / rate)


class TestFit(unittest.TestCase):
    def test_exponential(self):
        t = np.linspace(-10.0, 10.0, 201)
        fit = decoherence.fit_decoherence_time(t, 3.0 * np.exp(-0.7 * np.abs(t)))
        self.assertAlmostEqual(fit.rate, 0.7, places=10)
        self.assertAlmostEqual(fit.r_squared, 1.0, places=10)

    def test_errors(self):
        t = np.linspace(-1.0, 1.0, 21)
        self.assertRaises(ValueError, decoherence.fit_decoherence_time, t, np.ones(21), form='power')
        self.assertRaises(decoherence.WindowEmptyError, decoherence.fit_decoherence_time, t, np.ones(21))
        self.assertRaises(decoherence.WindowEmptyError, decoherence.fit_decoherence_time, t, np.zeros(21))


if __name__ == '__main__':
    unittest.main()
