# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md
#
# Unit tests for common/trajectory.py
#

import os
import sys
import tempfile
import unittest

import numpy as np

sys.path.append('../')

import common.trajectory as trajectory


class TestTrajectory(unittest.TestCase):
    def test_make_state(self):
        state = trajectory.make_state([1.0], [0.5], 2.0)
        self.assertEqual(state.t, 2.0)
        np.testing.assert_array_equal(trajectory.state_vector(state), [1.0, 0.5])
        self.assertRaises(trajectory.DimensionMismatchError, trajectory.make_state, [1.0, 2.0], [0.0])
        self.assertRaises(trajectory.NonFiniteError, trajectory.make_state, [np.nan], [0.0])

    def test_system_checks(self):
        self.assertRaises(trajectory.DimensionMismatchError, trajectory.DynamicalSystem, 3, lambda t, x: x)
        self.assertRaises(ValueError, trajectory.DynamicalSystem, 2, lambda t, x: x, reversal_involution=lambda x: 2 * x)
        system = trajectory.harmonic_oscillator()
        self.assertRaises(trajectory.DimensionMismatchError, trajectory.integrate, system,
                          trajectory.make_state([1.0, 0.0], [0.0, 0.0]), 1.0, 0.01)

    def test_harmonic_oscillator(self):
        system = trajectory.harmonic_oscillator(1.0)
        traj = trajectory.integrate(system, trajectory.make_state([1.0], [0.0]), 2 * np.pi, 1e-3)
        self.assertTrue(traj.is_uniform())
        self.assertEqual(traj.t[-1], 2 * np.pi)
        self.assertLess(traj.diagnostics['energy_drift'], 1e-10)
        np.testing.assert_allclose(traj.end_state.q, [1.0], atol=1e-9)
        np.testing.assert_allclose(traj.end_state.p, [0.0], atol=1e-9)
        self.assertLess(trajectory.field_residual(traj, system), 1e-5)

    def test_backward_run(self):
        system = trajectory.harmonic_oscillator(1.0)
        initial = trajectory.make_state([1.0], [0.0], 0.0)
        traj = trajectory.integrate(system, initial, -np.pi / 2, 1e-3)
        self.assertEqual(traj.direction, -1)
        self.assertTrue(np.all(np.diff(traj.t) > 0))
        np.testing.assert_allclose(trajectory.state_vector(traj.start_state), [1.0, 0.0])
        # cos(t) at t = -pi/2 has q = 0, p = 1
        np.testing.assert_allclose(trajectory.state_vector(traj.end_state), [0.0, 1.0], atol=1e-9)

    def test_forward_then_backward(self):
        system = trajectory.pendulum(1.0)
        initial = trajectory.make_state([np.pi], [0.6], 0.0)
        forward = trajectory.integrate(system, initial, 10.0, 1e-3)
        back = trajectory.integrate(system, forward.end_state, 0.0, 1e-3)
        self.assertEqual(back.end_state.t, 0.0)
        np.testing.assert_allclose(trajectory.state_vector(back.end_state), trajectory.state_vector(initial), atol=1e-8)

    def test_energy_drift_bound(self):
        # 100 oscillator periods and about 20 pendulum librations
        for system, q, p, t_end, step in [(trajectory.harmonic_oscillator(1.0), [1.0], [0.0], 200 * np.pi, 1e-2),
                                          (trajectory.pendulum(1.0), [np.pi], [0.6], 200.0, 5e-3)]:
            traj = trajectory.integrate(system, trajectory.make_state(q, p), t_end, step)
            self.assertLessEqual(traj.diagnostics['energy_drift'], 1e-6, system.name)
            energy = system.hamiltonian(traj.x)
            self.assertLessEqual(np.max(np.abs(energy - energy[0])) / abs(energy[0]), 1e-6)

    def test_bidirectional(self):
        system = trajectory.harmonic_oscillator(1.0)
        initial = trajectory.make_state([1.0], [0.0], 0.0)
        traj = trajectory.integrate_bidirectional(system, initial, -1.0, 2.0, 1e-2)
        self.assertEqual(len(traj), 301)
        self.assertEqual(traj.diagnostics['center'], 0.0)
        i = int(np.argmin(np.abs(traj.t)))
        np.testing.assert_allclose(traj.x[i], [1.0, 0.0])
        self.assertRaises(ValueError, trajectory.integrate_bidirectional, system, initial, 1.0, 2.0, 1e-2)

    def test_time_reverse(self):
        system = trajectory.harmonic_oscillator(2.0)
        traj = trajectory.integrate(system, trajectory.make_state([0.3], [0.7], 1.0), 4.0, 1e-2)
        once = trajectory.time_reverse(traj, system)
        np.testing.assert_allclose(once.t, traj.t, atol=1e-12)
        np.testing.assert_allclose(once.x[0], traj.x[-1] * [1.0, -1.0])
        # the reversed path still solves the time reversal invariant equation
        self.assertLess(trajectory.field_residual(once, system), 1e-3)
        twice = trajectory.time_reverse(once, system)
        np.testing.assert_allclose(twice.t, traj.t, atol=1e-12)
        np.testing.assert_allclose(twice.x, traj.x)
        self.assertFalse(twice.diagnostics['reversed'])

    def test_non_finite(self):
        def field(t, x):
            if np.any(np.asarray(t) > 0.5):
                return np.full_like(x, np.nan)
            return np.stack([x[..., 1], -x[..., 0]], axis=-1)
        system = trajectory.DynamicalSystem(2, field, name='breaks')
        with self.assertRaises(trajectory.NonFiniteError) as cm:
            trajectory.integrate(system, trajectory.make_state([1.0], [0.0]), 2.0, 0.1)
        self.assertLess(abs(cm.exception.last_time - 0.5), 0.11)

    def test_halt(self):
        system = trajectory.harmonic_oscillator(1.0)
        traj = trajectory.integrate(system, trajectory.make_state([1.0], [0.0]), 10.0, 1e-2, halt=lambda t, x: x[0] < 0)
        self.assertIn('halted_at', traj.diagnostics)
        self.assertAlmostEqual(traj.t[-1], np.pi / 2, delta=0.02)

    def test_modified_oscillator(self):
        system = trajectory.modified_oscillator(1.0, 2.0)
        self.assertIsNone(system.hamiltonian)
        traj = trajectory.integrate(system, trajectory.make_state([1.0], [0.0]), 3 * np.pi / 2, 1e-3)
        # half a turn at each stiffness closes the orbit
        np.testing.assert_allclose(traj.end_state.q, [1.0], atol=1e-6)
        np.testing.assert_allclose(traj.end_state.p, [0.0], atol=1e-6)

    def test_adaptive_matches_fixed(self):
        system = trajectory.pendulum(1.0)
        initial = trajectory.make_state([np.pi], [0.6])
        fixed = trajectory.integrate(system, initial, 5.0, 1e-3)
        adaptive = trajectory.integrate_adaptive(system, initial, 5.0, 1e-3)
        self.assertEqual(adaptive.integrator_id, 'dop853')
        np.testing.assert_allclose(adaptive.x, fixed.x, atol=1e-8)

    def test_propagate_ensemble(self):
        system = trajectory.damped_oscillator(1.0, 1.0)
        x0 = np.array([[1.0, 0.0], [0.0, 1.0], [2.0, 0.0]])
        history, alive = trajectory.propagate_ensemble(system.vector_field, x0, 0.01, 100,
                                                       stop=lambda x: np.abs(x[:, 0]) > 1.5)
        self.assertEqual(history.shape, (101, 3, 2))
        self.assertEqual(list(alive), [True, True, False])
        self.assertTrue(np.all(np.isnan(history[-1, 2])))
        final, alive = trajectory.propagate_ensemble(system.vector_field, x0[:2], 0.01, 100, keep_history=False)
        np.testing.assert_allclose(final, history[-1, :2])

    def test_export_csv(self):
        system = trajectory.harmonic_oscillator(1.0)
        traj = trajectory.integrate(system, trajectory.make_state([1.0], [0.0]), 1.0, 0.25)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'out', 'traj.csv')
            trajectory.export_csv(traj, path, header='tempus test')
            with open(path) as f:
                lines = f.read().splitlines()
        self.assertEqual(lines[0], '# tempus test')
        self.assertEqual(lines[1], 't,q0,p0')
        self.assertEqual(len(lines), 2 + len(traj))
        self.assertEqual(float(lines[-1].split(',')[0]), 1.0)


if __name__ == '__main__':
    unittest.main()
