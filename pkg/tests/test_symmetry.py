# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md
#
# Unit tests for common/symmetry.py
#

import sys
import unittest

import numpy as np

sys.path.append('../')

import common.trajectory as trajectory
import common.symmetry as symmetry


class TestSymmetry(unittest.TestCase):
    def test_time_reversal_invariance(self):
        self.assertTrue(symmetry.check_time_reversal_invariance(trajectory.harmonic_oscillator()))
        self.assertTrue(symmetry.check_time_reversal_invariance(trajectory.pendulum()))
        self.assertFalse(symmetry.check_time_reversal_invariance(trajectory.modified_oscillator(1.0, 2.0)))
        self.assertFalse(symmetry.check_time_reversal_invariance(trajectory.damped_oscillator(1.0, 1.0)))
        self.assertRaises(ValueError, symmetry.check_time_reversal_invariance, trajectory.harmonic_oscillator(), 0)

    def test_reversibility(self):
        system = trajectory.harmonic_oscillator(1.0)
        traj = trajectory.integrate(system, trajectory.make_state([1.0], [0.0]), 25.0, 2e-3)
        verdict = symmetry.check_reversibility(traj, 1e-2, 25.0)
        self.assertEqual(verdict.kind, symmetry.REVERSIBLE)
        self.assertAlmostEqual(verdict.period, 2 * np.pi, delta=1e-3)
        self.assertRaises(ValueError, symmetry.check_reversibility, traj, 1e-2, 50.0)

        system = trajectory.damped_oscillator(1.0, 1.0)
        traj = trajectory.integrate(system, trajectory.make_state([1.0], [0.0]), 50.0, 2e-3)
        verdict = symmetry.check_reversibility(traj)
        self.assertEqual(verdict.kind, symmetry.IRREVERSIBLE)
        self.assertIsNone(verdict.period)

    def test_escape(self):
        system = trajectory.DynamicalSystem(2, lambda t, x: np.stack([x[..., 0], -x[..., 1]], axis=-1), name='saddle')
        traj = trajectory.integrate(system, trajectory.make_state([1.0], [0.0]), 10.0, 1e-2)
        verdict = symmetry.check_reversibility(traj)
        self.assertEqual(verdict.kind, symmetry.IRREVERSIBLE)
        self.assertEqual(verdict.reason, 'escape')

    def test_rotating_pendulum(self):
        system = trajectory.pendulum(1.0)
        traj = trajectory.integrate(system, trajectory.make_state([np.pi], [2.2]), 25.0, 2e-3)
        verdict = symmetry.check_reversibility(traj, angle_index=system.angle_index)
        self.assertEqual(verdict.kind, symmetry.IRREVERSIBLE)
        self.assertEqual(verdict.reason, 'unbounded angle')

    def test_report(self):
        self.assertRaises(ValueError, symmetry.ClassificationReport, 'x', True, symmetry.REVERSIBLE, None)
        report = symmetry.ClassificationReport('x', True, symmetry.UNDETERMINED)
        self.assertEqual(len(report.as_row()), len(symmetry.REPORT_COLUMNS))
        self.assertEqual(report.to_dict()['reversible'], symmetry.UNDETERMINED)

    def test_find_time_symmetry(self):
        system = trajectory.harmonic_oscillator(1.0)
        # q = cos(t - 0.7) is reflection symmetric about t = 0.7 with q even and p odd
        initial = trajectory.make_state([np.cos(-0.7)], [-np.sin(-0.7)], 0.0)
        traj = trajectory.integrate(system, initial, 3.0, 1e-3)
        t_s = symmetry.find_time_symmetry(traj, 1e-6)
        self.assertIsNotNone(t_s)
        # the next turning point, 0.7 + pi, lies past the end
        self.assertAlmostEqual(t_s, 0.7, delta=1e-6)
        residual, half = symmetry.reflection_residual(traj, t_s, symmetry.default_parity(1))
        self.assertLess(residual, 1e-6)
        self.assertGreater(half, 0.5)

    def test_symmetry_center_location(self):
        system = trajectory.harmonic_oscillator(1.0)
        # turning points of q = cos(t - 1.3) at 1.3 and 1.3 + pi; on [0, 2.6] only 1.3 qualifies
        initial = trajectory.make_state([np.cos(-1.3)], [-np.sin(-1.3)], 0.0)
        traj = trajectory.integrate(system, initial, 2.6, 1e-3)
        t_s = symmetry.find_time_symmetry(traj, 1e-6)
        self.assertAlmostEqual(t_s, 1.3, delta=1e-6)

    def test_symmetry_center_of_reversed_run(self):
        system = trajectory.harmonic_oscillator(1.0)
        initial = trajectory.make_state([np.cos(-0.7)], [-np.sin(-0.7)], 0.0)
        traj = trajectory.integrate(system, initial, 3.0, 1e-3)
        reversed_traj = trajectory.time_reverse(traj, system)
        # t -> 0 + 3 - t carries the centre at 0.7 to 2.3
        self.assertAlmostEqual(symmetry.find_time_symmetry(reversed_traj, 1e-6), 2.3, delta=1e-6)

    def test_symmetry_center_at_start(self):
        system = trajectory.harmonic_oscillator(1.0)
        initial = trajectory.make_state([1.0], [0.0], 0.0)
        # a forward run has no window around t = 0, so run both ways; the turning points +-pi lie outside
        traj = trajectory.integrate_bidirectional(system, initial, -2.0, 2.0, 1e-3)
        self.assertAlmostEqual(symmetry.find_time_symmetry(traj, 1e-6), 0.0, delta=1e-6)

    def test_reversibility_survives_reversal(self):
        cases = [(trajectory.harmonic_oscillator(1.0), [1.0], [0.0]),
                 (trajectory.pendulum(1.0), [np.pi], [0.6]),
                 (trajectory.pendulum(1.0), [np.pi], [2.2])]
        for system, q, p in cases:
            traj = trajectory.integrate(system, trajectory.make_state(q, p), 25.0, 2e-3)
            forward = symmetry.check_reversibility(traj, 1e-2, 25.0, angle_index=system.angle_index)
            backward = symmetry.check_reversibility(trajectory.time_reverse(traj, system), 1e-2, 25.0,
                                                    angle_index=system.angle_index)
            self.assertEqual(forward.kind, backward.kind, system.name)
            if forward.kind == symmetry.REVERSIBLE:
                self.assertAlmostEqual(forward.period, backward.period, delta=1e-3)
            else:
                self.assertEqual(forward.reason, backward.reason)

    def test_damped_has_no_symmetry(self):
        system = trajectory.damped_oscillator(1.0, 1.0)
        traj = trajectory.integrate(system, trajectory.make_state([1.0], [0.0]), 10.0, 2e-3)
        self.assertIsNone(symmetry.find_time_symmetry(traj, 1e-5))

    def test_window_too_short(self):
        system = trajectory.harmonic_oscillator(1.0)
        traj = trajectory.integrate(system, trajectory.make_state([1.0], [0.0]), 0.2, 1e-2)
        self.assertRaises(symmetry.WindowTooShortError, symmetry.find_time_symmetry, traj)

    def test_classify_catalog(self):
        reports = symmetry.classify_catalog()
        found = {r.system: r for r in reports}
        self.assertEqual([r.system for r in reports], ['a', 'b', 'c', 'd'])

        self.assertTrue(found['a'].tri)
        self.assertEqual(found['a'].reversible, symmetry.REVERSIBLE)
        self.assertAlmostEqual(found['a'].period, 2 * np.pi, delta=1e-3)

        self.assertTrue(found['b'].tri)
        self.assertEqual(found['b'].reversible, symmetry.MIXED)
        self.assertEqual(found['b'].per_trajectory['inside'].kind, symmetry.REVERSIBLE)
        self.assertEqual(found['b'].per_trajectory['above'].kind, symmetry.IRREVERSIBLE)

        self.assertFalse(found['c'].tri)
        self.assertEqual(found['c'].reversible, symmetry.REVERSIBLE)
        self.assertAlmostEqual(found['c'].period, 1.5 * np.pi, delta=1e-3)

        self.assertFalse(found['d'].tri)
        self.assertEqual(found['d'].reversible, symmetry.IRREVERSIBLE)


if __name__ == '__main__':
    unittest.main()
