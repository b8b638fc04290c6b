# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md
#
# Unit tests for common/schulman.py
#

import os
import sys
import tempfile
import unittest
from types import SimpleNamespace

import numpy as np
from scipy.stats import ks_2samp

sys.path.append('../')

import common.schulman as schulman


class TestUrns(unittest.TestCase):
    def test_pair_validation(self):
        pair = schulman.UrnPair(200, 20, 0.01)
        self.assertEqual(pair.to_dict(), {'n_a': 200, 'n_b': 20, 'coupling': 0.01})
        self.assertRaises(ValueError, schulman.UrnPair, 20, 200)
        self.assertRaises(ValueError, schulman.UrnPair, 20, 7)
        self.assertRaises(ValueError, schulman.UrnPair, 200, 20, 0.1)
        self.assertRaises(ValueError, schulman.UrnPair, 200, 20, -0.01)
        self.assertEqual(schulman.UrnPair(200, 20, 0.1, max_coupling=0.2).coupling, 0.1)

    def test_entropy_table(self):
        np.testing.assert_allclose(schulman.entropy_table(4), np.log([1, 4, 6, 4, 1]), atol=1e-12)
        table = schulman.entropy_table(20)
        self.assertEqual(int(np.argmax(table)), 10)

    def test_simulate(self):
        rng = np.random.default_rng(3)
        occ_a, occ_b, conserved = schulman.simulate_urns(50, 20, 0.0, 3000, rng, runs=4)
        self.assertEqual(occ_a.shape, (3001, 4))
        self.assertEqual(occ_b.shape, (3001, 4))
        self.assertTrue(conserved)
        np.testing.assert_array_equal(occ_a[0], 50)
        # uncoupled: one ball moves per step in each subsystem
        np.testing.assert_array_equal(np.abs(np.diff(occ_a, axis=0)), 1)
        np.testing.assert_array_equal(np.abs(np.diff(occ_b, axis=0)), 1)

        occ_a, occ_b, conserved = schulman.simulate_urns(50, 20, 0.05, 3000, rng, runs=4)
        self.assertTrue(conserved)
        self.assertTrue(np.all((occ_b >= 0) & (occ_b <= 20)))

    def test_block_window(self):
        self.assertEqual(schulman.block_window(200, 20000), 1000)
        self.assertEqual(schulman.block_window(10, 100), 50)
        self.assertEqual(schulman.block_window(200, 1000), 250)
        self.assertRaises(ValueError, schulman.block_window, 10, 99)

    def test_block_means(self):
        series = np.arange(11, dtype=float).reshape(11, 1)
        np.testing.assert_allclose(schulman.block_means(series, 5), [[3.0], [8.0]])


class TestEnsembles(unittest.TestCase):
    def test_asymmetric_sizes(self):
        pair = schulman.UrnPair(200, 20, 0.01)
        result = schulman.schulman_ensemble(pair, 20000, 30, seed=4)
        self.assertTrue(result.conserved)
        self.assertEqual(result.window, 1000)
        self.assertEqual(result.S_A.shape, (20001, 30))
        self.assertGreaterEqual(result.monotone_fraction, 0.9)
        self.assertGreaterEqual(result.displaced_fraction, 0.8)

        uncoupled = schulman.schulman_ensemble(schulman.UrnPair(200, 20, 0.0), 20000, 30, seed=4)
        self.assertLessEqual(uncoupled.displaced_fraction, 0.2)
        self.assertGreater(np.mean(result.displacement), np.mean(uncoupled.displacement))

    def test_threads_agree(self):
        pair = schulman.UrnPair(50, 20, 0.01)
        serial = schulman.schulman_ensemble(pair, 2000, 12, seed=1, chunk=4)
        threaded = schulman.schulman_ensemble(pair, 2000, 12, seed=1, chunk=4, threads=3)
        np.testing.assert_array_equal(serial.S_A, threaded.S_A)
        np.testing.assert_array_equal(serial.monotone, threaded.monotone)
        self.assertEqual(serial.threshold, threaded.threshold)

    def test_mirror(self):
        equal = schulman.schulman_ensemble(schulman.UrnPair(50, 50, 0.01), 5000, 20, seed=2, scenario='mirror')
        unequal = schulman.schulman_ensemble(schulman.UrnPair(50, 20, 0.01), 5000, 20, seed=2, scenario='mirror')
        self.assertEqual(equal.p_values.shape, (20,))
        self.assertTrue(np.all((equal.p_values >= 0) & (equal.p_values <= 1)))
        self.assertEqual(equal.symmetric_fraction, float(np.mean(equal.p_values >= schulman.SIGNIFICANCE)))
        self.assertGreater(equal.symmetric_fraction, unequal.symmetric_fraction)
        self.assertTrue(equal.conserved and unequal.conserved)

    def test_mirror_compares_reversed_b(self):
        result = schulman.schulman_ensemble(schulman.UrnPair(50, 50, 0.01), 2000, 4, seed=5, scenario='mirror')
        # A starts at the bottom of its entropy; the stored B series ends there
        np.testing.assert_array_equal(result.S_A[0], np.zeros(4))
        np.testing.assert_array_equal(result.S_B[-1], np.zeros(4))
        stride = result.stride
        for r in range(4):
            forward_a = np.diff(result.S_A[:, r])[::stride]
            backward_b = -np.diff(result.S_B[:, r])[::stride]
            # read backward, B climbs out of the all in one urn state
            self.assertGreater(-np.diff(result.S_B[:, r])[-1], 0)
            self.assertEqual(result.statistics[r], ks_2samp(forward_a, backward_b).statistic)

    def test_mirror_verdict(self):
        self.assertTrue(schulman.mirror_verdict(SimpleNamespace(symmetric_fraction=0.9),
                                                SimpleNamespace(symmetric_fraction=0.1)))
        self.assertFalse(schulman.mirror_verdict(SimpleNamespace(symmetric_fraction=0.7),
                                                 SimpleNamespace(symmetric_fraction=0.1)))
        self.assertFalse(schulman.mirror_verdict(SimpleNamespace(symmetric_fraction=0.9),
                                                 SimpleNamespace(symmetric_fraction=0.5)))

    def test_unknown_scenario(self):
        self.assertRaises(ValueError, schulman.schulman_ensemble, schulman.UrnPair(50, 20), 1000, 2, scenario='swap')

    def test_single_run_and_export(self):
        pair = schulman.UrnPair(50, 20, 0.01)
        run = schulman.schulman_sim(pair, 2000, seed=6)
        self.assertEqual(run.t.size, 2001)
        self.assertEqual(run.S_A[0], 0.0)
        np.testing.assert_allclose(run.S_total, run.S_A + run.S_B)
        self.assertIsInstance(run.monotone, bool)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'entropy.csv')
            schulman.export_entropy_csv(run, path, header='urns')
            with open(path) as f:
                lines = f.read().splitlines()
        self.assertEqual(lines[0], '# urns')
        self.assertEqual(lines[1], ','.join(schulman.ENTROPY_COLUMNS))
        self.assertEqual(len(lines), 2003)


if __name__ == '__main__':
    unittest.main()
