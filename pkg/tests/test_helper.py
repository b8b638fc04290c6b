# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md
#
# Unit tests for common/helper.py
#

import os
import sys
import tempfile
import unittest
from types import SimpleNamespace
from unittest import mock

import numpy as np

sys.path.append('../')

import common.helper as helper


class TestHelper(unittest.TestCase):
    def test_parse_range(self):
        np.testing.assert_allclose(helper.parse_range('-20:20:401')[[0, 200, 400]], [-20.0, 0.0, 20.0])
        np.testing.assert_allclose(helper.parse_range('0.01:1:3:log'), [0.01, 0.1, 1.0])
        np.testing.assert_array_equal(helper.parse_range('0.5'), [0.5])
        for text in ['0.005:0.08:8', '0.005:0.08:8:log']:
            values = helper.parse_range(text)
            self.assertEqual(values.size, 8)
            self.assertAlmostEqual(values[0], 0.005)
            self.assertAlmostEqual(values[-1], 0.08)
        np.testing.assert_allclose(np.diff(np.log(helper.parse_range('0.005:0.08:8:log'))), np.log(2) / 1.75)
        self.assertIn('0.005:0.08:8:log', helper.parse_range.__doc__)
        self.assertRaises(ValueError, helper.parse_range, '0:1')
        self.assertRaises(ValueError, helper.parse_range, '0:1:0')
        self.assertRaises(ValueError, helper.parse_range, '0:1:4:log')
        self.assertRaises(ValueError, helper.parse_range, '1:2:4:exp')

    def test_parse_triple(self):
        self.assertEqual(helper.parse_triple('0, 1.5,-2'), (0.0, 1.5, -2.0))
        self.assertRaises(ValueError, helper.parse_triple, '1,2')

    def test_parse_kernel(self):
        self.assertEqual(helper.parse_kernel('lorentzian:gamma=0.3'), ('lorentzian', {'gamma': 0.3}))
        self.assertEqual(helper.parse_kernel('Gaussian:sigma=2'), ('gaussian', {'sigma': 2.0}))
        self.assertRaises(ValueError, helper.parse_kernel, 'cauchy:gamma=1')
        self.assertRaises(ValueError, helper.parse_kernel, 'lorentzian:sigma=1')
        self.assertRaises(ValueError, helper.parse_kernel, 'gaussian:sigma')

    def test_parse_grid(self):
        self.assertEqual(helper.parse_grid('512x256'), (512, 256))
        self.assertRaises(ValueError, helper.parse_grid, '512')

    def test_derive_rng(self):
        a = helper.derive_rng(7, 'measure', 0).random(4)
        np.testing.assert_array_equal(a, helper.derive_rng(7, 'measure', 0).random(4))
        self.assertFalse(np.array_equal(a, helper.derive_rng(7, 'measure', 1).random(4)))
        self.assertFalse(np.array_equal(a, helper.derive_rng(7, 'census', 0).random(4)))
        self.assertFalse(np.array_equal(a, helper.derive_rng(8, 'measure', 0).random(4)))

    def test_threads(self):
        with mock.patch.dict(os.environ, {'TEMPUS_THREADS': '3'}):
            self.assertEqual(helper.resolve_threads(None), 3)
            self.assertEqual(helper.resolve_threads(2), 2)
        with mock.patch.dict(os.environ, {'TEMPUS_THREADS': 'many'}):
            self.assertEqual(helper.resolve_threads(None), 1)
        self.assertEqual(helper.resolve_threads(-4), 1)

    def test_chunks(self):
        self.assertEqual(helper.chunk_bounds(10, 4), [(0, 4), (4, 8), (8, 10)])
        self.assertEqual(helper.chunk_bounds(0, 4), [])

        def work(index, start, stop):
            return helper.derive_rng(0, 'test', index).random(stop - start)

        bounds = helper.chunk_bounds(1000, 64)
        serial = np.concatenate(helper.map_chunks(work, bounds, 1))
        threaded = np.concatenate(helper.map_chunks(work, bounds, 4))
        np.testing.assert_array_equal(serial, threaded)

    def test_canonical_hash(self):
        self.assertEqual(helper.canonical_hash({'a': 1, 'b': [1, 2]}), helper.canonical_hash({'b': [1, 2], 'a': 1}))
        self.assertNotEqual(helper.canonical_hash({'a': 1}), helper.canonical_hash({'a': 2}))
        self.assertEqual(len(helper.canonical_hash({})), 64)

    def test_write_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'sub', 'out.csv')
            helper.write_csv(path, ['x', 'flag', 'n'], [(0.1, np.bool_(True), np.int64(3))], header='run 1')
            with open(path) as f:
                lines = f.read().splitlines()
        self.assertEqual(lines, ['# run 1', 'x,flag,n', '0.10000000000000001,True,3'])

    def test_to_jsonable(self):
        data = helper.to_jsonable({'a': np.arange(2), 'b': SimpleNamespace(c=np.float64(0.5)), 'z': 1 + 2j,
                                   1: (np.True_,)})
        self.assertEqual(data, {'a': [0, 1], 'b': {'c': 0.5}, 'z': [1.0, 2.0], '1': [True]})
        entry = helper.create_entry('slope', 2.0, '2 +- 0.15', 'PASS')
        self.assertEqual(tuple(vars(entry)), helper.LOG_ENTRY)


if __name__ == '__main__':
    unittest.main()
