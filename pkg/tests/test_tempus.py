# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md
#
# Unit tests for tempus.py
#

import glob
import json
import os
import sys
import tempfile
import unittest

sys.path.append('../')

import tempus


class TestTempus(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.logdir = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def run_tempus(self, *argslist, configfile=None):
        return tempus.main(list(argslist) + ['--logdir', self.logdir], configfile)

    def test_branch(self):
        status, path, message = self.run_tempus('branch', '--query', 'A,F', '--path', 'I,A,C,D,F')
        self.assertEqual(status, 0, message)
        with open(path) as f:
            summary = json.load(f)
        self.assertTrue(summary['valid'])
        self.assertEqual(summary['arrow']['source'], 'I')
        self.assertEqual(summary['relation'], 'cause_of')
        self.assertEqual(summary['information'], [0, 0, 0, 0, 1])
        self.assertFalse(summary['mirror_symmetric'])

        self.assertEqual(len(glob.glob(os.path.join(self.logdir, 'Manifest_branch_*.json'))), 1)
        self.assertEqual(len(glob.glob(os.path.join(self.logdir, 'TempusLog_branch_*.txt'))), 1)
        self.assertEqual(len(glob.glob(os.path.join(self.logdir, 'ConfigFile_*.ini'))), 1)

    def test_branch_reversed(self):
        status, path, _ = self.run_tempus('branch', '--reverse', '--query', 'A,F')
        self.assertEqual(status, 0)
        with open(path) as f:
            summary = json.load(f)
        self.assertEqual(summary['arrow']['orientation'], 'reversed')
        self.assertEqual(summary['relation'], 'effect_of')

    def test_palindrome_fails_validation(self):
        status, path, _ = self.run_tempus('branch', '--graph', 'palindrome')
        self.assertEqual(status, 1)
        with open(path) as f:
            summary = json.load(f)
        self.assertTrue(summary['mirror_symmetric'])
        self.assertNotIn('arrow', summary)

    def test_config_file(self):
        path = os.path.join(self.logdir, 'run.ini')
        with open(path, 'w') as f:
            f.write('[Branch]\nquery = A,B\npath = I,B,E\n')
        status, out, _ = self.run_tempus('branch', '-c', path, '--query', 'B,E')
        self.assertEqual(status, 0)
        with open(out) as f:
            summary = json.load(f)
        self.assertEqual(summary['relation'], 'cause_of')
        self.assertEqual(summary['information'], [0, 0, 0])

    def test_invalid_config(self):
        path = os.path.join(self.logdir, 'bad.ini')
        with open(path, 'w') as f:
            f.write('[Branch]\nshape = star\n')
        status, _, message = self.run_tempus('branch', '-c', path)
        self.assertEqual(status, 2)
        self.assertEqual(message, 'Configuration Invalid')
        status, _, _ = self.run_tempus('cosmo')
        self.assertEqual(status, 2)
        status, _, _ = self.run_tempus('deco', '--kernel', 'cauchy:gamma=1')
        self.assertEqual(status, 2)

    def test_module_error(self):
        status, path, message = self.run_tempus('branch', '--path', 'I,C')
        self.assertEqual(status, 1)
        self.assertIn('PathViolatesOrderError', message)

    def test_deco(self):
        json_path = os.path.join(self.logdir, 'deco.json')
        status, csv_path, _ = self.run_tempus('deco', '--kernel', 'gaussian:sigma=1', '--t-grid', '-5:5:51', '--json', json_path)
        self.assertEqual(status, 0)
        with open(csv_path) as f:
            lines = f.read().splitlines()
        self.assertTrue(lines[0].startswith('# tempus'))
        self.assertEqual(len(lines), 53)
        with open(json_path) as f:
            summary = json.load(f)
        self.assertAlmostEqual(summary['fit']['rate'], 0.5, delta=0.005)
        self.assertLessEqual(summary['twin_asymmetry'], 1e-10)

    def test_manifest_replays(self):
        status, _, _ = self.run_tempus('deco', '--kernel', 'gaussian:sigma=1', '--t-grid', '-5:5:51', '--seed', '9')
        self.assertEqual(status, 0)
        manifest = glob.glob(os.path.join(self.logdir, 'Manifest_deco_*.json'))[0]
        with open(manifest) as f:
            first = json.load(f)
        for name in glob.glob(os.path.join(self.logdir, 'Manifest_*.json')):
            os.remove(name)
        status, _, _ = self.run_tempus('deco', '-c', manifest)
        self.assertEqual(status, 0)
        with open(glob.glob(os.path.join(self.logdir, 'Manifest_deco_*.json'))[0]) as f:
            second = json.load(f)
        self.assertEqual(second['hash'], first['hash'])
        self.assertEqual(second['seed'], 9)


if __name__ == '__main__':
    unittest.main()
