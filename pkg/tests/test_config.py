# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md
#
# Unit tests for common/config.py
#

import json
import os
import sys
import tempfile
import unittest

sys.path.append('../')

import common.config as config
import tempus


class TestConfig(unittest.TestCase):
    def setUp(self):
        self.parser, self.parsers = tempus.build_parser()

    def actions(self, subcommand):
        return {a.dest: a for a in self.parsers[subcommand]._actions if a.dest not in ['help', 'config']}

    def test_example_ini_applies(self):
        args = self.parser.parse_args(['schulman'])
        config.convert_config_to_args(args, './config/example.ini', self.actions('schulman'), 'schulman')
        self.assertEqual(args.na, 200)
        self.assertEqual(args.nb, 20)
        self.assertEqual(args.coupling, 0.01)
        self.assertEqual(args.logdir, './logs')
        self.assertFalse(args.debugging)

    def test_command_line_wins(self):
        argslist = ['cosmo', '--step', '0.01', '--ic', '0,1,0']
        args = self.parser.parse_args(argslist)
        explicit = tempus.explicit_dests(self.parsers['cosmo'], argslist)
        self.assertEqual(explicit, {'step', 'ic'})
        my_config = {'Cosmo': {'step': '0.5', 't_end': '2.0', 'ic': '0.1,0,0'}}
        config.convert_config_to_args(args, my_config, self.actions('cosmo'), 'cosmo', explicit)
        self.assertEqual(args.step, 0.01)
        self.assertEqual(args.ic, '0,1,0')
        self.assertEqual(args.t_end, 2.0)

    def test_unknown_option(self):
        args = self.parser.parse_args(['deco'])
        with self.assertRaises(config.ConfigInvalidError) as cm:
            config.convert_config_to_args(args, {'Deco': {'gamma': '0.3'}}, self.actions('deco'), 'deco')
        self.assertEqual(cm.exception.field, 'Deco.gamma')
        self.assertRaises(config.ConfigInvalidError, config.convert_config_to_args, args,
                          {'Orbit': {'x': '1'}}, self.actions('deco'), 'deco')

    def test_bad_value(self):
        args = self.parser.parse_args(['schulman'])
        with self.assertRaises(config.ConfigInvalidError) as cm:
            config.convert_config_to_args(args, {'Schulman': {'steps': 'many'}}, self.actions('schulman'), 'schulman')
        self.assertEqual(cm.exception.field, 'Schulman.steps')
        args = self.parser.parse_args(['branch'])
        self.assertRaises(config.ConfigInvalidError, config.convert_config_to_args, args,
                          {'Branch': {'reverse': 'maybe'}}, self.actions('branch'), 'branch')

    def test_boolean_option(self):
        args = self.parser.parse_args(['branch'])
        config.convert_config_to_args(args, {'Branch': {'reverse': 'yes'}, 'Run': {'debugging': 'on'}},
                                      self.actions('branch'), 'branch')
        self.assertTrue(args.reverse)
        self.assertTrue(args.debugging)

    def test_missing_file(self):
        self.assertRaises(config.ConfigInvalidError, config.read_config, './config/absent.ini')
        self.assertRaises(config.ConfigInvalidError, config.read_config, 42)

    def test_manifest_round_trip(self):
        args = self.parser.parse_args(['wigner', '--sigma', '0.2', '--seed', '3'])
        my_config = config.convert_args_to_config(args, 'wigner')
        manifest = {'version': tempus.tool_version, 'config': config.config_parse_to_dict(my_config)}
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'manifest.json')
            with open(path, 'w') as f:
                json.dump(manifest, f)
            replay = self.parser.parse_args(['wigner'])
            config.convert_config_to_args(replay, path, self.actions('wigner'), 'wigner')
        self.assertEqual(replay.sigma, 0.2)
        self.assertEqual(replay.seed, 3)
        self.assertEqual(config.config_hash(config.convert_args_to_config(replay, 'wigner')), config.config_hash(my_config))

    def test_hash_ignores_output(self):
        base = self.parser.parse_args(['deco'])
        moved = self.parser.parse_args(['deco', '--logdir', '/tmp/elsewhere', '--csv', 'x.csv', '-vv', '--threads', '4'])
        changed = self.parser.parse_args(['deco', '--threshold', '1e-4'])
        digest = config.config_hash(config.convert_args_to_config(base, 'deco'))
        self.assertEqual(config.config_hash(config.convert_args_to_config(moved, 'deco')), digest)
        self.assertNotEqual(config.config_hash(config.convert_args_to_config(changed, 'deco')), digest)


if __name__ == '__main__':
    unittest.main()
