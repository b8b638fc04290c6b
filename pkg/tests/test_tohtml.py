# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md
#
# Unit tests for tohtml.py and reproduce.py
#

import csv
import os
import sys
import tempfile
import unittest
from collections import Counter, OrderedDict
from datetime import datetime, timedelta
from types import SimpleNamespace
from unittest import mock

sys.path.append('../')

import reproduce
import tohtml
from common.helper import create_entry


def fake_result(name, rows, errors=''):
    messages = OrderedDict((row[0], create_entry(*row)) for row in rows)
    counts = Counter('{}{}'.format(row[3].lower(), name.capitalize()) for row in rows)
    return {'name': name, 'description': 'checks of {}'.format(name), 'success': all(r[3] != 'FAIL' for r in rows),
            'counts': counts, 'messages': messages, 'errors': errors, 'warns': '', 'elapsed': 1.5}


class TestReport(unittest.TestCase):
    def setUp(self):
        self.results = OrderedDict([
            ('alpha', fake_result('alpha', [('slope', '2.01', '2.0 +- 0.15', 'PASS'), ('ratio', '1.1', 'within x2', 'PASS')])),
            ('beta', fake_result('beta', [('rate', '0.4', '0.3 within 1%', 'FAIL')])),
            ('gamma', fake_result('gamma', [('drift', '0', '<= 1e-10', 'PASS')], errors='ERROR - stray message\n')),
        ])

    def test_count_errors(self):
        error_lines, counts = tohtml.count_errors(self.results)
        self.assertEqual(counts['passAlpha'], 2)
        self.assertEqual(counts['failBeta'], 1)
        # an error message without a failing row still counts
        self.assertEqual(counts['failErrorPresent'], 1)
        self.assertIn('Error message present in gamma', error_lines)
        self.assertEqual(len(error_lines), 2)

    def test_render_and_scrape(self):
        start = datetime(2026, 1, 2, 3, 4, 5)
        page = tohtml.renderHtml(self.results, '1.0.0', start, start + timedelta(seconds=90),
                                 {'Run': {'seed': '0', 'json': ''}, 'Reproduce': {'suite': 'quick'}})
        self.assertIn('tempus Acceptance Report', page)
        self.assertIn('Run.seed', page)
        self.assertNotIn('Run.json', page)
        with tempfile.TemporaryDirectory() as tmp:
            report = os.path.join(tmp, 'report.html')
            tohtml.writeHtml(page, report)
            out = tohtml.htmlLogScraper(report, os.path.join(tmp, 'scraped'))
            with open(out, newline='') as f:
                rows = list(csv.reader(f))
        self.assertEqual(rows[0], tohtml.SCRAPE_COLUMNS)
        self.assertEqual(len(rows), 5)
        self.assertEqual(rows[1], ['alpha', 'PASS', '1.5', 'slope', '2.01', '2.0 +- 0.15', 'PASS'])
        self.assertEqual(rows[3][:2], ['beta', 'FAIL'])


class TestReproduce(unittest.TestCase):
    def test_select_criteria(self):
        self.assertEqual(reproduce.select_criteria(None), list(reproduce.CRITERIA))
        self.assertEqual(reproduce.select_criteria('pole_rule, taxonomy'), ['pole_rule', 'taxonomy'])
        self.assertRaises(ValueError, reproduce.select_criteria, 'pole_rule,speed')
        self.assertEqual(set(reproduce.BUDGETS), set(reproduce.CRITERIA))

    def test_exception_is_a_row(self):
        def broken(scale, seed, threads):
            """always raises"""
            raise RuntimeError('no data')

        with mock.patch.dict(reproduce.CRITERIA, {'broken': broken}), mock.patch.dict(reproduce.BUDGETS, {'broken': 5}):
            me = reproduce.run_criterion('broken', reproduce.SCALES['quick'])
        self.assertFalse(me['success'])
        self.assertEqual(me['counts']['exceptionBroken'], 1)
        self.assertEqual(me['counts']['failBroken'], 1)
        self.assertIn('no data', me['errors'])
        self.assertIn('elapsed seconds', me['messages'])

    def test_slow_criterion_warns(self):
        def slow(scale, seed, threads):
            return [reproduce.check('value', 1.0, '1.0', True)]

        with mock.patch.dict(reproduce.CRITERIA, {'slow': slow}), mock.patch.dict(reproduce.BUDGETS, {'slow': 0}):
            me = reproduce.run_criterion('slow', reproduce.SCALES['quick'])
        self.assertTrue(me['success'])
        self.assertEqual(me['messages']['elapsed seconds'].result, 'WARN')
        self.assertEqual(me['counts']['warnSlow'], 1)
        self.assertIn('elapsed seconds', me['warns'])

    def test_energy_conditions_draw_runs(self):
        entries = reproduce.energy_conditions(SimpleNamespace(dec_runs=4, dec_states=30), 3, 1)
        self.assertEqual(len(entries), 3)
        self.assertEqual([e.result for e in entries], ['PASS'] * 3)
        self.assertIn('4 drawn states', entries[0].name)
        again = reproduce.energy_conditions(SimpleNamespace(dec_runs=4, dec_states=30), 3, 1)
        self.assertEqual(entries[0].name, again[0].name)
        self.assertEqual(entries[0].measured, again[0].measured)

    def test_pole_rule(self):
        results = reproduce.run_suite('quick', 0, 1, ['pole_rule'])
        self.assertTrue(results['pole_rule']['success'])
        self.assertEqual(results['pole_rule']['counts']['passPoleRule'], 4)
        self.assertRaises(ValueError, reproduce.run_suite, 'huge')


if __name__ == '__main__':
    unittest.main()
