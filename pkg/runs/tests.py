import csv
import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings
from django.urls import reverse

from core.exceptions import ConfigurationError

from .exports import report_json, write_report
from .models import RunRecord
from .services import run, validate_config

CUBIC = {'n': 1.0, 't': 0.05, 'c': 2.0, 'hat_pot': [0, 0, 0, 0.1]}


def _config(*tasks, **extra):
    return {'params': dict(CUBIC), 'tasks': list(tasks), **extra}


class ConfigValidationTests(SimpleTestCase):
    def test_defaults_are_filled(self):
        data = validate_config(_config({'task': 'curve'}))
        self.assertEqual(data['seed'], 0)
        self.assertEqual(data['tolerances']['endpoint'], 1e-10)
        self.assertEqual(data['params']['t'], 0.05 + 0j)

    def test_complex_weight(self):
        config = _config()
        config['params']['t'] = [0.05, 0.01]
        self.assertEqual(validate_config(config)['params']['t'], 0.05 + 0.01j)

    def test_genus_above_cap(self):
        with self.assertRaises(ConfigurationError):
            validate_config(_config({'task': 'free-energy', 'g': 7}))
        with override_settings(LOOPCURVE={'GENUS_CAP': 1}):
            with self.assertRaises(ConfigurationError):
                validate_config(_config({'task': 'correlator', 'k': 1, 'g': 2}))

    def test_tolerance_must_be_positive(self):
        with self.assertRaises(ConfigurationError):
            validate_config(_config(tolerances={'oracle': -1e-6}))

    def test_unknown_task_and_bad_fugacity(self):
        with self.assertRaises(ConfigurationError):
            validate_config(_config({'task': 'plot'}))
        config = _config()
        config['params']['n'] = 2.0
        with self.assertRaises(ConfigurationError):
            validate_config(config)

    def test_point_sets_match_k(self):
        with self.assertRaises(ConfigurationError):
            validate_config(_config({'task': 'correlator', 'k': 2, 'g': 0, 'points': [[3.0]]}))

    def test_exactly_one_potential(self):
        config = _config()
        config['params']['pot'] = [0, -1, 1]
        with self.assertRaises(ConfigurationError):
            validate_config(config)


class RunTests(TestCase):
    def test_empty_task_list(self):
        report, record = run(_config())
        self.assertIsNone(record)
        self.assertEqual(report['schema'], 'loopcurve.report/1')
        self.assertEqual(report['tasks'], [])
        self.assertTrue(report['passed'])
        self.assertIn('numpy', report['versions'])
        json.loads(report_json(report))

    def test_curve_task(self):
        report, _ = run(_config({'task': 'curve'}))
        (task,) = report['tasks']
        self.assertEqual(task['status'], 'passed')
        self.assertLess(task['result']['residual'], 1e-10)
        a, b = task['result']['a'][0], task['result']['b'][0]
        self.assertTrue(0 < a < b)

    def test_seeded_probes_are_reproducible(self):
        config = _config({'task': 'correlator', 'k': 1, 'g': 0, 'probes': 2}, seed=42)
        first, _ = run(config)
        second, _ = run(config)
        self.assertEqual(report_json(first), report_json(second))
        other, _ = run(_config({'task': 'correlator', 'k': 1, 'g': 0, 'probes': 2}, seed=43))
        self.assertNotEqual(first['tasks'][0]['result'], other['tasks'][0]['result'])

    def test_two_point_symmetry_is_compared(self):
        report, _ = run(_config({'task': 'correlator', 'k': 2, 'g': 0, 'points': [[3.0, 2.5 + 1j]]}))
        (task,) = report['tasks']
        self.assertEqual(task['comparisons'][0]['name'], 'w2_symmetry')
        self.assertEqual(task['status'], 'passed')

    def test_failed_task_keeps_the_rest(self):
        config = {
            'params': {'n': 0.0, 't': 5.0, 'c': 2.0, 'hat_pot': [0, 0, 0]},
            'tasks': [{'task': 'curve'}, {'task': 'critical-report'}],
        }
        report, record = run(config, store=True)
        curve, critical = report['tasks']
        self.assertEqual(curve['status'], 'error')
        self.assertIn('message', curve['diagnostics'])
        self.assertEqual(critical['status'], 'passed')
        self.assertEqual([p['name'] for p in critical['result']['phases']], ['dense'])
        self.assertEqual(report['status'], 'error')
        self.assertEqual(record.status, 'error')
        self.assertTrue(record.error_message.startswith('curve:'))

    def test_stored_run(self):
        report, record = run(_config({'task': 'critical-report'}), store=True)
        self.assertEqual(RunRecord.objects.count(), 1)
        record.refresh_from_db()
        self.assertEqual(record.status, 'passed')
        self.assertEqual(record.report['status'], 'passed')
        self.assertEqual(record.task_names, ['critical-report'])

    def test_report_files(self):
        report, _ = run(_config({'task': 'curve'}))
        with tempfile.TemporaryDirectory() as tmp:
            report_path, csv_path = write_report(report, Path(tmp) / 'out')
            self.assertEqual(json.loads(report_path.read_text())['status'], 'passed')
            with csv_path.open() as stream:
                rows = list(csv.DictReader(stream))
            self.assertEqual(rows[0]['task'], 'curve')
            self.assertEqual(rows[0]['name'], 'endpoint_residual')
            self.assertEqual(rows[0]['passed'], 'True')


class ApiTests(TestCase):
    def test_phases_endpoint(self):
        response = self.client.get(reverse('runs:phases'), {'dmax': 3, 'mu': 0.5})
        self.assertEqual(response.status_code, 200)
        self.assertEqual([row['name'] for row in response.json()], ['dense', 'dilute'])

    def test_phases_csv(self):
        response = self.client.get(reverse('runs:phases'), {'dmax': 2, 'mu': 0.5, 'as': 'csv'})
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response['Content-Type'], 'text/csv')
        self.assertTrue(response.content.decode().startswith('name,epsilon,m'))

    def test_phases_bad_request(self):
        self.assertEqual(self.client.get(reverse('runs:phases'), {'dmax': 3}).status_code, 400)
        self.assertEqual(self.client.get(reverse('runs:phases'), {'dmax': 1, 'mu': 0.5}).status_code, 400)

    def test_geometry_endpoint(self):
        response = self.client.get(reverse('runs:geometry'), {'n': 1.0, 't': 0.05, 'c': 2.0, 'hat_pot': '0.1'})
        self.assertEqual(response.status_code, 200)
        self.assertLess(response.json()['residual'], 1e-10)

    def test_runs_are_listed(self):
        run(_config(), store=True)
        response = self.client.get(reverse('runs:run-list'))
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.json()['count'], 1)


class CommandTests(TestCase):
    def test_phases_json(self):
        out = StringIO()
        call_command('loopcurve', 'phases', '--dmax', '5', '--mu', '0.5', stdout=out)
        self.assertEqual(len(json.loads(out.getvalue())), 4)

    def test_phases_csv(self):
        out = StringIO()
        call_command('loopcurve', 'phases', '--dmax', '3', '--mu', '0.5', '--format', 'csv', stdout=out)
        self.assertEqual(len(out.getvalue().splitlines()), 3)

    def test_run_writes_report(self):
        with tempfile.TemporaryDirectory() as tmp:
            config_path = Path(tmp) / 'run.json'
            config_path.write_text(json.dumps(_config()))
            out_dir = Path(tmp) / 'out'
            call_command('loopcurve', 'run', '--config', str(config_path), '--out', str(out_dir), '--seed', '7',
                         stdout=StringIO())
            report = json.loads((out_dir / 'report.json').read_text())
            self.assertEqual(report['inputs']['seed'], 7)
            self.assertTrue((out_dir / 'comparisons.csv').exists())
        self.assertEqual(RunRecord.objects.get().seed, 7)

    def test_failing_run_exits_nonzero(self):
        with tempfile.TemporaryDirectory() as tmp:
            config_path = Path(tmp) / 'run.json'
            config = {'params': {'n': 0.0, 't': 5.0, 'c': 2.0, 'hat_pot': [0, 0, 0]}, 'tasks': [{'task': 'curve'}]}
            config_path.write_text(json.dumps(config))
            with self.assertRaises(CommandError):
                call_command('loopcurve', 'run', '--config', str(config_path), '--no-store', stdout=StringIO())
        self.assertEqual(RunRecord.objects.count(), 0)

    def test_missing_config(self):
        with self.assertRaises(CommandError):
            call_command('loopcurve', 'run', '--config', '/nonexistent/run.json', stdout=StringIO())
