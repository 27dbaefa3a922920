"""
Management command for batch runs and phase tables.

    python manage.py loopcurve run --config run.json [--out DIR] [--seed N] [--no-store]
    python manage.py loopcurve phases --dmax 3 --mu 0.5 [--format json|csv]
"""

import json
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from core.exceptions import LoopCurveError
from critical.exports import export_phase_table_csv, export_phase_table_json
from critical.services import phase_table
from runs.exports import write_report
from runs.services import run


class Command(BaseCommand):
    help = 'Run a loopcurve configuration or print a phase table'

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest='action')
        subparsers.required = True

        run_parser = subparsers.add_parser('run', help='Execute a run configuration (JSON)')
        run_parser.add_argument('--config', required=True, help='Path to the run configuration')
        run_parser.add_argument('--out', help='Directory for report.json and comparisons.csv')
        run_parser.add_argument('--seed', type=int, help='Override the probe-point seed')
        run_parser.add_argument('--no-store', action='store_true', help='Do not save a RunRecord')

        phases_parser = subparsers.add_parser('phases', help='Print the phase table')
        phases_parser.add_argument('--dmax', type=int, required=True, help='Degree of the potential')
        phases_parser.add_argument('--mu', type=float, required=True, help='mu in (0, 1)')
        phases_parser.add_argument('--format', choices=['json', 'csv'], default='json')

    def handle(self, *args, **options):
        if options['action'] == 'phases':
            return self.handle_phases(options)
        return self.handle_run(options)

    def handle_phases(self, options):
        try:
            records = phase_table(options['dmax'], options['mu'])
        except LoopCurveError as exc:
            raise CommandError(str(exc))
        if options['format'] == 'csv':
            self.stdout.write(export_phase_table_csv(records).getvalue(), ending='')
        else:
            self.stdout.write(export_phase_table_json(records))

    def handle_run(self, options):
        path = Path(options['config'])
        try:
            config = json.loads(path.read_text(encoding='utf-8'))
        except (OSError, ValueError) as exc:
            raise CommandError(f'cannot read config {path}: {exc}')
        if options.get('seed') is not None:
            config['seed'] = options['seed']
        out_dir = options.get('out') or config.get('output')
        if out_dir:
            config['output'] = str(out_dir)

        self.stdout.write(f'Running {len(config.get("tasks", []))} task(s) from {path}...')
        try:
            report, record = run(config, store=not options['no_store'])
        except LoopCurveError as exc:
            raise CommandError(str(exc))

        for task in report['tasks']:
            style = self.style.SUCCESS if task['status'] == 'passed' else self.style.ERROR
            self.stdout.write(style(f"  {task['task']}: {task['status']}"))
        if out_dir:
            report_path, csv_path = write_report(report, out_dir)
            self.stdout.write(f'Report written to {report_path} and {csv_path}')
        if record is not None:
            self.stdout.write(f'Stored as run {record.id}')

        if not report['passed']:
            raise CommandError(f"run finished with status {report['status']}")
        self.stdout.write(self.style.SUCCESS('All comparisons passed'))
