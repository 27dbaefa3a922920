"""
Export functions for run reports.
"""

import json
from pathlib import Path

from critical.exports import export_to_csv

COMPARISON_HEADERS = ['task', 'name', 'deviation', 'tolerance', 'passed']


def report_json(report):
    return json.dumps(report, indent=2, sort_keys=True)


def comparison_rows(report):
    rows = []
    for task in report['tasks']:
        for check in task['comparisons']:
            rows.append({'task': task['task'], **check})
    return rows


def write_report(report, out_dir):
    """
    Write report.json and comparisons.csv into ``out_dir``.

    Args:
        report: report document from runs.services.run
        out_dir: target directory, created when missing

    Returns:
        tuple of the two written paths
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / 'report.json'
    report_path.write_text(report_json(report), encoding='utf-8')
    csv_path = out_dir / 'comparisons.csv'
    with csv_path.open('w', newline='', encoding='utf-8') as stream:
        export_to_csv(comparison_rows(report), COMPARISON_HEADERS, stream)
    return report_path, csv_path
