"""
Export functions for phase and exponent tables.
"""

import csv
import json
from io import StringIO

PHASE_HEADERS = ['name', 'epsilon', 'm', 'mu', 'lambda', 'alpha', 'beta', 'gamma_str']
FIT_HEADERS = ['name', 'slope', 'stderr', 'intercept', 'r_squared', 'expected']


def export_to_csv(data, headers, stream=None):
    """
    Write rows to CSV.

    Args:
        data: List of dictionaries with data
        headers: List of column headers
        stream: file-like target (an HttpResponse works too); a StringIO by default

    Returns:
        the stream
    """
    stream = stream if stream is not None else StringIO()
    writer = csv.writer(stream)
    writer.writerow(headers)
    for row in data:
        writer.writerow([row.get(header, '') for header in headers])
    return stream


def phase_table_rows(records, kg=()):
    rows = []
    for record in records:
        row = record.to_record()
        for k, g in kg:
            row[f'alpha({k},{g})'] = record.alpha_kg(k, g)
        rows.append(row)
    return rows


def export_phase_table_csv(records, kg=(), stream=None):
    headers = PHASE_HEADERS + [f'alpha({k},{g})' for k, g in kg]
    return export_to_csv(phase_table_rows(records, kg), headers, stream)


def export_phase_table_json(records, kg=()):
    return json.dumps([record.to_record(kg) for record in records], indent=2)


def export_fits_csv(fits, stream=None):
    rows = [fit.to_record() for fit in fits.values() if hasattr(fit, 'to_record')]
    return export_to_csv(rows, FIT_HEADERS, stream)


def export_fits_json(fits):
    payload = {}
    for name, fit in fits.items():
        payload[name] = fit.to_record() if hasattr(fit, 'to_record') else fit
    return json.dumps(payload, indent=2)
