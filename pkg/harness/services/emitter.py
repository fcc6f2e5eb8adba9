"""
Emit Service
CSV tables and JSON reproducibility records
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from django.core.serializers.json import DjangoJSONEncoder

from converter.exceptions import ConfigurationError
from harness.services.runner import MetricsReport, RunSpec, SweepRow, SweepTable, report_row

logger = logging.getLogger(__name__)

CSV_HEADER = ['independent_var', 'snr_db', 'sndr_db', 'sfdr_db', 'enob', 'power_mw', 'fom']
FORMATS = [
    ('csv', 'CSV table'),
    ('json', 'JSON record'),
    ('both', 'CSV and JSON'),
]
FORMAT_VALUES = {value for value, _ in FORMATS}


class SimulationJSONEncoder(DjangoJSONEncoder):
    """DjangoJSONEncoder that also understands numpy scalars and arrays"""

    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        return super().default(o)


def _format_cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return f"{value:.4f}"


def _table_rows(obj: Union[SweepTable, MetricsReport]) -> List[SweepRow]:
    if isinstance(obj, SweepTable):
        return obj.rows
    if obj.spectral is None:
        return []
    return [report_row(obj, obj.target_f_in_hz / 1e6)]


def write_csv(obj: Union[SweepTable, MetricsReport], path: Path) -> Path:
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        for row in _table_rows(obj):
            writer.writerow([_format_cell(getattr(row, column)) for column in CSV_HEADER])
    return path


def build_record(obj: Union[SweepTable, MetricsReport], spec: Optional[RunSpec] = None,
                 values: Optional[List[float]] = None) -> dict:
    """Structured record holding every result field plus the resolved run spec"""
    if isinstance(obj, SweepTable):
        record = {'kind': 'sweep', 'table': obj.to_dict(), 'values': list(values or [])}
    else:
        record = {'kind': 'report', 'report': obj.to_dict()}
    if spec is not None:
        record['run_spec'] = spec.to_dict()
        record['seed'] = spec.seed
        record['seeds'] = list(spec.seeds) or [spec.seed]
    return record


def write_json(obj: Union[SweepTable, MetricsReport], path: Path, spec: Optional[RunSpec] = None,
               values: Optional[List[float]] = None) -> Path:
    with open(path, 'w') as handle:
        json.dump(build_record(obj, spec, values), handle, cls=SimulationJSONEncoder, indent=2)
    return path


def emit(obj: Union[SweepTable, MetricsReport], fmt: str, destination: Union[str, Path],
         spec: Optional[RunSpec] = None, values: Optional[List[float]] = None) -> List[Path]:
    """
    Write ``obj`` as CSV, JSON or both.

    ``destination`` is a file stem; the extension follows the format.
    I/O errors are raised unchanged.
    """
    if fmt not in FORMAT_VALUES:
        raise ConfigurationError(f"unknown output format '{fmt}'")
    stem = Path(destination)
    if stem.suffix in ('.csv', '.json'):
        stem = stem.with_suffix('')
    stem.parent.mkdir(parents=True, exist_ok=True)

    written = []
    if fmt in ('csv', 'both'):
        written.append(write_csv(obj, stem.with_suffix('.csv')))
    if fmt in ('json', 'both'):
        written.append(write_json(obj, stem.with_suffix('.json'), spec, values))
    for path in written:
        logger.info(f"Wrote {path}")
    return written
