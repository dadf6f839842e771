"""CSV parsing and validation for the five event datasets.

Timestamps are rounded to the nearest hour during parsing (exact half
rounds up).  Event records that collide on (machine_id, hour) after
rounding are merged by logical OR of their flags; telemetry collisions
are surfaced as validation violations instead.
"""

from __future__ import annotations

import csv
import datetime as dt
import os
from dataclasses import dataclass

from . import schema
from .schema import CSV_COLUMNS

HOUR = dt.timedelta(hours=1)

BUNDLE_FILENAMES = {
    "telemetry": "telemetry.csv",
    "errors": "errors.csv",
    "maintenance": "maintenance.csv",
    "failures": "failures.csv",
    "machines": "machines.csv",
}


class IngestError(Exception):
    """Structural parse failure with file, line and column context."""

    def __init__(self, path, line, column, message):
        self.path = str(path)
        self.line = line
        self.column = column
        super().__init__(f"{self.path}:{line}:{column}: {message}")


@dataclass(frozen=True)
class DatasetBundle:
    telemetry: list
    errors: list
    maintenance: list
    failures: list
    machines: list


def round_to_hour(raw: dt.datetime) -> dt.datetime:
    """Round to the nearest whole hour; the exact half hour rounds up."""
    base = raw.replace(minute=0, second=0, microsecond=0)
    offset = (raw - base).total_seconds()
    if offset >= 1800.0:
        return base + HOUR
    return base


def _parse_int(text, path, line, column):
    try:
        return int(text)
    except ValueError:
        raise IngestError(path, line, column, f"expected integer, got {text!r}") from None


def _parse_float(text, path, line, column):
    try:
        return float(text)
    except ValueError:
        raise IngestError(path, line, column, f"expected number, got {text!r}") from None


def _parse_bool(text, path, line, column):
    if text == "0":
        return False
    if text == "1":
        return True
    raise IngestError(path, line, column, f"expected 0 or 1, got {text!r}")


def _parse_datetime(text, path, line, column):
    try:
        return dt.datetime.strptime(text, schema.DATETIME_FORMAT)
    except ValueError:
        raise IngestError(
            path, line, column,
            f"expected datetime {schema.DATETIME_FORMAT.replace('%', '')!s} style, got {text!r}",
        ) from None


def _parse_field(name, text, path, line):
    if name == "machine_id" or name == "age":
        return _parse_int(text, path, line, name)
    if name == "datetime":
        return round_to_hour(_parse_datetime(text, path, line, name))
    if name in schema.TELEMETRY_FIELDS:
        return _parse_float(text, path, line, name)
    return _parse_bool(text, path, line, name)


def parse_csv(path, record_type) -> list:
    """Parse one dataset file into records, aborting on structural faults."""
    columns = CSV_COLUMNS[record_type]
    records = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(path, 1, "-", "empty file, header row required") from None
        if tuple(header) != columns:
            missing = [c for c in columns if c not in header]
            detail = f"missing column(s) {missing}" if missing else f"got {header}"
            raise IngestError(path, 1, "-", f"header must be {','.join(columns)}; {detail}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(columns):
                raise IngestError(
                    path, line_no, "-",
                    f"expected {len(columns)} fields, got {len(row)}")
            values = [_parse_field(col, cell.strip(), path, line_no)
                      for col, cell in zip(columns, row)]
            records.append(record_type(*values))
    return records


def _or_merge(records, record_type, flag_names):
    """Merge events sharing (machine_id, hour) by OR of their flags."""
    merged = {}
    order = []
    for rec in records:
        key = (rec.machine_id, rec.datetime)
        if key not in merged:
            merged[key] = rec
            order.append(key)
        else:
            prev = merged[key]
            flags = {f: bool(getattr(prev, f)) or bool(getattr(rec, f)) for f in flag_names}
            merged[key] = record_type(machine_id=rec.machine_id, datetime=rec.datetime, **flags)
    return [merged[k] for k in order]


def _grid_violations(telemetry) -> list:
    """Report non-contiguous hourly telemetry grids; gaps are tolerated."""
    by_machine = {}
    for i, rec in enumerate(telemetry):
        by_machine.setdefault(rec.machine_id, []).append((rec.datetime, i))
    out = []
    for machine_id in sorted(by_machine):
        hours = sorted(set(t for t, _ in by_machine[machine_id]))
        for prev, cur in zip(hours, hours[1:]):
            step = int((cur - prev).total_seconds() // 3600)
            if step > 1:
                out.append(schema.Violation(
                    None,
                    f"machine {machine_id}: {step - 1} missing hour(s) after {prev}",
                    "telemetry"))
    return out


def _reference_violations(bundle) -> list:
    known = {m.machine_id for m in bundle.machines}
    out = []
    for name in ("telemetry", "errors", "maintenance", "failures"):
        for i, rec in enumerate(getattr(bundle, name)):
            if rec.machine_id not in known:
                out.append(schema.Violation(
                    i, f"machine_id {rec.machine_id} not in machines dataset", name))
    return out


def load_bundle(telemetry, errors, maintenance, failures, machines):
    """Load, round, merge and validate the five datasets.

    Returns ``(DatasetBundle, violations)``.  Violations are data; only
    structural faults (missing column, malformed cell) raise IngestError.
    """
    raw = {
        "telemetry": parse_csv(telemetry, schema.TelemetryRecord),
        "errors": parse_csv(errors, schema.ErrorRecord),
        "maintenance": parse_csv(maintenance, schema.MaintenanceRecord),
        "failures": parse_csv(failures, schema.FailureRecord),
        "machines": parse_csv(machines, schema.MachineDescriptor),
    }
    violations = []
    for name, records in raw.items():
        if records:
            violations.extend(schema.validate_dataset(records, name))
    bundle = DatasetBundle(
        telemetry=raw["telemetry"],
        errors=_or_merge(raw["errors"], schema.ErrorRecord, schema.ERROR_FLAGS),
        maintenance=_or_merge(raw["maintenance"], schema.MaintenanceRecord,
                              schema.COMP_FLAGS + schema.COMP_FAIL_FLAGS),
        failures=_or_merge(raw["failures"], schema.FailureRecord, schema.COMP_FLAGS),
        machines=raw["machines"],
    )
    violations.extend(_reference_violations(bundle))
    violations.extend(_grid_violations(bundle.telemetry))
    return bundle, violations


def load_bundle_dir(directory):
    """load_bundle over the conventional filenames inside one directory."""
    paths = {key: os.path.join(directory, name) for key, name in BUNDLE_FILENAMES.items()}
    return load_bundle(**paths)


def write_csv(path, records, record_type=None):
    rec_type = record_type or type(records[0])
    columns = CSV_COLUMNS[rec_type]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for rec in records:
            writer.writerow(schema.to_csv_row(rec))


def write_bundle(bundle, directory):
    """Write the five dataset CSVs under their conventional names."""
    os.makedirs(directory, exist_ok=True)
    members = {
        "telemetry": (bundle.telemetry, schema.TelemetryRecord),
        "errors": (bundle.errors, schema.ErrorRecord),
        "maintenance": (bundle.maintenance, schema.MaintenanceRecord),
        "failures": (bundle.failures, schema.FailureRecord),
        "machines": (bundle.machines, schema.MachineDescriptor),
    }
    for key, (records, rec_type) in members.items():
        write_csv(os.path.join(directory, BUNDLE_FILENAMES[key]), records, rec_type)
