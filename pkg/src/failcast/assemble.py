"""Machine-state stream assembly and design-matrix encoding.

Events are left-joined onto the hourly telemetry grid (hours without a
matching event keep all flags false), machine descriptors and day of week
are attached, and each row is labeled with the machine failure state at
``datetime + horizon_hours``.  Rows whose horizon extends past the last
grid hour of their machine are dropped: their label is undefined.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass

import numpy as np

from . import schema
from .ingest import DatasetBundle, HOUR
from .schema import MachineStateRow


class AssembleError(Exception):
    pass


class EncodingError(Exception):
    pass


@dataclass(frozen=True)
class HorizonConfig:
    """Lead time for the label; ``window=True`` labels any failure within
    the next ``horizon_hours`` instead of the state at exactly t + horizon."""

    horizon_hours: int = 24
    window: bool = False

    def __post_init__(self):
        if self.horizon_hours < 1:
            raise ValueError("horizon_hours must be at least 1")

    @property
    def label_semantics(self) -> str:
        return "within-horizon" if self.window else "point-at-horizon"


@dataclass
class DesignMatrix:
    """Encoded features with labels, per-row weights and join keys."""

    rows: np.ndarray
    labels: np.ndarray
    sample_weights: np.ndarray
    keys: list
    encoding: schema.FeatureEncoding


def _machine_failed(rec) -> bool:
    return any(getattr(rec, f) for f in schema.COMP_FLAGS)


def build_event_stream(bundle: DatasetBundle, horizon: HorizonConfig = HorizonConfig()):
    """Join the bundle into one MachineStateRow per labelable telemetry hour.

    Rows come back in canonical (machine_id, datetime) order.  A telemetry
    machine missing from the machines dataset aborts with AssembleError.
    """
    descriptors = {m.machine_id: m for m in bundle.machines}
    errors = {(r.machine_id, r.datetime): r for r in bundle.errors}
    maintenance = {(r.machine_id, r.datetime): r for r in bundle.maintenance}
    failure_hours = {(r.machine_id, r.datetime)
                     for r in bundle.failures if _machine_failed(r)}

    last_hour = {}
    for rec in bundle.telemetry:
        prev = last_hour.get(rec.machine_id)
        if prev is None or rec.datetime > prev:
            last_hour[rec.machine_id] = rec.datetime

    delta = dt.timedelta(hours=horizon.horizon_hours)
    rows = []
    for rec in sorted(bundle.telemetry, key=lambda r: (r.machine_id, r.datetime)):
        descriptor = descriptors.get(rec.machine_id)
        if descriptor is None:
            raise AssembleError(
                f"telemetry references machine_id {rec.machine_id} "
                "absent from the machines dataset")
        if rec.datetime + delta > last_hour[rec.machine_id]:
            continue
        key = (rec.machine_id, rec.datetime)
        err = errors.get(key)
        mnt = maintenance.get(key)
        if horizon.window:
            label = any((rec.machine_id, rec.datetime + k * HOUR) in failure_hours
                        for k in range(1, horizon.horizon_hours + 1))
        else:
            label = (rec.machine_id, rec.datetime + delta) in failure_hours
        rows.append(MachineStateRow(
            machine_id=rec.machine_id,
            datetime=rec.datetime,
            **{f: bool(err and getattr(err, f)) for f in schema.ERROR_FLAGS},
            **{f: bool(mnt and getattr(mnt, f))
               for f in schema.COMP_FLAGS + schema.COMP_FAIL_FLAGS},
            volt=rec.volt, rotate=rec.rotate,
            pressure=rec.pressure, vibration=rec.vibration,
            age=descriptor.age,
            **{f: bool(getattr(descriptor, f)) for f in schema.MODEL_FLAGS},
            day_of_week=schema.day_of_week(rec.datetime),
            label=label,
        ))
    return rows


def raw_feature_matrix(rows, features=None):
    """Unstandardized feature columns for ``rows`` in canonical order.

    Returns (matrix, labels, keys, feature_names).  ``features`` selects a
    subset of the canonical names; order always follows the canonical one.
    """
    if features is None:
        names = schema.FEATURE_NAMES
    else:
        unknown = [f for f in features if f not in schema.FEATURE_NAMES]
        if unknown:
            raise EncodingError(f"unknown feature(s) {unknown}")
        wanted = set(features)
        names = tuple(f for f in schema.FEATURE_NAMES if f in wanted)
    if not names:
        raise EncodingError("empty feature set")

    n = len(rows)
    matrix = np.empty((n, len(names)))
    dow_index = {name: i for i, name in enumerate(schema.DOW_FEATURES)}
    day_col = None
    for j, name in enumerate(names):
        if name in dow_index:
            if day_col is None:
                day_col = np.array(
                    [schema.DAY_NAMES.index(r.day_of_week) for r in rows])
            matrix[:, j] = (day_col == dow_index[name]).astype(float)
        else:
            matrix[:, j] = np.array([getattr(r, name) for r in rows], dtype=float)
    labels = np.array([r.label for r in rows], dtype=bool)
    keys = [(r.machine_id, r.datetime) for r in rows]
    return matrix, labels, keys, names


def fit_encoding(matrix, feature_names, fit_mask) -> schema.FeatureEncoding:
    """Standardization statistics from the fit rows only.

    Raises EncodingError when no fit rows are given or a continuous
    column is constant on them.
    """
    fit_mask = np.asarray(fit_mask, dtype=bool)
    if fit_mask.shape[0] != matrix.shape[0]:
        raise EncodingError("fit mask length does not match row count")
    if not fit_mask.any():
        raise EncodingError("fit rows must be non-empty")
    continuous = tuple(f for f in feature_names if f in schema.CONTINUOUS_FEATURES)
    means, stds = [], []
    sub = matrix[fit_mask]
    for name in continuous:
        col = sub[:, feature_names.index(name)]
        mean = float(col.mean())
        std = float(col.std())
        if std == 0.0:
            raise EncodingError(f"degenerate encoding: column {name!r} is "
                                "constant on the fit rows")
        means.append(mean)
        stds.append(std)
    return schema.FeatureEncoding(feature_names=tuple(feature_names),
                                  continuous=continuous,
                                  means=tuple(means), std_devs=tuple(stds))


def apply_encoding(matrix, encoding: schema.FeatureEncoding) -> np.ndarray:
    out = matrix.astype(float, copy=True)
    for name, mean, std in zip(encoding.continuous, encoding.means, encoding.std_devs):
        j = encoding.feature_names.index(name)
        out[:, j] = (out[:, j] - mean) / std
    return out


def encode(rows, weight_positive=100.0, fit_mask=None, features=None) -> DesignMatrix:
    """Encode machine-state rows into a standardized design matrix.

    Continuous features are z-scored with statistics from ``fit_mask``
    rows only (all rows when omitted); flags become 0/1 and day of week
    expands to 7 indicators.  Positive rows get ``weight_positive``,
    negative rows weight 1.
    """
    if weight_positive <= 0:
        raise ValueError("weight_positive must be positive")
    matrix, labels, keys, names = raw_feature_matrix(rows, features)
    if fit_mask is None:
        fit_mask = np.ones(len(rows), dtype=bool)
    encoding = fit_encoding(matrix, names, fit_mask)
    encoded = apply_encoding(matrix, encoding)
    weights = np.where(labels, float(weight_positive), 1.0)
    return DesignMatrix(rows=encoded, labels=labels, sample_weights=weights,
                        keys=keys, encoding=encoding)


def write_stream(path, rows):
    """Write assembled rows as CSV in MachineStateRow field order."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(schema.CSV_COLUMNS[MachineStateRow])
        for row in rows:
            writer.writerow(schema.to_csv_row(row))


def read_stream(path):
    """Parse a stream CSV written by write_stream."""
    columns = schema.CSV_COLUMNS[MachineStateRow]
    rows = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(header) != columns:
            raise AssembleError(f"{path}: expected stream header {','.join(columns)}")
        for line_no, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != len(columns):
                raise AssembleError(f"{path}:{line_no}: expected {len(columns)} fields")
            values = {}
            for name, cell in zip(columns, cells):
                if name in ("machine_id", "age"):
                    values[name] = int(cell)
                elif name == "datetime":
                    values[name] = dt.datetime.strptime(cell, schema.DATETIME_FORMAT)
                elif name in schema.TELEMETRY_FIELDS:
                    values[name] = float(cell)
                elif name == "day_of_week":
                    if cell not in schema.DAY_NAMES:
                        raise AssembleError(f"{path}:{line_no}: bad day_of_week {cell!r}")
                    values[name] = cell
                else:
                    if cell not in ("0", "1"):
                        raise AssembleError(f"{path}:{line_no}: bad flag value {cell!r}")
                    values[name] = cell == "1"
            rows.append(MachineStateRow(**values))
    return rows
