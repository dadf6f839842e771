"""Hand-built bundles and deliberately naive oracles shared by the tests.

The oracles re-derive results with the dumbest possible code (nested
loops, textual duplication of constants) so they cannot share a bug with
the library implementations they check.
"""

import datetime as dt
import math

import numpy as np

from failcast import ingest, schema
from failcast.rng import Stream

T0 = dt.datetime(2015, 1, 1)

DOW = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")


def hour(i):
    return T0 + dt.timedelta(hours=i)


def telemetry(machine, i, volt=None, rotate=None, pressure=None, vibration=None):
    """Telemetry with deterministic per-cell variation unless pinned."""
    return schema.TelemetryRecord(
        machine_id=machine, datetime=hour(i),
        volt=170.0 + ((machine * 31 + i * 7) % 11) - 5 if volt is None else volt,
        rotate=450.0 + ((machine * 17 + i * 11) % 13) - 6 if rotate is None else rotate,
        pressure=100.0 + ((machine * 13 + i * 5) % 7) - 3 if pressure is None else pressure,
        vibration=40.0 + ((machine * 7 + i * 3) % 5) - 2 if vibration is None else vibration)


def error(machine, i, *flag_indices):
    vals = {f"error_{k}": k in flag_indices for k in range(1, 6)}
    return schema.ErrorRecord(machine_id=machine, datetime=hour(i), **vals)


def maintenance(machine, i, comps=(), fails=()):
    vals = {f"comp_{k}": (k in comps) or (k in fails) for k in range(1, 5)}
    vals.update({f"comp_{k}_fail": k in fails for k in range(1, 5)})
    return schema.MaintenanceRecord(machine_id=machine, datetime=hour(i), **vals)


def failure(machine, i, comp=1):
    vals = {f"comp_{k}": k == comp for k in range(1, 5)}
    return schema.FailureRecord(machine_id=machine, datetime=hour(i), **vals)


def descriptor(machine, age=None, model=None):
    model = (machine - 1) % 4 + 1 if model is None else model
    vals = {f"model_{k}": k == model for k in range(1, 5)}
    return schema.MachineDescriptor(
        machine_id=machine, age=machine + 2 if age is None else age, **vals)


def micro_bundle(n_machines=2, n_hours=48, failures_at=(), errors_at=(),
                 maintenance_at=()):
    """Small bundle on a complete grid.

    ``failures_at``: (machine, hour_index) pairs; each also gets the
    matching maintenance record.  ``errors_at``: (machine, hour_index,
    flag_index) triples.  ``maintenance_at``: (machine, hour_index,
    comp_index) triples for scheduled replacements.
    """
    tel = [telemetry(m, i)
           for m in range(1, n_machines + 1) for i in range(n_hours)]
    fails = [failure(m, i, comp=(m + i) % 4 + 1) for m, i in failures_at]
    # Valid bundles carry at most one event record per machine-hour, so
    # coinciding entries are folded into a single record here.
    mnt_flags = {}
    for m, i in failures_at:
        mnt_flags.setdefault((m, i), [set(), set()])[1].add((m + i) % 4 + 1)
    for m, i, c in maintenance_at:
        mnt_flags.setdefault((m, i), [set(), set()])[0].add(c)
    mnt = [maintenance(m, i, comps=comps, fails=fl)
           for (m, i), (comps, fl) in sorted(mnt_flags.items())]
    err_flags = {}
    for m, i, f in errors_at:
        err_flags.setdefault((m, i), set()).add(f)
    errs = [error(m, i, *flags) for (m, i), flags in sorted(err_flags.items())]
    return ingest.DatasetBundle(
        telemetry=tel, errors=errs, maintenance=mnt, failures=fails,
        machines=[descriptor(m) for m in range(1, n_machines + 1)])


def brute_force_stream(bundle, horizon_hours=24, window=False):
    """Nested-loop join-and-label oracle over all (machine, hour) pairs."""
    span = dt.timedelta(hours=horizon_hours)
    out = []
    for m in sorted({t.machine_id for t in bundle.telemetry}):
        d0 = next(d for d in bundle.machines if d.machine_id == m)
        m_tel = sorted((t for t in bundle.telemetry if t.machine_id == m),
                       key=lambda t: t.datetime)
        last = m_tel[-1].datetime
        for t in m_tel:
            if t.datetime + span > last:
                continue
            flags = {}
            for name in ("error_1", "error_2", "error_3", "error_4", "error_5"):
                flags[name] = any(e.machine_id == m and e.datetime == t.datetime
                                  and getattr(e, name) for e in bundle.errors)
            for name in ("comp_1", "comp_2", "comp_3", "comp_4",
                         "comp_1_fail", "comp_2_fail", "comp_3_fail",
                         "comp_4_fail"):
                flags[name] = any(r.machine_id == m and r.datetime == t.datetime
                                  and getattr(r, name)
                                  for r in bundle.maintenance)
            if window:
                label = any(f.machine_id == m
                            and t.datetime < f.datetime <= t.datetime + span
                            for f in bundle.failures)
            else:
                label = any(f.machine_id == m
                            and f.datetime == t.datetime + span
                            for f in bundle.failures)
            out.append(schema.MachineStateRow(
                machine_id=m, datetime=t.datetime, **flags,
                volt=t.volt, rotate=t.rotate, pressure=t.pressure,
                vibration=t.vibration, age=d0.age,
                model_1=d0.model_1, model_2=d0.model_2,
                model_3=d0.model_3, model_4=d0.model_4,
                day_of_week=DOW[t.datetime.weekday()], label=label))
    return out


def random_instance(seed, n_rows, n_features, weighted=True):
    """Small random design matrix with both classes guaranteed."""
    from failcast import assemble

    s = Stream(seed)
    x = s.normals(n_rows * n_features).reshape(n_rows, n_features)
    beta = s.normals(n_features)
    alpha = float(s.normals(1)[0]) * 0.5
    p = 1.0 / (1.0 + np.exp(-(alpha + x @ beta)))
    y = s.uniforms(n_rows) < p
    if y.all():
        y[0] = False
    if not y.any():
        y[0] = True
    weights = 0.5 + 3.0 * s.uniforms(n_rows) if weighted else np.ones(n_rows)
    return assemble.DesignMatrix(rows=x, labels=y, sample_weights=weights,
                                 keys=[(1, hour(i)) for i in range(n_rows)],
                                 encoding=None)


def naive_objective(alpha, beta, data, l2):
    """Direct per-row summation of the weighted penalized objective."""
    total = 0.0
    for i in range(len(data.labels)):
        z = alpha + sum(float(data.rows[i, j]) * float(beta[j])
                        for j in range(data.rows.shape[1]))
        p = 1.0 / (1.0 + math.exp(-z))
        y = 1.0 if data.labels[i] else 0.0
        total += float(data.sample_weights[i]) * (
            -y * math.log(p) - (1.0 - y) * math.log(1.0 - p))
    return total + 0.5 * l2 * sum(float(b) * float(b) for b in beta)


def central_fd_gradient(params, data, config, step=1e-5):
    """Central finite differences of logreg.objective."""
    from failcast import logreg

    alpha, beta = params
    beta = np.asarray(beta, dtype=float)
    out = np.empty(beta.size + 1)
    out[0] = (logreg.objective((alpha + step, beta), data, config)
              - logreg.objective((alpha - step, beta), data, config)) / (2 * step)
    for j in range(beta.size):
        up, dn = beta.copy(), beta.copy()
        up[j] += step
        dn[j] -= step
        out[j + 1] = (logreg.objective((alpha, up), data, config)
                      - logreg.objective((alpha, dn), data, config)) / (2 * step)
    return out
