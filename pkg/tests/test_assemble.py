import datetime as dt

import numpy as np
import pytest

from failcast import assemble, schema

import helpers
from helpers import hour


def test_hour_with_no_events_has_all_flags_false():
    bundle = helpers.micro_bundle(n_machines=1, n_hours=26)
    rows = assemble.build_event_stream(bundle)
    flags = schema.ERROR_FLAGS + schema.COMP_FLAGS + schema.COMP_FAIL_FLAGS
    assert len(flags) == 13
    for row in rows:
        assert all(getattr(row, f) is False for f in flags)
        assert row.label is False


def test_label_placed_24_hours_before_failure():
    bundle = helpers.micro_bundle(n_machines=3, n_hours=80,
                                  failures_at=((3, 34),))
    rows = assemble.build_event_stream(bundle)
    positives = [(r.machine_id, r.datetime) for r in rows if r.label]
    assert positives == [(3, hour(10))]


def test_matches_brute_force_join_oracle():
    bundle = helpers.micro_bundle(
        n_machines=3, n_hours=72,
        failures_at=((1, 30), (2, 50), (3, 71)),
        errors_at=((1, 6, 2), (1, 6, 4), (2, 0, 1), (3, 47, 5)),
        maintenance_at=((2, 10, 3),))
    assert assemble.build_event_stream(bundle) == \
        helpers.brute_force_stream(bundle)


def test_window_variant_matches_oracle():
    bundle = helpers.micro_bundle(
        n_machines=2, n_hours=60, failures_at=((1, 40), (2, 12)),
        errors_at=((2, 3, 1),))
    horizon = assemble.HorizonConfig(horizon_hours=24, window=True)
    assert assemble.build_event_stream(bundle, horizon) == \
        helpers.brute_force_stream(bundle, window=True)


def test_window_labels_cover_the_whole_horizon():
    bundle = helpers.micro_bundle(n_machines=1, n_hours=80,
                                  failures_at=((1, 40),))
    rows = assemble.build_event_stream(
        bundle, assemble.HorizonConfig(horizon_hours=24, window=True))
    positive_hours = sorted(r.datetime for r in rows if r.label)
    assert positive_hours == [hour(i) for i in range(16, 40)]


def test_row_count_arithmetic():
    for n_hours, horizon in ((30, 24), (48, 12), (25, 24)):
        bundle = helpers.micro_bundle(n_machines=2, n_hours=n_hours)
        rows = assemble.build_event_stream(
            bundle, assemble.HorizonConfig(horizon_hours=horizon))
        assert len(rows) == 2 * (n_hours - horizon)


def test_short_grid_yields_no_rows():
    bundle = helpers.micro_bundle(n_machines=1, n_hours=10)
    assert assemble.build_event_stream(bundle) == []


def test_rows_in_canonical_order(small_rows):
    keys = [(r.machine_id, r.datetime) for r in small_rows]
    assert keys == sorted(keys)


def test_missing_descriptor_aborts_with_machine_id():
    bundle = helpers.micro_bundle(n_machines=2, n_hours=30)
    broken = assemble.DatasetBundle(
        telemetry=bundle.telemetry, errors=[], maintenance=[], failures=[],
        machines=bundle.machines[:1])
    with pytest.raises(assemble.AssembleError, match="machine_id 2"):
        assemble.build_event_stream(broken)


def test_day_of_week_derived_from_datetime(small_rows):
    for row in small_rows[::501]:
        assert row.day_of_week == helpers.DOW[row.datetime.weekday()]


def test_encode_zscores_at_fit_mean():
    bundle = helpers.micro_bundle(n_machines=2, n_hours=26)
    rows = assemble.build_event_stream(bundle)
    data = assemble.encode(rows)
    j = data.encoding.feature_names.index("volt")
    volts = np.array([r.volt for r in rows])
    at_mean = np.flatnonzero(np.isclose(volts, volts.mean()))
    for i in at_mean:
        assert abs(data.rows[i, j]) < 1e-12
    col = data.rows[:, j]
    assert abs(col.mean()) < 1e-12
    assert abs(col.std() - 1.0) < 1e-12


def test_positive_rows_get_weight_100():
    bundle = helpers.micro_bundle(n_machines=2, n_hours=40,
                                  failures_at=((1, 30),))
    rows = assemble.build_event_stream(bundle)
    data = assemble.encode(rows, weight_positive=100.0)
    assert set(data.sample_weights[data.labels]) == {100.0}
    assert set(data.sample_weights[~data.labels]) == {1.0}


def test_exactly_one_day_indicator_set(small_rows):
    rows = small_rows[::9]  # strided so the slice spans several machines
    data = assemble.encode(rows)
    dow_cols = [data.encoding.feature_names.index(f)
                for f in schema.DOW_FEATURES]
    sums = data.rows[:, dow_cols].sum(axis=1)
    assert np.all(sums == 1.0)
    wednesday = [i for i, r in enumerate(rows) if r.day_of_week == "Wed"]
    j = data.encoding.feature_names.index("dow_wed")
    assert np.all(data.rows[wednesday, j] == 1.0)


def test_feature_order_is_canonical_and_stable(small_rows):
    rows = small_rows[::9]
    a = assemble.encode(rows)
    b = assemble.encode(rows)
    assert a.encoding.feature_names == schema.FEATURE_NAMES
    assert a.encoding == b.encoding
    subset = assemble.encode(rows, features=["age", "error_2", "error_1"])
    assert subset.encoding.feature_names == ("error_1", "error_2", "age")


def test_encoding_is_leakage_free():
    bundle = helpers.micro_bundle(n_machines=2, n_hours=40)
    rows = assemble.build_event_stream(bundle)
    fit_mask = np.zeros(len(rows), dtype=bool)
    fit_mask[::2] = True  # alternating rows, so the fit set spans machines
    base = assemble.encode(rows, fit_mask=fit_mask)

    perturbed = list(rows)
    victim = len(rows) - 1
    assert not fit_mask[victim]
    perturbed[victim] = schema.MachineStateRow(
        **{**rows[victim].__dict__, "volt": 1e6, "vibration": -1e6})
    changed = assemble.encode(perturbed, fit_mask=fit_mask)
    assert base.encoding == changed.encoding
    assert np.array_equal(base.rows[fit_mask], changed.rows[fit_mask])


def test_degenerate_column_error_names_column():
    bundle = helpers.micro_bundle(n_machines=1, n_hours=26)
    rows = [schema.MachineStateRow(**{**r.__dict__, "pressure": 5.0})
            for r in assemble.build_event_stream(bundle)]
    with pytest.raises(assemble.EncodingError, match="pressure"):
        assemble.encode(rows)


def test_empty_fit_mask_rejected(small_rows):
    with pytest.raises(assemble.EncodingError, match="non-empty"):
        assemble.encode(small_rows[:50], fit_mask=np.zeros(50, dtype=bool))


def test_unknown_feature_rejected(small_rows):
    with pytest.raises(assemble.EncodingError, match="unknown"):
        assemble.encode(small_rows[:50], features=["volt", "bogus"])


def test_horizon_config_validation():
    with pytest.raises(ValueError):
        assemble.HorizonConfig(horizon_hours=0)
    assert assemble.HorizonConfig().label_semantics == "point-at-horizon"
    assert assemble.HorizonConfig(window=True).label_semantics == "within-horizon"


def test_stream_csv_round_trip(tmp_path, small_rows):
    path = tmp_path / "stream.csv"
    subset = small_rows[:300]
    assemble.write_stream(path, subset)
    assert assemble.read_stream(path) == subset


def test_read_stream_rejects_wrong_header(tmp_path):
    path = tmp_path / "stream.csv"
    path.write_text("machine_id,datetime\n")
    with pytest.raises(assemble.AssembleError, match="header"):
        assemble.read_stream(path)
