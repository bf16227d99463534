import csv
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from strokelab.errors import DataError
from strokelab.ingest import (
    REQUIRED_COLUMNS, CleaningRules, Dataset, EncodingSpec, ImputationSpec, RawTable, clean,
    decode_label, encode, export_dataset, impute, load_csv, load_dataset, prepare, split,
    standardize, stratified_indices,
)

HEADER = list(REQUIRED_COLUMNS)


def write_rows(path, rows, header=HEADER):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def row(i, gender="Male", age=60, bmi="28.1", work="Private", smoking="never smoked", stroke=0,
        glucose=100.0, married="Yes"):
    return [i, gender, age, 0, 0, married, work, "Urban", glucose, bmi, smoking, stroke]


def test_load_csv_reads_missing_lexemes(tmp_path):
    p = write_rows(tmp_path / "a.csv", [row(1, bmi="N/A"), row(2, bmi="")])
    t = load_csv(p)
    assert t.n_rows == 2
    assert t.missing_count("bmi") == 2
    assert t.column("age") == [60, 60]


def test_load_csv_rejects_missing_column(tmp_path):
    p = write_rows(tmp_path / "a.csv", [row(1)[:-1]], HEADER[:-1])
    with pytest.raises(DataError, match="stroke"):
        load_csv(p)


def test_load_csv_rejects_ragged_row(tmp_path):
    p = write_rows(tmp_path / "a.csv", [row(1), row(2)[:5]])
    with pytest.raises(DataError, match="line 3"):
        load_csv(p)


def test_load_csv_aliases(tmp_path):
    header = ["ID"] + HEADER[1:]
    p = write_rows(tmp_path / "a.csv", [row(1)], header)
    assert "id" in load_csv(p, aliases={"ID": "id"}).columns


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(DataError):
        load_csv(tmp_path / "nope.csv")


def test_clean_rules(tmp_path):
    rows = [
        row(1),
        row(2, bmi="75.0"),           # outlier bmi
        row(3, age=20),               # too young
        row(4, gender="Other"),
        row(5),                       # duplicate of row 1 once id is dropped
        row(6, bmi="N/A", age=30),
    ]
    t = clean(load_csv(write_rows(tmp_path / "a.csv", rows)))
    assert "id" not in t.columns
    assert t.n_rows == 2
    assert t.column("age") == [60, 30]


def test_clean_is_idempotent(stroke_csv):
    once = clean(load_csv(stroke_csv))
    twice = clean(once)
    assert twice.data == once.data


def test_clean_keeps_duplicates_when_disabled(tmp_path):
    t = load_csv(write_rows(tmp_path / "a.csv", [row(1), row(2)]))
    assert clean(t, CleaningRules(drop_duplicates=False)).n_rows == 2


def test_mean_imputation_fills_observed_mean(tmp_path):
    rows = [row(i, bmi=b) for i, b in enumerate(["20", "30", "N/A", "40"])]
    t = impute(clean(load_csv(write_rows(tmp_path / "a.csv", rows)), CleaningRules(drop_duplicates=False)),
               ImputationSpec("mean"))
    assert t.column("bmi") == [20.0, 30.0, 30.0, 40.0]


def test_regression_imputation_matches_ols_oracle(stroke_csv):
    raw = clean(load_csv(stroke_csv))
    enc = EncodingSpec.default("onehot")
    filled = impute(raw, ImputationSpec("regression"), enc)
    miss = np.array([v is None for v in raw.column("bmi")])
    assert miss.sum() > 50
    # independent design: numeric and binary columns by hand, work type dummies minus the first level
    age = np.array(raw.column("age"), float)
    cols = [np.ones(raw.n_rows), age,
            np.array(raw.column("hypertension"), float), np.array(raw.column("heart_disease"), float),
            np.array(raw.column("avg_glucose_level"), float)]
    for name in ("gender", "ever_married", "Residence_type"):
        vals = raw.column(name)
        cols.append(np.array([v == vals[0] for v in vals], float))
    work = raw.column("work_type")
    levels = list(dict.fromkeys(work))
    cols += [np.array([w == lv for w in work], float) for lv in levels[1:]]
    order = ["Unknown", "never smoked", "formerly smoked", "smokes"]
    cols.append(np.array([order.index(s) for s in raw.column("smoking_status")], float))
    A = np.column_stack(cols)
    b = np.array([np.nan if v is None else v for v in raw.column("bmi")], float)
    coef, *_ = np.linalg.lstsq(A[~miss], b[~miss], rcond=None)
    expected = A[miss] @ coef
    got = np.array(filled.column("bmi"))[miss]
    np.testing.assert_allclose(got, expected, rtol=1e-8, atol=1e-8)
    assert filled.column("bmi")[:10] == [v if v is not None else filled.column("bmi")[i]
                                         for i, v in enumerate(raw.column("bmi")[:10])]


def test_imputation_ignores_label(stroke_csv):
    raw = clean(load_csv(stroke_csv))
    flipped = RawTable(list(raw.columns), {**raw.data, "stroke": [1 - v for v in raw.column("stroke")]})
    a = impute(raw, ImputationSpec("regression")).column("bmi")
    b = impute(flipped, ImputationSpec("regression")).column("bmi")
    assert a == b


def test_impute_rejects_other_missing_columns(tmp_path):
    rows = [row(1, bmi="N/A"), row(2, glucose="")]
    t = load_csv(write_rows(tmp_path / "a.csv", rows))
    with pytest.raises(DataError):
        impute(t)


def test_encoding_schemes(onehot_ds, label_ds):
    assert onehot_ds.groups["work_type"] == tuple(n for n in onehot_ds.feature_names if n.startswith("work_type_"))
    block = onehot_ds.X[:, [onehot_ds.feature_index(n) for n in onehot_ds.groups["work_type"]]]
    np.testing.assert_array_equal(block.sum(axis=1), 1.0)
    codes = label_ds.X[:, label_ds.feature_index("work_type")]
    assert set(np.unique(codes)) == set(range(len(onehot_ds.groups["work_type"])))
    assert decode_label(label_ds, "work_type", [0])[0] in {"Private", "Self-employed", "Govt_job"}
    smoke = label_ds.X[:, label_ds.feature_index("smoking_status")]
    assert set(np.unique(smoke)) <= {0, 1, 2, 3}
    assert label_ds.encoding["ever_married"]["mapping"] == {"Yes": 1, "No": 0}


def test_encode_refuses_missing(tmp_path):
    t = load_csv(write_rows(tmp_path / "a.csv", [row(1, bmi="N/A"), row(2)]))
    with pytest.raises(DataError, match="missing"):
        encode(t)


def test_ordinal_spec_must_cover_categories(tmp_path):
    t = clean(load_csv(write_rows(tmp_path / "a.csv", [row(1), row(2, smoking="smokes", age=70)])))
    spec = EncodingSpec({"smoking_status": ("ordinal", ["never smoked"])})
    with pytest.raises(DataError, match="smokes"):
        encode(t, spec)


def test_standardize_uses_train_statistics(toy):
    tr, te = split(toy, 0.25, seed=1)
    s_tr, (s_te,) = standardize(tr, [te])
    np.testing.assert_allclose(s_tr.X.mean(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose(s_tr.X.std(axis=0), 1, atol=1e-12)
    mean, std = s_tr.standardization_stats
    np.testing.assert_allclose(s_te.X, (te.X - mean) / std)


def test_standardize_warns_on_constant_column():
    ds = Dataset(np.column_stack([np.arange(6.0), np.ones(6)]), [0, 1, 0, 1, 0, 1], ("a", "b"))
    with pytest.warns(RuntimeWarning, match="b"):
        out, _ = standardize(ds)
    np.testing.assert_array_equal(out.X[:, 1], 0.0)


@settings(max_examples=60, deadline=None)
@given(n_pos=st.integers(2, 60), n_neg=st.integers(2, 300),
       frac=st.floats(0.05, 0.6), seed=st.integers(0, 10_000))
def test_stratified_split_class_counts(n_pos, n_neg, frac, seed):
    y = np.array([1] * n_pos + [0] * n_neg)
    np.random.default_rng(seed).shuffle(y)
    tr, te = stratified_indices(y, frac, seed)
    assert len(np.intersect1d(tr, te)) == 0
    assert len(tr) + len(te) == len(y)
    for cls, count in ((1, n_pos), (0, n_neg)):
        assert abs(int((y[te] == cls).sum()) - frac * count) <= 1
        assert (y[tr] == cls).sum() >= 1 and (y[te] == cls).sum() >= 1


def test_split_needs_two_per_class():
    ds = Dataset(np.zeros((5, 1)), [1, 0, 0, 0, 0], ("a",))
    with pytest.raises(DataError):
        split(ds)


def test_export_roundtrip(tmp_path, onehot_ds):
    std, _ = standardize(onehot_ds)
    csv_path, meta = export_dataset(std, tmp_path / "d.csv")
    back = load_dataset(csv_path)
    np.testing.assert_array_equal(back.X, std.X)
    np.testing.assert_array_equal(back.y, std.y)
    assert back.feature_names == std.feature_names
    assert back.groups == std.groups
    np.testing.assert_array_equal(back.standardization_stats[1], std.standardization_stats[1])


def test_prepare_surrogate_shape(onehot_ds, label_ds):
    assert len(onehot_ds) == len(label_ds)
    assert onehot_ds.n_features == label_ds.n_features + len(onehot_ds.groups["work_type"]) - 1
    neg, pos = onehot_ds.class_counts()
    assert 0.03 < pos / (neg + pos) < 0.1


def test_prepare_is_deterministic(small_csv):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        a = prepare(small_csv, "regression", "onehot")
    b = prepare(small_csv, "regression", "onehot")
    np.testing.assert_array_equal(a.X, b.X)
