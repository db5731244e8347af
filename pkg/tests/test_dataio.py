import csv
import json

import numpy as np
import pytest

from riemann_ids import pipeline
from riemann_ids.dataio import (
    UNSW_NUMERIC,
    BundleCorruptError,
    BundleVersionError,
    DataFormatError,
    binarize_labels,
    load_bundle,
    load_dataset,
    load_nslkdd,
    load_unsw,
    read_tangent_coords,
    save_bundle,
    write_tangent_coords,
)

from synth import nslkdd_rows, write_nslkdd, write_unsw


@pytest.fixture
def kdd(tmp_path):
    return write_nslkdd(tmp_path / "kdd.txt", 60, seed=1)


@pytest.fixture
def unsw(tmp_path):
    return write_unsw(tmp_path / "unsw.csv", 60, seed=2)


def test_nslkdd_load(kdd):
    tab = load_nslkdd(kdd)
    assert len(tab) == 60
    assert tab.features.shape == (60, 41)
    assert tab.column_kinds["service"] == "categorical"
    assert tab.features["src_bytes"].dtype == np.float64


def test_nslkdd_numbers_parse_exactly(kdd):
    with open(kdd, newline="") as fh:
        raw = next(csv.reader(fh))
    tab = load_nslkdd(kdd)
    assert tab.features["duration"].iloc[0] == float(raw[0])
    assert tab.features["dst_host_srv_rerror_rate"].iloc[0] == float(raw[40])


def test_nslkdd_bad_arity_names_row(tmp_path):
    rows = nslkdd_rows(5)
    rows[3] = rows[3][:40]
    path = tmp_path / "bad.txt"
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    with pytest.raises(DataFormatError, match="row 3 has 40 fields"):
        load_nslkdd(path)


def test_nslkdd_non_numeric(tmp_path):
    rows = nslkdd_rows(3)
    rows[1][4] = "lots"
    path = tmp_path / "bad.txt"
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    with pytest.raises(DataFormatError, match="src_bytes"):
        load_nslkdd(path)


def test_unsw_load(unsw):
    tab = load_unsw(unsw)
    assert len(tab) == 60
    assert len(UNSW_NUMERIC) == 39
    assert tab.default_columns() == UNSW_NUMERIC
    assert set(tab.attack_cat) <= {"Normal", "Generic"}


def test_unsw_missing_column(tmp_path, unsw):
    text = unsw.read_text().replace("sbytes", "sbytez", 1)
    bad = tmp_path / "bad.csv"
    bad.write_text(text)
    with pytest.raises(DataFormatError, match="sbytes"):
        load_unsw(bad)


def test_binarize(kdd, unsw):
    tab = load_nslkdd(kdd)
    y = binarize_labels(tab)
    assert set(y) <= {"normal", "attack"}
    assert np.array_equal(y == "attack", tab.labels == "neptune")
    tab_u = load_unsw(unsw)
    assert np.array_equal(binarize_labels(tab_u) == "attack", tab_u.labels == "1")


def test_unknown_dataset(kdd):
    with pytest.raises(ValueError):
        load_dataset("cicids", kdd)


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_nslkdd(tmp_path / "nope.txt")


@pytest.mark.parametrize("classifier", pipeline.CLASSIFIERS)
def test_bundle_round_trip(tmp_path, classifier):
    tab = load_nslkdd(write_nslkdd(tmp_path / "kdd.txt", 80, seed=3))
    cfg = pipeline.RunConfig(classifier=classifier, epochs=3)
    bundle = pipeline.train(tab, cfg)
    path = save_bundle(bundle, tmp_path / "model.json")
    back = load_bundle(path)
    assert back.kind == classifier
    assert back.to_dict() == bundle.to_dict()
    a_lab, a_sc = pipeline.predict(bundle, tab)
    b_lab, b_sc = pipeline.predict(back, tab)
    assert list(a_lab) == list(b_lab)
    assert np.array_equal(a_sc, b_sc)


@pytest.fixture
def saved(tmp_path):
    tab = load_nslkdd(write_nslkdd(tmp_path / "kdd.txt", 40, seed=4))
    return save_bundle(pipeline.train(tab, pipeline.RunConfig()), tmp_path / "model.json")


def test_bundle_wrong_version(saved):
    doc = json.loads(saved.read_text())
    doc["format_version"] = 99
    saved.write_text(json.dumps(doc))
    with pytest.raises(BundleVersionError, match="99"):
        load_bundle(saved)


def test_bundle_truncated(saved):
    text = saved.read_text()
    saved.write_text(text[: len(text) // 2])
    with pytest.raises(BundleCorruptError):
        load_bundle(saved)


def test_bundle_tampered(saved):
    doc = json.loads(saved.read_text())
    doc["payload"]["shrinkage"]["alpha"] = 0.2
    saved.write_text(json.dumps(doc))
    with pytest.raises(BundleCorruptError, match="checksum"):
        load_bundle(saved)


def test_bundle_not_a_bundle(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("[1, 2]")
    with pytest.raises(BundleCorruptError):
        load_bundle(p)


def test_tangent_coords_round_trip(tmp_path, rng):
    coords = rng.normal(size=(7, 3))
    labels = ["normal", "attack"] * 3 + ["normal"]
    write_tangent_coords(tmp_path / "t.csv", coords, labels)
    back, lab = read_tangent_coords(tmp_path / "t.csv")
    assert np.array_equal(back, coords)
    assert lab == labels
