"""Acceptance criteria, one marked test (or group) per criterion.

The terminal summary prints a PASS/FAIL/SKIP line per criterion. Dataset
criteria (6, 7) run only when the public files are present:

    RIEMANN_IDS_NSLKDD_DIR  containing KDDTrain+.txt and KDDTest+.txt
    RIEMANN_IDS_UNSW_DIR    containing UNSW_NB15_training-set.csv and
                            UNSW_NB15_testing-set.csv
"""
import os
import time
from pathlib import Path

import numpy as np
import pytest

from riemann_ids import pipeline
from riemann_ids.classify import mdrm_fit, mdrm_predict
from riemann_ids.classify.neural import init_net
from riemann_ids.dataio import binarize_labels, load_bundle, load_nslkdd, load_unsw, save_bundle
from riemann_ids.features import ShrinkageConfig, shrink
from riemann_ids.manifold import (
    exp_map,
    geodesic_distance,
    geodesic_midpoint,
    karcher_mean,
    log_map,
    tangent_vectorize,
    untangent,
)
from riemann_ids.metrics import accuracy, confusion, precision_recall_f1, roc_auc

from conftest import random_spd
from synth import write_nslkdd
from test_classify import fd_check
from test_metrics import brute_metrics, pairwise_auc

C1 = "geometry suite on random SPD matrices, p in {2, 10, 13}, < 10 s"
C2 = "shrinkage restores definiteness and preserves trace on 1000 rank-deficient 10x10"
C3 = "metrics match brute-force recount, AUC matches pairwise statistic, random AUC ~ 0.5"
C4 = "MDRM synthetic separation at p = 10, accuracy >= 0.95, < 30 s"
C5 = "MDRM predictions invariant under a congruence of the whole synthetic dataset"
C6 = "NSL-KDD: MDRM weighted accuracy 86 +/- 4, AE accuracy 92 +/- 4, < 10 min"
C7 = "UNSW-NB15: MDRM weighted accuracy 74 +/- 5, MLP accuracy 89 +/- 4"
C8 = "MLP and AE gradients match central differences within 1e-4 on >= 20 parameters"
C9 = "save -> load -> predict is bit-identical on 1000 samples for every classifier"


def rel_fro(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


# --- 1 -------------------------------------------------------------------

@pytest.mark.criterion(1, C1)
def test_geometry_suite():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = dict(roundtrip=0.0, symmetry=0.0, congruence=0.0, midpoint=0.0, tangent=0.0)
    for p in (2, 10, 13):
        for _ in range(100):
            q, c = random_spd(rng, p), random_spd(rng, p)
            worst["roundtrip"] = max(worst["roundtrip"], rel_fro(exp_map(q, log_map(q, c)), c))
            d = geodesic_distance(q, c)
            worst["symmetry"] = max(worst["symmetry"], abs(d - geodesic_distance(c, q)))
            w = rng.normal(size=(p, p))
            dw = geodesic_distance(w @ q @ w.T, w @ c @ w.T)
            worst["congruence"] = max(worst["congruence"], abs(d - dw))
            km = karcher_mean(np.stack([q, c]))
            worst["midpoint"] = max(worst["midpoint"], rel_fro(km, geodesic_midpoint(q, c)))
            tv = np.linalg.norm(tangent_vectorize(q, c))
            worst["tangent"] = max(worst["tangent"], abs(tv - d))
    elapsed = time.perf_counter() - t0
    print(f"criterion 1 worst errors {worst}, {elapsed:.2f}s")
    assert worst["roundtrip"] <= 1e-8
    assert worst["symmetry"] <= 1e-10
    assert worst["congruence"] <= 1e-6
    assert worst["midpoint"] <= 1e-6
    assert worst["tangent"] <= 1e-8
    assert elapsed < 10.0


# --- 2 -------------------------------------------------------------------

@pytest.mark.criterion(2, C2)
def test_shrinkage_suite():
    rng = np.random.default_rng(7)
    cfg = ShrinkageConfig(0.1)
    for _ in range(1000):
        r = int(rng.integers(1, 10))
        x = rng.uniform(size=(10, r)) * rng.uniform(0.01, 10)
        c = x @ x.T
        assert np.linalg.matrix_rank(c) < 10
        out = shrink(c, cfg)
        tr = np.trace(c)
        assert np.min(np.linalg.eigvalsh(out)) >= 0.1 * tr / 10 - 1e-12
        assert abs(np.trace(out) - tr) <= 1e-10


# --- 3 -------------------------------------------------------------------

@pytest.mark.criterion(3, C3)
def test_metrics_oracle():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        k = int(rng.integers(2, 6))
        n = int(rng.integers(1, 51))
        actual = list(rng.integers(0, k, n))
        predicted = list(rng.integers(0, k, n))
        labels = sorted(set(actual) | set(predicted))
        cm = confusion(actual, predicted, labels)
        prf = precision_recall_f1(cm)
        ref = brute_metrics(actual, predicted, labels)
        assert abs(accuracy(cm) - ref["accuracy"]) <= 1e-12
        for i, c in enumerate(labels):
            assert abs(prf.precision[i] - ref["precision"][c]) <= 1e-12
            assert abs(prf.recall[i] - ref["recall"][c]) <= 1e-12
            assert abs(prf.f1[i] - ref["f1"][c]) <= 1e-12
        for agg in ("macro", "micro", "weighted"):
            for m in ("precision", "recall", "f1"):
                assert abs(getattr(prf, agg)[m] - ref[agg][m]) <= 1e-12


@pytest.mark.criterion(3, C3)
def test_auc_oracle():
    rng = np.random.default_rng(4)
    done = 0
    while done < 1000:
        n = int(rng.integers(2, 51))
        y = list(rng.integers(0, 2, n))
        if len(set(y)) < 2:
            continue
        # coarse rounding forces ties
        s = list(np.round(rng.uniform(size=n), int(rng.integers(1, 4))))
        assert abs(roc_auc(y, s, 1)[0] - pairwise_auc(y, s, 1)) <= 1e-9
        done += 1
    y = rng.integers(0, 2, 10_000)
    auc, _ = roc_auc(y, rng.uniform(size=10_000), 1)
    assert abs(auc - 0.5) <= 0.02


# --- 4, 5 ----------------------------------------------------------------

def spd_cloud(rng, center, n, sigma):
    """``exp`` of isotropic whitened tangent noise at ``center``."""
    p = center.shape[0]
    z = sigma * rng.normal(size=(n, p * (p + 1) // 2))
    return np.stack([untangent(center, v) for v in z])


@pytest.fixture(scope="module")
def separation_data():
    rng = np.random.default_rng(11)
    p = 10

    def split():
        x = np.concatenate([spd_cloud(rng, np.eye(p), 200, 0.1), spd_cloud(rng, 3 * np.eye(p), 200, 0.1)])
        return x, ["low"] * 200 + ["high"] * 200

    return split(), split()


@pytest.mark.criterion(4, C4)
def test_mdrm_separation(separation_data):
    (xtr, ytr), (xte, yte) = separation_data
    t0 = time.perf_counter()
    model = mdrm_fit(xtr, ytr)
    pred = mdrm_predict(model, xte)
    elapsed = time.perf_counter() - t0
    acc = np.mean(np.array(pred) == np.array(yte))
    print(f"criterion 4 accuracy {acc:.4f} in {elapsed:.2f}s")
    assert acc >= 0.95
    assert elapsed < 30.0


@pytest.mark.criterion(5, C5)
def test_mdrm_affine_invariance(separation_data):
    (xtr, ytr), (xte, _) = separation_data
    w = np.random.default_rng(12).normal(size=(10, 10))
    base = mdrm_predict(mdrm_fit(xtr, ytr), xte)
    moved = mdrm_predict(mdrm_fit(w @ xtr @ w.T, ytr), w @ xte @ w.T)
    assert base == moved


# --- 6, 7 ----------------------------------------------------------------

def dataset_files(env, names):
    root = os.environ.get(env)
    if not root:
        pytest.skip(f"{env} not set; public dataset files unavailable")
    paths = [Path(root) / n for n in names]
    missing = [str(p) for p in paths if not p.is_file()]
    if missing:
        pytest.skip(f"dataset files missing: {missing}")
    return paths


def weighted_accuracy(actual, predicted):
    """Support-weighted recall, equal to plain accuracy."""
    return float(np.mean(np.asarray(actual) == np.asarray(predicted)))


def run_dataset(train_tab, test_tab, classifier, **kw):
    cfg = pipeline.RunConfig(dataset=train_tab.dataset, classifier=classifier, **kw)
    bundle = pipeline.train(train_tab, cfg)
    pred, _ = pipeline.predict(bundle, test_tab)
    return 100 * weighted_accuracy(binarize_labels(test_tab), pred)


@pytest.mark.dataset
@pytest.mark.criterion(6, C6)
def test_nslkdd_reproduction():
    train_path, test_path = dataset_files("RIEMANN_IDS_NSLKDD_DIR", ["KDDTrain+.txt", "KDDTest+.txt"])
    t0 = time.perf_counter()
    train_tab, test_tab = load_nslkdd(train_path), load_nslkdd(test_path)
    mdrm = run_dataset(train_tab, test_tab, "mdrm")
    ae = run_dataset(train_tab, test_tab, "ae")
    elapsed = time.perf_counter() - t0
    print(f"criterion 6 MDRM {mdrm:.2f}, AE {ae:.2f}, {elapsed:.0f}s")
    assert abs(mdrm - 86) <= 4
    assert abs(ae - 92) <= 4
    assert elapsed < 600


@pytest.mark.dataset
@pytest.mark.criterion(7, C7)
def test_unsw_reproduction():
    train_path, test_path = dataset_files(
        "RIEMANN_IDS_UNSW_DIR", ["UNSW_NB15_training-set.csv", "UNSW_NB15_testing-set.csv"]
    )
    train_tab, test_tab = load_unsw(train_path), load_unsw(test_path)
    mdrm = run_dataset(train_tab, test_tab, "mdrm")
    mlp = run_dataset(train_tab, test_tab, "mlp")
    print(f"criterion 7 MDRM {mdrm:.2f}, MLP {mlp:.2f}")
    assert abs(mdrm - 74) <= 5
    assert abs(mlp - 89) <= 4


# --- 8 -------------------------------------------------------------------

def generic_point(net, rng):
    # zero biases can leave a pre-activation exactly on the relu kink,
    # where the loss has no derivative; check at a generic point instead
    for b in net.biases:
        b[:] = rng.normal(scale=0.1, size=b.shape)
    return net


@pytest.mark.criterion(8, C8)
def test_gradient_checks():
    rng = np.random.default_rng(8)
    d = 55  # tangent dimension at p = 10
    mlp = generic_point(init_net([d, 64, 2], "softmax", 1), rng)
    h = rng.normal(size=(32, d))
    target = np.eye(2)[rng.integers(0, 2, 32)]
    assert fd_check(mlp, h, target, rng, n_params=40) <= 1e-4
    ae = generic_point(init_net([d, 32, 5, 32, d], "linear", 2), rng)
    assert fd_check(ae, h, h, rng, n_params=40) <= 1e-4


# --- 9 -------------------------------------------------------------------

@pytest.fixture(scope="module")
def persistence_tables(tmp_path_factory):
    root = tmp_path_factory.mktemp("persist")
    train = load_nslkdd(write_nslkdd(root / "train.txt", 1000, seed=21))
    test = load_nslkdd(write_nslkdd(root / "test.txt", 1000, seed=22))
    return root, train, test


@pytest.mark.criterion(9, C9)
@pytest.mark.parametrize("classifier", pipeline.CLASSIFIERS)
def test_persistence(persistence_tables, classifier):
    root, train, test = persistence_tables
    bundle = pipeline.train(train, pipeline.RunConfig(classifier=classifier, epochs=5))
    path = save_bundle(bundle, root / f"{classifier}.json")
    mem_labels, mem_scores = pipeline.predict(bundle, test)
    disk_labels, disk_scores = pipeline.predict(load_bundle(path), test)
    assert len(mem_labels) == 1000
    assert list(mem_labels) == list(disk_labels)
    assert mem_scores.tobytes() == disk_scores.tobytes()
