"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  The two criteria that need exported transformer assets skip (not
fail) when the assets or the ONNX runtime are absent; everything else runs
self-contained.
"""
import json
import os
import time

import numpy as np
import pytest

from ledgerlab.classifiers import ClassifierSpec, fit, lr_loss_grad
from ledgerlab.cli import main as cli_main
from ledgerlab.encode import onehot_feature_count, read_emb1
from ledgerlab.metrics import (
    ConfusionMatrix,
    bland_altman,
    recall_avg_macro,
    round_half_up,
)
from ledgerlab.pca import components_for_variance, fit_pca
from ledgerlab.sampling import class_weights, stratified_split
from ledgerlab.tpe import (
    SearchSpace,
    TpeParams,
    TrialHistory,
    Uniform,
    optimize,
    tpe_suggest,
)

from .test_metrics import PUBLISHED_ROWS


def _ok(name: str, started: float) -> None:
    print(f"[PASS] {name} ({time.perf_counter() - started:.1f}s)")


def test_table3_arithmetic():
    t0 = time.perf_counter()
    for (tn, fn, fp, tp), expected in PUBLISHED_ROWS:
        got = round_half_up(recall_avg_macro(ConfusionMatrix(tn, fn, fp, tp)), 4)
        assert got == expected, f"({tn},{fn},{fp},{tp}): {got} != {expected}"
    assert time.perf_counter() - t0 < 1.0
    _ok("Table 3 arithmetic: 15/15 rows reproduce Recall_AM at 4 d.p.", t0)


def test_onehot_feature_count_formula():
    t0 = time.perf_counter()
    # Literal formula value; the source text reports 2336 for the same
    # cardinalities, a discrepancy documented (not asserted) in the repo.
    assert onehot_feature_count(4, 4, 577) == 2324
    rng = np.random.default_rng(0)
    for _ in range(200):
        max_txn = int(rng.integers(1, 6))
        n_src = int(rng.integers(1, 31))
        n_acc = int(rng.integers(1, 31))
        slots = 0
        for _slot in range(max_txn):
            slots += n_src + n_acc  # enumerate one block
        assert onehot_feature_count(max_txn, n_src, n_acc) == slots
    assert time.perf_counter() - t0 < 1.0
    _ok("Eq-1 feature count: (4,4,577)=2324 plus 200-case block enumeration", t0)


def test_pca_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    for _ in range(100):
        n = int(rng.integers(5, 51))
        d = int(rng.integers(2, 11))
        X = rng.normal(size=(n, d)) @ rng.normal(size=(d, d))
        model = fit_pca(X)
        centered = X - X.mean(axis=0)
        cov = centered.T @ centered / (n - 1)
        oracle = np.clip(np.linalg.eigvalsh(cov)[::-1], 0, None)
        oracle = oracle / oracle.sum()
        np.testing.assert_allclose(model.ratios, oracle[: model.n_components],
                                   rtol=1e-8, atol=1e-10)
        assert abs(model.ratios.sum() - 1.0) < 1e-9
        ks = [components_for_variance(model, t) for t in (0.5, 0.9, 0.99, 1.0)]
        assert ks == sorted(ks)
    assert time.perf_counter() - t0 < 10.0
    _ok("PCA oracle: 100 random matrices match covariance eigendecomposition", t0)


def test_split_and_weights():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    for trial in range(1000):
        n = int(rng.integers(8, 200))
        labels = ["n" if v else "a" for v in rng.integers(0, 2, size=n)]
        if min(labels.count("n"), labels.count("a")) < 2:
            continue
        frac = float(rng.uniform(0.1, 0.5))
        split = stratified_split(labels, frac, seed=trial)
        test_labels = [labels[i] for i in split.test_indices]
        for cls in ("n", "a"):
            assert abs(test_labels.count(cls) - frac * labels.count(cls)) <= 1
    labels = ["normal"] * 19_085 + ["anomalous"] * 105
    cw = class_weights(labels, "balanced")
    total = sum(cw.weight_per_class[l] for l in labels)
    assert abs(total - len(labels)) < 1e-6
    split = stratified_split(labels, 0.2, seed=0)
    test_labels = [labels[i] for i in split.test_indices]
    assert test_labels.count("normal") == 3817
    assert test_labels.count("anomalous") == 21
    assert time.perf_counter() - t0 < 5.0
    _ok("Split/weights: per-class counts within +/-1; (19085/105, 0.2) -> (3817, 21)", t0)


def test_gradient_checks():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(20):
        n, d = int(rng.integers(5, 15)), int(rng.integers(1, 7))
        X = rng.normal(size=(n, d))
        y = rng.integers(0, 2, size=n).astype(np.float64)
        if y.min() == y.max():
            y[0] = 1 - y[0]
        sw = rng.uniform(0.5, 3.0, size=n)
        C = float(rng.uniform(0.05, 5.0))
        wb = rng.normal(scale=0.5, size=d + 1)
        _, grad = lr_loss_grad(wb, X, y, sw, C)
        h = 1e-6
        fd = np.empty_like(wb)
        for j in range(d + 1):
            e = np.zeros(d + 1)
            e[j] = h
            fd[j] = (lr_loss_grad(wb + e, X, y, sw, C)[0]
                     - lr_loss_grad(wb - e, X, y, sw, C)[0]) / (2 * h)
        rel = np.abs(grad - fd) / np.maximum(np.abs(fd), 1e-8)
        worst = max(worst, float(rel.max()))
    assert worst < 1e-5

    rng = np.random.default_rng(99)
    X0 = rng.normal(-2.0, 0.5, size=(120, 6))
    X1 = rng.normal(+2.0, 0.5, size=(40, 6))
    X = np.vstack([X0, X1])
    y = [0] * 120 + [1] * 40
    for seed in (0, 1, 2):
        model = fit(ClassifierSpec("ann", {"epochs": 6}, seed=seed), X, y)
        losses = model.impl.epoch_losses
        assert losses[4] < losses[0], f"seed {seed}: {losses[4]} !< {losses[0]}"
    assert time.perf_counter() - t0 < 30.0
    _ok(f"Gradient checks: LR finite differences (max rel err {worst:.1e}); "
        "NN loss lower at epoch 5 for 3 seeds", t0)


def test_tpe_quadratic():
    t0 = time.perf_counter()
    space = SearchSpace({"x": Uniform(-10.0, 10.0)})
    objective = lambda c: -((c["x"] - 2.0) ** 2)  # noqa: E731
    hits = 0
    tpe_regrets, random_regrets = [], []
    for seed in range(100):
        result = optimize(objective, space, n_iter=100, seed=seed)
        err = abs(result.best_config["x"] - 2.0)
        hits += err < 0.2
        tpe_regrets.append(-result.best_score)
        # Paired random-search baseline: same seed stream, pure startup draws.
        best_random = -np.inf
        history = TrialHistory()
        always_random = TpeParams(n_startup=10**9)
        for i in range(100):
            config = tpe_suggest(history, space, params=always_random, seed=[seed, i])
            best_random = max(best_random, objective(config))
        random_regrets.append(-best_random)
    assert hits >= 95, f"only {hits}/100 seeds within 0.2"
    med_tpe = float(np.median(tpe_regrets))
    med_random = float(np.median(random_regrets))
    assert med_tpe < med_random, f"median regret {med_tpe} !< random {med_random}"
    assert time.perf_counter() - t0 < 60.0
    _ok(f"TPE quadratic: {hits}/100 seeds within 0.2; "
        f"median regret {med_tpe:.2e} < random {med_random:.2e}", t0)


def test_mean_pooling_exact():
    t0 = time.perf_counter()
    from ledgerlab.embed import mean_pool

    out = mean_pool(np.array([[1.0, 3.0], [3.0, 1.0]]), np.array([1, 1]))
    np.testing.assert_allclose(out, [2.0, 2.0], atol=1e-12)
    out = mean_pool(np.array([[1.0, 1.0], [9.0, 9.0]]), np.array([1, 0]))
    np.testing.assert_allclose(out, [1.0, 1.0], atol=1e-12)
    rng = np.random.default_rng(4)
    emb = rng.normal(size=(5, 4))
    base = mean_pool(emb, np.ones(5))
    padded = np.vstack([emb, rng.normal(size=(7, 4))])
    mask = np.concatenate([np.ones(5), np.zeros(7)])
    np.testing.assert_allclose(mean_pool(padded, mask), base, atol=1e-12)
    assert time.perf_counter() - t0 < 1.0
    _ok("Mean pooling: hand cases and padded-token invariance exact to 1e-12", t0)


def test_bland_altman_criterion():
    t0 = time.perf_counter()
    stats = bland_altman([0.1, -0.1], [0.0, 0.0])
    assert abs(stats.mean_diff - 0.0) < 1e-6
    assert abs(stats.lower_limit - (-0.277186)) < 1e-6
    assert abs(stats.upper_limit - 0.277186) < 1e-6
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(2, 30))
        a, b = rng.uniform(size=n), rng.uniform(size=n)
        ab, ba = bland_altman(a, b), bland_altman(b, a)
        assert abs(ab.mean_diff + ba.mean_diff) < 1e-12
        assert abs(ab.upper_limit + ba.lower_limit) < 1e-12
        assert abs(ab.lower_limit + ba.upper_limit) < 1e-12
    assert time.perf_counter() - t0 < 1.0
    _ok("Bland-Altman: d=[0.1,-0.1] limits +/-0.277186; antisymmetry x100", t0)


def _run_smoke_chain(root: str) -> dict:
    data = os.path.join(root, "data")
    split = os.path.join(root, "split.json")
    emb = os.path.join(root, "hash.emb1")
    tuned = os.path.join(root, "tuned_lr")
    assert cli_main(["synth", "--seed", "7", "--out", data]) == 0
    assert cli_main([
        "split", "--labels", os.path.join(data, "labels.csv"),
        "--test-frac", "0.2", "--seed", "7", "--out", split,
    ]) == 0
    assert cli_main([
        "encode", "--method", "embed", "--backend", "hash",
        "--standardize", "--split-file", split, "--in", data, "--out", emb,
    ]) == 0
    assert cli_main([
        "tune", "--model", "lr", "--iters", "20",
        "--features", emb, "--split", split,
        "--labels", os.path.join(data, "labels.csv"),
        "--seed", "7", "--out", tuned,
    ]) == 0
    return {
        "transactions": os.path.join(data, "transactions.csv"),
        "labels": os.path.join(data, "labels.csv"),
        "split": split,
        "emb": emb,
        "model": os.path.join(tuned, "model.json"),
        "eval": os.path.join(tuned, "eval.json"),
        "trials": os.path.join(tuned, "trials.jsonl"),
    }


@pytest.mark.slow
def test_end_to_end_smoke(tmp_path):
    t0 = time.perf_counter()
    first = _run_smoke_chain(str(tmp_path / "run1"))
    report = json.load(open(first["eval"]))
    assert report["recall_am"] >= 0.90, f"recall_am {report['recall_am']} < 0.90"

    second = _run_smoke_chain(str(tmp_path / "run2"))
    for key in ("transactions", "labels", "split", "emb", "model", "eval"):
        a = open(first[key], "rb").read()
        b = open(second[key], "rb").read()
        assert a == b, f"{key} differs between reruns"
    # trials.jsonl records wall-clock durations; compare it structurally.
    for la, lb in zip(open(first["trials"]), open(second["trials"])):
        ta, tb = json.loads(la), json.loads(lb)
        ta.pop("duration_ms"), tb.pop("duration_ms")
        assert ta == tb
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0, f"smoke took {elapsed:.0f}s"
    _ok(f"End-to-end smoke: tuned LR recall_am {report['recall_am']:.4f} >= 0.90; "
        "re-run byte-identical", t0)


@pytest.mark.slow
def test_directional_encoder_claim(tmp_path):
    t0 = time.perf_counter()
    from ledgerlab.encode import OneHotLayout, encode_onehot_dataset, serialize_entry
    from ledgerlab.embed import HashingBackend, embed_batch
    from ledgerlab.synth import GeneratorConfig, generate_ledger

    ds = generate_ledger(GeneratorConfig(seed=7))
    onehot = encode_onehot_dataset(ds, OneHotLayout.from_dataset(ds, 4))
    texts = [serialize_entry(e) for e in ds.entries]
    emb = embed_batch(texts, HashingBackend(), ds.ids())
    k_emb = components_for_variance(fit_pca(emb), 0.99)
    k_onehot = components_for_variance(fit_pca(onehot), 0.99)
    assert k_emb < k_onehot, f"embedding {k_emb} !< one-hot {k_onehot}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0, f"directional check took {elapsed:.0f}s"
    _ok(f"Directional claim: embedding needs {k_emb} components for 99% variance "
        f"vs one-hot {k_onehot}", t0)


def _model_dir():
    return os.environ.get("LEDGERLAB_MODEL_DIR", "")


@pytest.mark.parametrize("model_id,dim", [
    ("all-mpnet-base-v2", 768),
    ("all-distilroberta-v1", 768),
    ("all-MiniLM-L6-v2", 384),
])
def test_export_parity(model_id, dim):
    # [SECONDARY] criterion: runnable only with exported checkpoint assets.
    base = _model_dir()
    d = os.path.join(base, model_id) if base else ""
    if not d or not os.path.isdir(d):
        pytest.skip(f"no exported assets for {model_id} (set LEDGERLAB_MODEL_DIR)")
    meta = json.load(open(os.path.join(d, "metadata.json")))
    assert meta["dim"] == dim
    fixtures = os.path.join(d, "fixtures.csv")
    assert os.path.exists(fixtures), "export tool must emit fixtures.csv"
    _ok(f"Export parity metadata: {model_id} dim {dim}", time.perf_counter())


def test_backend_reproduces_fixtures():
    # [SECONDARY -> PRIMARY bridge]: cosine >= 0.999 against fixture vectors.
    base = _model_dir()
    if not base or not os.path.isdir(base):
        pytest.skip("no exported assets (set LEDGERLAB_MODEL_DIR)")
    from ledgerlab.embed import TransformerBackend, embed_batch
    from ledgerlab.errors import BackendLoadError

    checked = 0
    for model_id in sorted(os.listdir(base)):
        d = os.path.join(base, model_id)
        fixtures = os.path.join(d, "fixtures.csv")
        texts_file = os.path.join(d, "fixtures.txt")
        if not (os.path.exists(fixtures) and os.path.exists(texts_file)):
            continue
        try:
            backend = TransformerBackend(d)
        except BackendLoadError as exc:
            pytest.skip(f"backend unloadable here: {exc}")
        texts = [l.rstrip("\n") for l in open(texts_file, encoding="utf-8") if l.strip()]
        import csv as _csv

        refs = []
        with open(fixtures, newline="", encoding="utf-8") as fh:
            for row in _csv.reader(fh):
                refs.append(np.array([float(v) for v in row[1:]]))
        m = embed_batch(texts, backend, tuple(str(i) for i in range(len(texts))))
        for got, ref in zip(m.values, refs):
            cos = float(got @ ref / (np.linalg.norm(got) * np.linalg.norm(ref)))
            assert cos >= 0.999
        checked += 1
    if not checked:
        pytest.skip("no model directories with fixtures found")
    _ok(f"Bridge: embed-backend reproduces fixtures for {checked} model(s)",
        time.perf_counter())
