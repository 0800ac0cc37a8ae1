import numpy as np
import pytest

from ledgerlab.errors import (
    DegenerateClassError,
    InsufficientPairsError,
    KeyMismatchError,
    LengthMismatchError,
    UndefinedClassRecallError,
)
from ledgerlab.metrics import (
    BlandAltman,
    ConfusionMatrix,
    EvalReport,
    bland_altman,
    confusion,
    differential_report,
    learning_curve,
    read_eval_json,
    recall_avg_macro,
    round_half_up,
    write_eval_json,
)

# All 15 published confusion rows: (tn, fn, fp, tp) -> printed Recall_AM.
PUBLISHED_ROWS = [
    # all-MiniLM-L6-v2
    ((3809, 0, 8, 21), 0.9990),
    ((3805, 3, 12, 18), 0.9270),
    ((3788, 3, 29, 18), 0.9248),
    ((3815, 5, 2, 16), 0.8807),
    ((3756, 0, 61, 21), 0.9920),
    # all-distilroberta-v1
    ((3792, 1, 25, 20), 0.9729),
    ((3788, 2, 29, 19), 0.9486),
    ((3789, 1, 28, 20), 0.9725),
    ((3815, 6, 2, 15), 0.8569),
    ((3648, 0, 169, 21), 0.9779),
    # all-mpnet-base-v2
    ((3808, 1, 9, 20), 0.9750),
    ((3785, 1, 32, 20), 0.9720),
    ((3804, 2, 13, 19), 0.9507),
    ((3801, 2, 16, 19), 0.9503),
    ((3740, 0, 77, 21), 0.9899),
]


class TestConfusion:
    def test_perfect_agreement(self):
        y = [0, 1, 0, 1, 1]
        cm = confusion(y, y)
        assert (cm.fn, cm.fp) == (0, 0)
        assert (cm.tn, cm.tp) == (2, 3)

    def test_degenerate_predictor(self):
        cm = confusion([1] * 3 + [0] * 7, [0] * 10)
        assert (cm.tn, cm.fn, cm.fp, cm.tp) == (7, 3, 0, 0)

    def test_matches_brute_force_counter(self):
        rng = np.random.default_rng(0)
        y = rng.integers(0, 2, size=1000)
        p = rng.integers(0, 2, size=1000)
        cm = confusion(y, p)
        counts = {"tn": 0, "fn": 0, "fp": 0, "tp": 0}
        for yt, yp in zip(y, p):
            if yt == 1 and yp == 1:
                counts["tp"] += 1
            elif yt == 1:
                counts["fn"] += 1
            elif yp == 1:
                counts["fp"] += 1
            else:
                counts["tn"] += 1
        assert (cm.tn, cm.fn, cm.fp, cm.tp) == (
            counts["tn"], counts["fn"], counts["fp"], counts["tp"]
        )
        assert cm.total == 1000

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            confusion([0, 1], [0])


class TestRecallAvgMacro:
    def test_lr_minilm_row(self):
        cm = ConfusionMatrix(3809, 0, 8, 21)
        assert recall_avg_macro(cm) == pytest.approx(0.998952, abs=1e-6)
        assert round_half_up(recall_avg_macro(cm)) == 0.9990

    def test_rf_minilm_row(self):
        assert round_half_up(recall_avg_macro(ConfusionMatrix(3805, 3, 12, 18))) == 0.9270

    def test_svm_distilroberta_row(self):
        assert round_half_up(recall_avg_macro(ConfusionMatrix(3815, 6, 2, 15))) == 0.8569

    @pytest.mark.parametrize("row,expected", PUBLISHED_ROWS)
    def test_all_published_rows(self, row, expected):
        tn, fn, fp, tp = row
        assert round_half_up(recall_avg_macro(ConfusionMatrix(tn, fn, fp, tp))) == expected

    def test_scale_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            tn, fn, fp, tp = (int(v) for v in rng.integers(1, 50, size=4))
            base = recall_avg_macro(ConfusionMatrix(tn, fn, fp, tp))
            k = int(rng.integers(2, 9))
            scaled = recall_avg_macro(ConfusionMatrix(tn * k, fn * k, fp * k, tp * k))
            assert scaled == pytest.approx(base, abs=1e-12)

    def test_absent_class_undefined(self):
        with pytest.raises(UndefinedClassRecallError):
            recall_avg_macro(ConfusionMatrix(5, 0, 0, 0))

    def test_row_sums_fixed_across_models_on_one_split(self):
        # On a fixed test split every model shares tn+fp and tp+fn.
        rng = np.random.default_rng(2)
        y = np.array([1] * 21 + [0] * 3817)
        for _ in range(5):
            pred = rng.integers(0, 2, size=y.shape[0])
            cm = confusion(y, pred)
            assert cm.tn + cm.fp == 3817
            assert cm.tp + cm.fn == 21


class TestEvalReport:
    def test_identity_and_round_trip(self, tmp_path):
        cm = ConfusionMatrix(3809, 0, 8, 21)
        report = EvalReport.build(cm, "lr", "hash3-d384-s0", seed=7)
        assert report.recall_avg_macro == pytest.approx(
            (report.sensitivity + report.specificity) / 2, abs=0
        )
        path = str(tmp_path / "eval.json")
        write_eval_json(report, path)
        assert read_eval_json(path) == report


class TestLearningCurve:
    @staticmethod
    def _trainer(X, y, w):
        # Nearest-class-centroid stub: fast and deterministic.
        mu0 = X[y == 0].mean(axis=0)
        mu1 = X[y == 1].mean(axis=0)

        def predict(Z):
            d0 = ((Z - mu0) ** 2).sum(axis=1)
            d1 = ((Z - mu1) ** 2).sum(axis=1)
            return (d1 <= d0).astype(np.uint8)

        return predict

    def test_shape_contract(self, separable_xy):
        X, y = separable_xy
        points = learning_curve(self._trainer, X, y, fractions=(0.25, 0.5, 1.0), k=4, seed=0)
        assert len(points) == 3
        for p in points:
            assert len(p.train_scores) == 4
            assert len(p.val_scores) == 4

    def test_separable_fixture_validation_score(self, separable_xy):
        X, y = separable_xy
        points = learning_curve(self._trainer, X, y, k=5, seed=0)
        assert points[-1].val_mean >= 0.99

    def test_deterministic(self, separable_xy):
        X, y = separable_xy
        a = learning_curve(self._trainer, X, y, k=3, seed=4)
        b = learning_curve(self._trainer, X, y, k=3, seed=4)
        assert a == b

    def test_degenerate_fold_rejected(self):
        X = np.zeros((8, 2))
        y = np.array([0, 0, 0, 0, 0, 0, 1, 1])
        with pytest.raises(DegenerateClassError):
            learning_curve(self._trainer, X, y, k=5, seed=0)


class TestBlandAltman:
    def test_identical_sets(self):
        stats = bland_altman([0.5, 0.7, 0.9], [0.5, 0.7, 0.9])
        assert stats == BlandAltman(0.0, 0.0, 0.0, 3)

    def test_hand_case(self):
        stats = bland_altman([0.6, 0.4], [0.5, 0.5])
        assert stats.mean_diff == pytest.approx(0.0, abs=1e-12)
        assert stats.upper_limit == pytest.approx(0.277186, abs=1e-6)
        assert stats.lower_limit == pytest.approx(-0.277186, abs=1e-6)

    def test_single_pair_rejected(self):
        with pytest.raises(InsufficientPairsError):
            bland_altman([0.5], [0.4])

    def test_antisymmetry(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(2, 20))
            a = rng.uniform(size=n)
            b = rng.uniform(size=n)
            ab = bland_altman(a, b)
            ba = bland_altman(b, a)
            assert ab.mean_diff == pytest.approx(-ba.mean_diff, abs=1e-12)
            assert ab.upper_limit == pytest.approx(-ba.lower_limit, abs=1e-12)
            assert ab.lower_limit == pytest.approx(-ba.upper_limit, abs=1e-12)


class TestDifferential:
    def test_zero_deltas(self):
        scores = {"lr": 0.9, "rf": 0.8}
        diff = differential_report(scores, dict(scores))
        assert all(v == 0.0 for v in diff.deltas.values())

    def test_published_delta_magnitude(self):
        diff = differential_report({"lr": 0.956}, {"lr": 0.90})
        assert diff.deltas["lr"] == pytest.approx(0.056)

    def test_matches_elementwise_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            keys = [f"m{i}" for i in range(int(rng.integers(1, 8)))]
            new = {k: float(rng.uniform()) for k in keys}
            base = {k: float(rng.uniform()) for k in keys}
            diff = differential_report(new, base)
            for k in keys:
                assert diff.deltas[k] == new[k] - base[k]

    def test_key_mismatch(self):
        with pytest.raises(KeyMismatchError):
            differential_report({"lr": 0.9}, {"rf": 0.8})

    def test_family_summary(self):
        new = {"lr/e1": 0.95, "lr/e2": 0.97, "rf/e1": 0.80}
        base = {"lr/e1": 0.90, "lr/e2": 0.90, "rf/e1": 0.90}
        diff = differential_report(new, base)
        assert diff.summary["lr"]["mean"] == pytest.approx(0.06)
        assert diff.summary["lr"]["min"] == pytest.approx(0.05)
        assert diff.summary["lr"]["max"] == pytest.approx(0.07)
        assert diff.summary["rf"]["mean"] == pytest.approx(-0.10)


def test_round_half_up_is_half_up():
    assert round_half_up(0.99895, 4) == 0.9990  # banker's rounding would give 0.9990 too
    assert round_half_up(0.12345, 4) == 0.1235  # ties away from zero, not to even
    assert round_half_up(0.12335, 4) == 0.1234
