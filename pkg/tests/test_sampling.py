import numpy as np
import pytest

from ledgerlab.errors import DegenerateClassError
from ledgerlab.sampling import (
    class_weights,
    custom_weights,
    read_split_json,
    split_indices_for_ids,
    stratified_split,
    write_split_json,
)


class TestStratifiedSplit:
    def test_ninety_ten(self):
        labels = ["n"] * 90 + ["a"] * 10
        split = stratified_split(labels, 0.2, seed=1)
        test_labels = [labels[i] for i in split.test_indices]
        assert test_labels.count("n") == 18
        assert test_labels.count("a") == 2

    def test_published_marginals(self):
        labels = ["normal"] * 19_085 + ["anomalous"] * 105
        split = stratified_split(labels, 0.2, seed=3)
        test_labels = [labels[i] for i in split.test_indices]
        assert test_labels.count("normal") == 3817
        assert test_labels.count("anomalous") == 21

    def test_deterministic(self):
        rng = np.random.default_rng(0)
        labels = list(rng.choice(["a", "b"], size=200))
        s1 = stratified_split(labels, 0.25, seed=9)
        s2 = stratified_split(labels, 0.25, seed=9)
        assert s1 == s2
        s3 = stratified_split(labels, 0.25, seed=10)
        assert s1.test_indices != s3.test_indices

    def test_partition_properties(self):
        rng = np.random.default_rng(1)
        labels = list(rng.choice(["x", "y", "z"], size=150))
        split = stratified_split(labels, 0.3, seed=2)
        train, test = set(split.train_indices), set(split.test_indices)
        assert train & test == set()
        assert train | test == set(range(150))

    def test_renaming_invariance(self):
        rng = np.random.default_rng(2)
        labels = list(rng.choice(["cat", "dog"], size=80))
        renamed = [{"cat": "K9", "dog": "F3"}[l] for l in labels]
        a = stratified_split(labels, 0.2, seed=5)
        b = stratified_split(renamed, 0.2, seed=5)
        assert a == b

    def test_per_class_counts_within_one(self):
        rng = np.random.default_rng(3)
        for trial in range(1000):
            n = int(rng.integers(6, 120))
            labels = list(rng.choice(["p", "q"], size=n))
            if min(labels.count("p"), labels.count("q")) < 2:
                continue
            frac = float(rng.uniform(0.1, 0.5))
            split = stratified_split(labels, frac, seed=trial)
            test_labels = [labels[i] for i in split.test_indices]
            for cls in ("p", "q"):
                expected = frac * labels.count(cls)
                assert abs(test_labels.count(cls) - expected) <= 1

    def test_tiny_class_keeps_member_on_both_sides(self):
        labels = ["n"] * 50 + ["a"] * 2
        split = stratified_split(labels, 0.2, seed=0)
        test_labels = [labels[i] for i in split.test_indices]
        assert test_labels.count("a") == 1

    def test_degenerate_class_rejected(self):
        with pytest.raises(DegenerateClassError):
            stratified_split(["n"] * 10 + ["a"], 0.2, seed=0)


class TestClassWeights:
    def test_ninety_ten_balanced(self):
        labels = ["n"] * 90 + ["a"] * 10
        cw = class_weights(labels, "balanced")
        assert cw.weight_per_class["n"] == pytest.approx(0.5556, abs=5e-5)
        assert cw.weight_per_class["a"] == pytest.approx(5.0)

    def test_equal_classes_unit_weights(self):
        cw = class_weights(["a"] * 30 + ["b"] * 30, "balanced")
        assert cw.weight_per_class == {"a": 1.0, "b": 1.0}

    def test_published_counts_identity(self):
        labels = ["normal"] * 19_085 + ["anomalous"] * 105
        cw = class_weights(labels, "balanced")
        assert cw.weight_per_class["normal"] == pytest.approx(0.50275, abs=5e-6)
        assert cw.weight_per_class["anomalous"] == pytest.approx(91.38, abs=5e-3)
        total = sum(cw.weight_per_class[l] for l in labels)
        assert total == pytest.approx(len(labels), abs=1e-6)

    def test_weighted_total_identity_random(self):
        rng = np.random.default_rng(4)
        for trial in range(50):
            labels = list(rng.choice(["a", "b", "c"], size=int(rng.integers(10, 200))))
            cw = class_weights(labels, "balanced")
            total = sum(cw.weight_per_class[l] for l in labels)
            assert total == pytest.approx(len(labels), abs=1e-6)

    def test_uniform(self):
        cw = class_weights(["a", "b", "a"], "uniform")
        assert cw.weight_per_class == {"a": 1.0, "b": 1.0}

    def test_custom(self):
        cw = custom_weights({"a": 2.0, "b": 0.25})
        assert cw.scheme == "custom"
        with pytest.raises(ValueError):
            custom_weights({"a": 0.0})

    def test_per_sample(self):
        cw = class_weights(["n", "n", "a", "n"], "balanced")
        sw = cw.per_sample(["n", "a"])
        np.testing.assert_allclose(sw, [4 / 6, 4 / 2])


class TestSplitJson:
    def test_round_trip(self, tmp_path):
        labels = ["n"] * 20 + ["a"] * 5
        ids = [f"J{i:03d}" for i in range(25)]
        split = stratified_split(labels, 0.2, seed=11)
        path = str(tmp_path / "split.json")
        write_split_json(split, ids, path)
        payload = read_split_json(path)
        assert payload["seed"] == 11
        assert payload["test_fraction"] == 0.2
        train, test = split_indices_for_ids(payload, ids)
        np.testing.assert_array_equal(np.sort(train), split.train_indices)
        np.testing.assert_array_equal(np.sort(test), split.test_indices)

    def test_unknown_id_rejected(self, tmp_path):
        payload = {"seed": 0, "test_fraction": 0.2, "train_ids": ["X"], "test_ids": []}
        with pytest.raises(ValueError, match="unknown ids"):
            split_indices_for_ids(payload, ["J1"])
