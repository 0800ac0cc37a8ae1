import numpy as np
import pytest

from ledgerlab.encode import (
    EncodedMatrix,
    OneHotLayout,
    encode_onehot,
    encode_onehot_dataset,
    onehot_feature_count,
    read_emb1,
    serialize_entry,
    standardize_apply,
    standardize_fit,
    write_emb1,
)
from ledgerlab.errors import (
    InsufficientRowsError,
    OversizeEntryError,
    UnknownCategoryError,
)
from ledgerlab.ledger import LABEL_NORMAL

from .conftest import make_entry


class TestFeatureCount:
    def test_published_cardinalities(self):
        # Literal formula; the paper's own text reports 2336 for these
        # inputs, a 12-dim gap that the formula does not produce.
        assert onehot_feature_count(4, 4, 577) == 2324

    def test_degenerate(self):
        assert onehot_feature_count(1, 1, 1) == 2

    def test_hand_arithmetic(self):
        assert onehot_feature_count(3, 2, 5) == 21

    def test_matches_block_enumeration_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            max_txn = int(rng.integers(1, 6))
            n_src = int(rng.integers(1, 31))
            n_acc = int(rng.integers(1, 31))
            # Oracle: enumerate block positions one by one.
            positions = 0
            for _slot in range(max_txn):
                for _v in range(n_src):
                    positions += 1
                for _v in range(n_acc):
                    positions += 1
            assert onehot_feature_count(max_txn, n_src, n_acc) == positions


class TestEncodeOnehot:
    def _layout(self):
        return OneHotLayout(2, ("NAV", "SAP"), ("100_C", "100_D", "200_C"))

    def test_hand_layout(self):
        layout = self._layout()
        entry = make_entry("J1", [("SAP", "100", "D")])
        row = encode_onehot(entry, layout)
        assert row.shape == (10,)
        assert row.sum() == 2
        # Block 0: sources [NAV, SAP] then accounts [100_C, 100_D, 200_C].
        assert row[1] == 1 and row[3] == 1
        assert not row[5:].any()

    def test_empty_vocab_unconstructible(self):
        with pytest.raises(ValueError):
            OneHotLayout(2, (), ("x_D",))

    def test_oov_zero_block(self):
        layout = self._layout()
        entry = make_entry("J1", [("SAP", "999", "D")])
        row = encode_onehot(entry, layout, oov="zero_block")
        assert row.sum() == 1 and row[1] == 1
        with pytest.raises(UnknownCategoryError):
            encode_onehot(entry, layout, oov="error")

    def test_oversize_rejected(self):
        layout = self._layout()
        entry = make_entry("J1", [("SAP", "100", "D")] * 3)
        with pytest.raises(OversizeEntryError):
            encode_onehot(entry, layout)

    def test_length_and_ones_properties(self, small_dataset):
        layout = OneHotLayout.from_dataset(small_dataset, 4)
        for entry in small_dataset.entries[:200]:
            row = encode_onehot(entry, layout)
            assert row.shape[0] == layout.total_dims
            assert row.sum() == 2 * len(entry)

    def test_dataset_matrix(self, small_dataset):
        layout = OneHotLayout.from_dataset(small_dataset, 4)
        m = encode_onehot_dataset(small_dataset, layout)
        assert m.n_rows == len(small_dataset.entries)
        assert m.dim == layout.total_dims
        assert m.row_ids == small_dataset.ids()
        assert m.encoding_id == "onehot"


class TestSerializeEntry:
    def test_single_line(self):
        entry = make_entry("J1", [("SAP", "4711", "D")])
        assert serialize_entry(entry) == "Source: SAP Account_DC: 4711_D"

    def test_two_lines_delimiter(self):
        entry = make_entry("J1", [("SAP", "4711", "D"), ("NAV", "300", "C")])
        assert (
            serialize_entry(entry)
            == "Source: SAP Account_DC: 4711_D, Source: NAV Account_DC: 300_C"
        )

    def test_injectivity_collision_scan(self):
        rng = np.random.default_rng(3)
        seen_entries = set()
        texts = set()
        n = 0
        while n < 10_000:
            k = int(rng.integers(1, 5))
            lines = tuple(
                (f"S{rng.integers(4)}", f"{rng.integers(100, 999)}", "DC"[rng.integers(2)])
                for _ in range(k)
            )
            if lines in seen_entries:
                continue
            seen_entries.add(lines)
            texts.add(serialize_entry(make_entry(f"J{n}", list(lines))))
            n += 1
        assert len(texts) == 10_000


class TestStandardizer:
    def test_hand_case(self):
        train = EncodedMatrix(np.array([[1.0], [3.0]]), ("a", "b"), "t")
        s = standardize_fit(train)
        out = standardize_apply(s, train)
        np.testing.assert_allclose(out.values[:, 0], [-1.0, 1.0])
        test = EncodedMatrix(np.array([[5.0]]), ("c",), "t")
        np.testing.assert_allclose(standardize_apply(s, test).values[0, 0], 3.0)

    def test_constant_column_guard(self):
        train = EncodedMatrix(np.full((3, 2), 7.0), ("a", "b", "c"), "t")
        out = standardize_apply(standardize_fit(train), train)
        assert np.all(out.values == 0.0)

    def test_self_application_statistics(self, small_dataset):
        rng = np.random.default_rng(0)
        m = EncodedMatrix(rng.normal(3.0, 2.0, size=(50, 8)), tuple(f"r{i}" for i in range(50)), "t")
        out = standardize_apply(standardize_fit(m), m)
        assert np.all(np.abs(out.values.mean(axis=0)) < 1e-9)
        assert np.all(np.abs(out.values.var(axis=0) - 1.0) < 1e-6)

    def test_affine_inverse_recovers(self):
        rng = np.random.default_rng(1)
        m = EncodedMatrix(rng.normal(size=(20, 5)), tuple(f"r{i}" for i in range(20)), "t")
        s = standardize_fit(m)
        out = standardize_apply(s, m)
        recovered = out.values * np.maximum(s.stds, s.epsilon) + s.means
        np.testing.assert_allclose(recovered, m.values, atol=1e-9)

    def test_needs_two_rows(self):
        m = EncodedMatrix(np.ones((1, 2)), ("a",), "t")
        with pytest.raises(InsufficientRowsError):
            standardize_fit(m)

    def test_population_std_convention(self):
        m = EncodedMatrix(np.array([[0.0], [2.0]]), ("a", "b"), "t")
        s = standardize_fit(m)
        assert s.stds[0] == pytest.approx(1.0)  # ddof=0: sqrt(((1)^2+(1)^2)/2)


class TestEmb1:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(2)
        m = EncodedMatrix(
            rng.normal(size=(7, 5)) * 1e3,
            tuple(f"J{i}" for i in range(7)),
            "hash3-d5-s0",
            standardized=True,
        )
        path = str(tmp_path / "m.emb1")
        write_emb1(m, path)
        back = read_emb1(path)
        assert back.row_ids == m.row_ids
        assert back.encoding_id == m.encoding_id
        assert back.standardized is True
        np.testing.assert_array_equal(back.values, m.values)  # repr round-trips exactly

    def test_header_first_line_json(self, tmp_path):
        m = EncodedMatrix(np.zeros((1, 2)), ("J1",), "onehot")
        path = str(tmp_path / "m.emb1")
        write_emb1(m, path)
        import json

        header = json.loads(open(path).readline())
        assert header == {"dim": 2, "encoding_id": "onehot", "count": 1, "standardized": False}
