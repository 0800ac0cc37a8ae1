"""The two competing feature constructions and train-fit standardization.

Padded one-hot: each entry becomes ``max_txn`` fixed-width blocks, one per
transaction slot; a used slot holds two ones (its source and its
ACCOUNT_DC), trailing unused slots stay all-zero.  The total width is
``max_txn * (|vocab_source| + |vocab_account_dc|)``.

Text route: an entry serializes to
``"Source: <s> Account_DC: <a>"`` per line, joined by ", ", which the
embedding backends consume.  Serialization is injective on validated
datasets (the reserved-substring checks in the ledger module guarantee it).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    InsufficientRowsError,
    OversizeEntryError,
    SchemaError,
    UnknownCategoryError,
)
from .ledger import JournalEntry, LedgerDataset

DEFAULT_EPSILON = 1e-12

EMB1_MAGIC_KEYS = ("dim", "encoding_id", "count", "standardized")


def onehot_feature_count(max_txn: int, n_source: int, n_account_dc: int) -> int:
    """Total padded one-hot width for the given vocabulary sizes."""
    if max_txn < 1 or n_source < 1 or n_account_dc < 1:
        raise ValueError("all arguments must be >= 1")
    return max_txn * (n_source + n_account_dc)


@dataclass(frozen=True)
class OneHotLayout:
    max_txn: int
    vocab_source: tuple[str, ...]
    vocab_account_dc: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.max_txn < 1:
            raise ValueError("max_txn must be >= 1")
        if not self.vocab_source or not self.vocab_account_dc:
            raise ValueError("vocabularies must be non-empty")

    @classmethod
    def from_dataset(cls, dataset: LedgerDataset, max_txn: int | None = None) -> "OneHotLayout":
        return cls(
            max_txn if max_txn is not None else dataset.max_entry_len(),
            dataset.vocab_source,
            dataset.vocab_account_dc,
        )

    @property
    def block_width(self) -> int:
        return len(self.vocab_source) + len(self.vocab_account_dc)

    @property
    def total_dims(self) -> int:
        return onehot_feature_count(
            self.max_txn, len(self.vocab_source), len(self.vocab_account_dc)
        )


@dataclass(frozen=True)
class EncodedMatrix:
    """Row-per-entry feature matrix with its encoding identity."""

    values: np.ndarray
    row_ids: tuple[str, ...]
    encoding_id: str
    standardized: bool = False

    def __post_init__(self) -> None:
        if self.values.ndim != 2:
            raise ValueError("values must be 2-D")
        if len(self.row_ids) != self.values.shape[0]:
            raise ValueError("row_ids length must equal row count")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def take(self, indices) -> "EncodedMatrix":
        idx = np.asarray(indices, dtype=int)
        return EncodedMatrix(
            self.values[idx],
            tuple(self.row_ids[i] for i in idx),
            self.encoding_id,
            self.standardized,
        )


def encode_onehot(
    entry: JournalEntry, layout: OneHotLayout, oov: str = "zero_block"
) -> np.ndarray:
    """Encode one entry as a padded one-hot row vector.

    oov="error" raises on categories outside the layout's vocabularies;
    oov="zero_block" leaves the corresponding sub-block all-zero, so
    evaluation on external data never aborts.
    """
    if oov not in ("error", "zero_block"):
        raise ValueError(f"oov must be 'error' or 'zero_block', got {oov!r}")
    if len(entry.transactions) > layout.max_txn:
        raise OversizeEntryError(
            f"entry {entry.entry_id} has {len(entry.transactions)} transactions, "
            f"layout allows {layout.max_txn}"
        )
    src_index = {v: i for i, v in enumerate(layout.vocab_source)}
    acc_index = {v: i for i, v in enumerate(layout.vocab_account_dc)}
    width = layout.block_width
    row = np.zeros(layout.total_dims)
    for slot, t in enumerate(entry.transactions):
        base = slot * width
        i = src_index.get(t.source)
        if i is None and oov == "error":
            raise UnknownCategoryError(f"source {t.source!r} not in vocabulary")
        if i is not None:
            row[base + i] = 1.0
        j = acc_index.get(t.account_dc)
        if j is None and oov == "error":
            raise UnknownCategoryError(f"ACCOUNT_DC {t.account_dc!r} not in vocabulary")
        if j is not None:
            row[base + len(layout.vocab_source) + j] = 1.0
    return row


def encode_onehot_dataset(
    dataset: LedgerDataset, layout: OneHotLayout, oov: str = "zero_block"
) -> EncodedMatrix:
    rows = np.array([encode_onehot(e, layout, oov) for e in dataset.entries])
    if rows.size == 0:
        rows = rows.reshape(0, layout.total_dims)
    return EncodedMatrix(rows, dataset.ids(), "onehot")


def serialize_entry(entry: JournalEntry) -> str:
    """Render an entry as the delimiter-joined text the embedders consume."""
    return ", ".join(
        f"Source: {t.source} Account_DC: {t.account_dc}" for t in entry.transactions
    )


@dataclass(frozen=True)
class Standardizer:
    """Per-dimension affine map to zero mean / unit variance, train-fitted."""

    means: np.ndarray
    stds: np.ndarray
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self) -> None:
        if self.means.shape != self.stds.shape or self.means.ndim != 1:
            raise ValueError("means/stds must be equal-length vectors")
        if np.any(self.stds < 0):
            raise ValueError("stds must be non-negative")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


def standardize_fit(train: EncodedMatrix, epsilon: float = DEFAULT_EPSILON) -> Standardizer:
    """Fit means and population standard deviations on training rows only."""
    if train.n_rows < 2:
        raise InsufficientRowsError("standardize_fit needs at least 2 rows")
    means = train.values.mean(axis=0)
    stds = train.values.std(axis=0)  # population (1/n) convention
    return Standardizer(means, stds, epsilon)


def standardize_apply(s: Standardizer, m: EncodedMatrix) -> EncodedMatrix:
    if m.dim != s.means.shape[0]:
        raise ValueError(f"matrix dim {m.dim} != standardizer dim {s.means.shape[0]}")
    denom = np.maximum(s.stds, s.epsilon)
    values = (m.values - s.means) / denom
    return replace(m, values=values, standardized=True)


# --- EMB1 persistence -------------------------------------------------------
#
# Line 1: JSON header {"dim": d, "encoding_id": s, "count": n,
# "standardized": bool}; then n lines `journal_id,v1,...,vd`.  Floats are
# written with repr(), which round-trips exactly.

def write_emb1(matrix: EncodedMatrix, path: str) -> None:
    header = {
        "dim": matrix.dim,
        "encoding_id": matrix.encoding_id,
        "count": matrix.n_rows,
        "standardized": matrix.standardized,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for rid, row in zip(matrix.row_ids, matrix.values):
            fh.write(rid + "," + ",".join(repr(float(v)) for v in row) + "\n")


def read_emb1(path: str) -> EncodedMatrix:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        try:
            header = json.loads(first)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: bad EMB1 header: {exc}") from None
        if not isinstance(header, dict) or set(header) != set(EMB1_MAGIC_KEYS):
            raise SchemaError(f"{path}: EMB1 header must have keys {EMB1_MAGIC_KEYS}")
        dim, count = header["dim"], header["count"]
        ids: list[str] = []
        rows = np.empty((count, dim))
        for i in range(count):
            line = fh.readline()
            if not line:
                raise SchemaError(f"{path}: expected {count} rows, found {i}")
            rid, _, rest = line.rstrip("\n").partition(",")
            values = np.array(rest.split(","), dtype=np.float64) if rest else np.empty(0)
            if values.shape[0] != dim:
                raise SchemaError(f"{path}: row {i} has {values.shape[0]} values, expected {dim}")
            ids.append(rid)
            rows[i] = values
        if fh.readline():
            raise SchemaError(f"{path}: trailing data after {count} rows")
    return EncodedMatrix(rows, tuple(ids), header["encoding_id"], header["standardized"])
