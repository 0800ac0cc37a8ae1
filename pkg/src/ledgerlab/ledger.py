"""Domain types for transactions and journal entries, grouping, and CSV I/O.

A journal entry groups 1..max_txn transaction lines sharing a journal id.
Each line carries two categorical attributes used downstream: the source
system code and the account number merged with its debit/credit flag into
a single ACCOUNT_DC value (``account + "_" + dc``).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .errors import (
    AlphabetError,
    DcDomainError,
    DuplicateLineError,
    OversizeEntryError,
    SchemaError,
    UnlabeledEntryError,
)

DC_DEBIT = "D"
DC_CREDIT = "C"
LABEL_NORMAL = "normal"
LABEL_ANOMALOUS = "anomalous"

DEFAULT_MAX_TXN = 4

# Substrings that must never occur in source/account values: they are the
# markers and delimiter of the text serialization, whose injectivity the
# whole embedding route depends on.  The underscore joins account and dc.
_FORBIDDEN = (", ", "Source: ", "Account_DC: ")

TRANSACTIONS_HEADER = ("journal_id", "line_no", "source", "account", "dc")
LABELS_HEADER = ("journal_id", "label", "anomaly_kind")


def _check_value(name: str, value: str, *, allow_underscore: bool) -> None:
    if not value:
        raise AlphabetError(f"{name} must be non-empty")
    for bad in _FORBIDDEN:
        if bad in value:
            raise AlphabetError(f"{name} {value!r} contains reserved substring {bad!r}")
    if not allow_underscore and "_" in value:
        raise AlphabetError(f"{name} {value!r} contains '_', reserved for ACCOUNT_DC")


@dataclass(frozen=True)
class Transaction:
    """One ledger line: (journal_id, line_no) is unique within a dataset."""

    journal_id: str
    line_no: int
    source: str
    account: str
    dc: str

    def __post_init__(self) -> None:
        if not self.journal_id:
            raise SchemaError("journal_id must be non-empty")
        if self.line_no < 1:
            raise SchemaError(f"line_no must be >= 1, got {self.line_no}")
        if self.dc not in (DC_DEBIT, DC_CREDIT):
            raise DcDomainError(f"dc must be 'D' or 'C', got {self.dc!r}")
        _check_value("source", self.source, allow_underscore=True)
        _check_value("account", self.account, allow_underscore=False)

    @property
    def account_dc(self) -> str:
        return f"{self.account}_{self.dc}"


@dataclass(frozen=True)
class JournalEntry:
    """A journal entry: ordered transaction lines plus an optional label."""

    entry_id: str
    transactions: tuple[Transaction, ...]
    label: str | None = None
    anomaly_kind: str | None = None

    def __post_init__(self) -> None:
        if not self.transactions:
            raise SchemaError(f"entry {self.entry_id}: no transactions")
        line_nos = [t.line_no for t in self.transactions]
        if line_nos != sorted(line_nos) or len(set(line_nos)) != len(line_nos):
            raise SchemaError(f"entry {self.entry_id}: line_no not strictly increasing")
        for t in self.transactions:
            if t.journal_id != self.entry_id:
                raise SchemaError(
                    f"entry {self.entry_id}: transaction belongs to {t.journal_id}"
                )
        if self.label not in (None, LABEL_NORMAL, LABEL_ANOMALOUS):
            raise SchemaError(f"entry {self.entry_id}: bad label {self.label!r}")
        if self.label != LABEL_ANOMALOUS and self.anomaly_kind:
            raise SchemaError(
                f"entry {self.entry_id}: anomaly_kind set on a non-anomalous entry"
            )

    def __len__(self) -> int:
        return len(self.transactions)

    @property
    def is_anomalous(self) -> bool:
        return self.label == LABEL_ANOMALOUS


@dataclass(frozen=True)
class LedgerDataset:
    """Journal entries plus the vocabularies observed over them.

    Vocabularies are exactly the distinct values present, sorted
    lexicographically, so two structurally equal datasets compare equal.
    """

    entries: tuple[JournalEntry, ...]
    vocab_source: tuple[str, ...] = field(default=())
    vocab_account_dc: tuple[str, ...] = field(default=())

    @classmethod
    def from_entries(cls, entries: Iterable[JournalEntry]) -> "LedgerDataset":
        entries = tuple(entries)
        sources: set[str] = set()
        account_dcs: set[str] = set()
        for e in entries:
            for t in e.transactions:
                sources.add(t.source)
                account_dcs.add(t.account_dc)
        return cls(entries, tuple(sorted(sources)), tuple(sorted(account_dcs)))

    def ids(self) -> tuple[str, ...]:
        return tuple(e.entry_id for e in self.entries)

    def labels(self) -> tuple[str, ...]:
        missing = [e.entry_id for e in self.entries if e.label is None]
        if missing:
            raise UnlabeledEntryError(f"entries without labels: {missing[:5]}")
        return tuple(e.label for e in self.entries)  # type: ignore[misc]

    def n_transactions(self) -> int:
        return sum(len(e) for e in self.entries)

    def max_entry_len(self) -> int:
        return max(len(e) for e in self.entries)


def aggregate_entries(
    transactions: Sequence[Transaction],
    max_txn: int = DEFAULT_MAX_TXN,
    policy: str = "error",
) -> LedgerDataset:
    """Group lines into journal entries, one per distinct journal_id.

    Entries longer than ``max_txn`` are dropped or raise, per ``policy``
    ("drop" | "error").  Output is independent of the input row order:
    entries are sorted by journal id and lines by line_no.
    """
    if policy not in ("error", "drop"):
        raise ValueError(f"policy must be 'error' or 'drop', got {policy!r}")
    if max_txn < 1:
        raise ValueError("max_txn must be >= 1")

    groups: dict[str, list[Transaction]] = {}
    seen: set[tuple[str, int]] = set()
    for t in transactions:
        key = (t.journal_id, t.line_no)
        if key in seen:
            raise DuplicateLineError(f"duplicate (journal_id, line_no) = {key}")
        seen.add(key)
        groups.setdefault(t.journal_id, []).append(t)

    entries: list[JournalEntry] = []
    for jid in sorted(groups):
        lines = sorted(groups[jid], key=lambda t: t.line_no)
        if len(lines) > max_txn:
            if policy == "error":
                raise OversizeEntryError(
                    f"entry {jid} has {len(lines)} transactions (max {max_txn})"
                )
            continue
        entries.append(JournalEntry(jid, tuple(lines)))
    return LedgerDataset.from_entries(entries)


def attach_labels(
    dataset: LedgerDataset, labels: Mapping[str, tuple[str, str | None]]
) -> LedgerDataset:
    """Return a dataset whose entries carry the given (label, kind) pairs."""
    entries = []
    for e in dataset.entries:
        if e.entry_id not in labels:
            raise UnlabeledEntryError(f"no label for journal_id {e.entry_id!r}")
        label, kind = labels[e.entry_id]
        entries.append(replace(e, label=label, anomaly_kind=kind or None))
    return LedgerDataset(tuple(entries), dataset.vocab_source, dataset.vocab_account_dc)


def _check_header(found: Sequence[str] | None, expected: tuple[str, ...], path: str) -> None:
    if found is None or tuple(found) != expected:
        raise SchemaError(
            f"{path}: expected header {','.join(expected)}, got "
            f"{','.join(found) if found else '<empty file>'}"
        )


def read_labels_csv(labels_path: str) -> dict[str, tuple[str, str | None]]:
    """Parse labels.csv into {journal_id: (label, anomaly_kind)}."""
    labels: dict[str, tuple[str, str | None]] = {}
    with open(labels_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, LABELS_HEADER, labels_path)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(LABELS_HEADER):
                raise SchemaError(f"{labels_path}:{lineno}: expected 3 fields")
            jid, label, kind = row
            if label not in (LABEL_NORMAL, LABEL_ANOMALOUS):
                raise SchemaError(f"{labels_path}:{lineno}: bad label {label!r}")
            if label == LABEL_NORMAL and kind:
                raise SchemaError(
                    f"{labels_path}:{lineno}: anomaly_kind set on a normal entry"
                )
            if jid in labels:
                raise SchemaError(f"{labels_path}:{lineno}: duplicate journal_id {jid!r}")
            labels[jid] = (label, kind or None)
    return labels


def load_ledger_csv(
    transactions_path: str,
    labels_path: str,
    max_txn: int = DEFAULT_MAX_TXN,
) -> LedgerDataset:
    """Load and validate the two-file CSV layout, joining labels by id."""
    rows: list[Transaction] = []
    with open(transactions_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, TRANSACTIONS_HEADER, transactions_path)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(TRANSACTIONS_HEADER):
                raise SchemaError(f"{transactions_path}:{lineno}: expected 5 fields")
            jid, line_no_s, source, account, dc = row
            try:
                line_no = int(line_no_s)
            except ValueError:
                raise SchemaError(
                    f"{transactions_path}:{lineno}: line_no {line_no_s!r} not an integer"
                ) from None
            try:
                rows.append(Transaction(jid, line_no, source, account, dc))
            except DcDomainError as exc:
                raise DcDomainError(f"{transactions_path}:{lineno}: {exc}") from None

    labels = read_labels_csv(labels_path)
    dataset = aggregate_entries(rows, max_txn=max_txn, policy="error")
    unknown = set(labels) - {e.entry_id for e in dataset.entries}
    if unknown:
        raise SchemaError(f"{labels_path}: labels for unknown journal_ids {sorted(unknown)[:5]}")
    return attach_labels(dataset, labels)


def write_ledger_csv(
    dataset: LedgerDataset, transactions_path: str, labels_path: str
) -> None:
    """Write the dataset in the two-file CSV layout (deterministic bytes)."""
    with open(transactions_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRANSACTIONS_HEADER)
        for e in dataset.entries:
            for t in e.transactions:
                writer.writerow([t.journal_id, t.line_no, t.source, t.account, t.dc])
    with open(labels_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LABELS_HEADER)
        for e in dataset.entries:
            if e.label is None:
                raise UnlabeledEntryError(f"entry {e.entry_id} has no label to write")
            writer.writerow([e.entry_id, e.label, e.anomaly_kind or ""])
