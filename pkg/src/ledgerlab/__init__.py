"""Desk-scale lab for journal-entry anomaly detection.

Encodes categorical ledger data two ways (padded one-hot vs. embedded
text serialization), trains and tunes five classifier families on either,
and compares the encodings with variance-retention, balanced-recall,
learning-curve, and agreement statistics.
"""
from ._kernels import kernel_backend
from .ledger import (
    JournalEntry,
    LedgerDataset,
    Transaction,
    aggregate_entries,
    load_ledger_csv,
    write_ledger_csv,
)
from .synth import GeneratorConfig, generate_ledger

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "kernel_backend",
    "Transaction",
    "JournalEntry",
    "LedgerDataset",
    "aggregate_entries",
    "load_ledger_csv",
    "write_ledger_csv",
    "GeneratorConfig",
    "generate_ledger",
]
