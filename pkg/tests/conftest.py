import numpy as np
import pytest

from ledgerlab.ledger import JournalEntry, LedgerDataset, Transaction
from ledgerlab.synth import GeneratorConfig, generate_ledger


def make_txn(jid="J1", line=1, source="SAP", account="4711", dc="D"):
    return Transaction(jid, line, source, account, dc)


def make_entry(jid, lines, label=None, kind=None):
    """lines: list of (source, account, dc) tuples."""
    txns = tuple(
        Transaction(jid, i + 1, s, a, d) for i, (s, a, d) in enumerate(lines)
    )
    return JournalEntry(jid, txns, label, kind)


@pytest.fixture(scope="session")
def small_config():
    return GeneratorConfig(
        n_entries=400,
        n_anomalous_entries=24,
        n_sources=3,
        n_accounts=40,
        seed=13,
    )


@pytest.fixture(scope="session")
def small_dataset(small_config) -> LedgerDataset:
    return generate_ledger(small_config)


@pytest.fixture(scope="session")
def separable_xy():
    """Two well-separated Gaussian blobs: (X, y) with y in {0, 1}."""
    rng = np.random.default_rng(99)
    n = 120
    X0 = rng.normal(-2.0, 0.5, size=(n, 6))
    X1 = rng.normal(+2.0, 0.5, size=(n // 3, 6))
    X = np.vstack([X0, X1])
    y = np.concatenate([np.zeros(n, dtype=np.uint8), np.ones(n // 3, dtype=np.uint8)])
    return X, y
