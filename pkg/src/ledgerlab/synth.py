"""Synthetic ledger generator with configurable anomaly injectors.

The real dataset behind the published aggregate statistics is confidential,
so this module fabricates one with matching marginals: ~19,190 entries of
1..4 lines (~32,100 lines total), 105 anomalous entries, 4 source systems,
and an ACCOUNT_DC vocabulary of ~577 values.

Background structure: every source system draws accounts from its own
popularity ranking (a permuted power law over a shared account pool), a
small "scarce" tier of accounts is almost never used by normal entries,
and a reserved block is never used by them at all.  Multi-line normal
entries always mix debit and credit lines, and stay within one source
system.  Anomaly injectors perturb a normal entry against exactly these
regularities.

The eight injector kinds are this package's design; the original study's
eight auditor-defined anomaly types are not public.  The default mix is
weighted toward kinds that leave token-level evidence (unseen or scarce
account values), mirroring the original anomalies' high detectability,
and is a config knob like everything else.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, InapplicableInjectorError
from .ledger import (
    DC_CREDIT,
    DC_DEBIT,
    LABEL_ANOMALOUS,
    LABEL_NORMAL,
    JournalEntry,
    LedgerDataset,
    Transaction,
)

INJECTOR_KINDS = (
    "unseen_account",
    "rare_solo_account",
    "rare_account_pairing",
    "unbalanced_dc_pattern",
    "duplicate_pattern",
    "cross_source_entry",
    "source_account_mismatch",
    "atypical_entry_length",
)

# Weighted toward token-visible kinds; see module docstring.
DEFAULT_INJECTOR_MIX = {
    "unseen_account": 0.26,
    "rare_solo_account": 0.20,
    "rare_account_pairing": 0.20,
    "unbalanced_dc_pattern": 0.14,
    "duplicate_pattern": 0.06,
    "cross_source_entry": 0.05,
    "source_account_mismatch": 0.05,
    "atypical_entry_length": 0.04,
}

# Background shape knobs (fractions of n_accounts, power-law exponent,
# probability mass routed to the scarce tier).
_RESERVED_FRACTION = 0.03
_SCARCE_FRACTION = 0.035
_POPULARITY_EXPONENT = 0.85
_SCARCE_MASS = 0.0012
_SOURCE_DECAY = 0.62


@dataclass(frozen=True)
class GeneratorConfig:
    n_entries: int = 19_190
    txn_count_probs: tuple[float, ...] = (0.55, 0.28, 0.12, 0.05)
    n_sources: int = 4
    n_accounts: int = 289
    n_anomalous_entries: int = 105
    injector_mix: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_INJECTOR_MIX)
    )
    seed: int = 0

    @property
    def max_txn(self) -> int:
        return len(self.txn_count_probs)

    def validate(self) -> None:
        if self.n_entries < 1:
            raise ConfigError("n_entries must be >= 1")
        if abs(sum(self.txn_count_probs) - 1.0) > 1e-12:
            raise ConfigError(
                f"txn_count_probs sums to {sum(self.txn_count_probs)!r}, expected 1"
            )
        if any(p < 0 for p in self.txn_count_probs):
            raise ConfigError("txn_count_probs must be non-negative")
        if not 0 <= self.n_anomalous_entries <= self.n_entries:
            raise ConfigError("n_anomalous_entries must be in [0, n_entries]")
        if self.n_sources < 1:
            raise ConfigError("n_sources must be >= 1")
        if self.n_accounts < 3:
            raise ConfigError("n_accounts must be >= 3")
        unknown = set(self.injector_mix) - set(INJECTOR_KINDS)
        if unknown:
            raise ConfigError(f"unknown injector kinds: {sorted(unknown)}")
        if self.injector_mix:
            weights = list(self.injector_mix.values())
            if any(w < 0 for w in weights) or sum(weights) <= 0:
                raise ConfigError("injector_mix weights must be >= 0 with positive sum")
        elif self.n_anomalous_entries > 0:
            raise ConfigError("injector_mix empty but anomalies requested")


def _account_name(i: int, width: int) -> str:
    return f"A{i:0{width}d}"


class Background:
    """Sampling tables shared by the generator and the length injector."""

    def __init__(self, config: GeneratorConfig):
        cfg = config
        width = len(str(cfg.n_accounts))
        self.sources = tuple(f"SRC{i}" for i in range(1, cfg.n_sources + 1))
        self.accounts = tuple(_account_name(i, width) for i in range(1, cfg.n_accounts + 1))

        n_reserved = max(1, round(cfg.n_accounts * _RESERVED_FRACTION))
        n_scarce = max(1, round(cfg.n_accounts * _SCARCE_FRACTION))
        if n_reserved + n_scarce >= cfg.n_accounts:
            n_reserved = n_scarce = 1
        self.reserved = self.accounts[cfg.n_accounts - n_reserved:]
        self.scarce = self.accounts[
            cfg.n_accounts - n_reserved - n_scarce: cfg.n_accounts - n_reserved
        ]
        self.common = self.accounts[: cfg.n_accounts - n_reserved - n_scarce]

        decay = _SOURCE_DECAY ** np.arange(cfg.n_sources)
        self.source_probs = decay / decay.sum()

        rng = np.random.default_rng([cfg.seed, 11])
        ranks = 1.0 / np.arange(1, len(self.common) + 1) ** _POPULARITY_EXPONENT
        ranks /= ranks.sum()
        common_mass = 1.0 - _SCARCE_MASS
        self.account_probs = np.empty((cfg.n_sources, len(self.common) + len(self.scarce)))
        for s in range(cfg.n_sources):
            perm = rng.permutation(len(self.common))
            self.account_probs[s, : len(self.common)] = ranks[perm] * common_mass
            self.account_probs[s, len(self.common):] = _SCARCE_MASS / max(1, len(self.scarce))
        self.drawable = self.common + self.scarce

        # Per-account debit bias, shared across sources.
        self.debit_bias = rng.uniform(0.25, 0.75, size=len(self.accounts))
        self.debit_bias_by_account = dict(zip(self.accounts, self.debit_bias))

    def sample_line_attrs(
        self, source_idx: int, rng: np.random.Generator
    ) -> tuple[str, str]:
        acct_idx = rng.choice(len(self.drawable), p=self.account_probs[source_idx])
        account = self.drawable[acct_idx]
        dc = DC_DEBIT if rng.random() < self.debit_bias_by_account[account] else DC_CREDIT
        return account, dc


class BackgroundStats:
    """Co-occurrence statistics over the normal entries, used by injectors."""

    def __init__(
        self,
        entries: list[JournalEntry],
        all_sources: tuple[str, ...],
        all_accounts: tuple[str, ...],
        length_probs: tuple[float, ...] | None = None,
    ):
        self.all_sources = all_sources
        self.all_accounts = all_accounts
        self.length_probs = length_probs
        self.account_counts: dict[str, int] = {}
        self.source_counts: dict[str, int] = {}
        self.source_account: dict[tuple[str, str], int] = {}
        self.pair_counts: dict[tuple[str, str], int] = {}
        self.entry_len_counts: dict[int, int] = {}
        for e in entries:
            self.entry_len_counts[len(e)] = self.entry_len_counts.get(len(e), 0) + 1
            accts = [t.account for t in e.transactions]
            for t in e.transactions:
                self.account_counts[t.account] = self.account_counts.get(t.account, 0) + 1
                self.source_counts[t.source] = self.source_counts.get(t.source, 0) + 1
                key = (t.source, t.account)
                self.source_account[key] = self.source_account.get(key, 0) + 1
            for i in range(len(accts)):
                for j in range(i + 1, len(accts)):
                    if accts[i] == accts[j]:
                        continue
                    pair = (min(accts[i], accts[j]), max(accts[i], accts[j]))
                    self.pair_counts[pair] = self.pair_counts.get(pair, 0) + 1

    @classmethod
    def from_dataset(cls, dataset: LedgerDataset) -> "BackgroundStats":
        normals = [e for e in dataset.entries if e.label != LABEL_ANOMALOUS]
        sources = tuple(sorted({t.source for e in normals for t in e.transactions}))
        accounts = tuple(sorted({t.account for e in normals for t in e.transactions}))
        return cls(normals, sources, accounts)

    def observed_accounts(self) -> tuple[str, ...]:
        return tuple(sorted(self.account_counts))

    def rarest_accounts(self, k: int) -> list[str]:
        ranked = sorted(self.account_counts.items(), key=lambda kv: (kv[1], kv[0]))
        return [a for a, _ in ranked[:k]]

    def pair_count(self, a: str, b: str) -> int:
        if a == b:
            return 0
        return self.pair_counts.get((min(a, b), max(a, b)), 0)

    def sample_account_for_source(self, source: str, rng: np.random.Generator) -> str:
        pool = [(a, c) for (s, a), c in sorted(self.source_account.items()) if s == source]
        if not pool:
            pool = sorted(self.account_counts.items())
        accounts = [a for a, _ in pool]
        counts = np.array([c for _, c in pool], dtype=float)
        return accounts[rng.choice(len(accounts), p=counts / counts.sum())]


def _retag(entry: JournalEntry, lines: list[Transaction], kind: str) -> JournalEntry:
    return JournalEntry(entry.entry_id, tuple(lines), LABEL_ANOMALOUS, kind)


def _replace_line(
    lines: list[Transaction], i: int, **attrs
) -> list[Transaction]:
    out = list(lines)
    out[i] = replace(lines[i], **attrs)
    return out


_RARE_POOL = 8  # injectors spread over this many least-seen accounts


def inject_anomaly(
    entry: JournalEntry,
    kind: str,
    stats: BackgroundStats,
    seed: int | list[int],
) -> JournalEntry:
    """Perturb a normal entry into an anomalous one of the given kind.

    Raises InapplicableInjectorError when the entry cannot host the kind
    (for example a one-line entry for the dc-pattern kind); the caller is
    expected to retry with another kind.
    """
    if entry.label == LABEL_ANOMALOUS:
        raise ValueError("inject_anomaly expects a normal entry")
    if kind not in INJECTOR_KINDS:
        raise ValueError(f"unknown injector kind {kind!r}")
    rng = np.random.default_rng(seed)
    lines = list(entry.transactions)
    n = len(lines)

    if kind == "unseen_account":
        observed = set(stats.account_counts)
        fresh = sorted(set(stats.all_accounts) - observed)
        if not fresh:
            fresh = [f"U{rng.integers(100, 1000)}"]
        i = int(rng.integers(n))
        account = fresh[int(rng.integers(len(fresh)))]
        return _retag(entry, _replace_line(lines, i, account=account), kind)

    if kind == "rare_solo_account":
        if n != 1:
            raise InapplicableInjectorError("rare_solo_account needs a 1-line entry")
        pool = [a for a in stats.rarest_accounts(_RARE_POOL) if a != lines[0].account]
        if not pool:
            raise InapplicableInjectorError("no rare account available")
        account = pool[int(rng.integers(len(pool)))]
        return _retag(entry, _replace_line(lines, 0, account=account), kind)

    if kind == "rare_account_pairing":
        if n < 2:
            raise InapplicableInjectorError("rare_account_pairing needs >= 2 lines")
        i = int(rng.integers(n))
        others = [t.account for j, t in enumerate(lines) if j != i]
        current = {t.account for t in lines}
        scored = sorted(
            (
                (sum(stats.pair_count(a, o) for o in others), stats.account_counts.get(a, 0), a)
                for a in stats.observed_accounts()
                if a not in current
            ),
        )
        if not scored:
            raise InapplicableInjectorError("no replacement account available")
        pool = scored[:_RARE_POOL]
        _, _, account = pool[int(rng.integers(len(pool)))]
        return _retag(entry, _replace_line(lines, i, account=account), kind)

    if kind == "unbalanced_dc_pattern":
        if n < 2:
            raise InapplicableInjectorError("unbalanced_dc_pattern needs >= 2 lines")
        if len({t.dc for t in lines}) == 1:
            raise InapplicableInjectorError("entry already single-signed")
        target = lines[0].dc
        out = [replace(t, dc=target) for t in lines]
        return _retag(entry, out, kind)

    if kind == "duplicate_pattern":
        if n < 2:
            raise InapplicableInjectorError("duplicate_pattern needs >= 2 lines")
        src = lines[0]
        candidates = [
            j for j in range(1, n)
            if (lines[j].source, lines[j].account, lines[j].dc)
            != (src.source, src.account, src.dc)
        ]
        if not candidates:
            raise InapplicableInjectorError("all lines already identical")
        j = candidates[int(rng.integers(len(candidates)))]
        out = _replace_line(lines, j, source=src.source, account=src.account, dc=src.dc)
        return _retag(entry, out, kind)

    if kind == "cross_source_entry":
        if n < 2:
            raise InapplicableInjectorError("cross_source_entry needs >= 2 lines")
        others = [s for s in stats.all_sources if s != lines[0].source]
        if not others:
            raise InapplicableInjectorError("only one source exists")
        i = int(rng.integers(1, n))
        source = others[int(rng.integers(len(others)))]
        return _retag(entry, _replace_line(lines, i, source=source), kind)

    if kind == "source_account_mismatch":
        i = int(rng.integers(n))
        account = lines[i].account
        scored = sorted(
            (stats.source_account.get((s, account), 0), stats.source_counts.get(s, 0), s)
            for s in stats.all_sources
            if s != lines[i].source
        )
        if not scored:
            raise InapplicableInjectorError("only one source exists")
        _, _, source = scored[0]
        return _retag(entry, _replace_line(lines, i, source=source), kind)

    # atypical_entry_length
    probs = list(stats.length_probs) if stats.length_probs else _length_probs(stats)
    order = sorted(range(1, len(probs) + 1), key=lambda k: (probs[k - 1], k))
    target = order[0] if order[0] != n else (order[1] if len(order) > 1 else n)
    if target == n:
        raise InapplicableInjectorError("entry already has the rarest length")
    if target < n:
        out = lines[:target]
    else:
        out = list(lines)
        source = lines[0].source
        for line_no in range(n + 1, target + 1):
            account = stats.sample_account_for_source(source, rng)
            dc = DC_DEBIT if rng.random() < 0.5 else DC_CREDIT
            out.append(Transaction(entry.entry_id, line_no, source, account, dc))
    return _retag(entry, out, kind)


def _length_probs(stats: BackgroundStats) -> list[float]:
    max_len = max(stats.entry_len_counts) if stats.entry_len_counts else 1
    total = sum(stats.entry_len_counts.values())
    return [stats.entry_len_counts.get(k, 0) / total for k in range(1, max_len + 1)]


def _fallback_order(mix: dict[str, float]) -> list[str]:
    return sorted(mix, key=lambda k: (-mix[k], k))


def generate_ledger(config: GeneratorConfig) -> LedgerDataset:
    """Generate a labeled synthetic ledger; pure function of the config."""
    config.validate()
    bg = Background(config)
    rng = np.random.default_rng([config.seed, 0])

    id_width = max(5, len(str(config.n_entries)))
    sizes = rng.choice(
        np.arange(1, config.max_txn + 1),
        size=config.n_entries,
        p=np.asarray(config.txn_count_probs),
    )
    source_idxs = rng.choice(config.n_sources, size=config.n_entries, p=bg.source_probs)

    entries: list[JournalEntry] = []
    for i in range(config.n_entries):
        jid = f"J{i + 1:0{id_width}d}"
        k = int(sizes[i])
        s_idx = int(source_idxs[i])
        source = bg.sources[s_idx]
        lines = []
        for line_no in range(1, k + 1):
            account, dc = bg.sample_line_attrs(s_idx, rng)
            lines.append(Transaction(jid, line_no, source, account, dc))
        if k >= 2 and len({t.dc for t in lines}) == 1:
            flip = DC_CREDIT if lines[-1].dc == DC_DEBIT else DC_DEBIT
            lines[-1] = replace(lines[-1], dc=flip)
        entries.append(JournalEntry(jid, tuple(lines), LABEL_NORMAL))

    if config.n_anomalous_entries == 0:
        return LedgerDataset.from_entries(entries)

    anom_rng = np.random.default_rng([config.seed, 1])
    anom_idx = np.sort(
        anom_rng.choice(config.n_entries, size=config.n_anomalous_entries, replace=False)
    )
    mix_kinds = sorted(k for k, w in config.injector_mix.items() if w > 0)
    mix_weights = np.array([config.injector_mix[k] for k in mix_kinds], dtype=float)
    mix_weights /= mix_weights.sum()
    kind_draws = anom_rng.choice(len(mix_kinds), size=config.n_anomalous_entries, p=mix_weights)

    anom_set = set(int(i) for i in anom_idx)
    normals = [e for j, e in enumerate(entries) if j not in anom_set]
    stats = BackgroundStats(normals, bg.sources, bg.accounts, config.txn_count_probs)

    fallback = _fallback_order({k: config.injector_mix[k] for k in mix_kinds})
    for pos, idx in enumerate(anom_idx):
        idx = int(idx)
        first_kind = mix_kinds[int(kind_draws[pos])]
        tried = [first_kind] + [k for k in fallback if k != first_kind]
        injected = None
        for attempt, kind in enumerate(tried):
            try:
                injected = inject_anomaly(
                    entries[idx], kind, stats, [config.seed, 2, idx, attempt]
                )
                break
            except InapplicableInjectorError:
                continue
        if injected is None:  # pragma: no cover - all 8 kinds inapplicable
            raise ConfigError(f"no injector applicable to entry {entries[idx].entry_id}")
        entries[idx] = injected

    return LedgerDataset.from_entries(entries)


def expected_transactions(config: GeneratorConfig) -> float:
    """Expected total line count implied by the size distribution."""
    mean = sum(p * k for k, p in enumerate(config.txn_count_probs, start=1))
    return config.n_entries * mean


def config_from_dict(raw: dict) -> GeneratorConfig:
    """Build a GeneratorConfig from a parsed JSON object."""
    known = {
        "n_entries", "txn_count_probs", "n_sources", "n_accounts",
        "n_anomalous_entries", "injector_mix", "seed",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown generator config keys: {sorted(unknown)}")
    kwargs = dict(raw)
    if "txn_count_probs" in kwargs:
        kwargs["txn_count_probs"] = tuple(float(p) for p in kwargs["txn_count_probs"])
    cfg = GeneratorConfig(**kwargs)
    cfg.validate()
    return cfg


