"""Tree-structured Parzen Estimator search over per-family spaces.

Each suggestion splits the scored trials into a "good" top quantile and
the "bad" rest, fits per-parameter kernel-density models l(x) over good
and g(x) over bad (Gaussian kernels on the transformed scale; smoothed
frequency counts for categoricals), draws candidates from l,
and returns the candidate maximizing l(x)/g(x).  Before n_startup trials
exist, suggestions are uniform draws from the space.
"""
from __future__ import annotations

import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import EmptySpaceError

FAILURE_SCORE = -sys.float_info.max

_BANDWIDTH_FLOOR_FRACTION = 0.01


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"Uniform needs lo < hi, got ({self.lo}, {self.hi})")


@dataclass(frozen=True)
class LogUniform:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not 0 < self.lo < self.hi:
            raise ValueError(f"LogUniform needs 0 < lo < hi, got ({self.lo}, {self.hi})")


@dataclass(frozen=True)
class IntUniform:
    lo: int
    hi: int

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"IntUniform needs lo < hi, got ({self.lo}, {self.hi})")


@dataclass(frozen=True)
class Choice:
    values: tuple

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("Choice needs at least one value")


Domain = Uniform | LogUniform | IntUniform | Choice


@dataclass(frozen=True)
class SearchSpace:
    parameters: dict[str, Domain]

    def __post_init__(self) -> None:
        if not self.parameters:
            raise EmptySpaceError("search space declares no parameters")


@dataclass(frozen=True)
class Trial:
    index: int
    config: dict
    score: float
    seed: int = 0


@dataclass
class TrialHistory:
    trials: list[Trial] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.trials)

    def append(self, trial: Trial) -> None:
        if trial.index != len(self.trials):
            raise ValueError(f"trial index {trial.index} breaks the dense sequence")
        if not math.isfinite(trial.score):
            raise ValueError("trial scores must be finite")
        self.trials.append(trial)

    def best(self) -> Trial:
        if not self.trials:
            raise ValueError("history is empty")
        return max(self.trials, key=lambda t: (t.score, -t.index))


@dataclass(frozen=True)
class TpeParams:
    gamma: float = 0.25
    n_startup: int = 20
    n_candidates: int = 24

    def __post_init__(self) -> None:
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must be in (0, 1)")
        if self.n_startup < 1 or self.n_candidates < 1:
            raise ValueError("n_startup and n_candidates must be >= 1")


DEFAULT_TPE_PARAMS = TpeParams()


def _sample_uniform(domain: Domain, rng: np.random.Generator):
    if isinstance(domain, Uniform):
        return float(rng.uniform(domain.lo, domain.hi))
    if isinstance(domain, LogUniform):
        return float(np.exp(rng.uniform(np.log(domain.lo), np.log(domain.hi))))
    if isinstance(domain, IntUniform):
        return int(rng.integers(domain.lo, domain.hi + 1))
    return domain.values[int(rng.integers(len(domain.values)))]


def _to_z(domain: Domain, x) -> float:
    if isinstance(domain, LogUniform):
        return float(np.log(x))
    return float(x)


def _z_bounds(domain: Domain) -> tuple[float, float]:
    if isinstance(domain, LogUniform):
        return float(np.log(domain.lo)), float(np.log(domain.hi))
    return float(domain.lo), float(domain.hi)


def _from_z(domain: Domain, z: float):
    if isinstance(domain, LogUniform):
        return float(min(max(np.exp(z), domain.lo), domain.hi))
    if isinstance(domain, IntUniform):
        return int(min(max(int(round(z)), domain.lo), domain.hi))
    return float(min(max(z, domain.lo), domain.hi))


def _bandwidths(centers: np.ndarray, zlo: float, zhi: float) -> np.ndarray:
    span = zhi - zlo
    floor = _BANDWIDTH_FLOOR_FRACTION * span
    k = centers.shape[0]
    if k == 1:
        return np.array([max(floor, span / 4.0)])
    order = np.argsort(centers)
    sorted_c = centers[order]
    gaps_left = np.empty(k)
    gaps_right = np.empty(k)
    gaps_left[1:] = np.diff(sorted_c)
    gaps_left[0] = sorted_c[0] - zlo
    gaps_right[:-1] = np.diff(sorted_c)
    gaps_right[-1] = zhi - sorted_c[-1]
    bw_sorted = np.maximum(np.maximum(gaps_left, gaps_right), floor)
    bw_sorted = np.minimum(bw_sorted, span)
    bw = np.empty(k)
    bw[order] = bw_sorted
    return bw


def _log_parzen(points: np.ndarray, centers: np.ndarray, bw: np.ndarray) -> np.ndarray:
    # (n_points, k) component log-densities, then logsumexp - log k.
    z = (points[:, None] - centers[None, :]) / bw[None, :]
    comp = -0.5 * z * z - np.log(bw[None, :]) - 0.5 * np.log(2.0 * np.pi)
    m = comp.max(axis=1, keepdims=True)
    return (m[:, 0] + np.log(np.exp(comp - m).sum(axis=1))) - np.log(centers.shape[0])


def _categorical_logp(values: Sequence, observed: Sequence) -> dict:
    counts = {v: 1 for v in values}  # add-one prior
    for obs in observed:
        counts[obs] += 1
    total = sum(counts.values())
    return {v: np.log(c / total) for v, c in counts.items()}


def tpe_suggest(
    history: TrialHistory,
    space: SearchSpace,
    params: TpeParams = DEFAULT_TPE_PARAMS,
    seed: int | Sequence[int] = 0,
) -> dict:
    """Propose one configuration; a pure function of (history, seed)."""
    rng = np.random.default_rng(seed)
    names = sorted(space.parameters)
    if len(history) < params.n_startup:
        return {name: _sample_uniform(space.parameters[name], rng) for name in names}

    ranked = sorted(history.trials, key=lambda t: (-t.score, t.index))
    n_good = math.ceil(params.gamma * len(ranked))
    n_good = min(max(n_good, 1), len(ranked) - 1)
    good = ranked[:n_good]
    bad = ranked[n_good:]

    n_cand = params.n_candidates
    total_logratio = np.zeros(n_cand)
    candidate: dict[str, list] = {}
    for name in names:
        domain = space.parameters[name]
        if isinstance(domain, Choice):
            logp_good = _categorical_logp(domain.values, [t.config[name] for t in good])
            logp_bad = _categorical_logp(domain.values, [t.config[name] for t in bad])
            probs = np.exp(np.array([logp_good[v] for v in domain.values]))
            probs /= probs.sum()
            draws = rng.choice(len(domain.values), size=n_cand, p=probs)
            values = [domain.values[i] for i in draws]
            total_logratio += np.array(
                [logp_good[v] - logp_bad[v] for v in values]
            )
            candidate[name] = values
            continue

        zlo, zhi = _z_bounds(domain)
        c_good = np.array([_to_z(domain, t.config[name]) for t in good])
        c_bad = np.array([_to_z(domain, t.config[name]) for t in bad])
        bw_good = _bandwidths(c_good, zlo, zhi)
        bw_bad = _bandwidths(c_bad, zlo, zhi)
        comp = rng.integers(c_good.shape[0], size=n_cand)
        z = c_good[comp] + bw_good[comp] * rng.standard_normal(n_cand)
        z = np.clip(z, zlo, zhi)
        values = [_from_z(domain, float(v)) for v in z]
        z_eval = np.array([_to_z(domain, v) for v in values])
        total_logratio += _log_parzen(z_eval, c_good, bw_good) - _log_parzen(
            z_eval, c_bad, bw_bad
        )
        candidate[name] = values

    best = int(np.argmax(total_logratio))
    return {name: candidate[name][best] for name in names}


@dataclass
class OptimizeResult:
    best_config: dict
    best_score: float
    history: TrialHistory


def optimize(
    objective: Callable[[dict], float],
    space: SearchSpace,
    n_iter: int = 100,
    seed: int = 0,
    params: TpeParams = DEFAULT_TPE_PARAMS,
    history: TrialHistory | None = None,
    on_trial: Callable[[Trial, float], None] | None = None,
) -> OptimizeResult:
    """Run TPE until the history holds n_iter trials (resume-aware).

    Objective exceptions score FAILURE_SCORE and consume budget.  on_trial
    receives each new trial and its duration in milliseconds.
    """
    history = history if history is not None else TrialHistory()
    while len(history) < n_iter:
        i = len(history)
        config = tpe_suggest(history, space, params, seed=[seed, i])
        start = time.perf_counter()
        try:
            score = float(objective(config))
            if not math.isfinite(score):
                score = FAILURE_SCORE
        except Exception:
            score = FAILURE_SCORE
        duration_ms = (time.perf_counter() - start) * 1000.0
        trial = Trial(i, config, score, seed)
        history.append(trial)
        if on_trial is not None:
            on_trial(trial, duration_ms)
    best = history.best()
    return OptimizeResult(best.config, best.score, history)


# --- per-family search spaces -------------------------------------------------

def default_space(family: str) -> SearchSpace:
    if family == "lr":
        return SearchSpace({"C": LogUniform(1e-4, 1e2)})
    if family == "svm":
        return SearchSpace({"C": LogUniform(1e-4, 1e2)})
    if family == "rf":
        return SearchSpace(
            {"n_trees": IntUniform(50, 500), "max_depth": IntUniform(2, 20)}
        )
    if family == "gbm":
        return SearchSpace(
            {
                "learning_rate": LogUniform(1e-3, 0.3),
                "n_rounds": IntUniform(50, 500),
                "max_depth": IntUniform(2, 8),
            }
        )
    if family in ("ann", "dnn1", "dnn2"):
        return SearchSpace(
            {
                "learning_rate": LogUniform(1e-4, 1e-2),
                "batch_size": Choice((16, 32, 64)),
            }
        )
    raise ValueError(f"no default search space for family {family!r}")


# --- trials.jsonl persistence ---------------------------------------------------

def write_trial_line(fh, trial: Trial, duration_ms: float) -> None:
    fh.write(
        json.dumps(
            {
                "index": trial.index,
                "config": trial.config,
                "score": trial.score,
                "duration_ms": duration_ms,
            },
            sort_keys=True,
        )
        + "\n"
    )


def load_trials_jsonl(path: str, seed: int = 0) -> TrialHistory:
    history = TrialHistory()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            history.append(Trial(int(raw["index"]), dict(raw["config"]), float(raw["score"]), seed))
    return history
