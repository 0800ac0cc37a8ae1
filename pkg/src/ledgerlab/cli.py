"""Pipeline orchestration: one subcommand per stage.

    synth   -> transactions.csv + labels.csv
    split   -> split.json
    encode  -> features.emb1 (standardizer fitted on train ids only)
    pca     -> pca-report.csv
    train   -> model.json + eval.json
    tune    -> trials.jsonl + model.json + eval.json
    compare -> differential.csv + bland_altman.csv (+ SVG)
    curve   -> curve.csv (+ SVG)

Every command is deterministic given its inputs and seeds (trials.jsonl
additionally records wall-clock durations).  An optional JSON config file
supplies per-subcommand defaults; explicit flags win.  Exit codes: 0 ok,
1 validation error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .classifiers import FAMILIES, ClassifierSpec, fit, save_model
from .encode import (
    OneHotLayout,
    encode_onehot_dataset,
    read_emb1,
    serialize_entry,
    standardize_apply,
    standardize_fit,
    write_emb1,
)
from .embed import HashingBackend, TransformerBackend, embed_batch
from .errors import LedgerlabError
from .ledger import (
    DEFAULT_MAX_TXN,
    LABEL_ANOMALOUS,
    load_ledger_csv,
    read_labels_csv,
    write_ledger_csv,
)
from .metrics import (
    EvalReport,
    bland_altman,
    confusion,
    differential_report,
    learning_curve,
    read_eval_json,
    write_bland_altman_csv,
    write_curve_csv,
    write_differential_csv,
    write_eval_json,
)
from .pca import fit_pca, variance_report, write_pca_report
from .sampling import (
    class_weights,
    read_split_json,
    split_indices_for_ids,
    stratified_split,
    write_split_json,
)
from .synth import config_from_dict, generate_ledger
from .tpe import (
    TrialHistory,
    default_space,
    load_trials_jsonl,
    optimize,
    write_trial_line,
)

_TUNE_HOLDOUT_FRACTION = 0.25  # inner carve-out of the training split


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # validation problems exit 1, not 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load_config_section(path: str | None, section: str) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise LedgerlabError(f"{path}: config root must be a JSON object")
    value = raw.get(section, {})
    if not isinstance(value, dict):
        raise LedgerlabError(f"{path}: section {section!r} must be an object")
    return value


def _pick(args_value, config: dict, key: str, default):
    if args_value is not None:
        return args_value
    if key in config:
        return config[key]
    return default


def _require(value, flag: str):
    if value is None:
        raise LedgerlabError(f"missing required option {flag}")
    return value


def _ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _binary_labels(label_map: dict, ids) -> np.ndarray:
    missing = [rid for rid in ids if rid not in label_map]
    if missing:
        raise LedgerlabError(f"labels file lacks ids, e.g. {missing[:3]}")
    return np.array(
        [1 if label_map[rid][0] == LABEL_ANOMALOUS else 0 for rid in ids], dtype=np.uint8
    )


# --- subcommand implementations -------------------------------------------------

def _cmd_synth(args) -> int:
    section = _load_config_section(args.config, "synth")
    gen_cfg = dict(section)
    if args.gen_config:
        with open(args.gen_config, encoding="utf-8") as fh:
            gen_cfg = json.load(fh)
    if args.seed is not None:
        gen_cfg["seed"] = args.seed
    config = config_from_dict(gen_cfg)
    dataset = generate_ledger(config)
    out = _ensure_dir(args.out)
    write_ledger_csv(
        dataset, os.path.join(out, "transactions.csv"), os.path.join(out, "labels.csv")
    )
    n_anom = sum(1 for e in dataset.entries if e.is_anomalous)
    print(
        f"wrote {len(dataset.entries)} entries ({dataset.n_transactions()} transactions, "
        f"{n_anom} anomalous) to {out}"
    )
    return 0


def _cmd_split(args) -> int:
    section = _load_config_section(args.config, "split")
    labels_path = _require(_pick(args.labels, section, "labels", None), "--labels")
    test_frac = float(_pick(args.test_frac, section, "test_frac", 0.2))
    seed = int(_require(_pick(args.seed, section, "seed", None), "--seed"))
    label_map = read_labels_csv(labels_path)
    ids = sorted(label_map)
    labels = [label_map[rid][0] for rid in ids]
    split = stratified_split(labels, test_frac, seed)
    write_split_json(split, ids, args.out)
    print(
        f"split {len(ids)} ids into {len(split.train_indices)} train / "
        f"{len(split.test_indices)} test -> {args.out}"
    )
    return 0


def _cmd_encode(args) -> int:
    section = _load_config_section(args.config, "encode")
    method = _require(_pick(args.method, section, "method", None), "--method")
    if method not in ("onehot", "embed"):
        raise LedgerlabError(f"--method must be onehot|embed, got {method!r}")
    data_dir = _require(_pick(args.in_dir, section, "in", None), "--in")
    max_txn = int(_pick(args.max_txn, section, "max_txn", DEFAULT_MAX_TXN))
    dataset = load_ledger_csv(
        os.path.join(data_dir, "transactions.csv"),
        os.path.join(data_dir, "labels.csv"),
        max_txn=max_txn,
    )

    if method == "onehot":
        layout = OneHotLayout.from_dataset(dataset, max_txn)
        matrix = encode_onehot_dataset(dataset, layout, oov=args.oov)
    else:
        backend_name = _pick(args.backend, section, "backend", "hash")
        if backend_name == "hash":
            backend = HashingBackend(dim=args.hash_dim, seed=args.hash_seed)
        elif backend_name == "transformer":
            model_dir = _require(
                _pick(args.model_dir, section, "model_dir", None), "--model-dir"
            )
            backend = TransformerBackend(model_dir)
        else:
            raise LedgerlabError(f"--backend must be hash|transformer, got {backend_name!r}")
        texts = [serialize_entry(e) for e in dataset.entries]
        matrix = embed_batch(texts, backend, dataset.ids())

    if args.standardize:
        split_file = _require(
            _pick(args.split_file, section, "split_file", None), "--split-file"
        )
        payload = read_split_json(split_file)
        train_idx, _ = split_indices_for_ids(payload, matrix.row_ids)
        standardizer = standardize_fit(matrix.take(train_idx))
        matrix = standardize_apply(standardizer, matrix)

    write_emb1(matrix, args.out)
    print(f"encoded {matrix.n_rows} rows x {matrix.dim} dims ({matrix.encoding_id}) -> {args.out}")
    return 0


def _cmd_pca(args) -> int:
    section = _load_config_section(args.config, "pca")
    thresholds = [
        float(t)
        for t in str(_pick(args.thresholds, section, "thresholds", "0.99,0.999")).split(",")
    ]
    named = []
    for path in args.inputs:
        matrix = read_emb1(path)
        named.append((matrix.encoding_id, fit_pca(matrix)))
    rows = variance_report(named, thresholds)
    write_pca_report(rows, args.out)
    for name, threshold, k, raw_dim in rows:
        print(f"{name}: {k} of {raw_dim} components reach {threshold:g} variance")
    return 0


def _prepare_training(args, section):
    features = _require(_pick(args.features, section, "features", None), "--features")
    split_file = _require(_pick(args.split, section, "split", None), "--split")
    labels_path = _require(_pick(args.labels, section, "labels", None), "--labels")
    scheme = _pick(args.weights, section, "weights", "balanced")
    if scheme not in ("balanced", "uniform"):
        raise LedgerlabError(f"--weights must be balanced|uniform, got {scheme!r}")
    matrix = read_emb1(features)
    payload = read_split_json(split_file)
    train_idx, test_idx = split_indices_for_ids(payload, matrix.row_ids)
    label_map = read_labels_csv(labels_path)
    y_all = _binary_labels(label_map, matrix.row_ids)
    return matrix, train_idx, test_idx, y_all, scheme


def _weights_for(y: np.ndarray, scheme: str):
    names = [LABEL_ANOMALOUS if v else "normal" for v in y]
    return class_weights(names, scheme)


def _evaluate(model, matrix, test_idx, y_all, family, seed) -> EvalReport:
    X_test = matrix.take(test_idx)
    y_test = y_all[test_idx]
    pred = model.predict_labels(X_test)
    cm = confusion(y_test, pred)
    return EvalReport.build(cm, family, matrix.encoding_id, seed)


def _cmd_train(args) -> int:
    section = _load_config_section(args.config, "train")
    family = _check_family(_require(_pick(args.model, section, "model", None), "--model"))
    seed = int(_require(_pick(args.seed, section, "seed", None), "--seed"))
    params = json.loads(args.params) if args.params else dict(section.get("params", {}))
    matrix, train_idx, test_idx, y_all, scheme = _prepare_training(args, section)

    y_train = y_all[train_idx]
    spec = ClassifierSpec(family, params, seed)
    model = fit(spec, matrix.take(train_idx), y_train.tolist(), _weights_for(y_train, scheme))
    out = _ensure_dir(args.out)
    save_model(model, os.path.join(out, "model.json"))
    report = _evaluate(model, matrix, test_idx, y_all, family, seed)
    write_eval_json(report, os.path.join(out, "eval.json"))
    print(
        f"{family}: recall_avg_macro {report.recall_avg_macro:.4f} "
        f"(tn={report.cm.tn} fn={report.cm.fn} fp={report.cm.fp} tp={report.cm.tp})"
    )
    return 0


def _cmd_tune(args) -> int:
    section = _load_config_section(args.config, "tune")
    family = _check_family(_require(_pick(args.model, section, "model", None), "--model"))
    seed = int(_require(_pick(args.seed, section, "seed", None), "--seed"))
    n_iter = int(_pick(args.iters, section, "iters", 100))
    matrix, train_idx, test_idx, y_all, scheme = _prepare_training(args, section)

    y_train = y_all[train_idx]
    inner = stratified_split(y_train.tolist(), _TUNE_HOLDOUT_FRACTION, seed=seed + 7919)
    fit_idx = train_idx[np.asarray(inner.train_indices)]
    val_idx = train_idx[np.asarray(inner.test_indices)]
    X_fit, y_fit = matrix.take(fit_idx), y_all[fit_idx]
    X_val, y_val = matrix.take(val_idx), y_all[val_idx]
    weights_fit = _weights_for(y_fit, scheme)

    from .metrics import recall_avg_macro  # local alias for the objective

    def objective(config: dict) -> float:
        spec = ClassifierSpec(family, config, seed)
        model = fit(spec, X_fit, y_fit.tolist(), weights_fit)
        return recall_avg_macro(confusion(y_val, model.predict_labels(X_val)))

    out = _ensure_dir(args.out)
    trials_path = os.path.join(out, "trials.jsonl")
    history = TrialHistory()
    if args.resume and os.path.exists(trials_path):
        history = load_trials_jsonl(trials_path, seed)
    mode = "a" if (args.resume and len(history)) else "w"
    with open(trials_path, mode, encoding="utf-8") as fh:
        result = optimize(
            objective,
            default_space(family),
            n_iter=n_iter,
            seed=seed,
            history=history,
            on_trial=lambda trial, ms: write_trial_line(fh, trial, ms),
        )

    spec = ClassifierSpec(family, result.best_config, seed)
    model = fit(spec, matrix.take(train_idx), y_train.tolist(), _weights_for(y_train, scheme))
    save_model(model, os.path.join(out, "model.json"))
    report = _evaluate(model, matrix, test_idx, y_all, family, seed)
    write_eval_json(report, os.path.join(out, "eval.json"))
    print(
        f"{family}: best inner score {result.best_score:.4f} with {result.best_config}; "
        f"test recall_avg_macro {report.recall_avg_macro:.4f}"
    )
    return 0


def _cmd_compare(args) -> int:
    def read_dir(d: str) -> dict[str, EvalReport]:
        reports = {}
        for name in sorted(os.listdir(d)):
            if not name.endswith(".json"):
                continue
            try:
                report = read_eval_json(os.path.join(d, name))
            except (KeyError, TypeError, ValueError):
                continue
            reports[report.model] = report
        if not reports:
            raise LedgerlabError(f"{d}: no eval.json files found")
        return reports

    a = read_dir(args.a)
    b = read_dir(args.b)
    new_scores = {k: r.recall_avg_macro for k, r in a.items()}
    base_scores = {k: r.recall_avg_macro for k, r in b.items()}
    diff = differential_report(new_scores, base_scores)
    keys = sorted(new_scores)
    stats = bland_altman([new_scores[k] for k in keys], [base_scores[k] for k in keys])

    out = _ensure_dir(args.out)
    write_differential_csv(diff, new_scores, base_scores, os.path.join(out, "differential.csv"))
    write_bland_altman_csv(stats, os.path.join(out, "bland_altman.csv"))
    if args.svg:
        from . import figures

        figures.plot_differential(diff.deltas, os.path.join(out, "differential.svg"))
        figures.plot_bland_altman(
            [new_scores[k] for k in keys],
            [base_scores[k] for k in keys],
            stats,
            os.path.join(out, "bland_altman.svg"),
            labels=keys,
        )
    for k in keys:
        print(f"{k}: delta {diff.deltas[k]:+.4f}")
    print(
        f"limits of agreement: {stats.mean_diff:+.4f} "
        f"[{stats.lower_limit:+.4f}, {stats.upper_limit:+.4f}]"
    )
    return 0


def _cmd_curve(args) -> int:
    section = _load_config_section(args.config, "curve")
    with open(_require(_pick(args.model_spec, section, "model_spec", None), "--model-spec"),
              encoding="utf-8") as fh:
        spec_raw = json.load(fh)
    family = _check_family(spec_raw.get("family"))
    params = dict(spec_raw.get("hyperparameters", {}))
    seed = int(spec_raw.get("seed", 0))
    k = int(_pick(args.k, section, "k", 5))
    fractions = [
        float(f)
        for f in str(_pick(args.fractions, section, "fractions", "0.1,0.25,0.5,0.75,1.0")).split(",")
    ]
    matrix, train_idx, _, y_all, scheme = _prepare_training(args, section)
    X = matrix.values[train_idx]
    y = y_all[train_idx]

    def trainer(X_sub, y_sub, _w):
        spec = ClassifierSpec(family, params, seed)
        model = fit(spec, X_sub, y_sub.tolist(), _weights_for(y_sub, scheme))
        return model.predict_labels

    points = learning_curve(trainer, X, y, fractions=fractions, k=k, seed=seed)
    out = _ensure_dir(args.out)
    write_curve_csv(points, os.path.join(out, "curve.csv"))
    if args.svg:
        from . import figures

        figures.plot_learning_curve(
            points, os.path.join(out, "curve.svg"), title=f"{family} ({matrix.encoding_id})"
        )
    for p in points:
        print(
            f"fraction {p.fraction:g}: train {p.train_mean:.4f}+/-{p.train_sd:.4f} "
            f"validation {p.val_mean:.4f}+/-{p.val_sd:.4f}"
        )
    return 0


def _check_family(value: str | None) -> str:
    if value not in FAMILIES:
        raise LedgerlabError(
            f"unknown model {value!r}; valid families: {', '.join(FAMILIES)}"
        )
    return value


# --- parser wiring ----------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="ledgerlab", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--version", action="version", version=f"ledgerlab {__version__}")
        p.add_argument("--config", help="JSON config file with per-subcommand defaults")
        p.set_defaults(func=func)
        return p

    p = add("synth", _cmd_synth, "generate a synthetic ledger")
    p.add_argument("--gen-config", help="generator config JSON (fields of GeneratorConfig)")
    p.add_argument("--seed", type=int, help="override the generator seed")
    p.add_argument("--out", required=True, help="output directory")

    p = add("split", _cmd_split, "stratified train/test split")
    p.add_argument("--labels", help="labels.csv path")
    p.add_argument("--test-frac", type=float, dest="test_frac")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="split.json path")

    p = add("encode", _cmd_encode, "encode a ledger (one-hot or embedding)")
    p.add_argument("--method", choices=("onehot", "embed"))
    p.add_argument("--backend", choices=("hash", "transformer"))
    p.add_argument("--model-dir", dest="model_dir", help="transformer backend asset directory")
    p.add_argument("--hash-dim", type=int, default=384)
    p.add_argument("--hash-seed", type=int, default=0)
    p.add_argument("--max-txn", type=int, dest="max_txn")
    p.add_argument("--oov", choices=("zero_block", "error"), default="zero_block")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--split-file", dest="split_file", help="split.json (standardizer fits on train)")
    p.add_argument("--in", dest="in_dir", help="directory with transactions.csv + labels.csv")
    p.add_argument("--out", required=True, help="output EMB1 path")

    p = add("pca", _cmd_pca, "explained-variance report over encodings")
    p.add_argument("--in", dest="inputs", nargs="+", required=True, help="EMB1 file(s)")
    p.add_argument("--thresholds", help="comma-separated variance thresholds")
    p.add_argument("--out", required=True, help="pca-report.csv path")

    def training_flags(p):
        p.add_argument("--features", help="EMB1 feature file")
        p.add_argument("--split", help="split.json")
        p.add_argument("--labels", help="labels.csv")
        p.add_argument("--weights", choices=("balanced", "uniform"))
        p.add_argument("--seed", type=int)
        p.add_argument("--out", required=True, help="output directory")

    p = add("train", _cmd_train, "train one model, evaluate on the test split")
    p.add_argument("--model", help=f"one of: {', '.join(FAMILIES)}")
    p.add_argument("--params", help="hyperparameters as inline JSON")
    training_flags(p)

    p = add("tune", _cmd_tune, "TPE-tune a family, then train and evaluate the best")
    p.add_argument("--model", help=f"one of: {', '.join(FAMILIES)}")
    p.add_argument("--iters", type=int, help="TPE iterations (default 100)")
    p.add_argument("--resume", action="store_true", help="continue from existing trials.jsonl")
    training_flags(p)

    p = add("compare", _cmd_compare, "differentials + agreement between two eval dirs")
    p.add_argument("--a", required=True, help="eval dir (new encoding)")
    p.add_argument("--b", required=True, help="eval dir (baseline encoding)")
    p.add_argument("--svg", action="store_true")
    p.add_argument("--out", required=True, help="output directory")

    p = add("curve", _cmd_curve, "k-fold learning curve for a model spec")
    p.add_argument("--model-spec", dest="model_spec", help="JSON {family, hyperparameters, seed}")
    p.add_argument("--k", type=int)
    p.add_argument("--fractions", help="comma-separated fractions in (0, 1]")
    p.add_argument("--svg", action="store_true")
    training_flags(p)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LedgerlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
