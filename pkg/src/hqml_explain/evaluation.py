"""Explainer metrics and the ablation / benchmark harnesses."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from . import __version__
from .datasets import RawTable, augment_noisy, prepare_data
from .encoding import FeatureMapSpec
from .hqml import predict_adapted, train_classical, train_hqml
from .learners import LearnerKind, SHORT_NAMES, fit_learner, intrinsic_importances
from .qmedley import (ExplainerConfig, aggregate_scores, dci_scores, interaction_pi_scores,
                      pi_scores)
from .ranking import top_k

log = logging.getLogger(__name__)

ABLATION_CONFIGS = {
    "baseline": dict(adaptive_weighting=False, interaction_pi=False),
    "adaptive": dict(adaptive_weighting=True, interaction_pi=False),
    "interaction": dict(adaptive_weighting=False, interaction_pi=True),
    "adaptive+interaction": dict(adaptive_weighting=True, interaction_pi=True),
}
GROUND_TRUTH_KINDS = (LearnerKind.DECISION_TREE, LearnerKind.RANDOM_FOREST)
BASELINE_METHODS = ("DCI-only", "PI-only", "LogRegL1")
METRIC_NAMES = ("accuracy", "f1_macro", "precision_macro", "recall_macro")


def recall_at_k(truth_scores, candidate_scores, k: int = 3) -> float:
    truth_scores = np.asarray(truth_scores, dtype=float)
    candidate_scores = np.asarray(candidate_scores, dtype=float)
    if truth_scores.shape != candidate_scores.shape:
        raise ValueError("score vectors differ in length")
    if k < 1 or k > truth_scores.shape[0]:
        raise ValueError(f"k={k} must lie in [1, {truth_scores.shape[0]}]")
    return len(set(top_k(truth_scores, k)) & set(top_k(candidate_scores, k))) / k


def _pearson(a, b) -> float:
    a = a - a.mean()
    b = b - b.mean()
    den = np.sqrt((a * a).sum() * (b * b).sum())
    if den == 0.0:
        return 0.0
    return float(np.clip((a * b).sum() / den, -1.0, 1.0))


def spearman_rank_correlation(a, b) -> float:
    """Pearson correlation of average ranks; 0 if either input is constant."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("inputs must be vectors of equal length")
    if a.shape[0] < 2:
        raise ValueError("need at least 2 values")
    if np.all(a == a[0]) or np.all(b == b[0]):
        return 0.0
    return _pearson(rankdata(a), rankdata(b))


def classification_metrics(y_true, y_pred) -> dict:
    """Accuracy plus macro precision/recall/F1 over the classes present in ``y_true``."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape[0] == 0:
        raise ValueError("empty input")
    if y_true.shape != y_pred.shape:
        raise ValueError("length mismatch")
    prec, rec, f1 = [], [], []
    for c in np.unique(y_true):
        tp = float(np.sum((y_pred == c) & (y_true == c)))
        n_pred = float(np.sum(y_pred == c))
        n_true = float(np.sum(y_true == c))
        p = tp / n_pred if n_pred else 0.0
        r = tp / n_true if n_true else 0.0
        prec.append(p)
        rec.append(r)
        f1.append(2 * p * r / (p + r) if p + r else 0.0)
    return {
        "accuracy": float(np.mean(y_true == y_pred)),
        "f1_macro": float(np.mean(f1)),
        "precision_macro": float(np.mean(prec)),
        "recall_macro": float(np.mean(rec)),
    }


def baseline_importances(method: str, X_ref, Y_ref, model=None,
                         cfg: ExplainerConfig = ExplainerConfig(), seed: int = 0) -> np.ndarray:
    """Single-component explainers and the L1-logistic coefficient proxy.

    ``LogRegL1`` ignores ``model``: it fits an L1-penalised logistic regression
    on ``(X_ref, Y_ref)`` and scores each feature by its mean absolute
    coefficient across classes.
    """
    if method == "DCI-only":
        return dci_scores(model, X_ref, Y_ref, cfg)
    if method == "PI-only":
        return pi_scores(model, X_ref, Y_ref, cfg)
    if method == "LogRegL1":
        lr = fit_learner(LearnerKind.LOGISTIC_REGRESSION, X_ref, Y_ref, {"penalty": "l1"}, seed)
        return np.abs(lr.coef_).mean(axis=1)
    raise ValueError(f"unsupported baseline method {method!r}; expected one of {BASELINE_METHODS}")


def load_external_scores(path, feature_labels) -> np.ndarray:
    """Scores from ``{"feature_labels": [...], "scores": [...]}`` aligned to ``feature_labels``."""
    d = json.loads(Path(path).read_text())
    lookup = dict(zip(d["feature_labels"], d["scores"]))
    missing = [f for f in feature_labels if f not in lookup]
    if missing:
        raise ValueError(f"external scores missing features: {missing}")
    return np.array([float(lookup[f]) for f in feature_labels])


@dataclass
class EvalResult:
    kind: str
    records: list[dict]
    seeds: list[int]
    config: dict = field(default_factory=dict)
    runtime_s: float = 0.0  # informational only, not serialised

    @property
    def failed(self) -> list[dict]:
        return [r for r in self.records if r.get("error")]

    def to_dict(self) -> dict:
        return {
            "tool_version": __version__,
            "kind": self.kind,
            "seeds": list(self.seeds),
            "resolved_config": self.config,
            "records": self.records,
        }

    def csv_rows(self) -> list[dict]:
        rows = []
        for r in self.records:
            row = {k: v for k, v in r.items() if not isinstance(v, (list, dict))}
            for k, v in r.items():
                if isinstance(v, dict):
                    for kk, vv in v.items():
                        if not isinstance(vv, (list, dict)):
                            row[f"{kk}_{k}"] = vv
            rows.append(row)
        return rows

    def to_csv(self) -> str:
        rows = self.csv_rows()
        cols: list[str] = []
        for r in rows:
            cols.extend(c for c in r if c not in cols)
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({c: _fmt(r.get(c, "")) for c in cols})
        return buf.getvalue()


def _fmt(v):
    return repr(v) if isinstance(v, float) else v


def _explainer_scores(model, X, Y, repeats, seed, threads):
    """DCI, PI and interaction-PI once; every ablation config reuses them."""
    cfg = ExplainerConfig(repeats_K=repeats, seed=seed, threads=threads)
    base = float(np.mean(predict_adapted(model, X) == Y))
    dci = dci_scores(model, X, Y, cfg, baseline=base)
    pi = pi_scores(model, X, Y, cfg, baseline=base)
    ipi = interaction_pi_scores(model, X, Y, cfg, baseline=base, pi=pi)
    return dci, pi, ipi


def run_ablation(datasets: dict[str, RawTable], seeds, *, n_noise=2, n_redundant=2,
                 repeats=5, test_fraction=0.3, k=3, threads=1) -> EvalResult:
    """Recall@k of each explainer config against tree Gini importances.

    For every dataset and seed the table is augmented, split and scaled; DT and
    RF models are fitted on the scaled features (identity encoding) and
    explained on the training split.
    """
    t0 = time.perf_counter()
    seeds = [int(s) for s in seeds]
    cells: dict[tuple, dict] = {}
    for name, table in datasets.items():
        for kind in GROUND_TRUTH_KINDS:
            for cname in ABLATION_CONFIGS:
                cells[(name, kind, cname)] = {"recall": [], "spearman": [], "errors": []}
        for seed in seeds:
            try:
                t = augment_noisy(table, n_noise, n_redundant, seed)
                d = prepare_data(t, test_fraction, seed)
            except Exception as exc:  # noqa: BLE001 - recorded per cell
                for kind in GROUND_TRUTH_KINDS:
                    for cname in ABLATION_CONFIGS:
                        cells[(name, kind, cname)]["errors"].append(f"seed {seed}: {exc}")
                continue
            for kind in GROUND_TRUTH_KINDS:
                try:
                    model = train_classical(d.X_train, d.y_train, kind, seed=seed,
                                            feature_labels=d.feature_labels)
                    truth = intrinsic_importances(model.learner)
                    dci, pi, ipi = _explainer_scores(model, d.X_train, d.y_train, repeats, seed, threads)
                except Exception as exc:  # noqa: BLE001
                    for cname in ABLATION_CONFIGS:
                        cells[(name, kind, cname)]["errors"].append(f"seed {seed}: {exc}")
                    continue
                for cname, flags in ABLATION_CONFIGS.items():
                    cfg = ExplainerConfig(repeats_K=repeats, seed=seed, **flags)
                    final, _ = aggregate_scores(dci, ipi if cfg.interaction_pi else pi, cfg)
                    cell = cells[(name, kind, cname)]
                    cell["recall"].append(recall_at_k(truth, final, k))
                    cell["spearman"].append(spearman_rank_correlation(truth, final))
    records = []
    for (name, kind, cname), c in cells.items():
        rec = {
            "dataset": name,
            "model": "DT" if kind is LearnerKind.DECISION_TREE else "RF",
            "config": cname,
            "n_seeds": len(c["recall"]),
            f"recall_at_{k}": float(np.mean(c["recall"])) if c["recall"] else None,
            "spearman": float(np.mean(c["spearman"])) if c["spearman"] else None,
            f"recall_at_{k}_per_seed": c["recall"],
            "error": "; ".join(c["errors"]),
        }
        records.append(rec)
    cfg = {"datasets": list(datasets), "n_noise": n_noise, "n_redundant": n_redundant,
           "repeats": repeats, "test_fraction": test_fraction, "k": k}
    return EvalResult("ablation", records, seeds, cfg, time.perf_counter() - t0)


def run_benchmark(datasets: dict[str, RawTable], model_kinds, seeds, *, n_noise=2,
                  n_redundant=2, test_fraction=0.3, max_qubits=16) -> EvalResult:
    """Classical learner vs its amplitude-encoded twin on the same split.

    One record per (dataset, model, seed) plus one ``seed="mean"`` summary per
    (dataset, model).
    """
    t0 = time.perf_counter()
    seeds = [int(s) for s in seeds]
    kinds = [LearnerKind(k) for k in model_kinds]
    records = []
    for name, table in datasets.items():
        prepared = {}
        for seed in seeds:
            try:
                prepared[seed] = prepare_data(augment_noisy(table, n_noise, n_redundant, seed),
                                              test_fraction, seed)
            except Exception as exc:  # noqa: BLE001
                prepared[seed] = exc
        for kind in kinds:
            per_seed = []
            for seed in seeds:
                rec = {"dataset": name, "model": SHORT_NAMES.get(kind, kind.value), "seed": seed}
                d = prepared[seed]
                try:
                    if isinstance(d, Exception):
                        raise d
                    fmap = FeatureMapSpec(n_qubits=d.n_features, max_amplitude_qubits=max_qubits)
                    c = train_classical(d.X_train, d.y_train, kind, seed=seed)
                    q = train_hqml(d.X_train, d.y_train, kind, "amplitude", fmap, seed=seed)
                    rec["classical"] = classification_metrics(d.y_test, predict_adapted(c, d.X_test))
                    rec["quxai"] = classification_metrics(d.y_test, predict_adapted(q, d.X_test))
                    rec["error"] = ""
                    per_seed.append(rec)
                except Exception as exc:  # noqa: BLE001
                    log.warning("benchmark cell %s/%s/%s failed: %s", name, kind.value, seed, exc)
                    rec["error"] = str(exc)
                records.append(rec)
            summary = {"dataset": name, "model": SHORT_NAMES.get(kind, kind.value), "seed": "mean"}
            if per_seed:
                for side in ("classical", "quxai"):
                    summary[side] = {m: float(np.mean([r[side][m] for r in per_seed]))
                                     for m in METRIC_NAMES}
                summary["error"] = ""
            else:
                summary["error"] = "all seeds failed"
            records.append(summary)
    cfg = {"datasets": list(datasets), "models": [k.value for k in kinds], "n_noise": n_noise,
           "n_redundant": n_redundant, "test_fraction": test_fraction, "max_qubits": max_qubits}
    return EvalResult("benchmark", records, seeds, cfg, time.perf_counter() - t0)


def run_explainer_comparison(table: RawTable, seeds, *, n_noise=2, n_redundant=2, repeats=5,
                             test_fraction=0.3, k=3, external: dict | None = None,
                             dataset_name="dataset") -> EvalResult:
    """Recall@k and Spearman of DCI, PI, the combined score and LogRegL1 vs DT/RF Gini truth.

    ``external`` maps an explainer name to a callable ``(model_label, seed,
    feature_labels) -> scores`` for imported third-party scores.
    """
    t0 = time.perf_counter()
    seeds = [int(s) for s in seeds]
    acc: dict[tuple, dict] = {}
    for seed in seeds:
        d = prepare_data(augment_noisy(table, n_noise, n_redundant, seed), test_fraction, seed)
        cfg = ExplainerConfig(repeats_K=repeats, seed=seed)
        for kind in GROUND_TRUTH_KINDS:
            label = "DT" if kind is LearnerKind.DECISION_TREE else "RF"
            model = train_classical(d.X_train, d.y_train, kind, seed=seed,
                                    feature_labels=d.feature_labels)
            truth = intrinsic_importances(model.learner)
            dci = dci_scores(model, d.X_train, d.y_train, cfg)
            pi = pi_scores(model, d.X_train, d.y_train, cfg)
            scores = {
                "DCI": dci,
                f"PI (k={repeats})": pi,
                "combined": aggregate_scores(dci, pi, cfg)[0],
                "LogRegL1": baseline_importances("LogRegL1", d.X_train, d.y_train, seed=seed),
            }
            for ename, fn in (external or {}).items():
                scores[ename] = np.asarray(fn(label, seed, d.feature_labels), dtype=float)
            for ename, s in scores.items():
                cell = acc.setdefault((label, ename), {"recall": [], "spearman": []})
                cell["recall"].append(recall_at_k(truth, s, k))
                cell["spearman"].append(spearman_rank_correlation(truth, s))
    records = [{"dataset": dataset_name, "model": m, "explainer": e,
                f"recall_at_{k}": float(np.mean(c["recall"])),
                "spearman": float(np.mean(c["spearman"])),
                f"recall_at_{k}_per_seed": c["recall"], "spearman_per_seed": c["spearman"],
                "error": ""}
               for (m, e), c in acc.items()]
    cfg = {"dataset": dataset_name, "n_noise": n_noise, "n_redundant": n_redundant,
           "repeats": repeats, "test_fraction": test_fraction, "k": k}
    return EvalResult("comparison", records, seeds, cfg, time.perf_counter() - t0)


def format_table(result: EvalResult, k: int = 3) -> str:
    """Fixed-width console table of the summary rows."""
    lines = []
    if result.kind == "benchmark":
        lines.append(f"{'dataset':<12} {'model':<12} {'acc cls':>8} {'acc q':>8} {'f1 cls':>8} {'f1 q':>8}")
        for r in result.records:
            if r.get("seed") != "mean":
                continue
            if r["error"]:
                lines.append(f"{r['dataset']:<12} {r['model']:<12} FAILED: {r['error']}")
                continue
            c, q = r["classical"], r["quxai"]
            lines.append(f"{r['dataset']:<12} {r['model']:<12} {c['accuracy']:>8.4f} {q['accuracy']:>8.4f}"
                         f" {c['f1_macro']:>8.4f} {q['f1_macro']:>8.4f}")
        return "\n".join(lines)
    key = f"recall_at_{k}"
    middle = "config" if result.kind == "ablation" else "explainer"
    lines.append(f"{'dataset':<12} {'model':<6} {middle:<22} {key:>12} {'spearman':>9}")
    for r in result.records:
        if r.get(key) is None:
            lines.append(f"{r['dataset']:<12} {r['model']:<6} {r[middle]:<22} FAILED: {r['error']}")
            continue
        lines.append(f"{r['dataset']:<12} {r['model']:<6} {r[middle]:<22} {r[key]:>12.4f} {r['spearman']:>9.4f}")
    return "\n".join(lines)
