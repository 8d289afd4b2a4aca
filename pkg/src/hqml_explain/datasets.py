"""Tabular data: CSV ingestion, preparation, synthetic augmentation."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

BUNDLED = ("iris", "wine")
PLANTED_RULES = ("threshold", "linear", "xor")


class DataError(ValueError):
    """Malformed or unusable input data."""


@dataclass
class RawTable:
    feature_names: list[str]
    X: np.ndarray
    target: np.ndarray
    target_name: str = "target"
    provenance: list[str] = field(default_factory=list)
    informative: list[int] | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.target = np.asarray(self.target)
        if self.X.ndim != 2 or self.X.shape[1] != len(self.feature_names):
            raise DataError("feature matrix does not match feature names")
        if self.target.shape[0] != self.X.shape[0]:
            raise DataError("target length does not match row count")
        if not self.provenance:
            self.provenance = ["original"] * len(self.feature_names)

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]


@dataclass
class PreparedDataset:
    X_train: np.ndarray
    X_test: np.ndarray
    y_train: np.ndarray
    y_test: np.ndarray
    feature_labels: list[str]
    class_labels: list
    scaler_min: np.ndarray
    scaler_max: np.ndarray
    provenance: list[str]
    seed: int
    informative: list[int] | None = None

    @property
    def n_features(self) -> int:
        return self.X_train.shape[1]


def load_csv(path, target_column: str) -> RawTable:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"data file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file, header row required")
    header = [h.strip() for h in rows[0]]
    if target_column not in header:
        raise DataError(f"{path}: target column {target_column!r} not found in header {header}")
    t = header.index(target_column)
    names = [h for i, h in enumerate(header) if i != t]
    X, target = [], []
    for r, row in enumerate(rows[1:], start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"{path}: row {r} has {len(row)} cells, header has {len(header)}")
        vals = []
        for i, cell in enumerate(row):
            if i == t:
                continue
            try:
                v = float(cell)
            except ValueError:
                v = math.nan
            if not math.isfinite(v):
                raise DataError(f"{path}: row {r}, column {header[i]!r}: non-numeric value {cell!r}")
            vals.append(v)
        X.append(vals)
        target.append(row[t].strip())
    if not X:
        raise DataError(f"{path}: no data rows")
    return RawTable(names, np.array(X, dtype=float), np.array(target, dtype=object), target_column)


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("hqml_explain") / "data" / f"{name}.csv"))


def load_bundled(name: str) -> RawTable:
    if name not in BUNDLED:
        raise DataError(f"unknown bundled dataset {name!r}; available: {BUNDLED}")
    return load_csv(bundled_path(name), "target")


def resolve_table(spec: str, target_column: str | None = None) -> RawTable:
    """Bundled dataset name or CSV path."""
    if spec in BUNDLED and not Path(spec).exists():
        return load_bundled(spec)
    if target_column is None:
        raise DataError("--target is required for CSV input")
    return load_csv(spec, target_column)


def _sort_key(values):
    try:
        return sorted(values, key=float)
    except (TypeError, ValueError):
        return sorted(values, key=str)


def encode_labels(target) -> tuple[np.ndarray, list]:
    classes = _sort_key(set(target.tolist()))
    index = {c: i for i, c in enumerate(classes)}
    return np.array([index[v] for v in target.tolist()], dtype=np.int64), classes


def stratified_split(y: np.ndarray, test_fraction: float, seed: int):
    """Per-class shuffled split; each class keeps at least one row on each side."""
    if not 0.0 < test_fraction < 1.0:
        raise DataError("test_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, 7]))
    train, test = [], []
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        if idx.size < 2:
            raise DataError(f"class {c} has {idx.size} row(s); at least 2 required")
        idx = rng.permutation(idx)
        n_test = int(round(test_fraction * idx.size))
        n_test = min(max(n_test, 1), idx.size - 1)
        test.extend(idx[:n_test].tolist())
        train.extend(idx[n_test:].tolist())
    return np.sort(np.array(train)), np.sort(np.array(test))


def minmax_fit(X):
    return X.min(axis=0), X.max(axis=0)


def minmax_apply(X, lo, hi, upper=math.pi):
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    Z = (X - lo) / safe * upper
    Z = np.where(span > 0, Z, 0.0)
    return np.clip(Z, 0.0, upper)


def prepare_data(t: RawTable, test_fraction: float = 0.3, seed: int = 0) -> PreparedDataset:
    """Encode labels, split stratified, min-max scale features to ``[0, pi]``.

    The scaler is fitted on the training rows only. Test rows outside the
    training range are clamped; constant columns map to 0.
    """
    y, classes = encode_labels(t.target)
    if len(classes) < 2:
        raise DataError("target has a single class")
    tr, te = stratified_split(y, test_fraction, seed)
    lo, hi = minmax_fit(t.X[tr])
    return PreparedDataset(
        X_train=minmax_apply(t.X[tr], lo, hi),
        X_test=minmax_apply(t.X[te], lo, hi),
        y_train=y[tr],
        y_test=y[te],
        feature_labels=list(t.feature_names),
        class_labels=classes,
        scaler_min=lo,
        scaler_max=hi,
        provenance=list(t.provenance),
        seed=seed,
        informative=t.informative,
    )


def augment_noisy(t: RawTable, n_noise: int = 2, n_redundant: int = 2, seed: int = 0) -> RawTable:
    """Append standard-normal noise columns and noisy copies of original columns.

    A redundant column is a randomly chosen original column plus Gaussian noise
    with standard deviation 0.1 times that column's standard deviation.
    """
    if n_noise < 0 or n_redundant < 0:
        raise DataError("n_noise and n_redundant must be non-negative")
    originals = [i for i, p in enumerate(t.provenance) if p == "original"]
    if n_redundant > 0 and not originals:
        raise DataError("redundant columns need at least one original feature")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, 11]))
    n = t.n_rows
    cols, names, prov = [], [], []
    for i in range(n_noise):
        cols.append(rng.standard_normal(n))
        names.append(f"noise_{i}")
        prov.append("noise")
    for i in range(n_redundant):
        src = int(originals[rng.integers(len(originals))])
        base = t.X[:, src]
        cols.append(base + rng.normal(0.0, 0.1 * base.std(), size=n))
        names.append(f"redundant_{i}_of_{t.feature_names[src]}")
        prov.append(f"redundant({t.feature_names[src]})")
    if not cols:
        return replace(t, feature_names=list(t.feature_names), provenance=list(t.provenance))
    return RawTable(
        feature_names=list(t.feature_names) + names,
        X=np.column_stack([t.X] + cols),
        target=t.target.copy(),
        target_name=t.target_name,
        provenance=list(t.provenance) + prov,
        informative=t.informative,
    )


def make_planted(n_rows: int = 200, n_informative: int = 3, n_noise: int = 5,
                 rule: str = "threshold", seed: int = 0) -> RawTable:
    """Synthetic binary task whose informative columns are known.

    Columns are independent standard normals; the first ``n_informative`` drive
    the label:

    * ``threshold``: majority vote of ``x_i > median(x_i)`` over informative
      columns (an even tie is settled by the first one),
    * ``linear``: ``sum_i w_i x_i > 0`` with weights ``1, 0.9, 0.8, ...``,
    * ``xor``: parity of ``x_i > median(x_i)`` over informative columns.

    Splitting at the sample median keeps a single-column threshold task
    balanced exactly.
    """
    if n_informative < 1:
        raise DataError("n_informative must be >= 1")
    if rule not in PLANTED_RULES:
        raise DataError(f"invalid rule {rule!r}; expected one of {PLANTED_RULES}")
    if rule == "xor" and n_informative < 2:
        raise DataError("xor rule needs at least 2 informative columns")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, 13]))
    D = n_informative + n_noise
    X = rng.standard_normal((n_rows, D))
    S = X[:, :n_informative] > np.median(X[:, :n_informative], axis=0)
    if rule == "threshold":
        votes = S.sum(axis=1)
        y = (2 * votes > n_informative) | ((2 * votes == n_informative) & S[:, 0])
    elif rule == "linear":
        w = np.maximum(1.0 - 0.1 * np.arange(n_informative), 0.1)
        y = X[:, :n_informative] @ w > 0
    else:
        y = S.sum(axis=1) % 2 == 1
    names = [f"inf_{i}" for i in range(n_informative)] + [f"noise_{i}" for i in range(n_noise)]
    prov = ["original"] * n_informative + ["noise"] * n_noise
    return RawTable(names, X, y.astype(np.int64), "label", prov, list(range(n_informative)))


def planted_truth(t) -> np.ndarray:
    """Ground-truth score vector: 1 for informative columns, 0 elsewhere."""
    names = t.feature_names if isinstance(t, RawTable) else t.feature_labels
    truth = np.zeros(len(names))
    truth[list(t.informative or [])] = 1.0
    return truth
