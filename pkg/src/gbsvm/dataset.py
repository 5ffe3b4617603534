"""Loading, normalizing, splitting and corrupting binary labeled datasets."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import (
    DataFormatError,
    InsufficientDataError,
    StratificationError,
    UnsupportedMulticlassError,
)
from .seeding import make_rng


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix with +1/-1 labels and stable row ids.

    Arrays are made read-only on construction so a Dataset can be shared
    freely between workers.
    """

    features: np.ndarray
    labels: np.ndarray
    ids: np.ndarray = None
    name: str = "dataset"
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        X = np.array(self.features, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.labels)
        if X.ndim != 2:
            raise ValueError("features must be a 2-D array")
        n, d = X.shape
        if n < 2:
            raise InsufficientDataError(f"need at least 2 rows, got {n}")
        if d < 1:
            raise ValueError("need at least one feature column")
        if y.shape != (n,):
            raise ValueError(f"labels must have shape ({n},), got {y.shape}")
        if not np.all((y == 1) | (y == -1)):
            raise ValueError("labels must be +1 or -1")
        ids = np.arange(n) if self.ids is None else np.asarray(self.ids, dtype=np.int64)
        if ids.shape != (n,):
            raise ValueError("ids must have one entry per row")
        if len(np.unique(ids)) != n:
            raise ValueError("ids must be unique")
        y = y.astype(np.int64)
        for a in (X, y, ids):
            a.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "ids", ids)

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[1]

    def __len__(self):
        return self.n

    def rows_of(self, ids):
        """Map row ids back to positional indices."""
        if self._index is None:
            object.__setattr__(self, "_index", {int(i): k for k, i in enumerate(self.ids)})
        try:
            return np.array([self._index[int(i)] for i in ids], dtype=np.int64)
        except KeyError as exc:
            raise KeyError(f"unknown row id {exc.args[0]}") from None

    def subset(self, rows):
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.features[rows], self.labels[rows], self.ids[rows], name=self.name)

    def with_labels(self, labels):
        return Dataset(self.features, labels, self.ids, name=self.name)

    def with_features(self, features):
        return Dataset(features, self.labels, self.ids, name=self.name)

    def class_counts(self):
        return int(np.sum(self.labels == 1)), int(np.sum(self.labels == -1))


@dataclass(frozen=True)
class NoiseSpec:
    rate: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"noise rate must lie in [0, 1], got {self.rate}")


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def _sort_key(raw):
    # numeric labels sort numerically, everything else lexically after them
    return (0, float(raw), raw) if _is_number(raw) else (1, 0.0, raw)


def load_csv(path, label_column=-1, positive_label=None, name=None):
    """Read a comma-delimited file with one label column.

    ``label_column`` is an integer index (negative counts from the end) or a
    header name. A header row is detected when the first row has any
    non-numeric feature cell. ``positive_label`` is compared against the raw
    label text; when omitted, the larger of the two labels (numeric order if
    both parse as numbers) becomes +1.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise InsufficientDataError(f"{path} is empty")

    width = len(rows[0])
    header = None
    if isinstance(label_column, str) and not _is_int_text(label_column):
        header = [c.strip() for c in rows[0]]
        if label_column not in header:
            raise DataFormatError(f"label column {label_column!r} not found in header", row=1)
        label_idx = header.index(label_column)
        rows = rows[1:]
    else:
        label_idx = int(label_column)
        if label_idx < 0:
            label_idx += width
        if not 0 <= label_idx < width:
            raise DataFormatError(f"label column index {label_column} out of range", row=1)
        first_features = [c for j, c in enumerate(rows[0]) if j != label_idx]
        if any(not _is_number(c.strip()) for c in first_features):
            header = [c.strip() for c in rows[0]]
            rows = rows[1:]
    first_data_line = 2 if header is not None else 1

    if len(rows) < 2:
        raise InsufficientDataError(f"need at least 2 data rows, got {len(rows)}")

    feats = np.empty((len(rows), width - 1))
    raw_labels = []
    for i, row in enumerate(rows):
        line = i + first_data_line
        if len(row) != width:
            raise DataFormatError(f"expected {width} fields, got {len(row)}", row=line)
        k = 0
        for j, cell in enumerate(row):
            cell = cell.strip()
            if j == label_idx:
                raw_labels.append(cell)
                continue
            try:
                feats[i, k] = float(cell)
            except ValueError:
                raise DataFormatError(f"non-numeric value {cell!r}", row=line, column=j + 1) from None
            k += 1

    distinct = sorted(set(raw_labels), key=_sort_key)
    if len(distinct) > 2:
        raise UnsupportedMulticlassError(
            f"found {len(distinct)} distinct labels {distinct[:5]}; only binary data is supported"
        )
    if positive_label is None:
        positive_label = distinct[-1]
    positive_label = str(positive_label).strip()
    if positive_label not in distinct:
        # accept e.g. "1" for a file that stores "1.0"
        matches = [v for v in distinct if _is_number(v) and _is_number(positive_label)
                   and float(v) == float(positive_label)]
        if not matches:
            raise DataFormatError(f"positive label {positive_label!r} not among labels {distinct}")
        positive_label = matches[0]
    labels = np.where(np.array(raw_labels) == positive_label, 1, -1)
    return Dataset(feats, labels, name=name or path.stem)


def _is_int_text(text):
    try:
        int(text)
    except ValueError:
        return False
    return True


def fit_minmax(features):
    """Per-column offset and span; constant columns get span 0."""
    X = np.asarray(features, dtype=float)
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    return lo, span


def apply_minmax(features, lo, span):
    X = np.asarray(features, dtype=float)
    safe = np.where(span > 0, span, 1.0)
    out = (X - lo) / safe
    out[:, span <= 0] = 0.0
    return out


def normalize_minmax(ds):
    """Map every feature column affinely onto [0, 1]."""
    lo, span = fit_minmax(ds.features)
    X = apply_minmax(ds.features, lo, span)
    # guard against 1 ulp overshoot from the division
    np.clip(X, 0.0, 1.0, out=X)
    return ds.with_features(X)


def split_train_test(ds, train_fraction=0.7, seed=0):
    """Stratified, seeded split into (train, test).

    Each class contributes ``round(train_fraction * class_size)`` rows to the
    training part, kept within [1, class_size - 1]. Rows keep their original
    relative order in both parts.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie strictly in (0, 1), got {train_fraction}")
    rng = make_rng(seed, "split")
    train_rows = []
    for cls in (1, -1):
        rows = np.flatnonzero(ds.labels == cls)
        if len(rows) < 2:
            raise StratificationError(f"class {cls:+d} has {len(rows)} rows; need at least 2 to stratify")
        k = int(math.floor(train_fraction * len(rows) + 0.5))
        k = min(max(k, 1), len(rows) - 1)
        train_rows.append(rng.permutation(rows)[:k])
    train_rows = np.sort(np.concatenate(train_rows))
    mask = np.zeros(ds.n, dtype=bool)
    mask[train_rows] = True
    return ds.subset(np.flatnonzero(mask)), ds.subset(np.flatnonzero(~mask))


def noise_indices(n, spec):
    """Positions whose labels ``inject_label_noise`` flips."""
    k = int(math.floor(spec.rate * n + 1e-9))
    rng = make_rng(spec.seed, "label-noise")
    return np.sort(rng.choice(n, size=k, replace=False))


def inject_label_noise(ds, spec):
    """Flip the sign of exactly floor(rate * n) uniformly chosen labels."""
    rows = noise_indices(ds.n, spec)
    labels = ds.labels.copy()
    labels[rows] *= -1
    return ds.with_labels(labels)


def make_gaussian_blobs(n=500, d=2, separation=4.0, seed=0, name="blobs"):
    """Two isotropic unit-variance Gaussian classes whose means are ``separation`` apart.

    Class sizes are ceil(n/2) for +1 and floor(n/2) for -1.
    """
    rng = make_rng(seed, "blobs")
    n_pos = (n + 1) // 2
    n_neg = n - n_pos
    shift = np.zeros(d)
    shift[0] = separation / 2.0
    X = np.vstack([rng.standard_normal((n_pos, d)) + shift,
                   rng.standard_normal((n_neg, d)) - shift])
    y = np.concatenate([np.ones(n_pos, dtype=np.int64), -np.ones(n_neg, dtype=np.int64)])
    order = rng.permutation(n)
    return Dataset(X[order], y[order], name=name)


def save_csv(ds, path, header=True):
    """Write features followed by a label column (values +1/-1)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow([f"x{j}" for j in range(ds.d)] + ["label"])
        for x, y in zip(ds.features, ds.labels):
            w.writerow([repr(float(v)) for v in x] + [int(y)])
