"""Dataset ingestion, one-vs-rest task construction, and splits.

Supported inputs: svmlight/libsvm text ("label idx:val ...", 1-based
indices) and numeric CSV.  Multiclass label vectors are binarized one
class at a time; classes keep their task only when both splits hold at
least T positives.  Train/validation splits use a self-contained
SplitMix64-seeded Fisher-Yates shuffle so the partition is identical on
every platform and runtime.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Union

import numpy as np
from scipy import sparse

__all__ = [
    "Dataset",
    "Task",
    "parse_svmlight",
    "write_svmlight",
    "parse_csv",
    "make_tasks",
    "split",
    "macro_average",
    "read_manifest",
]


@dataclass
class Dataset:
    """Feature matrix (dense ndarray or scipy CSR) with integer labels."""

    features: Union[np.ndarray, sparse.spmatrix]
    labels: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    name: str = ""

    def __post_init__(self) -> None:
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"{self.features.shape[0]} rows but {self.labels.shape[0]} labels"
            )

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def d(self) -> int:
        return int(self.features.shape[1])

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices)
        return Dataset(self.features[indices], self.labels[indices], self.name)

    def with_labels(self, labels, name: str | None = None) -> "Dataset":
        return Dataset(self.features, labels, self.name if name is None else name)

    def to_dense(self) -> np.ndarray:
        if sparse.issparse(self.features):
            return np.asarray(self.features.todense())
        return self.features

    def nnz(self) -> int:
        if sparse.issparse(self.features):
            return int(self.features.nnz)
        return int(np.count_nonzero(self.features))


@dataclass(frozen=True)
class Task:
    """One binary one-vs-rest problem surviving the positives filter."""

    class_id: int
    train: Dataset
    test: Dataset


def parse_svmlight(source: Union[str, Path], n_features: int | None = None) -> Dataset:
    """Read svmlight/libsvm text into a sparse dataset.

    Labels must be integers; the {-1, +1} convention is mapped to {0, 1}.
    Indices are 1-based and must be strictly ascending within a line.
    """
    path = Path(source)
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    labels: list[int] = []
    max_col = 0
    with open(path, "r") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                label_f = float(parts[0])
                label = int(label_f)
                if label != label_f:
                    raise ValueError("non-integer label")
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad label {parts[0]!r}") from exc
            row = len(labels)
            labels.append(label)
            prev_idx = 0
            for token in parts[1:]:
                try:
                    idx_s, val_s = token.split(":", 1)
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: bad feature {token!r}") from exc
                if idx < 1:
                    raise ValueError(f"{path}:{lineno}: index {idx} is not 1-based")
                if idx <= prev_idx:
                    raise ValueError(
                        f"{path}:{lineno}: feature indices must be strictly ascending"
                    )
                prev_idx = idx
                rows.append(row)
                cols.append(idx - 1)
                vals.append(val)
                max_col = max(max_col, idx)
    if not labels:
        raise ValueError(f"{path}: no records")
    d = max(max_col, n_features or 0)
    matrix = sparse.coo_matrix(
        (vals, (rows, cols)), shape=(len(labels), d), dtype=np.float64
    ).tocsr()
    label_arr = np.asarray(labels, dtype=np.int64)
    if set(np.unique(label_arr)) <= {-1, 1}:
        label_arr = (label_arr == 1).astype(np.int64)
    return Dataset(matrix, label_arr, name=path.stem)


def write_svmlight(dataset: Dataset, path: Union[str, Path]) -> None:
    """Serialize to svmlight text (1-based indices, zeros omitted)."""
    matrix = dataset.features
    if not sparse.issparse(matrix):
        matrix = sparse.csr_matrix(matrix)
    else:
        matrix = matrix.tocsr()
    with open(path, "w") as handle:
        for row, label in enumerate(dataset.labels):
            start, stop = matrix.indptr[row], matrix.indptr[row + 1]
            pairs = " ".join(
                f"{col + 1}:{val:.17g}"
                for col, val in zip(matrix.indices[start:stop], matrix.data[start:stop])
            )
            handle.write(f"{int(label)} {pairs}".rstrip() + "\n")


def parse_csv(
    source: Union[str, Path],
    label_column: Union[int, str] = -1,
    header: bool = False,
) -> Dataset:
    """Read a numeric CSV into a dense dataset.

    ``label_column`` is a 0-based column index (negative counts from the
    end) or, when ``header`` is set, a column name.
    """
    path = Path(source)
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        rows = [row for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no records")
    col_names = None
    if header:
        col_names = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise ValueError(f"{path}: no records after header")
    width = len(rows[0])
    if isinstance(label_column, str):
        if col_names is None:
            raise ValueError("named label_column requires header=True")
        try:
            label_idx = col_names.index(label_column)
        except ValueError as exc:
            raise ValueError(f"{path}: no column named {label_column!r}") from exc
    else:
        label_idx = label_column % width

    features = np.empty((len(rows), width - 1))
    labels = np.empty(len(rows), dtype=np.int64)
    for i, row in enumerate(rows):
        rowno = i + (2 if header else 1)
        if len(row) != width:
            raise ValueError(f"{path}: row {rowno} has {len(row)} cells, expected {width}")
        try:
            numeric = [float(cell) for cell in row]
        except ValueError as exc:
            raise ValueError(f"{path}: row {rowno} has a non-numeric cell") from exc
        label_f = numeric[label_idx]
        labels[i] = int(label_f)
        if labels[i] != label_f:
            raise ValueError(f"{path}: row {rowno} label {label_f} is not an integer")
        features[i] = [x for j, x in enumerate(numeric) if j != label_idx]
    if set(np.unique(labels)) <= {-1, 1}:
        labels = (labels == 1).astype(np.int64)
    return Dataset(features, labels, name=path.stem)


def make_tasks(train: Dataset, test: Dataset, min_positives: int) -> List[Task]:
    """Binarize one-vs-rest and drop classes with too few positives.

    A dataset whose labels are already {0, 1} yields at most the single
    "class 1" task.  Every retained class has at least ``min_positives``
    positive instances in the train and in the test split.
    """
    if train.d != test.d:
        raise ValueError(f"feature dimensions differ: {train.d} vs {test.d}")
    if min_positives < 1:
        raise ValueError("min_positives must be >= 1")
    labels = np.union1d(np.unique(train.labels), np.unique(test.labels))
    if set(labels.tolist()) <= {0, 1}:
        classes = [1]
    else:
        classes = [int(c) for c in labels]
    tasks = []
    for cls in classes:
        y_train = (train.labels == cls).astype(np.int64)
        y_test = (test.labels == cls).astype(np.int64)
        if y_train.sum() >= min_positives and y_test.sum() >= min_positives:
            tasks.append(
                Task(class_id=cls, train=train.with_labels(y_train), test=test.with_labels(y_test))
            )
    if not tasks:
        raise ValueError(f"no class has {min_positives}+ positives in both splits")
    return tasks


class _SplitMix64:
    """Tiny deterministic PRNG for cross-platform shuffles.

    State advances by the 64-bit golden-ratio constant 0x9E3779B97F4A7C15;
    outputs are finalized with the constants 0xBF58476D1CE4E5B9 and
    0x94D049BB133111EB and xor-shifts 30/27/31.
    """

    MASK = (1 << 64) - 1

    def __init__(self, seed: int) -> None:
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        # rejection sampling keeps the draw unbiased
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            draw = self.next_u64()
            if draw < limit:
                return draw % bound


def _shuffled_indices(n: int, seed: int) -> np.ndarray:
    rng = _SplitMix64(seed)
    order = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        order[i], order[j] = order[j], order[i]
    return order


def split(data: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic two-way split; first part gets ~``fraction`` of rows.

    The permutation is a Fisher-Yates shuffle driven by SplitMix64, so the
    same seed gives bitwise-identical splits everywhere.  Both parts are
    always non-empty.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be strictly between 0 and 1")
    if data.n < 2:
        raise ValueError("need at least two rows to split")
    order = _shuffled_indices(data.n, seed)
    size = int(round(data.n * fraction))
    size = min(max(size, 1), data.n - 1)
    return data.subset(order[:size]), data.subset(order[size:])


def macro_average(per_class_utilities) -> float:
    """Arithmetic mean over retained per-class utilities."""
    values = np.asarray(per_class_utilities, dtype=np.float64)
    if values.size == 0:
        raise ValueError("nothing to average")
    return float(values.mean())


def read_manifest(path: Union[str, Path]) -> dict[str, str]:
    """Parse a key=value manifest file; '#' starts a comment."""
    result: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        result[key.strip()] = value.strip()
    return result
