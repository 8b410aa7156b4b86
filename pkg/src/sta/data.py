"""Datasets: CSV loading, min-max normalisation, one-hot targets and toy generators."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DataError, InvalidArgumentError, UnknownDatasetError

BUNDLED = ("iris", "wine")
PRESETS = ("toy3", "toy4")
LABEL_COLUMN = "class"


@dataclass
class Dataset:
    """Feature matrix with optional integer labels.

    ``norm_min``/``norm_max`` hold the raw per-feature range once the set has
    been normalised; they are ``None`` on raw data.
    """

    X: np.ndarray
    labels: Optional[np.ndarray] = None
    class_names: tuple[str, ...] = ()
    feature_names: tuple[str, ...] = ()
    norm_min: Optional[np.ndarray] = None
    norm_max: Optional[np.ndarray] = None
    source: str = ""

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        if self.X.ndim != 2:
            raise DataError(f"feature matrix must be 2-D, got shape {self.X.shape}")
        if not self.feature_names:
            self.feature_names = tuple(f"x{i}" for i in range(self.X.shape[1]))
        self.feature_names = tuple(self.feature_names)
        self.class_names = tuple(self.class_names)
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.X.shape[0],):
                raise DataError(f"{self.labels.shape[0]} labels for {self.X.shape[0]} samples")
            if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= len(self.class_names)):
                raise DataError("labels must index into class_names")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def num_classes(self) -> int:
        return len(self.class_names) if self.labels is not None else 0

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    @property
    def is_normalized(self) -> bool:
        return self.norm_min is not None

    def targets(self) -> np.ndarray:
        """One-hot target matrix (n, C); (n, 0) when unlabeled."""
        if self.labels is None:
            return np.zeros((self.n, 0))
        return one_hot_matrix(self.labels, self.num_classes)

    def without_labels(self) -> "Dataset":
        return replace(self, labels=None, class_names=())

    def subset(self, mask) -> "Dataset":
        mask = np.asarray(mask)
        return replace(
            self,
            X=self.X[mask],
            labels=None if self.labels is None else self.labels[mask],
        )


@dataclass(frozen=True)
class Cluster:
    mean: tuple[float, ...]
    stddev: float
    count: int
    label: int


@dataclass(frozen=True)
class ClusterSpec:
    clusters: tuple[Cluster, ...]
    class_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.clusters:
            raise InvalidArgumentError("cluster spec is empty")
        dims = {len(c.mean) for c in self.clusters}
        if len(dims) != 1:
            raise InvalidArgumentError("all cluster means must share one dimension")
        for c in self.clusters:
            if c.count < 1:
                raise InvalidArgumentError(f"cluster count must be >= 1, got {c.count}")
            if not c.stddev > 0:
                raise InvalidArgumentError(f"cluster stddev must be positive, got {c.stddev}")
        labels = sorted({c.label for c in self.clusters})
        if labels != list(range(len(labels))):
            raise InvalidArgumentError(f"class labels must be contiguous from 0, got {labels}")
        if self.class_names and len(self.class_names) != len(labels):
            raise InvalidArgumentError("class_names length does not match the number of classes")

    @property
    def num_classes(self) -> int:
        return len({c.label for c in self.clusters})


def load_csv(path, label_column: Optional[str] = None) -> Dataset:
    """Read a header-first CSV; every column except ``label_column`` must be numeric.

    Label strings are mapped to indices in order of first appearance.
    """
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"data file not found: {path}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        label_idx = None
        if label_column is not None:
            if label_column not in header:
                raise DataError(f"{path}: label column {label_column!r} not in header {header}")
            label_idx = header.index(label_column)
        feat_idx = [i for i in range(len(header)) if i != label_idx]
        if not feat_idx:
            raise DataError(f"{path}: no feature columns")
        rows, raw_labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: line {lineno} has {len(row)} fields, expected {len(header)}")
            values = []
            for i in feat_idx:
                try:
                    values.append(float(row[i]))
                except ValueError:
                    raise DataError(
                        f"{path}: non-numeric value {row[i]!r} at line {lineno}, column {header[i]!r}"
                    ) from None
            rows.append(values)
            if label_idx is not None:
                raw_labels.append(row[label_idx].strip())
    if not rows:
        raise DataError(f"{path}: no data rows")
    X = np.array(rows, dtype=float)
    if not np.isfinite(X).all():
        raise DataError(f"{path}: features must be finite")
    labels, class_names = None, ()
    if label_idx is not None:
        index: dict[str, int] = {}
        for name in raw_labels:
            index.setdefault(name, len(index))
        labels = np.array([index[name] for name in raw_labels], dtype=np.int64)
        class_names = tuple(index)
    return Dataset(
        X=X,
        labels=labels,
        class_names=class_names,
        feature_names=tuple(header[i] for i in feat_idx),
        source=str(path),
    )


def save_csv(dataset: Dataset, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = list(dataset.feature_names)
        if dataset.has_labels:
            header.append(LABEL_COLUMN)
        writer.writerow(header)
        for i, row in enumerate(dataset.X):
            cells = [repr(float(v)) for v in row]
            if dataset.has_labels:
                cells.append(dataset.class_names[dataset.labels[i]])
            writer.writerow(cells)
    return path


def _scale(X: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    span = hi - lo
    const = span == 0
    out = (X - lo) / np.where(const, 1.0, span)
    out[:, const] = 0.5
    return out


def normalize(raw: Dataset) -> Dataset:
    """Min-max scale every feature to [0, 1]; constant features become 0.5."""
    if raw.n < 1:
        raise DataError("cannot normalize an empty dataset")
    lo = raw.X.min(axis=0)
    hi = raw.X.max(axis=0)
    return replace(raw, X=_scale(raw.X, lo, hi), norm_min=lo, norm_max=hi)


def apply_normalization(raw: Dataset, norm_min, norm_max) -> Dataset:
    """Scale ``raw`` with a previously fitted range (values may leave [0, 1])."""
    lo = np.asarray(norm_min, dtype=float)
    hi = np.asarray(norm_max, dtype=float)
    if lo.shape != (raw.d,) or hi.shape != (raw.d,):
        raise DataError(f"normalization has {lo.shape[0]} features, data has {raw.d}")
    return replace(raw, X=_scale(raw.X, lo, hi), norm_min=lo, norm_max=hi)


def one_hot(label: int, C: int) -> np.ndarray:
    if not (0 <= label < C) or int(label) != label:
        raise InvalidArgumentError(f"label {label} out of range [0, {C})")
    out = np.zeros(C)
    out[int(label)] = 1.0
    return out


def one_hot_matrix(labels, C: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= C):
        raise InvalidArgumentError(f"labels out of range [0, {C})")
    out = np.zeros((labels.size, C))
    out[np.arange(labels.size), labels] = 1.0
    return out


def gen_gaussian_clusters(spec: ClusterSpec, seed: int) -> Dataset:
    """Draw each cluster in turn from an isotropic normal; labels never touch the generator."""
    rng = np.random.default_rng(seed)
    blocks, labels = [], []
    for c in spec.clusters:
        mean = np.asarray(c.mean, dtype=float)
        blocks.append(rng.normal(loc=mean, scale=c.stddev, size=(c.count, mean.size)))
        labels.extend([c.label] * c.count)
    names = spec.class_names or tuple(f"class_{i}" for i in range(spec.num_classes))
    d = len(spec.clusters[0].mean)
    return Dataset(
        X=np.vstack(blocks),
        labels=np.array(labels),
        class_names=names,
        feature_names=tuple(f"x{i}" for i in range(d)),
        source=f"gaussian-clusters(seed={seed})",
    )


def preset_spec(name: str) -> ClusterSpec:
    """Four 3-D clusters: an overlapping pair near the origin and a separated pair far out.

    ``toy3`` gives the far pair one shared label, ``toy4`` labels them apart.
    """
    if name not in PRESETS:
        raise UnknownDatasetError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    far_a, far_b = (2, 2) if name == "toy3" else (2, 3)
    clusters = (
        Cluster((0.0, 0.0, 0.0), 0.8, 100, 0),
        Cluster((1.5, 1.5, 0.0), 0.8, 100, 1),
        Cluster((5.0, 5.0, 5.0), 0.6, 100, far_a),
        Cluster((7.0, 7.0, 7.0), 0.6, 100, far_b),
    )
    names = ("A", "B", "C") if name == "toy3" else ("A", "B", "C", "D")
    return ClusterSpec(clusters, names)


def gen_preset(name: str, seed: int = 0) -> Dataset:
    ds = gen_gaussian_clusters(preset_spec(name), seed)
    return replace(ds, source=f"{name}(seed={seed})")


def data_dir() -> Path:
    override = os.environ.get("STA_DATA_DIR")
    if override:
        return Path(override)
    return Path(__file__).resolve().parent / "data"


def bundled_dataset(name: str) -> Dataset:
    """The shipped UCI Iris or Wine table, unnormalised."""
    if name not in BUNDLED:
        raise UnknownDatasetError(
            f"unknown dataset {name!r}; bundled: {', '.join(BUNDLED)} (supply other data with load_csv)"
        )
    ds = load_csv(data_dir() / f"{name}.csv", label_column=LABEL_COLUMN)
    return replace(ds, source=name)


def resolve_dataset(name: str, seed: int = 0) -> Dataset:
    """Bundled table or generated toy preset, by name."""
    if name in PRESETS:
        return gen_preset(name, seed)
    return bundled_dataset(name)


def dataset_names() -> Sequence[str]:
    return BUNDLED + PRESETS
