"""CSV ingestion and the in-memory dataset container.

Datasets are dense: every feature cell must parse as a number, labels are
1-based integers in a declared range 1..K.  Missing or malformed cells are
rejected with their (row, column) position, counting data rows from 1 below
the header and columns from 1 in file order.  Categorical features must be
encoded upstream.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


class CsvFormatError(ValidationError):
    """Malformed CSV input; message carries the offending location."""


@dataclass(frozen=True)
class Dataset:
    feature_names: list[str]
    features: np.ndarray
    labels: np.ndarray
    k: int
    label_name: str = field(default="label")

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise ValidationError(f"features must be a nonempty 2-D array, got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValidationError("features contain non-finite values")
        if y.shape != (x.shape[0],):
            raise ValidationError("labels must align with feature rows")
        if len(self.feature_names) != x.shape[1]:
            raise ValidationError("feature_names must match feature columns")
        if self.k < 2:
            raise ValidationError("need at least 2 classes")
        if y.min() < 1 or y.max() > self.k:
            raise ValidationError(f"labels must lie in 1..{self.k}")
        x = x.copy()
        y = y.copy()
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", list(self.feature_names))

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices)
        return Dataset(
            feature_names=self.feature_names,
            features=self.features[idx],
            labels=self.labels[idx],
            k=self.k,
            label_name=self.label_name,
        )

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k + 1)[1:]


def load_csv(path, label_column: str, k: int | None = None) -> Dataset:
    """Read a UTF-8 CSV with a header row into a Dataset.

    All columns except ``label_column`` are parsed as float features.  When
    ``k`` is omitted it is inferred as the maximum label; classes in 1..k
    with no samples trigger a warning.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file") from None
        header = [name.strip() for name in header]
        if label_column not in header:
            raise CsvFormatError(f"{path}: no column named {label_column!r} in header")
        label_idx = header.index(label_column)
        feature_names = [name for i, name in enumerate(header) if i != label_idx]
        if not feature_names:
            raise CsvFormatError(f"{path}: no feature columns besides the label")

        rows, labels = [], []
        for row_no, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise CsvFormatError(
                    f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}"
                )
            feats = []
            for col_no, cell in enumerate(row, start=1):
                cell = cell.strip()
                if col_no - 1 == label_idx:
                    try:
                        label = int(cell)
                    except ValueError:
                        raise CsvFormatError(
                            f"{path}: label at row {row_no} is not an integer: {cell!r}"
                        ) from None
                    if label < 1:
                        raise CsvFormatError(
                            f"{path}: labels are 1-based; row {row_no} has label {label}"
                        )
                    labels.append(label)
                    continue
                if cell == "":
                    raise CsvFormatError(
                        f"{path}: missing value at row {row_no}, column {col_no}"
                    )
                try:
                    feats.append(float(cell))
                except ValueError:
                    raise CsvFormatError(
                        f"{path}: non-numeric value at row {row_no}, column {col_no}: {cell!r}"
                    ) from None
            rows.append(feats)

    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    labels_arr = np.array(labels, dtype=np.int64)
    max_label = int(labels_arr.max())
    if k is None:
        k = max_label
    elif max_label > k:
        raise CsvFormatError(f"{path}: label {max_label} exceeds declared k={k}")
    missing = sorted(set(range(1, k + 1)) - set(labels_arr.tolist()))
    if missing:
        warnings.warn(f"classes {missing} absent from data; using k={k}", stacklevel=2)
    return Dataset(
        feature_names=feature_names,
        features=np.array(rows, dtype=np.float64),
        labels=labels_arr,
        k=k,
        label_name=label_column,
    )


def load_features_csv(path, drop_column: str | None = None) -> tuple[list[str], np.ndarray]:
    """Read a header + numeric matrix, optionally dropping one column
    (e.g. a label column present in a prediction input).  Same cell
    diagnostics as load_csv."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [name.strip() for name in next(reader)]
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file") from None
        drop_idx = None
        if drop_column is not None and drop_column in header:
            drop_idx = header.index(drop_column)
        names = [name for i, name in enumerate(header) if i != drop_idx]
        if not names:
            raise CsvFormatError(f"{path}: no feature columns")
        rows = []
        for row_no, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise CsvFormatError(
                    f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}"
                )
            feats = []
            for col_no, cell in enumerate(row, start=1):
                if col_no - 1 == drop_idx:
                    continue
                cell = cell.strip()
                if cell == "":
                    raise CsvFormatError(
                        f"{path}: missing value at row {row_no}, column {col_no}"
                    )
                try:
                    feats.append(float(cell))
                except ValueError:
                    raise CsvFormatError(
                        f"{path}: non-numeric value at row {row_no}, column {col_no}: {cell!r}"
                    ) from None
            rows.append(feats)
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    return names, np.array(rows, dtype=np.float64)


def save_csv(dataset: Dataset, path) -> None:
    """Write a Dataset back out; numbers as shortest round-trip decimals."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(dataset.feature_names + [dataset.label_name])
        for feats, label in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in feats] + [int(label)])
