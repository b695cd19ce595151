"""Dataset ingestion, synthesis, masking and serialization.

Feature matrices are stored features-per-row inside the library
(columns are samples). On disk, CSV files hold one sample per row with
an optional final integer column named ``label``; the ``binmat`` format
is a little-endian binary container for one dense float64 matrix:

    bytes 0..3   magic b"SAHD"
    byte  4      version (0x01)
    bytes 5..12  rows, unsigned 64-bit little-endian
    bytes 13..20 cols, unsigned 64-bit little-endian
    bytes 21..   rows*cols float64 payload, column-major

binmat carries no labels; an optional sidecar file ``<path>.labels``
with one integer per line supplies them (-1 marks unlabeled).
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, InputError, ParameterError
from .hypergraph import UNLABELED

BINMAT_MAGIC = b"SAHD"
BINMAT_VERSION = 1
_HEADER_LEN = 21


@dataclass
class DatasetBundle:
    """Train/test split with labels; test parts may be absent.

    Feature matrices are (dim, n_samples); label vectors use -1 for
    unlabeled entries. Test classes must be a subset of train classes.
    """

    train_features: np.ndarray
    train_labels: np.ndarray
    test_features: np.ndarray | None = None
    test_labels: np.ndarray | None = None

    def __post_init__(self):
        X = np.asarray(self.train_features, dtype=float)
        y = np.asarray(self.train_labels)
        object.__setattr__(self, "train_features", X)
        object.__setattr__(self, "train_labels", y)
        if X.ndim != 2 or X.shape[1] < 1:
            raise ParameterError("train features must be 2-d and non-empty")
        if y.shape != (X.shape[1],):
            raise ParameterError("one training label per sample required")
        if not np.all(np.isfinite(X)):
            raise InputError("train features contain non-finite entries")
        if self.test_features is not None:
            Xt = np.asarray(self.test_features, dtype=float)
            object.__setattr__(self, "test_features", Xt)
            if Xt.ndim != 2 or Xt.shape[0] != X.shape[0]:
                raise InputError(
                    f"test feature dim {Xt.shape[0] if Xt.ndim == 2 else '?'}"
                    f" != train dim {X.shape[0]}"
                )
            if not np.all(np.isfinite(Xt)):
                raise InputError("test features contain non-finite entries")
            if self.test_labels is None:
                object.__setattr__(
                    self, "test_labels", np.full(Xt.shape[1], UNLABELED)
                )
            yt = np.asarray(self.test_labels)
            object.__setattr__(self, "test_labels", yt)
            if yt.shape != (Xt.shape[1],):
                raise ParameterError("one test label per sample required")
            train_classes = set(int(c) for c in y if c != UNLABELED)
            test_classes = set(int(c) for c in yt if c != UNLABELED)
            if not test_classes <= train_classes:
                raise InputError(
                    f"test classes {sorted(test_classes - train_classes)}"
                    " never appear in training data"
                )


def _parse_label(token, line_num):
    try:
        return int(token)
    except ValueError:
        raise FormatError(f"line {line_num}: label {token!r} is not an integer")


def load_csv(path):
    """Read a samples-as-rows CSV into (features, labels).

    A header is assumed when the first row has any non-numeric cell; a
    final header column named ``label`` holds integer labels. Returns
    the (dim, n_samples) feature matrix and the label vector, or None in
    place of labels for feature-only files.
    """
    rows = []
    line_nums = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for row in reader:
            if not row or all(cell.strip() == "" for cell in row):
                continue
            rows.append([cell.strip() for cell in row])
            line_nums.append(reader.line_num)
    if not rows:
        raise FormatError(f"{path}: no data rows")

    def _numeric(cell):
        try:
            float(cell)
            return True
        except ValueError:
            return False

    has_header = not all(_numeric(c) for c in rows[0])
    header = rows[0] if has_header else None
    data_rows = rows[1:] if has_header else rows
    data_lines = line_nums[1:] if has_header else line_nums
    if not data_rows:
        raise FormatError(f"{path}: header but no data rows")
    has_labels = has_header and header[-1] == "label"

    width = len(data_rows[0]) if header is None else len(header)
    features = []
    labels = []
    for row, line_num in zip(data_rows, data_lines):
        if len(row) != width:
            raise FormatError(
                f"line {line_num}: expected {width} fields, got {len(row)}"
            )
        feature_cells = row[:-1] if has_labels else row
        try:
            features.append([float(c) for c in feature_cells])
        except ValueError:
            bad = next(c for c in feature_cells if not _numeric(c))
            raise FormatError(f"line {line_num}: non-numeric value {bad!r}")
        if has_labels:
            labels.append(_parse_label(row[-1], line_num))
    X = np.asarray(features, dtype=float).T
    if X.shape[0] < 1:
        raise FormatError(f"{path}: rows carry no feature columns")
    return X, (np.asarray(labels, dtype=int) if has_labels else None)


def save_csv(path, X, labels=None):
    """Write a (dim, n_samples) matrix as a samples-as-rows CSV."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ParameterError("X must be 2-d")
    if labels is not None:
        labels = np.asarray(labels)
        if labels.shape != (X.shape[1],):
            raise ParameterError("one label per sample required")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = [f"f{i}" for i in range(X.shape[0])]
        if labels is not None:
            header.append("label")
        writer.writerow(header)
        for j in range(X.shape[1]):
            row = [repr(float(v)) for v in X[:, j]]
            if labels is not None:
                row.append(str(int(labels[j])))
            writer.writerow(row)


def save_binmat(path, X):
    """Write one dense float64 matrix in the binmat container format."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ParameterError("X must be 2-d")
    rows, cols = X.shape
    with open(path, "wb") as fh:
        fh.write(BINMAT_MAGIC)
        fh.write(bytes([BINMAT_VERSION]))
        fh.write(struct.pack("<QQ", rows, cols))
        fh.write(np.asarray(X, dtype="<f8").tobytes(order="F"))


def load_binmat(path):
    """Read a binmat file back into a float64 matrix."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER_LEN or data[:4] != BINMAT_MAGIC:
        raise FormatError(f"{path}: not a binmat file")
    if data[4] != BINMAT_VERSION:
        raise FormatError(f"{path}: unsupported binmat version {data[4]}")
    rows, cols = struct.unpack_from("<QQ", data, 5)
    expected = _HEADER_LEN + rows * cols * 8
    if len(data) != expected:
        raise FormatError(
            f"{path}: payload is {len(data) - _HEADER_LEN} bytes,"
            f" expected {rows * cols * 8}"
        )
    flat = np.frombuffer(data, dtype="<f8", count=rows * cols, offset=_HEADER_LEN)
    return flat.reshape((rows, cols), order="F").astype(float, copy=True)


def load_labels(path):
    """Read a sidecar label file: one integer per line."""
    out = []
    with open(path) as fh:
        for i, line in enumerate(fh, start=1):
            token = line.strip()
            if token:
                out.append(_parse_label(token, i))
    if not out:
        raise FormatError(f"{path}: no labels")
    return np.asarray(out, dtype=int)


def save_labels(path, labels):
    with open(path, "w") as fh:
        for value in np.asarray(labels, dtype=int):
            fh.write(f"{int(value)}\n")


def load_features(path, fmt="csv"):
    """Load (features, labels-or-None) in either on-disk format."""
    if fmt == "csv":
        return load_csv(path)
    if fmt == "binmat":
        X = load_binmat(path)
        sidecar = Path(f"{path}.labels")
        labels = load_labels(sidecar) if sidecar.exists() else None
        if labels is not None and labels.shape != (X.shape[1],):
            raise FormatError(
                f"{sidecar}: {labels.shape[0]} labels for {X.shape[1]} samples"
            )
        return X, labels
    raise ParameterError(f"unknown format {fmt!r}")


def make_synthetic(n_classes, per_class_train, per_class_test, dim,
                   noise_sigma, seed):
    """Gaussian blobs around well-separated unit-sphere class centers.

    Centers are rejection-sampled until every pairwise angle reaches
    60 degrees (dot product <= 0.5); exhausting 10**4 draws raises
    ParameterError (dimension too small for the class count). Each
    sample is its center plus isotropic Gaussian noise whose expected
    Euclidean norm is noise_sigma (per-coordinate standard deviation
    noise_sigma/sqrt(dim)), so noise_sigma measures corruption relative
    to the unit-norm centers regardless of dim. Samples are grouped
    class-major. Deterministic for a fixed seed.
    """
    if n_classes < 2:
        raise ParameterError("need at least two classes")
    if per_class_train < 1 or per_class_test < 0:
        raise ParameterError("per-class sample counts out of range")
    if dim < 1:
        raise ParameterError("dim must be at least 1")
    if not (np.isfinite(noise_sigma) and noise_sigma >= 0):
        raise ParameterError("noise_sigma must be a nonnegative real")
    rng = np.random.default_rng(seed)
    centers = []
    tries = 0
    while len(centers) < n_classes:
        tries += 1
        if tries > 10_000:
            raise ParameterError(
                f"could not place {n_classes} centers with 60 degree"
                f" separation in dimension {dim}"
            )
        v = rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        if all(float(np.dot(v, c)) <= 0.5 for c in centers):
            centers.append(v)

    per_coordinate = noise_sigma / np.sqrt(dim)

    def _draw(per_class):
        blocks, labels = [], []
        for c, center in enumerate(centers):
            noise = rng.standard_normal((dim, per_class))
            blocks.append(center[:, None] + per_coordinate * noise)
            labels.extend([c] * per_class)
        return np.hstack(blocks), np.asarray(labels, dtype=int)

    X_train, y_train = _draw(per_class_train)
    if per_class_test > 0:
        X_test, y_test = _draw(per_class_test)
    else:
        X_test, y_test = None, None
    return DatasetBundle(X_train, y_train, X_test, y_test)


def apply_mask(X, fraction, seed):
    """Zero floor(fraction*dim) coordinates per sample, chosen per sample.

    fraction must lie in [0, 1); fraction 0 returns an unmodified copy.
    Deterministic for a fixed seed.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ParameterError("X must be 2-d")
    if not (0.0 <= fraction < 1.0):
        raise ParameterError("mask fraction must lie in [0, 1)")
    masked = X.copy()
    dim = X.shape[0]
    count = int(fraction * dim)
    if count == 0:
        return masked
    rng = np.random.default_rng(seed)
    for j in range(X.shape[1]):
        idx = rng.choice(dim, size=count, replace=False)
        masked[idx, j] = 0.0
    return masked
