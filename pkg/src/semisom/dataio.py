"""Dataset loading, normalization, and supervision masking.

Supported inputs are plain CSV (optional header, label column by name, index,
or "auto" = last column) and flat ARFF with numeric attributes plus one class
attribute. Features are min-max normalized per column on load, labels are
encoded as dense integer ids, and a boolean mask records which labels the
trainer may see.
"""
from __future__ import annotations

import csv
import hashlib
import logging
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import UNLABELED
from .errors import InputError, ParameterError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    """An in-memory dataset: normalized features, optional labels, label mask.

    ``mask[i]`` means row i's label is visible to training; evaluation always
    uses the full ``labels``. ``class_names`` maps label ids back to their
    original spelling.
    """

    X: np.ndarray
    labels: np.ndarray | None
    mask: np.ndarray
    class_names: tuple[str, ...] = ()
    source: str = ""

    def __post_init__(self):
        if self.X.ndim != 2:
            raise InputError(f"features must be 2-D, got shape {self.X.shape}")
        n = self.X.shape[0]
        if self.labels is not None and self.labels.shape != (n,):
            raise InputError(f"labels shape {self.labels.shape} does not match {n} rows")
        if self.mask.shape != (n,) or self.mask.dtype != np.bool_:
            raise InputError("mask must be a boolean vector with one entry per row")
        if self.labels is None and bool(self.mask.any()):
            raise InputError("mask marks labels as visible but the dataset has none")

    @property
    def n_samples(self) -> int:
        return int(self.X.shape[0])

    @property
    def dim(self) -> int:
        return int(self.X.shape[1])

    @property
    def class_count(self) -> int:
        if self.class_names:
            return len(self.class_names)
        if self.labels is None:
            return 0
        return int(np.unique(self.labels).size)

    @property
    def fingerprint(self) -> str:
        """Short content hash of features and labels; masking leaves it unchanged."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.X, dtype=np.float64).tobytes())
        if self.labels is not None:
            h.update(np.ascontiguousarray(self.labels, dtype=np.int64).tobytes())
        return h.hexdigest()[:16]

    def effective_labels(self) -> np.ndarray:
        """Labels as the trainer sees them: hidden rows become UNLABELED."""
        if self.labels is None:
            return np.full(self.n_samples, UNLABELED, dtype=np.int64)
        return np.where(self.mask, self.labels, UNLABELED).astype(np.int64)

    @property
    def supervision_rate(self) -> float:
        return float(self.mask.mean()) if self.n_samples else 0.0


def normalize_minmax(X: np.ndarray) -> np.ndarray:
    """Scale each column to [0, 1]; constant columns collapse to 0.

    Applying it twice equals applying it once.
    """
    X = np.asarray(X, dtype=np.float64)
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    out = np.zeros_like(X)
    keep = span > 0
    out[:, keep] = (X[:, keep] - lo[keep]) / span[keep]
    return out


def apply_mask(dataset: Dataset, rate: float, seed: int) -> Dataset:
    """Return a copy of the dataset with a fraction of labels visible.

    Picks round(rate * S) rows uniformly at random, with no per-class
    balancing. rate=0 hides every label, rate=1 reveals all.
    """
    if not 0.0 <= rate <= 1.0:
        raise ParameterError(f"supervision rate must be in [0, 1], got {rate}")
    if dataset.labels is None:
        raise InputError("dataset has no labels to reveal")
    n = dataset.n_samples
    k = int(np.floor(rate * n + 0.5))
    rng = np.random.default_rng(seed)
    chosen = rng.choice(n, size=k, replace=False)
    mask = np.zeros(n, dtype=bool)
    mask[chosen] = True
    return Dataset(
        X=dataset.X,
        labels=dataset.labels,
        mask=mask,
        class_names=dataset.class_names,
        source=dataset.source,
    )


# ---------------------------------------------------------------------------
# loading


def load_dataset(path, fmt: str | None = None, label_column="auto") -> Dataset:
    """Read a CSV or ARFF file into a normalized Dataset.

    ``fmt`` is inferred from the file suffix when omitted. ``label_column``
    may be "auto" (last column), None (no labels), a column index, or a
    column/attribute name.
    """
    path = Path(path)
    if fmt is None:
        fmt = "arff" if path.suffix.lower() == ".arff" else "csv"
    if fmt == "csv":
        features, raw_labels = _parse_csv(path, label_column)
    elif fmt == "arff":
        features, raw_labels = _parse_arff(path, label_column)
    else:
        raise ParameterError(f"unknown format {fmt!r}, expected 'csv' or 'arff'")

    X = normalize_minmax(features)
    if raw_labels is None:
        labels, names = None, ()
        mask = np.zeros(X.shape[0], dtype=bool)
    else:
        labels, names = raw_labels
        mask = np.ones(X.shape[0], dtype=bool)
    return Dataset(X=X, labels=labels, mask=mask, class_names=names, source=str(path))


def _encode_labels(values: list[str]) -> tuple[np.ndarray, tuple[str, ...]]:
    """Map raw label strings to dense ids: numerically when every value parses
    as a number, lexicographically otherwise."""
    try:
        numeric = [float(v) for v in values]
    except ValueError:
        names = sorted(set(values))
        index = {name: i for i, name in enumerate(names)}
        return np.array([index[v] for v in values], dtype=np.int64), tuple(names)
    uniq = sorted(set(numeric))
    index = {v: i for i, v in enumerate(uniq)}
    names = tuple(str(int(v)) if float(v).is_integer() else repr(v) for v in uniq)
    return np.array([index[v] for v in numeric], dtype=np.int64), names


def _parse_csv(path: Path, label_column):
    rows: list[tuple[int, list[str]]] = []
    try:
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                cells = [c.strip() for c in row]
                if not cells or all(c == "" for c in cells):
                    continue
                rows.append((lineno, cells))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise InputError(f"{path}: file contains no data rows")

    width = len(rows[0][1])
    for lineno, cells in rows:
        if len(cells) != width:
            raise InputError(
                f"{path}: line {lineno} has {len(cells)} columns, expected {width}"
            )

    label_idx = _resolve_csv_label(rows[0][1], width, label_column, path)
    feature_cols = [c for c in range(width) if c != label_idx]
    if not feature_cols:
        raise InputError(f"{path}: no feature columns besides the label")

    # A header is any first row whose feature cells are not all numeric.
    start = 0
    if isinstance(label_column, str) and label_column not in ("auto",):
        start = 1  # the label column was matched against a header by name
    elif not all(_is_float(rows[0][1][c]) for c in feature_cols):
        start = 1
    if start == 1 and len(rows) == 1:
        raise InputError(f"{path}: only a header row, no data")

    features = np.empty((len(rows) - start, len(feature_cols)))
    raw_labels: list[str] = []
    for out_row, (lineno, cells) in enumerate(rows[start:]):
        for out_col, c in enumerate(feature_cols):
            try:
                features[out_row, out_col] = float(cells[c])
            except ValueError:
                raise InputError(
                    f"{path}: line {lineno}, column {c + 1}: "
                    f"{cells[c]!r} is not a number"
                ) from None
        if label_idx is not None:
            raw_labels.append(cells[label_idx])

    if label_idx is None:
        return features, None
    return features, _encode_labels(raw_labels)


def _resolve_csv_label(first_row: list[str], width: int, label_column, path: Path) -> int | None:
    if label_column is None:
        return None
    if label_column == "auto":
        return width - 1
    if isinstance(label_column, int):
        idx = label_column + width if label_column < 0 else label_column
        if not 0 <= idx < width:
            raise InputError(f"{path}: label column {label_column} out of range for {width} columns")
        return idx
    if isinstance(label_column, str):
        if label_column in first_row:
            return first_row.index(label_column)
        raise InputError(f"{path}: no header column named {label_column!r}")
    raise ParameterError("label_column must be 'auto', None, an index, or a name")


def _is_float(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


_ATTR_RE = re.compile(
    r"@attribute\s+(?:'(?P<q1>[^']*)'|\"(?P<q2>[^\"]*)\"|(?P<plain>\S+))\s+(?P<type>.+)$",
    re.IGNORECASE,
)


def _parse_arff(path: Path, label_column):
    attrs: list[tuple[str, list[str] | None]] = []  # (name, nominal values or None)
    data: list[tuple[int, list[str]]] = []
    in_data = False
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("%"):
                    continue
                if in_data:
                    if line.startswith("{"):
                        raise InputError(f"{path}: line {lineno}: sparse ARFF is not supported")
                    data.append((lineno, [c.strip().strip("'\"") for c in line.split(",")]))
                    continue
                low = line.lower()
                if low.startswith("@relation"):
                    continue
                if low.startswith("@data"):
                    in_data = True
                    continue
                if low.startswith("@attribute"):
                    attrs.append(_parse_attribute(line, path, lineno))
                    continue
                raise InputError(f"{path}: line {lineno}: unexpected {line[:60]!r}")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc

    if not attrs:
        raise InputError(f"{path}: no @attribute declarations")
    if not data:
        raise InputError(f"{path}: no data rows")

    label_idx = _resolve_arff_label(attrs, label_column, path)
    feature_cols = [c for c in range(len(attrs)) if c != label_idx]
    if not feature_cols:
        raise InputError(f"{path}: no feature attributes besides the label")
    for c in feature_cols:
        name, nominal = attrs[c]
        if nominal is not None:
            raise InputError(
                f"{path}: attribute {name!r} is nominal; only the label may be"
            )

    kept: list[tuple[int, list[str]]] = []
    dropped = 0
    for lineno, cells in data:
        if len(cells) != len(attrs):
            raise InputError(
                f"{path}: line {lineno} has {len(cells)} values, expected {len(attrs)}"
            )
        if any(cells[c] == "?" for c in range(len(attrs))):
            dropped += 1
            continue
        kept.append((lineno, cells))
    if dropped:
        log.warning("%s: dropped %d rows with missing values", path, dropped)
    if not kept:
        raise InputError(f"{path}: every data row has missing values")

    features = np.empty((len(kept), len(feature_cols)))
    raw_labels: list[str] = []
    for out_row, (lineno, cells) in enumerate(kept):
        for out_col, c in enumerate(feature_cols):
            try:
                features[out_row, out_col] = float(cells[c])
            except ValueError:
                raise InputError(
                    f"{path}: line {lineno}, attribute {attrs[c][0]!r}: "
                    f"{cells[c]!r} is not a number"
                ) from None
        if label_idx is not None:
            raw_labels.append(cells[label_idx])

    if label_idx is None:
        return features, None

    name, nominal = attrs[label_idx]
    if nominal is None:
        return features, _encode_labels(raw_labels)
    index = {v: i for i, v in enumerate(nominal)}
    try:
        ids = np.array([index[v] for v in raw_labels], dtype=np.int64)
    except KeyError as exc:
        raise InputError(
            f"{path}: label value {exc.args[0]!r} not among declared values of {name!r}"
        ) from None
    return features, (ids, tuple(nominal))


def _parse_attribute(line: str, path: Path, lineno: int) -> tuple[str, list[str] | None]:
    m = _ATTR_RE.match(line)
    if m is None:
        raise InputError(f"{path}: line {lineno}: malformed @attribute")
    name = m.group("q1") or m.group("q2") or m.group("plain")
    kind = m.group("type").strip()
    if kind.startswith("{"):
        if not kind.endswith("}"):
            raise InputError(f"{path}: line {lineno}: unterminated nominal list")
        values = [v.strip().strip("'\"") for v in kind[1:-1].split(",")]
        if not values or any(v == "" for v in values):
            raise InputError(f"{path}: line {lineno}: empty nominal value")
        return name, values
    if kind.lower().split()[0] in ("numeric", "real", "integer"):
        return name, None
    raise InputError(
        f"{path}: line {lineno}: attribute type {kind!r} not supported "
        "(numeric, real, integer, or a nominal list)"
    )


def _resolve_arff_label(attrs, label_column, path: Path) -> int | None:
    if label_column is None:
        return None
    if label_column == "auto":
        return len(attrs) - 1
    if isinstance(label_column, int):
        idx = label_column + len(attrs) if label_column < 0 else label_column
        if not 0 <= idx < len(attrs):
            raise InputError(
                f"{path}: label column {label_column} out of range for {len(attrs)} attributes"
            )
        return idx
    if isinstance(label_column, str):
        for i, (name, _) in enumerate(attrs):
            if name.lower() == label_column.lower():
                return i
        raise InputError(f"{path}: no attribute named {label_column!r}")
    raise ParameterError("label_column must be 'auto', None, an index, or a name")
