"""Transcript, label, and feature-table loading plus dataset alignment.

All loaders are pure given the filesystem snapshot and return immutable
structures. Subject ids are file stems, NFC-normalized, compared
case-sensitively. CSV dialect everywhere: comma separator, ``.`` decimal
point, first row is the header, UTF-8, no quoting.
"""

from __future__ import annotations

import csv
import logging
import math
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import DataError, UsageError

log = logging.getLogger(__name__)

CLASS_POSITIVE = "ad"
CLASS_NEGATIVE = "cn"
CLASS_LABELS = (CLASS_POSITIVE, CLASS_NEGATIVE)

MISSING_TOKEN = "NA"

EGEMAPS_WIDTH = 88
EMBEDDING_WIDTH = 768


@dataclass(frozen=True)
class Document:
    """One subject's transcript."""

    id: str
    text: str


@dataclass(frozen=True)
class DocumentSet:
    documents: tuple[Document, ...]

    def __post_init__(self) -> None:
        seen = set()
        for doc in self.documents:
            if not doc.id:
                raise DataError("document with empty id")
            if doc.id in seen:
                raise DataError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(doc.id for doc in self.documents)

    def by_id(self, doc_id: str) -> Document:
        for doc in self.documents:
            if doc.id == doc_id:
                return doc
        raise KeyError(doc_id)


@dataclass(frozen=True)
class LabelMap:
    """Subject id -> class label, labels restricted to {ad, cn}."""

    entries: Mapping[str, str]

    def __post_init__(self) -> None:
        for subject, label in self.entries.items():
            if label not in CLASS_LABELS:
                raise DataError(f"unknown label {label!r} for id {subject!r}")

    def __contains__(self, subject: str) -> bool:
        return subject in self.entries

    def __getitem__(self, subject: str) -> str:
        return self.entries[subject]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class FeatureTable:
    """Named dense feature matrix with one row per subject id."""

    ids: tuple[str, ...]
    column_names: tuple[str, ...]
    values: np.ndarray  # (n_rows, n_cols) float64

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DataError("feature values must be a 2-D matrix")
        if values.shape != (len(self.ids), len(self.column_names)):
            raise DataError(
                f"feature matrix shape {values.shape} does not match "
                f"{len(self.ids)} ids x {len(self.column_names)} columns"
            )
        if len(set(self.ids)) != len(self.ids):
            raise DataError("duplicate ids in feature table")
        if len(set(self.column_names)) != len(self.column_names):
            raise DataError("duplicate column names in feature table")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_rows(self) -> int:
        return len(self.ids)

    @property
    def width(self) -> int:
        return len(self.column_names)

    def subset_rows(self, indices: Sequence[int]) -> "FeatureTable":
        idx = list(indices)
        return FeatureTable(
            ids=tuple(self.ids[i] for i in idx),
            column_names=self.column_names,
            values=self.values[idx, :].copy() if idx else np.empty((0, self.width)),
        )

    def subset_columns(self, names: Sequence[str]) -> "FeatureTable":
        pos = {name: j for j, name in enumerate(self.column_names)}
        missing = [name for name in names if name not in pos]
        if missing:
            raise DataError(f"missing feature column(s): {', '.join(missing)}")
        cols = [pos[name] for name in names]
        values = self.values[:, cols] if cols else np.empty((self.n_rows, 0))
        return FeatureTable(ids=self.ids, column_names=tuple(names), values=values.copy())

    def row_for(self, subject: str) -> np.ndarray:
        return self.values[self.ids.index(subject)]


@dataclass(frozen=True)
class Dataset:
    """Feature table joined with aligned class labels."""

    table: FeatureTable
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.labels) != self.table.n_rows:
            raise DataError(
                f"{len(self.labels)} labels for {self.table.n_rows} feature rows"
            )
        bad = sorted({lab for lab in self.labels if lab not in CLASS_LABELS})
        if bad:
            raise DataError(f"unknown label(s): {', '.join(bad)}")

    @property
    def n_rows(self) -> int:
        return self.table.n_rows

    def class_counts(self) -> dict[str, int]:
        counts = {lab: 0 for lab in CLASS_LABELS}
        for lab in self.labels:
            counts[lab] += 1
        return counts

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = list(indices)
        return Dataset(
            table=self.table.subset_rows(idx),
            labels=tuple(self.labels[i] for i in idx),
        )


def _norm_id(raw: str) -> str:
    return unicodedata.normalize("NFC", raw)


def load_transcripts(dir_path: str | Path, allow_empty: bool = False) -> DocumentSet:
    """Load every ``<id>.txt`` under ``dir_path`` (extension case-insensitive).

    Ids are the NFC-normalized file stems; ordering is lexicographic by id.
    """
    root = Path(dir_path)
    if not root.is_dir():
        raise DataError(f"transcript directory not found: {root}")
    docs: dict[str, Document] = {}
    sources: dict[str, Path] = {}
    for path in sorted(root.iterdir()):
        if not path.is_file() or path.suffix.lower() != ".txt":
            continue
        doc_id = _norm_id(path.stem)
        if not doc_id:
            raise DataError(f"empty subject id from file {path}")
        if doc_id in docs:
            raise DataError(
                f"duplicate subject id {doc_id!r}: {path} collides with {sources[doc_id]}"
            )
        try:
            text = path.read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            raise DataError(f"invalid UTF-8 in {path}: {exc}") from exc
        except OSError as exc:
            raise DataError(f"unreadable transcript {path}: {exc}") from exc
        if not text.strip() and not allow_empty:
            raise DataError(
                f"empty transcript {path} (pass allow_empty=True to accept)"
            )
        docs[doc_id] = Document(id=doc_id, text=text)
        sources[doc_id] = path
    if not docs:
        log.warning("no transcripts found in %s", root)
    ordered = tuple(docs[doc_id] for doc_id in sorted(docs))
    return DocumentSet(documents=ordered)


def load_labels(csv_path: str | Path) -> LabelMap:
    """Read a two-column CSV with header exactly ``id,label``."""
    path = Path(csv_path)
    if not path.is_file():
        raise DataError(f"label file not found: {path}")
    entries: dict[str, str] = {}
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["id", "label"]:
            raise DataError(
                f"{path}: expected header 'id,label', got {','.join(header or [])!r}"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise DataError(f"{path}:{line_no}: expected 2 cells, got {len(row)}")
            subject = _norm_id(row[0].strip())
            label = row[1].strip().lower()
            if not subject:
                raise DataError(f"{path}:{line_no}: empty id")
            if label not in CLASS_LABELS:
                raise DataError(
                    f"{path}:{line_no}: unknown label {row[1]!r} for id {subject!r}"
                )
            if subject in entries:
                raise DataError(f"{path}:{line_no}: duplicate id {subject!r}")
            entries[subject] = label
    return LabelMap(entries=entries)


def load_feature_table(
    csv_path: str | Path,
    expected_width: int | None = None,
    allow_missing: bool = False,
) -> FeatureTable:
    """Read a feature CSV with header ``id,<name1>,...``.

    Every cell must be a finite number. With ``allow_missing``, the literal
    token ``NA`` is accepted and stored as NaN (used by linguistic feature
    tables whose short documents have undefined metrics).
    """
    path = Path(csv_path)
    if not path.is_file():
        raise DataError(f"feature file not found: {path}")
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header or header[0] != "id" or len(header) < 2:
            raise DataError(f"{path}: expected header 'id,<feature names...>'")
        names = tuple(header[1:])
        if any(not name for name in names):
            raise DataError(f"{path}: empty feature name in header")
        if len(set(names)) != len(names):
            raise DataError(f"{path}: duplicate feature names in header")
        if expected_width is not None and len(names) != expected_width:
            raise DataError(
                f"{path}: expected {expected_width} feature columns, found {len(names)}"
            )
        ids: list[str] = []
        rows: list[list[float]] = []
        seen: set[str] = set()
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(names) + 1:
                raise DataError(
                    f"{path}:{line_no}: expected {len(names) + 1} cells, got {len(row)}"
                )
            subject = _norm_id(row[0].strip())
            if not subject:
                raise DataError(f"{path}:{line_no}: empty id")
            if subject in seen:
                raise DataError(f"{path}:{line_no}: duplicate id {subject!r}")
            seen.add(subject)
            parsed: list[float] = []
            for name, cell in zip(names, row[1:]):
                cell = cell.strip()
                if allow_missing and cell == MISSING_TOKEN:
                    parsed.append(math.nan)
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: non-numeric value {cell!r} at row {subject!r}, "
                        f"column {name!r}"
                    ) from None
                if not math.isfinite(value):
                    raise DataError(
                        f"{path}: non-finite value {cell!r} at row {subject!r}, "
                        f"column {name!r}"
                    )
                parsed.append(value)
            ids.append(subject)
            rows.append(parsed)
    values = np.array(rows, dtype=np.float64) if rows else np.empty((0, len(names)))
    return FeatureTable(ids=tuple(ids), column_names=names, values=values)


def write_feature_table(table: FeatureTable, csv_path: str | Path) -> None:
    """Write a feature CSV; floats at full precision, NaN as ``NA``."""
    path = Path(csv_path)
    for subject in table.ids:
        if any(ch in subject for ch in ",\r\n"):
            raise DataError(f"id {subject!r} not representable in unquoted CSV")
    for name in table.column_names:
        if any(ch in name for ch in ",\r\n"):
            raise DataError(f"column name {name!r} not representable in unquoted CSV")
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write("id," + ",".join(table.column_names) + "\n")
        for i, subject in enumerate(table.ids):
            cells = [
                MISSING_TOKEN if math.isnan(v) else repr(float(v))
                for v in table.values[i]
            ]
            handle.write(subject + "," + ",".join(cells) + "\n")


def align_dataset(table: FeatureTable, labels: LabelMap, strict: bool = True) -> Dataset:
    """Join a feature table with labels, preserving the table's row order.

    Strict mode errors on any table id without a label; lenient mode drops
    those rows with a warning.
    """
    unlabeled = [subject for subject in table.ids if subject not in labels]
    if unlabeled and strict:
        raise DataError(
            "unlabeled id(s) in strict alignment: " + ", ".join(unlabeled)
        )
    kept = [i for i, subject in enumerate(table.ids) if subject in labels]
    if not kept:
        raise DataError("no overlap between feature table ids and label ids")
    if unlabeled:
        log.warning(
            "dropped %d unlabeled row(s): %s", len(unlabeled), ", ".join(unlabeled)
        )
        table = table.subset_rows(kept)
    return Dataset(table=table, labels=tuple(labels[s] for s in table.ids))


def _train_count(n: int, fraction: float) -> int:
    # remainder row goes to the training side; epsilon guards float fuzz
    # (e.g. 0.7 * 20 evaluating to 14.000000000000002)
    return math.ceil(n * fraction - 1e-9)


def split_train_test(
    dataset: Dataset,
    train_fraction: float,
    seed: int,
    stratified: bool = True,
) -> tuple[Dataset, Dataset]:
    """Deterministic (stratified by default) train/test split.

    Per-class train counts differ from the exact fraction by at most one
    row; the remainder row lands on the training side.
    """
    if not 0.0 < train_fraction < 1.0:
        raise UsageError(f"train_fraction must be in (0, 1), got {train_fraction}")
    counts = dataset.class_counts()
    for label, count in counts.items():
        if count < 2:
            raise DataError(f"class {label!r} has {count} row(s); need at least 2")
    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    if stratified:
        for label in sorted(CLASS_LABELS):
            idx = np.array([i for i, lab in enumerate(dataset.labels) if lab == label])
            rng.shuffle(idx)
            train_idx.extend(idx[: _train_count(len(idx), train_fraction)].tolist())
    else:
        idx = np.arange(dataset.n_rows)
        rng.shuffle(idx)
        train_idx.extend(idx[: _train_count(len(idx), train_fraction)].tolist())
    train_set = set(train_idx)
    train_rows = [i for i in range(dataset.n_rows) if i in train_set]
    test_rows = [i for i in range(dataset.n_rows) if i not in train_set]
    return dataset.subset(train_rows), dataset.subset(test_rows)
