"""TF-IDF fitting/transforms, feature-block fusion, and per-fold scaling.

TF-IDF follows the raw-count convention: weight = tf * ln(N_docs / df).
No smoothing is applied; in-vocabulary terms always have df >= 1, and
out-of-vocabulary terms are dropped at transform time. All fold-fitted
transforms (imputer means, standardizer statistics) are functions of the
training rows only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import FeatureTable
from .errors import DataError
from .textproc import TokenSequence

SIGMA_FLOOR = 1e-12


@dataclass(frozen=True)
class TfIdfModel:
    """Fitted vocabulary with per-term document frequencies."""

    vocabulary: tuple[str, ...]  # sorted lexicographically
    doc_freq: tuple[int, ...]
    corpus_size: int

    def __post_init__(self) -> None:
        if len(self.vocabulary) != len(self.doc_freq):
            raise DataError("vocabulary and doc_freq length mismatch")
        if list(self.vocabulary) != sorted(self.vocabulary):
            raise DataError("vocabulary must be sorted")
        for term, df in zip(self.vocabulary, self.doc_freq):
            if not 1 <= df <= self.corpus_size:
                raise DataError(f"df out of range for term {term!r}: {df}")

    @property
    def index(self) -> dict[str, int]:
        return {term: i for i, term in enumerate(self.vocabulary)}

    def idf(self) -> np.ndarray:
        return np.log(self.corpus_size / np.array(self.doc_freq, dtype=np.float64))


def fit_tfidf(corpus: Sequence[TokenSequence], min_df: int = 1) -> TfIdfModel:
    """Build the vocabulary and document frequencies from a token corpus."""
    if not any(len(doc) for doc in corpus):
        raise DataError("cannot fit tf-idf on an all-empty corpus")
    if min_df < 1:
        raise DataError(f"min_df must be >= 1, got {min_df}")
    df: dict[str, int] = {}
    for doc in corpus:
        for term in set(doc):
            df[term] = df.get(term, 0) + 1
    vocabulary = tuple(sorted(t for t, d in df.items() if d >= min_df))
    if not vocabulary:
        raise DataError(f"no term reaches min_df={min_df}")
    return TfIdfModel(
        vocabulary=vocabulary,
        doc_freq=tuple(df[t] for t in vocabulary),
        corpus_size=len(corpus),
    )


def transform_tfidf(model: TfIdfModel, doc: TokenSequence) -> dict[int, float]:
    """Sparse weights {column: tf * ln(N/df)} for one document."""
    index = model.index
    tf: dict[int, int] = {}
    for term in doc:
        col = index.get(term)
        if col is not None:
            tf[col] = tf.get(col, 0) + 1
    n = model.corpus_size
    return {
        col: count * math.log(n / model.doc_freq[col])
        for col, count in sorted(tf.items())
    }


def tfidf_matrix(model: TfIdfModel, corpus: Sequence[TokenSequence]) -> np.ndarray:
    out = np.zeros((len(corpus), len(model.vocabulary)))
    for i, doc in enumerate(corpus):
        for col, weight in transform_tfidf(model, doc).items():
            out[i, col] = weight
    return out


def tfidf_table(
    model: TfIdfModel,
    ids: Sequence[str],
    corpus: Sequence[TokenSequence],
    prefix: str = "tfidf",
) -> FeatureTable:
    if len(ids) != len(corpus):
        raise DataError(f"{len(ids)} ids for {len(corpus)} documents")
    return FeatureTable(
        ids=tuple(ids),
        column_names=tuple(f"{prefix}_{t}" for t in model.vocabulary),
        values=tfidf_matrix(model, corpus),
    )


def save_tfidf_model(model: TfIdfModel, path: str | Path) -> None:
    """Persist vocabulary order and df so transforms are reproducible."""
    payload = {
        "corpus_size": model.corpus_size,
        "vocabulary": list(model.vocabulary),
        "doc_freq": list(model.doc_freq),
    }
    Path(path).write_text(
        json.dumps(payload, indent=1, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_tfidf_model(path: str | Path) -> TfIdfModel:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"tf-idf vocabulary file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        return TfIdfModel(
            vocabulary=tuple(payload["vocabulary"]),
            doc_freq=tuple(int(d) for d in payload["doc_freq"]),
            corpus_size=int(payload["corpus_size"]),
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise DataError(f"malformed tf-idf vocabulary file {path}: {exc}") from exc


def concat_tables(
    blocks: Sequence[tuple[str | None, FeatureTable, int | None]],
) -> FeatureTable:
    """Fuse feature blocks column-wise: (prefix, table, expected_width).

    Blocks must share identical id order; column names are prefixed with
    the block name when one is given. Values pass through unchanged.
    """
    if not blocks:
        raise DataError("no feature blocks to concatenate")
    ids = blocks[0][1].ids
    names: list[str] = []
    parts: list[np.ndarray] = []
    for prefix, table, expected_width in blocks:
        if expected_width is not None and table.width != expected_width:
            raise DataError(
                f"block {prefix or '(unnamed)'}: expected width {expected_width}, "
                f"got {table.width}"
            )
        if table.ids != ids:
            raise DataError("feature blocks have mismatched row ids")
        names.extend(
            f"{prefix}_{c}" if prefix else c for c in table.column_names
        )
        parts.append(table.values)
    if len(set(names)) != len(names):
        raise DataError("column name collision after block prefixing")
    return FeatureTable(
        ids=ids,
        column_names=tuple(names),
        values=np.hstack(parts) if parts else np.empty((len(ids), 0)),
    )


@dataclass(frozen=True)
class Imputer:
    """Per-column training means used to fill missing (NaN) values."""

    column_names: tuple[str, ...]
    means: np.ndarray

    def apply(self, table: FeatureTable) -> FeatureTable:
        if table.column_names != self.column_names:
            raise DataError("imputer fitted on different columns")
        values = table.values.copy()
        nan_rows, nan_cols = np.nonzero(np.isnan(values))
        values[nan_rows, nan_cols] = self.means[nan_cols]
        return FeatureTable(ids=table.ids, column_names=table.column_names, values=values)


def fit_imputer(train: FeatureTable) -> Imputer:
    if train.n_rows < 1:
        raise DataError("cannot fit imputer on an empty table")
    values = train.values
    means = np.zeros(train.width)
    for j in range(train.width):
        col = values[:, j]
        finite = col[~np.isnan(col)]
        # a column missing everywhere in train imputes to 0.0
        means[j] = finite.mean() if finite.size else 0.0
    return Imputer(column_names=train.column_names, means=means)


@dataclass(frozen=True)
class Standardizer:
    """Per-column z-scoring statistics fitted on training rows."""

    column_names: tuple[str, ...]
    mean: np.ndarray
    scale: np.ndarray  # population sigma, floored to 1 for constant columns

    def apply(self, table: FeatureTable) -> FeatureTable:
        if table.column_names != self.column_names:
            raise DataError("standardizer fitted on different columns")
        values = (table.values - self.mean) / self.scale
        return FeatureTable(ids=table.ids, column_names=table.column_names, values=values)


def fit_standardizer(train: FeatureTable) -> Standardizer:
    if train.n_rows < 2:
        raise DataError(
            f"standardizer needs at least 2 training rows, got {train.n_rows}"
        )
    if np.isnan(train.values).any():
        raise DataError("standardizer input contains missing values; impute first")
    mean = train.values.mean(axis=0)
    sigma = train.values.std(axis=0)
    scale = np.where(sigma < SIGMA_FLOOR, 1.0, sigma)
    return Standardizer(column_names=train.column_names, mean=mean, scale=scale)
