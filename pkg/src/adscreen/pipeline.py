"""Feature-assembly and training pipeline shared by CV, train, and predict.

A pipeline turns raw per-subject features into a trained classifier:

    static columns [+ per-fit TF-IDF block] -> impute -> optional RFE
    -> standardize -> classifier

Everything fit here (TF-IDF vocabulary, imputation means, elimination
mask, scaling statistics, classifier parameters) is a function of the
training rows only; transforming new rows reuses the fitted state. A
fitted pipeline serializes to a single plain-text bundle whose embedded
classifier uses the model-file format.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .corpus import Dataset, FeatureTable
from .errors import DataError, UsageError
from .models import (
    ForestConfig,
    LogRegConfig,
    SvmConfig,
    predict_labels,
    predict_scores,
    train_forest,
    train_logreg,
    train_svm,
)
from .models.common import CLASSIFIER_KINDS
from .models.predict import TrainedModel
from .models.store import model_from_text, model_text
from .selection import FeatureMask, apply_mask, rfe
from .textproc import TokenSequence
from .vectorize import (
    Imputer,
    Standardizer,
    TfIdfModel,
    concat_tables,
    fit_imputer,
    fit_standardizer,
    fit_tfidf,
    tfidf_table,
)

BUNDLE_HEADER = "adscreen-pipeline v1"


@dataclass(frozen=True)
class PipelineSpec:
    """What to fit: classifier choice, optional TF-IDF block, RFE, scaling."""

    classifier: str
    name: str = ""
    tfidf_docs: Mapping[str, TokenSequence] | None = None
    tfidf_min_df: int = 1
    rfe_target: int | None = None
    rfe_step: int = 1
    rfe_scorer: str = "logreg"
    preselected: FeatureMask | None = None  # global mode: apply a fixed mask
    standardize: bool = True
    seed: int = 0
    logreg_config: LogRegConfig | None = None
    forest_config: ForestConfig | None = None
    svm_config: SvmConfig | None = None

    def __post_init__(self) -> None:
        if self.classifier not in CLASSIFIER_KINDS:
            raise UsageError(
                f"unknown classifier {self.classifier!r}; expected one of "
                f"{', '.join(CLASSIFIER_KINDS)}"
            )
        if self.preselected is not None and self.rfe_target is not None:
            raise UsageError(
                "choose one selection mode: a precomputed mask or fold-nested rfe"
            )

    def describe(self) -> str:
        parts = [
            f"name={self.name or '-'}",
            f"classifier={self.classifier}",
            f"tfidf={'yes' if self.tfidf_docs is not None else 'no'}",
            f"rfe_target={self.rfe_target if self.rfe_target is not None else '-'}",
            f"mask={len(self.preselected.kept) if self.preselected is not None else '-'}",
            f"standardize={int(self.standardize)}",
            f"seed={self.seed}",
        ]
        return " ".join(parts)


def _train_classifier(spec: PipelineSpec, train: Dataset) -> TrainedModel:
    if spec.classifier == "logreg":
        return train_logreg(train, spec.logreg_config or LogRegConfig(seed=spec.seed))
    if spec.classifier == "rf":
        return train_forest(train, spec.forest_config or ForestConfig(seed=spec.seed))
    return train_svm(train, spec.svm_config or SvmConfig(seed=spec.seed))


@dataclass(frozen=True)
class FittedPipeline:
    spec: PipelineSpec
    input_columns: tuple[str, ...]  # raw static schema expected at predict time
    tfidf_model: TfIdfModel | None
    imputer: Imputer
    mask: FeatureMask | None
    standardizer: Standardizer | None
    model: TrainedModel

    def _assemble(self, table: FeatureTable) -> FeatureTable:
        if table.column_names != self.input_columns:
            missing = set(self.input_columns) - set(table.column_names)
            extra = set(table.column_names) - set(self.input_columns)
            detail = []
            if missing:
                detail.append("missing column(s): " + ", ".join(sorted(missing)))
            if extra:
                detail.append("unexpected column(s): " + ", ".join(sorted(extra)))
            raise DataError(
                "feature schema mismatch: " + ("; ".join(detail) or "column order differs")
            )
        blocks: list[tuple[str | None, FeatureTable, int | None]] = [
            (None, table, None)
        ]
        if self.tfidf_model is not None:
            docs = self._docs_for(table.ids)
            blocks.append(
                (None, tfidf_table(self.tfidf_model, table.ids, docs), None)
            )
        return concat_tables(blocks)

    def _docs_for(self, ids: tuple[str, ...]) -> list[TokenSequence]:
        assert self.spec.tfidf_docs is not None
        missing = [i for i in ids if i not in self.spec.tfidf_docs]
        if missing:
            raise DataError(
                "no tokenized document for id(s): " + ", ".join(missing)
            )
        return [self.spec.tfidf_docs[i] for i in ids]

    def transform(self, table: FeatureTable) -> FeatureTable:
        """Raw static rows -> model-ready feature matrix."""
        out = self.imputer.apply(self._assemble(table))
        if self.mask is not None:
            out = apply_mask(self.mask, out)
        if self.standardizer is not None:
            out = self.standardizer.apply(out)
        return out

    def predict(self, table: FeatureTable) -> tuple[str, ...]:
        return predict_labels(self.model, self.transform(table).values)

    def scores(self, table: FeatureTable) -> np.ndarray:
        return predict_scores(self.model, self.transform(table).values)

    def fingerprint_parts(self) -> list[bytes]:
        """Byte chunks uniquely identifying every train-fitted parameter."""
        parts: list[bytes] = []
        if self.tfidf_model is not None:
            parts.append("\x1f".join(self.tfidf_model.vocabulary).encode())
            parts.append(np.array(self.tfidf_model.doc_freq).tobytes())
            parts.append(str(self.tfidf_model.corpus_size).encode())
        parts.append(np.ascontiguousarray(self.imputer.means).tobytes())
        if self.mask is not None:
            parts.append("\x1f".join(self.mask.kept).encode())
        if self.standardizer is not None:
            parts.append(np.ascontiguousarray(self.standardizer.mean).tobytes())
            parts.append(np.ascontiguousarray(self.standardizer.scale).tobytes())
        parts.append(model_text(self.model).encode())
        return parts


def fit_pipeline(spec: PipelineSpec, train: Dataset) -> FittedPipeline:
    """Fit every stage on the training rows only."""
    tfidf_model = None
    blocks: list[tuple[str | None, FeatureTable, int | None]] = [
        (None, train.table, None)
    ]
    if spec.tfidf_docs is not None:
        missing = [i for i in train.table.ids if i not in spec.tfidf_docs]
        if missing:
            raise DataError(
                "no tokenized document for id(s): " + ", ".join(missing)
            )
        train_docs = [spec.tfidf_docs[i] for i in train.table.ids]
        tfidf_model = fit_tfidf(train_docs, min_df=spec.tfidf_min_df)
        blocks.append(
            (None, tfidf_table(tfidf_model, train.table.ids, train_docs), None)
        )
    assembled = concat_tables(blocks)
    imputer = fit_imputer(assembled)
    imputed = imputer.apply(assembled)

    mask = None
    if spec.preselected is not None:
        mask = spec.preselected
        imputed = apply_mask(mask, imputed)
    elif spec.rfe_target is not None:
        mask = rfe(
            Dataset(table=imputed, labels=train.labels),
            target_count=spec.rfe_target,
            step=spec.rfe_step,
            seed=spec.seed,
            scorer=spec.rfe_scorer,
        )
        imputed = apply_mask(mask, imputed)

    standardizer = None
    if spec.standardize:
        standardizer = fit_standardizer(imputed)
        imputed = standardizer.apply(imputed)

    model = _train_classifier(spec, Dataset(table=imputed, labels=train.labels))
    return FittedPipeline(
        spec=spec,
        input_columns=train.table.column_names,
        tfidf_model=tfidf_model,
        imputer=imputer,
        mask=mask,
        standardizer=standardizer,
        model=model,
    )


# --- bundle persistence (CLI train/predict on prebuilt feature tables) ----


def save_pipeline(fitted: FittedPipeline, path: str | Path) -> None:
    if fitted.tfidf_model is not None:
        raise UsageError(
            "pipelines with a live TF-IDF block are not persistable; "
            "featurize with a fixed vocabulary first"
        )
    lines = [BUNDLE_HEADER]
    lines.append(f"columns {len(fitted.input_columns)}")
    lines.extend(f"column {name}" for name in fitted.input_columns)
    lines.append("imputer " + " ".join(repr(float(v)) for v in fitted.imputer.means))
    if fitted.mask is not None:
        lines.append(f"mask {len(fitted.mask.ranking)}")
        for name, rank in fitted.mask.ranking.items():
            lines.append(f"rank {rank} {name}")
    else:
        lines.append("mask 0")
    if fitted.standardizer is not None:
        lines.append(
            "standardize_mean "
            + " ".join(repr(float(v)) for v in fitted.standardizer.mean)
        )
        lines.append(
            "standardize_scale "
            + " ".join(repr(float(v)) for v in fitted.standardizer.scale)
        )
    else:
        lines.append("standardize none")
    lines.append("model")
    lines.append(model_text(fitted.model).rstrip("\n"))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_pipeline(path: str | Path) -> FittedPipeline:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"pipeline file not found: {path}")
    raw = path.read_text(encoding="utf-8").splitlines()
    if not raw or raw[0] != BUNDLE_HEADER:
        raise DataError(f"{path}: not an adscreen v1 pipeline file")
    try:
        pos = 1
        n_cols = int(raw[pos].split(" ", 1)[1])
        pos += 1
        columns = tuple(raw[pos + i].split(" ", 1)[1] for i in range(n_cols))
        pos += n_cols
        means = np.array([float(v) for v in raw[pos].split(" ")[1:]])
        pos += 1
        n_mask = int(raw[pos].split(" ", 1)[1])
        pos += 1
        mask = None
        if n_mask:
            ranking: dict[str, int] = {}
            for i in range(n_mask):
                _, rank, name = raw[pos + i].split(" ", 2)
                ranking[name] = int(rank)
            pos += n_mask
            kept = tuple(n for n, r in ranking.items() if r == 0)
            mask = FeatureMask(kept=kept, ranking=ranking)
        standardizer = None
        if raw[pos] != "standardize none":
            s_mean = np.array([float(v) for v in raw[pos].split(" ")[1:]])
            s_scale = np.array([float(v) for v in raw[pos + 1].split(" ")[1:]])
            pos += 2
            scaled_columns = mask.kept if mask is not None else columns
            standardizer = Standardizer(
                column_names=tuple(scaled_columns), mean=s_mean, scale=s_scale
            )
        else:
            pos += 1
        if raw[pos] != "model":
            raise DataError(f"{path}: expected model section, got {raw[pos]!r}")
        pos += 1
        model = model_from_text("\n".join(raw[pos:]) + "\n", origin=path)
    except (ValueError, IndexError) as exc:
        raise DataError(f"{path}: malformed pipeline file: {exc}") from exc
    spec = PipelineSpec(classifier=model.kind)
    return FittedPipeline(
        spec=spec,
        input_columns=columns,
        tfidf_model=None,
        imputer=Imputer(column_names=columns, means=means),
        mask=mask,
        standardizer=standardizer,
        model=model,
    )
