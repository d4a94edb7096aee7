"""Stratified cross-validation, confusion metrics, and report rendering.

Class ``ad`` is the positive class for headline metrics; per-class rows
additionally report each class as its own positive (the non-AD/AD table
layout). A metric whose denominator is zero is explicitly undefined and
renders as ``NA``; undefined folds are excluded from cross-validation
means rather than silently counted as zero.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus import CLASS_LABELS, CLASS_POSITIVE, Dataset
from .errors import DataError
from .pipeline import FittedPipeline, PipelineSpec, fit_pipeline

METRIC_NAMES = ("accuracy", "precision", "recall", "specificity", "f1")

PER_CLASS_ROWS = ("non-AD", "AD")  # cn as positive, then ad as positive


def stratified_kfold(
    dataset: Dataset | Sequence[str], k: int, seed: int
) -> list[np.ndarray]:
    """Partition row indices into k folds with per-class counts within 1.

    Accepts a Dataset or a bare label sequence. Rows of each class are
    shuffled with the seed and dealt into folds; the first (n_class mod k)
    folds receive the extra row.
    """
    labels = dataset.labels if isinstance(dataset, Dataset) else dataset
    if k < 2:
        raise DataError(f"k must be >= 2, got {k}")
    folds: list[list[int]] = [[] for _ in range(k)]
    rng = np.random.default_rng(seed)
    for label in sorted(set(labels)):
        idx = np.array([i for i, lab in enumerate(labels) if lab == label])
        if len(idx) < k:
            raise DataError(
                f"class {label!r} has {len(idx)} rows; need at least k={k}"
            )
        rng.shuffle(idx)
        base, extra = divmod(len(idx), k)
        start = 0
        for f in range(k):
            size = base + (1 if f < extra else 0)
            folds[f].extend(idx[start : start + size].tolist())
            start += size
    return [np.array(sorted(f)) for f in folds]


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with class ad as positive."""

    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise DataError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def swapped(self) -> "ConfusionMatrix":
        """The same predictions with the positive class flipped."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, tn=self.tp, fn=self.fp)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            tp=self.tp + other.tp,
            fp=self.fp + other.fp,
            tn=self.tn + other.tn,
            fn=self.fn + other.fn,
        )


def confusion(truth: Sequence[str], predicted: Sequence[str]) -> ConfusionMatrix:
    if len(truth) != len(predicted):
        raise DataError(
            f"length mismatch: {len(truth)} truth vs {len(predicted)} predicted"
        )
    counts = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
    for t, p in zip(truth, predicted):
        if t not in CLASS_LABELS or p not in CLASS_LABELS:
            raise DataError(f"unknown label in pair ({t!r}, {p!r})")
        if p == CLASS_POSITIVE:
            counts["tp" if t == CLASS_POSITIVE else "fp"] += 1
        else:
            counts["fn" if t == CLASS_POSITIVE else "tn"] += 1
    return ConfusionMatrix(**counts)


@dataclass(frozen=True)
class MetricValues:
    """One metric row; None marks an undefined (zero-denominator) value."""

    accuracy: float | None
    precision: float | None
    recall: float | None
    specificity: float | None
    f1: float | None

    def as_mapping(self) -> dict[str, float | None]:
        return {name: getattr(self, name) for name in METRIC_NAMES}


def _ratio(num: int, den: int) -> float | None:
    return num / den if den > 0 else None


def _metric_values(cm: ConfusionMatrix) -> MetricValues:
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return MetricValues(
        accuracy=_ratio(cm.tp + cm.tn, cm.total),
        precision=precision,
        recall=recall,
        specificity=_ratio(cm.tn, cm.tn + cm.fp),
        f1=f1,
    )


@dataclass(frozen=True)
class MetricsReport:
    """Headline (ad-positive) metrics plus the per-class breakdown."""

    matrix: ConfusionMatrix
    headline: MetricValues
    per_class: Mapping[str, MetricValues]  # keys: non-AD, AD


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    if cm.total == 0:
        raise DataError("empty confusion matrix")
    return MetricsReport(
        matrix=cm,
        headline=_metric_values(cm),
        per_class={
            "non-AD": _metric_values(cm.swapped()),
            "AD": _metric_values(cm),
        },
    )


@dataclass(frozen=True)
class CvReport:
    """Per-fold metrics with fold-mean/-std and pooled aggregates."""

    k: int
    seed: int
    description: str
    fold_reports: tuple[MetricsReport, ...]
    mean: MetricValues
    std: MetricValues
    pooled: MetricsReport
    transform_fingerprints: tuple[str, ...] = ()

    @property
    def fold_count(self) -> int:
        return len(self.fold_reports)


def _aggregate(fold_values: Sequence[MetricValues]) -> tuple[MetricValues, MetricValues]:
    means: dict[str, float | None] = {}
    stds: dict[str, float | None] = {}
    for name in METRIC_NAMES:
        defined = [
            getattr(fv, name) for fv in fold_values if getattr(fv, name) is not None
        ]
        if defined:
            means[name] = float(np.mean(defined))
            stds[name] = float(np.std(defined))
        else:
            means[name] = None
            stds[name] = None
    return MetricValues(**means), MetricValues(**stds)


def _fingerprint(fitted: FittedPipeline) -> str:
    digest = hashlib.sha256()
    for chunk in fitted.fingerprint_parts():
        digest.update(chunk)
    return digest.hexdigest()


def cross_validate(
    spec: PipelineSpec, dataset: Dataset, k: int = 5, seed: int = 0
) -> CvReport:
    """k-fold CV fitting every transform on each training split only."""
    folds = stratified_kfold(dataset.labels, k, seed)
    all_rows = set(range(dataset.n_rows))
    fold_reports: list[MetricsReport] = []
    fingerprints: list[str] = []
    pooled = ConfusionMatrix(0, 0, 0, 0)
    for fold_no, test_idx in enumerate(folds):
        train_idx = sorted(all_rows - set(test_idx.tolist()))
        try:
            fitted = fit_pipeline(spec, dataset.subset(train_idx))
            predicted = fitted.predict(dataset.table.subset_rows(test_idx))
        except Exception as exc:
            raise type(exc)(f"fold {fold_no}: {exc}") from exc
        truth = [dataset.labels[i] for i in test_idx]
        cm = confusion(truth, predicted)
        fold_reports.append(metrics(cm))
        fingerprints.append(_fingerprint(fitted))
        pooled = pooled + cm
    mean, std = _aggregate([r.headline for r in fold_reports])
    return CvReport(
        k=k,
        seed=seed,
        description=spec.describe(),
        fold_reports=tuple(fold_reports),
        mean=mean,
        std=std,
        pooled=metrics(pooled),
        transform_fingerprints=tuple(fingerprints),
    )


def train_test_evaluate(
    spec: PipelineSpec, train: Dataset, test: Dataset
) -> MetricsReport:
    """Fit on the training set only and report per-class test metrics."""
    overlap = sorted(set(train.table.ids) & set(test.table.ids))
    if overlap:
        raise DataError(
            "train/test leakage: id(s) in both sets: " + ", ".join(overlap)
        )
    fitted = fit_pipeline(spec, train)
    predicted = fitted.predict(test.table)
    return metrics(confusion(list(test.labels), predicted))


# --- rendering -----------------------------------------------------------

NA = "NA"


def _cell(value: float | None) -> str:
    return NA if value is None else f"{value:.4f}"


CLASSIFIER_DISPLAY = {"logreg": "LR", "rf": "RF", "svm": "SVM"}


def render_cv_table(model_name: str, rows: Sequence[tuple[str, CvReport]]) -> str:
    """Cross-validation comparison: one row per classifier.

    Columns: CV Accuracy, Precision, Recall, Specificity, F1 Score
    (fold means); a pooled accuracy column is appended since pooling and
    fold-averaging are both reasonable aggregations.
    """
    header = (
        "Class",
        "CV Accuracy",
        "Precision",
        "Recall",
        "Specificity",
        "F1 Score",
        "Pooled Accuracy",
    )
    lines = [model_name]
    body = []
    for classifier, report in rows:
        display = CLASSIFIER_DISPLAY.get(classifier, classifier)
        body.append(
            (
                display,
                _cell(report.mean.accuracy),
                _cell(report.mean.precision),
                _cell(report.mean.recall),
                _cell(report.mean.specificity),
                _cell(report.mean.f1),
                _cell(report.pooled.headline.accuracy),
            )
        )
    widths = [
        max(len(header[c]), *(len(r[c]) for r in body)) for c in range(len(header))
    ]
    lines.append("  ".join(h.ljust(widths[c]) for c, h in enumerate(header)))
    for row in body:
        lines.append("  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)))
    return "\n".join(lines) + "\n"


def render_test_report(model_name: str, report: MetricsReport) -> str:
    """Two-row per-class table: Accuracy, Recall, Precision, F1."""
    header = ("Model", "Class", "Accuracy", "Recall", "Precision", "F1")
    accuracy = _cell(report.headline.accuracy)
    body = []
    for row_name in PER_CLASS_ROWS:
        values = report.per_class[row_name]
        body.append(
            (
                model_name if row_name == PER_CLASS_ROWS[0] else "",
                row_name,
                accuracy if row_name == PER_CLASS_ROWS[0] else "",
                _cell(values.recall),
                _cell(values.precision),
                _cell(values.f1),
            )
        )
    widths = [
        max(len(header[c]), *(len(r[c]) for r in body)) for c in range(len(header))
    ]
    lines = ["  ".join(h.ljust(widths[c]) for c, h in enumerate(header))]
    for row in body:
        lines.append("  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)))
    return "\n".join(lines) + "\n"


def cv_report_csv(rows: Sequence[tuple[str, CvReport]]) -> str:
    lines = [
        "classifier,fold,accuracy,precision,recall,specificity,f1"
    ]
    for classifier, report in rows:
        for fold_no, fold in enumerate(report.fold_reports):
            cells = [_cell(getattr(fold.headline, m)) for m in METRIC_NAMES]
            lines.append(f"{classifier},{fold_no}," + ",".join(cells))
        lines.append(
            f"{classifier},mean,"
            + ",".join(_cell(getattr(report.mean, m)) for m in METRIC_NAMES)
        )
        lines.append(
            f"{classifier},std,"
            + ",".join(_cell(getattr(report.std, m)) for m in METRIC_NAMES)
        )
        lines.append(
            f"{classifier},pooled,"
            + ",".join(
                _cell(getattr(report.pooled.headline, m)) for m in METRIC_NAMES
            )
        )
    return "\n".join(lines) + "\n"


def eval_report_csv(report: MetricsReport) -> str:
    lines = ["class,accuracy,recall,precision,f1"]
    for row_name in PER_CLASS_ROWS:
        values = report.per_class[row_name]
        lines.append(
            ",".join(
                [
                    row_name,
                    _cell(report.headline.accuracy),
                    _cell(values.recall),
                    _cell(values.precision),
                    _cell(values.f1),
                ]
            )
        )
    return "\n".join(lines) + "\n"
