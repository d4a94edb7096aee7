import numpy as np
import pytest

from adscreen.corpus import Dataset, FeatureTable, split_train_test
from adscreen.errors import DataError
from adscreen.evaluate import (
    ConfusionMatrix,
    MetricValues,
    MetricsReport,
    confusion,
    cross_validate,
    cv_report_csv,
    metrics,
    render_cv_table,
    render_test_report,
    stratified_kfold,
    eval_report_csv,
    train_test_evaluate,
)
from adscreen.pipeline import PipelineSpec
from helpers import as_dataset, separable_blobs


class TestStratifiedKfold:
    def test_even_splits(self):
        labels = ["ad"] * 10 + ["cn"] * 10
        folds = stratified_kfold(labels, k=5, seed=0)
        for fold in folds:
            fold_labels = [labels[i] for i in fold]
            assert fold_labels.count("ad") == 2
            assert fold_labels.count("cn") == 2

    def test_remainder_distribution(self):
        labels = ["ad"] * 11 + ["cn"] * 10
        folds = stratified_kfold(labels, k=5, seed=1)
        ad_sizes = sorted(
            sum(1 for i in fold if labels[i] == "ad") for fold in folds
        )
        assert ad_sizes == [2, 2, 2, 2, 3]

    def test_partition(self):
        labels = ["ad"] * 13 + ["cn"] * 9
        folds = stratified_kfold(labels, k=4, seed=2)
        seen = [i for fold in folds for i in fold]
        assert sorted(seen) == list(range(22))

    def test_class_smaller_than_k(self):
        labels = ["ad"] * 3 + ["cn"] * 10
        with pytest.raises(DataError, match="'ad'"):
            stratified_kfold(labels, k=5, seed=0)

    def test_balance_bound_randomized(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            k = int(rng.integers(2, 7))
            n_ad = int(rng.integers(k, 40))
            n_cn = int(rng.integers(k, 40))
            labels = ["ad"] * n_ad + ["cn"] * n_cn
            folds = stratified_kfold(labels, k=k, seed=int(rng.integers(1000)))
            for lab in ("ad", "cn"):
                sizes = [sum(1 for i in f if labels[i] == lab) for f in folds]
                assert max(sizes) - min(sizes) <= 1


class TestConfusion:
    def test_perfect(self):
        cm = confusion(["ad", "cn"], ["ad", "cn"])
        assert (cm.tp, cm.tn, cm.fp, cm.fn) == (1, 1, 0, 0)

    def test_single_miss(self):
        cm = confusion(["ad"], ["cn"])
        assert cm.fn == 1
        assert cm.tp == cm.fp == cm.tn == 0

    def test_random_tally_oracle(self):
        rng = np.random.default_rng(4)
        truth = [("ad" if v else "cn") for v in rng.integers(0, 2, 100)]
        pred = [("ad" if v else "cn") for v in rng.integers(0, 2, 100)]
        cm = confusion(truth, pred)
        tally = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
        for t, p in zip(truth, pred):
            if t == "ad" and p == "ad":
                tally["tp"] += 1
            elif t == "cn" and p == "ad":
                tally["fp"] += 1
            elif t == "cn" and p == "cn":
                tally["tn"] += 1
            else:
                tally["fn"] += 1
        assert (cm.tp, cm.fp, cm.tn, cm.fn) == (
            tally["tp"],
            tally["fp"],
            tally["tn"],
            tally["fn"],
        )
        assert cm.total == 100

    def test_length_mismatch(self):
        with pytest.raises(DataError, match="length"):
            confusion(["ad"], ["ad", "cn"])

    def test_unknown_label(self):
        with pytest.raises(DataError, match="unknown"):
            confusion(["mci"], ["ad"])


class TestMetrics:
    def test_perfect_case(self):
        report = metrics(ConfusionMatrix(tp=1, fp=0, tn=1, fn=0))
        assert report.headline.accuracy == 1.0
        assert report.headline.precision == 1.0
        assert report.headline.recall == 1.0
        assert report.headline.specificity == 1.0
        assert report.headline.f1 == 1.0

    def test_undefined_precision_defined_accuracy(self):
        report = metrics(ConfusionMatrix(tp=0, fp=0, tn=3, fn=1))
        assert report.headline.precision is None
        assert report.headline.accuracy == 0.75

    def test_f1_harmonic_identity(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            tp, fp, tn, fn = (int(v) for v in rng.integers(0, 20, 4))
            if tp + fp + tn + fn == 0:
                continue
            rep = metrics(ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn))
            if rep.headline.f1 is not None:
                direct = 2 * tp / (2 * tp + fp + fn)
                assert rep.headline.f1 == pytest.approx(direct, rel=1e-12)

    def test_class_swap_involution(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            tp, fp, tn, fn = (int(v) for v in rng.integers(1, 20, 4))
            cm = ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)
            rep = metrics(cm)
            swapped_rep = metrics(cm.swapped())
            # the non-AD row is exactly the swapped-positive headline
            assert rep.per_class["non-AD"] == swapped_rep.headline
            # and swapping twice returns the original
            assert cm.swapped().swapped() == cm
            assert swapped_rep.per_class["non-AD"] == rep.headline

    def test_empty_matrix(self):
        with pytest.raises(DataError, match="empty"):
            metrics(ConfusionMatrix(0, 0, 0, 0))


class TestRendering:
    def published_shape_report(self):
        # layout fidelity check with injected values (not recomputed)
        return MetricsReport(
            matrix=ConfusionMatrix(tp=28, fp=10, tn=26, fn=7),
            headline=MetricValues(
                accuracy=0.7606, precision=0.7368, recall=0.8, specificity=0.7222, f1=0.7671
            ),
            per_class={
                "non-AD": MetricValues(
                    accuracy=0.7606,
                    precision=0.7879,
                    recall=0.7222,
                    specificity=0.8,
                    f1=0.7356,
                ),
                "AD": MetricValues(
                    accuracy=0.7606,
                    precision=0.7368,
                    recall=0.8,
                    specificity=0.7222,
                    f1=0.7671,
                ),
            },
        )

    def test_test_report_layout(self):
        text = render_test_report("Model 3", self.published_shape_report())
        lines = text.splitlines()
        assert lines[0].split() == ["Model", "Class", "Accuracy", "Recall", "Precision", "F1"]
        assert lines[1].startswith("Model 3")
        assert "non-AD" in lines[1]
        assert "0.7606" in lines[1]
        assert "0.7222" in lines[1] and "0.7879" in lines[1] and "0.7356" in lines[1]
        assert lines[2].lstrip().startswith("AD")
        assert "0.8000" in lines[2] and "0.7368" in lines[2] and "0.7671" in lines[2]

    def test_eval_report_csv(self):
        text = eval_report_csv(self.published_shape_report())
        lines = text.splitlines()
        assert lines[0] == "class,accuracy,recall,precision,f1"
        assert lines[1] == "non-AD,0.7606,0.7222,0.7879,0.7356"
        assert lines[2] == "AD,0.7606,0.8000,0.7368,0.7671"

    def test_na_rendering_never_zero(self):
        report = metrics(ConfusionMatrix(tp=0, fp=0, tn=2, fn=1))
        text = render_test_report("Model X", report)
        assert "NA" in text


def blob_dataset(n=60, seed=0):
    X, y = separable_blobs(n=n, seed=seed)
    return as_dataset(X, y)


class TestCrossValidate:
    def test_separable_high_accuracy(self):
        report = cross_validate(
            PipelineSpec(classifier="logreg", name="blobs"), blob_dataset(), k=5, seed=42
        )
        assert report.fold_count == 5
        assert report.mean.accuracy >= 0.95

    def test_label_shuffle_near_chance(self):
        X, y = separable_blobs(n=100, seed=7)
        rng = np.random.default_rng(99)
        shuffled = y.copy()
        rng.shuffle(shuffled)
        ds = as_dataset(X, shuffled)
        report = cross_validate(PipelineSpec(classifier="logreg"), ds, k=5, seed=42)
        assert 0.35 <= report.mean.accuracy <= 0.65

    def test_deterministic_byte_identical(self):
        ds = blob_dataset(seed=3)
        spec = PipelineSpec(classifier="rf", name="det")
        r1 = cross_validate(spec, ds, k=3, seed=11)
        r2 = cross_validate(spec, ds, k=3, seed=11)
        assert cv_report_csv([("rf", r1)]) == cv_report_csv([("rf", r2)])
        assert render_cv_table("Model", [("rf", r1)]) == render_cv_table(
            "Model", [("rf", r2)]
        )
        assert r1.transform_fingerprints == r2.transform_fingerprints

    def test_mean_within_fold_range(self):
        report = cross_validate(
            PipelineSpec(classifier="logreg"), blob_dataset(seed=5), k=4, seed=1
        )
        fold_accs = [r.headline.accuracy for r in report.fold_reports]
        assert min(fold_accs) <= report.mean.accuracy <= max(fold_accs)

    def test_class_smaller_than_k_rejected(self):
        ds = blob_dataset(seed=6)
        with pytest.raises(DataError):
            cross_validate(PipelineSpec(classifier="logreg"), ds, k=40, seed=0)

    def test_training_error_annotated_with_fold(self):
        from adscreen.errors import NumericError
        from adscreen.models import LogRegConfig

        ds = blob_dataset(seed=6)
        divergent = PipelineSpec(
            classifier="logreg",
            logreg_config=LogRegConfig(learning_rate=1e9, epochs=100),
        )
        with pytest.raises(NumericError, match="fold 0"):
            cross_validate(divergent, ds, k=3, seed=0)

    def test_leakage_canary_perturbed_test_folds(self):
        ds = blob_dataset(n=30, seed=8)
        spec = PipelineSpec(classifier="logreg", name="canary")
        k, seed = 3, 13
        baseline = cross_validate(spec, ds, k=k, seed=seed)
        folds = stratified_kfold(ds.labels, k=k, seed=seed)
        for fold_no, test_idx in enumerate(folds):
            values = np.array(ds.table.values, copy=True)
            values[test_idx, :] += 1234.5  # corrupt only the held-out rows
            perturbed = Dataset(
                table=FeatureTable(
                    ids=ds.table.ids,
                    column_names=ds.table.column_names,
                    values=values,
                ),
                labels=ds.labels,
            )
            report = cross_validate(spec, perturbed, k=k, seed=seed)
            assert (
                report.transform_fingerprints[fold_no]
                == baseline.transform_fingerprints[fold_no]
            )

    def test_cv_table_has_three_classifier_rows(self):
        ds = blob_dataset(seed=9)
        rows = []
        for classifier in ("logreg", "rf", "svm"):
            rows.append(
                (classifier, cross_validate(PipelineSpec(classifier=classifier), ds, k=3, seed=2))
            )
        text = render_cv_table("Model 1", rows)
        lines = text.splitlines()
        assert lines[0] == "Model 1"
        header = lines[1].split()
        assert header[:2] == ["Class", "CV"]
        assert [ln.split()[0] for ln in lines[2:5]] == ["LR", "RF", "SVM"]


class TestTrainTestEvaluate:
    def test_split_and_report(self):
        ds = blob_dataset(n=40, seed=10)
        train, test = split_train_test(ds, 0.7, seed=1)
        report = train_test_evaluate(PipelineSpec(classifier="logreg"), train, test)
        for row in ("non-AD", "AD"):
            values = report.per_class[row]
            assert values.recall is not None
            assert values.precision is not None
            assert values.f1 is not None

    def test_absent_class_flagged_undefined(self):
        train = blob_dataset(n=30, seed=11)
        X, y = separable_blobs(n=10, seed=12)
        test_all_cn = Dataset(
            table=FeatureTable(
                ids=tuple(f"T{i}" for i in range(10)),
                column_names=train.table.column_names,
                values=X,
            ),
            labels=tuple(["cn"] * 10),
        )
        report = train_test_evaluate(
            PipelineSpec(classifier="logreg"), train, test_all_cn
        )
        assert report.per_class["AD"].recall is None

    def test_id_overlap_refused(self):
        ds = blob_dataset(n=20, seed=13)
        with pytest.raises(DataError, match="leakage"):
            train_test_evaluate(PipelineSpec(classifier="logreg"), ds, ds)
