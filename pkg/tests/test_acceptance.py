"""Acceptance gate: one test per release criterion.

Run with ``pytest tests/test_acceptance.py -v`` to get one pass/fail
line per criterion. Tolerances are fixed here and must not be loosened.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from adscreen.cli import main as cli_main
from adscreen.corpus import Dataset, Document, FeatureTable
from adscreen.errors import MetricUndefined
from adscreen.evaluate import (
    ConfusionMatrix,
    confusion,
    cross_validate,
    metrics,
    stratified_kfold,
)
from adscreen.lexical import (
    brunet_index,
    hdd,
    honore_statistic,
    hypergeom_pmf_zero,
    lexical_counts,
    linguistic_feature_vector,
    msttr,
    mtld,
    pos_frequencies,
    rttr,
    standardized_entropy,
)
from adscreen.models import (
    SvmConfig,
    best_split,
    predict_labels,
    train_logreg,
    train_svm,
)
from adscreen.models.logreg import logreg_gradient, logreg_loss
from adscreen.pipeline import PipelineSpec
from adscreen.selection import rfe
from helpers import accuracy, as_dataset, concentric_circles, separable_blobs, xor_points
from test_lexical import hdd_exact, hdd_monte_carlo, make_counts
from test_models import enumerate_best_split

REL = 1e-9
DATA = Path(__file__).parent / "data"
CORPUS = DATA / "synthetic_corpus"

TRAINED_SVMS = []


def _train_svm_tracked(dataset, config):
    model = train_svm(dataset, config)
    TRAINED_SVMS.append(model)
    return model


def test_c01_lexical_known_answer_suite():
    """All lexical-metric worked examples at 1e-9 relative tolerance."""
    start = time.monotonic()

    c = lexical_counts(("a", "a", "b"))
    assert (c.total, c.distinct, c.hapax) == (3, 2, 1)
    assert lexical_counts(()) == lexical_counts(())
    assert (lexical_counts(()).total, lexical_counts(()).distinct) == (0, 0)
    toks = [f"u{i}" for i in range(25)]
    for i in range(25):
        toks.extend([f"r{i}"] * 3)
    c100 = lexical_counts(tuple(toks))
    assert (c100.total, c100.distinct, c100.hapax) == (100, 50, 25)

    assert brunet_index(make_counts(1, 1, 1)) == 1.0
    assert brunet_index(make_counts(100, 50, 25)) == pytest.approx(
        10.483015890589444, rel=REL
    )
    with pytest.raises(MetricUndefined):
        brunet_index(lexical_counts(()))

    assert honore_statistic(make_counts(100, 50, 0)) == pytest.approx(
        460.51701859880916, rel=REL
    )
    assert honore_statistic(make_counts(100, 50, 25)) == pytest.approx(
        921.0340371976183, rel=REL
    )
    with pytest.raises(MetricUndefined):
        honore_statistic(make_counts(10, 10, 10))

    assert standardized_entropy(lexical_counts(("a",) * 4)) == 0.0
    assert standardized_entropy(
        lexical_counts(tuple(f"w{i}" for i in range(9)))
    ) == pytest.approx(1.0, rel=REL)
    assert standardized_entropy(lexical_counts(("a", "a", "b", "b"))) == pytest.approx(
        0.5, rel=REL
    )

    assert rttr(make_counts(16, 8, 0)) == pytest.approx(2.0, rel=REL)
    assert rttr(lexical_counts(tuple(f"w{i}" for i in range(49)))) == pytest.approx(
        7.0, rel=REL
    )
    assert rttr(make_counts(100, 50, 25)) == pytest.approx(5.0, rel=REL)

    assert msttr(("a",) * 16) == pytest.approx(0.0625, rel=REL)
    two_segments = tuple(f"w{i}" for i in range(16)) + ("x",) * 16
    assert msttr(two_segments) == pytest.approx(0.53125, rel=REL)
    assert msttr(tuple(f"w{i}" for i in range(16))) == pytest.approx(1.0, rel=REL)

    factors_example = ("a", "b", "c", "d", "e", "a", "a", "a", "a", "a")
    assert mtld(factors_example) == pytest.approx(5.0, rel=REL)
    assert mtld(("a",) * 10) == pytest.approx(2.0, rel=REL)
    with pytest.raises(MetricUndefined):
        mtld(tuple(f"w{i}" for i in range(12)))

    assert hypergeom_pmf_zero(42, 42, 42) == 0.0
    assert hypergeom_pmf_zero(42, 0, 42) == 1.0
    assert hypergeom_pmf_zero(50, 3, 42) == pytest.approx(
        math.comb(47, 42) / math.comb(50, 42), rel=1e-12
    )

    assert hdd(lexical_counts(("a",) * 42)) == pytest.approx(1.0, rel=REL)
    assert hdd(lexical_counts(tuple(f"w{i}" for i in range(42)))) == pytest.approx(
        42.0, rel=REL
    )
    profile = make_counts(50, 20, 10)
    assert hdd(profile) == pytest.approx(hdd_exact(profile), abs=1e-9)
    assert abs(hdd(profile) - hdd_monte_carlo(profile)) <= 0.01
    for n, v, v1 in [(42, 10, 2), (120, 60, 30), (500, 100, 0)]:
        c = make_counts(n, v, v1)
        assert hdd(c) == pytest.approx(hdd_exact(c), abs=1e-9)

    freqs = pos_frequencies((("he", "pronoun"), ("runs", "verb")))
    assert freqs["pronoun_freq"] == 0.5 and freqs["verb_freq"] == 0.5
    assert all(
        v == 0.0
        for v in pos_frequencies(tuple((f"w{i}", "other") for i in range(4))).values()
    )
    tagged = tuple((f"n{i}", "noun") for i in range(3)) + tuple(
        (f"o{i}", "other") for i in range(7)
    )
    assert pos_frequencies(tagged)["noun_freq"] == pytest.approx(0.3, rel=REL)

    vec = linguistic_feature_vector(Document(id="R", text=" ".join(["w"] * 42)))
    assert vec.brunet == pytest.approx(42.0, rel=REL)
    assert vec.honore == pytest.approx(100 * math.log(42), rel=REL)
    assert vec.hdd == pytest.approx(1.0, rel=REL)
    empty = linguistic_feature_vector(Document(id="E", text=""))
    assert all(math.isnan(v) for v in empty.as_row())

    assert time.monotonic() - start < 5.0


def test_c02_monotonicity_properties():
    """Brunet falls with V, Honore rises with hapax share, entropy in [0,1]."""
    rng = np.random.default_rng(101)
    checked = 0
    while checked < 100:
        n = int(rng.integers(50, 500))
        v_lo = int(rng.integers(2, max(3, n // 3)))
        v_hi = int(rng.integers(v_lo + 1, n // 2 + 2))
        if v_hi <= v_lo or 2 * v_hi > n:
            continue
        assert brunet_index(make_counts(n, v_hi, 0)) < brunet_index(
            make_counts(n, v_lo, 0)
        )
        checked += 1

    checked = 0
    while checked < 100:
        n = int(rng.integers(60, 500))
        v = int(rng.integers(5, n // 4))
        v1_lo = int(rng.integers(0, v - 1))
        v1_hi = int(rng.integers(v1_lo + 1, v))
        if n - v1_hi < 2 * (v - v1_hi):
            continue
        assert honore_statistic(make_counts(n, v, v1_hi)) > honore_statistic(
            make_counts(n, v, v1_lo)
        )
        checked += 1

    checked = 0
    while checked < 100:
        n = int(rng.integers(2, 400))
        v = int(rng.integers(1, n + 1))
        c = lexical_counts(tuple(f"w{rng.integers(0, v)}" for _ in range(n)))
        h = standardized_entropy(c)
        assert -1e-12 <= h <= 1.0 + 1e-12
        if c.distinct == 1:
            assert h == 0.0
        if c.distinct == c.total:
            assert h == pytest.approx(1.0, rel=REL)
        checked += 1


def test_c03_tfidf_oracle_equivalence():
    """Transforms equal a brute-force recomputation within 1e-12."""
    from adscreen.vectorize import fit_tfidf, transform_tfidf

    rng = np.random.default_rng(102)
    corpus = [
        tuple(f"w{rng.integers(0, 30)}" for _ in range(rng.integers(1, 50)))
        for _ in range(50)
    ]
    model = fit_tfidf(corpus)
    n = len(corpus)
    for doc in corpus:
        got = transform_tfidf(model, doc)
        expected = {}
        for term in set(doc):
            df = sum(1 for d in corpus if term in d)
            tf = sum(1 for t in doc if t == term)
            expected[model.index[term]] = tf * math.log(n / df)
        assert set(got) == set(expected)
        for col, value in expected.items():
            assert abs(got[col] - value) <= 1e-12


def test_c04_classifier_sanity():
    """Gradient check, separable-data accuracy floors, XOR contrast."""
    start = time.monotonic()

    # (a) analytic gradient vs central finite differences
    rng = np.random.default_rng(103)
    X = rng.normal(size=(50, 6))
    y = rng.integers(0, 2, size=50).astype(float)
    h = 1e-6
    for _ in range(10):
        w = rng.normal(scale=0.7, size=6)
        b = float(rng.normal())
        grad_w, grad_b = logreg_gradient(w, b, X, y, 1e-3)
        for j in range(6):
            e = np.zeros(6)
            e[j] = h
            num = (
                logreg_loss(w + e, b, X, y, 1e-3) - logreg_loss(w - e, b, X, y, 1e-3)
            ) / (2 * h)
            assert abs(num - grad_w[j]) <= 1e-5 * max(1.0, abs(grad_w[j]))
        num_b = (
            logreg_loss(w, b + h, X, y, 1e-3) - logreg_loss(w, b - h, X, y, 1e-3)
        ) / (2 * h)
        assert abs(num_b - grad_b) <= 1e-5 * max(1.0, abs(grad_b))

    # (b) logreg on separable blobs, degree-4 SVM on concentric circles
    Xb, yb = separable_blobs(n=200, margin=2.0, seed=104)
    logreg_model = train_logreg(as_dataset(Xb, yb))
    assert accuracy(predict_labels(logreg_model, Xb), yb) >= 0.95

    Xc, yc = concentric_circles(n=200, seed=0)
    Xc = (Xc - Xc.mean(axis=0)) / Xc.std(axis=0)
    svm_model = _train_svm_tracked(as_dataset(Xc, yc), SvmConfig(degree=4, seed=105))
    assert accuracy(predict_labels(svm_model, Xc), yc) >= 0.95

    # (c) forest beats logreg decisively on XOR under cross-validation
    Xx, yx = xor_points(n=200, seed=106)
    xor_ds = as_dataset(Xx, yx)
    forest_cv = cross_validate(PipelineSpec(classifier="rf"), xor_ds, k=5, seed=107)
    logreg_cv = cross_validate(PipelineSpec(classifier="logreg"), xor_ds, k=5, seed=107)
    assert forest_cv.mean.accuracy >= 0.90
    assert logreg_cv.mean.accuracy <= 0.65

    assert time.monotonic() - start < 60.0


def test_c05_svm_dual_feasibility():
    """0 <= alpha <= C and |sum(alpha_i y_i)| < 1e-6 on every SVM run."""
    # add runs across kernels and C values to the ones criterion 4 trained
    for seed, C, degree in [(0, 1.0, 4), (1, 10.0, 4), (2, 0.5, 1), (3, 1.0, 2)]:
        X, y = separable_blobs(n=80, seed=seed)
        _train_svm_tracked(as_dataset(X, y), SvmConfig(C=C, degree=degree, seed=seed))
    X, y = concentric_circles(n=100, seed=4)
    _train_svm_tracked(as_dataset(X, y), SvmConfig(seed=5))

    assert TRAINED_SVMS, "no SVM training runs recorded"
    for model in TRAINED_SVMS:
        alphas = np.abs(model.dual_coef)
        C = model.config.C
        assert (alphas >= -1e-12).all()
        assert (alphas <= C + 1e-12).all()
        assert model.constraint_residual < 1e-6


def test_c06_best_split_matches_enumeration():
    """Chosen (feature, threshold) equals exhaustive search on 100 instances."""
    rng = np.random.default_rng(108)
    for trial in range(100):
        n = 20
        p = int(rng.integers(1, 6))
        if trial % 2:
            X = rng.normal(size=(n, p))  # continuous: mostly unique values
        else:
            X = rng.integers(0, 4, size=(n, p)).astype(float)  # heavy ties
        y = rng.integers(0, 2, size=n).astype(np.int64)
        got = best_split(X, y, list(range(p)))
        expected = enumerate_best_split(X, y, range(p))
        assert got == expected, f"instance {trial}"


def test_c07_rfe_planted_recovery():
    """>= 4/5 planted columns kept in >= 18/20 seeded trials."""
    start = time.monotonic()
    successes = 0
    for trial in range(20):
        rng = np.random.default_rng(1000 + trial)
        X = rng.normal(size=(300, 50))
        signal = X[:, :5].sum(axis=1)
        y = (signal + rng.normal(scale=0.5, size=300) > 0).astype(int)
        if y.sum() in (0, 300):
            y[0] = 1 - y[0]
        mask = rfe(as_dataset(X, y), target_count=5, seed=trial)
        planted = {f"f{j}" for j in range(5)}
        if len(planted & set(mask.kept)) >= 4:
            successes += 1
    assert successes >= 18
    assert time.monotonic() - start < 30.0


def test_c08_evaluation_harness():
    """Fold balance, metric identities, shuffle null, leakage canary."""
    # stratification bound over randomized (n, k)
    rng = np.random.default_rng(109)
    for _ in range(50):
        k = int(rng.integers(2, 8))
        n_ad = int(rng.integers(k, 60))
        n_cn = int(rng.integers(k, 60))
        labels = ["ad"] * n_ad + ["cn"] * n_cn
        folds = stratified_kfold(labels, k=k, seed=int(rng.integers(10_000)))
        assert sorted(i for f in folds for i in f) == list(range(n_ad + n_cn))
        for lab in ("ad", "cn"):
            sizes = [sum(1 for i in f if labels[i] == lab) for f in folds]
            assert max(sizes) - min(sizes) <= 1

    # F1 harmonic-mean identity and class-swap involution
    for _ in range(100):
        tp, fp, tn, fn = (int(v) for v in rng.integers(0, 25, 4))
        if tp + fp + tn + fn == 0:
            continue
        cm = ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)
        report = metrics(cm)
        if report.headline.f1 is not None:
            assert report.headline.f1 == pytest.approx(
                2 * tp / (2 * tp + fp + fn), rel=1e-12
            )
        assert report.per_class["non-AD"] == metrics(cm.swapped()).headline
        assert cm.swapped().swapped() == cm

    # label-shuffle CV accuracy stays near chance on n=100
    X, y = separable_blobs(n=100, seed=110)
    shuffled = y.copy()
    np.random.default_rng(111).shuffle(shuffled)
    report = cross_validate(
        PipelineSpec(classifier="logreg"), as_dataset(X, shuffled), k=5, seed=42
    )
    assert 0.35 <= report.mean.accuracy <= 0.65

    # leakage canary: corrupting held-out rows leaves train-fitted
    # transforms (and the trained model) bit-identical
    ds = as_dataset(*separable_blobs(n=30, seed=112))
    spec = PipelineSpec(classifier="logreg", name="canary")
    k, seed = 3, 13
    baseline = cross_validate(spec, ds, k=k, seed=seed)
    for fold_no, test_idx in enumerate(stratified_kfold(ds.labels, k=k, seed=seed)):
        values = np.array(ds.table.values, copy=True)
        values[test_idx, :] += 999.0
        perturbed = Dataset(
            table=FeatureTable(
                ids=ds.table.ids, column_names=ds.table.column_names, values=values
            ),
            labels=ds.labels,
        )
        again = cross_validate(spec, perturbed, k=k, seed=seed)
        assert (
            again.transform_fingerprints[fold_no]
            == baseline.transform_fingerprints[fold_no]
        )


def test_c09_end_to_end_determinism(tmp_path):
    """Repeated cv runs on the bundled corpus are byte-identical; report
    shapes match the comparison-table and per-class layouts."""
    out1, out2 = tmp_path / "run1", tmp_path / "run2"
    for out in (out1, out2):
        code = cli_main(
            [
                "cv",
                "--model",
                "model2_linguistic",
                "--transcripts",
                str(CORPUS / "transcripts"),
                "--labels",
                str(CORPUS / "labels.csv"),
                "--k",
                "5",
                "--seed",
                "42",
                "--out",
                str(out),
            ]
        )
        assert code == 0
    for name in ("cv_table.txt", "cv_folds.csv", "manifest.txt"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    # comparison-table shape: LR/RF/SVM rows under the metric columns
    lines = (out1 / "cv_table.txt").read_text().splitlines()
    assert lines[0] == "model2_linguistic"
    header = lines[1]
    for column in ("CV Accuracy", "Precision", "Recall", "Specificity", "F1 Score"):
        assert column in header
    assert [ln.split()[0] for ln in lines[2:5]] == ["LR", "RF", "SVM"]

    # per-class test-report shape on the bundled 70/30 split
    split_dir = tmp_path / "split"
    assert cli_main(
        [
            "split",
            "--features",
            str(CORPUS / "acoustic.csv"),
            "--labels",
            str(CORPUS / "labels.csv"),
            "--train-fraction",
            "0.7",
            "--seed",
            "42",
            "--out",
            str(split_dir),
        ]
    ) == 0
    eval_dir = tmp_path / "eval"
    assert cli_main(
        [
            "evaluate",
            "--train-features",
            str(split_dir / "train_features.csv"),
            "--test-features",
            str(split_dir / "test_features.csv"),
            "--labels",
            str(CORPUS / "labels.csv"),
            "--classifier",
            "logreg",
            "--name",
            "Model 1",
            "--out",
            str(eval_dir),
            "--seed",
            "42",
        ]
    ) == 0
    report = (eval_dir / "test_report.txt").read_text().splitlines()
    assert report[0].split() == ["Model", "Class", "Accuracy", "Recall", "Precision", "F1"]
    assert report[1].startswith("Model 1") and "non-AD" in report[1]
    assert report[2].lstrip().startswith("AD")
