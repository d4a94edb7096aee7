"""Batch command-line front end.

Subcommands: features, select, cv, train, predict, evaluate. A flat
``key=value`` config file can seed any flag (command-line values win).
Every output directory receives a manifest sufficient to re-run the
command: the resolved configuration, the master seed, and SHA-256 hashes
of all inputs. Exit codes: 0 success, 1 usage error, 2 data/schema
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import (
    EGEMAPS_WIDTH,
    EMBEDDING_WIDTH,
    Dataset,
    DocumentSet,
    FeatureTable,
    align_dataset,
    load_feature_table,
    load_labels,
    load_transcripts,
    split_train_test,
    write_feature_table,
)
from .errors import DataError, MetricUndefined, NumericError, UsageError
from .evaluate import (
    cross_validate,
    cv_report_csv,
    eval_report_csv,
    render_cv_table,
    render_test_report,
    train_test_evaluate,
)
from .lexical import FEATURE_NAMES, linguistic_feature_vector
from .models.common import CLASSIFIER_KINDS
from .pipeline import PipelineSpec, fit_pipeline, load_pipeline, save_pipeline
from .selection import load_mask, rfe, save_mask
from .textproc import default_lexicon, load_lexicon, load_pretagged, tokenize
from .vectorize import concat_tables, fit_tfidf, load_tfidf_model, save_tfidf_model, tfidf_table

log = logging.getLogger(__name__)

MODEL_IDS = ("model1_acoustic", "model2_linguistic", "model3_bert_tfidf")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # noqa: D102 - argparse hook
        raise UsageError(message)


def _read_config_file(path: str) -> dict[str, str]:
    config_path = Path(path)
    if not config_path.is_file():
        raise UsageError(f"config file not found: {config_path}")
    values: dict[str, str] = {}
    for line_no, raw in enumerate(config_path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{config_path}:{line_no}: expected key=value")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _hash_input(path: Path) -> str:
    if path.is_dir():
        digest = hashlib.sha256()
        for child in sorted(path.iterdir()):
            if child.is_file():
                digest.update(child.name.encode())
                digest.update(bytes.fromhex(_sha256(child)))
        return digest.hexdigest()
    return _sha256(path)


def _write_manifest(out_dir: Path, command: str, args: argparse.Namespace, inputs: list[str]) -> None:
    lines = [f"tool adscreen {__version__}", f"command {command}"]
    skip = {"config", "func", "out"}
    for key in sorted(vars(args)):
        if key in skip:
            continue
        value = getattr(args, key)
        if value is None:
            continue
        lines.append(f"arg {key}={value}")
    for raw in inputs:
        path = Path(raw)
        if path.exists():
            lines.append(f"input {raw} sha256:{_hash_input(path)}")
    (out_dir / "manifest.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_embeddings(path: str) -> FeatureTable:
    table = load_feature_table(path, expected_width=EMBEDDING_WIDTH)
    expected = tuple(f"e{i}" for i in range(EMBEDDING_WIDTH))
    if table.column_names != expected:
        raise DataError(
            f"{path}: embedding columns must be named e0..e{EMBEDDING_WIDTH - 1}"
        )
    return table


def _tokenized_docs(docs: DocumentSet) -> dict[str, tuple[str, ...]]:
    return {doc.id: tokenize(doc.text) for doc in docs}


def _vector_row(payload) -> tuple[float, ...]:
    doc, lexicon, tagged, mtld_mode = payload
    return linguistic_feature_vector(
        doc, lexicon=lexicon, tagged=tagged, mtld_mode=mtld_mode
    ).as_row()


def _linguistic_table(docs: DocumentSet, args: argparse.Namespace) -> FeatureTable:
    lexicon = load_lexicon(args.lexicon) if args.lexicon else default_lexicon()
    pretagged_dir = Path(args.pretagged) if args.pretagged else None
    payloads = []
    for doc in docs:
        tagged = None
        if pretagged_dir is not None:
            tag_path = pretagged_dir / f"{doc.id}.tsv"
            if not tag_path.is_file():
                raise DataError(f"no pre-tagged file for id {doc.id!r}: {tag_path}")
            tagged = load_pretagged(tag_path)
        payloads.append((doc, lexicon, tagged, args.mtld_mode))
    jobs = getattr(args, "jobs", 1) or 1
    if jobs > 1 and len(payloads) > 1:
        # per-document extraction is pure; map preserves document order
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_vector_row, payloads, chunksize=4))
    else:
        rows = [_vector_row(p) for p in payloads]
    incomplete = sum(1 for row in rows if any(math.isnan(v) for v in row))
    if incomplete:
        log.warning("%d document(s) have undefined metric values (marked NA)", incomplete)
    return FeatureTable(
        ids=docs.ids,
        column_names=FEATURE_NAMES,
        values=np.array(rows, dtype=float) if rows else np.empty((0, len(FEATURE_NAMES))),
    )


def cmd_features(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    inputs = []
    if args.model == "model1_acoustic":
        if not args.acoustic:
            raise UsageError("model1_acoustic requires --acoustic CSV")
        table = load_feature_table(args.acoustic, expected_width=EGEMAPS_WIDTH)
        write_feature_table(table, out / "acoustic.csv")
        inputs.append(args.acoustic)
    elif args.model == "model2_linguistic":
        if not args.transcripts:
            raise UsageError("model2_linguistic requires --transcripts DIR")
        docs = load_transcripts(args.transcripts, allow_empty=True)
        table = _linguistic_table(docs, args)
        write_feature_table(table, out / "linguistic.csv")
        inputs.append(args.transcripts)
    elif args.model == "model3_bert_tfidf":
        if not (args.transcripts and args.embeddings):
            raise UsageError("model3_bert_tfidf requires --transcripts and --embeddings")
        docs = load_transcripts(args.transcripts, allow_empty=True)
        embeddings = _load_embeddings(args.embeddings)
        missing = [i for i in embeddings.ids if i not in set(docs.ids)]
        extra = [i for i in docs.ids if i not in set(embeddings.ids)]
        if missing or extra:
            raise DataError(
                "transcripts and embeddings disagree on ids: "
                + ", ".join(missing + extra)
            )
        tokenized = [tokenize(docs.by_id(i).text) for i in embeddings.ids]
        if args.tfidf_vocab:
            model = load_tfidf_model(args.tfidf_vocab)
        else:
            model = fit_tfidf(tokenized, min_df=args.min_df)
            save_tfidf_model(model, out / "tfidf_vocab.json")
        tfidf = tfidf_table(model, embeddings.ids, tokenized)
        write_feature_table(tfidf, out / "tfidf.csv")
        fused = concat_tables(
            [("bert", embeddings, EMBEDDING_WIDTH), (None, tfidf, None)]
        )
        write_feature_table(fused, out / "fused.csv")
        inputs.extend([args.transcripts, args.embeddings])
    else:
        raise UsageError(f"unknown model id {args.model!r}")
    _write_manifest(out, "features", args, inputs)
    return 0


def cmd_select(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    table = load_feature_table(args.features, allow_missing=True)
    labels = load_labels(args.labels)
    dataset = align_dataset(table, labels, strict=not args.lenient)
    if np.isnan(dataset.table.values).any():
        from .vectorize import fit_imputer

        dataset = Dataset(
            table=fit_imputer(dataset.table).apply(dataset.table),
            labels=dataset.labels,
        )
    mask = rfe(
        dataset,
        target_count=args.target,
        step=args.step,
        seed=args.seed,
        scorer=args.scorer,
    )
    save_mask(mask, out / "mask.csv")
    _write_manifest(out, "select", args, [args.features, args.labels])
    return 0


def _build_spec(args: argparse.Namespace, classifier: str, tfidf_docs=None) -> PipelineSpec:
    preselected = None
    if getattr(args, "mask", None):
        preselected = load_mask(args.mask)
    return PipelineSpec(
        classifier=classifier,
        name=getattr(args, "model", None) or getattr(args, "name", None) or classifier,
        tfidf_docs=tfidf_docs,
        tfidf_min_df=getattr(args, "min_df", 1),
        rfe_target=getattr(args, "rfe_target", None),
        rfe_step=getattr(args, "rfe_step", 1),
        rfe_scorer=getattr(args, "rfe_scorer", "logreg"),
        preselected=preselected,
        standardize=True,
        seed=args.seed,
    )


def _model_inputs(args: argparse.Namespace) -> tuple[Dataset, dict | None, list[str]]:
    """Load the static table (+ optional token corpus) for a model id."""
    labels = load_labels(args.labels)
    inputs = [args.labels]
    tfidf_docs = None
    if args.model == "model1_acoustic":
        if not args.acoustic:
            raise UsageError("model1_acoustic requires --acoustic CSV")
        table = load_feature_table(args.acoustic, expected_width=EGEMAPS_WIDTH)
        inputs.append(args.acoustic)
    elif args.model == "model2_linguistic":
        if not args.transcripts:
            raise UsageError("model2_linguistic requires --transcripts DIR")
        docs = load_transcripts(args.transcripts, allow_empty=True)
        table = _linguistic_table(docs, args)
        inputs.append(args.transcripts)
    elif args.model == "model3_bert_tfidf":
        if not (args.transcripts and args.embeddings):
            raise UsageError("model3_bert_tfidf requires --transcripts and --embeddings")
        docs = load_transcripts(args.transcripts, allow_empty=True)
        embeddings = _load_embeddings(args.embeddings)
        table = concat_tables([("bert", embeddings, EMBEDDING_WIDTH)])
        tfidf_docs = _tokenized_docs(docs)
        inputs.extend([args.transcripts, args.embeddings])
    else:
        raise UsageError(f"unknown model id {args.model!r}")
    if getattr(args, "mask", None):
        inputs.append(args.mask)
    dataset = align_dataset(table, labels, strict=not args.lenient)
    return dataset, tfidf_docs, inputs


def cmd_cv(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    dataset, tfidf_docs, inputs = _model_inputs(args)
    classifiers = [c.strip() for c in args.classifiers.split(",") if c.strip()]
    for classifier in classifiers:
        if classifier not in CLASSIFIER_KINDS:
            raise UsageError(f"unknown classifier {classifier!r}")
    rows = []
    for classifier in classifiers:
        spec = _build_spec(args, classifier, tfidf_docs)
        rows.append((classifier, cross_validate(spec, dataset, k=args.k, seed=args.seed)))
    (out / "cv_table.txt").write_text(
        render_cv_table(args.model, rows), encoding="utf-8"
    )
    (out / "cv_folds.csv").write_text(cv_report_csv(rows), encoding="utf-8")
    _write_manifest(out, "cv", args, inputs)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    table = load_feature_table(args.features, allow_missing=True)
    labels = load_labels(args.labels)
    dataset = align_dataset(table, labels, strict=not args.lenient)
    fitted = fit_pipeline(_build_spec(args, args.classifier), dataset)
    save_pipeline(fitted, out / "model.pipeline")
    inputs = [args.features, args.labels]
    if args.mask:
        inputs.append(args.mask)
    _write_manifest(out, "train", args, inputs)
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    fitted = load_pipeline(args.model_file)
    table = load_feature_table(args.features, allow_missing=True)
    labels = fitted.predict(table)
    scores = fitted.scores(table)
    with (out / "predictions.csv").open("w", encoding="utf-8", newline="\n") as handle:
        handle.write("id,predicted_label,score\n")
        for subject, label, score in zip(table.ids, labels, scores):
            handle.write(f"{subject},{label},{score!r}\n")
    _write_manifest(out, "predict", args, [args.model_file, args.features])
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    train_table = load_feature_table(args.train_features, allow_missing=True)
    test_table = load_feature_table(args.test_features, allow_missing=True)
    labels = load_labels(args.labels)
    train = align_dataset(train_table, labels, strict=not args.lenient)
    test = align_dataset(test_table, labels, strict=not args.lenient)
    report = train_test_evaluate(_build_spec(args, args.classifier), train, test)
    (out / "test_report.txt").write_text(
        render_test_report(args.name, report), encoding="utf-8"
    )
    (out / "test_report.csv").write_text(eval_report_csv(report), encoding="utf-8")
    _write_manifest(
        out, "evaluate", args, [args.train_features, args.test_features, args.labels]
    )
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    table = load_feature_table(args.features, allow_missing=True)
    labels = load_labels(args.labels)
    dataset = align_dataset(table, labels, strict=not args.lenient)
    train, test = split_train_test(
        dataset, args.train_fraction, seed=args.seed, stratified=not args.no_stratify
    )
    write_feature_table(train.table, out / "train_features.csv")
    write_feature_table(test.table, out / "test_features.csv")
    _write_manifest(out, "split", args, [args.features, args.labels])
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="master random seed")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument(
        "--lenient",
        action="store_true",
        help="drop unlabeled rows instead of failing",
    )
    parser.add_argument("--config", help="flat key=value config file")


def _add_model_inputs(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", required=True, choices=MODEL_IDS)
    parser.add_argument("--transcripts", help="directory of <id>.txt transcripts")
    parser.add_argument("--acoustic", help="88-column acoustic feature CSV")
    parser.add_argument("--embeddings", help="768-column embedding CSV")
    parser.add_argument("--lexicon", help="override tagging lexicon file")
    parser.add_argument("--pretagged", help="directory of <id>.tsv pre-tagged tokens")
    parser.add_argument(
        "--mtld-mode",
        choices=("literal", "standard"),
        default="literal",
        help="factor-count formula variant",
    )
    parser.add_argument("--min-df", type=int, default=1, help="tf-idf vocabulary pruning")


def _add_rfe(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--rfe-target",
        type=int,
        help="fold-nested elimination down to this count",
    )
    parser.add_argument("--rfe-step", type=int, default=1)
    parser.add_argument("--rfe-scorer", choices=("logreg", "rf"), default="logreg")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adscreen", description=__doc__)
    parser.add_argument("--version", action="version", version=f"adscreen {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("features", help="compute/validate feature tables")
    _add_model_inputs(p)
    p.add_argument("--tfidf-vocab", help="reuse a fitted tf-idf vocabulary (JSON)")
    p.add_argument("--jobs", type=int, default=1, help="parallel feature workers")
    _add_common(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("select", help="feature selection mask")
    p.add_argument("method", choices=("rfe",), help="selection method")
    p.add_argument("--features", required=True, help="feature CSV")
    p.add_argument("--labels", required=True, help="labels CSV")
    p.add_argument("--target", type=int, required=True, help="features to keep")
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--scorer", choices=("logreg", "rf"), default="logreg")
    _add_common(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("cv", help="stratified k-fold cross-validation")
    _add_model_inputs(p)
    p.add_argument("--labels", required=True)
    p.add_argument(
        "--classifiers",
        default="logreg,rf,svm",
        help="comma list from {logreg, rf, svm}",
    )
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--jobs", type=int, default=1, help="parallel feature workers")
    p.add_argument("--mask", help="precomputed selection mask CSV (global mode)")
    _add_rfe(p)
    _add_common(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("train", help="fit a pipeline on a feature table")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--classifier", choices=CLASSIFIER_KINDS, required=True)
    p.add_argument("--mask", help="precomputed selection mask CSV (global mode)")
    _add_rfe(p)
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score a feature table with a saved pipeline")
    p.add_argument("--model-file", required=True, help="saved .pipeline file")
    p.add_argument("--features", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="train/test per-class report")
    p.add_argument("--train-features", required=True)
    p.add_argument("--test-features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--classifier", choices=CLASSIFIER_KINDS, required=True)
    p.add_argument("--name", default="Model", help="report row label")
    p.add_argument("--mask", help="precomputed selection mask CSV (global mode)")
    _add_rfe(p)
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("split", help="stratified train/test split of a feature table")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--no-stratify", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_split)
    return parser


def _apply_config_file(argv: list[str], parser: argparse.ArgumentParser) -> list[str]:
    """Inject config-file values as defaults; explicit flags still win."""
    if "--config" not in argv:
        return argv
    at = argv.index("--config")
    if at + 1 >= len(argv):
        raise UsageError("--config needs a file path")
    values = _read_config_file(argv[at + 1])
    extra: list[str] = []
    for key, value in values.items():
        flag = "--" + key.replace("_", "-")
        if flag in argv:
            continue  # command line overrides the file
        if value.lower() in ("true", "1") and key in ("lenient", "no_stratify"):
            extra.append(flag)
        else:
            extra.extend([flag, value])
    # caller re-prefixes the subcommand, so extras come right after it
    return extra + argv


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if argv and not argv[0].startswith("-"):
            argv = argv[:1] + _apply_config_file(argv[1:], parser)
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, MetricUndefined) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
