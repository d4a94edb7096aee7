"""Versioned plain-text model files with bit-exact round-trips.

Layout: a header line ``adscreen-model v1``, then ``kind``, ``config``
key/value lines, one ``feature`` line per column, the kind-specific
parameter body, and a closing ``end``. Floats are written with repr(),
which round-trips exactly in Python.
"""

from __future__ import annotations

from dataclasses import fields
from pathlib import Path
from typing import Iterator

import numpy as np

from ..errors import DataError
from .forest import ForestConfig, ForestModel, TreeNode
from .logreg import LogRegConfig, LogRegModel
from .svm import SvmConfig, SvmModel
from .predict import TrainedModel

FORMAT_HEADER = "adscreen-model v1"


def _fmt(value: float) -> str:
    return repr(float(value))


def _vector(values) -> str:
    return " ".join(_fmt(v) for v in values)


def _config_lines(config) -> list[str]:
    lines = []
    for f in fields(config):
        value = getattr(config, f.name)
        rendered = "none" if value is None else repr(value)
        lines.append(f"config {f.name} {rendered}")
    return lines


def _parse_config(cls, entries: dict[str, str]):
    # every config field is an int, a float, or None
    kwargs = {}
    for f in fields(cls):
        raw = entries[f.name]
        if raw == "none":
            kwargs[f.name] = None
        else:
            try:
                kwargs[f.name] = int(raw)
            except ValueError:
                kwargs[f.name] = float(raw)
    return cls(**kwargs)


def _tree_lines(node: TreeNode, out: list[str]) -> None:
    if node.is_leaf:
        out.append(f"leaf {_fmt(node.probs[0])} {_fmt(node.probs[1])}")
    else:
        out.append(
            f"node {node.feature} {_fmt(node.threshold)} "
            f"{_fmt(node.probs[0])} {_fmt(node.probs[1])}"
        )
        _tree_lines(node.left, out)
        _tree_lines(node.right, out)


def _read_tree(lines: Iterator[str]) -> TreeNode:
    parts = next(lines).split()
    if parts[0] == "leaf":
        return TreeNode(probs=(float(parts[1]), float(parts[2])))
    feature = int(parts[1])
    threshold = float(parts[2])
    probs = (float(parts[3]), float(parts[4]))
    left = _read_tree(lines)
    right = _read_tree(lines)
    return TreeNode(
        probs=probs, feature=feature, threshold=threshold, left=left, right=right
    )


def model_text(model: TrainedModel) -> str:
    """The full v1 plain-text encoding of a trained model."""
    lines = [FORMAT_HEADER, f"kind {model.kind}"]
    lines.extend(_config_lines(model.config))
    lines.append(f"features {len(model.feature_names)}")
    lines.extend(f"feature {name}" for name in model.feature_names)
    if isinstance(model, LogRegModel):
        lines.append("weights " + _vector(model.weights))
        lines.append("bias " + _fmt(model.bias))
    elif isinstance(model, ForestModel):
        lines.append("importances " + _vector(model.importances))
        lines.append(f"trees {len(model.trees)}")
        for tree in model.trees:
            _tree_lines(tree, lines)
    elif isinstance(model, SvmModel):
        lines.append("gamma " + _fmt(model.gamma))
        lines.append("bias " + _fmt(model.bias))
        lines.append(f"bias_rule {model.bias_rule}")
        lines.append(f"converged {int(model.converged)}")
        lines.append("constraint_residual " + _fmt(model.constraint_residual))
        lines.append(f"support_vectors {len(model.dual_coef)}")
        for coef, row in zip(model.dual_coef, model.support_vectors):
            lines.append("sv " + _fmt(coef) + " " + _vector(row))
    else:
        raise DataError(f"cannot serialize model type {type(model).__name__}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def save_model(model: TrainedModel, path: str | Path) -> None:
    Path(path).write_text(model_text(model), encoding="utf-8")


def _expect(line: str, prefix: str, path: Path) -> str:
    if not line.startswith(prefix + " "):
        raise DataError(f"{path}: expected '{prefix} ...', got {line!r}")
    return line[len(prefix) + 1 :]


def model_from_text(text: str, origin: str | Path = "<memory>") -> TrainedModel:
    path = Path(origin)
    raw = text.splitlines()
    if not raw or raw[0] != FORMAT_HEADER:
        raise DataError(f"{path}: not an adscreen v1 model file")
    lines = iter(raw[1:])
    kind = _expect(next(lines), "kind", path)
    config_entries: dict[str, str] = {}
    line = next(lines)
    while line.startswith("config "):
        _, key, value = line.split(" ", 2)
        config_entries[key] = value
        line = next(lines)
    n_features = int(_expect(line, "features", path))
    names = tuple(_expect(next(lines), "feature", path) for _ in range(n_features))
    try:
        if kind == "logreg":
            config = _parse_config(LogRegConfig, config_entries)
            weights = np.array([float(v) for v in _expect(next(lines), "weights", path).split()])
            bias = float(_expect(next(lines), "bias", path))
            model: TrainedModel = LogRegModel(
                weights=weights, bias=bias, config=config, feature_names=names
            )
        elif kind == "rf":
            config = _parse_config(ForestConfig, config_entries)
            importances = tuple(
                float(v) for v in _expect(next(lines), "importances", path).split()
            )
            n_trees = int(_expect(next(lines), "trees", path))
            trees = tuple(_read_tree(lines) for _ in range(n_trees))
            model = ForestModel(
                trees=trees, config=config, feature_names=names, importances=importances
            )
        elif kind == "svm":
            config = _parse_config(SvmConfig, config_entries)
            gamma = float(_expect(next(lines), "gamma", path))
            bias = float(_expect(next(lines), "bias", path))
            bias_rule = _expect(next(lines), "bias_rule", path)
            converged = bool(int(_expect(next(lines), "converged", path)))
            residual = float(_expect(next(lines), "constraint_residual", path))
            n_sv = int(_expect(next(lines), "support_vectors", path))
            coefs = []
            rows = []
            for _ in range(n_sv):
                parts = _expect(next(lines), "sv", path).split()
                coefs.append(float(parts[0]))
                rows.append([float(v) for v in parts[1:]])
            model = SvmModel(
                support_vectors=np.array(rows).reshape(n_sv, n_features),
                dual_coef=np.array(coefs),
                bias=bias,
                gamma=gamma,
                config=config,
                feature_names=names,
                bias_rule=bias_rule,
                converged=converged,
                constraint_residual=residual,
            )
        else:
            raise DataError(f"{path}: unknown model kind {kind!r}")
    except (StopIteration, ValueError, IndexError, KeyError) as exc:
        raise DataError(f"{path}: truncated or malformed model file: {exc}") from exc
    if next(lines, None) != "end":
        raise DataError(f"{path}: missing end marker")
    return model


def load_model(path: str | Path) -> TrainedModel:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"model file not found: {path}")
    return model_from_text(path.read_text(encoding="utf-8"), origin=path)
