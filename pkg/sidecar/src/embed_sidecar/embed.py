"""Batch embedding export with a frozen pre-trained encoder.

Per transcript: tokenize to sub-words, truncate at the encoder's
positional limit, run one forward pass in inference mode, and pool the
final-layer token states (mask-aware mean by default, or the first
token with ``cls``). No fine-tuning happens here; the encoder weights
are used exactly as loaded, so repeated runs are byte-identical.
"""

from __future__ import annotations

import logging
import unicodedata
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

EMBEDDING_WIDTH = 768
POOLINGS = ("mean", "cls")
DEFAULT_MODEL = "bert-base-uncased"


class SidecarError(RuntimeError):
    pass


def load_encoder(model_name_or_path: str):
    """Load a tokenizer/encoder pair from a local path or the cache.

    The encoder must produce 768-dimensional hidden states; anything
    else violates the output contract and is rejected.
    """
    import torch
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(model_name_or_path)
        model = AutoModel.from_pretrained(model_name_or_path)
    except Exception as exc:  # transformers raises several unrelated types
        raise SidecarError(
            f"pre-trained model {model_name_or_path!r} unavailable locally; "
            f"download it on a connected machine or pass a local path ({exc})"
        ) from exc
    hidden = getattr(model.config, "hidden_size", None)
    if hidden != EMBEDDING_WIDTH:
        raise SidecarError(
            f"encoder hidden size {hidden} does not match the "
            f"{EMBEDDING_WIDTH}-column output contract"
        )
    model.eval()
    for parameter in model.parameters():
        parameter.requires_grad_(False)
    return tokenizer, model


def _max_length(tokenizer, model) -> int:
    limit = getattr(model.config, "max_position_embeddings", 512)
    declared = getattr(tokenizer, "model_max_length", limit)
    if declared and declared < 1_000_000:
        return min(int(declared), int(limit))
    return int(limit)


def embed_texts(
    texts: list[str],
    tokenizer,
    model,
    pooling: str = "mean",
    batch_size: int = 16,
) -> np.ndarray:
    """Embed a list of texts into (n, 768); empty texts become zero rows."""
    import torch

    if pooling not in POOLINGS:
        raise SidecarError(f"unknown pooling {pooling!r}; expected one of {POOLINGS}")
    rows = np.zeros((len(texts), EMBEDDING_WIDTH))
    todo = [(i, t) for i, t in enumerate(texts) if t.strip()]
    max_length = _max_length(tokenizer, model)
    with torch.no_grad():
        for start in range(0, len(todo), batch_size):
            batch = todo[start : start + batch_size]
            encoded = tokenizer(
                [t for _, t in batch],
                padding=True,
                truncation=True,
                max_length=max_length,
                return_tensors="pt",
            )
            states = model(**encoded).last_hidden_state  # (b, t, 768)
            if pooling == "cls":
                pooled = states[:, 0, :]
            else:
                mask = encoded["attention_mask"].unsqueeze(-1).to(states.dtype)
                pooled = (states * mask).sum(dim=1) / mask.sum(dim=1)
            for (row, _), vector in zip(batch, pooled):
                rows[row] = vector.numpy().astype(np.float64)
    return rows


def read_transcripts(transcript_dir: str | Path) -> list[tuple[str, str]]:
    """(id, text) pairs sorted by id; id = NFC-normalized file stem."""
    root = Path(transcript_dir)
    if not root.is_dir():
        raise SidecarError(f"transcript directory not found: {root}")
    seen: dict[str, Path] = {}
    out: list[tuple[str, str]] = []
    for path in sorted(root.iterdir()):
        if not path.is_file() or path.suffix.lower() != ".txt":
            continue
        doc_id = unicodedata.normalize("NFC", path.stem)
        if doc_id in seen:
            raise SidecarError(
                f"duplicate subject id {doc_id!r}: {path} collides with {seen[doc_id]}"
            )
        seen[doc_id] = path
        try:
            text = path.read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            raise SidecarError(f"invalid UTF-8 in {path}: {exc}") from exc
        if not text.strip():
            log.warning("empty transcript %s: writing a zero vector", path)
        out.append((doc_id, text))
    return sorted(out)


def write_embedding_csv(path: str | Path, ids: list[str], rows: np.ndarray) -> None:
    header = "id," + ",".join(f"e{i}" for i in range(EMBEDDING_WIDTH))
    with Path(path).open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(header + "\n")
        for doc_id, row in zip(ids, rows):
            handle.write(doc_id + "," + ",".join(repr(float(v)) for v in row) + "\n")


def embed_transcripts(
    transcript_dir: str | Path,
    out_csv: str | Path,
    model_name_or_path: str = DEFAULT_MODEL,
    pooling: str = "mean",
    batch_size: int = 16,
) -> int:
    """Embed every transcript and write the contract CSV. Returns row count."""
    pairs = read_transcripts(transcript_dir)
    tokenizer, model = load_encoder(model_name_or_path)
    rows = embed_texts([text for _, text in pairs], tokenizer, model, pooling, batch_size)
    write_embedding_csv(out_csv, [doc_id for doc_id, _ in pairs], rows)
    return len(pairs)
