#!/usr/bin/env python3
"""Regenerate the bundled synthetic corpus under tests/data/.

40 picture-description-style transcripts (two classes with different
vocabulary-diversity profiles), a labels CSV, an 88-column acoustic
table, a 768-column embedding table, and a 3-row embedding fixture.
Everything is seeded; rerunning reproduces identical files.
"""

from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent / "tests" / "data"

CORE = (
    "the mother stands at the sink washing dishes while water runs over the edge "
    "and spills onto the kitchen floor behind her a boy climbs on a stool to reach "
    "the cookie jar on the shelf the stool tips to one side and he is about to fall "
    "his sister stands beside him with her hand stretched up waiting for a cookie"
).split()

EXTRA = (
    "window curtain garden path lawn plate cup counter towel apron dress lid crumb "
    "puddle cabinet drawer spoon faucet afternoon ordinary scene frozen wind open "
    "little small quiet busy laughing thinking looking turning slipping reaching "
    "notice hurry wider whole middle home outside above beside around because"
).split()

FILLER = "um uh well so then and the they he she it was is".split()


def make_transcript(rng: np.random.Generator, diverse: bool) -> str:
    words = []
    n_words = int(rng.integers(70, 130))
    while len(words) < n_words:
        roll = rng.random()
        if diverse:
            if roll < 0.55:
                words.append(CORE[rng.integers(0, len(CORE))])
            elif roll < 0.9:
                words.append(EXTRA[rng.integers(0, len(EXTRA))])
            else:
                words.append(FILLER[rng.integers(0, len(FILLER))])
        else:
            # repetitive profile: narrower vocabulary, more fillers,
            # occasional immediate repetitions
            if roll < 0.5:
                words.append(CORE[rng.integers(0, 25)])
            elif roll < 0.75:
                words.append(FILLER[rng.integers(0, len(FILLER))])
            elif words and roll < 0.9:
                words.append(words[-1])
            else:
                words.append(EXTRA[rng.integers(0, 12)])
    sentences = []
    start = 0
    while start < len(words):
        stop = min(len(words), start + int(rng.integers(6, 14)))
        sentences.append(" ".join(words[start:stop]) + ".")
        start = stop
    return " ".join(sentences) + "\n"


def fmt(v: float) -> str:
    return repr(round(float(v), 6))


def write_table(path: Path, ids, names, values) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write("id," + ",".join(names) + "\n")
        for i, subject in enumerate(ids):
            handle.write(subject + "," + ",".join(fmt(v) for v in values[i]) + "\n")


def main() -> None:
    rng = np.random.default_rng(20240917)
    corpus_dir = ROOT / "synthetic_corpus"
    transcripts_dir = corpus_dir / "transcripts"
    transcripts_dir.mkdir(parents=True, exist_ok=True)

    ids = [f"S{i:03d}" for i in range(1, 41)]
    labels = ["ad" if i % 2 == 0 else "cn" for i in range(40)]
    for subject, label in zip(ids, labels):
        text = make_transcript(rng, diverse=(label == "cn"))
        (transcripts_dir / f"{subject}.txt").write_text(text, encoding="utf-8")

    with (corpus_dir / "labels.csv").open("w", encoding="utf-8", newline="\n") as handle:
        handle.write("id,label\n")
        for subject, label in zip(ids, labels):
            handle.write(f"{subject},{label}\n")

    y = np.array([1 if lab == "ad" else 0 for lab in labels], dtype=float)

    acoustic = rng.normal(size=(40, 88))
    acoustic[:, :6] += y[:, None] * 0.8  # a few informative columns
    write_table(
        corpus_dir / "acoustic.csv",
        ids,
        [f"a{j}" for j in range(88)],
        acoustic,
    )

    embeddings = rng.normal(size=(40, 768)) * 0.3
    embeddings[:, :10] += y[:, None] * 0.5
    write_table(
        corpus_dir / "embeddings.csv",
        ids,
        [f"e{j}" for j in range(768)],
        embeddings,
    )

    fixture = rng.normal(size=(3, 768)) * 0.3
    write_table(
        ROOT / "embeddings_3row.csv",
        ["F001", "F002", "F003"],
        [f"e{j}" for j in range(768)],
        fixture,
    )
    print(f"wrote corpus under {corpus_dir}")


if __name__ == "__main__":
    main()
