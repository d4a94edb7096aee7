"""Tokenization and coarse rule-based part-of-speech tagging.

The tagger resolves each token by exact lexicon lookup, then ordered
suffix rules, then a default tag. Only five tag categories feed the
feature pipeline; everything else is ``other``. Tagging is pluggable:
pre-tagged ``token<TAB>tag`` files can replace the built-in tagger.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DataError

TokenSequence = tuple[str, ...]
TaggedSequence = tuple[tuple[str, str], ...]

TAG_VERB = "verb"
TAG_NOUN = "noun"
TAG_PRONOUN = "pronoun"
TAG_ADVERB = "adverb"
TAG_ADJECTIVE = "adjective"
TAG_OTHER = "other"
TAGSET = (TAG_VERB, TAG_NOUN, TAG_PRONOUN, TAG_ADVERB, TAG_ADJECTIVE, TAG_OTHER)

# word characters without underscore; internal apostrophes glue contractions
_TOKEN_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)*")

DEFAULT_SUFFIX_RULES: tuple[tuple[str, str], ...] = (
    ("ly", TAG_ADVERB),
    ("ing", TAG_VERB),
    ("ed", TAG_VERB),
    ("ize", TAG_VERB),
    ("ous", TAG_ADJECTIVE),
    ("ful", TAG_ADJECTIVE),
    ("ive", TAG_ADJECTIVE),
    ("able", TAG_ADJECTIVE),
)


def tokenize(text: str) -> TokenSequence:
    """Lowercased word tokens; punctuation is stripped, not emitted.

    Internal apostrophes are kept ("don't" is one token) and digit runs
    count as tokens.
    """
    lowered = text.replace("’", "'").lower()
    return tuple(_TOKEN_RE.findall(lowered))


@dataclass(frozen=True)
class PosLexicon:
    entries: Mapping[str, str]
    suffix_rules: tuple[tuple[str, str], ...] = DEFAULT_SUFFIX_RULES
    default_tag: str = TAG_NOUN

    def __post_init__(self) -> None:
        for suffix, tag in self.suffix_rules:
            if not suffix:
                raise DataError("empty suffix in suffix rule")
            if tag not in TAGSET:
                raise DataError(f"unknown tag {tag!r} in suffix rule {suffix!r}")
        if self.default_tag not in TAGSET:
            raise DataError(f"unknown default tag {self.default_tag!r}")

    def tag_for(self, token: str) -> str:
        hit = self.entries.get(token)
        if hit is not None:
            return hit
        for suffix, tag in self.suffix_rules:
            if len(token) > len(suffix) and token.endswith(suffix):
                return tag
        return self.default_tag


def pos_tag(seq: Sequence[str], lexicon: PosLexicon) -> TaggedSequence:
    return tuple((token, lexicon.tag_for(token)) for token in seq)


def _parse_tagged_lines(lines: Iterable[str], origin: str) -> list[tuple[str, str]]:
    pairs: list[tuple[str, str]] = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"{origin}:{line_no}: expected 'word<TAB>tag'")
        word, tag = parts[0].strip(), parts[1].strip()
        if not word:
            raise DataError(f"{origin}:{line_no}: empty word")
        if tag not in TAGSET:
            raise DataError(f"{origin}:{line_no}: unknown tag {tag!r}")
        pairs.append((word, tag))
    return pairs


def load_lexicon(path: str | Path) -> PosLexicon:
    """Read a ``word<TAB>tag`` lexicon file; ``#`` starts a comment line."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"lexicon file not found: {path}")
    pairs = _parse_tagged_lines(path.read_text(encoding="utf-8").splitlines(), str(path))
    return PosLexicon(entries=dict(pairs))


@lru_cache(maxsize=1)
def default_lexicon() -> PosLexicon:
    """Bundled English lexicon with the default suffix rules."""
    text = resources.files("adscreen.data").joinpath("pos_lexicon.txt").read_text("utf-8")
    pairs = _parse_tagged_lines(text.splitlines(), "pos_lexicon.txt")
    return PosLexicon(entries=dict(pairs))


def load_pretagged(path: str | Path) -> TaggedSequence:
    """Read a pre-tagged document: one ``token<TAB>tag`` pair per line."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"pre-tagged file not found: {path}")
    pairs = _parse_tagged_lines(path.read_text(encoding="utf-8").splitlines(), str(path))
    return tuple(pairs)
