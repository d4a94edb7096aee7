"""Lexical diversity metrics and the 13-value linguistic feature vector.

Feature order (also the CSV header order): brunet, honore, std_entropy,
rttr, msttr, mtld, hdd, ttr, then the five part-of-speech frequencies.
Values a metric cannot produce for a given text (singularities, texts
shorter than a metric's minimum length) are NaN in the assembled vector;
downstream training imputes them per fold.

Conventions fixed here: Honore's statistic uses the natural log; the
standardized entropy uses base 2 in both numerator and denominator; the
diversity-from-sampling score uses a 42-word sample and exact
hypergeometric probabilities evaluated in log space.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import Document
from .errors import MetricUndefined
from .textproc import (
    TAG_ADJECTIVE,
    TAG_ADVERB,
    TAG_NOUN,
    TAG_PRONOUN,
    TAG_VERB,
    PosLexicon,
    TaggedSequence,
    TokenSequence,
    default_lexicon,
    pos_tag,
    tokenize,
)

BRUNET_SCALING = 0.172
MSTTR_SEGMENT = 16
MTLD_THRESHOLD = 0.72
HDD_SAMPLE = 42

FEATURE_NAMES = (
    "brunet",
    "honore",
    "std_entropy",
    "rttr",
    "msttr",
    "mtld",
    "hdd",
    "ttr",
    "verb_freq",
    "noun_freq",
    "pronoun_freq",
    "adverb_freq",
    "adjective_freq",
)


@dataclass(frozen=True)
class LexicalCounts:
    """Word-frequency tallies: N tokens, V types, v1 hapax legomena."""

    total: int
    distinct: int
    hapax: int
    freq: Mapping[str, int]

    def __post_init__(self) -> None:
        if self.total != sum(self.freq.values()):
            raise ValueError("total must equal the sum of frequencies")
        if self.distinct != len(self.freq):
            raise ValueError("distinct must equal the number of frequency entries")
        if self.hapax != sum(1 for c in self.freq.values() if c == 1):
            raise ValueError("hapax must count words occurring exactly once")


def lexical_counts(seq: Sequence[str]) -> LexicalCounts:
    freq = Counter(seq)
    return LexicalCounts(
        total=len(seq),
        distinct=len(freq),
        hapax=sum(1 for c in freq.values() if c == 1),
        freq=dict(freq),
    )


def brunet_index(c: LexicalCounts, a: float = BRUNET_SCALING) -> float:
    """W = N^(V^-a); lower W means richer vocabulary."""
    if c.total < 1 or c.distinct < 1:
        raise MetricUndefined("brunet index needs at least one word")
    return c.total ** (c.distinct ** (-a))


def honore_statistic(c: LexicalCounts) -> float:
    """R = 100 ln(N) / (1 - v1/V); singular when every word is a hapax."""
    if c.total < 1 or c.distinct < 1:
        raise MetricUndefined("honore statistic needs at least one word")
    if c.hapax == c.distinct:
        raise MetricUndefined("honore statistic singular: all words are hapax")
    return 100.0 * math.log(c.total) / (1.0 - c.hapax / c.distinct)


def standardized_entropy(c: LexicalCounts) -> float:
    """Shannon word entropy over log2(N); in [0, 1] for N >= 2."""
    if c.total < 2:
        raise MetricUndefined("standardized entropy needs at least two words")
    n = c.total
    # summation in sorted-word order so equal bags give bit-equal results
    entropy = -sum(
        (k / n) * math.log2(k / n) for _, k in sorted(c.freq.items())
    )
    return entropy / math.log2(n)


def rttr(c: LexicalCounts) -> float:
    """Root type-token ratio V / sqrt(N)."""
    if c.total < 1:
        raise MetricUndefined("rttr needs at least one word")
    return c.distinct / math.sqrt(c.total)


def ttr(c: LexicalCounts) -> float:
    if c.total < 1:
        raise MetricUndefined("ttr needs at least one word")
    return c.distinct / c.total


def msttr(seq: Sequence[str], segment_len: int = MSTTR_SEGMENT) -> float:
    """Mean TTR over consecutive full segments; the trailing partial is dropped."""
    if segment_len < 1:
        raise MetricUndefined(f"segment length must be positive, got {segment_len}")
    n_segments = len(seq) // segment_len
    if n_segments == 0:
        raise MetricUndefined(
            f"msttr needs at least {segment_len} words, got {len(seq)}"
        )
    total = 0.0
    for s in range(n_segments):
        segment = seq[s * segment_len : (s + 1) * segment_len]
        total += len(set(segment)) / segment_len
    return total / n_segments


def _mtld_forward(seq: Sequence[str], threshold: float) -> tuple[int, float]:
    """One forward pass: (completed factors, running TTR of the remainder).

    A factor completes at the first token where the running TTR drops to
    the threshold or below; both counters then reset.
    """
    factors = 0
    types: set[str] = set()
    count = 0
    running = 1.0
    for token in seq:
        count += 1
        types.add(token)
        running = len(types) / count
        if running <= threshold:
            factors += 1
            types.clear()
            count = 0
            running = 1.0
    return factors, (running if count > 0 else 1.0)


def mtld(
    seq: Sequence[str],
    threshold: float = MTLD_THRESHOLD,
    mode: str = "literal",
) -> float:
    """Mean factor length: total token count over the number of factors.

    ``literal`` counts completed factors only and is undefined when the
    running TTR never crosses the threshold. ``standard`` credits the
    trailing remainder as a partial factor (1 - TTR_end) / (1 - threshold)
    and averages a forward and a reversed pass.
    """
    n = len(seq)
    if n == 0:
        raise MetricUndefined("mtld needs at least one word")
    if mode == "literal":
        factors, _ = _mtld_forward(seq, threshold)
        if factors == 0:
            raise MetricUndefined("mtld undefined: running TTR never crossed threshold")
        return n / factors
    if mode != "standard":
        raise ValueError(f"unknown mtld mode {mode!r}")
    lengths = []
    for direction in (seq, tuple(reversed(seq))):
        factors, end_ttr = _mtld_forward(direction, threshold)
        partial = (1.0 - end_ttr) / (1.0 - threshold)
        denom = factors + partial
        if denom == 0:
            raise MetricUndefined("mtld undefined: no factor completed in either direction")
        lengths.append(n / denom)
    return (lengths[0] + lengths[1]) / 2.0


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def hypergeom_pmf_zero(pop: int, successes: int, draws: int) -> float:
    """P(no marked item in a without-replacement sample).

    Equals C(pop - successes, draws) / C(pop, draws); evaluated in log
    space to stay stable for large counts.
    """
    if pop < 0 or not 0 <= successes <= pop or not 0 <= draws <= pop:
        raise ValueError(
            f"invalid hypergeometric parameters pop={pop}, "
            f"successes={successes}, draws={draws}"
        )
    if successes == 0:
        return 1.0
    if draws > pop - successes:
        return 0.0
    return math.exp(_log_comb(pop - successes, draws) - _log_comb(pop, draws))


def hdd(c: LexicalCounts, sample: int = HDD_SAMPLE) -> float:
    """Expected number of distinct types in a fixed-size random sample.

    Sum over types of the probability that the type appears at least once
    in ``sample`` draws without replacement.
    """
    if c.total < sample:
        raise MetricUndefined(
            f"hdd needs at least {sample} words, got {c.total}"
        )
    return sum(
        1.0 - hypergeom_pmf_zero(c.total, count, sample)
        for _, count in sorted(c.freq.items())
    )


def pos_frequencies(tagged: TaggedSequence) -> dict[str, float]:
    """Per-tag token fraction for the five content categories."""
    if not tagged:
        raise MetricUndefined("pos frequencies need a non-empty sequence")
    counts = Counter(tag for _, tag in tagged)
    n = len(tagged)
    return {
        "verb_freq": counts[TAG_VERB] / n,
        "noun_freq": counts[TAG_NOUN] / n,
        "pronoun_freq": counts[TAG_PRONOUN] / n,
        "adverb_freq": counts[TAG_ADVERB] / n,
        "adjective_freq": counts[TAG_ADJECTIVE] / n,
    }


@dataclass(frozen=True)
class LinguisticFeatures:
    """The 13 per-document feature values; NaN marks an undefined metric."""

    brunet: float
    honore: float
    std_entropy: float
    rttr: float
    msttr: float
    mtld: float
    hdd: float
    ttr: float
    verb_freq: float
    noun_freq: float
    pronoun_freq: float
    adverb_freq: float
    adjective_freq: float

    def as_row(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in FEATURE_NAMES)

    @property
    def complete(self) -> bool:
        return not any(math.isnan(v) for v in self.as_row())


def _guarded(fn, *args) -> float:
    try:
        return fn(*args)
    except MetricUndefined:
        return math.nan


def linguistic_feature_vector(
    doc: Document,
    lexicon: PosLexicon | None = None,
    tagged: TaggedSequence | None = None,
    mtld_mode: str = "literal",
) -> LinguisticFeatures:
    """Assemble all 13 features for one document.

    Per-metric singularities and short-text conditions become NaN markers
    rather than aborting the batch. ``tagged`` overrides the built-in
    tagger with an externally tagged sequence for the same tokens.
    """
    tokens: TokenSequence = tokenize(doc.text)
    counts = lexical_counts(tokens)
    if tagged is None:
        tagged = pos_tag(tokens, lexicon or default_lexicon())
    try:
        pos = pos_frequencies(tagged)
    except MetricUndefined:
        pos = {name: math.nan for name in FEATURE_NAMES[8:]}
    return LinguisticFeatures(
        brunet=_guarded(brunet_index, counts),
        honore=_guarded(honore_statistic, counts),
        std_entropy=_guarded(standardized_entropy, counts),
        rttr=_guarded(rttr, counts),
        msttr=_guarded(msttr, tokens),
        mtld=_guarded(lambda s: mtld(s, mode=mtld_mode), tokens),
        hdd=_guarded(hdd, counts),
        ttr=_guarded(ttr, counts),
        **pos,
    )
