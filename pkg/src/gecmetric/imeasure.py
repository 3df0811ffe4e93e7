"""Token-level improvement scoring relative to doing nothing.

Source, reference, and hypothesis are joined into token triples via two
pairwise alignments (source-reference and source-hypothesis). Each triple
is classified by what the reference demanded and what the hypothesis did:

* ``r == s`` and ``h == s``: true negative (left well enough alone);
* ``r == s`` and ``h != s``: false positive (needless change);
* ``r != s`` and ``h == r``: true positive (the required correction);
* ``r != s`` and ``h == s``: false negative (missed correction);
* otherwise a wrong correction, counted as both a false positive and a
  false negative plus one unit of the combined ``fpn`` counter that the
  accuracy denominator discounts.

Weighted accuracy upweights true positives by ``weight``; the final score
normalizes the system's accuracy against the do-nothing baseline so that
1 means perfect correction, 0 means no improvement, and negative values
mean the system made the text worse. An unchanged hypothesis is exactly 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .corpus import Sentence
from .errors import ValidationError

__all__ = [
    "IMeasureConfig",
    "TokenCounts",
    "classify_tokens",
    "weighted_accuracy",
    "i_measure_sentence",
    "i_measure_corpus",
]


@dataclass(frozen=True)
class IMeasureConfig:
    weight: float = 2.0

    def __post_init__(self):
        if self.weight <= 0:
            raise ValidationError(f"weight must be positive, got {self.weight}")


@dataclass(frozen=True)
class TokenCounts:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0
    fpn: int = 0

    def __add__(self, other: "TokenCounts") -> "TokenCounts":
        return TokenCounts(
            self.tp + other.tp,
            self.tn + other.tn,
            self.fp + other.fp,
            self.fn + other.fn,
            self.fpn + other.fpn,
        )


def _align(a: tuple[str, ...], b: tuple[str, ...]):
    """Pair each position of ``a`` with a token of ``b`` (or None).

    Returns (partner, gaps): ``partner[i]`` is the b-token aligned to
    ``a[i]`` or None if deleted; ``gaps[slot]`` lists b-tokens inserted
    before a-position ``slot`` (slot ``len(a)`` holds trailing inserts).
    Backtrace prefers match, then substitution, deletion, insertion.
    """
    n, m = len(a), len(b)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        d[i][0] = i
    for j in range(1, m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        row, prev = d[i], d[i - 1]
        for j in range(1, m + 1):
            row[j] = min(
                prev[j - 1] + (a[i - 1] != b[j - 1]),
                prev[j] + 1,
                row[j - 1] + 1,
            )
    ops: list[tuple[int | None, int | None]] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and a[i - 1] == b[j - 1] and d[i][j] == d[i - 1][j - 1]:
            ops.append((i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and d[i][j] == d[i - 1][j - 1] + 1:
            ops.append((i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and d[i][j] == d[i - 1][j] + 1:
            ops.append((i - 1, None))
            i -= 1
        else:
            ops.append((None, j - 1))
            j -= 1
    ops.reverse()
    partner: list[str | None] = [None] * n
    gaps: list[list[str]] = [[] for _ in range(n + 1)]
    cursor = 0
    for ai, bj in ops:
        if ai is None:
            gaps[cursor].append(b[bj])
        else:
            partner[ai] = None if bj is None else b[bj]
            cursor = ai + 1
    return partner, gaps


def classify_tokens(
    source: Sentence, reference: Sentence, hypothesis: Sentence
) -> TokenCounts:
    """Classify the joined source/reference/hypothesis token triples."""
    ref_partner, ref_gaps = _align(source.tokens, reference.tokens)
    hyp_partner, hyp_gaps = _align(source.tokens, hypothesis.tokens)
    triples: list[tuple[str | None, str | None, str | None]] = []
    n = len(source.tokens)
    for slot in range(n + 1):
        rg, hg = ref_gaps[slot], hyp_gaps[slot]
        for k in range(max(len(rg), len(hg))):
            triples.append(
                (None, rg[k] if k < len(rg) else None, hg[k] if k < len(hg) else None)
            )
        if slot < n:
            triples.append((source.tokens[slot], ref_partner[slot], hyp_partner[slot]))
    tp = tn = fp = fn = fpn = 0
    for s, r, h in triples:
        if r == s:
            if h == s:
                tn += 1
            else:
                fp += 1
        elif h == r:
            tp += 1
        elif h == s:
            fn += 1
        else:
            fp += 1
            fn += 1
            fpn += 1
    return TokenCounts(tp, tn, fp, fn, fpn)


def weighted_accuracy(counts: TokenCounts, weight: float = 2.0) -> float:
    """Accuracy with tp upweighted and combined fp+fn units discounted."""
    num = weight * counts.tp + counts.tn
    den = (
        weight * (counts.tp + counts.fp)
        + counts.tn
        + counts.fn
        - (weight + 1.0) * counts.fpn / 2.0
    )
    if den == 0.0:
        return 1.0  # nothing to get right or wrong
    return num / den


def _improvement(wacc_sys: float, wacc_base: float) -> float:
    if wacc_sys >= wacc_base:
        if wacc_base == 1.0:
            return 0.0
        return (wacc_sys - wacc_base) / (1.0 - wacc_base)
    return wacc_sys / wacc_base - 1.0


def _against_ref(
    source: Sentence, hypothesis: Sentence, reference: Sentence, weight: float
) -> tuple[float, TokenCounts, TokenCounts]:
    sys_counts = classify_tokens(source, reference, hypothesis)
    base_counts = classify_tokens(source, reference, source)
    score = _improvement(
        weighted_accuracy(sys_counts, weight), weighted_accuracy(base_counts, weight)
    )
    return score, sys_counts, base_counts


def i_measure_sentence(
    source: Sentence,
    hypothesis: Sentence,
    references: Sequence[Sentence],
    cfg: IMeasureConfig = IMeasureConfig(),
) -> float:
    """Best improvement score over the available references, in [-1, 1]."""
    if not references:
        raise ValidationError("at least one reference is required")
    return max(
        _against_ref(source, hypothesis, ref, cfg.weight)[0] for ref in references
    )


def i_measure_corpus(
    sources: Sequence[Sentence],
    hypotheses: Sequence[Sentence],
    references: Sequence[Sequence[Sentence]],
    cfg: IMeasureConfig = IMeasureConfig(),
    mode: str = "corpus",
) -> float:
    """Corpus score in either aggregation mode.

    ``sentence`` averages per-sentence scores. ``corpus`` picks each
    sentence's best reference, pools the system and baseline counts over
    those choices, and computes one improvement score from the pooled
    weighted accuracies.
    """
    if not (len(sources) == len(hypotheses) == len(references)):
        raise ValidationError(
            f"size mismatch: {len(sources)} sources, {len(hypotheses)} hypotheses, "
            f"{len(references)} reference rows"
        )
    if not sources:
        raise ValidationError("empty corpus")
    if mode == "sentence":
        values = [
            i_measure_sentence(src, hyp, refs, cfg)
            for src, hyp, refs in zip(sources, hypotheses, references)
        ]
        return math.fsum(values) / len(values)
    if mode != "corpus":
        raise ValidationError(f"unknown aggregation mode {mode!r}")
    pooled_sys = TokenCounts()
    pooled_base = TokenCounts()
    for src, hyp, refs in zip(sources, hypotheses, references):
        if not refs:
            raise ValidationError("at least one reference is required")
        best = None
        for ref in refs:
            scored = _against_ref(src, hyp, ref, cfg.weight)
            if best is None or scored[0] > best[0]:
                best = scored
        pooled_sys = pooled_sys + best[1]
        pooled_base = pooled_base + best[2]
    return _improvement(
        weighted_accuracy(pooled_sys, cfg.weight),
        weighted_accuracy(pooled_base, cfg.weight),
    )
