"""Edit-based precision/recall scoring against gold annotations.

The scorer does not trust any single alignment: it builds the lattice of
*all* minimal-cost token alignments between source and hypothesis
(Levenshtein with match 0, insert/delete/substitute 1), augments it with
merged phrase edits, and then picks the edit sequence that maximizes
agreement with the gold annotation. Concretely:

1. every edge on any minimal-cost alignment path enters the lattice;
2. for nodes ``u -> v`` connected by a lattice path holding at least one
   edit and at most ``max_unchanged_words`` matched tokens, one merged
   edge is added for the whole span (source span -> hypothesis span);
3. an edit edge costs ``1 + 0.001 * tokens_spanned`` so that fewer and
   smaller edits win ties, minus ``gold_match_reward`` when its
   (span, replacement) exactly equals a gold edit — the reward dwarfs all
   path costs, so gold-matching edits are always preferred;
4. the minimal-cost path through the lattice yields the system edits
   (matched tokens traverse zero-cost diagonal edges and contribute none).

True/false positives then follow from exact (span, replacement) equality
with the gold set, and F_beta favors precision with beta = 0.5 by default.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import AnnotatedSource, AnnotationSet, Edit, Sentence
from .errors import ValidationError

__all__ = [
    "M2Config",
    "M2SentenceCounts",
    "f_beta",
    "extract_system_edits",
    "m2_sentence",
    "m2_corpus",
]

log = logging.getLogger(__name__)

_EPS = 0.001  # tie-breaker: prefers fewer and smaller unmatched edits

_Node = tuple[int, int]
_EditKey = tuple[int, int, tuple[str, ...]]


@dataclass(frozen=True)
class M2Config:
    beta: float = 0.5
    max_unchanged_words: int = 2
    gold_match_reward: float = 1000.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValidationError(f"beta must be >= 0, got {self.beta}")
        if self.max_unchanged_words < 0:
            raise ValidationError(
                f"max_unchanged_words must be >= 0, got {self.max_unchanged_words}"
            )
        if self.gold_match_reward <= 0:
            raise ValidationError(
                f"gold_match_reward must be positive, got {self.gold_match_reward}"
            )


@dataclass(frozen=True)
class M2SentenceCounts:
    tp: int
    fp: int
    fn: int
    annotator: int


def f_beta(tp: int, fp: int, fn: int, beta: float = 0.5) -> float:
    """F measure with the zero-denominator conventions P=1 and R=1."""
    precision = 1.0 if tp + fp == 0 else tp / (tp + fp)
    recall = 1.0 if tp + fn == 0 else tp / (tp + fn)
    denom = beta * beta * precision + recall
    if denom == 0.0:
        return 0.0
    return (1.0 + beta * beta) * precision * recall / denom


def _lev_tables(src: Sequence[str], hyp: Sequence[str]):
    n, m = len(src), len(hyp)
    fwd = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        fwd[i][0] = i
    for j in range(1, m + 1):
        fwd[0][j] = j
    for i in range(1, n + 1):
        row, prev = fwd[i], fwd[i - 1]
        for j in range(1, m + 1):
            row[j] = min(
                prev[j - 1] + (src[i - 1] != hyp[j - 1]),
                prev[j] + 1,
                row[j - 1] + 1,
            )
    bwd = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        bwd[i][m] = n - i
    for j in range(m + 1):
        bwd[n][j] = m - j
    for i in range(n - 1, -1, -1):
        row, nxt = bwd[i], bwd[i + 1]
        for j in range(m - 1, -1, -1):
            row[j] = min(
                nxt[j + 1] + (src[i] != hyp[j]),
                nxt[j] + 1,
                row[j + 1] + 1,
            )
    return fwd, bwd


def _build_graph(src: tuple[str, ...], hyp: tuple[str, ...], max_unchanged: int):
    """Lattice of minimal alignments plus merged phrase edges.

    Returns (topo-ordered nodes, adjacency u -> [(v, edit-or-None)]).
    """
    n, m = len(src), len(hyp)
    fwd, bwd = _lev_tables(src, hyp)
    total = fwd[n][m]
    nodes = [
        (i, j)
        for i in range(n + 1)
        for j in range(m + 1)
        if fwd[i][j] + bwd[i][j] == total
    ]
    elem: dict[_Node, list[tuple[_Node, _EditKey | None]]] = {u: [] for u in nodes}
    seen: set[tuple[_Node, _Node, _EditKey | None]] = set()

    def add(u: _Node, v: _Node, edit: _EditKey | None) -> None:
        key = (u, v, edit)
        if key not in seen:
            seen.add(key)
            elem[u].append((v, edit))

    for i, j in nodes:
        base = fwd[i][j]
        if i < n and j < m:
            cost = 0 if src[i] == hyp[j] else 1
            if base + cost + bwd[i + 1][j + 1] == total:
                edit = None if cost == 0 else (i, i + 1, (hyp[j],))
                add((i, j), (i + 1, j + 1), edit)
        if i < n and base + 1 + bwd[i + 1][j] == total:
            add((i, j), (i + 1, j), (i, i + 1, ()))
        if j < m and base + 1 + bwd[i][j + 1] == total:
            add((i, j), (i, j + 1), (i, i, (hyp[j],)))

    topo = sorted(nodes, key=lambda u: (u[0] + u[1], u[0]))
    order = {u: k for k, u in enumerate(topo)}
    adj = {u: list(edges) for u, edges in elem.items()}
    for u in nodes:
        # fewest matched tokens on any lattice path u -> v, pruned at budget
        fewest: dict[_Node, int] = {u: 0}
        for x in topo[order[u]:]:
            got = fewest.get(x)
            if got is None:
                continue
            for v, edit in elem[x]:
                matches = got + (1 if edit is None else 0)
                if matches > max_unchanged:
                    continue
                if matches < fewest.get(v, matches + 1):
                    fewest[v] = matches
        ui, uj = u
        for (vi, vj), matches in fewest.items():
            if fwd[vi][vj] - fwd[ui][uj] < 1:
                continue  # pure-match stretch: nothing to merge
            edit = (ui, vi, tuple(hyp[uj:vj]))
            key = (u, (vi, vj), edit)
            if key not in seen:
                seen.add(key)
                adj[u].append(((vi, vj), edit))
    return topo, adj


def _best_edits(
    src: tuple[str, ...],
    hyp: tuple[str, ...],
    gold: frozenset[_EditKey],
    cfg: M2Config,
) -> list[_EditKey]:
    topo, adj = _build_graph(src, hyp, cfg.max_unchanged_words)
    start, goal = (0, 0), (len(src), len(hyp))
    dist: dict[_Node, float] = {start: 0.0}
    back: dict[_Node, tuple[_Node, _EditKey | None]] = {}
    for u in topo:
        du = dist.get(u)
        if du is None:
            continue
        for v, edit in adj[u]:
            if edit is None:
                weight = 0.0
            else:
                e_start, e_end, repl = edit
                weight = 1.0 + _EPS * ((e_end - e_start) + len(repl))
                if edit in gold:
                    weight -= cfg.gold_match_reward
            cand = du + weight
            if cand < dist.get(v, math.inf):
                dist[v] = cand
                back[v] = (u, edit)
    edits: list[_EditKey] = []
    node = goal
    while node != start:
        node, edit = back[node]
        if edit is not None:
            edits.append(edit)
    edits.reverse()
    return edits


def _gold_keys(source: Sentence, edits: Iterable[Edit]) -> frozenset[_EditKey]:
    keys = []
    for edit in edits:
        if source.tokens[edit.start : edit.end] == edit.replacement:
            log.warning("ignoring identity gold edit %s (annotator %d)",
                        edit, edit.annotator)
            continue
        keys.append(edit.key)
    return frozenset(keys)


def extract_system_edits(
    source: Sentence,
    hypothesis: Sentence,
    gold: AnnotationSet | Iterable[Edit],
    cfg: M2Config = M2Config(),
) -> tuple[Edit, ...]:
    """Edits the system is credited with, biased toward the gold set.

    Among all ways to explain the source-to-hypothesis transformation with
    minimal alignments and merged phrase edits, returns the sequence that
    matches the most gold edits, breaking ties toward fewer and smaller
    edits. Identity gold edits (replacement equals the source span) are
    ignored with a warning.
    """
    gold_edits = gold.edits if isinstance(gold, AnnotationSet) else tuple(gold)
    keys = _gold_keys(source, gold_edits)
    chosen = _best_edits(source.tokens, hypothesis.tokens, keys, cfg)
    return tuple(Edit(s, e, repl) for s, e, repl in chosen)


def _counts_against(
    source: Sentence,
    hypothesis: Sentence,
    aset: AnnotationSet,
    cfg: M2Config,
) -> tuple[int, int, int]:
    gold = _gold_keys(source, aset.edits)
    system = _best_edits(source.tokens, hypothesis.tokens, gold, cfg)
    found = set(system)
    tp = len([g for g in gold if g in found])
    fp = len([e for e in system if e not in gold])
    fn = len(gold) - tp
    return tp, fp, fn


def m2_sentence(
    source: Sentence,
    hypothesis: Sentence,
    annotations: Sequence[AnnotationSet],
    cfg: M2Config = M2Config(),
) -> tuple[M2SentenceCounts, float]:
    """Score one sentence, choosing the annotator that maximizes F_beta.

    Ties go to the lowest annotator id. ``tp + fn`` always equals the
    number of (non-identity) gold edits of the chosen annotator.
    """
    if not annotations:
        raise ValidationError("at least one annotation set is required")
    best: M2SentenceCounts | None = None
    best_f = -1.0
    for aset in sorted(annotations, key=lambda a: a.annotator):
        tp, fp, fn = _counts_against(source, hypothesis, aset, cfg)
        score = f_beta(tp, fp, fn, cfg.beta)
        if score > best_f:
            best = M2SentenceCounts(tp, fp, fn, aset.annotator)
            best_f = score
    assert best is not None
    return best, best_f


def m2_corpus(
    units: Sequence[AnnotatedSource],
    hypotheses: Sequence[Sentence],
    cfg: M2Config = M2Config(),
    mode: str = "corpus",
) -> float:
    """Corpus score in either aggregation mode.

    ``sentence`` averages per-sentence F_beta. ``corpus`` picks, sentence
    by sentence, the annotator that maximizes the *running* cumulative
    F_beta (ties to the lowest id) and reports F_beta of the pooled
    tp/fp/fn — the convention of edit-based shared-task scoring, which can
    diverge substantially from the sentence mean.
    """
    if len(units) != len(hypotheses):
        raise ValidationError(
            f"size mismatch: {len(units)} sources, {len(hypotheses)} hypotheses"
        )
    if not units:
        raise ValidationError("empty corpus")
    if mode == "sentence":
        values = [
            m2_sentence(unit.source, hyp, unit.annotations, cfg)[1]
            for unit, hyp in zip(units, hypotheses)
        ]
        return math.fsum(values) / len(values)
    if mode != "corpus":
        raise ValidationError(f"unknown aggregation mode {mode!r}")
    pooled_tp = pooled_fp = pooled_fn = 0
    for unit, hyp in zip(units, hypotheses):
        best: tuple[int, int, int] | None = None
        best_f = -1.0
        for aset in sorted(unit.annotations, key=lambda a: a.annotator):
            tp, fp, fn = _counts_against(unit.source, hyp, aset, cfg)
            score = f_beta(pooled_tp + tp, pooled_fp + fp, pooled_fn + fn, cfg.beta)
            if score > best_f:
                best = (tp, fp, fn)
                best_f = score
        assert best is not None
        pooled_tp += best[0]
        pooled_fp += best[1]
        pooled_fn += best[2]
    return f_beta(pooled_tp, pooled_fp, pooled_fn, cfg.beta)
