import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gecmetric.corpus import tokenize
from gecmetric.errors import ValidationError
from gecmetric.imeasure import (
    IMeasureConfig,
    TokenCounts,
    classify_tokens,
    i_measure_corpus,
    i_measure_sentence,
    weighted_accuracy,
)

tokens_st = st.lists(st.sampled_from(["a", "b", "c"]), max_size=5)


def score(src, hyp, *refs, **kw):
    cfg = IMeasureConfig(**kw) if kw else IMeasureConfig()
    return i_measure_sentence(
        tokenize(src), tokenize(hyp), tuple(tokenize(r) for r in refs), cfg
    )


def test_perfect_correction_scores_one():
    assert score("he go home", "he goes home", "he goes home") == 1.0


def test_unchanged_hypothesis_scores_zero():
    assert score("he go home", "he go home", "he goes home") == 0.0


def test_miscorrection_scores_negative_fraction():
    got = score("he go home", "he gone home", "he goes home")
    assert got == pytest.approx(-1.0 / 7.0, abs=1e-12)


def test_identity_task_scores_zero():
    """When the source already equals the reference, nothing can improve."""
    assert score("a b", "a b", "a b") == 0.0


def test_breaking_a_correct_source_goes_negative():
    assert score("a b c", "a x c", "a b c") < 0.0


def test_classification_counts_on_hand_example():
    counts = classify_tokens(
        tokenize("he go home"), tokenize("he goes home"), tokenize("he gone home")
    )
    # "go" was changed but to the wrong thing: one fp and one fn, noted as fpn
    assert counts.fpn == 1
    assert counts.fp == 1
    assert counts.fn == 1
    assert counts.tn == 2


def test_classification_true_positive():
    counts = classify_tokens(
        tokenize("he go"), tokenize("he goes"), tokenize("he goes")
    )
    assert counts.tp == 1
    assert counts.tn == 1
    assert counts.fp == counts.fn == counts.fpn == 0


def test_classification_handles_insertions_via_gap_slots():
    counts = classify_tokens(tokenize("a c"), tokenize("a b c"), tokenize("a b c"))
    assert counts.tp == 1  # the inserted token is a needed correction
    assert counts.tn == 2


def test_weighted_accuracy_perfect_is_one():
    assert weighted_accuracy(TokenCounts(tp=2, tn=3)) == 1.0


def test_weighted_accuracy_empty_counts_is_one():
    assert weighted_accuracy(TokenCounts()) == 1.0


def test_weighted_accuracy_hand_value():
    # tp=0 tn=2 fp=1 fn=1 fpn=1, w=2: (0+2)/(2*1+2+1-3*0.5) = 2/3.5 = 4/7
    counts = TokenCounts(tp=0, tn=2, fp=1, fn=1, fpn=1)
    assert weighted_accuracy(counts) == pytest.approx(4.0 / 7.0, abs=1e-15)


def test_multi_reference_takes_best():
    low = score("he go home", "he goes home", "he went home")
    high = score("he go home", "he goes home", "he went home", "he goes home")
    assert high == 1.0
    assert low < high


@given(tokens_st, tokens_st, tokens_st)
@settings(max_examples=400, deadline=None)
def test_score_stays_in_unit_interval(src, hyp, ref):
    got = i_measure_sentence(
        tokenize(" ".join(src)),
        tokenize(" ".join(hyp)),
        (tokenize(" ".join(ref)),),
        IMeasureConfig(),
    )
    assert -1.0 <= got <= 1.0


@given(tokens_st, tokens_st)
@settings(max_examples=200, deadline=None)
def test_unchanged_hypothesis_always_scores_zero(src, ref):
    got = i_measure_sentence(
        tokenize(" ".join(src)),
        tokenize(" ".join(src)),
        (tokenize(" ".join(ref)),),
        IMeasureConfig(),
    )
    assert got == 0.0


@given(tokens_st, tokens_st)
@settings(max_examples=200, deadline=None)
def test_reference_copy_never_scores_negative(src, ref):
    got = i_measure_sentence(
        tokenize(" ".join(src)),
        tokenize(" ".join(ref)),
        (tokenize(" ".join(ref)),),
        IMeasureConfig(),
    )
    assert got >= 0.0


def test_sentence_requires_references():
    with pytest.raises(ValidationError):
        i_measure_sentence(tokenize("a"), tokenize("a"), (), IMeasureConfig())


def test_corpus_sentence_mode_is_mean():
    sources = [tokenize("he go home"), tokenize("a b")]
    hyps = [tokenize("he goes home"), tokenize("a b")]
    refs = [(tokenize("he goes home"),), (tokenize("a b"),)]
    got = i_measure_corpus(sources, hyps, refs, mode="sentence")
    assert got == pytest.approx(0.5, abs=1e-15)  # scores 1 and 0


def test_corpus_mode_pools_counts():
    sources = [tokenize("he go home"), tokenize("she do it")]
    hyps = [tokenize("he goes home"), tokenize("she does it")]
    refs = [(tokenize("he goes home"),), (tokenize("she does it"),)]
    got = i_measure_corpus(sources, hyps, refs, mode="corpus")
    assert got == 1.0


def test_corpus_single_sentence_same_in_both_modes():
    sources = [tokenize("he go home")]
    hyps = [tokenize("he gone home")]
    refs = [(tokenize("he goes home"),)]
    sentence = i_measure_corpus(sources, hyps, refs, mode="sentence")
    corpus = i_measure_corpus(sources, hyps, refs, mode="corpus")
    assert sentence == corpus == pytest.approx(-1.0 / 7.0, abs=1e-12)


def test_corpus_partial_credit_between_modes():
    rng = random.Random(3)
    vocab = ["a", "b", "c", "d"]
    sources, hyps, refs = [], [], []
    for _ in range(20):
        src = [rng.choice(vocab) for _ in range(rng.randint(1, 5))]
        ref = list(src)
        if ref:
            ref[rng.randrange(len(ref))] = rng.choice(vocab)
        hyp = list(src) if rng.random() < 0.5 else list(ref)
        sources.append(tokenize(" ".join(src)))
        hyps.append(tokenize(" ".join(hyp)))
        refs.append((tokenize(" ".join(ref)),))
    for mode in ("sentence", "corpus"):
        got = i_measure_corpus(sources, hyps, refs, mode=mode)
        assert -1.0 <= got <= 1.0


def test_corpus_validates_sizes():
    with pytest.raises(ValidationError):
        i_measure_corpus([tokenize("a")], [], [], mode="corpus")
    with pytest.raises(ValidationError):
        i_measure_corpus([], [], [], mode="corpus")


def test_config_validation():
    with pytest.raises(ValidationError):
        IMeasureConfig(weight=0.0)
