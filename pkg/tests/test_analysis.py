import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gecmetric.analysis import (
    LAMBDA_GRID,
    SystemScore,
    ablate_references,
    compare_correlations,
    fisher_z,
    gaming_check,
    interpolate,
    interpolate_value,
    mean_score,
    pearson,
    rank_systems,
    sample_reference_subset,
    spearman,
    sweep_lambda,
)
from gecmetric.errors import ValidationError


def test_lambda_grid_shape():
    assert len(LAMBDA_GRID) == 101
    assert LAMBDA_GRID[0] == 0.0
    assert LAMBDA_GRID[-1] == 1.0
    assert LAMBDA_GRID[50] == 0.5


def test_mean_score():
    assert mean_score([1.0, 2.0, 4.0]) == pytest.approx(7.0 / 3.0)
    assert mean_score([0.3] * 5) == 0.3  # all-equal short circuit is exact
    with pytest.raises(ValidationError):
        mean_score([])


def test_interpolate_endpoints_are_bit_exact():
    f, r = 0.123456789, 0.987654321
    assert interpolate_value(f, r, 0.0) == f
    assert interpolate_value(f, r, 1.0) == r


def test_interpolate_value_midpoint():
    assert interpolate_value(0.0, 1.0, 0.25) == pytest.approx(0.25, abs=1e-15)


def test_interpolate_rejects_out_of_range_lambda():
    with pytest.raises(ValidationError):
        interpolate_value(0.0, 1.0, 1.5)
    with pytest.raises(ValidationError):
        interpolate_value(0.0, 1.0, -0.01)


def test_interpolate_vectors():
    out = interpolate([0.0, 1.0], [1.0, 0.0], 0.5)
    assert out == [0.5, 0.5]
    with pytest.raises(ValidationError):
        interpolate([0.0], [1.0, 2.0], 0.5)


@given(
    st.floats(0, 1, allow_nan=False),
    st.floats(0, 1, allow_nan=False),
    st.integers(0, 100),
)
@settings(max_examples=300, deadline=None)
def test_interpolation_linearity_against_two_point_line(f, r, k):
    lam = LAMBDA_GRID[k]
    got = interpolate_value(f, r, lam)
    line = f + (r - f) * lam
    assert got == pytest.approx(line, abs=1e-15)
    assert min(f, r) - 1e-15 <= got <= max(f, r) + 1e-15


def test_rank_systems_average_ties():
    ranked = rank_systems({"A": 0.5, "B": 0.5, "C": 0.1})
    by_id = {r.system_id: r.rank for r in ranked}
    assert by_id == {"A": 1.5, "B": 1.5, "C": 3.0}
    assert [r.system_id for r in ranked] == ["A", "B", "C"]


def test_rank_systems_descending():
    ranked = rank_systems({"x": 0.2, "y": 0.9, "z": 0.5})
    assert [(r.system_id, r.rank) for r in ranked] == [
        ("y", 1.0),
        ("z", 2.0),
        ("x", 3.0),
    ]


def test_pearson_hand_value():
    got = pearson([1.0, 2.0, 3.0], [1.0, 2.0, 4.0])
    assert got == pytest.approx(0.9819805060619656, abs=1e-12)


def test_pearson_perfect_and_inverse():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0, abs=1e-12)
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0, abs=1e-12)


def test_pearson_rejects_constant_input():
    with pytest.raises(ValidationError):
        pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


def test_pearson_needs_two_points():
    with pytest.raises(ValidationError):
        pearson([1.0], [2.0])


def test_spearman_hand_value():
    assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-15)


def test_spearman_is_tie_safe():
    got = spearman([1.0, 1.0, 2.0, 3.0], [1.0, 2.0, 3.0, 4.0])
    assert 0.0 < got < 1.0


def test_spearman_needs_three_points():
    with pytest.raises(ValidationError):
        spearman([1.0, 2.0], [2.0, 1.0])


def test_spearman_equals_pearson_on_preranked_data():
    x = [1.0, 2.0, 3.0, 4.0, 5.0]
    y = [2.0, 1.0, 4.0, 5.0, 3.0]
    assert spearman(x, y) == pytest.approx(pearson(x, y), abs=1e-12)


def test_fisher_z_hand_value():
    assert fisher_z(0.6) == pytest.approx(math.log(2.0), abs=1e-12)
    assert fisher_z(0.0) == 0.0
    with pytest.raises(ValidationError):
        fisher_z(1.0)


def test_compare_correlations_equal_inputs_give_p_one():
    entry = compare_correlations(0.8, 30, 0.8, 30)
    assert entry.z == 0.0
    assert entry.p_value == pytest.approx(1.0, abs=1e-15)


def test_compare_correlations_direction():
    entry = compare_correlations(0.9, 50, 0.1, 50)
    assert entry.z > 0
    assert entry.p_value < 0.05


def test_compare_correlations_validates():
    with pytest.raises(ValidationError):
        compare_correlations(0.5, 3, 0.5, 30)
    with pytest.raises(ValidationError):
        compare_correlations(1.0, 30, 0.5, 30)


def _tables():
    # Four systems, three sentences; fluency prefers A, reference prefers D.
    # Chosen so no grid lambda collapses every interpolated mean to the same
    # value (that would make the correlation undefined mid-sweep).
    fluency = {
        "A": [0.9, 0.9, 0.9],
        "B": [0.7, 0.7, 0.7],
        "C": [0.5, 0.5, 0.5],
        "D": [0.3, 0.3, 0.3],
    }
    reference = {
        "A": [0.1, 0.1, 0.1],
        "B": [0.4, 0.4, 0.4],
        "C": [0.6, 0.6, 0.6],
        "D": [0.9, 0.9, 0.9],
    }
    return fluency, reference


def test_sweep_lambda_endpoints_match_component_metrics():
    fluency, reference = _tables()
    human = {"A": 4.0, "B": 3.0, "C": 2.0, "D": 1.0}
    result = sweep_lambda(fluency, reference, human)
    assert len(result.points) == 101
    assert result.points[0].lam == 0.0
    assert result.points[0].spearman == pytest.approx(1.0)  # fluency order
    assert result.points[-1].spearman == pytest.approx(-1.0)  # reference order


def test_sweep_lambda_oracle_maximizes_spearman():
    fluency, reference = _tables()
    human = {"A": 4.0, "B": 3.0, "C": 2.0, "D": 1.0}
    result = sweep_lambda(fluency, reference, human)
    best = max(p.spearman for p in result.points)
    assert result.oracle.spearman == best
    assert result.oracle.spearman >= max(
        result.points[0].spearman, result.points[-1].spearman
    )


def test_sweep_lambda_tie_takes_smallest_lambda():
    fluency, _ = _tables()
    human = {"A": 4.0, "B": 3.0, "C": 2.0, "D": 1.0}
    result = sweep_lambda(fluency, fluency, human)  # flat sweep
    assert result.oracle_lambda == 0.0


def test_sweep_lambda_missing_system_raises():
    fluency, reference = _tables()
    human = {"A": 1.0, "B": 2.0, "C": 3.0}  # D missing
    with pytest.raises(ValidationError):
        sweep_lambda(fluency, reference, human)


def test_sweep_lambda_ragged_tables_raise():
    fluency, reference = _tables()
    reference["B"] = [0.4, 0.4]
    human = {"A": 4.0, "B": 3.0, "C": 2.0, "D": 1.0}
    with pytest.raises(ValidationError):
        sweep_lambda(fluency, reference, human)


def test_sample_reference_subset_is_deterministic_and_sorted():
    first = sample_reference_subset(5, 3, seed=0, trial=2, sentence_index=7)
    second = sample_reference_subset(5, 3, seed=0, trial=2, sentence_index=7)
    assert first == second
    assert list(first) == sorted(first)
    assert len(set(first)) == 3
    assert all(0 <= i < 5 for i in first)


def test_sample_reference_subset_varies_by_slot():
    draws = {
        tuple(sample_reference_subset(6, 2, seed=0, trial=t, sentence_index=i))
        for t in range(4)
        for i in range(4)
    }
    assert len(draws) > 1


def test_sample_reference_subset_validates():
    with pytest.raises(ValidationError):
        sample_reference_subset(3, 4, 0, 0, 0)
    with pytest.raises(ValidationError):
        sample_reference_subset(3, 0, 0, 0, 0)


def test_ablate_references_shapes_and_determinism():
    fluency, reference = _tables()
    human = {"A": 4.0, "B": 3.0, "C": 2.0, "D": 1.0}

    def scorer(picks):
        assert len(picks) == 3  # one subset per sentence
        # pretend fewer references dampen the scores slightly
        factor = sum(len(p) for p in picks) / (2 * len(picks))
        return {
            sid: [v * factor for v in rows] for sid, rows in reference.items()
        }

    points = ablate_references(fluency, scorer, n_refs=2, human=human, trials=3)
    assert [p.size for p in points] == [1, 2]
    again = ablate_references(fluency, scorer, n_refs=2, human=human, trials=3)
    assert points == again
    assert all(len(p.per_trial) == 3 for p in points)
    assert all(p.half_width >= 0.0 for p in points)


def test_ablate_single_trial_has_zero_half_width():
    fluency, reference = _tables()
    human = {"A": 4.0, "B": 3.0, "C": 2.0, "D": 1.0}
    points = ablate_references(
        fluency, lambda picks: reference, n_refs=2, human=human, trials=1
    )
    assert all(p.half_width == 0.0 for p in points)


def test_gaming_check_penalizes_reference_use():
    rng = random.Random(4)
    fluency = [rng.uniform(0.5, 1.0) for _ in range(50)]
    reference = [rng.uniform(0.8, 1.0) for _ in range(50)]

    def scorer(perm):
        # scoring against the wrong sentence's reference tanks the score
        return [0.1 for _ in perm]

    report = gaming_check(fluency, reference, scorer, seed=3)
    assert report.rbm_drop > 0
    assert report.interpolated_drop > 0
    assert report.rbm_relative_drop is not None
    n = len(report.permutation)
    assert sorted(report.permutation) == list(range(n))
    assert all(p != i for i, p in enumerate(report.permutation))


def test_gaming_check_passes_permutation_through():
    seen = {}

    def scorer(perm):
        seen["perm"] = tuple(perm)
        return [0.0] * len(perm)

    report = gaming_check([0.5, 0.5, 0.5], [1.0, 1.0, 1.0], scorer, seed=0)
    assert report.permutation == seen["perm"]


def test_gaming_check_is_seed_deterministic():
    def scorer(perm):
        return [0.0] * len(perm)

    one = gaming_check([0.1] * 9, [0.9] * 9, scorer, seed=5)
    two = gaming_check([0.1] * 9, [0.9] * 9, scorer, seed=5)
    assert one.permutation == two.permutation


def test_gaming_check_validates():
    with pytest.raises(ValidationError):
        gaming_check([0.5], [0.5], lambda p: [0.0], seed=0)
    with pytest.raises(ValidationError):
        gaming_check([0.5, 0.5], [0.5], lambda p: [0.0, 0.0], seed=0)
    with pytest.raises(ValidationError):
        gaming_check(
            [0.5, 0.5], [0.5, 0.5], lambda p: [0.0], seed=0
        )  # scorer returned wrong length


def test_system_score_headline():
    sentence = SystemScore(
        system_id="a",
        metric="lfm",
        mode="sentence",
        per_sentence=(0.2, 0.6),
        mean_sentence_score=0.4,
        corpus_score=None,
    )
    assert sentence.headline == 0.4
    corpus = SystemScore(
        system_id="a",
        metric="lfm",
        mode="corpus",
        per_sentence=(0.2, 0.6),
        mean_sentence_score=0.4,
        corpus_score=None,
    )
    with pytest.raises(ValidationError):
        _ = corpus.headline
