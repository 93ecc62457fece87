from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annotsim.behavior import SimParams
from annotsim.learner import QueryContext
from annotsim.selector import (
    AnnotatorView,
    TestMode,
    UncertaintyStats,
    predicted_accuracy,
    recommend_optimal,
    recommend_rs,
    update_uncertainty_stats,
    weight_branch,
)

from conftest import make_view, random_case
from oracles import alg1_rank, alg2_rank, view_to_entry


def stats_from(values):
    stats = UncertaintyStats()
    for v in values:
        stats = update_uncertainty_stats(stats, v)
    return stats


# --- streaming statistics ----------------------------------------------------


def test_stats_first_value():
    stats = update_uncertainty_stats(UncertaintyStats(), 1.0)
    assert stats.count == 1
    assert stats.mean == 1.0
    assert stats.m2 == 0.0


def test_stats_three_values():
    stats = stats_from([1.0, 2.0, 3.0])
    assert stats.mean == pytest.approx(2.0)
    assert stats.m2 == pytest.approx(2.0)
    assert stats.variance == pytest.approx(2.0 / 3.0)
    assert stats.threshold == pytest.approx(2.0 + 2.0 * math.sqrt(2.0 / 3.0))


def test_stats_matches_batch_recomputation():
    rng = np.random.default_rng(8)
    values = rng.uniform(0.0, 10.0, size=1000)
    stats = stats_from(values)
    assert stats.count == 1000
    assert np.isclose(stats.mean, np.mean(values), rtol=1e-9, atol=1e-9)
    assert np.isclose(stats.m2, np.var(values) * len(values), rtol=1e-9, atol=1e-9)


def test_stats_rejects_negative():
    with pytest.raises(ValueError):
        update_uncertainty_stats(UncertaintyStats(), -0.1)


def test_stats_variance_undefined_below_two():
    assert UncertaintyStats().variance == 0.0
    assert update_uncertainty_stats(UncertaintyStats(), 3.0).variance == 0.0


@given(st.lists(st.floats(min_value=0.0, max_value=50.0), min_size=2, max_size=80))
def test_stats_welford_property(values):
    stats = stats_from(values)
    assert np.isclose(stats.mean, np.mean(values), rtol=1e-9, atol=1e-9)
    assert np.isclose(stats.m2, np.var(values) * len(values), rtol=1e-9, atol=1e-6)


# --- predicted accuracy --------------------------------------------------------


def test_predicted_accuracy_test1_ignores_state(params):
    view = make_view(overall=0.82, mood=9, avg_mood=3, fatigue_count=400)
    assert predicted_accuracy(view, TestMode.TEST1_ACCURACY_ONLY, params) == 0.82


def test_predicted_accuracy_test2_mood(params):
    view = make_view(overall=0.80, mood=7, avg_mood=5)
    value = predicted_accuracy(view, TestMode.TEST2_ACCURACY_MOOD, params)
    assert value == pytest.approx(0.896, abs=1e-12)


def test_predicted_accuracy_test3_fatigue(params):
    view = make_view(overall=0.80, mood=7, avg_mood=5, fatigue_count=70)
    value = predicted_accuracy(view, TestMode.TEST3_ACCURACY_MOOD_FATIGUE, params)
    assert value == pytest.approx(0.856, abs=1e-12)  # 0.896 - 2 * 0.02


def test_predicted_accuracy_per_label(params):
    view = make_view(label_estimates={0: 0.9, 1: 0.6}, overall=0.75)
    assert predicted_accuracy(view, TestMode.TEST1_ACCURACY_ONLY, params, label=1) == 0.6


def test_predicted_accuracy_clamps(params):
    view = make_view(overall=0.99, mood=10, avg_mood=3)
    assert predicted_accuracy(view, TestMode.TEST2_ACCURACY_MOOD, params) == 1.0
    tired = make_view(overall=0.2, mood=5, avg_mood=5, fatigue_count=1000)
    assert predicted_accuracy(tired, TestMode.TEST3_ACCURACY_MOOD_FATIGUE, params) == 0.0


def test_predicted_accuracy_rejects_test4(params):
    with pytest.raises(ValueError):
        predicted_accuracy(make_view(), TestMode.TEST4_ORACLE, params)


# --- weight branch --------------------------------------------------------------


def test_weight_branch_outlier_uncertainty():
    stats = stats_from([1.0] * 10)
    assert weight_branch(1.5, stats, t_size=1, num_labels=4) == (0.8, 0.2)


def test_weight_branch_wide_query():
    stats = stats_from([1.0] * 10)
    assert weight_branch(0.5, stats, t_size=2, num_labels=3) == (0.3, 0.7)


def test_weight_branch_default():
    stats = stats_from([1.0] * 10)
    assert weight_branch(0.5, stats, t_size=4, num_labels=10) == (0.5, 0.5)


def test_weight_branch_warmup_disables_outlier():
    stats = stats_from([0.1] * 9)
    assert weight_branch(50.0, stats, t_size=4, num_labels=10) == (0.5, 0.5)
    assert weight_branch(50.0, stats, t_size=2, num_labels=3) == (0.3, 0.7)


# --- knowledge-based recommender -------------------------------------------------


def hand_case_inputs(params):
    ctx = QueryContext.from_probs(0, [0.45, 0.35, 0.20])
    view = make_view(
        annotator_id=0,
        label_estimates={0: 0.90, 1: 0.70, 2: 0.80},
        overall=0.80,
    )
    return ctx, view


def test_recommend_rs_hand_score(params):
    ctx, view = hand_case_inputs(params)
    ranking = recommend_rs(ctx, [view], TestMode.TEST1_ACCURACY_ONLY, params, UncertaintyStats())
    assert ranking[0].annotator_id == 0
    assert ranking[0].score == pytest.approx(0.6470, abs=1e-9)


def test_recommend_rs_single_annotator_always_chosen(params):
    ctx = QueryContext.from_probs(0, [0.7, 0.3])
    view = make_view(annotator_id=3, overall=0.1, label_estimates={0: 0.1, 1: 0.1})
    ranking = recommend_rs(ctx, [view], TestMode.TEST1_ACCURACY_ONLY, params, UncertaintyStats())
    assert [s.annotator_id for s in ranking] == [3]


def test_recommend_rs_rejects_empty_and_test4(params):
    ctx = QueryContext.from_probs(0, [0.7, 0.3])
    with pytest.raises(ValueError):
        recommend_rs(ctx, [], TestMode.TEST1_ACCURACY_ONLY, params, UncertaintyStats())
    with pytest.raises(ValueError):
        recommend_rs(ctx, [make_view()], TestMode.TEST4_ORACLE, params, UncertaintyStats())


def test_recommend_rs_tie_breaks_by_id(params):
    ctx = QueryContext.from_probs(0, [0.7, 0.3])
    views = [make_view(annotator_id=i) for i in (4, 2, 9)]
    ranking = recommend_rs(ctx, views, TestMode.TEST1_ACCURACY_ONLY, params, UncertaintyStats())
    assert [s.annotator_id for s in ranking] == [2, 4, 9]


def test_test1_ranking_invariant_to_mood_and_fatigue(params):
    rng = np.random.default_rng(5)
    ctx = QueryContext.from_probs(0, [0.45, 0.35, 0.20])
    estimates = [
        {l: rng.uniform(0.4, 1.0) for l in range(3)} for _ in range(6)
    ]
    overall = [rng.uniform(0.4, 1.0) for _ in range(6)]

    def views(moods, fatigues):
        return [
            make_view(
                annotator_id=i,
                label_estimates=estimates[i],
                overall=overall[i],
                mood=moods[i],
                fatigue_count=fatigues[i],
            )
            for i in range(6)
        ]

    baseline = recommend_rs(
        ctx, views([5] * 6, [0] * 6), TestMode.TEST1_ACCURACY_ONLY, params, UncertaintyStats()
    )
    for _ in range(50):
        moods = rng.integers(1, 11, size=6).tolist()
        fatigues = rng.integers(0, 500, size=6).tolist()
        shaken = recommend_rs(
            ctx, views(moods, fatigues), TestMode.TEST1_ACCURACY_ONLY, params, UncertaintyStats()
        )
        assert [s.annotator_id for s in shaken] == [s.annotator_id for s in baseline]


def test_test1_argmax_invariant_under_scaling(params):
    rng = np.random.default_rng(15)
    ctx = QueryContext.from_probs(0, [0.5, 0.3, 0.2])
    views = [
        make_view(
            annotator_id=i,
            label_estimates={l: rng.uniform(0.2, 0.95) for l in range(3)},
            overall=rng.uniform(0.2, 0.95),
        )
        for i in range(8)
    ]
    base_top = recommend_rs(ctx, views, TestMode.TEST1_ACCURACY_ONLY, params, UncertaintyStats())[0]
    for k in (0.9, 0.5, 0.13, 1.0):
        scaled = [
            make_view(
                annotator_id=v.annotator_id,
                label_estimates={l: k * e for l, e in v.label_estimates.items()},
                overall=k * v.overall_estimate,
            )
            for v in views
        ]
        top = recommend_rs(ctx, scaled, TestMode.TEST1_ACCURACY_ONLY, params, UncertaintyStats())[0]
        assert top.annotator_id == base_top.annotator_id


# --- optimization baseline ---------------------------------------------------------


def test_recommend_optimal_branch_a(params):
    ctx = QueryContext.from_probs(0, [0.30, 0.28, 0.27, 0.15])
    assert ctx.query_type_labels == (0, 1, 2)
    view = make_view(
        label_estimates={0: 0.90, 1: 0.88, 2: 0.50, 3: 0.1},
        overall=0.80,
    )
    ranking = recommend_optimal(ctx, [view], params)
    assert ranking[0].score == pytest.approx(0.854, abs=1e-9)


def test_recommend_optimal_branch_b(params):
    ctx = QueryContext.from_probs(0, [0.30, 0.28, 0.27, 0.15])
    view = make_view(
        label_estimates={0: 0.90, 1: 0.89, 2: 0.88, 3: 0.1},
        overall=0.80,
    )
    ranking = recommend_optimal(ctx, [view], params)
    assert ranking[0].score == pytest.approx(0.864, abs=1e-9)


def test_recommend_optimal_single_label_branch(params):
    ctx = QueryContext.from_probs(0, [0.9, 0.1])
    assert ctx.query_type_labels == (0,)
    view = make_view(label_estimates={0: 0.90, 1: 0.2}, overall=0.80)
    ranking = recommend_optimal(ctx, [view], params)
    assert ranking[0].score == pytest.approx(0.85, abs=1e-9)


def test_recommend_optimal_rejects_empty(params):
    with pytest.raises(ValueError):
        recommend_optimal(QueryContext.from_probs(0, [0.9, 0.1]), [], params)


def test_recommend_optimal_applies_fatigue(params):
    ctx = QueryContext.from_probs(0, [0.9, 0.1])
    fresh = make_view(label_estimates={0: 0.90, 1: 0.2}, overall=0.80)
    tired = make_view(label_estimates={0: 0.90, 1: 0.2}, overall=0.80, fatigue_count=90)
    score_fresh = recommend_optimal(ctx, [fresh], params)[0].score
    score_tired = recommend_optimal(ctx, [tired], params)[0].score
    # level 3 deduction of 0.02 hits both the top label and the mean
    assert score_tired == pytest.approx(score_fresh - 3 * 0.02, abs=1e-9)


def test_alg2_branch_predicates_exhaustive_and_exclusive(params):
    rng = np.random.default_rng(33)
    for _ in range(500):
        t_size = int(rng.integers(1, 5))
        a = sorted(rng.uniform(0.0, 1.0, size=3).tolist(), reverse=True)
        branch_a = t_size > 1 and a[0] - a[1] < 0.04 and a[1] - a[2] >= 0.04
        branch_b = t_size > 1 and a[0] - a[1] < 0.04 and a[1] - a[2] < 0.04
        branch_else = not (branch_a or branch_b)
        assert sum((branch_a, branch_b, branch_else)) == 1


# --- ranking equivalence and permutation invariance ---------------------------------


def test_rankings_match_brute_force_oracle():
    rng = np.random.default_rng(101)
    modes = [
        TestMode.TEST1_ACCURACY_ONLY,
        TestMode.TEST2_ACCURACY_MOOD,
        TestMode.TEST3_ACCURACY_MOOD_FATIGUE,
    ]
    for trial in range(200):
        ctx, views, params, stats = random_case(rng)
        entries = [view_to_entry(v) for v in views]
        mode = modes[trial % 3]
        got = [
            s.annotator_id for s in recommend_rs(ctx, views, mode, params, stats)
        ]
        sd = stats.threshold if stats.count >= 10 else None
        expected = alg1_rank(ctx.uncertainty, list(ctx.probs), entries, sd, mode.value, params)
        assert got == expected
        got_opt = [s.annotator_id for s in recommend_optimal(ctx, views, params)]
        assert got_opt == alg2_rank(list(ctx.probs), entries, params)


def test_rankings_permutation_invariant():
    rng = np.random.default_rng(55)
    for _ in range(30):
        ctx, views, params, stats = random_case(rng)
        baseline_rs = recommend_rs(ctx, views, TestMode.TEST3_ACCURACY_MOOD_FATIGUE, params, stats)
        baseline_opt = recommend_optimal(ctx, views, params)
        shuffled = list(views)
        rng.shuffle(shuffled)
        assert recommend_rs(
            ctx, shuffled, TestMode.TEST3_ACCURACY_MOOD_FATIGUE, params, stats
        ) == baseline_rs
        assert recommend_optimal(ctx, shuffled, params) == baseline_opt
