"""Desk-scale simulation of annotator-selection strategies for active learning."""

__version__ = "0.1.0"

from .behavior import (
    FatigueLedger,
    MoodDay,
    SimParams,
    effective_accuracy,
    fatigue_level,
    fatigue_window_count,
    mood_trajectory,
    simulate_label,
    update_history,
)
from .errors import ConfigError, DataError
from .harness import (
    ClockEvent,
    ExperimentConfig,
    ExperimentResult,
    IterationRecord,
    SimClock,
    advance_clock,
    aggregate,
    build_seed_set,
    run_experiment,
    run_suite,
)
from .learner import (
    Dataset,
    ForestModel,
    QueryContext,
    entropy,
    evaluate,
    least_confidence,
    margin_confidence,
    query_type,
    ratio_confidence,
    select_query,
)
from .population import (
    AgeGroup,
    Annotator,
    BatchConfig,
    Chronotype,
    generate_annotator,
    generate_batch,
    load_batch,
    sample_chronotype,
    save_batch,
)
from .selector import (
    AnnotatorView,
    ScoredAnnotator,
    TestMode,
    UncertaintyStats,
    predicted_accuracy,
    recommend_optimal,
    recommend_rs,
    update_uncertainty_stats,
    weight_branch,
)
