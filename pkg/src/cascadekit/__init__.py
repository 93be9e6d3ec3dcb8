"""Information cascades on follower graphs: extraction, metrics, fits, simulation."""
from .cascade import (
    ActivationDAG,
    Cascade,
    ObservedForest,
    build_activation_dag,
    extract_cascades,
    identify_seeds,
    principal_cascade,
    sample_observed_depths,
    sample_observed_tree,
)
from .events import (
    ActivationSequence,
    activity_distribution,
    load_activation_log,
    validate_sequence,
    write_activation_log,
)
from .fitting import FitResult, compare_fits, fit_lognormal, fit_powerlaw, fit_weibull
from .graph import (
    FollowerGraph,
    degree_distribution,
    followees,
    followers,
    load_follower_graph,
    save_follower_graph,
)
from .metrics import (
    CascadeMetrics,
    StoryMetrics,
    analyze_story,
    cascade_metrics,
    corpus_distributions,
    story_metrics,
)
from .sim import (
    ContagionConfig,
    GraphConfig,
    PromotionConfig,
    generate_graph,
    run_independent_cascade,
    run_promotion_experiment,
    simulate_corpus,
)

__version__ = "0.1.0"
