"""Active node classification on graphs with Gaussian field models."""

from .bench import (
    AccuracyCurve,
    ExperimentConfig,
    LabelOracle,
    accuracy,
    baseline_accuracy,
    emit_csv,
    emit_summary,
    run_experiment,
)
from .gmrf import GmrfModel, MulticlassModel, conditional_mean_direct, spd_inverse
from .graph import (
    Graph,
    LabeledGraph,
    RegularizedLaplacian,
    build_from_features,
    community_graph,
    from_spec,
    grid_graph,
    load_edge_list,
    load_features,
    load_labels,
    normalize_features,
    regularized_laplacian,
    save_edge_list,
    save_labels,
)
from .strategies import (
    KINDS,
    Strategy,
    UtilityReport,
    score_fl,
    score_kl,
    score_klg,
    score_msd,
    score_msd_mc,
    score_sigma_opt,
    score_tv,
    score_tv_mc,
    score_unc,
    score_vm,
    select,
    select_report,
    utility_scores,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyCurve",
    "ExperimentConfig",
    "Graph",
    "GmrfModel",
    "KINDS",
    "LabelOracle",
    "LabeledGraph",
    "MulticlassModel",
    "RegularizedLaplacian",
    "Strategy",
    "UtilityReport",
    "accuracy",
    "baseline_accuracy",
    "build_from_features",
    "community_graph",
    "conditional_mean_direct",
    "emit_csv",
    "emit_summary",
    "from_spec",
    "grid_graph",
    "load_edge_list",
    "load_features",
    "load_labels",
    "normalize_features",
    "regularized_laplacian",
    "run_experiment",
    "save_edge_list",
    "save_labels",
    "score_fl",
    "score_kl",
    "score_klg",
    "score_msd",
    "score_msd_mc",
    "score_sigma_opt",
    "score_tv",
    "score_tv_mc",
    "score_unc",
    "score_vm",
    "select",
    "select_report",
    "spd_inverse",
    "utility_scores",
]
