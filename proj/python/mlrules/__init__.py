"""Multi-label rule learning: candidate rules from randomized tree ensembles,
separate-and-conquer selection under m-estimate / F-measure heuristics, and
threshold-filtered DNF theories."""

from ._mlrules import (
    ConfigError,
    ConfusionMatrix,
    DataError,
    Dataset,
    Error,
    HeuristicSpec,
    ParseError,
    RulePool,
    Theory,
    atomic_confusion,
    build_theory,
    evaluate,
    generate_candidates,
    kfold_split,
    load_dataset,
    metrics,
    parse_arff,
    parse_label_header,
    preprocess,
    run_sweep,
    threshold_for_retention,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConfusionMatrix",
    "DataError",
    "Dataset",
    "Error",
    "HeuristicSpec",
    "ParseError",
    "RulePool",
    "Theory",
    "atomic_confusion",
    "build_theory",
    "evaluate",
    "generate_candidates",
    "kfold_split",
    "load_dataset",
    "metrics",
    "parse_arff",
    "parse_label_header",
    "preprocess",
    "run_sweep",
    "threshold_for_retention",
]
