"""Expected-utility-optimal test-set predictions for set-level metrics.

Public surface: the metric registry and property checkers, the label
count distributions, the cutoff optimizers with their exhaustive oracle,
the logistic probability estimator, the plugin-threshold baselines, and
dataset plumbing.  The ``dtaopt`` console script wires these into report
commands.
"""

from .data import Dataset, Task, macro_average, make_tasks, parse_csv, parse_svmlight, split
from .logistic import LinearModel, load_model, predict_proba, save_model, train_logistic
from .metrics import (
    ConfusionTriple,
    DegenerateRules,
    FractionalLinearParams,
    MetricSpec,
    Orientation,
    check_fl_regularity,
    check_tp_monotonic,
    check_tpn_monotonic,
    confusion_triple,
    phi_eval,
    registry_lookup,
    registry_names,
)
from .optimizer import (
    Prediction,
    PrpResult,
    SortedEtas,
    brute_force,
    expected_utility_arbitrary,
    expected_utility_topk,
    optimize_general,
    optimize_sfl,
    verify_prp,
)
from .poisson_binomial import coefficients, shrink_suffix, split_coefficients
from .thresholding import PluginThreshold, classify_threshold, select_threshold

__version__ = "0.1.0"

__all__ = [
    "ConfusionTriple",
    "Dataset",
    "DegenerateRules",
    "FractionalLinearParams",
    "LinearModel",
    "MetricSpec",
    "Orientation",
    "PluginThreshold",
    "Prediction",
    "PrpResult",
    "SortedEtas",
    "Task",
    "brute_force",
    "check_fl_regularity",
    "check_tp_monotonic",
    "check_tpn_monotonic",
    "classify_threshold",
    "coefficients",
    "confusion_triple",
    "expected_utility_arbitrary",
    "expected_utility_topk",
    "load_model",
    "macro_average",
    "make_tasks",
    "optimize_general",
    "optimize_sfl",
    "parse_csv",
    "parse_svmlight",
    "phi_eval",
    "predict_proba",
    "registry_lookup",
    "registry_names",
    "save_model",
    "select_threshold",
    "shrink_suffix",
    "split",
    "split_coefficients",
    "train_logistic",
    "verify_prp",
]
