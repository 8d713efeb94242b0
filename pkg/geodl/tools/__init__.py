from geodl.tools.metrics import (
    ExperimentReport,
    evaluate,
    evaluate_nme,
    compute_metrics
)
from geodl.tools.experiment import run_experiment
