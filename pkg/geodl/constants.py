# output file names
results_csv_name = "results.csv"
summary_csv_name = "summary.csv"
sweep_csv_name = "sweep.csv"
sweep_dir_fmt = "{key}={value}"
run_tag_fmt = "{mode}-{seed:04d}"
report_json_name = "report.json"

# csv schemas
results_columns = [
    "mode", "seed", "task_index", "accuracy",
    "avg_accuracy", "forgetting_rate", "wall_ms"
]
summary_columns = [
    "mode", "mean_avg_acc", "std_avg_acc",
    "mean_forgetting", "std_forgetting", "n_seeds"
]
sweep_columns = [
    "key", "value", "mode", "mean_avg_acc", "mean_forgetting", "n_seeds"
]
csv_float_format = "%.6f"
csv_decimals = 6

# distillation modes
distill_modes = ("none", "lwf", "cosine", "geodl")
classifier_types = ("cosine", "nme")
verify_suites = ("geometry", "losses", "sim", "all")
sweep_keys = ("subspace_n", "memory_per_class", "beta")

# geometry tolerances
small_angle_threshold = 1e-6
sigma_threshold = 1e-8
rank_rtol = 1e-10
orthonormal_atol = 1e-10

# synthetic stream
class_mean_scale = 3.0

# exit codes
exit_success = 0
exit_run_failure = 1
exit_config_error = 2
exit_verify_failure = 3

# environment
seed_env = "GEODL_SEED"

# matrix fixture precision
matrix_fmt = "%.17g"

# rng stream tags, combined as [master_seed, seed, tag]
stream_tag_data = 0
stream_tag_model = 1
stream_tag_train = 2
