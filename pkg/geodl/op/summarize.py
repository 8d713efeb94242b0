from pathlib import Path
from typing import Dict, List
import numpy as np
import pandas as pd
from dflow.python import (
    OP,
    OPIO,
    OPIOSign,
    Artifact
)
from geodl.constants import (
    results_csv_name,
    summary_csv_name,
    results_columns,
    summary_columns,
    csv_float_format,
    csv_decimals
)
from geodl.utils.format import round_half


def results_frame(
        reports: List[Dict]
    ) -> pd.DataFrame:
    """One row per (mode, seed, phase); phase 0 holds the base accuracy under Phi_0."""
    rows = []
    for report in reports:
        accs = [report["base_accuracy_initial"]] + list(report["per_task_accuracy"])
        walls = list(report["wall_ms"]) or [0.0] * len(accs)
        for task_index, (acc, wall) in enumerate(zip(accs, walls)):
            rows.append({
                "mode": report["mode"],
                "seed": report["seed"],
                "task_index": task_index,
                "accuracy": acc,
                "avg_accuracy": report["average_accuracy"],
                "forgetting_rate": report["forgetting_rate"],
                "wall_ms": wall,
            })
    return pd.DataFrame(rows, columns=results_columns)


def _stats(values: np.ndarray):
    std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return float(np.mean(values)), std


def summary_frame(
        results: pd.DataFrame
    ) -> pd.DataFrame:
    r"""Mean and sample standard deviation of A and F per mode.

    Computed from the values as printed in results.csv, so reading that file
    back reproduces the summary.
    """
    per_run = results.drop_duplicates(subset=["mode", "seed"], keep="first")
    rows = []
    for mode in per_run["mode"].drop_duplicates():
        sub = per_run[per_run["mode"] == mode]
        avg = np.array([round_half(vv, csv_decimals) for vv in sub["avg_accuracy"]])
        forget = np.array([round_half(vv, csv_decimals) for vv in sub["forgetting_rate"]])
        mean_avg, std_avg = _stats(avg)
        mean_forget, std_forget = _stats(forget)
        rows.append({
            "mode": mode,
            "mean_avg_acc": mean_avg,
            "std_avg_acc": std_avg,
            "mean_forgetting": mean_forget,
            "std_forgetting": std_forget,
            "n_seeds": len(sub),
        })
    return pd.DataFrame(rows, columns=summary_columns)


def write_csv(
        frame: pd.DataFrame,
        fname: Path
    ):
    frame.to_csv(fname, index=False, float_format=csv_float_format)


class SummarizeRuns(OP):

    """`SummarizeRuns` collects the reports of every (mode, seed) run into `results.csv`
    and aggregates them per mode into `summary.csv`.
    """

    @classmethod
    def get_input_sign(cls):
        return OPIOSign(
            {
                "reports": List,
                "output_path": str
            }
        )

    @classmethod
    def get_output_sign(cls):
        return OPIOSign(
            {
                "results": Artifact(Path),
                "summary": Artifact(Path),
                "summary_records": List
            }
        )

    @OP.exec_sign_check
    def execute(
        self,
        op_in: OPIO,
    ) -> OPIO:

        r"""Execute the OP.

        Parameters
        ----------
        op_in : dict
            Input dict with components:

            - `reports`: (`List[Dict]`) Experiment reports in the order they are written.
            - `output_path`: (`str`) Directory receiving the two csv files.

        Returns
        -------
            Output dict with components:

            - `results`: (`Artifact(Path)`) Per-phase accuracies of every run.
            - `summary`: (`Artifact(Path)`) Mean and standard deviation of A and F per mode.
            - `summary_records`: (`List[Dict]`) The summary rows.
        """
        out = Path(op_in["output_path"])
        out.mkdir(exist_ok=True, parents=True)
        results = results_frame(op_in["reports"])
        summary = summary_frame(results)
        write_csv(results, out.joinpath(results_csv_name))
        write_csv(summary, out.joinpath(summary_csv_name))
        return OPIO({
            "results": out.joinpath(results_csv_name),
            "summary": out.joinpath(summary_csv_name),
            "summary_records": summary.to_dict(orient="records")
        })
