import os
import sys
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence
import pandas as pd
from dflow.python import OPIO
from geodl.constants import (
    sweep_csv_name,
    sweep_columns,
    sweep_dir_fmt,
    sweep_keys
)
from geodl.op.run_incremental import RunIncremental
from geodl.op.summarize import SummarizeRuns, write_csv
from geodl.utils.config import ExperimentConfig
from geodl.utils.path import set_directory


logging.basicConfig(
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
    level=os.environ.get("LOGLEVEL", "INFO").upper(),
    stream=sys.stdout,
)
logger = logging.getLogger(__name__)


class RunFailure(RuntimeError):
    """A single (mode, seed) run raised; the original error is chained."""

    def __init__(self, mode: str, seed: int, err: Exception):
        self.mode = mode
        self.seed = seed
        super().__init__(f"run (mode={mode}, seed={seed}) failed: {err}")


def _execute_run(exp_config: Dict, mode: str, seed: int) -> Dict:
    op_out = RunIncremental().execute(OPIO({
        "exp_config": exp_config,
        "mode": mode,
        "seed": seed
    }))
    return op_out["report"]


def _collect(cfg: ExperimentConfig) -> List[Dict]:
    exp_config = cfg.to_dict()
    pairs = cfg.run_pairs()
    reports = []
    if cfg.workers > 1 and len(pairs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_execute_run, exp_config, mode, seed) for mode, seed in pairs]
            # reports follow the config order whatever finishes first
            for (mode, seed), future in zip(pairs, futures):
                try:
                    reports.append(future.result())
                except Exception as err:
                    raise RunFailure(mode, seed, err) from err
        return reports
    for mode, seed in pairs:
        try:
            reports.append(_execute_run(exp_config, mode, seed))
        except Exception as err:
            raise RunFailure(mode, seed, err) from err
    return reports


def run_geodl(
        cfg: ExperimentConfig,
        out: Optional[str] = None
    ) -> List[Dict]:
    """Run every (mode, seed) pair of the config and write the csv files to `out`.

    `out` defaults to the config's output_path. Returns the summary rows.
    """
    out_path = Path(cfg.output_path if out is None else out).absolute()
    logger.info(f"running {len(cfg.run_pairs())} run(s) into {out_path}")
    with set_directory(out_path):
        reports = _collect(cfg)
    op_out = SummarizeRuns().execute(OPIO({
        "reports": reports,
        "output_path": str(out_path)
    }))
    for row in op_out["summary_records"]:
        logger.info(f"{row['mode']}: mean A {row['mean_avg_acc']:.6f} mean F {row['mean_forgetting']:.6f} "
                    f"over {row['n_seeds']} seed(s)")
    return op_out["summary_records"]


def sweep_geodl(
        cfg: ExperimentConfig,
        key: str,
        values: Sequence[str],
        out: Optional[str] = None
    ) -> pd.DataFrame:
    """Rerun `cfg` once per value of `key`, each into `<out>/<key>=<value>/`, and tabulate the means."""
    if key not in sweep_keys:
        raise ValueError(f"cannot sweep {key!r}, expected one of {', '.join(sweep_keys)}")
    if not values:
        raise ValueError("the sweep needs at least one value")
    out_path = Path(cfg.output_path if out is None else out).absolute()
    variants = [cfg.replace(**{key: value}) for value in values]
    rows = []
    for variant in variants:
        value = getattr(variant, key)
        logger.info(f"sweep {key} = {value}")
        summary = run_geodl(variant, str(out_path.joinpath(sweep_dir_fmt.format(key=key, value=value))))
        for row in summary:
            rows.append({
                "key": key,
                "value": value,
                "mode": row["mode"],
                "mean_avg_acc": row["mean_avg_acc"],
                "mean_forgetting": row["mean_forgetting"],
                "n_seeds": row["n_seeds"],
            })
    frame = pd.DataFrame(rows, columns=sweep_columns)
    write_csv(frame, out_path.joinpath(sweep_csv_name))
    return frame
