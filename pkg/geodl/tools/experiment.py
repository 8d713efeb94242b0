import os
import sys
import time
import logging
from typing import Callable
import numpy as np
from geodl.constants import distill_modes, stream_tag_model, stream_tag_train
from geodl.nn.model import ModelState, init_model
from geodl.nn.train_net import HyperParams, train_base, incremental_step, update_memory
from geodl.select.herding import ExemplarMemory
from geodl.task.stream import realize_stream
from geodl.tools.metrics import ExperimentReport, compute_metrics, evaluate, evaluate_nme
from geodl.utils.config import ExperimentConfig


logging.basicConfig(
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
    level=os.environ.get("LOGLEVEL", "INFO").upper(),
    stream=sys.stdout,
)
logger = logging.getLogger(__name__)


def _scorer(cfg: ExperimentConfig) -> Callable[[ModelState, ExemplarMemory, np.ndarray, np.ndarray], float]:
    if cfg.classifier == "nme":
        return evaluate_nme
    return lambda model, memory, x, y: evaluate(model, x, y, cfg.epsilon)


def run_experiment(
        cfg: ExperimentConfig,
        mode: str,
        seed: int
    ) -> ExperimentReport:
    """Train the base task and every increment for one (mode, seed) pair and score it.

    Parameters
    ----------
    cfg : ExperimentConfig
        Validated configuration; `modes` and `seeds` are ignored here.
    mode : str
        Distillation mode, one of none, lwf, cosine, geodl.
    seed : int
        Run seed; every random stream is derived from (master_seed, seed).

    Returns
    -------
    ExperimentReport
        Per-task accuracies A_1..A_T, base accuracies under Phi_0 and Phi_T
        and the derived average accuracy and forgetting rate.
    """
    if mode not in distill_modes:
        raise ValueError(f"unknown distillation mode {mode!r}")
    stream = realize_stream(cfg, seed)
    hyper = HyperParams.from_config(cfg)
    score = _scorer(cfg)
    model = init_model(
        np.random.default_rng([cfg.master_seed, seed, stream_tag_model]),
        cfg.input_dim, cfg.hidden_dim, cfg.feature_dim, cfg.base_classes)
    rng = np.random.default_rng([cfg.master_seed, seed, stream_tag_train])

    wall_ms = []
    tic = time.perf_counter()
    model, memory = train_base(stream[0], hyper, model, rng)
    wall_ms.append((time.perf_counter() - tic) * 1e3)
    base_x, base_y = stream[0].x_test, stream[0].y_test
    base_initial = score(model, memory, base_x, base_y)

    per_task = []
    for phase in range(1, cfg.tasks + 1):
        tic = time.perf_counter()
        model = incremental_step(model, stream[phase], memory, hyper, mode, rng)
        update_memory(memory, model, stream[phase])
        wall_ms.append((time.perf_counter() - tic) * 1e3)
        per_task.append(score(model, memory, *stream.test_union(phase)))
        logger.info(f"{mode} seed {seed} phase {phase}: accuracy {per_task[-1]:.6f}")
    base_final = score(model, memory, base_x, base_y)

    report = compute_metrics(
        per_task,
        base_initial,
        base_final,
        mode=mode,
        seed=seed,
        config_hash=cfg.config_hash(),
        wall_ms=wall_ms if cfg.record_timing else [0.0] * len(wall_ms)
    )
    logger.info(f"{mode} seed {seed}: A {report.average_accuracy:.6f} F {report.forgetting_rate:.6f}")
    return report
