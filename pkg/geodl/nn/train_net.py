import os
import sys
import logging
from dataclasses import dataclass
from typing import Dict, NamedTuple, Optional, Tuple
import numpy as np
from scipy.special import softmax, log_softmax
from geodl.constants import distill_modes
from geodl.geodesic import (
    DegenerateSpanError,
    pca_subspace,
    cs_decompose,
    geodesic_kernel
)
from geodl.nn.losses import (
    DistillConfig,
    FeaturePair,
    adaptive_beta,
    geodl_loss,
    geodl_loss_grad,
    cosine_distill_loss,
    cosine_distill_loss_grad,
    lwf_loss,
    lwf_loss_grad
)
from geodl.nn.model import (
    ModelState,
    forward,
    encode,
    encoder_backward,
    cosine_logits,
    cosine_logits_backward
)
from geodl.select.herding import ExemplarMemory, select_exemplars
from geodl.task.stream import TaskData


logging.basicConfig(
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
    level=os.environ.get("LOGLEVEL", "INFO").upper(),
    stream=sys.stdout,
)
logger = logging.getLogger(__name__)


class DivergenceError(RuntimeError):
    """The training loss became non-finite."""

    def __init__(self, step: int, phase: int, loss: float):
        self.step = step
        self.phase = phase
        self.loss = loss
        super().__init__(f"non-finite loss {loss} at step {step} of phase {phase}")


@dataclass(frozen=True)
class HyperParams:
    lr: float = 0.05
    lr_decay: float = 0.1
    epochs_base: int = 60
    epochs_incr: int = 40
    batch: int = 32
    beta: float = 6.0
    tau: float = 2.0
    epsilon: float = 1e-12
    subspace_n: int = 6
    center: bool = True
    memory_per_class: int = 10

    @classmethod
    def from_config(cls, cfg) -> "HyperParams":
        return cls(**{key: getattr(cfg, key) for key in cls.__dataclass_fields__})

    @property
    def distill(self) -> DistillConfig:
        return DistillConfig(beta=self.beta, tau=self.tau, epsilon=self.epsilon)


def learning_rate(
        hyper: HyperParams,
        epoch: int,
        epochs: int
    ) -> float:
    """lr decayed by `lr_decay` once at half and once at three quarters of the epochs."""
    # epoch >= epochs / 2 and epoch >= 3 epochs / 4, in integers
    return hyper.lr * hyper.lr_decay ** sum(4 * epoch >= kk * epochs for kk in (2, 3))


class DistillTerm(NamedTuple):
    loss: float
    dz: Optional[np.ndarray]
    dlogits_old: Optional[np.ndarray]


def _geodl_kernel(z_old: np.ndarray, z_new: np.ndarray, hyper: HyperParams, step: int):
    if len(z_old) < 2:
        logger.warning(f"step {step}: single-sample batch, geodl term skipped")
        return None
    try:
        p_old = pca_subspace(z_old.T, hyper.subspace_n, center=hyper.center)
        p_new = pca_subspace(z_new.T, hyper.subspace_n, center=hyper.center)
    except DegenerateSpanError as err:
        logger.warning(f"step {step}: {err}, geodl term skipped")
        return None
    rank = min(p_old.subspace_dim, p_new.subspace_dim)
    return geodesic_kernel(cs_decompose(p_old.truncate(rank), p_new.truncate(rank)))


def distillation_terms(
        model_old: ModelState,
        model_new: ModelState,
        x: np.ndarray,
        hyper: HyperParams,
        mode: str,
        beta_ad: float,
        step: int = 0,
        cache: Optional[Dict] = None
    ) -> DistillTerm:
    r"""Batch-mean distillation loss weighted by beta_ad and its gradients.

    `dz` is the gradient with respect to the new encodings (feature modes),
    `dlogits_old` the one with respect to the new cosine logits of the old
    classes (lwf). The old model only runs forward.
    """
    if mode not in distill_modes:
        raise ValueError(f"unknown distillation mode {mode!r}")
    if mode == "none" or beta_ad == 0:
        return DistillTerm(loss=0.0, dz=None, dlogits_old=None)
    cache = {} if cache is None else cache
    z_new = cache["z_new"] if "z_new" in cache else encode(model_new, x)
    z_old = encode(model_old, x)
    bb = len(x)
    config = hyper.distill

    if mode == "lwf":
        n_old = model_old.num_classes
        logits_old = cosine_logits(z_old, model_old.phi, config.epsilon)
        logits_new = cosine_logits(z_new, model_new.phi[:n_old], config.epsilon)
        loss = np.mean(lwf_loss(logits_old, logits_new, config.tau))
        dlogits = lwf_loss_grad(logits_old, logits_new, config.tau) * beta_ad / bb
        return DistillTerm(loss=beta_ad * float(loss), dz=None, dlogits_old=dlogits)

    pair = FeaturePair(z_old, z_new)
    if mode == "cosine":
        loss = cosine_distill_loss(pair, config.epsilon)
        grad = cosine_distill_loss_grad(pair, config).grad
    else:
        kernel = _geodl_kernel(z_old, z_new, hyper, step)
        if kernel is None:
            return DistillTerm(loss=0.0, dz=None, dlogits_old=None)
        loss = geodl_loss(pair, kernel, config.epsilon)
        grad = geodl_loss_grad(pair, kernel, config).grad
    return DistillTerm(loss=beta_ad * float(np.mean(loss)), dz=grad * beta_ad / bb, dlogits_old=None)


def sgd_step(
        model: ModelState,
        x: np.ndarray,
        y: np.ndarray,
        lr: float,
        hyper: HyperParams,
        model_old: Optional[ModelState] = None,
        mode: str = "none",
        beta_ad: float = 0.0,
        step: int = 0
    ) -> float:
    """One in-place descent step on a mini-batch; a non-finite loss is returned without updating."""
    bb = len(x)
    eps = hyper.epsilon
    z, hidden = forward(model, x)
    logits = cosine_logits(z, model.phi, eps)
    loss = -float(np.mean(log_softmax(logits, axis=1)[np.arange(bb), y]))
    dlogits = softmax(logits, axis=1)
    dlogits[np.arange(bb), y] -= 1.0
    dlogits /= bb

    if model_old is not None:
        term = distillation_terms(model_old, model, x, hyper, mode, beta_ad, step, cache={"z_new": z})
        loss += term.loss
        if term.dlogits_old is not None:
            dlogits[:, :model_old.num_classes] += term.dlogits_old
    else:
        term = None
    if not np.isfinite(loss):
        return loss

    dz, dphi = cosine_logits_backward(z, model.phi, dlogits, eps)
    if term is not None and term.dz is not None:
        dz = dz + term.dz
    grads = encoder_backward(model, x, hidden, dz)
    grads["phi"] = dphi
    for name, grad in grads.items():
        setattr(model, name, getattr(model, name) - lr * grad)
    return loss


def _fit(
        model: ModelState,
        x: np.ndarray,
        y: np.ndarray,
        epochs: int,
        hyper: HyperParams,
        rng: np.random.Generator,
        phase: int,
        model_old: Optional[ModelState] = None,
        mode: str = "none",
        beta_ad: float = 0.0
    ) -> ModelState:
    step = 0
    nn = len(x)
    for epoch in range(epochs):
        lr = learning_rate(hyper, epoch, epochs)
        perm = rng.permutation(nn)
        losses = []
        for start in range(0, nn, hyper.batch):
            idx = perm[start:start + hyper.batch]
            loss = sgd_step(model, x[idx], y[idx], lr, hyper, model_old, mode, beta_ad, step)
            if not np.isfinite(loss):
                raise DivergenceError(step, phase, loss)
            losses.append(loss)
            step += 1
        if epoch == 0 or epoch == epochs - 1 or lr != learning_rate(hyper, epoch - 1, epochs):
            logger.info(f"phase {phase} epoch {epoch + 1}/{epochs} lr {lr:g} loss {np.mean(losses):.6f}")
    return model


def update_memory(
        memory: ExemplarMemory,
        model: ModelState,
        task: TaskData
    ) -> ExemplarMemory:
    """Add exemplars of the task's classes selected with the model's encodings."""
    for label in task.classes:
        inputs = task.class_train(label)
        k = min(memory.budget_per_class, len(inputs))
        memory.add(label, select_exemplars(encode(model, inputs), inputs, k))
    return memory


def train_base(
        task: TaskData,
        hyper: HyperParams,
        model: ModelState,
        rng: np.random.Generator
    ) -> Tuple[ModelState, ExemplarMemory]:
    r"""Train Phi_0 on D_0 with the cross-entropy of the cosine classifier.

    Parameters
    ----------
    task : TaskData
        The base task D_0.
    hyper : HyperParams
        Optimisation settings; `epochs_base` epochs of mini-batch descent.
    model : ModelState
        Seeded initial parameters with one prototype per base class; not mutated.
    rng : Generator
        Source of the mini-batch permutations.

    Returns
    -------
    model, memory
        The trained Phi_0 and the exemplars selected for the base classes.

    Raises
    ------
    DivergenceError
        The loss became non-finite.
    """
    if model.num_classes != len(task.classes):
        raise ValueError(f"model has {model.num_classes} prototypes for {len(task.classes)} base classes")
    model = _fit(model.copy(), task.x_train, task.y_train, hyper.epochs_base, hyper, rng, task.phase)
    memory = ExemplarMemory(hyper.memory_per_class, model.input_dim)
    return model, update_memory(memory, model, task)


def init_prototypes(
        model: ModelState,
        task: TaskData,
        batch: int,
        rng: np.random.Generator
    ) -> np.ndarray:
    """Unit prototypes from the mean encoding of each new class's first batch."""
    protos = []
    for label in task.classes:
        mean = encode(model, task.class_train(label)[:batch]).mean(axis=0)
        norm = np.linalg.norm(mean)
        if not norm > 0:
            mean = rng.normal(size=model.feature_dim)
            norm = np.linalg.norm(mean)
        protos.append(mean / norm)
    return np.vstack(protos)


def incremental_step(
        model_old: ModelState,
        task: TaskData,
        memory: ExemplarMemory,
        hyper: HyperParams,
        mode: str,
        rng: np.random.Generator
    ) -> ModelState:
    r"""Train Phi_t on D_t and the replayed exemplars, distilling from the frozen Phi_{t-1}.

    The classifier grows by one prototype per new class. Every mini-batch
    minimises L_CE + beta_ad L_distill with beta_ad = beta sqrt(N_new / N_old)
    counted in classes; for geodl the kernel Q is rebuilt per batch from the
    PCA subspaces of the old and new encodings and held constant.
    """
    if mode not in distill_modes:
        raise ValueError(f"unknown distillation mode {mode!r}")
    seen = set(model_old.seen_classes)
    if any(label in seen for label in task.classes):
        raise ValueError(f"task {task.phase} repeats already seen classes")
    model = model_old.copy()
    model.add_prototypes(init_prototypes(model_old, task, hyper.batch, rng), task.classes)
    beta_ad = adaptive_beta(hyper.beta, len(task.classes), model_old.num_classes)
    x_mem, y_mem = memory.samples()
    x = np.vstack([task.x_train, x_mem])
    y = np.concatenate([task.y_train, y_mem])
    logger.info(f"phase {task.phase}: mode {mode}, {len(task.x_train)} new samples, "
                f"{len(x_mem)} exemplars, beta_ad {beta_ad:.6f}")
    return _fit(model, x, y, hyper.epochs_incr, hyper, rng, task.phase,
                model_old=model_old, mode=mode, beta_ad=beta_ad)
