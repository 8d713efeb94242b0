import os
import sys
import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union
import numpy as np
from scipy.special import softmax, log_softmax
from geodl.geodesic.kernel import GeodesicKernel


logging.basicConfig(
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
    level=os.environ.get("LOGLEVEL", "INFO").upper(),
    stream=sys.stdout,
)
logger = logging.getLogger(__name__)

KernelLike = Union[GeodesicKernel, np.ndarray, None]


@dataclass(frozen=True)
class DistillConfig:
    beta: float = 6.0
    tau: float = 2.0
    epsilon: float = 1e-12
    q_stop_gradient: bool = True

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.tau <= 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass(frozen=True, eq=False)
class FeaturePair:
    """Encodings of the same inputs by the old and the new model.

    Either two vectors of length d, or two (B, d) arrays holding one sample
    per row; every loss below then returns per-sample values.
    """
    z_old: np.ndarray
    z_new: np.ndarray

    def __post_init__(self):
        z_old = np.asarray(self.z_old, dtype=float)
        z_new = np.asarray(self.z_new, dtype=float)
        if z_old.shape != z_new.shape or z_old.ndim not in (1, 2) or z_old.size == 0:
            raise ValueError(f"feature shapes must match and be 1-d or 2-d, got {z_old.shape} and {z_new.shape}")
        if not (np.all(np.isfinite(z_old)) and np.all(np.isfinite(z_new))):
            raise ValueError("features have non-finite entries")
        object.__setattr__(self, "z_old", z_old)
        object.__setattr__(self, "z_new", z_new)

    @property
    def dim(self) -> int:
        return self.z_old.shape[-1]


class LossGradient(NamedTuple):
    grad: np.ndarray
    degenerate: Union[bool, np.ndarray]


def _kernel_matrix(q: KernelLike, dim: int) -> Optional[np.ndarray]:
    if q is None:
        return None
    mat = q.q if isinstance(q, GeodesicKernel) else np.asarray(q, dtype=float)
    if mat.shape != (dim, dim):
        raise ValueError(f"kernel of shape {mat.shape} does not match feature dimension {dim}")
    if not np.all(np.isfinite(mat)):
        raise ValueError("kernel has non-finite entries")
    return mat


def _generalized_cosine(pair: FeaturePair, q: KernelLike, epsilon: float):
    mat = _kernel_matrix(q, pair.dim)
    z_old = np.atleast_2d(pair.z_old)
    z_new = np.atleast_2d(pair.z_new)
    # Q is symmetric, so row-wise z Q equals (Q z)^T
    qz_old = z_old if mat is None else z_old @ mat
    qz_new = z_new if mat is None else z_new @ mat
    num = np.sum(z_new * qz_old, axis=1)
    norm_new = np.sqrt(np.maximum(np.sum(z_new * qz_new, axis=1), 0.0))
    norm_old = np.sqrt(np.maximum(np.sum(z_old * qz_old, axis=1), 0.0))
    den = norm_new * norm_old + epsilon
    return num, norm_new, norm_old, den, qz_old, qz_new


def _shape_like(pair: FeaturePair, values: np.ndarray):
    return float(values[0]) if pair.z_old.ndim == 1 else values


def geodl_loss(
        pair: FeaturePair,
        q: KernelLike,
        epsilon: float = 1e-12
    ):
    r"""Geodesic distillation loss 1 - z_new^T Q z_old / (|Q^{1/2} z_new| |Q^{1/2} z_old| + eps).

    The Q-norms are taken as sqrt(z^T Q z); Q is never square-rooted.
    """
    num, _, _, den, _, _ = _generalized_cosine(pair, q, epsilon)
    return _shape_like(pair, 1.0 - num / den)


def geodl_loss_grad(
        pair: FeaturePair,
        q: KernelLike,
        config: DistillConfig = DistillConfig()
    ) -> LossGradient:
    r"""Gradient of `geodl_loss` with respect to z_new, Q held constant.

    With a = |Q^{1/2} z_new|, b = |Q^{1/2} z_old| and D = a b + eps:
    grad = -[Q z_old / D - (z_new^T Q z_old) b Q z_new / (a D^2)], which is the
    textbook -[Q z_old/(ab) - (z_new^T Q z_old) Q z_new/(a^3 b)] at eps = 0.
    Samples with a b <= eps get a zero gradient and are flagged degenerate.
    """
    if not config.q_stop_gradient:
        raise ValueError("backpropagation through the kernel construction is not supported, "
                         "set q_stop_gradient")
    num, norm_new, norm_old, den, qz_old, qz_new = _generalized_cosine(pair, q, config.epsilon)
    degenerate = norm_new * norm_old <= config.epsilon
    safe_new = np.where(degenerate, 1.0, norm_new)
    coeff = num * norm_old / (safe_new * den ** 2)
    grad = -(qz_old / den[:, None] - coeff[:, None] * qz_new)
    grad[degenerate] = 0.0
    if np.any(degenerate):
        logger.warning(f"geodl_loss_grad: {int(np.sum(degenerate))} degenerate sample(s), gradient set to zero")
    if pair.z_old.ndim == 1:
        return LossGradient(grad=grad[0], degenerate=bool(degenerate[0]))
    return LossGradient(grad=grad, degenerate=degenerate)


def cosine_distill_loss(
        pair: FeaturePair,
        epsilon: float = 1e-12
    ):
    """Feature distillation with the plain cosine, geodl_loss with Q = I."""
    return geodl_loss(pair, None, epsilon=epsilon)


def cosine_distill_loss_grad(
        pair: FeaturePair,
        config: DistillConfig = DistillConfig()
    ) -> LossGradient:
    return geodl_loss_grad(pair, None, config=config)


def _check_logits(logits_old, logits_new, tau: float):
    logits_old = np.asarray(logits_old, dtype=float)
    logits_new = np.asarray(logits_new, dtype=float)
    if logits_old.shape != logits_new.shape or logits_old.ndim not in (1, 2):
        raise ValueError(f"logit shapes must match, got {logits_old.shape} and {logits_new.shape}")
    if logits_old.shape[-1] < 2:
        raise ValueError("distillation over predictions needs at least 2 classes")
    if not (np.all(np.isfinite(logits_old)) and np.all(np.isfinite(logits_new))):
        raise ValueError("logits have non-finite entries")
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    return logits_old, logits_new


def lwf_loss(
        logits_old,
        logits_new,
        tau: float = 2.0
    ):
    """Cross-entropy between the tempered old and new predictions, -sum p_old log p_new."""
    logits_old, logits_new = _check_logits(logits_old, logits_new, tau)
    p_old = softmax(logits_old / tau, axis=-1)
    log_p_new = log_softmax(logits_new / tau, axis=-1)
    loss = -np.sum(p_old * log_p_new, axis=-1)
    return float(loss) if np.ndim(loss) == 0 else loss


def lwf_loss_grad(
        logits_old,
        logits_new,
        tau: float = 2.0
    ) -> np.ndarray:
    """Gradient of `lwf_loss` with respect to the new logits, (p_new - p_old) / tau."""
    logits_old, logits_new = _check_logits(logits_old, logits_new, tau)
    return (softmax(logits_new / tau, axis=-1) - softmax(logits_old / tau, axis=-1)) / tau


def adaptive_beta(
        beta: float,
        n_new: int,
        n_old: int
    ) -> float:
    """beta * sqrt(n_new / n_old); the counts are numbers of classes."""
    if n_new < 1 or n_old < 1:
        raise ValueError(f"class counts must be >= 1, got n_new={n_new}, n_old={n_old}")
    return float(beta * np.sqrt(n_new / n_old))
