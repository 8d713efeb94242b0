from dataclasses import dataclass, field
from typing import Dict, List, Sequence
import numpy as np
from sklearn.metrics import accuracy_score
from sklearn.preprocessing import normalize
from geodl.nn.model import ModelState, encode, cosine_logits
from geodl.select.herding import ExemplarMemory


def _check_test_set(model: ModelState, x, y):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=int).ravel()
    if y.size == 0 or x.size == 0:
        raise ValueError("empty test set")
    if len(x) != len(y):
        raise ValueError(f"{len(x)} test samples for {len(y)} labels")
    if y.min() < 0 or y.max() >= model.num_classes:
        raise ValueError(f"test labels must lie in [0, {model.num_classes}), "
                         f"got range [{y.min()}, {y.max()}]")
    return x, y


def evaluate(
        model: ModelState,
        x,
        y,
        epsilon: float = 1e-12
    ) -> float:
    """Accuracy of the argmax of the cosine classifier over the seen classes."""
    x, y = _check_test_set(model, x, y)
    # softmax is monotone, the argmax of the cosines is the prediction
    pred = np.argmax(cosine_logits(encode(model, x), model.phi, epsilon), axis=1)
    return float(accuracy_score(y, pred))


def evaluate_nme(
        model: ModelState,
        memory: ExemplarMemory,
        x,
        y
    ) -> float:
    """Accuracy of the nearest-mean-of-exemplars rule by cosine to each class mean."""
    x, y = _check_test_set(model, x, y)
    missing = [cc for cc in range(model.num_classes) if cc not in memory.store]
    if missing:
        raise ValueError(f"no exemplars for classes {missing}")
    means = np.vstack([
        normalize(encode(model, memory.store[cc])).mean(axis=0)
        for cc in range(model.num_classes)
    ])
    pred = np.argmax(normalize(encode(model, x)) @ normalize(means).T, axis=1)
    return float(accuracy_score(y, pred))


@dataclass
class ExperimentReport:
    mode: str
    seed: int
    config_hash: str
    per_task_accuracy: List[float]
    base_accuracy_initial: float
    base_accuracy_final: float
    average_accuracy: float
    forgetting_rate: float
    wall_ms: List[float] = field(default_factory=list)

    def accuracies(self) -> List[float]:
        """A_0 under Phi_0 followed by A_1..A_T."""
        return [self.base_accuracy_initial] + list(self.per_task_accuracy)

    def to_dict(self) -> Dict:
        return {
            "mode": self.mode,
            "seed": self.seed,
            "config_hash": self.config_hash,
            "per_task_accuracy": list(self.per_task_accuracy),
            "base_accuracy_initial": self.base_accuracy_initial,
            "base_accuracy_final": self.base_accuracy_final,
            "average_accuracy": self.average_accuracy,
            "forgetting_rate": self.forgetting_rate,
            "wall_ms": list(self.wall_ms),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ExperimentReport":
        return cls(**data)


def compute_metrics(
        per_task_accuracy: Sequence[float],
        base_accuracy_initial: float,
        base_accuracy_final: float,
        mode: str = "",
        seed: int = 0,
        config_hash: str = "",
        wall_ms: Sequence[float] = ()
    ) -> ExperimentReport:
    r"""Average accuracy A = mean(A_1..A_T) and forgetting F = A_0|Phi_0 - A_0|Phi_T."""
    if len(per_task_accuracy) == 0:
        raise ValueError("at least one per-task accuracy is required")
    accs = [float(aa) for aa in per_task_accuracy]
    return ExperimentReport(
        mode=mode,
        seed=seed,
        config_hash=config_hash,
        per_task_accuracy=accs,
        base_accuracy_initial=float(base_accuracy_initial),
        base_accuracy_final=float(base_accuracy_final),
        average_accuracy=float(np.mean(accs)),
        forgetting_rate=float(base_accuracy_initial) - float(base_accuracy_final),
        wall_ms=[float(ww) for ww in wall_ms]
    )
