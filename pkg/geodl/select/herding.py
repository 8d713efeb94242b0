import os
import sys
import logging
from typing import Dict, List, Tuple
import numpy as np
from sklearn.preprocessing import normalize


logging.basicConfig(
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
    level=os.environ.get("LOGLEVEL", "INFO").upper(),
    stream=sys.stdout,
)
logger = logging.getLogger(__name__)


class ExemplarMemory:
    """Replay memory holding at most `budget_per_class` raw inputs per seen class."""

    def __init__(
            self,
            budget_per_class: int,
            input_dim: int
        ):
        if budget_per_class < 1:
            raise ValueError(f"budget_per_class must be >= 1, got {budget_per_class}")
        self.budget_per_class = budget_per_class
        self.input_dim = input_dim
        self.store: Dict[int, np.ndarray] = {}

    def add(
            self,
            label: int,
            inputs: np.ndarray
        ):
        inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
        if inputs.shape[1] != self.input_dim:
            raise ValueError(f"exemplars must have {self.input_dim} features, got {inputs.shape[1]}")
        if inputs.shape[0] > self.budget_per_class:
            raise ValueError(f"{inputs.shape[0]} exemplars exceed the budget of {self.budget_per_class}")
        if label in self.store:
            raise ValueError(f"class {label} already has exemplars")
        self.store[label] = inputs.copy()

    @property
    def classes(self) -> List[int]:
        return sorted(self.store)

    def __len__(self):
        return sum(len(vv) for vv in self.store.values())

    def samples(self) -> Tuple[np.ndarray, np.ndarray]:
        """All stored exemplars and their labels, ordered by class."""
        if not self.store:
            return np.zeros((0, self.input_dim)), np.zeros(0, dtype=int)
        xs = [self.store[cc] for cc in self.classes]
        ys = [np.full(len(self.store[cc]), cc, dtype=int) for cc in self.classes]
        return np.vstack(xs), np.concatenate(ys)


def herding_order(
        features: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
    """Sample indices sorted by cosine to the mean of the normalised features.

    Returns the order (similarity descending, index ascending on ties) and
    the similarities themselves.
    """
    features = np.atleast_2d(np.asarray(features, dtype=float))
    if features.shape[0] == 0:
        raise ValueError("cannot select exemplars from an empty class")
    unit = normalize(features)
    center = unit.mean(axis=0)
    norm = np.linalg.norm(center)
    sims = unit @ (center / norm) if norm > 0 else np.zeros(len(unit))
    order = np.lexsort((np.arange(len(sims)), -sims))
    return order, sims


def select_exemplars(
        features: np.ndarray,
        inputs: np.ndarray,
        k: int
    ) -> np.ndarray:
    """Keep the k inputs whose features lie closest, by cosine, to the class mean embedding."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    if len(features) != len(inputs):
        raise ValueError(f"{len(features)} features for {len(inputs)} inputs")
    if inputs.size == 0:
        raise ValueError("cannot select exemplars from an empty class")
    if not 1 <= k <= len(inputs):
        raise ValueError(f"k must lie in [1, {len(inputs)}], got {k}")
    order, _ = herding_order(features)
    return inputs[order[:k]]
