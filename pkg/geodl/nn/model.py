import hashlib
from copy import deepcopy
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple
import numpy as np
from scipy.special import softmax


@dataclass(eq=False)
class ModelState:
    r"""Encoder parameters theta and the expandable cosine classifier phi.

    The encoder is z = W2 tanh(W1 x + b1) + b2; with `w1` set to None the
    hidden layer is bypassed and z = W2 x + b2. `phi` holds one prototype
    row per seen class, in the order of `seen_classes`.
    """
    w1: Optional[np.ndarray]
    b1: Optional[np.ndarray]
    w2: np.ndarray
    b2: np.ndarray
    phi: np.ndarray
    seen_classes: List[int] = field(default_factory=list)

    @property
    def linear(self) -> bool:
        return self.w1 is None

    @property
    def input_dim(self) -> int:
        return self.w2.shape[1] if self.linear else self.w1.shape[1]

    @property
    def feature_dim(self) -> int:
        return self.w2.shape[0]

    @property
    def num_classes(self) -> int:
        return self.phi.shape[0]

    def params(self) -> Dict[str, np.ndarray]:
        names = ("w2", "b2", "phi") if self.linear else ("w1", "b1", "w2", "b2", "phi")
        return {name: getattr(self, name) for name in names}

    def copy(self) -> "ModelState":
        return deepcopy(self)

    def fingerprint(self) -> str:
        """SHA-256 over the bytes of every parameter and the class order."""
        digest = hashlib.sha256()
        for name, value in self.params().items():
            digest.update(name.encode("utf-8"))
            digest.update(np.ascontiguousarray(value).tobytes())
        digest.update(",".join(str(cc) for cc in self.seen_classes).encode("utf-8"))
        return digest.hexdigest()

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(value)) for value in self.params().values())

    def add_prototypes(self, prototypes: np.ndarray, classes: List[int]):
        prototypes = np.atleast_2d(np.asarray(prototypes, dtype=float))
        if prototypes.shape != (len(classes), self.feature_dim):
            raise ValueError(f"expected {len(classes)} prototypes of size {self.feature_dim}, "
                             f"got {prototypes.shape}")
        self.phi = np.vstack([self.phi, prototypes])
        self.seen_classes = list(self.seen_classes) + list(classes)


def init_model(
        rng: np.random.Generator,
        input_dim: int,
        hidden_dim: int,
        feature_dim: int,
        num_classes: int
    ) -> ModelState:
    """Seeded initial parameters; hidden_dim = 0 gives the linear encoder."""
    if hidden_dim > 0:
        w1 = rng.normal(size=(hidden_dim, input_dim)) / np.sqrt(input_dim)
        b1 = np.zeros(hidden_dim)
        w2 = rng.normal(size=(feature_dim, hidden_dim)) / np.sqrt(hidden_dim)
    else:
        w1 = b1 = None
        w2 = rng.normal(size=(feature_dim, input_dim)) / np.sqrt(input_dim)
    b2 = np.zeros(feature_dim)
    phi = rng.normal(size=(num_classes, feature_dim)) / np.sqrt(feature_dim)
    return ModelState(w1=w1, b1=b1, w2=w2, b2=b2, phi=phi,
                      seen_classes=list(range(num_classes)))


def _as_batch(x) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    return (x[None, :], True) if x.ndim == 1 else (x, False)


def forward(theta: ModelState, x: np.ndarray) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Encodings of a (B, D) batch plus the hidden activations kept for backward."""
    if theta.linear:
        return x @ theta.w2.T + theta.b2, None
    hidden = np.tanh(x @ theta.w1.T + theta.b1)
    return hidden @ theta.w2.T + theta.b2, hidden


def encode(theta: ModelState, x) -> np.ndarray:
    """z = W2 tanh(W1 x + b1) + b2 for one input vector or a batch of rows."""
    x, single = _as_batch(x)
    if not np.all(np.isfinite(x)):
        raise ValueError("inputs have non-finite entries")
    z, _ = forward(theta, x)
    return z[0] if single else z


def encoder_backward(
        theta: ModelState,
        x: np.ndarray,
        hidden: Optional[np.ndarray],
        dz: np.ndarray
    ) -> Dict[str, np.ndarray]:
    grads = {"b2": dz.sum(axis=0)}
    if theta.linear:
        grads["w2"] = dz.T @ x
        return grads
    grads["w2"] = dz.T @ hidden
    dpre = (dz @ theta.w2) * (1.0 - hidden ** 2)
    grads["w1"] = dpre.T @ x
    grads["b1"] = dpre.sum(axis=0)
    return grads


def cosine_logits(
        z: np.ndarray,
        phi: np.ndarray,
        epsilon: float = 1e-12
    ) -> np.ndarray:
    r"""sim(phi_c, z) = z . phi_c / (|z| |phi_c| + eps) for every row of z and every prototype."""
    if phi.shape[0] == 0:
        raise ValueError("the classifier has no prototypes")
    z_norm = np.linalg.norm(z, axis=-1)
    phi_norm = np.linalg.norm(phi, axis=-1)
    return (z @ phi.T) / (np.multiply.outer(z_norm, phi_norm) + epsilon)


def cosine_logits_backward(
        z: np.ndarray,
        phi: np.ndarray,
        dlogits: np.ndarray,
        epsilon: float = 1e-12
    ) -> Tuple[np.ndarray, np.ndarray]:
    """Chain dL/dlogits (B, C) through the cosine into dL/dz (B, d) and dL/dphi (C, d)."""
    z_norm = np.linalg.norm(z, axis=1)
    phi_norm = np.linalg.norm(phi, axis=1)
    den = np.outer(z_norm, phi_norm) + epsilon
    dots = z @ phi.T
    scaled = dlogits / den
    tangent = dlogits * dots / den ** 2
    safe_z = np.where(z_norm > 0, z_norm, 1.0)
    safe_phi = np.where(phi_norm > 0, phi_norm, 1.0)
    dz = scaled @ phi - ((tangent * phi_norm[None, :]).sum(axis=1) / safe_z)[:, None] * z
    dphi = scaled.T @ z - ((tangent * z_norm[:, None]).sum(axis=0) / safe_phi)[:, None] * phi
    return dz, dphi


def class_probabilities(
        z,
        phi: np.ndarray,
        epsilon: float = 1e-12
    ) -> np.ndarray:
    """Softmax over the cosine similarities to every prototype (no scale on the cosine)."""
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    if phi.size == 0:
        raise ValueError("the classifier has no prototypes")
    z, single = _as_batch(z)
    probs = softmax(cosine_logits(z, phi, epsilon), axis=1)
    return probs[0] if single else probs
