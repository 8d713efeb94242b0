import os
import sys
import logging
from dataclasses import dataclass
from typing import Optional
import numpy as np
import scipy.linalg
from sklearn.utils.extmath import svd_flip
from geodl.constants import rank_rtol, orthonormal_atol


logging.basicConfig(
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
    level=os.environ.get("LOGLEVEL", "INFO").upper(),
    stream=sys.stdout,
)
logger = logging.getLogger(__name__)


class DegenerateSpanError(ValueError):
    """The column span is empty, no subspace can be formed."""


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-d array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


@dataclass(frozen=True, eq=False)
class Subspace:
    """A point on the Grassmann manifold G(n, d), stored as a d x n orthonormal basis.

    `requested_dim` keeps the dimension the caller asked for; when the data
    only supported a smaller rank, `reduced` is True and `subspace_dim` is the
    achieved one.
    """
    basis: np.ndarray
    requested_dim: Optional[int] = None

    def __post_init__(self):
        basis = as_matrix(self.basis, "basis").copy()
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        dd, nn = basis.shape
        if not 0 < nn < dd:
            raise ValueError(f"a Grassmann point needs 0 < n < d, got n={nn}, d={dd}")
        if np.max(np.abs(basis.T @ basis - np.eye(nn))) > orthonormal_atol:
            raise ValueError("basis columns are not orthonormal")
        if self.requested_dim is None:
            object.__setattr__(self, "requested_dim", nn)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def subspace_dim(self) -> int:
        return self.basis.shape[1]

    @property
    def reduced(self) -> bool:
        return self.subspace_dim < self.requested_dim

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def truncate(self, k: int) -> "Subspace":
        """Keep the leading k columns (the dominant directions for PCA bases)."""
        if k >= self.subspace_dim:
            return self
        return Subspace(self.basis[:, :k], requested_dim=self.requested_dim)


def _numerical_rank(s: np.ndarray, shape, scale: float = 0.0) -> int:
    # tolerance relative to `scale` when the data were centred before the SVD
    ref = max(s[0], scale) if s.size else scale
    if ref <= 0:
        return 0
    tol = max(shape) * np.finfo(float).eps * ref
    tol = max(tol, rank_rtol * ref)
    return int(np.sum(s > tol))


def _signed_left_vectors(m: np.ndarray):
    u, s, vt = scipy.linalg.svd(m, full_matrices=False)
    # largest-magnitude entry of every left vector made positive
    u, vt = svd_flip(u, vt, u_based_decision=True)
    return u, s


def orthonormalize(m) -> Subspace:
    """Orthonormal basis of the column span of `m`.

    When the rank is below the column count the basis has rank columns and
    the returned Subspace is flagged as reduced.
    """
    m = as_matrix(m, "m")
    u, s = _signed_left_vectors(m)
    rank = _numerical_rank(s, m.shape)
    if rank == 0:
        raise DegenerateSpanError("degenerate span: the matrix has rank 0")
    if rank < m.shape[1]:
        logger.warning(f"orthonormalize: rank {rank} below the {m.shape[1]} requested columns")
    return Subspace(u[:, :rank], requested_dim=m.shape[1])


def pca_subspace(
        z,
        n: int,
        center: bool = True
    ) -> Subspace:
    r"""Top-n principal directions of a feature matrix.

    Parameters
    ----------
    z : array (d, B)
        One feature vector per column.
    n : int
        Requested subspace dimension.
    center : bool
        Subtract the batch mean before the decomposition.

    Returns
    -------
    Subspace
        Left singular directions with deterministic column sign. If the batch
        supports fewer than n directions (rank deficiency, or n >= d) the
        dimension is reduced to what is achievable and flagged.
    """
    z = as_matrix(z, "z")
    dd, bb = z.shape
    if bb < 2:
        raise ValueError(f"pca_subspace needs at least 2 samples, got {bb}")
    if n < 1:
        raise ValueError(f"subspace dimension must be >= 1, got {n}")
    zc = z - z.mean(axis=1, keepdims=True) if center else z
    u, s = _signed_left_vectors(zc)
    rank = _numerical_rank(s, zc.shape, scale=np.linalg.norm(z, 2))
    if rank == 0:
        raise DegenerateSpanError("degenerate span: achieved rank 0")
    achieved = min(n, rank, dd - 1)
    if achieved < n:
        logger.warning(f"pca_subspace: dimension reduced from {n} to {achieved} "
                       f"(rank {rank}, ambient dimension {dd})")
    return Subspace(u[:, :achieved], requested_dim=n)


def orthogonal_complement(
        p: Subspace
    ) -> np.ndarray:
    """d x (d-n) orthonormal completion R of the basis P, so that [P | R] is orthogonal.

    The standard basis vectors are visited in order; each residual against the
    span built so far is normalised and kept unless it is too short. Every
    residual is projected twice to keep R orthogonal to P at machine precision.
    """
    basis = p.basis
    dd, nn = basis.shape
    # with this bound a long enough residual always exists until R is complete
    min_norm = 0.5 / np.sqrt(dd)
    span = basis.copy()
    columns = []
    for jj in range(dd):
        if len(columns) == dd - nn:
            break
        vec = np.zeros(dd)
        vec[jj] = 1.0
        for _ in range(2):
            vec = vec - span @ (span.T @ vec)
        norm = np.linalg.norm(vec)
        if norm < min_norm:
            continue
        vec = vec / norm
        columns.append(vec)
        span = np.column_stack([span, vec])
    complement = np.column_stack(columns)
    complement.setflags(write=False)
    return complement
