from dataclasses import dataclass
import numpy as np
import scipy.linalg
from sklearn.utils.extmath import svd_flip
from geodl.constants import sigma_threshold
from geodl.geodesic.subspace import Subspace, orthogonal_complement


@dataclass(frozen=True, eq=False)
class GeodesicDecomposition:
    r"""CS-decomposition artifacts joining two points of G(n, d).

    P_old^T P_new = U1 \Gamma(1) V^T and R^T P_new = -U2 \Sigma(1) V^T, with
    \Gamma = diag(cos omega), \Sigma = diag(sin omega) and the angles omega
    nondecreasing in [0, pi/2].
    """
    p_old: Subspace
    p_new: Subspace
    complement: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    v: np.ndarray
    omegas: np.ndarray

    @property
    def gammas(self) -> np.ndarray:
        return np.cos(self.omegas)

    @property
    def sigmas(self) -> np.ndarray:
        return np.sin(self.omegas)

    @property
    def ambient_dim(self) -> int:
        return self.p_old.ambient_dim

    @property
    def subspace_dim(self) -> int:
        return self.p_old.subspace_dim

    def frame(self):
        """The two halves of Delta = [P_old U1 | R U2]."""
        return self.p_old.basis @ self.u1, self.complement @ self.u2


def _freeze(*arrays):
    for arr in arrays:
        arr.setflags(write=False)


def cs_decompose(
        p_old: Subspace,
        p_new: Subspace
    ) -> GeodesicDecomposition:
    r"""Decompose the pair (P_old, P_new) to generate the geodesic flow.

    The SVD of A = P_old^T P_new gives U1, \Gamma(1), V; the angles are
    omega_i = arccos(gamma_i) with gamma clamped to [-1, 1]. U2 is recovered
    column-wise from B = R^T P_new V as -B_i / sigma_i. Columns whose sigma_i
    (or |B_i|) falls below `sigma_threshold` and their angles are set to zero; this covers
    identical directions and the 2n - d angles forced to zero when n > d/2.

    Sign convention: the largest-magnitude entry of every nonzero U2 column
    is positive, the V column (and, when gamma_i > 0, the U1 column) follows;
    columns with a zero U2 keep the U1 convention.
    """
    if p_old.ambient_dim != p_new.ambient_dim or p_old.subspace_dim != p_new.subspace_dim:
        raise ValueError(
            "dimension mismatch: "
            f"G({p_old.subspace_dim}, {p_old.ambient_dim}) vs G({p_new.subspace_dim}, {p_new.ambient_dim})")
    complement = orthogonal_complement(p_old)
    a = p_old.basis.T @ p_new.basis
    u1, gammas, vt = scipy.linalg.svd(a)
    u1, vt = svd_flip(u1, vt, u_based_decision=True)
    v = vt.T.copy()

    gammas = np.clip(gammas, -1.0, 1.0)
    negative = gammas < 0
    if np.any(negative):
        u1[:, negative] *= -1.0
        gammas[negative] *= -1.0
    omegas = np.arccos(gammas)
    sigmas = np.sin(omegas)

    b = complement.T @ p_new.basis @ v
    live = (sigmas >= sigma_threshold) & (np.linalg.norm(b, axis=0) >= sigma_threshold)
    u2 = np.zeros_like(b)
    u2[:, live] = -b[:, live] / sigmas[live]
    omegas[~live] = 0.0

    for ii in np.flatnonzero(live):
        col = u2[:, ii]
        if col[np.argmax(np.abs(col))] < 0:
            u2[:, ii] *= -1.0
            v[:, ii] *= -1.0
            if gammas[ii] > 0:
                u1[:, ii] *= -1.0

    _freeze(u1, u2, v, omegas)
    return GeodesicDecomposition(
        p_old=p_old,
        p_new=p_new,
        complement=complement,
        u1=u1,
        u2=u2,
        v=v,
        omegas=omegas
    )


def geodesic_point(
        dec: GeodesicDecomposition,
        nu: float
    ) -> np.ndarray:
    r"""Point Pi(nu) of the geodesic flow, a d x n orthonormal basis.

    Pi(nu) = [P_old | R] [U1 \Gamma(nu); -U2 \Sigma(nu)]; Pi(0) spans P_old
    and Pi(1) = P_new V spans P_new.
    """
    nu = float(nu)
    if not 0.0 <= nu <= 1.0:
        raise ValueError(f"nu must lie in [0, 1], got {nu}")
    head, tail = dec.frame()
    return head * np.cos(nu * dec.omegas) - tail * np.sin(nu * dec.omegas)
