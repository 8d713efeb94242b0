from dataclasses import dataclass
import numpy as np
from scipy.integrate import simpson
from geodl.constants import small_angle_threshold
from geodl.geodesic.flow import GeodesicDecomposition


@dataclass(frozen=True, eq=False)
class LambdaTriple:
    lambda1: np.ndarray
    lambda2: np.ndarray
    lambda3: np.ndarray

    def block(self, ii: int) -> np.ndarray:
        return np.array([[self.lambda1[ii], self.lambda2[ii]],
                         [self.lambda2[ii], self.lambda3[ii]]])


@dataclass(frozen=True, eq=False)
class GeodesicKernel:
    """The d x d PSD matrix Q of the integrated inner product along the geodesic."""
    q: np.ndarray
    source: GeodesicDecomposition

    @property
    def ambient_dim(self) -> int:
        return self.q.shape[0]


def lambda_coefficients(omegas) -> LambdaTriple:
    r"""Diagonal blocks of the closed-form kernel.

    lambda1 = 1 + sin(2w)/(2w), lambda2 = (cos(2w) - 1)/(2w),
    lambda3 = 1 - sin(2w)/(2w). Below `small_angle_threshold` the Taylor
    expansions sin(2w)/(2w) ~ 1 - (2w)^2/6 and (cos(2w) - 1)/(2w) ~ -w are used.
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    small = omegas < small_angle_threshold
    # placeholder argument keeps the exact branch free of 0/0
    safe = np.where(small, 1.0, omegas)
    twice = 2.0 * safe
    sinc = np.where(small, 1.0 - (2.0 * omegas) ** 2 / 6.0, np.sin(twice) / twice)
    lambda2 = np.where(small, -omegas, (np.cos(twice) - 1.0) / twice)
    return LambdaTriple(
        lambda1=1.0 + sinc,
        lambda2=lambda2,
        lambda3=1.0 - sinc
    )


def geodesic_kernel(
        dec: GeodesicDecomposition
    ) -> GeodesicKernel:
    r"""Closed-form Q = Delta [[lambda1, lambda2], [lambda2, lambda3]] Delta^T, Delta = [P_old U1 | R U2].

    With the published lambda scale Q equals twice the integral of
    Pi(nu) Pi(nu)^T over [0, 1]; identical subspaces give Q = 2 P P^T.
    """
    lam = lambda_coefficients(dec.omegas)
    head, tail = dec.frame()
    cross = (head * lam.lambda2) @ tail.T
    q = (head * lam.lambda1) @ head.T + cross + cross.T + (tail * lam.lambda3) @ tail.T
    q = 0.5 * (q + q.T)
    q.setflags(write=False)
    return GeodesicKernel(q=q, source=dec)


def kernel_quadrature_oracle(
        dec: GeodesicDecomposition,
        steps: int = 2001
    ) -> np.ndarray:
    """Composite Simpson approximation of the integral of Pi(nu) Pi(nu)^T over [0, 1].

    Independent of the closed form: it only samples the flow itself.
    """
    if steps < 3 or steps % 2 == 0:
        raise ValueError(f"Simpson quadrature needs an odd number of steps >= 3, got {steps}")
    nus = np.linspace(0.0, 1.0, steps)
    head, tail = dec.frame()
    # Pi(nu) for every node at once, shape (steps, d, n)
    flows = head[None] * np.cos(np.outer(nus, dec.omegas))[:, None, :] \
        - tail[None] * np.sin(np.outer(nus, dec.omegas))[:, None, :]
    integrand = np.einsum("kij,klj->kil", flows, flows)
    return simpson(integrand, x=nus, axis=0)
