"""Normalized matrix Q = D_X^{-1/2} P D_Y^{-1/2}, its SVD, maximal correlation,
and the normalized Laplacian of the bipartite support graph.

The maximal correlation is stored as the second singular value sigma_2 of Q.
The literature writes the same quantity both as rho_m and as rho_m^2; every
identity below is phrased in terms of sigma_2, and the squared reading is
reported alongside so the two conventions can be compared. Singular values are
kept in descending order (sigma_1 = 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dist import JointDistribution

ONE_TOL = 1e-8


class SpectralError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class SpectralSummary:
    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray
    maximal_correlation: float
    multiplicity_of_one: int
    laplacian_eigenvalues: np.ndarray


def build_q_matrix(J: JointDistribution) -> np.ndarray:
    sx = np.sqrt(J.p_x)
    sy = np.sqrt(J.p_y)
    return J.p / sx[:, None] / sy[None, :]


def bipartite_adjacency(J: JointDistribution) -> np.ndarray:
    nx, ny = J.shape
    a = np.zeros((nx + ny, nx + ny))
    a[:nx, nx:] = J.p
    a[nx:, :nx] = J.p.T
    return a


def normalized_adjacency(J: JointDistribution) -> np.ndarray:
    """D^{-1/2} A D^{-1/2}, built from A directly (not from Q)."""
    a = bipartite_adjacency(J)
    d = a.sum(axis=1)
    s = 1.0 / np.sqrt(d)
    return a * s[:, None] * s[None, :]


def normalized_laplacian(J: JointDistribution) -> np.ndarray:
    m = normalized_adjacency(J)
    return np.eye(m.shape[0]) - m


def _svd(m: np.ndarray):
    try:
        return np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"SVD did not converge: {exc}") from exc


def _eigvalsh(m: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(m)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigendecomposition did not converge: {exc}") from exc


def spectral_summary(J: JointDistribution, one_tol: float = ONE_TOL) -> SpectralSummary:
    u, s, vt = _svd(build_q_matrix(J))
    sigma2 = float(s[1]) if s.size > 1 else 0.0
    lap = _eigvalsh(normalized_laplacian(J))
    return SpectralSummary(
        singular_values=s,
        left_vectors=u,
        right_vectors=vt.T,
        maximal_correlation=sigma2,
        multiplicity_of_one=int(np.sum(np.abs(s - 1.0) <= one_tol)),
        laplacian_eigenvalues=lap,
    )


def second_singular_pair(J: JointDistribution) -> tuple[float, np.ndarray, np.ndarray, float]:
    """(sigma_2, u, v, sigma_3) with u, v orthogonal to sqrt(p_X), sqrt(p_Y).

    The trivial pair is removed before the SVD so that, when 1 is a repeated
    singular value, the returned vectors still separate components instead
    of being an arbitrary rotation that may contain the constant direction.
    """
    sx, sy = np.sqrt(J.p_x), np.sqrt(J.p_y)
    deflated = build_q_matrix(J) - np.outer(sx, sy)
    u, s, vt = _svd(deflated)
    s3 = float(s[1]) if s.size > 1 else 0.0
    return float(s[0]), u[:, 0], vt[0], s3


def verify_laplacian_identity(J: JointDistribution, tol: float = 1e-8) -> dict:
    """Check nu = 1 - sigma_2 for the second smallest Laplacian eigenvalue nu.

    The identity needs at least three nodes; a single edge has Laplacian
    spectrum {0, 2} and is reported as failing.
    """
    summ = spectral_summary(J)
    lap = summ.laplacian_eigenvalues
    nu = float(lap[1])
    sigma2 = summ.maximal_correlation
    residual = abs(nu - (1.0 - sigma2))
    return {
        "nu": nu,
        "sigma2": sigma2,
        "residual": residual,
        "residual_squared_reading": abs(nu - (1.0 - sigma2**2)),
        "pass": bool(residual <= tol),
    }


def proof_identity_check(J: JointDistribution, tol: float = 1e-8) -> bool:
    """Eigenvalues of D^{-1/2} A D^{-1/2} are {+-sigma_i} padded with zeros."""
    s = _svd(build_q_matrix(J))[1]
    pad = np.zeros(abs(J.n_x - J.n_y))
    expected = np.sort(np.concatenate([s, -s, pad]))
    eig = np.sort(_eigvalsh(normalized_adjacency(J)))
    return bool(expected.shape == eig.shape and np.max(np.abs(expected - eig)) <= tol)
