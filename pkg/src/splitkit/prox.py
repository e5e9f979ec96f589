"""Proximal kernels and the SVD they rest on."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "SvdFactors",
    "svd",
    "singular_values",
    "prox_l1",
    "prox_nuclear",
    "prox_conjugate",
]


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``M = U diag(s) V^T`` with ``s`` sorted nonincreasing."""

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.singular_values) @ self.V.T


def _fix_signs(U, V):
    # largest-magnitude entry of every U column made nonnegative
    if U.size == 0:
        return U, V
    idx = np.argmax(np.abs(U), axis=0)
    flip = U[idx, np.arange(U.shape[1])] < 0
    U = U.copy()
    V = V.copy()
    U[:, flip] *= -1.0
    V[:, flip] *= -1.0
    return U, V


def _orth_complete(Q, ncols):
    """Extend orthonormal columns ``Q`` to ``ncols`` orthonormal columns."""
    rows, k = Q.shape
    if k >= ncols:
        return Q
    basis, _ = np.linalg.qr(np.hstack([Q, np.eye(rows)]))
    return np.hstack([Q, basis[:, k:ncols]])


def _jacobi(M, tol, max_sweeps):
    """One-sided (Hestenes) Jacobi on a tall matrix, cyclic pair order."""
    A = M.copy()
    rows, cols = A.shape
    V = np.eye(cols)
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(cols - 1):
            for j in range(i + 1, cols):
                ai = A[:, i]
                aj = A[:, j]
                a = ai @ ai
                b = aj @ aj
                g = ai @ aj
                if g == 0.0 or a == 0.0 or b == 0.0:
                    continue
                cosine = abs(g) / math.sqrt(a * b)
                off = max(off, cosine)
                if cosine <= tol:
                    continue
                zeta = (b - a) / (2.0 * g)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                new_i = c * ai - s * aj
                A[:, j] = s * ai + c * aj
                A[:, i] = new_i
                vi = V[:, i].copy()
                V[:, i] = c * vi - s * V[:, j]
                V[:, j] = s * vi + c * V[:, j]
        if off <= tol:
            break
    sigma = np.linalg.norm(A, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    A = A[:, order]
    V = V[:, order]
    floor = (sigma[0] if sigma.size else 0.0) * max(rows, cols) * np.finfo(float).eps
    good = sigma > floor
    U = A[:, good] / sigma[good]
    U = _orth_complete(U, cols)
    sigma = np.where(good, sigma, 0.0)
    return U, sigma, V


def svd(M, method: str = "lapack", tol: float = 1e-12, max_sweeps: int = 60) -> SvdFactors:
    """Thin SVD with ``r = min(m, n)`` factors.

    ``method="lapack"`` uses the LAPACK divide-and-conquer driver;
    ``method="jacobi"`` runs one-sided Jacobi with a deterministic cyclic
    sweep order (slow, for small matrices and cross-checks). Column signs are
    normalized so the largest-magnitude entry of each left singular vector
    is nonnegative.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise DomainError("svd expects a 2-D array")
    if not np.all(np.isfinite(M)):
        raise DomainError("svd input has non-finite entries")
    if method == "lapack":
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
        V = Vt.T
    elif method == "jacobi":
        if M.shape[0] >= M.shape[1]:
            U, s, V = _jacobi(M, tol, max_sweeps)
        else:
            V, s, U = _jacobi(M.T, tol, max_sweeps)
    else:
        raise ValueError(f"unknown svd method {method!r}")
    U, V = _fix_signs(U, V)
    return SvdFactors(U, s, V)


def singular_values(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise DomainError("input has non-finite entries")
    return np.linalg.svd(M, compute_uv=False)


def prox_l1(M, c: float) -> np.ndarray:
    """Entrywise soft threshold, the prox of ``c ||.||_1``."""
    if c < 0:
        raise ParameterError(f"threshold must be nonnegative, got {c}")
    M = np.asarray(M, dtype=float)
    return np.sign(M) * np.maximum(np.abs(M) - c, 0.0)


def prox_nuclear(M, c: float) -> np.ndarray:
    """Singular value soft threshold, the prox of ``c ||.||_*``."""
    if c < 0:
        raise ParameterError(f"threshold must be nonnegative, got {c}")
    f = svd(M)
    s = np.maximum(f.singular_values - c, 0.0)
    return (f.U * s) @ f.V.T


def prox_conjugate(f, v, t: float) -> np.ndarray:
    """Prox of ``t f*`` at ``v`` through the Moreau identity.

    ``prox_{t f*}(v) = v - t prox_{f/t}(v / t)``.
    """
    if not t > 0:
        raise ParameterError(f"step must be positive, got {t}")
    v = np.asarray(v, dtype=float)
    return v - t * f.prox(v / t, 1.0 / t)
