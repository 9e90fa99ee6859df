"""Dense matrix primitives: exponential, logarithm, powers, eigen-solvers.

Everything here works on small dense ``numpy`` arrays (n up to about 16).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .config import DEFAULT_TOLERANCES, ToleranceConfig
from .errors import DomainError, NumericError, ShapeError


def as_matrix(A, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    """Convert to a 2-D float or complex array, checking shape and finiteness."""
    A = np.asarray(A)
    if not np.iscomplexobj(A):
        A = A.astype(float)
    if A.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError(f"{name} has non-finite entries")
    return A


def _check_same_square(A, B):
    A = as_matrix(A, square=True, name="A")
    B = as_matrix(B, square=True, name="B")
    if A.shape != B.shape:
        raise ShapeError(f"shape mismatch: {A.shape} vs {B.shape}")
    return A, B


def expm(M) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a degree-13 Pade approximant."""
    M = as_matrix(M, square=True, name="M")
    with np.errstate(over="ignore", invalid="ignore"):
        E = scipy.linalg.expm(M)
    if not np.all(np.isfinite(E)):
        raise NumericError("matrix exponential overflowed")
    return E


def sym_part(A) -> np.ndarray:
    return 0.5 * (A + A.T)


def skew_part(A) -> np.ndarray:
    return 0.5 * (A - A.T)


def spectral_norm(A) -> float:
    """Largest singular value."""
    A = as_matrix(A, name="A")
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def commutator(A, B) -> np.ndarray:
    """``AB - BA``."""
    A, B = _check_same_square(A, B)
    return A @ B - B @ A


@dataclass(frozen=True)
class SymEig:
    """Eigendecomposition ``Pi = Q diag(eigenvalues) Q^T`` of a symmetric matrix.

    Eigenvalues are in nonincreasing order and each eigenvector column has
    its first non-negligible component positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        Q = self.eigenvectors
        return (Q * self.eigenvalues) @ Q.T


def _check_symmetric(P, tol: float, name: str) -> np.ndarray:
    P = as_matrix(P, square=True, name=name)
    if np.iscomplexobj(P):
        raise DomainError(f"{name} must be real")
    scale = max(np.linalg.norm(P, 2), np.finfo(float).tiny)
    if np.linalg.norm(P - P.T, 2) > tol * scale:
        raise DomainError(f"{name} is not symmetric within {tol:g}")
    return sym_part(P)


def stabilize_signs(Q: np.ndarray) -> np.ndarray:
    """Flip columns so that the first component above 1e-12 is positive."""
    Q = Q.copy()
    for j in range(Q.shape[1]):
        col = Q[:, j]
        big = np.flatnonzero(np.abs(col) > 1e-12 * max(1.0, np.abs(col).max()))
        if big.size and col[big[0]] < 0:
            Q[:, j] = -col
    return Q


def sym_eig(P, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> SymEig:
    """Symmetric eigendecomposition with sorted eigenvalues and fixed signs."""
    P = _check_symmetric(P, tol.sym, "Pi")
    w, Q = np.linalg.eigh(P)
    order = np.argsort(w)[::-1]
    return SymEig(eigenvalues=w[order], eigenvectors=stabilize_signs(Q[:, order]))


def logm_principal(P, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
    """Principal logarithm of a symmetric positive definite matrix.

    Raises:
        DomainError: if an eigenvalue is not safely positive.
    """
    eig = sym_eig(P, tol)
    w = eig.eigenvalues
    if w.size and w.min() <= tol.eig * max(abs(w).max(), 1.0):
        raise DomainError(f"logarithm needs a positive definite matrix, min eigenvalue {w.min():g}")
    Q = eig.eigenvectors
    return (Q * np.log(w)) @ Q.T


def mat_power(M, x: float) -> np.ndarray:
    """``x^M = exp(M ln x)`` for ``x > 0``."""
    if not x > 0:
        raise DomainError(f"matrix power needs x > 0, got {x!r}")
    M = as_matrix(M, square=True, name="M")
    return expm(M * np.log(x))


def mat_power_batch(M, xs) -> np.ndarray:
    """Stack of ``x^M`` for every ``x`` in ``xs`` (shape ``(len(xs), n, n)``)."""
    M = as_matrix(M, square=True, name="M")
    xs = np.asarray(xs, dtype=float)
    if np.any(xs <= 0):
        raise DomainError("matrix power needs x > 0")
    with np.errstate(over="ignore", invalid="ignore"):
        E = scipy.linalg.expm(np.log(xs)[:, None, None] * M[None, :, :])
    if not np.all(np.isfinite(E)):
        raise NumericError("matrix exponential overflowed")
    return E


def psd_sqrt(P, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
    """Symmetric positive semidefinite square root."""
    eig = sym_eig(P, tol)
    w = eig.eigenvalues
    scale = max(abs(w).max(), np.finfo(float).tiny) if w.size else 1.0
    if w.size and w.min() < -tol.eig * scale:
        raise DomainError(f"matrix has a negative eigenvalue {w.min():g}")
    Q = eig.eigenvectors
    R = (Q * np.sqrt(np.clip(w, 0.0, None))) @ Q.T
    return sym_part(R)


def is_orthogonal(O, tol: float = 1e-10) -> bool:
    O = np.asarray(O, dtype=float)
    return bool(np.linalg.norm(O @ O.T - np.eye(O.shape[0]), 2) <= tol)


def rotation2(theta: float) -> np.ndarray:
    """Planar rotation by ``theta`` (counter-clockwise)."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def skew_basis(n: int) -> list[np.ndarray]:
    """Frobenius-orthonormal basis ``(e_i e_j^T - e_j e_i^T)/sqrt(2)``, i < j."""
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            E = np.zeros((n, n))
            E[i, j] = 1.0
            E[j, i] = -1.0
            out.append(E / np.sqrt(2.0))
    return out


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix."""
    Z = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * np.sign(np.diag(R))
