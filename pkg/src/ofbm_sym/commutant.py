"""Commutation machinery.

Centralizers of symmetric and skew-symmetric matrices inside the orthogonal
group, commutant Lie algebras computed as nullspaces, invariant-subspace
predicates, and a structure validator for centralizers of Jordan matrices.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .config import DEFAULT_TOLERANCES, ToleranceConfig
from .errors import CapacityError, DomainError, ShapeError
from .matfun import as_matrix, random_orthogonal, rotation2, skew_basis, stabilize_signs, sym_eig

MAX_SIGN_DIM = 12


def commutes(A, B, tol: float = DEFAULT_TOLERANCES.commute) -> bool:
    """True iff ``|AB - BA| <= tol * (1 + |A| |B|)`` in the spectral norm."""
    A = as_matrix(A, square=True, name="A")
    B = as_matrix(B, square=True, name="B")
    if A.shape != B.shape:
        raise ShapeError(f"shape mismatch: {A.shape} vs {B.shape}")
    lhs = np.linalg.norm(A @ B - B @ A, 2)
    return bool(lhs <= tol * (1.0 + np.linalg.norm(A, 2) * np.linalg.norm(B, 2)))


# --------------------------------------------------------------------------
# symmetric matrices


@dataclass(frozen=True)
class OrthogonalCentralizer:
    """``G(Pi) = Q diag(O(k_1), ..., O(k_u)) Q^T`` for a symmetric ``Pi``."""

    eigenbasis: np.ndarray
    partition: tuple[int, ...]
    cluster_values: tuple[float, ...]
    warnings: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.eigenbasis.shape[0]

    @property
    def lie_dimension(self) -> int:
        return sum(k * (k - 1) // 2 for k in self.partition)

    @property
    def simple_spectrum(self) -> bool:
        return all(k == 1 for k in self.partition)

    def blocks(self) -> list[np.ndarray]:
        """Columns of the eigenbasis grouped by cluster."""
        out, start = [], 0
        for k in self.partition:
            out.append(self.eigenbasis[:, start:start + k])
            start += k
        return out


def centralizer_structure(Pi, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> OrthogonalCentralizer:
    """Cluster the spectrum of ``Pi`` to describe its orthogonal centralizer.

    Consecutive sorted eigenvalues closer than ``tol.cluster * max(1, |Pi|)``
    are merged. Gaps within a factor of two of that threshold are reported
    in ``warnings`` because the multiplicity decision is then fragile.
    """
    eig = sym_eig(Pi, tol)
    w = eig.eigenvalues
    delta = tol.cluster * max(1.0, float(np.abs(w).max()) if w.size else 1.0)
    partition, values, warnings = [], [], []
    start = 0
    for i in range(1, len(w) + 1):
        if i < len(w):
            gap = w[i - 1] - w[i]
            if delta / 2 < gap <= 2 * delta:
                warnings.append(f"ambiguous eigenvalue gap {gap:.3g} near clustering threshold {delta:.3g}")
            if gap <= delta:
                continue
        partition.append(i - start)
        values.append(float(np.mean(w[start:i])))
        start = i
    return OrthogonalCentralizer(
        eigenbasis=eig.eigenvectors,
        partition=tuple(partition),
        cluster_values=tuple(values),
        warnings=tuple(warnings),
    )


def sign_elements(c: OrthogonalCentralizer) -> list[np.ndarray]:
    """All ``2^n`` matrices ``Q diag(+-1, ..., +-1) Q^T`` for a simple spectrum.

    The first element is ``I`` and the last ``-I``.
    """
    if not c.simple_spectrum:
        raise DomainError(f"sign elements need a simple spectrum, partition is {c.partition}")
    if c.n > MAX_SIGN_DIM:
        raise CapacityError(f"2^{c.n} sign elements exceed the n <= {MAX_SIGN_DIM} limit")
    return frame_sign_elements(c.eigenbasis)


def frame_sign_elements(Q) -> list[np.ndarray]:
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    out = []
    for signs in itertools.product((1.0, -1.0), repeat=n):
        out.append((Q * np.array(signs)) @ Q.T)
    return out


# --------------------------------------------------------------------------
# skew-symmetric matrices


@dataclass(frozen=True)
class SkewCentralizer:
    """Canonical real form ``Q^T Pi_I Q = diag(t_1 J, ..., t_r J, 0_z)``.

    ``J = [[0, 1], [-1, 0]]`` and every ``t_i > 0``.
    """

    basis_change: np.ndarray
    rotation_block_count: int
    zero_block_size: int
    angles: tuple[float, ...] = ()

    @property
    def zero_axes(self) -> np.ndarray:
        """Orthonormal columns spanning the kernel."""
        return self.basis_change[:, 2 * self.rotation_block_count:]


def skew_centralizer_structure(Pi_I, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> SkewCentralizer:
    """Real Schur form of a skew-symmetric matrix, rotation blocks first."""
    P = as_matrix(Pi_I, square=True, name="Pi_I")
    n = P.shape[0]
    scale = float(np.linalg.norm(P, 2))
    if np.linalg.norm(P + P.T, 2) > tol.sym * max(scale, 1.0):
        raise DomainError("Pi_I is not skew-symmetric")
    P = 0.5 * (P - P.T)
    zero_cut = tol.sym * max(1.0, scale)
    if scale <= zero_cut:
        return SkewCentralizer(np.eye(n), 0, n)
    T, Z, sdim = scipy.linalg.schur(P, output="real", sort=lambda re, im: abs(im) > zero_cut)
    r = sdim // 2
    Z = Z.copy()
    angles = []
    for b in range(r):
        i = 2 * b
        if T[i, i + 1] < 0:
            Z[:, i + 1] = -Z[:, i + 1]
        angles.append(abs(float(T[i, i + 1])))
    if r < n:
        K = Z[:, 2 * r:]
        Z[:, 2 * r:] = _canonical_subspace_basis(K)
    return SkewCentralizer(Z, r, n - 2 * r, tuple(angles))


def _canonical_subspace_basis(K: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of ``span(K)``: eigenvectors of the projector."""
    if K.shape[1] == 1:
        return stabilize_signs(K)
    P = K @ K.T
    w, V = np.linalg.eigh(P)
    return stabilize_signs(V[:, np.argsort(w)[::-1][: K.shape[1]]])


# --------------------------------------------------------------------------
# commutant algebras


@dataclass(frozen=True)
class SkewBasis:
    """Frobenius-orthonormal skew-symmetric matrices spanning a Lie algebra."""

    elements: tuple[np.ndarray, ...]
    singular_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ambiguous: bool = False

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def dimension(self) -> int:
        return len(self.elements)


def _commutation_matrix(family, coords) -> np.ndarray:
    """Rows: entries of ``X Pi - Pi X`` for every ``Pi``; columns: basis ``coords``."""
    blocks = []
    for Pi in family:
        nrm = np.linalg.norm(Pi)
        if nrm == 0:
            continue
        Pi = Pi / nrm
        blocks.append(np.stack([(E @ Pi - Pi @ E).ravel() for E in coords], axis=1))
    if not blocks:
        return np.zeros((0, len(coords)))
    return np.vstack(blocks)


def _nullspace(A: np.ndarray, rel: float):
    k = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(k), np.zeros(0), False
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    # family members are normalized, so the map has unit scale unless it is noise
    smax = max(s[0] if s.size else 0.0, 1.0)
    s_full = np.zeros(k)
    s_full[: s.size] = s
    cut = rel * smax
    mask = s_full < cut
    ambiguous = bool(np.any((s_full >= cut / 2) & (s_full <= 2 * cut)))
    return Vt[mask].T, s_full, ambiguous


def _check_family(family) -> list[np.ndarray]:
    family = [as_matrix(P, square=True, name="family member") for P in family]
    if not family:
        raise ShapeError("family must be non-empty")
    n = family[0].shape[0]
    if any(P.shape != (n, n) for P in family):
        raise ShapeError("family members must share one shape")
    return family


def commutant_skew_basis(family, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> SkewBasis:
    """Orthonormal basis of ``{X in so(n) : X Pi = Pi X for all Pi in family}``.

    Each family member is scaled to unit Frobenius norm, the commutation maps
    are stacked over the ``n(n-1)/2`` skew coordinates, and singular values
    below ``tol.null`` times ``max(1, largest)`` define the nullspace.
    """
    family = _check_family(family)
    n = family[0].shape[0]
    coords = skew_basis(n)
    if not coords:
        return SkewBasis(())
    A = _commutation_matrix(family, coords)
    V, s, ambiguous = _nullspace(A, tol.null)
    elements = tuple(sum(v[k] * coords[k] for k in range(len(coords))) for v in V.T)
    return SkewBasis(elements, s, ambiguous)


def commutant_basis(family, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> list[np.ndarray]:
    """Basis of all real matrices commuting with every member of ``family``."""
    family = _check_family(family)
    n = family[0].shape[0]
    coords = []
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n))
            E[i, j] = 1.0
            coords.append(E)
    A = _commutation_matrix(family, coords)
    V, _, _ = _nullspace(A, tol.null)
    return [v.reshape(n, n) for v in V.T]


# --------------------------------------------------------------------------
# invariant subspaces


def _orthonormal_columns(V, n: int, tol: float) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    if V.shape[0] != n:
        raise ShapeError(f"vectors must have length {n}")
    if np.linalg.norm(V.T @ V - np.eye(V.shape[1]), 2) > tol:
        raise DomainError("vectors are not orthonormal")
    return V


def is_invariant_subspace(L, V, tol: float = 1e-9, ortho_tol: float = 1e-8) -> bool:
    """True iff ``span(V)`` (orthonormal columns) is invariant under ``L``."""
    L = as_matrix(L, square=True, name="L")
    n = L.shape[0]
    V = _orthonormal_columns(V, n, ortho_tol)
    P = V @ V.T
    leak = np.linalg.norm((np.eye(n) - P) @ L @ P, 2)
    return bool(leak <= tol * (1.0 + np.linalg.norm(L, 2)))


def _components(adj: np.ndarray) -> list[list[int]]:
    n = adj.shape[0]
    seen = [False] * n
    comps = []
    for root in range(n):
        if seen[root]:
            continue
        seen[root] = True
        comp, queue = [], deque([root])
        while queue:
            i = queue.popleft()
            comp.append(i)
            for j in np.flatnonzero(adj[i]):
                if not seen[j]:
                    seen[j] = True
                    queue.append(j)
        comps.append(sorted(comp))
    return comps


def coupling_components(L, basis, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> list[list[int]]:
    """Connected components of the graph linking basis vectors ``i, j`` with ``|o_i^T L o_j|`` large."""
    L = as_matrix(L, square=True, name="L")
    O = np.asarray(basis, dtype=float)
    T = O.T @ L @ O
    adj = np.abs(T) > tol.graph * np.linalg.norm(L, 2)
    np.fill_diagonal(adj, False)
    adj = adj | adj.T
    return _components(adj)


def in_L_invar(L, basis, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    """Does some proper nonempty subset of the basis columns span an ``L``-invariant subspace?

    For skew ``L`` this happens exactly when ``O^T L O`` is block diagonal
    after a permutation, i.e. when the coupling graph is disconnected.
    """
    n = np.asarray(basis).shape[0]
    if n < 2:
        return False
    return len(coupling_components(L, basis, tol)) > 1


def in_L_invar_enumerate(L, basis, tol: float = 1e-9) -> bool:
    """Brute-force version of :func:`in_L_invar` over all ``2^n - 2`` proper subsets."""
    O = np.asarray(basis, dtype=float)
    n = O.shape[0]
    for k in range(1, n):
        for subset in itertools.combinations(range(n), k):
            if is_invariant_subspace(L, O[:, list(subset)], tol):
                return True
    return False


# --------------------------------------------------------------------------
# scalar-matrix criterion


def _sign_generators(n: int) -> list[np.ndarray]:
    gens = []
    if n % 2:
        for i in range(n):
            d = -np.ones(n)
            d[i] = 1.0
            gens.append(np.diag(d))
    else:
        for i in range(n - 1):
            d = -np.ones(n)
            d[i] = d[i + 1] = 1.0
            gens.append(np.diag(d))
    return gens


def centralizes_rotation_group(Gamma, trials: int = 20, tol: float = 1e-9, seed: int = 0) -> bool:
    """Numerical test of ``C(Gamma) >= SO(n)`` (``O(2)`` when ``n = 2``).

    ``Gamma`` is tested against the diagonal sign rotations (a single ``+1``
    for odd ``n``, a sliding ``(+1, +1)`` window for even ``n``) conjugated by
    the identity and ``trials`` random orthogonal matrices. For ``n = 2``
    the family is a reflection and a generic rotation, conjugated likewise.
    """
    Gamma = as_matrix(Gamma, square=True, name="Gamma")
    n = Gamma.shape[0]
    if n < 2:
        raise ShapeError("need n >= 2")
    rng = np.random.default_rng(seed)
    if n == 2:
        base = [np.diag([1.0, -1.0]), rotation2(1.0)]
    else:
        base = _sign_generators(n)
    conj = [np.eye(n)] + [random_orthogonal(n, rng) for _ in range(trials)]
    for Q in conj:
        for G in base:
            if not commutes(Gamma, Q @ G @ Q.T, tol):
                return False
    return True


# --------------------------------------------------------------------------
# Jordan-form centralizers (structure validation only)


def jordan_matrix(blocks) -> np.ndarray:
    """Lower Jordan matrix ``diag(lam_a I + N_a)`` with ones on the subdiagonal."""
    blocks = [(complex(lam), int(p)) for lam, p in blocks]
    n = sum(p for _, p in blocks)
    Jm = np.zeros((n, n), dtype=complex)
    start = 0
    for lam, p in blocks:
        for i in range(p):
            Jm[start + i, start + i] = lam
            if i:
                Jm[start + i, start + i - 1] = 1.0
        start += p
    if np.all(Jm.imag == 0):
        Jm = Jm.real
    return Jm


def _toeplitz_block(pa: int, pb: int, k: int) -> np.ndarray:
    """Basis matrix ``k`` of the regular lower triangular ``pa x pb`` block."""
    X = np.zeros((pa, pb))
    m = min(pa, pb)
    # (T, 0) when pa <= pb, (0; T) otherwise; k indexes the diagonal of T
    r0 = pa - m
    for i in range(k, m):
        X[r0 + i, i - k] = 1.0
    return X


def jordan_centralizer_basis(blocks, eig_tol: float = 0.0) -> list[np.ndarray]:
    """Basis of the centralizer of :func:`jordan_matrix` from the block pattern."""
    blocks = [(complex(lam), int(p)) for lam, p in blocks]
    sizes = [p for _, p in blocks]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    n = offsets[-1]
    out = []
    for a, (la, pa) in enumerate(blocks):
        for b, (lb, pb) in enumerate(blocks):
            if abs(la - lb) > eig_tol:
                continue
            for k in range(min(pa, pb)):
                X = np.zeros((n, n))
                X[offsets[a]:offsets[a + 1], offsets[b]:offsets[b + 1]] = _toeplitz_block(pa, pb, k)
                out.append(X)
    return out


def validate_jordan_centralizer(blocks, X, tol: float = 1e-10) -> bool:
    """True iff ``X`` has the block pattern required to commute with the Jordan matrix."""
    basis = jordan_centralizer_basis(blocks)
    X = np.asarray(X)
    if not basis:
        return bool(np.linalg.norm(X) <= tol)
    B = np.stack([E.ravel() for E in basis], axis=1)
    coef, *_ = np.linalg.lstsq(B, X.ravel(), rcond=None)
    return bool(np.linalg.norm(B @ coef - X.ravel()) <= tol * max(1.0, np.linalg.norm(X)))
