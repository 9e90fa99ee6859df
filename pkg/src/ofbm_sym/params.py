"""Spectral-domain parametrization ``(D, A)`` of an OFBM and the derived families.

The process is ``B(t) = int (e^{itx} - 1)/(ix) (x_+^{-D} A + x_-^{-D} conj(A)) dB(x)``
with ``D = H - I/2``. Everything downstream is phrased through

* ``Re(AA*) = A1 A1^T + A2 A2^T`` and ``Im(AA*) = A2 A1^T - A1 A2^T``,
* ``W = Re(AA*)^{1/2}`` and ``M = W^{-1} D W``,
* ``Pi_x = x^{-M} x^{-M^T}``, its Taylor coefficients ``Pi^(m)`` at ``x = 1``,
  and the skew matrix ``Pi_I = W^{-1} Im(AA*) W^{-1}``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from math import comb
from pathlib import Path

import numpy as np

from .config import DEFAULT_TOLERANCES, ToleranceConfig
from .errors import DomainError, ShapeError, ValidationError
from .matfun import as_matrix, mat_power, mat_power_batch, psd_sqrt, sym_part

# log x of the default sample points: e^{-1}, e plus eight log-symmetric points
DEFAULT_LOG_SAMPLES = (-1.0, 1.0, -0.25, 0.25, -0.5, 0.5, -1.5, 1.5, -2.0, 2.0)


@dataclass(frozen=True)
class SpectralParams:
    """Validated pair ``(D, A)``; ``A`` is stored as a complex array."""

    D: np.ndarray
    A: np.ndarray
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES
    full_rank: bool = True
    in_domain: bool = True

    @property
    def n(self) -> int:
        return self.D.shape[0]

    @property
    def A1(self) -> np.ndarray:
        return self.A.real

    @property
    def A2(self) -> np.ndarray:
        return self.A.imag

    @property
    def re_aa(self) -> np.ndarray:
        return sym_part(self.A1 @ self.A1.T + self.A2 @ self.A2.T)

    @property
    def im_aa(self) -> np.ndarray:
        X = self.A2 @ self.A1.T - self.A1 @ self.A2.T
        return 0.5 * (X - X.T)

    @property
    def aa(self) -> np.ndarray:
        """``AA*`` as a Hermitian complex matrix."""
        return self.re_aa + 1j * self.im_aa

    @property
    def H(self) -> np.ndarray:
        return self.D + 0.5 * np.eye(self.n)

    def conjugated(self, Q) -> "SpectralParams":
        """Parameters of ``Q B(t)`` for invertible ``Q``: ``(Q D Q^{-1}, Q A)``."""
        Q = np.asarray(Q, dtype=float)
        return validate(Q @ self.D @ np.linalg.inv(Q), Q @ self.A, tol=self.tolerances,
                        require_full_rank=self.full_rank)


def validate(D, A, *, require_full_rank: bool = True, require_domain: bool = False,
             tol: ToleranceConfig = DEFAULT_TOLERANCES) -> SpectralParams:
    """Check shapes, rank of ``Re(AA*)`` and optionally the eigenvalue strip of ``D``.

    Raises:
        ShapeError: if ``D`` or ``A`` is not ``n x n``.
        ValidationError: if ``Re(AA*)`` is rank deficient (when required) or an
            eigenvalue of ``D`` has real part outside ``(-1/2, 1/2)`` (when required).
    """
    D = as_matrix(D, square=True, name="D")
    if np.iscomplexobj(D):
        if np.abs(D.imag).max() > 0:
            raise ValidationError("D must be real")
        D = D.real
    A = np.asarray(as_matrix(A, square=True, name="A"), dtype=complex)
    if A.shape != D.shape:
        raise ShapeError(f"D is {D.shape} but A is {A.shape}")
    re = A.real @ A.real.T + A.imag @ A.imag.T
    w = np.linalg.eigvalsh(sym_part(re))
    full_rank = bool(w.max() > 0 and w.min() > tol.rank * w.max())
    if require_full_rank and not full_rank:
        raise ValidationError(f"Re(AA*) is not of full rank: smallest eigenvalue {w.min():.3e}")
    re_d = np.linalg.eigvals(D).real
    in_domain = bool(np.all((re_d > -0.5) & (re_d < 0.5)))
    if require_domain and not in_domain:
        bad = re_d[(re_d <= -0.5) | (re_d >= 0.5)]
        raise ValidationError(f"eigenvalue real parts of D must lie in (-1/2, 1/2); found {bad.tolist()}")
    return SpectralParams(D=D, A=A, tolerances=tol, full_rank=full_rank, in_domain=in_domain)


@dataclass(frozen=True)
class DerivedParams:
    re_aa: np.ndarray
    im_aa: np.ndarray
    W: np.ndarray
    W_inv: np.ndarray
    M: np.ndarray

    @property
    def n(self) -> int:
        return self.M.shape[0]


def derive(p: SpectralParams) -> DerivedParams:
    """Compute ``W = Re(AA*)^{1/2}`` and ``M = W^{-1} D W``."""
    if not p.full_rank:
        raise ValidationError("derived parameters need Re(AA*) of full rank")
    re = p.re_aa
    W = psd_sqrt(re, p.tolerances)
    w, Q = np.linalg.eigh(W)
    if w.min() <= 0:
        raise DomainError("Re(AA*) square root is singular")
    W_inv = sym_part((Q / w) @ Q.T)
    return DerivedParams(re_aa=re, im_aa=p.im_aa, W=W, W_inv=W_inv, M=W_inv @ p.D @ W)


def pi_x(d: DerivedParams, x: float) -> np.ndarray:
    """``Pi_x = G G^T`` with ``G = x^{-M}``; symmetric positive definite by construction."""
    if not x > 0:
        raise DomainError(f"Pi_x needs x > 0, got {x!r}")
    G = mat_power(-d.M, x)
    return G @ G.T


def pi_x_batch(d: DerivedParams, xs) -> np.ndarray:
    G = mat_power_batch(-d.M, xs)
    return G @ np.swapaxes(G, 1, 2)


def pi_m(d: DerivedParams, m: int) -> np.ndarray:
    """``Pi^(m) = sum_k C(m, k) M^k (M^T)^{m-k}``, the m-th derivative of ``Pi_x`` in ``-ln x`` at 1."""
    if int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m!r}")
    m = int(m)
    M = d.M
    powers = [np.eye(d.n)]
    for _ in range(m):
        powers.append(powers[-1] @ M)
    out = sum(comb(m, k) * powers[k] @ powers[m - k].T for k in range(m + 1))
    return sym_part(out)


def pi_m_sequence(d: DerivedParams, m_max: int) -> list[np.ndarray]:
    """``[Pi^(1), ..., Pi^(m_max)]`` through ``Pi^(m+1) = M Pi^(m) + Pi^(m) M^T``."""
    out, Y = [], np.eye(d.n)
    for _ in range(m_max):
        Y = d.M @ Y + Y @ d.M.T
        out.append(sym_part(Y))
    return out


def pi_I(d: DerivedParams, p: SpectralParams | None = None) -> np.ndarray:
    """``Pi_I = W^{-1} Im(AA*) W^{-1}`` (skew-symmetric)."""
    im = d.im_aa if p is None else p.im_aa
    X = d.W_inv @ im @ d.W_inv
    return 0.5 * (X - X.T)


@dataclass(frozen=True)
class PiFamilyConfig:
    """Sampling budget of :func:`build_pi_family`.

    ``sample_points`` and ``m_max`` are the first round; both double each
    round until the span dimension repeats or ``max_rounds`` is reached.
    """

    sample_points: tuple[float, ...] | None = None
    m_max: int | None = None
    max_rounds: int = 4


@dataclass(frozen=True)
class PiFamily:
    sample_points: tuple[float, ...]
    pi_x_values: tuple[np.ndarray, ...]
    pi_m_values: tuple[np.ndarray, ...]
    pi_I: np.ndarray
    span_basis: tuple[np.ndarray, ...]
    span_singular_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ambiguous: bool = False
    warnings: tuple[str, ...] = ()

    @property
    def span_dimension(self) -> int:
        return len(self.span_basis)


def _sym_coords(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    iu = np.triu_indices(n)
    weight = np.where(iu[0] == iu[1], 1.0, np.sqrt(2.0))
    return iu[0], iu[1], weight


def _span(mats, n: int, rel: float):
    """Frobenius-orthonormal basis of the span of symmetric ``mats``."""
    r, c, wt = _sym_coords(n)
    rows = []
    for X in mats:
        nrm = np.linalg.norm(X)
        if nrm > 0 and np.isfinite(nrm):
            rows.append(X[r, c] * wt / nrm)
    if not rows:
        return [], np.zeros(0), False
    _, s, Vt = np.linalg.svd(np.array(rows), full_matrices=False)
    cut = rel * s[0]
    keep = s > cut
    ambiguous = bool(np.any((s > cut / 2) & (s < 2 * cut)))
    basis = []
    for v in Vt[keep]:
        B = np.zeros((n, n))
        B[r, c] = v / wt
        B = B + np.triu(B, 1).T
        basis.append(B)
    return basis, s, ambiguous


def _round_samples(base: tuple[float, ...], q: int) -> tuple[float, ...]:
    if q <= len(base):
        return tuple(base[:q])
    extra = (q - len(base) + 1) // 2
    logs = np.linspace(0.1, 2.4, extra) + 0.0371
    pts = list(base)
    for u in logs:
        pts.extend([float(np.exp(-u)), float(np.exp(u))])
    return tuple(pts[:q])


def build_pi_family(d: DerivedParams, p: SpectralParams | None = None,
                    config: PiFamilyConfig = PiFamilyConfig(),
                    tol: ToleranceConfig | None = None) -> PiFamily:
    """Sample ``Pi_x``, expand ``Pi^(m)`` and extract a rank-revealed spanning basis.

    The span of ``{Pi_x - I} u {Pi^(m)}`` is recomputed with doubled budgets
    until its dimension repeats in two consecutive rounds (or reaches the
    symmetric-matrix dimension ``n(n+1)/2``). Failure to stabilize is
    reported in ``warnings``, never silently ignored.
    """
    if tol is None:
        tol = p.tolerances if p is not None else DEFAULT_TOLERANCES
    n = d.n
    cap = n * (n + 1) // 2
    base = config.sample_points
    if base is None:
        base = tuple(float(np.exp(u)) for u in DEFAULT_LOG_SAMPLES)
    base = tuple(float(x) for x in base)
    if any(not x > 0 or x == 1.0 for x in base):
        raise DomainError("sample points must be positive and different from 1")
    q, m_max = len(base), config.m_max or 2 * cap
    warns = []
    prev_dim = None
    for round_ in range(max(1, config.max_rounds)):
        pts = _round_samples(base, q)
        px = pi_x_batch(d, pts)
        pm = pi_m_sequence(d, m_max)
        basis, s, amb = _span([P - np.eye(n) for P in px] + pm, n, tol.null)
        dim = len(basis)
        if dim == cap or dim == prev_dim:
            break
        prev_dim = dim
        if round_ == config.max_rounds - 1:
            warns.append(f"span dimension did not stabilize after {config.max_rounds} rounds (last {dim})")
            break
        q, m_max = 2 * q, 2 * m_max
    if amb:
        warns.append("span rank is ambiguous: a singular value lies within a factor 2 of the cut")
    return PiFamily(
        sample_points=pts,
        pi_x_values=tuple(px),
        pi_m_values=tuple(pm),
        pi_I=pi_I(d, p),
        span_basis=tuple(basis),
        span_singular_values=s,
        ambiguous=amb,
        warnings=tuple(warns),
    )


# --------------------------------------------------------------------------
# JSON documents


def params_from_dict(doc: dict, *, require_full_rank: bool = True, require_domain: bool = False) -> SpectralParams:
    """Build parameters from ``{"n", "D", "A_re", "A_im"?, "tolerances"?}``."""
    try:
        n = int(doc["n"])
        D = np.array(doc["D"], dtype=float)
        A_re = np.array(doc["A_re"], dtype=float)
        A_im = np.array(doc.get("A_im", np.zeros((n, n))), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad parameter document: {exc}") from exc
    for name, X in (("D", D), ("A_re", A_re), ("A_im", A_im)):
        if X.shape != (n, n):
            raise ValidationError(f"{name} must be {n}x{n}, got shape {X.shape}")
    tol = DEFAULT_TOLERANCES
    if "tolerances" in doc:
        try:
            tol = replace(tol, **{k: float(v) for k, v in doc["tolerances"].items()})
        except TypeError as exc:
            raise ValidationError(f"unknown tolerance field: {exc}") from exc
    return validate(D, A_re + 1j * A_im, tol=tol, require_full_rank=require_full_rank,
                    require_domain=require_domain)


def params_to_dict(p: SpectralParams) -> dict:
    return {
        "n": p.n,
        "D": p.D.tolist(),
        "A_re": p.A.real.tolist(),
        "A_im": p.A.imag.tolist(),
    }


def load_params(path, **kwargs) -> SpectralParams:
    """Read a JSON parameter document. ``OSError`` and ``json.JSONDecodeError`` propagate."""
    with open(Path(path), encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValidationError("parameter document must be a JSON object")
    return params_from_dict(doc, **kwargs)

