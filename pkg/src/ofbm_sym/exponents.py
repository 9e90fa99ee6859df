"""Exponent sets ``E(B_H) = H + T(G_H)`` and commuting exponents."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matfun import mat_power_batch
from .params import SpectralParams
from .symmetry import SymmetryClassification, default_sample_points

DEFAULT_T_GRID = (-1.0, -0.5, 0.5, 1.0)


@dataclass(frozen=True)
class ExponentSet:
    base_exponent: np.ndarray
    tangent_basis: tuple[np.ndarray, ...]

    @property
    def unique(self) -> bool:
        return len(self.tangent_basis) == 0

    @property
    def dimension(self) -> int:
        return len(self.tangent_basis)

    def member(self, coefficients) -> np.ndarray:
        """``H + sum_i c_i Delta_i``."""
        coefficients = np.atleast_1d(np.asarray(coefficients, dtype=float))
        if coefficients.size != self.dimension:
            raise ValueError(f"need {self.dimension} coefficients")
        out = self.base_exponent.copy()
        for c, T in zip(coefficients, self.tangent_basis):
            out = out + c * T
        return out


@dataclass(frozen=True)
class CommutingExponent:
    H0: np.ndarray
    residual: float
    flagged: bool = False


def tangent_space(c: SymmetryClassification) -> list[np.ndarray]:
    """``W L W^{-1}`` for every orthogonal-side generator ``L`` of the group's Lie algebra."""
    return c.tangent_generators()


def exponent_set(p: SpectralParams, c: SymmetryClassification) -> ExponentSet:
    return ExponentSet(base_exponent=p.H, tangent_basis=tuple(tangent_space(c)))


def _generators(c: SymmetryClassification) -> list[np.ndarray]:
    return c.group_elements() + c.tangent_generators()


def commuting_exponent(p: SpectralParams, c: SymmetryClassification, tol: float = 1e-8) -> CommutingExponent:
    """Least-squares ``H0 = H + Delta``, ``Delta`` in the tangent space, minimizing ``sum_C |[H0, C]|_F^2``.

    ``C`` runs over the reported finite elements and tangent generators
    (both conjugated back by ``W``). The residual is the square root of the
    minimized sum; it is flagged when it exceeds ``tol * (1 + |H0|)``.
    """
    H = p.H
    gens = _generators(c)
    tangent = tangent_space(c)
    if tangent:
        # vec([Delta, C]) is linear in the coefficients of Delta
        cols = np.stack([np.concatenate([(T @ C - C @ T).ravel() for C in gens]) for T in tangent], axis=1)
        rhs = -np.concatenate([(H @ C - C @ H).ravel() for C in gens])
        coef, *_ = np.linalg.lstsq(cols, rhs, rcond=None)
        H0 = H + sum(a * T for a, T in zip(coef, tangent))
    else:
        H0 = H.copy()
    residual = float(np.sqrt(sum(np.linalg.norm(H0 @ C - C @ H0) ** 2 for C in gens)))
    return CommutingExponent(H0=H0, residual=residual,
                             flagged=bool(residual > tol * (1.0 + np.linalg.norm(H0, 2))))


def rotational_commuting_form(h: complex) -> np.ndarray:
    """``U2 diag(h, conj h) U2*`` with ``U2 = [[1, 1], [i, -i]] / sqrt 2``: equals ``Re h I + Im h J``.

    Here ``J = [[0, 1], [-1, 0]]``; the 2x2 real matrices commuting with ``SO(2)``
    are exactly of this form.
    """
    U2 = np.array([[1.0, 1.0], [1j, -1j]]) / np.sqrt(2.0)
    X = U2 @ np.diag([h, np.conj(h)]) @ U2.conj().T
    return X.real


def density_invariance_check(p: SpectralParams, c: SymmetryClassification,
                             t_grid=DEFAULT_T_GRID, sample_points=None) -> float:
    """Largest relative change of ``x^{-D} AA* x^{-D^T}`` when ``D`` moves along the tangent space.

    A value near zero shows that the same ``A`` parametrizes the process for
    every exponent ``H + t Delta``.
    """
    tangent = tangent_space(c)
    if not tangent:
        return 0.0
    xs = np.asarray(default_sample_points() if sample_points is None else sample_points, dtype=float)
    AA = p.aa
    E = mat_power_batch(-p.D, xs)
    ref = E @ AA[None] @ np.swapaxes(E, 1, 2)
    scale = np.linalg.norm(ref, axis=(1, 2))
    worst = 0.0
    for T in tangent:
        for t in t_grid:
            Et = mat_power_batch(-(p.D + t * T), xs)
            g = Et @ AA[None] @ np.swapaxes(Et, 1, 2)
            worst = max(worst, float(np.max(np.linalg.norm(g - ref, axis=(1, 2)) / scale)))
    return worst


def report(p: SpectralParams, c: SymmetryClassification) -> dict:
    es = exponent_set(p, c)
    h0 = commuting_exponent(p, c)
    return {
        "H": es.base_exponent.tolist(),
        "tangent_basis": [T.tolist() for T in es.tangent_basis],
        "unique": es.unique,
        "H0": h0.H0.tolist(),
        "H0_residual": h0.residual,
    }

