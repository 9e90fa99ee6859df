"""Numerical tolerances used across the package.

All thresholds are collected in one frozen record so a caller (or the CLI
``--tol`` flag) can override them consistently.
"""
from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class ToleranceConfig:
    """Relative thresholds for decisions made on floating point data.

    Attributes:
        eig: eigendecomposition residual and orthonormality checks.
        fun: matrix exponential / logarithm residuals.
        sym: symmetry and skew-symmetry checks, and zero tests on ``Pi_I``.
        rank: smallest admissible ratio of eigenvalues of ``Re(AA*)``.
        cluster: eigenvalue clustering gap, relative to ``max(1, |Pi|)``.
        null: singular-value cut separating a nullspace, relative to the
            largest singular value.
        graph: entries below ``graph * |L|`` are structural zeros.
        commute: default tolerance of commutation tests.
        verify: relative tolerance of the spectral-density symmetry check.
    """

    eig: float = 1e-12
    fun: float = 1e-12
    sym: float = 1e-10
    rank: float = 1e-12
    cluster: float = 1e-7
    null: float = 1e-9
    graph: float = 1e-9
    commute: float = 1e-9
    verify: float = 1e-8

    def scaled(self, factor: float) -> "ToleranceConfig":
        """Return a copy whose decision thresholds are multiplied by ``factor``."""
        return replace(
            self,
            cluster=self.cluster * factor,
            null=self.null * factor,
            graph=self.graph * factor,
        )


DEFAULT_TOLERANCES = ToleranceConfig()
