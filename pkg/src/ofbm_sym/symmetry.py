"""Symmetry groups ``G_H = {C : C B(t) =d B(t)}`` of an OFBM.

All decisions are taken on the ``W``-conjugated problem, where

    G_H = W ( cap_x G(Pi_x) cap G(Pi_I) ) W^{-1}

is a closed subgroup of ``O(n)``. Group elements and Lie algebra generators
are reported on this orthogonal side; :meth:`SymmetryClassification.group_elements`
maps them back. Every finite element is checked against the defining
relation ``C g(x) C^T = g(x)``, ``g(x) = x^{-D} AA* x^{-D^T}``, before it is
reported.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .commutant import (
    OrthogonalCentralizer,
    SkewBasis,
    centralizer_structure,
    commutant_skew_basis,
    commutes,
    frame_sign_elements,
    in_L_invar,
    skew_centralizer_structure,
)
from .config import DEFAULT_TOLERANCES, ToleranceConfig
from .errors import ShapeError
from .matfun import J2, is_orthogonal, mat_power_batch, stabilize_signs, sym_eig
from .params import (
    DEFAULT_LOG_SAMPLES,
    DerivedParams,
    PiFamily,
    SpectralParams,
    build_pi_family,
    derive,
)

TYPES_2 = ("Minimal", "Trivial", "Rotational", "Maximal")
TYPES_3 = ("T3a", "T3b", "T3c", "T3d", "T3e", "T3f")
MINIMAL_TYPES = ("Minimal", "T3a")
MAXIMAL_TYPES = ("Maximal", "T3e")


@dataclass(frozen=True)
class SymmetryClassification:
    """Classified symmetry group.

    ``finite_elements``, ``lie_basis`` and ``axes`` live on the orthogonal
    side; the group itself is ``W <finite_elements, exp(lie_basis)> W^{-1}``.
    """

    group_type: str
    n: int
    conjugacy_W: np.ndarray
    lie_dimension: int
    lie_basis: tuple[np.ndarray, ...] = ()
    finite_elements: tuple[np.ndarray, ...] = ()
    axes: tuple[np.ndarray, ...] = ()
    diagnostics: tuple[str, ...] = ()
    ambiguous: bool = False
    dual_report: dict | None = None

    @property
    def W_inv(self) -> np.ndarray:
        return np.linalg.inv(self.conjugacy_W)

    @property
    def is_finite(self) -> bool:
        return self.lie_dimension == 0

    def group_elements(self) -> list[np.ndarray]:
        """Finite elements conjugated back: ``W O W^{-1}``."""
        W, Wi = self.conjugacy_W, self.W_inv
        return [W @ O @ Wi for O in self.finite_elements]

    def tangent_generators(self) -> list[np.ndarray]:
        W, Wi = self.conjugacy_W, self.W_inv
        return [W @ L @ Wi for L in self.lie_basis]

    def to_dict(self) -> dict:
        return {
            "group_type": self.group_type,
            "lie_dimension": int(self.lie_dimension),
            "axes": [np.asarray(a).tolist() for a in self.axes],
            "finite_elements": [O.tolist() for O in self.finite_elements],
            "conjugacy_W": self.conjugacy_W.tolist(),
            "diagnostics": list(self.diagnostics),
            "dual_report": self.dual_report,
        }


# --------------------------------------------------------------------------
# defining relation


def default_sample_points() -> tuple[float, ...]:
    return tuple(float(np.exp(u)) for u in DEFAULT_LOG_SAMPLES)


class DensityStack:
    """``g(x) = x^{-D} AA* x^{-D^T}`` on a fixed set of positive frequencies."""

    def __init__(self, p: SpectralParams, sample_points=None):
        xs = list(default_sample_points() if sample_points is None else sample_points)
        if 1.0 not in xs:
            xs.append(1.0)
        self.xs = np.asarray(xs, dtype=float)
        E = mat_power_batch(-p.D, self.xs)
        self.g = E @ p.aa[None] @ np.swapaxes(E, 1, 2)
        self.norms = np.linalg.norm(self.g, axis=(1, 2))

    def residual(self, C) -> float:
        """``max_x |g(x) - C g(x) C^T| / |g(x)|``."""
        C = np.asarray(C, dtype=float)
        diff = self.g - C[None] @ self.g @ C.T[None]
        return float(np.max(np.linalg.norm(diff, axis=(1, 2)) / self.norms))


def is_symmetry_element(C, p: SpectralParams, d: DerivedParams | None = None,
                        tol: float | None = None, sample_points=None,
                        stack: DensityStack | None = None) -> bool:
    """Does ``C`` preserve the spectral density at every sampled ``x`` (and ``x = 1``)?

    Real and imaginary parts of ``AA*`` are both compared. ``d`` is accepted
    for signature symmetry with the other checks and is not needed.
    """
    C = np.asarray(C, dtype=float)
    if C.shape != (p.n, p.n):
        raise ShapeError(f"C must be {p.n}x{p.n}")
    if tol is None:
        tol = p.tolerances.verify
    if stack is None:
        stack = DensityStack(p, sample_points)
    return stack.residual(C) <= tol


# --------------------------------------------------------------------------
# sufficient tests


@dataclass(frozen=True)
class MaximalResult:
    is_maximal: bool
    d_value: float | None
    residual: float
    im_norm: float


def maximal_test(p: SpectralParams, d: DerivedParams | None = None, tol: float = 1e-9) -> MaximalResult:
    """Maximal type iff ``Im(AA*) = 0`` and ``D R + R D^T = 2 d R`` for a real ``d`` (``R = Re(AA*)``).

    ``d`` is the least-squares fit ``<DR + RD^T, R> / (2 |R|^2)``.
    """
    R, D = p.re_aa, p.D
    rn = np.linalg.norm(R)
    im_norm = float(np.linalg.norm(p.im_aa))
    L = D @ R + R @ D.T
    dv = float(np.sum(L * R) / (2.0 * rn**2))
    residual = float(np.linalg.norm(L - 2.0 * dv * R))
    ok = im_norm <= tol * rn and residual <= tol * rn * (1.0 + np.linalg.norm(D, 2))
    return MaximalResult(bool(ok), dv if ok else None, residual, im_norm)


@dataclass(frozen=True)
class MinimalResult:
    in_M: bool
    S_gap: float
    L_block_connected: bool


def minimal_test(d: DerivedParams, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> MinimalResult:
    """Certificate for the minimal type ``G_H = {I, -I}``.

    With ``M = S + L`` split into symmetric and skew parts, the group is
    minimal whenever ``S`` has pairwise distinct eigenvalues and no proper
    subset of its eigenvectors spans an ``L``-invariant subspace. A negative
    answer is inconclusive.
    """
    M = d.M
    S, L = 0.5 * (M + M.T), 0.5 * (M - M.T)
    eig = sym_eig(S, tol)
    w = eig.eigenvalues
    gap = float(np.min(w[:-1] - w[1:])) if w.size > 1 else float("inf")
    delta = tol.cluster * max(1.0, float(np.abs(w).max()))
    connected = not in_L_invar(L, eig.eigenvectors, tol)
    return MinimalResult(bool(gap > delta and connected), gap, bool(connected))


# --------------------------------------------------------------------------
# classification helpers


def rot_pi(p) -> np.ndarray:
    """Rotation by ``pi`` about the unit axis ``p``: ``2 p p^T - I``."""
    p = _unit(p)
    return 2.0 * np.outer(p, p) - np.eye(p.size)


def ref0(p) -> np.ndarray:
    """Reflection through the hyperplane orthogonal to ``p``: ``I - 2 p p^T``."""
    p = _unit(p)
    return np.eye(p.size) - 2.0 * np.outer(p, p)


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def complete_frame(p) -> np.ndarray:
    """Deterministic orthonormal frame whose last column is ``p``."""
    p = _unit(p)
    n = p.size
    P = np.eye(n) - np.outer(p, p)
    w, V = np.linalg.eigh(P)
    comp = stabilize_signs(V[:, np.argsort(w)[::-1][: n - 1]])
    return np.column_stack([comp, p])


def skew_axis3(L) -> np.ndarray:
    """Kernel of ``[[0, a, b], [-a, 0, c], [-b, -c, 0]]``, i.e. ``(c, -b, a)`` normalized."""
    L = np.asarray(L, dtype=float)
    v = np.array([L[1, 2], -L[0, 2], L[0, 1]])
    return stabilize_signs(_unit(v)[:, None])[:, 0]


def _dedupe(mats, tol: float = 1e-8) -> list[np.ndarray]:
    out = []
    for X in mats:
        if not any(np.linalg.norm(X - Y) <= tol for Y in out):
            out.append(X)
    return out


class _Context:
    """Everything the classifiers share for one parameter set."""

    def __init__(self, p: SpectralParams, d: DerivedParams, fam: PiFamily, tol: ToleranceConfig):
        self.p, self.d, self.fam, self.tol = p, d, fam, tol
        self.n = p.n
        self.pi_I = fam.pi_I
        self.im_zero = bool(np.linalg.norm(self.pi_I) <= tol.sym)
        self.family = list(fam.span_basis) + ([] if self.im_zero else [self.pi_I])
        if not self.family:
            self.family = [np.eye(self.n)]
        self.lie: SkewBasis = commutant_skew_basis(self.family, tol)
        self.stack = DensityStack(p, fam.sample_points)
        self.diagnostics: list[str] = list(fam.warnings)
        self.ambiguous = bool(fam.ambiguous or self.lie.ambiguous)
        if self.lie.ambiguous:
            self.diagnostics.append("commutant singular value within a factor 2 of the nullspace cut")
        self.structures: list[OrthogonalCentralizer] = []
        for P in fam.pi_x_values:
            c = centralizer_structure(P, tol)
            self.structures.append(c)
            if c.warnings:
                self.ambiguous = True
                self.diagnostics.extend(c.warnings)

    @property
    def W(self) -> np.ndarray:
        return self.d.W

    def verify(self, O) -> bool:
        """Orthogonal-side candidate check: commutation, then the defining relation."""
        if not is_orthogonal(O, 1e-9):
            return False
        if not all(commutes(O, B, self.tol.commute) for B in self.family):
            return False
        C = self.d.W @ O @ self.d.W_inv
        return self.stack.residual(C) <= self.tol.verify

    def survivors(self, candidates) -> list[np.ndarray]:
        return _dedupe([O for O in candidates if self.verify(O)])

    def simple_frames(self) -> list[np.ndarray]:
        frames = []
        for c in self.structures:
            if c.simple_spectrum:
                frames.append(c.eigenbasis)
        for B in self.fam.span_basis:
            c = centralizer_structure(B, self.tol)
            if c.simple_spectrum:
                frames.append(c.eigenbasis)
        return frames

    def result(self, group_type, lie_basis=(), finite=(), axes=()) -> SymmetryClassification:
        finite = list(finite)
        I = np.eye(self.n)
        for E in (I, -I):
            if not any(np.linalg.norm(E - O) <= 1e-8 for O in finite):
                finite.append(E)
        finite.sort(key=lambda O: (-np.trace(O), tuple(np.round(O.ravel(), 8))))
        return SymmetryClassification(
            group_type=group_type,
            n=self.n,
            conjugacy_W=self.d.W,
            lie_dimension=len(lie_basis),
            lie_basis=tuple(lie_basis),
            finite_elements=tuple(finite),
            axes=tuple(np.asarray(a) for a in axes),
            diagnostics=tuple(self.diagnostics),
            ambiguous=self.ambiguous,
        )


# --------------------------------------------------------------------------
# n = 2


def _classify2(ctx: _Context) -> SymmetryClassification:
    n = 2
    if len(ctx.lie) == 1:
        # every span element is scalar
        J = J2 / np.sqrt(2.0)
        signs = ctx.survivors(frame_sign_elements(np.eye(n)))
        if ctx.im_zero:
            if len(signs) != 4:
                ctx.diagnostics.append("reflections failed verification for a scalar family")
            return ctx.result("Maximal", [J], signs)
        return ctx.result("Rotational", [J], signs)
    # non-scalar: use the eigenframe of the least scalar sample
    dev = [np.linalg.norm(P - np.trace(P) / n * np.eye(n)) for P in ctx.fam.pi_x_values]
    P = ctx.fam.pi_x_values[int(np.argmax(dev))]
    Q = sym_eig(P, ctx.tol).eigenvectors
    signs = ctx.survivors(frame_sign_elements(Q))
    if len(signs) == 4:
        return ctx.result("Trivial", (), signs, (Q[:, 0], Q[:, 1]))
    if len(signs) != 2:
        ctx.diagnostics.append(f"unexpected number of verified sign elements ({len(signs)})")
    return ctx.result("Minimal", (), signs)


def classify2(p: SpectralParams, d: DerivedParams | None = None, fam: PiFamily | None = None,
              tol: ToleranceConfig | None = None, dual: bool = True) -> SymmetryClassification:
    if p.n != 2:
        raise ShapeError("classify2 needs n = 2")
    return classify(p, d, fam, tol, dual=dual)


# --------------------------------------------------------------------------
# n = 3


def _cross_frames(axes: list[np.ndarray]) -> list[np.ndarray]:
    """Frames built from pairs of distinct axes ``r3``, ``p3``.

    ``q = r3 x p3`` is fixed (up to sign) by every element that fixes both
    lines; ``v2`` is the normalized projection of ``p3`` onto the plane
    orthogonal to ``r3``.
    """
    frames = []
    for i, r3 in enumerate(axes):
        for p3 in axes[i + 1:]:
            cr = np.cross(r3, p3)
            if np.linalg.norm(cr) < 1e-6:
                continue
            q = _unit(cr)
            v2 = _unit(p3 - (p3 @ r3) * r3)
            frames.append(np.column_stack([q, v2, r3]))
    return frames


def _classify3(ctx: _Context, seed: int = 0) -> SymmetryClassification:
    lie = list(ctx.lie.elements)
    dim = len(lie)
    if dim == 3:
        signs = ctx.survivors(frame_sign_elements(np.eye(3)))
        if ctx.im_zero:
            return ctx.result("T3e", lie, signs)
        ax = skew_centralizer_structure(ctx.pi_I, ctx.tol).zero_axes[:, 0]
        return ctx.result("T3f", lie, signs, (ax,))
    if dim == 1:
        L = lie[0]
        axis = skew_axis3(L)
        rng = np.random.default_rng(seed)
        passed = []
        for _ in range(3):
            v = rng.standard_normal(3)
            q = _unit(v - (v @ axis) * axis)
            passed.append(ctx.verify(rot_pi(q)))
        frame = complete_frame(axis)
        if all(passed):
            signs = ctx.survivors(frame_sign_elements(frame))
            return ctx.result("T3d", [L], signs, (axis,))
        if any(passed):
            ctx.diagnostics.append("Rot_pi probes about the axis disagree; reporting the rotational type")
        finite = ctx.survivors([rot_pi(axis), ref0(axis)])
        return ctx.result("T3f", [L], finite, (axis,))
    if dim != 0:
        ctx.diagnostics.append(f"commutant of dimension {dim} is impossible in so(3)")
        return _classify_general(ctx)
    # finite group: candidate frames
    frames = ctx.simple_frames()
    axes = []
    for c in ctx.structures:
        if sorted(c.partition) == [1, 2]:
            k = 0 if c.partition[0] == 1 else 2
            axes.append(c.eigenbasis[:, k])
    if not ctx.im_zero:
        axes.append(skew_centralizer_structure(ctx.pi_I, ctx.tol).zero_axes[:, 0])
    axes = _dedupe_axes(axes)
    frames.extend(complete_frame(a) for a in axes)
    frames.extend(_cross_frames(axes))
    best, best_frame = [], None
    found = []
    for F in frames:
        s = ctx.survivors(frame_sign_elements(F))
        found.extend(s)
        if len(s) > len(best):
            best, best_frame = s, F
    found = _dedupe(found)
    if len(found) == 8 and len(best) == 8:
        return ctx.result("T3c", (), found, tuple(best_frame.T))
    if len(found) == 4:
        rp = [O for O in found if abs(np.trace(O) + 1.0) < 1e-6]
        if len(rp) == 1:
            w, V = np.linalg.eigh(0.5 * (rp[0] + rp[0].T))
            p = stabilize_signs(V[:, [int(np.argmax(w))]])[:, 0]
            return ctx.result("T3b", (), found, (p,))
    if len(found) != 2:
        ctx.diagnostics.append(f"unexpected verified finite group of order {len(found)}")
        if len(found) > 2:
            return ctx.result("T3b" if len(found) < 8 else "T3c", (), found)
    return ctx.result("T3a", (), found)


def _dedupe_axes(axes) -> list[np.ndarray]:
    out = []
    for a in axes:
        a = _unit(a)
        if not any(abs(abs(a @ b) - 1.0) < 1e-9 for b in out):
            out.append(a)
    return out


def classify3(p: SpectralParams, d: DerivedParams | None = None, fam: PiFamily | None = None,
              tol: ToleranceConfig | None = None, dual: bool = True, seed: int = 0) -> SymmetryClassification:
    if p.n != 3:
        raise ShapeError("classify3 needs n = 3")
    return classify(p, d, fam, tol, dual=dual, seed=seed)


# --------------------------------------------------------------------------
# general n


MAX_SIGN_FRAMES_DIM = 12


def _classify_general(ctx: _Context) -> SymmetryClassification:
    found = []
    if ctx.n <= MAX_SIGN_FRAMES_DIM:
        for F in ctx.simple_frames():
            found.extend(ctx.survivors(frame_sign_elements(F)))
    found = _dedupe(found)
    return ctx.result("General", list(ctx.lie.elements), found)


def classify_general(p: SpectralParams, d: DerivedParams | None = None, fam: PiFamily | None = None,
                     tol: ToleranceConfig | None = None, dual: bool = True, seed: int = 0) -> SymmetryClassification:
    """Lie dimension and verified sign elements; exact types for ``n`` in {2, 3}."""
    return classify(p, d, fam, tol, dual=dual, seed=seed)


def _classify_once(p, d, fam, tol, seed) -> SymmetryClassification:
    ctx = _Context(p, d, fam, tol)
    if p.n == 2:
        res = _classify2(ctx)
    elif p.n == 3:
        res = _classify3(ctx, seed)
    else:
        res = _classify_general(ctx)
    if p.n in (2, 3) and res.group_type not in MINIMAL_TYPES and minimal_test(d, tol).in_M:
        res = replace(res, diagnostics=res.diagnostics + ("minimal certificate holds but a larger group was verified",))
    return res


def classify(p: SpectralParams, d: DerivedParams | None = None, fam: PiFamily | None = None,
             tol: ToleranceConfig | None = None, dual: bool = True, seed: int = 0) -> SymmetryClassification:
    """Classify ``G_H``: exact types for ``n = 2, 3``, ``General`` otherwise.

    When a decision sits within a factor 2 of a threshold, the problem is
    classified again with the clustering and nullspace thresholds multiplied
    and divided by 100; both tags are stored in ``dual_report``.
    """
    if p.n < 2:
        raise ShapeError("classification needs n >= 2")
    tol = p.tolerances if tol is None else tol
    d = derive(p) if d is None else d
    fam = build_pi_family(d, p, tol=tol) if fam is None else fam
    res = _classify_once(p, d, fam, tol, seed)
    if dual and res.ambiguous:
        report = {}
        for label, factor in (("merge", 100.0), ("split", 0.01)):
            t2 = tol.scaled(factor)
            r2 = _classify_once(p, d, build_pi_family(d, p, tol=t2), t2, seed)
            report[label] = r2.group_type
        diag = res.diagnostics + (f"dual report: merge -> {report['merge']}, split -> {report['split']}",)
        res = replace(res, diagnostics=diag, ambiguous=True, dual_report=report)
    return res
