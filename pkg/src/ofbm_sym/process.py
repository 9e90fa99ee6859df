"""Process-level computations: spectral density, covariance, sample paths.

The covariance

    Gamma(t, s) = int_R (e^{itx} - 1)(e^{-isx} - 1) / x^2  f(x) dx,
    f(x) = F(x) F(x)*,  F(x) = x_+^{-D} A + x_-^{-D} conj(A),

is evaluated separately on each half line. On ``(0, inf)`` the kernel is
split by frequency, ``1 - e^{itx} - e^{-isx} + e^{i(t-s)x}``, after cutting
out ``[0, eps]`` where the kernel is expanded in powers of ``x``. Because
``g(x) = x^{-D} G x^{-D^T}`` satisfies ``x g' = -(D g + g D^T)``, every
power moment ``int_0^eps x^j g`` and the non-oscillatory integral
``int_eps^inf x^{-2} g`` solve Sylvester equations exactly. The oscillatory
pieces use composite Gauss-Legendre panels up to ``X`` and an integration
by parts series beyond it.
"""
from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DomainError, NumericError, ShapeError
from .matfun import mat_power, mat_power_batch
from .params import SpectralParams

DEFAULT_OSS_GRID = (0.2, 0.5, 1.0, 1.5, 2.0)


class QuadratureWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class QuadratureConfig:
    """Covariance quadrature.

    Attributes:
        x_max: largest admissible start of the asymptotic tail.
        panels: log-spaced panels per decade.
        nodes_per_panel: Gauss-Legendre nodes per panel.
        singularity_split: ``eps``; below it the kernel is expanded in powers of ``x``.
        taylor_terms: powers of ``x`` kept on ``[0, eps]``.
        tail_terms: terms of the integration by parts series.
        tail_start: the tail starts where ``|omega| x`` reaches this value.
        normalize: scale so that ``tr Gamma(1, 1) = n``.
        tol: tolerance on the imaginary residue (warned above 100 times this).
    """

    x_max: float = 1e4
    panels: int = 6
    nodes_per_panel: int = 24
    singularity_split: float = 1e-2
    taylor_terms: int = 40
    tail_terms: int = 8
    tail_start: float = 40.0
    normalize: bool = False
    tol: float = 1e-10

    def __post_init__(self):
        if not self.x_max > self.singularity_split > 0:
            raise DomainError("need x_max > singularity_split > 0")
        if self.panels < 1 or self.nodes_per_panel < 1:
            raise DomainError("panels and nodes_per_panel must be >= 1")


# --------------------------------------------------------------------------
# spectral density


def spectral_density_batch(p: SpectralParams, xs) -> np.ndarray:
    """``F(x) F(x)*`` for every nonzero ``x`` in ``xs``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if np.any(xs == 0):
        raise DomainError("spectral density is undefined at x = 0")
    E = mat_power_batch(-p.D, np.abs(xs))
    A = np.where((xs > 0)[:, None, None], p.A[None], p.A.conj()[None])
    F = E @ A
    return F @ np.conj(np.swapaxes(F, 1, 2))


def spectral_density(p: SpectralParams, x: float) -> np.ndarray:
    """Hermitian positive semidefinite density at ``x != 0``."""
    return spectral_density_batch(p, [x])[0]


# --------------------------------------------------------------------------
# quadrature


def _gauss_panels(bounds, m: int):
    z, w = np.polynomial.legendre.leggauss(m)
    a, b = np.asarray(bounds[:-1]), np.asarray(bounds[1:])
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * z[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def _panel_bounds(lo: float, hi: float, ratio: float, max_width: float) -> np.ndarray:
    """Panels growing geometrically by ``ratio`` but never wider than ``max_width``."""
    b = [lo]
    while b[-1] < hi:
        nxt = min(b[-1] * ratio, b[-1] + max_width, hi)
        if hi - nxt < 1e-12 * hi:
            nxt = hi
        b.append(nxt)
    return np.array(b)


def kernel_series(t: float, s: float, terms: int) -> np.ndarray:
    """Coefficients ``c_j`` with ``(e^{itx} - 1)(e^{-isx} - 1) / x^2 = sum_j c_j x^j``."""
    c = np.zeros(terms, dtype=complex)
    fa = [(1j * t) ** k / math.factorial(k) for k in range(terms + 2)]
    fb = [(-1j * s) ** k / math.factorial(k) for k in range(terms + 2)]
    for j in range(terms):
        c[j] = sum(fa[a] * fb[j + 2 - a] for a in range(1, j + 2))
    return c


def _shifted_sylvester(D: np.ndarray, a: float, rhs) -> np.ndarray:
    """``(D - a) Y + Y (D^T - a) = rhs``."""
    # complex coefficients force a triangular (not quasi-triangular) Schur form,
    # which the solver needs when the right-hand side is complex
    Dc = D.astype(complex) - a * np.eye(D.shape[0])
    Y = scipy.linalg.solve_sylvester(Dc, Dc.T, rhs)
    if np.linalg.norm(Dc @ Y + Y @ Dc.T - rhs) > 1e-8 * max(np.linalg.norm(rhs), 1e-300):
        raise NumericError("Sylvester solve did not converge")
    return Y


class _HalfLine:
    """``int_0^inf k_{t,s}(x) g(x) dx`` for ``g(x) = f(sign * x)``."""

    def __init__(self, p: SpectralParams, sign: int, q: QuadratureConfig, eps: float):
        self.p, self.sign, self.q, self.eps = p, sign, q, eps
        self.D = p.D
        g_eps = self.density(np.array([eps]))[0]
        self.moments = []
        for j in range(q.taylor_terms):
            self.moments.append(self._solve(0.5 * (j + 1), -(eps ** (j + 1)) * g_eps))
        self.K0 = self._solve(-0.5, g_eps / eps)
        self._cache: dict[float, np.ndarray] = {}
        self._panels: dict[tuple[float, float], tuple] = {}
        self.warnings: list[str] = []

    def _solve(self, a: float, rhs) -> np.ndarray:
        return _shifted_sylvester(self.D, a, rhs)

    def density(self, xs) -> np.ndarray:
        return spectral_density_batch(self.p, self.sign * np.asarray(xs))

    def _panel_data(self, bounds):
        """Nodes, weights and densities; panels shared between frequencies are evaluated once."""
        keys = list(zip(bounds[:-1], bounds[1:]))
        missing = [k for k in keys if k not in self._panels]
        if missing:
            m = self.q.nodes_per_panel
            xs, ws = zip(*(_gauss_panels(np.array(k), m) for k in missing))
            g = self.density(np.concatenate(xs)).reshape(len(missing), m, self.p.n, self.p.n)
            for k, x, w, gk in zip(missing, xs, ws, g):
                self._panels[k] = (x, w, gk)
        data = [self._panels[k] for k in keys]
        return (np.concatenate([d[0] for d in data]), np.concatenate([d[1] for d in data]),
                np.concatenate([d[2] for d in data]))

    def _apply_op(self, Y, k: int) -> np.ndarray:
        # -((k + 1) Y + D Y + Y D^T)
        return -((k + 1) * Y + self.D @ Y + Y @ self.D.T)

    def K(self, omega: float) -> np.ndarray:
        """``int_eps^inf e^{i omega x} x^{-2} g(x) dx``."""
        if omega == 0.0:
            return self.K0
        if omega in self._cache:
            return self._cache[omega]
        q = self.q
        w_abs = abs(omega)
        X = min(max(q.tail_start / w_abs, 1.0, 2.0 * self.eps), q.x_max)
        if w_abs * X < q.tail_start:
            self.warnings.append(f"tail series at omega={omega:g} starts at omega*X={w_abs * X:.3g}")
        bounds = _panel_bounds(self.eps, X, 10.0 ** (1.0 / q.panels), 2.0 * np.pi / w_abs)
        x, w, g = self._panel_data(bounds)
        coef = w * np.exp(1j * omega * x) / x**2
        val = np.tensordot(coef, g, axes=(0, 0))
        # integration by parts beyond X
        psi = self.density(np.array([X]))[0] / X**2
        tail = np.zeros_like(psi)
        for k in range(q.tail_terms):
            tail = tail + (-1) ** k * psi / (X**k * (1j * omega) ** (k + 1))
            psi = self._apply_op(psi, k + 1)
        val = val - np.exp(1j * omega * X) * tail
        self._cache[omega] = val
        return val

    def gamma(self, t: float, s: float) -> np.ndarray:
        c = kernel_series(t, s, self.q.taylor_terms)
        near = sum(cj * Yj for cj, Yj in zip(c, self.moments))
        return near + self.K0 - self.K(t) - self.K(-s) + self.K(t - s)


class CovarianceEngine:
    """Reusable covariance evaluator for a fixed parameter set.

    ``omega_max`` bounds the frequencies that will be requested (twice the
    largest time) and fixes the near-zero cut.
    """

    def __init__(self, p: SpectralParams, q: QuadratureConfig = QuadratureConfig(), omega_max: float = 2.0):
        if not p.in_domain:
            raise DomainError("covariance needs all eigenvalues of D in the strip -1/2 < Re < 1/2")
        self.p, self.q = p, q
        eps = min(q.singularity_split, 1.0 / max(omega_max, 1e-300))
        self.pos = _HalfLine(p, +1, q, eps)
        self.neg = _HalfLine(p, -1, q, eps)
        self.max_imag_residue = 0.0
        self.scale = 1.0
        if q.normalize:
            G11 = self._raw(1.0, 1.0)
            self.scale = p.n / float(np.trace(G11))

    @property
    def warnings(self) -> list[str]:
        return self.pos.warnings + self.neg.warnings

    def _raw(self, t: float, s: float) -> np.ndarray:
        G = self.pos.gamma(t, s) + self.neg.gamma(-t, -s)
        scale = max(np.linalg.norm(G.real), np.finfo(float).tiny)
        self.max_imag_residue = max(self.max_imag_residue, float(np.linalg.norm(G.imag) / scale))
        return G.real

    def gamma(self, t: float, s: float) -> np.ndarray:
        return self.scale * self._raw(float(t), float(s))


def _check_residue(engine: CovarianceEngine):
    if engine.max_imag_residue > 100 * engine.q.tol:
        warnings.warn(f"imaginary residue {engine.max_imag_residue:.2e} of the covariance quadrature",
                      QuadratureWarning, stacklevel=3)


def covariance(p: SpectralParams, t: float, s: float, q: QuadratureConfig = QuadratureConfig()) -> np.ndarray:
    """``E B(t) B(s)^T`` by quadrature (optionally normalized, see :class:`QuadratureConfig`)."""
    omega = 2.0 * max(abs(t), abs(s), 1.0 if q.normalize else 0.0, 1e-12)
    eng = CovarianceEngine(p, q, omega)
    G = eng.gamma(t, s)
    _check_residue(eng)
    return G


@dataclass(frozen=True)
class CovarianceGrid:
    times: tuple[float, ...]
    values: dict
    imag_residue: float = 0.0
    diagnostics: tuple[str, ...] = field(default=())

    def block_matrix(self) -> np.ndarray:
        k = len(self.times)
        return np.block([[self.values[(i, j)] for j in range(k)] for i in range(k)])

    def to_dict(self) -> dict:
        return {
            "times": list(self.times),
            "gamma": {f"{i},{j}": V.tolist() for (i, j), V in self.values.items()},
            "imag_residue": self.imag_residue,
        }


def covariance_grid(p: SpectralParams, times, q: QuadratureConfig = QuadratureConfig()) -> CovarianceGrid:
    times = tuple(float(t) for t in times)
    if not times:
        raise ShapeError("times must be non-empty")
    omega = 2.0 * max(max(abs(t) for t in times), 1.0 if q.normalize else 0.0, 1e-12)
    eng = CovarianceEngine(p, q, omega)
    values = {}
    for i, t in enumerate(times):
        for j, s in enumerate(times):
            values[(i, j)] = eng.gamma(t, s)
    _check_residue(eng)
    return CovarianceGrid(times, values, eng.max_imag_residue, tuple(eng.warnings))


def oss_check(p: SpectralParams, c_scale: float, t_grid=DEFAULT_OSS_GRID,
              q: QuadratureConfig = QuadratureConfig()) -> float:
    """``max_ij |Gamma(c t_i, c t_j) - c^H Gamma(t_i, t_j) c^{H^T}| / |c^H Gamma(t_i, t_j) c^{H^T}|``."""
    if not c_scale > 0:
        raise DomainError("scale factor must be positive")
    t_grid = [float(t) for t in t_grid]
    omega = 2.0 * max(1.0, c_scale) * max(abs(t) for t in t_grid)
    eng = CovarianceEngine(p, q, omega)
    cH = mat_power(p.H, c_scale)
    worst = 0.0
    for t in t_grid:
        for s in t_grid:
            target = cH @ eng.gamma(t, s) @ cH.T
            got = eng.gamma(c_scale * t, c_scale * s)
            den = np.linalg.norm(target)
            if den == 0:
                continue
            worst = max(worst, float(np.linalg.norm(got - target) / den))
    _check_residue(eng)
    return worst


def fbm_covariance(h: float, t: float, s: float) -> float:
    """``(|t|^{2h} + |s|^{2h} - |t - s|^{2h}) / 2``."""
    return 0.5 * (abs(t) ** (2 * h) + abs(s) ** (2 * h) - abs(t - s) ** (2 * h))


def is_time_reversible(p: SpectralParams, tol: float = 1e-10) -> bool:
    """``Im(AA*) = 0`` up to ``tol (1 + |Re(AA*)|)``."""
    return bool(np.linalg.norm(p.im_aa, 2) <= tol * (1.0 + np.linalg.norm(p.re_aa, 2)))


# --------------------------------------------------------------------------
# simulation


@dataclass(frozen=True)
class SimulationConfig:
    """Positive-frequency nodes used for path synthesis.

    Log-spaced panels on ``[x_min, 1]`` and panels no wider than one period of
    the largest time on ``[1, x_max]``. With ``low_frequency`` the mass on
    ``[0, x_min]`` is added in closed form.
    """

    x_min: float = 1e-4
    x_max: float = 100.0
    panels: int = 2
    nodes_per_panel: int = 8
    chunk: int = 2000
    low_frequency: bool = True

    def __post_init__(self):
        if not self.x_max > 1.0 > self.x_min > 0:
            raise DomainError("need x_max > 1 > x_min > 0")
        if self.panels < 1 or self.nodes_per_panel < 1 or self.chunk < 1:
            raise DomainError("panels, nodes_per_panel and chunk must be >= 1")


def simulation_nodes(cfg: SimulationConfig, t_max: float) -> tuple[np.ndarray, np.ndarray]:
    ratio = 10.0 ** (1.0 / cfg.panels)
    width = 2.0 * np.pi / max(t_max, 1e-12)
    lo = _panel_bounds(cfg.x_min, 1.0, ratio, np.inf)
    hi = _panel_bounds(1.0, cfg.x_max, ratio, width)
    return _gauss_panels(np.concatenate([lo, hi[1:]]), cfg.nodes_per_panel)


def low_frequency_mass(p: SpectralParams, x_min: float) -> np.ndarray:
    """``int_0^{x_min} g(x) dx`` in closed form (Hermitian).

    Integrating ``d/dx [x g(x)] = g - D g - g D^T`` gives
    ``(I - D) Y - Y D^T = x_min g(x_min)``.
    """
    g = spectral_density_batch(p, [x_min])[0]
    Y = _shifted_sylvester(p.D, 0.5, -x_min * g)
    return 0.5 * (Y + Y.conj().T)


def _hermitian_factor(Y: np.ndarray) -> np.ndarray:
    """``C`` with ``C C* = Y`` for Hermitian positive semidefinite ``Y``."""
    w, U = np.linalg.eigh(Y)
    return U * np.sqrt(np.clip(w, 0.0, None))


def _transfer(times, x) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    return np.expm1(1j * np.outer(times, x)) / (1j * x[None, :])


def discretized_covariance(p: SpectralParams, t: float, s: float, nodes, weights,
                           low_mass: np.ndarray | None = None) -> np.ndarray:
    """Exact covariance of the synthesized paths: ``2 Re [sum_k w_k k_{t,s}(x_k) g(x_k) + t s Y]``.

    ``Y`` is the low-frequency mass (see :func:`low_frequency_mass`); pass
    ``None`` to leave it out.
    """
    x = np.asarray(nodes, dtype=float)
    g = spectral_density_batch(p, x)
    k = _transfer([t], x)[0] * np.conj(_transfer([s], x)[0])
    out = np.tensordot(np.asarray(weights) * k, g, axes=(0, 0))
    if low_mass is not None:
        out = out + t * s * low_mass
    return 2.0 * out.real


@dataclass(frozen=True)
class SamplePaths:
    times: np.ndarray
    paths: np.ndarray
    seed: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        n = self.paths.shape[2]
        buf.write("path,t," + ",".join(f"component_{i + 1}" for i in range(n)) + "\n")
        for i in range(self.paths.shape[0]):
            for j, t in enumerate(self.times):
                row = [str(i), repr(float(t))] + [repr(float(v)) for v in self.paths[i, j]]
                buf.write(",".join(row) + "\n")
        return buf.getvalue()


def path_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for path ``index``; order of generation does not matter."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def simulate(p: SpectralParams, times, n_paths: int, seed: int = 42,
             cfg: SimulationConfig = SimulationConfig()) -> SamplePaths:
    """Discretized spectral representation on the nodes of :func:`simulation_nodes`.

    ``B(t) = sum_k 2 Re[(e^{itx_k} - 1)/(i x_k) F(x_k) Z_k] sqrt(w_k)`` with
    ``Z_k`` standard complex Gaussian (real and imaginary parts of variance 1/2).
    Frequencies below ``x_min`` enter as one extra term ``2 Re[t C Z_0]`` with
    ``C C* = int_0^{x_min} g``; there the transfer function is ``t`` up to
    ``O(t^2 x)``. Its covariance is :func:`discretized_covariance`.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ShapeError("times must be a non-empty 1-D sequence")
    if np.any(np.diff(times) < 0) or times[0] < 0:
        raise DomainError("times must be sorted and non-negative")
    if n_paths < 1:
        raise DomainError("n_paths must be >= 1")
    n = p.n
    x, w = simulation_nodes(cfg, float(times.max()) if times.max() > 0 else 1.0)
    V = mat_power_batch(-p.D, x) @ p.A[None] * np.sqrt(w)[:, None, None]
    Phi = _transfer(times, x)
    if cfg.low_frequency:
        V = np.concatenate([_hermitian_factor(low_frequency_mass(p, cfg.x_min))[None], V])
        Phi = np.concatenate([times[:, None].astype(complex), Phi], axis=1)
    m = V.shape[0]
    out = np.empty((n_paths, times.size, n))
    for start in range(0, n_paths, cfg.chunk):
        stop = min(start + cfg.chunk, n_paths)
        Z = np.empty((stop - start, m, n), dtype=complex)
        for i in range(start, stop):
            rng = path_rng(seed, i)
            re = rng.standard_normal((m, n))
            im = rng.standard_normal((m, n))
            Z[i - start] = (re + 1j * im) / np.sqrt(2.0)
        U = np.einsum("kab,pkb->pka", V, Z)
        out[start:stop] = 2.0 * np.einsum("tk,pka->pta", Phi, U).real
    if not np.all(np.isfinite(out)):
        raise NumericError("simulation produced non-finite values")
    return SamplePaths(times=times, paths=out, seed=int(seed))


# --------------------------------------------------------------------------
# Gamma function and the time-domain constant


_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def complex_gamma(z: complex) -> complex:
    """Gamma function for complex ``z`` (Lanczos approximation, reflection for ``Re z < 1/2``)."""
    z = complex(z)
    if z.imag == 0 and z.real <= 0 and z.real == round(z.real):
        raise DomainError(f"Gamma has a pole at {z.real:g}")
    if z.real < 0.5:
        return np.pi / (np.sin(np.pi * z) * complex_gamma(1.0 - z))
    z -= 1.0
    a = _LANCZOS[0]
    t = z + _LANCZOS_G + 0.5
    for k in range(1, len(_LANCZOS)):
        a += _LANCZOS[k] / (z + k)
    return np.sqrt(2.0 * np.pi) * t ** (z + 0.5) * np.exp(-t) * a


def time_domain_f(d_val: float, c_val: float, beta: float) -> float:
    """``|Gamma(d + ic + 1)|^2 (2 cos(beta - pi d) + 2 cosh(pi c))``.

    With ``O = U2 diag(e^{i beta}, e^{-i beta}) U2*``, the time-domain
    parametrization of the exponent ``dI + cJ + I/2`` yields
    ``2 pi AA* = U2 diag(f(d, c, beta), f(d, c, -beta)) U2*`` (both real).
    Since ``f`` changes with ``c``, that parametrization cannot describe one
    process for every exponent.
    """
    if not -0.5 < d_val < 0.5 or d_val == 0:
        raise DomainError("d must lie in (-1/2, 1/2) without 0")
    if not 0 < beta < 2 * np.pi or beta == np.pi:
        raise DomainError("beta must lie in (0, 2 pi) without pi")
    g = complex_gamma(complex(d_val + 1.0, c_val))
    return float(abs(g) ** 2 * (2.0 * np.cos(beta - np.pi * d_val) + 2.0 * np.cosh(np.pi * c_val)))
