"""Acceptance checks reproducing the worked examples and property suites.

Each check returns ``(passed, detail)``. They are shared by the test suite
and the ``verify-paper`` command.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import fixtures
from .commutant import commutant_skew_basis, in_L_invar, in_L_invar_enumerate
from .config import DEFAULT_TOLERANCES, ToleranceConfig
from .exponents import density_invariance_check, exponent_set
from .matfun import logm_principal, random_orthogonal
from .params import derive, pi_x, validate
from .process import (
    QuadratureConfig,
    complex_gamma,
    covariance,
    covariance_grid,
    fbm_covariance,
    oss_check,
    simulate,
    time_domain_f,
)
from .symmetry import classify, maximal_test, minimal_test

GRID5 = (0.2, 0.5, 1.0, 1.5, 2.0)


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    check: Callable[[ToleranceConfig], tuple[bool, str]]


def _classify_fixture(name: str, tol: ToleranceConfig):
    p = fixtures.load(name)
    return p, classify(p, tol=tol)


def _match_sets(found, expected, tol: float = 1e-8) -> bool:
    if len(found) != len(expected):
        return False
    return all(any(np.linalg.norm(F - E) <= tol for F in found) for E in expected)


def _axis_close(v, target, tol: float) -> bool:
    v, target = np.asarray(v, float), np.asarray(target, float)
    return min(np.linalg.norm(v - target), np.linalg.norm(v + target)) <= tol


def c01_trivial(tol):
    p, c = _classify_fixture("example_5_2", tol)
    expected = [np.eye(2), -np.eye(2), np.diag([1.0, -1.0]), np.diag([-1.0, 1.0])]
    ok = c.group_type == "Trivial" and c.lie_dimension == 0 and _match_sets(c.group_elements(), expected)
    return ok, f"type={c.group_type}, {len(c.finite_elements)} elements"


def c02_rotational(tol):
    p, c = _classify_fixture("example_5_1", tol)
    es = exponent_set(p, c)
    W = c.conjugacy_W
    skew_ok = False
    if es.dimension == 1:
        L = np.linalg.solve(W, es.tangent_basis[0] @ W)
        skew_ok = np.linalg.norm(L + L.T) <= 1e-10 and np.linalg.norm(L) > 0.1
    ok = c.group_type == "Rotational" and c.lie_dimension == 1 and skew_ok
    return ok, f"type={c.group_type}, lie_dim={c.lie_dimension}, tangent dim={es.dimension}"


def c03_maximal(tol):
    tags = []
    ok = True
    for n, expected in ((2, "Maximal"), (3, "T3e")):
        p = validate(0.3 * np.eye(n), np.eye(n), tol=tol)
        c = classify(p, tol=tol)
        m = maximal_test(p)
        tags.append(c.group_type)
        ok &= c.group_type == expected and m.is_maximal and abs(m.d_value - 0.3) < 1e-12 and m.residual < 1e-10
    return bool(ok), f"types={tags}"


def c04_jordan(tol):
    p, c = _classify_fixture("example_5_3", tol)
    axis_ok = c.group_type == "T3b" and _axis_close(c.axes[0], [0, 0, 1], 1e-8)
    d = derive(p)
    err = 0.0
    for x in (np.exp(-1.0), np.e):
        lx = np.log(x)
        closed = x ** (-0.4) * np.array([[1.0, -lx, 0.0], [-lx, lx**2 + 1.0, 0.0], [0.0, 0.0, 1.0]])
        err = max(err, float(np.abs(pi_x(d, x) - closed).max()))
    return bool(axis_ok and err <= 1e-10), f"type={c.group_type}, Pi_x error={err:.1e}"


def c05_three_dim(tol):
    _, c4 = _classify_fixture("example_5_4", tol)
    signs = [np.diag(s) for s in itertools.product((1.0, -1.0), repeat=3)]
    ok4 = c4.group_type == "T3c" and _match_sets(list(c4.finite_elements), signs)
    _, c5 = _classify_fixture("example_5_5", tol)
    ok5 = c5.group_type == "T3d" and _axis_close(c5.axes[0], [0, 0, 1], 1e-8)
    _, c6 = _classify_fixture("example_5_6", tol)
    ok6 = c6.group_type == "T3f"
    return bool(ok4 and ok5 and ok6), f"types={[c4.group_type, c5.group_type, c6.group_type]}"


def c06_minimal(tol):
    p, c = _classify_fixture("minimal_3", tol)
    cert = minimal_test(derive(p), tol)
    S = np.diag([0.1, 0.2, 0.3])
    forbidden = []
    for i, j in ((0, 1), (0, 2), (1, 2)):
        L = np.zeros((3, 3))
        L[i, j], L[j, i] = 0.05, -0.05
        forbidden.append(minimal_test(derive(validate(S + L, np.eye(3))), tol).in_M)
    ok = cert.in_M and c.group_type == "T3a" and not any(forbidden)
    return bool(ok), f"in_M={cert.in_M}, type={c.group_type}, forbidden in_M={forbidden}"


def c07_commutant(tol):
    dims = [len(commutant_skew_basis([np.eye(n)], tol)) for n in range(2, 6)]
    ok = dims == [n * (n - 1) // 2 for n in range(2, 6)]
    rng = np.random.default_rng(7)
    simple = []
    for n in range(2, 6):
        Q = random_orthogonal(n, rng)
        simple.append(len(commutant_skew_basis([Q @ np.diag(np.arange(1.0, n + 1)) @ Q.T], tol)))
    ok &= simple == [0, 0, 0, 0]
    d2 = len(commutant_skew_basis([np.diag([2.0, 2.0, 5.0])], tol))
    ok &= d2 == 1
    return bool(ok), f"identity dims={dims}, simple={simple}, double={d2}"


def bch_ratios(M) -> np.ndarray:
    """``r(x) / |ln x|^3`` at ``x = 1 +- 10^-k``, ``k = 1..4`` (shape ``(2, 4)``)."""
    M = np.asarray(M, dtype=float)
    d = derive(validate(M, np.eye(M.shape[0])))
    out = np.empty((2, 4))
    for a, sign in enumerate((1.0, -1.0)):
        for k in range(1, 5):
            x = 1.0 + sign * 10.0 ** (-k)
            u = np.log(x)
            r = logm_principal(pi_x(d, x)) + u * (M + M.T) - 0.5 * u**2 * (M @ M.T - M.T @ M)
            out[a, k - 1] = np.linalg.norm(r, 2) / abs(u) ** 3
    return out


def c08_bch(tol):
    rng = np.random.default_rng(8)
    worst = 1.0
    for _ in range(20):
        n = int(rng.integers(2, 5))
        M = rng.standard_normal((n, n))
        M *= rng.uniform(0.3, 1.0) / np.linalg.norm(M, 2)
        ratios = bch_ratios(M)
        for row in ratios:
            worst = max(worst, float(row.max() / row.min()))
    return worst < 10.0, f"largest max/min ratio across k: {worst:.3f}"


def c09_oss(tol):
    worst, where = 0.0, ""
    for name in fixtures.names():
        p = fixtures.load(name)
        for c in (0.5, 2.0):
            e = oss_check(p, c, GRID5)
            if e >= worst:
                worst, where = e, f"{name}, c={c}"
    return worst < 1e-4, f"max relative error {worst:.2e} ({where})"


def c10_fbm(tol):
    h = 0.7
    p = validate((h - 0.5) * np.eye(2), np.eye(2))
    g = covariance_grid(p, GRID5, QuadratureConfig(normalize=True))
    worst = 0.0
    for (i, j), V in g.values.items():
        ref = fbm_covariance(h, g.times[i], g.times[j]) * np.eye(2)
        worst = max(worst, float(np.linalg.norm(V - ref) / np.linalg.norm(ref)))
    return worst < 1e-4, f"max relative error {worst:.2e}"


def c11_density_invariance(tol):
    vals = {}
    for name in ("example_5_1", "example_6_1", "example_2_1", "example_2_1_n3"):
        p, c = _classify_fixture(name, tol)
        vals[name] = density_invariance_check(p, c, (-1.0, -0.5, 0.5, 1.0)) if c.lie_dimension else np.inf
    worst = max(vals.values())
    return worst < 1e-9, ", ".join(f"{k}={v:.1e}" for k, v in vals.items())


def c12_gamma(tol):
    diff = abs(time_domain_f(0.2, 0.5, np.pi / 3) - time_domain_f(0.2, 1.0, np.pi / 3))
    errs = [abs(abs(complex_gamma(1 + 1j * c)) ** 2 * np.sinh(np.pi * c) / (np.pi * c) - 1.0) for c in (0.25, 1.0, 2.0)]
    return bool(diff > 0.1 and max(errs) < 1e-10), f"|f(c=0.5) - f(c=1)| = {diff:.3f}, gamma identity error {max(errs):.1e}"


def c13_conjugation(tol):
    rng = np.random.default_rng(13)
    bad = []
    for name in fixtures.names():
        p = fixtures.load(name)
        tag = classify(p, tol=tol).group_type
        for _ in range(20):
            Q = random_orthogonal(p.n, rng)
            got = classify(p.conjugated(Q), tol=tol).group_type
            if got != tag:
                bad.append(f"{name}:{tag}->{got}")
    return not bad, f"{len(bad)} mismatches" + (f" ({bad[:3]})" if bad else "")


def c14_monte_carlo(tol):
    p = validate(0.2 * np.eye(2), np.eye(2))
    sp = simulate(p, [0.0, 0.5, 1.0], 20000, seed=42)
    emp = np.cov(sp.paths[:, 2, :].T, bias=True)
    ref = covariance(p, 1.0, 1.0)
    rel = float(np.max(np.abs(np.diag(emp) - np.diag(ref)) / np.diag(ref)))
    a = simulate(p, np.linspace(0, 1, 5), 3, seed=42).to_csv()
    b = simulate(p, np.linspace(0, 1, 5), 3, seed=42).to_csv()
    return bool(rel < 0.05 and a == b), f"Var(B(1)) relative error {rel:.3f}, identical CSV={a == b}"


def random_sparse_skew(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random skew matrix; about a third are dense, the rest have random zero patterns."""
    L = rng.standard_normal((n, n))
    density = rng.choice([1.0, 0.6, 0.35, 0.15])
    mask = rng.random((n, n)) < density
    L = np.triu(L * mask, 1)
    return L - L.T


def c15_oracle(tol):
    rng = np.random.default_rng(15)
    disagree = 0
    invariant = 0
    for n in (3, 4, 5, 6):
        for _ in range(200):
            L = random_sparse_skew(n, rng)
            a = in_L_invar(L, np.eye(n), tol)
            disagree += a != in_L_invar_enumerate(L, np.eye(n))
            invariant += a
    return disagree == 0, f"{disagree} disagreements over 800 matrices ({invariant} with invariant subsets)"


CRITERIA = [
    Criterion(1, "trivial type and its four-element group", c01_trivial),
    Criterion(2, "rotational type and its exponent set", c02_rotational),
    Criterion(3, "single-parameter OFBM is maximal", c03_maximal),
    Criterion(4, "Jordan-type exponent gives type T3b about e3", c04_jordan),
    Criterion(5, "diagonal and non-reversible n = 3 types", c05_three_dim),
    Criterion(6, "minimal-type certificate", c06_minimal),
    Criterion(7, "commutant dimensions", c07_commutant),
    Criterion(8, "third-order BCH remainder", c08_bch),
    Criterion(9, "operator self-similarity of the covariance", c09_oss),
    Criterion(10, "univariate FBM covariance oracle", c10_fbm),
    Criterion(11, "spectral parameter shared by all exponents", c11_density_invariance),
    Criterion(12, "time-domain constant depends on c", c12_gamma),
    Criterion(13, "conjugation covariance of the group type", c13_conjugation),
    Criterion(14, "Monte Carlo variance and reproducibility", c14_monte_carlo),
    Criterion(15, "invariant-subspace graph test vs enumeration", c15_oracle),
]


def run(criterion: Criterion, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> tuple[bool, str]:
    try:
        ok, detail = criterion.check(tol)
    except Exception as exc:  # a crash is a failure, reported with its message
        return False, f"{type(exc).__name__}: {exc}"
    return bool(ok), detail


def format_line(criterion: Criterion, ok: bool, detail: str) -> str:
    return f"{'PASS' if ok else 'FAIL'} {criterion.number:2d} {criterion.name}: {detail}"
