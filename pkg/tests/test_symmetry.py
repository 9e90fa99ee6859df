import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ofbm_sym import fixtures
from ofbm_sym.config import DEFAULT_TOLERANCES
from ofbm_sym.errors import ShapeError
from ofbm_sym.matfun import J2, expm, is_orthogonal, random_orthogonal, rotation2
from ofbm_sym.params import derive, validate
from ofbm_sym.process import is_time_reversible
from ofbm_sym.symmetry import (
    DensityStack,
    classify,
    classify2,
    classify3,
    complete_frame,
    is_symmetry_element,
    maximal_test,
    minimal_test,
    ref0,
    rot_pi,
    skew_axis3,
)

FIXTURES = fixtures.names()


def contains(mats, X, tol=1e-8):
    return any(np.linalg.norm(M - X) <= tol for M in mats)


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_types(name):
    doc = fixtures.document(name)
    c = classify(fixtures.load(name))
    assert c.group_type == doc["expected_type"]
    assert not c.ambiguous
    if "expected_axis" in doc:
        a = np.asarray(c.axes[0])
        e = np.asarray(doc["expected_axis"], dtype=float)
        assert min(np.linalg.norm(a - e), np.linalg.norm(a + e)) < 1e-8


@pytest.mark.parametrize("name", FIXTURES)
def test_reported_elements_are_symmetries(name):
    p = fixtures.load(name)
    c = classify(p)
    stack = DensityStack(p)
    for O in c.finite_elements:
        assert is_orthogonal(O, 1e-9)
    for C in c.group_elements():
        assert stack.residual(C) < 1e-8
    # one-parameter subgroups generated by the tangent space also preserve the density
    for T in c.tangent_generators():
        for t in (0.3, 1.7):
            assert stack.residual(expm(t * T)) < 1e-8


@pytest.mark.parametrize("name", [n for n in FIXTURES if fixtures.document(n)["expected_type"]
                                  in ("Trivial", "Minimal", "T3a", "T3c")])
def test_finite_groups_are_closed(name):
    c = classify(fixtures.load(name))
    els = c.finite_elements
    assert contains(els, np.eye(c.n)) and contains(els, -np.eye(c.n))
    for X, Y in itertools.product(els, els):
        assert contains(els, X @ Y)


class TestSymmetryElement:
    def test_signs(self):
        p = fixtures.load("example_5_2")
        assert is_symmetry_element(np.eye(2), p)
        assert is_symmetry_element(-np.eye(2), p)
        assert is_symmetry_element(np.diag([1.0, -1.0]), p)
        assert not is_symmetry_element(rotation2(np.pi / 4), p)

    def test_shape(self):
        with pytest.raises(ShapeError):
            is_symmetry_element(np.eye(3), fixtures.load("example_5_2"))

    def test_imaginary_part_matters(self):
        # a reflection preserves Re(AA*) = I but flips Im(AA*)
        p = fixtures.load("example_5_1")
        assert not is_symmetry_element(np.diag([1.0, -1.0]), p)
        assert is_symmetry_element(rotation2(0.4), p)


class TestMaximal:
    def test_scalar(self):
        r = maximal_test(validate(0.3 * np.eye(2), np.eye(2)))
        assert r.is_maximal
        assert r.d_value == pytest.approx(0.3)

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_single_parameter_any_gram(self, n, rng):
        # D = d I + skew part relative to Re(AA*) keeps D R + R D^T = 2 d R
        A = rng.standard_normal((n, n))
        R = A @ A.T
        X = rng.standard_normal((n, n))
        D = 0.2 * np.eye(n) + (X - X.T) @ np.linalg.inv(R)
        r = maximal_test(validate(D, A))
        assert r.is_maximal
        assert r.d_value == pytest.approx(0.2)

    def test_diagonal_not_maximal(self):
        assert not maximal_test(fixtures.load("example_5_2")).is_maximal

    def test_complex_not_maximal(self):
        assert not maximal_test(fixtures.load("example_5_1")).is_maximal


class TestMinimal:
    S = np.diag([0.1, 0.2, 0.3])

    def test_connected(self):
        L = 0.05 * np.array([[0, 1, 1], [-1, 0, 1], [-1, -1, 0]])
        r = minimal_test(derive(validate(self.S + L, np.eye(3))))
        assert r.in_M and r.L_block_connected
        assert r.S_gap == pytest.approx(0.1)

    @pytest.mark.parametrize("pos", [(0, 1), (0, 2), (1, 2)])
    def test_forbidden_forms(self, pos):
        L = np.zeros((3, 3))
        L[pos] = 0.5
        L = L - L.T
        assert not minimal_test(derive(validate(self.S + L, np.eye(3)))).in_M

    def test_no_skew_part(self):
        assert not minimal_test(derive(validate(self.S, np.eye(3)))).in_M

    def test_repeated_symmetric_eigenvalue(self):
        L = 0.05 * np.array([[0, 1, 1], [-1, 0, 1], [-1, -1, 0]])
        assert not minimal_test(derive(validate(np.diag([0.1, 0.1, 0.3]) + L, np.eye(3)))).in_M


class TestDimensionTwo:
    def test_trivial(self):
        c = classify2(fixtures.load("example_5_2"))
        assert c.group_type == "Trivial"
        expected = [np.eye(2), -np.eye(2), np.diag([1.0, -1.0]), np.diag([-1.0, 1.0])]
        assert len(c.finite_elements) == 4
        assert all(contains(c.finite_elements, E) for E in expected)

    def test_rotational(self):
        c = classify2(fixtures.load("example_5_1"))
        assert c.group_type == "Rotational"
        assert c.lie_dimension == 1
        G = c.lie_basis[0]
        assert min(np.linalg.norm(G - J2 / np.sqrt(2)), np.linalg.norm(G + J2 / np.sqrt(2))) < 1e-10

    def test_reflection_variant_is_maximal(self):
        # sqrt2 A2 in O(2) \ SO(2) makes A2 A1^T symmetric, so Im(AA*) = 0
        ref = np.array([[1.0, 0.0], [0.0, -1.0]])
        p = validate(0.3 * np.eye(2), (rotation2(np.pi / 3) + 1j * ref) / np.sqrt(2))
        assert np.linalg.norm(p.im_aa) < 1e-15
        assert classify2(p).group_type == "Maximal"

    def test_minimal(self):
        p = validate(np.diag([0.1, 0.3]) + 0.2 * J2, np.eye(2))
        c = classify2(p)
        assert c.group_type == "Minimal"
        assert len(c.finite_elements) == 2

    def test_maximal_with_nontrivial_gram(self):
        A = np.array([[2.0, 0.5], [0.0, 1.0]])
        c = classify2(validate(0.25 * np.eye(2), A))
        assert c.group_type == "Maximal"
        # the group is W O(2) W^{-1}
        R = A @ A.T
        for C in c.group_elements():
            assert_allclose(C @ R @ C.T, R, atol=1e-10)

    def test_wrong_dimension(self):
        with pytest.raises(ShapeError):
            classify3(fixtures.load("example_5_2"))


class TestDimensionThree:
    def test_scalar(self):
        c = classify3(validate(0.3 * np.eye(3), np.eye(3)))
        assert c.group_type == "T3e"
        assert c.lie_dimension == 3

    def test_diagonal(self):
        c = classify3(fixtures.load("example_5_4"))
        assert c.group_type == "T3c"
        assert len(c.finite_elements) == 8
        for signs in itertools.product((1.0, -1.0), repeat=3):
            assert contains(c.finite_elements, np.diag(signs))

    def test_double_eigenvalue(self):
        c = classify3(fixtures.load("example_5_5"))
        assert c.group_type == "T3d"
        assert c.lie_dimension == 1
        assert_allclose(np.abs(c.axes[0]), [0.0, 0.0, 1.0], atol=1e-10)

    def test_jordan(self):
        c = classify3(fixtures.load("example_5_3"))
        assert c.group_type == "T3b"
        assert c.lie_dimension == 0

    def test_planar_imaginary_part(self):
        c = classify3(fixtures.load("example_5_6"))
        assert c.group_type == "T3f"
        assert c.lie_dimension == 1

    def test_minimal(self):
        c = classify3(fixtures.load("minimal_3"))
        assert c.group_type == "T3a"
        assert len(c.finite_elements) == 2

    def test_time_reversible_never_planar_type(self, rng):
        for _ in range(8):
            A = rng.standard_normal((3, 3))
            if rng.random() < 0.5:
                A = A + 1j * A @ np.diag(rng.standard_normal(3)) @ A.T @ np.linalg.inv(A.T)
            D = 0.2 * np.eye(3) if rng.random() < 0.5 else rng.standard_normal((3, 3)) * 0.1
            p = validate(D, A)
            if not is_time_reversible(p):
                continue
            assert classify3(p).group_type != "T3f"


class TestGeneral:
    def test_scalar(self):
        c = classify(validate(0.2 * np.eye(4), np.eye(4)))
        assert c.group_type == "General"
        assert c.lie_dimension == 6

    def test_diagonal(self):
        c = classify(validate(np.diag([0.1, 0.2, 0.3, 0.4]), np.eye(4)))
        assert c.lie_dimension == 0
        assert len(c.finite_elements) == 16

    def test_minimal_random(self, rng):
        for _ in range(3):
            p = validate(rng.standard_normal((4, 4)) * 0.1, np.eye(4))
            assert minimal_test(derive(p)).in_M
            c = classify(p)
            assert c.lie_dimension == 0
            assert len(c.finite_elements) == 2
            assert contains(c.finite_elements, np.eye(4)) and contains(c.finite_elements, -np.eye(4))

    def test_one_dimensional_rejected(self):
        with pytest.raises(ShapeError):
            classify(validate(np.array([[0.1]]), np.array([[1.0]])))


class TestConjugation:
    @pytest.mark.parametrize("name", ["example_5_2", "example_5_4", "minimal_3", "example_5_5", "example_5_1"])
    def test_type_and_elements_follow_conjugation(self, name, rng):
        p = fixtures.load(name)
        Q = random_orthogonal(p.n, rng)
        c, cq = classify(p), classify(p.conjugated(Q))
        assert cq.group_type == c.group_type
        assert cq.lie_dimension == c.lie_dimension
        stack = DensityStack(p.conjugated(Q))
        for C in c.group_elements():
            assert stack.residual(Q @ C @ Q.T) < 1e-8
            if c.is_finite:
                assert contains(cq.group_elements(), Q @ C @ Q.T, 1e-7)

    def test_invertible_conjugation(self, rng):
        p = fixtures.load("example_5_4")
        P = np.eye(3) + 0.3 * rng.standard_normal((3, 3))
        assert classify(p.conjugated(P)).group_type == "T3c"


class TestDualReport:
    def test_near_threshold(self):
        p = validate(np.diag([0.1, 0.1 + 5e-8, 0.3]), np.eye(3))
        c = classify(p)
        assert c.ambiguous
        assert set(c.dual_report) == {"merge", "split"}
        assert any("dual report" in s for s in c.diagnostics)

    def test_clear_case_has_no_report(self):
        c = classify(fixtures.load("example_5_4"))
        assert c.dual_report is None

    def test_report_dict(self):
        doc = classify(fixtures.load("example_5_5")).to_dict()
        assert doc["group_type"] == "T3d"
        assert doc["lie_dimension"] == 1
        assert len(doc["axes"][0]) == 3


class TestGeometryHelpers:
    def test_rot_and_ref(self, rng):
        v = rng.standard_normal(3)
        u = v / np.linalg.norm(v)
        assert_allclose(rot_pi(v) @ u, u)
        assert_allclose(ref0(v) @ u, -u)
        assert_allclose(rot_pi(v), -ref0(v))
        assert np.linalg.det(rot_pi(v)) == pytest.approx(1.0)

    def test_complete_frame(self, rng):
        v = rng.standard_normal(4)
        F = complete_frame(v)
        assert is_orthogonal(F, 1e-12)
        assert_allclose(F[:, -1], v / np.linalg.norm(v))

    def test_skew_axis(self, rng):
        X = rng.standard_normal((3, 3))
        L = X - X.T
        a = skew_axis3(L)
        assert_allclose(L @ a, 0.0, atol=1e-13)
        assert np.linalg.norm(a) == pytest.approx(1.0)


def test_default_tolerances_used():
    p = fixtures.load("example_5_2")
    assert classify(p, tol=DEFAULT_TOLERANCES).group_type == classify(p).group_type
