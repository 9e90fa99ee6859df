import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ofbm_sym import fixtures
from ofbm_sym.errors import DomainError, ShapeError, ValidationError
from ofbm_sym.matfun import J2, random_orthogonal, rotation2
from ofbm_sym.params import (
    PiFamilyConfig,
    build_pi_family,
    derive,
    load_params,
    params_from_dict,
    params_to_dict,
    pi_I,
    pi_m,
    pi_m_sequence,
    pi_x,
    pi_x_batch,
    validate,
)


class TestValidate:
    def test_simple(self):
        p = validate(0.2 * np.eye(2), np.eye(2))
        assert p.full_rank and p.in_domain
        assert_allclose(p.H, 0.7 * np.eye(2))

    def test_rank_deficient(self):
        A = np.array([[1.0, 0.0], [0.0, 0.0]])
        with pytest.raises(ValidationError):
            validate(0.2 * np.eye(2), A)
        assert not validate(0.2 * np.eye(2), A, require_full_rank=False).full_rank

    def test_complex_part_restores_rank(self):
        A = np.array([[1.0, 0.0], [0.0, 0.0]]) + 1j * np.array([[0.0, 0.0], [0.0, 1.0]])
        assert validate(0.2 * np.eye(2), A).full_rank

    def test_domain(self):
        D = np.diag([0.2, 0.7])
        assert not validate(D, np.eye(2)).in_domain
        with pytest.raises(ValidationError):
            validate(D, np.eye(2), require_domain=True)

    def test_shapes(self):
        with pytest.raises(ShapeError):
            validate(np.eye(2), np.eye(3))
        with pytest.raises(ShapeError):
            validate(np.zeros((2, 3)), np.eye(2))

    def test_aa_parts(self, rng):
        A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        p = validate(np.zeros((3, 3)), A)
        assert_allclose(p.aa, A @ A.conj().T, atol=1e-13)
        assert_allclose(p.im_aa, -p.im_aa.T)

    def test_conjugated(self, rng):
        p = validate(rng.standard_normal((3, 3)) * 0.1, np.eye(3))
        Q = random_orthogonal(3, rng)
        q = p.conjugated(Q)
        assert_allclose(q.D, Q @ p.D @ Q.T, atol=1e-14)
        assert_allclose(q.re_aa, np.eye(3), atol=1e-14)


class TestDerive:
    def test_identity_gram(self, rng):
        D = rng.standard_normal((3, 3))
        d = derive(validate(D, np.eye(3)))
        assert_allclose(d.W, np.eye(3), atol=1e-14)
        assert_allclose(d.M, D, atol=1e-14)

    def test_diagonal_gram(self):
        D = np.diag([0.1, -0.2])
        d = derive(validate(D, np.diag([2.0, 3.0])))
        assert_allclose(d.W, np.diag([2.0, 3.0]), atol=1e-14)
        assert_allclose(d.M, D, atol=1e-14)

    def test_random_gram(self, rng):
        for _ in range(10):
            A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            p = validate(rng.standard_normal((4, 4)), A)
            d = derive(p)
            assert np.linalg.norm(d.W @ d.W - p.re_aa) < 1e-10 * np.linalg.norm(p.re_aa)
            assert_allclose(d.W @ d.W_inv, np.eye(4), atol=1e-10)
            assert_allclose(d.W @ d.M @ d.W_inv, p.D, atol=1e-10)


class TestPiX:
    def test_at_one(self, rng):
        A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        d = derive(validate(rng.standard_normal((3, 3)), A))
        assert_allclose(pi_x(d, 1.0), np.eye(3), atol=1e-12)

    def test_diagonal_case(self):
        d = derive(fixtures.load("example_5_2"))
        for x in (0.3, 2.0, 9.0):
            assert_allclose(pi_x(d, x), np.diag([x ** -0.4, x ** -0.8]), rtol=1e-13)

    def test_jordan_case(self):
        d = derive(fixtures.load("example_5_3"))
        for x in (0.2, 0.9, 3.0):
            lx = np.log(x)
            expected = x ** -0.4 * np.array([[1.0, -lx, 0.0], [-lx, lx ** 2 + 1.0, 0.0], [0.0, 0.0, 1.0]])
            assert_allclose(pi_x(d, x), expected, rtol=1e-12, atol=1e-14)

    def test_batch(self, rng):
        d = derive(validate(rng.standard_normal((3, 3)) * 0.3, np.eye(3)))
        xs = [0.5, 1.5, 4.0]
        for x, P in zip(xs, pi_x_batch(d, xs)):
            assert_allclose(P, pi_x(d, x), rtol=1e-13)

    def test_domain(self):
        d = derive(validate(np.zeros((2, 2)), np.eye(2)))
        with pytest.raises(DomainError):
            pi_x(d, 0.0)

    def test_symmetric_positive_definite(self, rng):
        d = derive(validate(rng.standard_normal((4, 4)), rng.standard_normal((4, 4))))
        P = pi_x(d, 2.7)
        assert_allclose(P, P.T)
        assert np.linalg.eigvalsh(P).min() > 0


class TestPiM:
    def test_first(self, rng):
        d = derive(validate(rng.standard_normal((3, 3)), rng.standard_normal((3, 3))))
        assert_allclose(pi_m(d, 1), d.M + d.M.T, atol=1e-13)

    def test_normal_exponent(self, rng):
        Q = random_orthogonal(3, rng)
        D = Q @ np.diag([0.1, 0.1, 0.3]) @ Q.T + 0.3 * (Q @ np.array([[0, 1.0, 0], [-1.0, 0, 0], [0, 0, 0]]) @ Q.T)
        d = derive(validate(D, np.eye(3)))
        assert np.linalg.norm(D @ D.T - D.T @ D) < 1e-12
        for m in range(1, 6):
            assert_allclose(pi_m(d, m), np.linalg.matrix_power(D + D.T, m), atol=1e-12)

    def test_skew_exponent(self):
        d = derive(validate(0.4 * J2, np.eye(2)))
        assert_allclose(pi_m(d, 1), 0.0, atol=1e-15)

    def test_recursion_matches_binomial(self, rng):
        d = derive(validate(rng.standard_normal((4, 4)) * 0.5, rng.standard_normal((4, 4))))
        seq = pi_m_sequence(d, 6)
        for m, P in enumerate(seq, start=1):
            assert_allclose(P, pi_m(d, m), rtol=1e-10, atol=1e-12)

    def test_taylor_expansion(self, rng):
        # Pi_x = sum_m (-ln x)^m / m! Pi^(m)
        d = derive(validate(rng.standard_normal((3, 3)) * 0.4, rng.standard_normal((3, 3))))
        x = 1.05
        u = -np.log(x)
        approx = np.eye(3) + sum(u ** m / np.prod(range(1, m + 1)) * P for m, P in enumerate(pi_m_sequence(d, 20), 1))
        assert_allclose(approx, pi_x(d, x), rtol=1e-12)

    @pytest.mark.parametrize("m", [0, -1, 1.5])
    def test_bad_order(self, m):
        d = derive(validate(np.zeros((2, 2)), np.eye(2)))
        with pytest.raises(DomainError):
            pi_m(d, m)


class TestPiI:
    def test_real(self, rng):
        p = validate(rng.standard_normal((3, 3)), rng.standard_normal((3, 3)))
        assert_allclose(pi_I(derive(p), p), 0.0, atol=1e-15)

    def test_reflection_example_vanishes(self):
        # sqrt2 A2 a reflection: A2 A1^T symmetric, so Im(AA*) = 0
        ref = np.array([[1.0, 0.0], [0.0, -1.0]])
        A = (rotation2(np.pi / 3) + 1j * ref @ rotation2(0.4)) / np.sqrt(2)
        p = validate(0.3 * np.eye(2), A)
        X = (ref @ rotation2(0.4)) @ rotation2(np.pi / 3).T
        assert_allclose(pi_I(derive(p), p), 0.5 * (X - X.T), atol=1e-14)

    def test_rotational_fixture(self):
        p = fixtures.load("example_5_1")
        P = pi_I(derive(p), p)
        assert np.linalg.norm(P) > 0.1
        assert_allclose(P, -P.T)

    def test_planar_block(self):
        p = fixtures.load("example_5_6")
        d = derive(p)
        assert_allclose(d.W, np.eye(3), atol=1e-14)
        P = pi_I(d, p)
        R = rotation2(np.pi / 3)
        Lb = 0.5 * (R - R.T)
        assert_allclose(P[:2, :2], Lb, atol=1e-14)
        assert_allclose(P[2], 0.0, atol=1e-15)
        assert_allclose(P[:, 2], 0.0, atol=1e-15)


class TestPiFamily:
    def test_single_parameter(self):
        fam = build_pi_family(derive(validate(0.3 * np.eye(3), np.eye(3))))
        assert fam.span_dimension <= 1
        if fam.span_dimension:
            B = fam.span_basis[0]
            assert_allclose(np.abs(B), np.eye(3) / np.sqrt(3), atol=1e-12)

    def test_diagonal(self):
        p = fixtures.load("example_5_2")
        fam = build_pi_family(derive(p), p)
        assert fam.span_dimension == 2
        assert not fam.warnings

    def test_jordan(self):
        p = fixtures.load("example_5_3")
        fam = build_pi_family(derive(p), p)
        assert fam.span_dimension == 3
        for B in fam.span_basis:
            assert_allclose(B[2, :2], 0.0, atol=1e-12)

    def test_generic_full_span(self, rng):
        p = validate(rng.standard_normal((3, 3)) * 0.3, rng.standard_normal((3, 3)))
        fam = build_pi_family(derive(p), p)
        assert fam.span_dimension == 6

    def test_span_contains_members(self, rng):
        p = validate(np.diag([0.1, 0.1, 0.3]), np.diag([1.0, 2.0, 0.5]))
        fam = build_pi_family(derive(p), p)
        B = np.array([b.ravel() for b in fam.span_basis]).T
        for P in fam.pi_x_values:
            v = (P - np.eye(3)).ravel()
            coef, *_ = np.linalg.lstsq(B, v, rcond=None)
            assert np.linalg.norm(B @ coef - v) < 1e-10 * max(1.0, np.linalg.norm(v))

    def test_bad_sample_points(self):
        d = derive(validate(np.zeros((2, 2)), np.eye(2)))
        with pytest.raises(DomainError):
            build_pi_family(d, config=PiFamilyConfig(sample_points=(1.0, 2.0)))


class TestDocuments:
    def test_round_trip(self, tmp_path, rng):
        A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        p = validate(rng.standard_normal((3, 3)) * 0.1, A)
        path = tmp_path / "p.json"
        path.write_text(json.dumps(params_to_dict(p)))
        q = load_params(path)
        assert_allclose(q.D, p.D)
        assert_allclose(q.A, p.A)

    def test_optional_imaginary_part(self):
        p = params_from_dict({"n": 2, "D": [[0.1, 0], [0, 0.2]], "A_re": [[1, 0], [0, 1]]})
        assert_allclose(p.A.imag, 0.0)

    def test_tolerance_override(self):
        p = params_from_dict({"n": 1, "D": [[0.1]], "A_re": [[1.0]], "tolerances": {"cluster": 1e-3}})
        assert p.tolerances.cluster == 1e-3

    @pytest.mark.parametrize("doc", [
        {"D": [[0.1]], "A_re": [[1.0]]},
        {"n": 2, "D": [[0.1]], "A_re": [[1.0]]},
        {"n": 1, "D": [[0.1]], "A_re": [[1.0]], "tolerances": {"bogus": 1.0}},
    ])
    def test_bad_documents(self, doc):
        with pytest.raises(ValidationError):
            params_from_dict(doc)

    def test_non_object(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text("[1, 2]")
        with pytest.raises(ValidationError):
            load_params(path)

    def test_all_fixtures_load(self):
        for name in fixtures.names():
            p = fixtures.load(name)
            assert p.full_rank and p.in_domain
            assert fixtures.expected_type(name)
