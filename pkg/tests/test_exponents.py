import numpy as np
import pytest
from numpy.testing import assert_allclose

from ofbm_sym import fixtures
from ofbm_sym.exponents import (
    commuting_exponent,
    density_invariance_check,
    exponent_set,
    report,
    rotational_commuting_form,
    tangent_space,
)
from ofbm_sym.matfun import J2, expm
from ofbm_sym.params import validate
from ofbm_sym.symmetry import classify


def classified(name):
    p = fixtures.load(name)
    return p, classify(p)


class TestTangentSpace:
    def test_minimal_is_empty(self):
        p, c = classified("minimal_2")
        assert tangent_space(c) == []
        es = exponent_set(p, c)
        assert es.unique
        assert_allclose(es.base_exponent, p.H)

    def test_maximal_plane(self):
        A = np.array([[1.5, 0.3], [0.0, 0.8]])
        p = validate(0.2 * np.eye(2), A)
        c = classify(p)
        T = tangent_space(c)
        assert len(T) == 1
        W = c.conjugacy_W
        target = W @ J2 @ np.linalg.inv(W)
        # proportional to W J W^{-1}
        coef = np.sum(T[0] * target) / np.sum(target * target)
        assert_allclose(T[0], coef * target, atol=1e-12)

    def test_full_rotation_group(self):
        p, c = classified("example_2_1_n3")
        assert len(tangent_space(c)) == 3


class TestExponentSet:
    def test_diagonal_unique(self):
        p, c = classified("example_5_2")
        es = exponent_set(p, c)
        assert es.unique
        assert_allclose(es.base_exponent, np.diag([0.7, 0.9]))

    def test_single_parameter(self):
        p = validate(0.2 * np.eye(2), np.eye(2))
        es = exponent_set(p, classify(p))
        assert es.dimension == 1
        assert_allclose(es.base_exponent, 0.7 * np.eye(2))
        X = es.member([0.4])
        assert_allclose(X - X.T, 2 * 0.4 * es.tangent_basis[0], atol=1e-14)
        assert_allclose(0.5 * (X + X.T), 0.7 * np.eye(2), atol=1e-14)

    def test_axis_rotation(self):
        p, c = classified("example_5_5")
        es = exponent_set(p, c)
        assert es.dimension == 1
        T = es.tangent_basis[0]
        assert_allclose(T[2], 0.0, atol=1e-12)
        assert_allclose(T[:, 2], 0.0, atol=1e-12)

    def test_member_wrong_length(self):
        p, c = classified("example_5_5")
        with pytest.raises(ValueError):
            exponent_set(p, c).member([1.0, 2.0])

    def test_members_are_exponents(self):
        # every member E satisfies c^E B(t) = B(ct) in distribution: check on the density
        p, c = classified("example_5_1")
        es = exponent_set(p, c)
        for t in (-1.0, 0.5):
            E = es.member([t])
            D2 = E - 0.5 * np.eye(2)
            q = validate(D2, p.A)
            for x in (0.3, 2.0):
                g1 = expm(-np.log(x) * p.D) @ p.aa @ expm(-np.log(x) * p.D).T
                g2 = expm(-np.log(x) * q.D) @ q.aa @ expm(-np.log(x) * q.D).T
                assert_allclose(g1, g2, atol=1e-12)


class TestCommutingExponent:
    def test_single_parameter(self):
        p = validate(0.3 * np.eye(3), np.eye(3))
        h0 = commuting_exponent(p, classify(p))
        assert_allclose(h0.H0, 0.8 * np.eye(3), atol=1e-13)
        assert h0.residual < 1e-12
        assert not h0.flagged

    def test_rotational_form(self):
        p, c = classified("example_5_1")
        h0 = commuting_exponent(p, c)
        assert h0.residual < 1e-9
        H0 = h0.H0
        # a I + b J
        a, b = 0.5 * np.trace(H0), 0.5 * np.sum(H0 * J2)
        assert_allclose(H0, a * np.eye(2) + b * J2, atol=1e-10)
        assert_allclose(rotational_commuting_form(a + 1j * b), H0, atol=1e-10)
        for C in c.group_elements() + c.tangent_generators():
            assert_allclose(H0 @ C, C @ H0, atol=1e-9)

    def test_minimal_is_H(self):
        p, c = classified("minimal_3")
        h0 = commuting_exponent(p, c)
        assert_allclose(h0.H0, p.H)
        assert h0.residual < 1e-12

    def test_difference_in_tangent_space(self):
        p, c = classified("example_5_5")
        h0 = commuting_exponent(p, c)
        T = tangent_space(c)[0]
        delta = h0.H0 - p.H
        coef = np.sum(delta * T) / np.sum(T * T)
        assert_allclose(delta, coef * T, atol=1e-12)

    def test_rotational_form_identity(self):
        h = 0.7 - 0.2j
        assert_allclose(rotational_commuting_form(h), 0.7 * np.eye(2) - 0.2 * J2, atol=1e-15)


class TestDensityInvariance:
    def test_single_parameter(self):
        p = validate(0.2 * np.eye(2), np.eye(2))
        assert density_invariance_check(p, classify(p), t_grid=(1.0,)) < 1e-10

    def test_rotational(self):
        p, c = classified("example_5_1")
        assert density_invariance_check(p, c, t_grid=(-1.0, -0.5, 0.5, 1.0)) < 1e-9

    def test_finite_group(self):
        p, c = classified("minimal_2")
        assert density_invariance_check(p, c) == 0.0

    @pytest.mark.parametrize("name", ["example_5_5", "example_5_6", "example_2_1_n3", "example_6_1"])
    def test_continuous_groups(self, name):
        p, c = classified(name)
        assert density_invariance_check(p, c) < 1e-9


def test_report_keys():
    p, c = classified("example_5_5")
    doc = report(p, c)
    assert set(doc) == {"H", "tangent_basis", "unique", "H0", "H0_residual"}
    assert doc["unique"] is False
    assert len(doc["tangent_basis"]) == 1
