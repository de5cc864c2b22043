"""Tests for model spaces: kernels, projections, Clark samples.

Closed-form fixtures (theta1 = (z-i)/(z+i), theta2 = theta1^2):

    theta1(x) = -1 at x = 0,   theta1(x) = i at x = -1
    theta2(x) = -1 at x in {-1, 1}
    theta2(x) = i  at x in {-cot(pi/8), -cot(5 pi/8)}
                      = {-(1+sqrt 2), sqrt 2 - 1}

and the second family interlaces the first.
"""

import numpy as np
import pytest

from nearlab.errors import AlphaAtInfinity, DomainViolation, PoleCollision
from nearlab.inner import InnerFn
from nearlab.modelspace import ModelSpace, clark_basis, clark_expand, clark_nodes
from nearlab.ratfield import RationalFn, l2_inner, l2_norm

RNG = np.random.default_rng(515)


def random_theta(rng, max_deg=5) -> InnerFn:
    n = int(rng.integers(1, max_deg + 1))
    zeros = rng.uniform(-2, 2, n) + 1j * rng.uniform(0.3, 2.5, n)
    return InnerFn(zeros, np.exp(1j * rng.uniform(0, 2 * np.pi)))


class TestKernel:
    def test_reproduces_at_complex_points(self):
        for _ in range(5):
            th = random_theta(RNG)
            sp = ModelSpace(th)
            f = sp.random_element(RNG)
            w = complex(RNG.uniform(-2, 2), RNG.uniform(0.2, 2))
            got = l2_inner(f, sp.kernel(w))
            assert abs(got - f(w)) < 1e-9 * (1 + abs(f(w)))

    def test_reproduces_at_real_points(self):
        th = InnerFn([0.5 + 1j, -1 + 0.5j], np.exp(0.2j))
        sp = ModelSpace(th)
        f = sp.random_element(RNG)
        for x in (-1.8, 0.0, 2.2):
            got = l2_inner(f, sp.kernel(x))
            assert abs(got - f(x)) < 1e-9 * (1 + abs(f(x)))

    def test_boundary_diagonal_is_phase_derivative(self):
        th = random_theta(RNG, 4)
        sp = ModelSpace(th)
        xs = np.array([-2.1, 0.3, 1.7])
        for x in xs:
            k = sp.kernel(float(x))
            assert abs(k(float(x)) - th.phase_derivative(float(x)) / (2 * np.pi)) < 1e-10

    def test_kernel_lies_in_space(self):
        th = InnerFn([1j, 0.4 + 0.9j])
        sp = ModelSpace(th)
        k = sp.kernel(0.3 + 0.8j)
        assert sp.contains(k)

    def test_pole_collision(self):
        sp = ModelSpace(InnerFn([1j]))
        with pytest.raises(PoleCollision):
            sp.kernel(-1j)

    def test_normalized_kernel_unit_norm(self):
        sp = ModelSpace(InnerFn([0.3 + 1.1j, -0.8 + 0.6j]))
        k = sp.normalized_kernel(0.5 + 0.7j)
        assert abs(l2_norm(k) - 1.0) < 1e-10


class TestSpace:
    def test_element_degree_guard(self):
        sp = ModelSpace(InnerFn([1j, 2j]))
        with pytest.raises(DomainViolation):
            sp.element([1.0, 0.0, 3.0])

    def test_trivial_space_rejected(self):
        with pytest.raises(DomainViolation):
            ModelSpace(InnerFn([], 1.0))

    def test_gram_psd_and_well_conditioned(self):
        sp = ModelSpace(InnerFn([0.5 + 1j, -1 + 0.5j, 0.1 + 2j]))
        G = sp.gram()
        w = np.linalg.eigvalsh(G)
        assert w[0] > 0
        assert w[-1] / w[0] < 1e8

    def test_rank_equals_degree(self):
        # Gram over more anchors than dim must drop rank to dim
        th = InnerFn([0.5 + 1j, -1 + 0.5j])
        sp = ModelSpace(th)
        extra = np.array([1j, 1 + 1j, -1 + 2j, 0.5 + 0.5j, 2 + 1.5j])
        G = sp.gram(extra)
        w = np.sort(np.linalg.eigvalsh(G))[::-1]
        assert w[1] / max(w[2], 1e-300) > 1e8

    def test_projection_fixes_members(self):
        sp = ModelSpace(InnerFn([0.5 + 1j, -1 + 0.5j, 2.2j]))
        f = sp.random_element(RNG)
        r = f - sp.project(f)
        assert l2_norm(r) < 1e-9 * (1 + l2_norm(f))

    def test_projection_kills_theta_h2(self):
        th = InnerFn([0.5 + 1j, -1 + 0.5j])
        sp = ModelSpace(th)
        h = RationalFn.from_factored(1.0, [], [-1.3j])  # H2 of the upper half plane
        f = th.as_rational() * h
        p = sp.project(f)
        assert l2_norm(p) < 1e-9

    def test_projection_is_orthogonal(self):
        sp = ModelSpace(InnerFn([1j, 0.4 + 0.9j]))
        f = RationalFn.from_factored(1.0, [0.2], [-0.5j, -2j, 1 + 1j])
        p = sp.project(f)
        for w in sp.anchors():
            assert abs(l2_inner(f - p, sp.kernel(w))) < 1e-9

    def test_contains(self):
        sp = ModelSpace(InnerFn([1j]))
        assert sp.contains(RationalFn.from_factored(2.0, [], [-1j]))
        assert not sp.contains(RationalFn.from_factored(1.0, [], [-3j]))

    def test_json_roundtrip(self):
        sp = ModelSpace(InnerFn([0.5 + 1j], np.exp(0.4j)))
        sp2 = ModelSpace.from_json(sp.to_json())
        np.testing.assert_allclose(sp2.theta.zeros, sp.theta.zeros)


class TestClark:
    def test_degree_one_fixtures(self):
        th = InnerFn([1j])  # (z-i)/(z+i)
        np.testing.assert_allclose(clark_nodes(th, -1.0), [0.0], atol=1e-10)
        np.testing.assert_allclose(clark_nodes(th, 1j), [-1.0], atol=1e-10)

    def test_degree_two_fixtures(self):
        th = InnerFn([1j, 1j])
        np.testing.assert_allclose(clark_nodes(th, -1.0), [-1.0, 1.0],
                                   atol=1e-10)
        want = [-(1 + np.sqrt(2)), np.sqrt(2) - 1]
        np.testing.assert_allclose(clark_nodes(th, 1j), want, atol=1e-9)

    def test_interlacing_fixture(self):
        th = InnerFn([1j, 1j])
        a = clark_nodes(th, -1.0)
        b = clark_nodes(th, 1j)
        assert b[0] < a[0] < b[1] < a[1]

    def test_nodes_solve_equation(self):
        th = random_theta(RNG, 5)
        alpha = np.exp(1j * RNG.uniform(0, 2 * np.pi))
        if abs(alpha - th.at_infinity()) < 1e-6:
            alpha = -alpha
        x = clark_nodes(th, alpha)
        assert x.size == th.degree
        np.testing.assert_allclose(th(x), np.full(x.size, alpha), atol=1e-8)

    def test_alpha_at_infinity(self):
        th = InnerFn([1j], 1.0)
        with pytest.raises(AlphaAtInfinity):
            clark_nodes(th, 1.0)

    def test_alpha_modulus_guard(self):
        with pytest.raises(DomainViolation):
            clark_nodes(InnerFn([1j]), 0.5)

    def test_basis_orthonormal(self):
        th = InnerFn([0.5 + 1j, -1 + 0.5j, 0.2 + 1.8j], np.exp(0.9j))
        sp = ModelSpace(th)
        _, _, basis = clark_basis(sp, np.exp(0.3j))
        n = len(basis)
        for j in range(n):
            for k in range(n):
                v = l2_inner(basis[j], basis[k])
                assert abs(v - (1.0 if j == k else 0.0)) < 1e-8, (j, k)

    def test_basis_orthonormal_with_far_node(self):
        # alpha close to theta's boundary value at infinity launches a
        # node to ~1/angle distance; the kernel there is tiny and any
        # deflation remainder dominates pairwise orthogonality unless
        # the quotient is divided from the constant term up
        th = InnerFn([1j, 0.5 + 1.5j, -0.7 + 2.0j], 1.0)
        alpha = th.at_infinity() * np.exp(1e-3j)
        sp = ModelSpace(th)
        nodes, _, basis = clark_basis(sp, alpha)
        assert np.max(np.abs(nodes)) > 1e3
        for j in range(3):
            for k in range(3):
                v = l2_inner(basis[j], basis[k])
                assert abs(v - (1.0 if j == k else 0.0)) < 1e-10, (j, k)

    def test_parseval(self):
        th = random_theta(RNG, 4)
        sp = ModelSpace(th)
        alpha = np.exp(2.1j)
        if abs(alpha - th.at_infinity()) < 1e-6:
            alpha = -alpha
        f = sp.random_element(RNG)
        c, _ = clark_expand(sp, alpha, f)
        assert abs(np.sum(np.abs(c) ** 2) - l2_inner(f, f).real) < 1e-7 * (
            1 + l2_inner(f, f).real
        )

    def test_expansion_reconstructs(self):
        th = InnerFn([0.5 + 1j, 2j])
        sp = ModelSpace(th)
        f = sp.random_element(RNG)
        x, w, basis = clark_basis(sp, -1.0 if abs(th.at_infinity() + 1) > 1e-6 else 1j)
        g = RationalFn.const(0.0)
        for xj, wj, bj in zip(x, w, basis):
            g = g + bj * (complex(f(xj)) * np.sqrt(wj))
        assert l2_norm(f - g) < 1e-8 * (1 + l2_norm(f))
