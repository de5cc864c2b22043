"""Tests for near invariance, factorization, and the equivalence.

Hand-checkable fixtures:

* K(theta) with theta = ((z-i)/(z+i))^2 is nearly invariant and factors
  trivially: u constant, h identically 1, theta recovered exactly;
* span{1/(x+i), 1/(x+i)^3} is not nearly invariant: the hyperplane
  f(i) = 0 contains a function whose quotient by (z - i) picks up
  1/(x+i)^2, which the span misses;
* span{1/(x+i), 1/(x+2i)} is the model space of the two-point Blaschke
  product with zeros {i, 2i} in disguise, so everything goes through
  with w identically 1;
* b constant 1/2 gives a = sqrt(3)/2 and h(0) = a/(1 - b theta(0))
  = (sqrt(3)/2)/(3/2) = 1/sqrt(3) for the single-atom theta at i.
"""

import numpy as np
import pytest

from nearlab.config import DEFAULT
from nearlab.errors import (
    ContractivityViolation,
    DomainViolation,
    NoSymmetricRestriction,
    NotRestrictable,
)
from nearlab.inner import InnerFn
from nearlab.modelspace import ModelSpace
from nearlab.ratfield import RationalFn, l2_inner, l2_norm, quad_oracle, tan_grid
from nearlab.symrestrict import SubspaceSpec, build_restriction
from nearlab.nearinv import (
    check_nearly_invariant,
    check_seminvariant,
    equivalence_roundtrip,
    factor_nearly_invariant,
    generate_nearly_invariant,
    isometric_multiplier,
    random_unimodular,
)

ATOM = InnerFn(np.array([1j]), 1.0)


def cauchy(*poles):
    return RationalFn.from_factored(1.0, [], list(poles))


class TestCheckNearlyInvariant:
    def test_model_space_is_nearly_invariant(self):
        sp = SubspaceSpec.from_model_space(ModelSpace(InnerFn([1j, 1j], 1.0)))
        rep = check_nearly_invariant(sp)
        assert rep.is_nearly_invariant
        assert rep.residual < 1e-10

    def test_chain_with_gap_is_not(self):
        sp = SubspaceSpec([cauchy(-1j), cauchy(-1j, -1j, -1j)])
        rep = check_nearly_invariant(sp)
        assert not rep.is_nearly_invariant
        assert rep.residual > 1e-3
        # the witness vanishes at i but its quotient leaves the span
        assert abs(rep.witness(1j)) < 1e-12
        assert abs(l2_norm(rep.witness) - 1.0) < 1e-9

    def test_disguised_model_space(self):
        sp = SubspaceSpec([cauchy(-1j), cauchy(-2j)])
        rep = check_nearly_invariant(sp)
        assert rep.is_nearly_invariant

    def test_multiplied_model_space(self):
        rng = np.random.default_rng(5)
        th = InnerFn(np.array([1j, 0.4 + 0.8j]), 1.0)
        u = random_unimodular(rng, 2)
        sp = SubspaceSpec([u * k for k in ModelSpace(th).basis()])
        assert check_nearly_invariant(sp).is_nearly_invariant


class TestIsometricMultiplier:
    def test_zero_b_gives_unit_multiplier(self):
        h = isometric_multiplier(RationalFn.const(0.0), ATOM)
        assert h.num_degree == 0 and h.den_degree == 0
        assert abs(h(3.0) - 1.0) < 1e-12

    def test_constant_half(self):
        h = isometric_multiplier(RationalFn.const(0.5), ATOM)
        assert abs(h(0.0) - 1.0 / np.sqrt(3.0)) < 1e-12

    def test_rational_b_isometry(self):
        b = RationalFn.from_factored(0.3, [0.5], [-1.5j, -1.0 - 1.0j])
        h = isometric_multiplier(b, ATOM)
        k = ModelSpace(ATOM).basis()[0]
        lhs = quad_oracle(h * k, h * k)
        rhs = l2_inner(k, k)
        assert abs(lhs - rhs) < 1e-10

    def test_rejects_non_contraction(self):
        with pytest.raises(ContractivityViolation):
            isometric_multiplier(RationalFn.const(1.0), ATOM)
        with pytest.raises(ContractivityViolation):
            isometric_multiplier(RationalFn.from_factored(2.0, [], [-1j]),
                                 ATOM)

    def test_rejects_upper_pole(self):
        with pytest.raises(DomainViolation):
            isometric_multiplier(RationalFn.from_factored(0.1, [], [1j]),
                                 ATOM)

    def test_rejects_phi_not_vanishing_at_i(self):
        with pytest.raises(DomainViolation):
            isometric_multiplier(RationalFn.const(0.5),
                                 InnerFn(np.array([2j]), 1.0))


class TestFactorization:
    def test_model_space_factors_trivially(self):
        sp = SubspaceSpec.from_model_space(ModelSpace(InnerFn([1j, 1j], 1.0)))
        u, h, th = factor_nearly_invariant(sp)
        assert u.num_degree == 0 and u.den_degree == 0
        assert abs(abs(u(0.0)) - 1.0) < 1e-9
        assert h.num_degree == 0 and h.den_degree == 0
        assert abs(h(2j) - 1.0) < 1e-9
        zs = np.sort_complex(th.zeros)
        assert np.max(np.abs(zs - np.array([1j, 1j]))) < 1e-7
        assert abs(th(1j)) < 1e-10

    def test_disguised_model_space_recovers_both_zeros(self):
        sp = SubspaceSpec([cauchy(-1j), cauchy(-2j)])
        u, h, th = factor_nearly_invariant(sp)
        zs = np.sort_complex(th.zeros)
        assert np.max(np.abs(zs - np.array([1j, 2j]))) < 1e-9
        assert abs(h(2j) - 1.0) < 1e-9

    def test_generated_instance_recovery(self):
        rng = np.random.default_rng(11)
        sp, planted = generate_nearly_invariant(rng, 3)
        u, h, th = factor_nearly_invariant(sp)
        planted_z = np.sort_complex(planted["theta_prime"].zeros)
        got_z = np.sort_complex(th.zeros)
        assert np.max(np.abs(planted_z - got_z)) < 1e-6
        # u unimodular on the line, h analytic below it, pivot positive
        grid = tan_grid(64)
        assert np.max(np.abs(np.abs(u(grid)) - 1.0)) < 1e-9
        hp = h.poles()
        assert hp.size and np.max(hp.imag) < 0
        pivot = h(2j)
        assert abs(pivot.imag) < 1e-9 * abs(pivot) and pivot.real > 0

    def test_unrestrictable_space_raises(self):
        sp = SubspaceSpec([cauchy(-1j), cauchy(-1j, -1j, -1j)])
        with pytest.raises(NotRestrictable):
            factor_nearly_invariant(sp)


class TestSeminvariance:
    def test_model_space_is_seminvariant(self):
        sp = SubspaceSpec.from_model_space(ModelSpace(InnerFn([1j, 1j], 1.0)))
        assert check_seminvariant(sp)

    def test_unimodular_multiple_is_seminvariant(self):
        rng = np.random.default_rng(5)
        th = InnerFn(np.array([1j, 0.4 + 0.8j]), 1.0)
        u = random_unimodular(rng, 2)
        sp = SubspaceSpec([u * k for k in ModelSpace(th).basis()])
        assert check_seminvariant(sp)

    def test_generic_outer_part_is_not(self):
        rng = np.random.default_rng(11)
        sp, _ = generate_nearly_invariant(rng, 3)
        assert not check_seminvariant(sp)

    def test_plain_model_generator(self):
        rng = np.random.default_rng(3)
        sp, planted = generate_nearly_invariant(rng, 2, plain_model=True)
        assert check_seminvariant(sp)
        assert planted["w"].num_degree == 0


class TestGeneration:
    def test_planted_data_consistency(self):
        rng = np.random.default_rng(11)
        sp, planted = generate_nearly_invariant(rng, 3)
        assert len(sp.basis) == 3
        # the basis really is w times the model kernels
        w = planted["w"]
        kb = ModelSpace(planted["theta_prime"]).basis()
        for bf, k in zip(sp.basis, kb):
            d = bf - w * k
            assert l2_norm(d) < 1e-8 * l2_norm(bf)

    def test_restriction_exists_on_generated(self):
        rng = np.random.default_rng(2)
        sp, _ = generate_nearly_invariant(rng, 2)
        T = build_restriction(sp)
        assert T.dom_dim == 1
        assert T.sv_gap > 1e6


class TestExtremal:
    def test_maximizer_is_multiplied_kernel(self):
        # over the unit sphere of S = h K(theta'), Re f(i) is maximized
        # by the Riesz representer of evaluation at i, which is h times
        # the model kernel at i up to phase and positive scale
        rng = np.random.default_rng(17)
        sp, planted = generate_nearly_invariant(rng, 3,
                                                with_unimodular=False)
        G = np.array([[l2_inner(b2, b1) for b2 in sp.basis]
                      for b1 in sp.basis])
        e = np.array([b(1j) for b in sp.basis])
        f = sp.synthesize(np.linalg.solve(G, e.conj()))
        f = f * (1.0 / l2_norm(f))
        v = f(1j)
        f = f * np.conj(v / abs(v))

        pred = planted["h"] * ModelSpace(planted["theta_prime"]).kernel(1j)
        pred = pred * (1.0 / l2_norm(pred))
        pv = pred(1j)
        pred = pred * np.conj(pv / abs(pv))
        assert l2_norm(f - pred) < 1e-6

        # and no random unit vector does better
        best = f(1j).real
        for _ in range(50):
            x = rng.normal(size=3) + 1j * rng.normal(size=3)
            g = sp.synthesize(x)
            assert (g * (1.0 / l2_norm(g)))(1j).real <= best + 1e-10


class TestRoundtrip:
    @pytest.mark.parametrize("seed,degree",
                             [(0, 1), (7, 3), (13, 4), (21, 2)])
    def test_passing_seeds(self, seed, degree):
        rep = equivalence_roundtrip(seed=seed, degree=degree)
        assert rep["pass"], rep
        names = {r["check"] for r in rep["rows"]}
        assert "roundtrip-theta-zeros" in names
        assert "roundtrip-parseval" in names

    def test_alias(self):
        from nearlab.nearinv import roundtrip_theorem
        assert roundtrip_theorem is equivalence_roundtrip

    def test_degree_cap(self):
        with pytest.raises(DomainViolation):
            equivalence_roundtrip(seed=0, degree=7)
