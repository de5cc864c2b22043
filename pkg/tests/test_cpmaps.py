"""Tests for the finite dimensional channel toolkit.

Oracle notes: the Choi/Kraus round trip is its own oracle (two routes
to the same action), the depolarizing channel's effects are computed by
hand (matrix units over sqrt(dim)), and the effect-relation recovery
plants a known mixing unitary first and recovers it.
"""

import numpy as np
import pytest

from nearlab.errors import (
    ChannelMismatch,
    DomainViolation,
    NoIsometry,
    NotComposed,
    NotFixingAlgebra,
    NotPSD,
    NotUnital,
)
from nearlab.cpmaps import (
    FiniteChannel,
    KrausSet,
    StinespringDilation,
    compose,
    diagonal_compression_dilation,
    effect_relation,
    kraus_from_choi,
    minimal_stinespring,
    random_channel,
    random_unital_channel,
    verify_commutant_effects,
    verify_dilation_factorization,
    verify_minimality,
)

RNG = np.random.default_rng(31415)


def rand_mat(n, m=None):
    m = n if m is None else m
    return RNG.normal(size=(n, m)) + 1j * RNG.normal(size=(n, m))


def rand_unitary(n):
    return np.linalg.qr(rand_mat(n))[0]


class TestFiniteChannel:
    def test_identity_action(self):
        ch = FiniteChannel.identity(3)
        A = rand_mat(3)
        assert np.allclose(ch.apply(A), A, atol=1e-12)
        assert ch.is_unital() and ch.is_trace_preserving()

    def test_depolarizing_action(self):
        ch = FiniteChannel.depolarizing(2)
        A = rand_mat(2)
        assert np.allclose(ch.apply(A), np.trace(A) * np.eye(2) / 2,
                           atol=1e-12)
        assert ch.is_unital() and ch.is_trace_preserving()

    def test_kraus_action_matches_choi_action(self):
        ops = [rand_mat(3, 2) for _ in range(3)]
        ch = FiniteChannel.from_kraus(ops)
        ks = KrausSet(tuple(ops))
        A = rand_mat(2)
        assert np.max(np.abs(ch.apply(A) - ks.apply(A))) < 1e-12

    def test_rejects_non_psd(self):
        bad = -np.eye(4)
        with pytest.raises(NotPSD):
            FiniteChannel(2, 2, bad)

    def test_rejects_non_hermitian(self):
        j = np.eye(4, dtype=complex)
        j[0, 1] = 1.0
        with pytest.raises(DomainViolation):
            FiniteChannel(2, 2, j)

    def test_duality_trace_identity(self):
        ch = random_unital_channel(RNG, 3, 4)
        d = ch.dual()
        worst = 0.0
        for _ in range(20):
            T, A = rand_mat(3), rand_mat(3)
            lhs = np.trace(T @ ch.apply(A))
            rhs = np.trace(d.apply(T) @ A)
            worst = max(worst, abs(lhs - rhs))
        assert worst < 1e-9

    def test_unital_iff_dual_trace_preserving(self):
        ch = random_unital_channel(RNG, 3, 5)
        assert ch.is_unital() and not ch.is_trace_preserving()
        assert ch.dual().is_trace_preserving() and not ch.dual().is_unital()
        # and the reverse direction, on the dual itself
        tp = ch.dual()
        assert tp.dual().is_unital()
        assert np.allclose(tp.dual().choi, ch.choi, atol=1e-12)

    def test_mix_and_compose(self):
        u1, u2 = rand_unitary(2), rand_unitary(2)
        mixed = FiniteChannel.mix([FiniteChannel.unitary(u1),
                                   FiniteChannel.unitary(u2)], [0.25, 0.75])
        A = rand_mat(2)
        want = 0.25 * u1 @ A @ u1.conj().T + 0.75 * u2 @ A @ u2.conj().T
        assert np.max(np.abs(mixed.apply(A) - want)) < 1e-12
        comp = compose(FiniteChannel.depolarizing(2), mixed)
        assert np.max(np.abs(comp.apply(A)
                             - np.trace(A) * np.eye(2) / 2)) < 1e-12

    def test_json_roundtrip(self):
        ch = random_channel(RNG, 2, 3, rank=4)
        back = FiniteChannel.from_json(ch.to_json())
        assert ch.distance(back) < 1e-12
        assert (back.dim_in, back.dim_out) == (2, 3)


class TestKrausExtraction:
    def test_identity_single_operator(self):
        ks = kraus_from_choi(FiniteChannel.identity(2))
        assert ks.count == 1
        # identity up to a global phase
        E = ks.ops[0]
        phase = E[0, 0] / abs(E[0, 0])
        assert np.max(np.abs(E / phase - np.eye(2))) < 1e-12

    def test_depolarizing_matrix_units(self):
        ks = kraus_from_choi(FiniteChannel.depolarizing(2))
        assert ks.count == 4
        assert ks.unitality_defect() < 1e-12
        # each effect is a matrix unit over sqrt(2), in some order/phase
        found = set()
        for E in ks.ops:
            idx = np.unravel_index(np.argmax(np.abs(E)), (2, 2))
            assert abs(abs(E[idx]) - 1 / np.sqrt(2)) < 1e-12
            assert np.sum(np.abs(E) > 1e-12) == 1
            found.add(idx)
        assert found == {(0, 0), (0, 1), (1, 0), (1, 1)}

    def test_count_equals_rank(self):
        ch = random_channel(RNG, 3, 3, rank=3)
        assert kraus_from_choi(ch).count == 3

    def test_roundtrip_sweep(self):
        # fifty random channels, dimensions up to five
        for _ in range(50):
            n = int(RNG.integers(2, 6))
            m = int(RNG.integers(2, 6))
            r = int(RNG.integers(1, n * m + 1))
            ch = random_channel(RNG, n, m, rank=r)
            ks = kraus_from_choi(ch)
            assert ks.count == r
            assert ch.distance(ks.to_channel()) < 1e-9

    def test_unital_effects_are_contractions(self):
        ch = random_unital_channel(RNG, 4, 3)
        for E in kraus_from_choi(ch).ops:
            assert np.linalg.norm(E, 2) <= 1 + 1e-10


class TestStinespring:
    def test_dilation_reproduces_channel(self):
        ch = random_unital_channel(RNG, 3, 4)
        dil = minimal_stinespring(ch)
        assert dil.isometry_defect() < 1e-10
        worst = 0.0
        for a in range(3):
            for b in range(3):
                unit = np.zeros((3, 3))
                unit[a, b] = 1.0
                worst = max(worst, np.max(np.abs(dil.compress(unit)
                                                 - ch.apply(unit))))
        assert worst < 1e-9

    def test_identity_multiplicity_one(self):
        dil = minimal_stinespring(FiniteChannel.identity(3))
        assert dil.multiplicity == 1
        phase = dil.V[0, 0] / abs(dil.V[0, 0])
        assert np.max(np.abs(dil.V / phase - np.eye(3))) < 1e-12

    def test_depolarizing_multiplicity(self):
        assert minimal_stinespring(FiniteChannel.depolarizing(2)
                                   ).multiplicity == 4

    def test_minimality_rank(self):
        ch = random_unital_channel(RNG, 3, 3)
        rep = verify_minimality(minimal_stinespring(ch))
        assert rep["pass"] and rep["rank"] == rep["expected"]

    def test_rejects_non_unital(self):
        ch = random_channel(RNG, 3, 3, rank=2)
        assert not ch.is_unital()
        with pytest.raises(NotUnital):
            minimal_stinespring(ch)


class TestEffectRelation:
    def test_scalar_redistribution(self):
        E = rand_mat(3)
        E /= np.linalg.norm(E, 2)
        a, b = 0.6, 0.8j
        k1 = KrausSet((E,))
        k2 = KrausSet((a * E, b * E))
        U = effect_relation(k1, k2)
        assert U.shape == (2, 1)
        assert np.allclose(U[:, 0], [np.conj(a), np.conj(b)], atol=1e-10)
        assert abs(np.linalg.norm(U[:, 0]) - 1.0) < 1e-10

    def test_recovers_planted_mixing_unitary(self):
        ch = random_unital_channel(RNG, 3, 4)
        ks = kraus_from_choi(ch)
        M = rand_unitary(ks.count)
        mixed = KrausSet(tuple(
            sum(M[j, i] * ks.ops[i] for i in range(ks.count))
            for j in range(ks.count)))
        U = effect_relation(ks, mixed)
        assert np.max(np.abs(U - M.conj())) < 1e-8

    def test_span_equality_sweep(self):
        for _ in range(20):
            n = int(RNG.integers(2, 5))
            ch = random_unital_channel(RNG, n, int(RNG.integers(2, 5)))
            ks = kraus_from_choi(ch)
            M = rand_unitary(ks.count)
            other = KrausSet(tuple(
                sum(M[j, i] * ks.ops[i] for i in range(ks.count))
                for j in range(ks.count)))
            U = effect_relation(ks, other)
            assert np.max(np.abs(U.conj().T @ U
                                 - np.eye(ks.count))) < 1e-8

    def test_rejects_different_channels(self):
        k1 = kraus_from_choi(random_unital_channel(RNG, 2, 2))
        k2 = kraus_from_choi(random_unital_channel(RNG, 2, 2))
        with pytest.raises(ChannelMismatch):
            effect_relation(k1, k2)


class TestCommutantEffects:
    def test_diagonal_unitary_conjugation(self):
        ch = FiniteChannel.unitary(np.diag(np.exp(2j * np.pi
                                                  * RNG.random(3))))
        rep = verify_commutant_effects(ch)
        assert rep["pass"]
        assert rep["max_offdiagonal"] < 1e-10
        assert rep["trace_defect"] < 1e-10

    def test_mix_of_diagonal_conjugations(self):
        chans = [FiniteChannel.unitary(np.diag(np.exp(2j * np.pi
                                                      * RNG.random(4))))
                 for _ in range(3)]
        mixed = FiniteChannel.mix(chans, [0.5, 0.3, 0.2])
        rep = verify_commutant_effects(mixed)
        assert rep["pass"] and rep["count"] == 3

    def test_non_diagonal_conjugation_fails_precondition(self):
        h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)
        with pytest.raises(NotFixingAlgebra):
            verify_commutant_effects(FiniteChannel.unitary(h))


class TestDilationFactorization:
    def test_identity_then_compression(self):
        W = np.linalg.qr(rand_mat(3, 2))[0]
        rep = verify_dilation_factorization(FiniteChannel.identity(3),
                                            FiniteChannel.compression(W))
        assert rep["pass"]
        assert rep["multiplicities"] == (1, 1)
        assert rep["connect_residual"] < 1e-8

    def test_compression_then_compression(self):
        W1 = np.linalg.qr(rand_mat(4, 3))[0]
        W2 = np.linalg.qr(rand_mat(3, 2))[0]
        rep = verify_dilation_factorization(FiniteChannel.compression(W1),
                                            FiniteChannel.compression(W2))
        assert rep["pass"] and rep["norm_gap"] <= 1e-10

    def test_unitary_conjugation_connects_exactly(self):
        u = rand_unitary(3)
        rep = verify_dilation_factorization(
            FiniteChannel.unitary(u), FiniteChannel.unitary(u.conj().T))
        assert rep["pass"] and rep["multiplicities"] == (1, 1)

    def test_rejects_wrong_composition(self):
        W = np.linalg.qr(rand_mat(3, 2))[0]
        phi1 = FiniteChannel.identity(3)
        phi = FiniteChannel.compression(W)
        wrong = FiniteChannel.depolarizing(3)
        # wrong has the right input dimension but the wrong output
        with pytest.raises((NotComposed, DomainViolation)):
            verify_dilation_factorization(phi1, phi, phi2=wrong)
        other = FiniteChannel.compression(np.linalg.qr(rand_mat(3, 2))[0])
        with pytest.raises(NotComposed):
            verify_dilation_factorization(phi1, phi, phi2=other)

    def test_cyclic_subspace_dilation(self):
        # subspace containing an everywhere nonzero vector
        W = np.linalg.qr(np.array([[1.0, 0.3], [1.0, -0.5],
                                   [1.0, 1.0]]))[0]
        rep = diagonal_compression_dilation(W)
        assert rep["pass"] and rep["multiplicity"] == 1
        assert rep["span_rank"] == 3
        assert rep["compat_residual"] < 1e-12

    def test_coordinate_subspace_not_cyclic(self):
        W = np.zeros((3, 2))
        W[0, 0] = 1.0
        W[1, 1] = 1.0
        with pytest.raises(DomainViolation):
            diagonal_compression_dilation(W)
