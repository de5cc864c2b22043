"""Finite dimensional completely positive maps as checkable linear algebra.

A channel Phi : M_n -> M_m is stored through its Choi matrix

    J = sum_ij |i><j| (x) Phi(|i><j|),

a Hermitian matrix of side n*m whose blocks are indexed by the input
pair.  Complete positivity is exactly J >= 0.  The action convention
throughout is Phi(A) = sum_i E_i A E_i^*, so

    unital             sum_i E_i E_i^* = 1,
    trace preserving   sum_i E_i^* E_i = 1,

and the Stinespring isometry of a unital channel stacks the adjoints of
the effects: V h = (E_1^* h, E_2^* h, ...), V^* (1 (x) A) V = Phi(A).

Everything here is desk scale (dimensions <= 8 or so); all maps are
materialized as dense arrays and every claim is verified by direct
matrix arithmetic rather than symbolically.
"""

from dataclasses import dataclass

import numpy as np

from .config import Tolerances, DEFAULT
from .errors import (
    ChannelMismatch,
    DomainViolation,
    NoIsometry,
    NotComposed,
    NotFixingAlgebra,
    NotPSD,
    NotUnital,
)

_PSD_FLOOR = -1e-10
_EIG_CUTOFF = 1e-12
_HERM_TOL = 1e-10


def _as_square(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainViolation(f"{name} must be a square matrix")
    return a


@dataclass(frozen=True)
class FiniteChannel:
    """Completely positive map between matrix algebras, Choi form."""

    dim_in: int
    dim_out: int
    choi: np.ndarray

    def __post_init__(self):
        n, m = self.dim_in, self.dim_out
        if n < 1 or m < 1:
            raise DomainViolation("dimensions must be positive")
        choi = np.asarray(self.choi, dtype=complex)
        if choi.shape != (n * m, n * m):
            raise DomainViolation("choi matrix has the wrong size")
        if np.max(np.abs(choi - choi.conj().T)) > _HERM_TOL * (
                1.0 + np.max(np.abs(choi))):
            raise DomainViolation("choi matrix is not Hermitian")
        choi = 0.5 * (choi + choi.conj().T)
        lo = float(np.linalg.eigvalsh(choi)[0])
        if lo < _PSD_FLOOR * (1.0 + abs(np.trace(choi))):
            raise NotPSD(f"choi minimum eigenvalue {lo:.3e}")
        object.__setattr__(self, "choi", choi)

    # blocks[i, :, j, :] = Phi(|i><j|)
    @property
    def _blocks(self) -> np.ndarray:
        n, m = self.dim_in, self.dim_out
        return self.choi.reshape(n, m, n, m)

    def apply(self, A) -> np.ndarray:
        A = np.asarray(A, dtype=complex)
        if A.shape != (self.dim_in, self.dim_in):
            raise DomainViolation("input has the wrong dimension")
        return np.einsum("ij,iajb->ab", A, self._blocks)

    def is_unital(self, tol: float = 1e-9) -> bool:
        out = self.apply(np.eye(self.dim_in))
        return np.max(np.abs(out - np.eye(self.dim_out))) <= tol

    def is_trace_preserving(self, tol: float = 1e-9) -> bool:
        tr = np.einsum("iaja->ij", self._blocks)
        return np.max(np.abs(tr - np.eye(self.dim_in))) <= tol

    def dual(self) -> "FiniteChannel":
        """Trace dual: tr(T Phi(A)) = tr(dual(T) A) for all T, A."""
        nm = self.dim_in * self.dim_out
        flipped = self._blocks.transpose(1, 0, 3, 2).conj().reshape(nm, nm)
        return FiniteChannel(self.dim_out, self.dim_in, flipped)

    def distance(self, other: "FiniteChannel") -> float:
        if (self.dim_in, self.dim_out) != (other.dim_in, other.dim_out):
            raise DomainViolation("channel dimensions differ")
        return float(np.linalg.norm(self.choi - other.choi))

    # ---- constructors ----

    @staticmethod
    def from_kraus(ops) -> "FiniteChannel":
        ops = [np.asarray(E, dtype=complex) for E in ops]
        if not ops:
            raise DomainViolation("need at least one operator")
        m, n = ops[0].shape
        stack = np.stack(ops)
        choi = np.einsum("kai,kbj->iajb", stack, stack.conj())
        return FiniteChannel(n, m, choi.reshape(n * m, n * m))

    @staticmethod
    def identity(n: int) -> "FiniteChannel":
        return FiniteChannel.from_kraus([np.eye(n)])

    @staticmethod
    def depolarizing(n: int) -> "FiniteChannel":
        """A -> tr(A) 1/n, the completely depolarizing unital channel."""
        return FiniteChannel(n, n, np.eye(n * n) / n)

    @staticmethod
    def unitary(U) -> "FiniteChannel":
        U = _as_square(U, "unitary")
        if np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) > 1e-10:
            raise DomainViolation("matrix is not unitary")
        return FiniteChannel.from_kraus([U])

    @staticmethod
    def compression(W) -> "FiniteChannel":
        """A -> W^* A W for an isometry W onto a subspace; unital CPU."""
        W = np.asarray(W, dtype=complex)
        n, s = W.shape
        if np.max(np.abs(W.conj().T @ W - np.eye(s))) > 1e-10:
            raise DomainViolation("columns are not orthonormal")
        return FiniteChannel.from_kraus([W.conj().T])

    @staticmethod
    def mix(channels, weights) -> "FiniteChannel":
        weights = np.asarray(weights, dtype=float)
        if np.min(weights) < 0 or abs(weights.sum() - 1.0) > 1e-12:
            raise DomainViolation("mixture weights must be a distribution")
        choi = sum(w * ch.choi for w, ch in zip(weights, channels))
        first = channels[0]
        return FiniteChannel(first.dim_in, first.dim_out, choi)

    # ---- serialization ----

    def to_json(self) -> str:
        import json
        flat = [[float(z.real), float(z.imag)] for z in self.choi.ravel()]
        return json.dumps({"dim_in": self.dim_in, "dim_out": self.dim_out,
                           "choi": flat})

    @staticmethod
    def from_json(text: str) -> "FiniteChannel":
        import json
        d = json.loads(text)
        n, m = int(d["dim_in"]), int(d["dim_out"])
        vals = np.array([complex(re, im) for re, im in d["choi"]])
        return FiniteChannel(n, m, vals.reshape(n * m, n * m))


def compose(outer: FiniteChannel, inner: FiniteChannel) -> FiniteChannel:
    """The channel outer o inner."""
    if inner.dim_out != outer.dim_in:
        raise DomainViolation("composition dimensions do not match")
    n, m = inner.dim_in, outer.dim_out
    blocks = np.empty((n, m, n, m), dtype=complex)
    inner_blocks = inner._blocks
    for i in range(n):
        for j in range(n):
            blocks[i, :, j, :] = outer.apply(inner_blocks[i, :, j, :])
    return FiniteChannel(n, m, blocks.reshape(n * m, n * m))


@dataclass(frozen=True)
class KrausSet:
    """A family of effect operators implementing a channel."""

    ops: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(E, dtype=complex) for E in self.ops)
        if not ops:
            raise DomainViolation("empty effect family")
        shape = ops[0].shape
        if any(E.shape != shape for E in ops):
            raise DomainViolation("effects must share a shape")
        object.__setattr__(self, "ops", ops)

    @property
    def count(self) -> int:
        return len(self.ops)

    def apply(self, A) -> np.ndarray:
        return sum(E @ A @ E.conj().T for E in self.ops)

    def to_channel(self) -> FiniteChannel:
        return FiniteChannel.from_kraus(self.ops)

    def unitality_defect(self) -> float:
        m = self.ops[0].shape[0]
        s = sum(E @ E.conj().T for E in self.ops)
        return float(np.max(np.abs(s - np.eye(m))))

    def trace_defect(self) -> float:
        n = self.ops[0].shape[1]
        s = sum(E.conj().T @ E for E in self.ops)
        return float(np.max(np.abs(s - np.eye(n))))


def kraus_from_choi(ch: FiniteChannel) -> KrausSet:
    """Canonical effects from the Choi eigendecomposition.

    Deterministic: eigenvalues above the cutoff, effects ordered by
    decreasing eigenvalue.  The count equals the Choi rank.  For a
    unital channel every effect is automatically a contraction.
    """
    vals, vecs = np.linalg.eigh(ch.choi)
    if vals[0] < _PSD_FLOOR * (1.0 + abs(np.trace(ch.choi))):
        raise NotPSD(f"choi minimum eigenvalue {vals[0]:.3e}")
    keep = np.where(vals > _EIG_CUTOFF)[0][::-1]
    n, m = ch.dim_in, ch.dim_out
    ops = [np.sqrt(vals[k]) * vecs[:, k].reshape(n, m).T for k in keep]
    return KrausSet(tuple(ops))


@dataclass(frozen=True)
class StinespringDilation:
    """Phi(A) = V^* (1_k (x) A) V with V an isometry.

    The dilation space is k copies of the input space, the
    representation is block diagonal, and V stacks the effect adjoints.
    """

    V: np.ndarray
    multiplicity: int
    dim_in: int
    dim_out: int

    def rep(self, A) -> np.ndarray:
        return np.kron(np.eye(self.multiplicity), np.asarray(A))

    def compress(self, A) -> np.ndarray:
        return self.V.conj().T @ self.rep(A) @ self.V

    def isometry_defect(self) -> float:
        g = self.V.conj().T @ self.V
        return float(np.max(np.abs(g - np.eye(self.dim_out))))


def minimal_stinespring(ch: FiniteChannel) -> StinespringDilation:
    """Minimal dilation of a unital channel.

    Multiplicity equals the Choi rank; minimality (the dilation space
    is spanned by rep(A) V h) is certified by a rank computation in
    :func:`verify_minimality` rather than assumed.
    """
    if not ch.is_unital(1e-9):
        raise NotUnital("isometric dilation needs a unital channel")
    ks = kraus_from_choi(ch)
    V = np.vstack([E.conj().T for E in ks.ops])
    return StinespringDilation(V, ks.count, ch.dim_in, ch.dim_out)


def verify_minimality(dil: StinespringDilation) -> dict:
    """Rank check: span{rep(A) V h} must be the whole dilation space."""
    n, k = dil.dim_in, dil.multiplicity
    cols = []
    for a in range(n):
        for b in range(n):
            unit = np.zeros((n, n))
            unit[a, b] = 1.0
            cols.append(dil.rep(unit) @ dil.V)
    stacked = np.hstack(cols)
    rank = int(np.linalg.matrix_rank(stacked, tol=1e-10))
    return {"check": "stinespring-minimality", "rank": rank,
            "expected": n * k, "pass": rank == n * k}


def effect_relation(K1: KrausSet, K2: KrausSet,
                    tol: Tolerances = DEFAULT) -> np.ndarray:
    """Scalar isometry U with sum_i U[j,i] E_i^* = F_j^*.

    Exists whenever both families implement the same channel; its
    existence forces the two effect families to share a linear span.
    Returns U of shape (len(K2), len(K1)).
    """
    ch1 = K1.to_channel()
    ch2 = K2.to_channel()
    if ch1.distance(ch2) > 1e-8 * (1.0 + np.linalg.norm(ch1.choi)):
        raise ChannelMismatch("effect families implement different channels")
    A = np.column_stack([E.conj().T.ravel() for E in K1.ops])
    B = np.column_stack([F.conj().T.ravel() for F in K2.ops])
    X, *_ = np.linalg.lstsq(A, B, rcond=None)
    scale = 1.0 + float(np.max(np.abs(B)))
    resid = float(np.max(np.abs(A @ X - B))) / scale
    if resid > 1e-7:
        raise NoIsometry(f"scalar relation residual {resid:.3e}")
    U = X.T
    if np.max(np.abs(U.conj().T @ U - np.eye(K1.count))) > 1e-7:
        raise NoIsometry("scalar relation is not isometric")
    ra = np.linalg.matrix_rank(A, tol=1e-10)
    rb = np.linalg.matrix_rank(B, tol=1e-10)
    rab = np.linalg.matrix_rank(np.hstack([A, B]), tol=1e-10)
    if not (ra == rb == rab):
        raise NoIsometry("effect spans differ")
    return U


def verify_commutant_effects(ch: FiniteChannel,
                             tol: float = 1e-8) -> dict:
    """A unital channel fixing every diagonal matrix has diagonal
    effects and is automatically trace preserving.

    The diagonal algebra is maximal abelian, so fixed diagonals put it
    inside the multiplicative domain and the effects land in its
    commutant, which is the diagonal algebra again.
    """
    if ch.dim_in != ch.dim_out:
        raise DomainViolation("need an endomorphism channel")
    n = ch.dim_in
    if not ch.is_unital(1e-9):
        raise NotUnital("commutant argument needs unitality")
    for c in range(n):
        unit = np.zeros((n, n))
        unit[c, c] = 1.0
        if np.max(np.abs(ch.apply(unit) - unit)) > 1e-9:
            raise NotFixingAlgebra(
                f"diagonal unit {c} moves under the channel")
    ks = kraus_from_choi(ch)
    off = 0.0
    for E in ks.ops:
        off = max(off, float(np.max(np.abs(E - np.diag(np.diag(E))))))
    tp = ks.trace_defect()
    ok = off <= tol and tp <= tol
    return {"check": "commutant-effects", "count": ks.count,
            "max_offdiagonal": off, "trace_defect": tp,
            "tolerance": tol, "pass": bool(ok)}


def verify_dilation_factorization(phi1: FiniteChannel, phi: FiniteChannel,
                                  phi2: FiniteChannel = None,
                                  samples: int = 12,
                                  seed: int = 6021023) -> dict:
    """Composition through a CPU map never enlarges dilation norms.

    phi1 is CPU out of the full matrix algebra and phi2 = phi o phi1.
    The minimal dilations carry block diagonal representations of the
    same algebra; the connecting map rep1(A) -> rep2(A) is exhibited on
    the matrix unit span and the norm inequality ||rep2(A)|| <=
    ||rep1(A)|| is sampled.
    """
    comp = compose(phi, phi1)
    if phi2 is None:
        phi2 = comp
    elif phi2.distance(comp) > 1e-8 * (1.0 + np.linalg.norm(comp.choi)):
        raise NotComposed("phi2 is not phi o phi1")
    dil1 = minimal_stinespring(phi1)
    dil2 = minimal_stinespring(phi2)
    n = phi1.dim_in
    rng = np.random.default_rng(seed)
    norm_gap = -np.inf
    for _ in range(samples):
        A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        n1 = np.linalg.norm(dil1.rep(A), 2)
        n2 = np.linalg.norm(dil2.rep(A), 2)
        norm_gap = max(norm_gap, n2 - n1)
    # connecting map on the span of the represented matrix units
    cols1, cols2 = [], []
    for a in range(n):
        for b in range(n):
            unit = np.zeros((n, n))
            unit[a, b] = 1.0
            cols1.append(dil1.rep(unit).ravel())
            cols2.append(dil2.rep(unit).ravel())
    M1 = np.column_stack(cols1)
    M2 = np.column_stack(cols2)
    G, *_ = np.linalg.lstsq(M1, M2, rcond=None)
    connect = float(np.max(np.abs(M1 @ G - M2)))
    ok = norm_gap <= 1e-10 and connect <= 1e-8
    return {"check": "dilation-factorization",
            "multiplicities": (dil1.multiplicity, dil2.multiplicity),
            "norm_gap": float(norm_gap), "connect_residual": connect,
            "pass": bool(ok)}


def diagonal_compression_dilation(W, rng=None) -> dict:
    """Compression of the diagonal algebra to a cyclic subspace has the
    identity map as its minimal dilation.

    W embeds the subspace; cyclicity for the diagonal algebra means the
    subspace contains a vector with every coordinate nonzero, and then
    span{diag * subspace} is everything, so the dilation multiplicity
    is 1 and V is W itself.
    """
    W = np.asarray(W, dtype=complex)
    n, s = W.shape
    if np.max(np.abs(W.conj().T @ W - np.eye(s))) > 1e-10:
        raise DomainViolation("columns are not orthonormal")
    if rng is None:
        rng = np.random.default_rng(0)
    cyclic = False
    for _ in range(8):
        v = W @ (rng.normal(size=s) + 1j * rng.normal(size=s))
        if np.min(np.abs(v)) > 1e-10 * np.max(np.abs(v)):
            cyclic = True
            break
    if not cyclic:
        raise DomainViolation(
            "subspace has no vector with all coordinates nonzero")
    # span{diag(e_c) W e_j} over all c, j must be the whole space
    cols = []
    for c in range(n):
        unit = np.zeros(n)
        unit[c] = 1.0
        cols.append(np.diag(unit) @ W)
    stacked = np.hstack(cols)
    rank = int(np.linalg.matrix_rank(stacked, tol=1e-10))
    # V = W, rep = id: compare the dilation compression against the
    # Choi route for the same compression channel
    ch = FiniteChannel.compression(W)
    resid = 0.0
    for c in range(n):
        unit = np.zeros((n, n))
        unit[c, c] = 1.0
        resid = max(resid, float(np.max(np.abs(
            W.conj().T @ unit @ W - ch.apply(unit)))))
    ok = rank == n
    return {"check": "diagonal-compression-dilation", "multiplicity": 1,
            "span_rank": rank, "expected": n, "compat_residual": resid,
            "pass": bool(ok)}


# ---- random instances (tests and the batch runner share these) ----

def random_unital_channel(rng, dim: int, count: int) -> FiniteChannel:
    """Unital channel with count effects: whiten random matrices so the
    unitality sum is exactly the identity."""
    G = [rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
         for _ in range(count)]
    X = sum(g @ g.conj().T for g in G)
    vals, vecs = np.linalg.eigh(X)
    white = vecs @ np.diag(vals ** -0.5) @ vecs.conj().T
    return FiniteChannel.from_kraus([white @ g for g in G])


def random_channel(rng, dim_in: int, dim_out: int,
                   rank: int) -> FiniteChannel:
    """Random PSD Choi matrix of prescribed rank, trace dim_in."""
    nm = dim_in * dim_out
    G = rng.normal(size=(nm, rank)) + 1j * rng.normal(size=(nm, rank))
    J = G @ G.conj().T
    J *= dim_in / np.trace(J).real
    return FiniteChannel(dim_in, dim_out, J)
