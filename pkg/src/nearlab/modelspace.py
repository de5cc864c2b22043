"""Model subspaces of the Hardy space of the upper half plane.

For a finite Blaschke product theta of degree n the model space is the
n-dimensional space K(theta) = H2 - theta H2 = {p / D : deg p <= n-1},
where D is the denominator of theta.  Everything here is exact rational
arithmetic on that description: reproducing kernels, Gram matrices,
projections, and the Clark samples (nodes of the rank-one unitary
perturbation family).

Reproducing kernel convention: f(w) = <f, kernel(w)> with

    k_w(z) = (i / 2 pi) (1 - conj(theta(w)) theta(z)) / (z - conj(w)).

The numerator has an exact root at conj(w) (also for real w), so the
kernel is assembled by synthetic division and never carries a spurious
pole.
"""

from __future__ import annotations

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import (
    AlphaAtInfinity,
    DomainViolation,
    IllConditioned,
    NonConvergence,
    PoleCollision,
)
from .inner import InnerFn
from .ratfield import Poly, RationalFn, l2_inner, l2_norm

TWO_PI = 2.0 * np.pi


class ModelSpace:
    """K(theta) for a finite Blaschke product theta of degree >= 1."""

    def __init__(self, theta: InnerFn, tol: Tolerances = DEFAULT):
        if theta.degree < 1:
            raise DomainViolation("constant inner function spans no model space")
        self.theta = theta
        self.tol = tol
        self._anchors = None

    @property
    def dim(self) -> int:
        return self.theta.degree

    # -- elements ------------------------------------------------------

    def element(self, coeffs) -> RationalFn:
        """p / D for the polynomial p with the given coefficients."""
        p = coeffs if isinstance(coeffs, Poly) else Poly(coeffs)
        if p.degree > self.dim - 1:
            raise DomainViolation(
                f"numerator degree {p.degree} exceeds {self.dim - 1}"
            )
        return RationalFn(p, self.theta.den_poly,
                          poles=np.conj(self.theta.zeros), cancel=False)

    def random_element(self, rng) -> RationalFn:
        c = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
        return self.element(c)

    def kernel(self, w) -> RationalFn:
        """Reproducing kernel k_w; w may be complex or real.

        Raises PoleCollision when w sits numerically on a pole of theta.
        """
        w = complex(w)
        conj_poles = np.conj(self.theta.zeros)
        if conj_poles.size and np.min(np.abs(w - conj_poles)) < 1e-8 * max(1.0, abs(w)):
            raise PoleCollision(f"anchor {w} is a pole of theta")
        tw = self.theta(w)
        Q = self.theta.den_poly - self.theta.num_poly * np.conj(tw)
        P = Q.deflate(np.conj(w))
        return RationalFn(P * (1j / TWO_PI), self.theta.den_poly,
                          poles=conj_poles, cancel=False)

    def normalized_kernel(self, w) -> RationalFn:
        k = self.kernel(w)
        nrm2 = complex(k(w)).real  # = <k_w, k_w> by reproduction
        if nrm2 <= 0:
            raise NonConvergence(f"kernel norm^2 = {nrm2:.3e} at {w}")
        return k * (1.0 / np.sqrt(nrm2))

    # -- coordinates ---------------------------------------------------

    def anchors(self) -> np.ndarray:
        """Default kernel anchors with a conditioning guarantee.

        A fixed vertical ladder is tried first; if its Gram matrix is
        too ill conditioned the anchors are redrawn from a deterministic
        generator until the condition budget holds.
        """
        if self._anchors is not None:
            return self._anchors
        n = self.dim
        cand = 1j * (1.0 + 0.5 * np.arange(n))
        rng = np.random.default_rng(90210)
        for _ in range(25):
            try:
                G = self.gram(cand)
            except PoleCollision:
                G = None
            if G is not None:
                w = np.linalg.eigvalsh(G)
                if w[0] > 0 and w[-1] / w[0] < self.tol.kappa_max:
                    self._anchors = cand
                    return cand
            cand = rng.uniform(-2, 2, n) + 1j * rng.uniform(0.5, 3.0, n)
        raise IllConditioned("no well conditioned anchor set found")

    def gram(self, anchors=None) -> np.ndarray:
        """G[j, k] = <k_{w_k}, k_{w_j}> = k_{w_k}(w_j)."""
        w = self.anchors() if anchors is None else np.asarray(anchors)
        n = w.size
        G = np.empty((n, n), dtype=np.complex128)
        for k in range(n):
            G[:, k] = self.kernel(w[k])(w)
        return 0.5 * (G + G.conj().T)

    def basis(self) -> list:
        return [self.kernel(w) for w in self.anchors()]

    def project(self, f: RationalFn, tol: Tolerances = None) -> RationalFn:
        """Orthogonal projection of a rational L2 function onto K(theta)."""
        tol = tol or self.tol
        w = self.anchors()
        G = self.gram(w)
        rhs = np.array([l2_inner(f, self.kernel(a), tol) for a in w])
        c = np.linalg.solve(G, rhs)
        out = RationalFn.const(0.0)
        for j, a in enumerate(w):
            out = out + self.kernel(a) * c[j]
        return out

    def contains(self, f: RationalFn, tol: Tolerances = None) -> bool:
        tol = tol or self.tol
        r = f - self.project(f, tol)
        return l2_norm(r, tol) <= tol.eps_inner * (1.0 + l2_norm(f, tol))

    # -- serialization -------------------------------------------------

    def to_json(self) -> str:
        return self.theta.to_json()

    @staticmethod
    def from_json(text: str, tol: Tolerances = DEFAULT) -> "ModelSpace":
        return ModelSpace(InnerFn.from_json(text), tol)


# ---------------------------------------------------------------------------
# Clark samples
# ---------------------------------------------------------------------------

def clark_nodes(theta: InnerFn, alpha, tol: Tolerances = DEFAULT) -> np.ndarray:
    """The n real solutions of theta(x) = alpha, sorted increasingly.

    These are the eigenvalues of the rank-one unitary perturbation with
    parameter alpha.  alpha must be unimodular and must differ from
    theta's value at infinity (otherwise one node escapes to infinity
    and AlphaAtInfinity is raised).
    """
    alpha = complex(alpha)
    if abs(abs(alpha) - 1.0) > 1e-8:
        raise DomainViolation(f"|alpha| = {abs(alpha):.6f}, expected 1")
    if abs(alpha - theta.at_infinity()) < 1e-8:
        raise AlphaAtInfinity(
            "alpha equals the boundary value at infinity; the perturbation "
            "is not densely defined"
        )
    p = theta.num_poly - theta.den_poly * alpha
    if p.degree != theta.degree:
        raise AlphaAtInfinity("leading coefficient collapsed")
    r = p.roots(tol)
    if np.max(np.abs(r.imag) / (1.0 + np.abs(r.real))) > tol.rho_real * 10:
        raise NonConvergence(f"nodes are not numerically real: {r}")
    x = np.sort(r.real)
    if x.size > 1 and np.min(np.diff(x)) < tol.delta_pair:
        raise NonConvergence("node separation below delta_pair")
    return x


def _deflate_from_constant(p: Poly, a: complex) -> Poly:
    """Quotient of p by (z - a), divided from the constant term up.

    Exact for the perturbed polynomial whose top coefficient absorbs
    the mismatch; stable when |a| dwarfs the root scale.
    """
    c = p.coeffs
    n = len(c) - 1
    q = np.empty(n, dtype=np.complex128)
    q[0] = -c[0] / a
    for k in range(1, n):
        q[k] = (q[k - 1] - c[k]) / a
    return Poly(q)


def clark_basis(space: ModelSpace, alpha, tol: Tolerances = DEFAULT):
    """Nodes and the orthonormal boundary-kernel basis at them.

    Returns (nodes, weights, basis) where weights[j] = 2 pi / phase'(x_j)
    is the Parseval weight: ||f||^2 = sum_j weights[j] |f(x_j)|^2, and
    basis[j] is the normalized boundary kernel at node j.
    """
    x = clark_nodes(space.theta, alpha, tol)
    dphi = space.theta.phase_derivative(x)
    weights = TWO_PI / dphi
    alpha = complex(alpha)
    # all kernels of one Clark family share the numerator polynomial
    # den - conj(alpha) num = -conj(alpha) (num - alpha den); deflating
    # that polynomial at its own polished root keeps the remainder at
    # evaluation-noise level.  The generic kernel constructor deflates
    # den - conj(theta(x)) num at the node instead, which leaves a
    # remainder of order eps * |den(x)|; when alpha sits close to the
    # boundary value at infinity one node runs far out and that
    # remainder is what survives in the pairwise inner products.
    p = space.theta.num_poly - space.theta.den_poly * alpha
    dp = p.deriv()
    conj_poles = np.conj(space.theta.zeros)
    scale = -np.conj(alpha) * 1j / TWO_PI
    basis = []
    for xj, dj in zip(x, dphi):
        rt = complex(xj)
        if abs(rt) > 8.0:
            # far node: forward synthetic division amplifies rounding
            # by |x| per step (floor eps * sum |c_k x^k|, easily 1e-3
            # when alpha sits near the boundary value at infinity);
            # dividing from the constant term up damps by 1/|x| instead
            # and leaves only a top-degree mismatch of order eps
            P = _deflate_from_constant(p, rt)
        else:
            d = complex(dp(rt))
            if d != 0:
                rt = rt - complex(p(rt)) / d
            P = p.deflate(rt)
        k = RationalFn(P * scale, space.theta.den_poly,
                       poles=conj_poles, cancel=False)
        # normalized kernel at a real node: ||k_x||^2 = phase'(x)/(2 pi)
        basis.append(k * np.sqrt(TWO_PI / dj))
    return x, weights, basis


def clark_expand(space: ModelSpace, alpha, f: RationalFn,
                 tol: Tolerances = DEFAULT):
    """Coefficients of f in the Clark basis: c_j = f(x_j) sqrt(weight_j)."""
    x, weights, _ = clark_basis(space, alpha, tol)
    return np.asarray(f(x)) * np.sqrt(weights), x
