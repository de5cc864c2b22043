"""Finite Blaschke products on the upper half plane.

An inner function here is theta(z) = c * prod (z - lam_k)/(z - conj(lam_k))
with |c| = 1 and every lam_k in the open upper half plane.  The module
also provides the Mobius map to the unit disk, the Cayley lift of disk
functions to L2(R), and the Crofoot transform that moves a prescribed
zero to z = i.

The disk pairing used throughout is

    <u, v>_disk = (2/pi) * int_0^{2pi} u(e^it) conj(v(e^it)) dt

which is exactly the normalization that makes the Cayley lift
f |-> (2i/sqrt(pi)) (z+i)^{-1} f(mu(z)) an isometry onto its image in
L2(R); see the lift unitarity tests.
"""

from __future__ import annotations

import json

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import (
    DomainViolation,
    NotH2Disk,
    NotStrictlyContractiveAtI,
    PoleEvaluation,
)
from .ratfield import Poly, RationalFn

SQRT_PI = np.sqrt(np.pi)


class InnerFn:
    """Finite Blaschke product for the upper half plane.

    Parameters
    ----------
    zeros : array_like
        Zeros lam_k, each with strictly positive imaginary part.
    constant : complex
        Unimodular constant; normalized to modulus one on input.
    """

    __slots__ = ("zeros", "constant", "_rat")

    def __init__(self, zeros, constant=1.0):
        z = np.atleast_1d(np.asarray(zeros, dtype=np.complex128))
        if z.size and np.min(z.imag) <= 1e-10:
            raise DomainViolation(
                f"inner zeros must lie in the open upper half plane; got {z}"
            )
        c = complex(constant)
        if abs(abs(c) - 1.0) > 1e-8:
            raise DomainViolation(f"|constant| = {abs(c):.6f}, expected 1")
        self.zeros = z
        self.constant = c / abs(c)
        self._rat = RationalFn.from_factored(self.constant, z, np.conj(z))

    # -- basic structure ----------------------------------------------

    @property
    def degree(self) -> int:
        return int(self.zeros.size)

    @property
    def num_poly(self) -> Poly:
        """c * prod(z - lam_k)."""
        return self._rat.num

    @property
    def den_poly(self) -> Poly:
        """prod(z - conj(lam_k)), monic."""
        return self._rat.den

    def as_rational(self) -> RationalFn:
        return self._rat

    def at_infinity(self) -> complex:
        return self.constant

    def __call__(self, z):
        return self._rat(z)

    def __mul__(self, other: "InnerFn") -> "InnerFn":
        return InnerFn(np.concatenate([self.zeros, other.zeros]),
                       self.constant * other.constant)

    def __repr__(self):
        return f"InnerFn(zeros={list(self.zeros)}, constant={self.constant})"

    def phase_derivative(self, x):
        """d/dx arg theta(x) = sum_k 2 Im lam_k / |x - lam_k|^2, > 0.

        This is the density of the boundary reproducing kernel diagonal:
        k_x(x) = phase_derivative(x) / (2 pi).
        """
        x = np.asarray(x, dtype=np.float64)
        lam = self.zeros
        d = np.zeros(x.shape, dtype=np.float64)
        for k in range(lam.size):
            d = d + 2.0 * lam[k].imag / ((x - lam[k].real) ** 2 + lam[k].imag ** 2)
        return d if x.ndim else float(d)

    # -- serialization -------------------------------------------------

    def to_json(self) -> str:
        obj = {
            "flavor": "blaschke",
            "zeros": [[float(z.real), float(z.imag)] for z in self.zeros],
            "constant": [float(self.constant.real), float(self.constant.imag)],
        }
        return json.dumps(obj, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "InnerFn":
        obj = json.loads(text)
        if obj.get("flavor") != "blaschke":
            raise DomainViolation(f"unsupported flavor {obj.get('flavor')!r}")
        zeros = [complex(a, b) for a, b in obj["zeros"]]
        c = complex(obj["constant"][0], obj["constant"][1])
        return InnerFn(zeros, c)


# ---------------------------------------------------------------------------
# Mobius / Cayley
# ---------------------------------------------------------------------------

def mobius(z):
    """(z - i)/(z + i): upper half plane -> unit disk, R -> circle."""
    z = np.asarray(z, dtype=np.complex128)
    if np.any(np.abs(z + 1j) < 1e-14):
        raise PoleEvaluation("mobius has its pole at -i")
    out = (z - 1j) / (z + 1j)
    return out if out.ndim else complex(out)


def mobius_inv(w):
    """i (1 + w)/(1 - w): unit disk -> upper half plane."""
    w = np.asarray(w, dtype=np.complex128)
    if np.any(np.abs(w - 1.0) < 1e-14):
        raise DomainViolation("mobius_inv sends w = 1 to infinity")
    out = 1j * (1.0 + w) / (1.0 - w)
    return out if out.ndim else complex(out)


def disk_inner(u, v, n: int = 512) -> complex:
    """(2/pi) int_0^{2pi} u(e^it) conj(v(e^it)) dt by the trapezoid rule.

    u and v are callables on the unit circle.  For rational functions
    without poles near the circle the periodic trapezoid rule converges
    geometrically, so n = 512 is far beyond the verification tolerances.
    """
    t = np.arange(n) * (2.0 * np.pi / n)
    w = np.exp(1j * t)
    vals = np.asarray(u(w)) * np.conj(np.asarray(v(w)))
    return complex((2.0 / np.pi) * vals.mean() * 2.0 * np.pi)


def _compose_mu(p: Poly) -> Poly:
    """(z + i)^deg(p) * p(mu(z)) as a polynomial in z."""
    d = max(p.degree, 0)
    acc = Poly.zero()
    for k in range(d + 1):
        if k < p.coeffs.size and p.coeffs[k] != 0:
            term = Poly.from_roots([1j] * k + [-1j] * (d - k), lead=p.coeffs[k])
            acc = acc + term
    return acc


def cayley_lift(p, q=None, tol: Tolerances = DEFAULT) -> RationalFn:
    """Lift the disk rational p/q to L2(R).

    Returns (2i/sqrt(pi)) (z + i)^{-1} (p/q)(mu(z)) as a RationalFn.
    q defaults to 1; it must be zero free on the closed unit disk so the
    input lies in H2 of the disk.
    """
    p = p if isinstance(p, Poly) else Poly(p)
    qr = np.zeros(0, dtype=np.complex128)
    if q is None:
        q = Poly.one()
    else:
        q = q if isinstance(q, Poly) else Poly(q)
        if q.degree >= 1:
            qr = q.roots(tol)
            if np.any(np.abs(qr) <= 1.0 + 1e-10):
                raise NotH2Disk(f"denominator has zeros in the closed disk: {qr}")
        elif q.is_zero():
            raise ZeroDivisionError("q = 0")
    dp, dq = max(p.degree, 0), max(q.degree, 0)
    P = _compose_mu(p)
    Q = _compose_mu(q)
    # (p/q)(mu) = P (z+i)^{dq - dp} / Q
    num = P
    den = Q * Poly.from_roots([-1j])
    if dq > dp:
        num = num * Poly.from_roots([-1j] * (dq - dp))
    elif dp > dq:
        den = den * Poly.from_roots([-1j] * (dp - dq))
    # the pole multiset is known exactly: -i powers plus the Mobius
    # images of q's zeros, which keeps later cancellation on exact data
    poles = [-1j] * (1 + max(0, dp - dq)) + [mobius_inv(w) for w in qr]
    return RationalFn(num * (2j / SQRT_PI), den, poles=poles)


# ---------------------------------------------------------------------------
# Crofoot transform
# ---------------------------------------------------------------------------

def _disk_automorphism_of_inner(theta: InnerFn, b: complex,
                                tol: Tolerances) -> InnerFn:
    """(b - theta)/(1 - conj(b) theta) as an InnerFn, for |b| < 1.

    The map tau_b is an involution of the disk, so this implements both
    directions of the Crofoot correspondence.
    """
    n = theta.degree
    if n == 0:
        c = theta.constant
        return InnerFn([], (b - c) / (1.0 - np.conj(b) * c))
    cN = theta.num_poly
    D = theta.den_poly
    num = D * b - cN  # roots are the zeros of the transformed function
    if num.degree != n:
        raise NotStrictlyContractiveAtI(
            "transform degenerated; b too close to the boundary value"
        )
    new_zeros = num.roots(tol)
    if np.min(new_zeros.imag) <= 0:
        raise DomainViolation(
            f"transformed zeros left the upper half plane: {new_zeros}"
        )
    # fix the unimodular constant from a real sample point away from the
    # zeros' real parts
    cand = 1.0 + np.max(np.abs(new_zeros.real)) if n else 1.0
    for x0 in (cand + 1.0, -(cand + 2.0), 0.37):
        tv = theta(x0)
        denom = 1.0 - np.conj(b) * tv
        if abs(denom) < 1e-12:
            continue
        target = (b - tv) / denom
        ratio = RationalFn.from_factored(1.0, new_zeros, np.conj(new_zeros))(x0)
        if abs(ratio) < 1e-12:
            continue
        c_new = target / ratio
        if abs(abs(c_new) - 1.0) < 1e-7:
            return InnerFn(new_zeros, c_new)
    raise NotStrictlyContractiveAtI("could not normalize the constant")


def crofoot(theta: InnerFn, tol: Tolerances = DEFAULT):
    """Normal form with a zero at i.

    Returns (theta_prime, b) where b = theta(i) and
    theta_prime = (b - theta)/(1 - conj(b) theta), so theta_prime(i) = 0
    and theta = (b - theta_prime)/(1 - conj(b) theta_prime).

    Raises NotStrictlyContractiveAtI when |theta(i)| is within eps_inner
    of 1 (then i is numerically a boundary point for theta).
    """
    b = complex(theta(1j))
    if abs(b) >= 1.0 - tol.eps_inner:
        raise NotStrictlyContractiveAtI(f"|theta(i)| = {abs(b):.12f}")
    tp = _disk_automorphism_of_inner(theta, b, tol)
    return tp, b


def crofoot_inverse(theta_prime: InnerFn, b: complex,
                    tol: Tolerances = DEFAULT) -> InnerFn:
    """Undo :func:`crofoot`: rebuild theta from (theta_prime, b)."""
    if abs(b) >= 1.0 - tol.eps_inner:
        raise NotStrictlyContractiveAtI(f"|b| = {abs(b):.12f}")
    return _disk_automorphism_of_inner(theta_prime, b, tol)


def crofoot_multiplier(theta_prime: InnerFn, b: complex,
                       tol: Tolerances = DEFAULT) -> RationalFn:
    """Unimodular-on-R multiplier of K(theta_prime) onto K(theta).

    w = sqrt(1 - |b|^2) / (1 - conj(b) theta_prime); multiplication by w
    is a unitary map from the model space of theta_prime onto the model
    space of theta = (b - theta_prime)/(1 - conj(b) theta_prime), and
    |w| = sqrt(1-|b|^2)/|1 - conj(b) theta_prime| is bounded above and
    below on R.
    """
    if abs(b) >= 1.0 - tol.eps_inner:
        raise NotStrictlyContractiveAtI(f"|b| = {abs(b):.12f}")
    s = float(np.sqrt(1.0 - abs(b) ** 2))
    D = theta_prime.den_poly
    cN = theta_prime.num_poly
    den = D - cN * np.conj(b)
    return RationalFn(D * s, den)
