"""Rational functions over R with exact-degree bookkeeping.

This module is the arithmetic substrate for everything else: polynomials
with complex coefficients (lowest degree first), rational functions with
monic denominators and cached zero/pole multisets, the closed-form L2(R)
inner product by residue summation, an independent adaptive-quadrature
oracle for the same integrals, and spectral factorization of nonnegative
rational densities.

Conventions
-----------
* Coefficient arrays are ordered constant term first.
* The para-conjugate f* of f is f*(z) = conj(f(conj(z))), i.e. plain
  conjugation of coefficients.  On R it evaluates to conj(f(x)).
* All L2 inner products are over Lebesgue measure on R, linear in the
  first argument.
"""

from __future__ import annotations

import numpy as np
import numpy.polynomial.polynomial as npoly
from scipy import integrate

from .config import DEFAULT, Tolerances
from .errors import (
    NonConvergence,
    NotNonnegative,
    NotSelfParaconjugate,
    QuadratureFailure,
    RealPole,
    SlowDecay,
)

# trailing coefficients below this relative size are treated as zero
TRIM_REL = 1e-13


def _trim(coeffs: np.ndarray) -> np.ndarray:
    c = np.atleast_1d(np.asarray(coeffs, dtype=np.complex128))
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return np.zeros(1, dtype=np.complex128)
    keep = np.nonzero(np.abs(c) > TRIM_REL * scale)[0]
    if keep.size == 0:
        return np.zeros(1, dtype=np.complex128)
    return np.ascontiguousarray(c[: keep[-1] + 1])


class Poly:
    """Polynomial with complex coefficients, constant term first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = _trim(coeffs)

    @staticmethod
    def zero() -> "Poly":
        return Poly([0.0])

    @staticmethod
    def one() -> "Poly":
        return Poly([1.0])

    @staticmethod
    def from_roots(roots, lead=1.0) -> "Poly":
        c = np.array([complex(lead)], dtype=np.complex128)
        for r in np.asarray(roots, dtype=np.complex128).ravel():
            c = np.convolve(c, np.array([-r, 1.0], dtype=np.complex128))
        return Poly(c)

    @property
    def degree(self) -> int:
        """Exact degree; -1 for the zero polynomial."""
        if self.coeffs.size == 1 and self.coeffs[0] == 0:
            return -1
        return self.coeffs.size - 1

    @property
    def lead(self) -> complex:
        return complex(self.coeffs[-1])

    def is_zero(self) -> bool:
        return self.degree == -1

    def __call__(self, z):
        return npoly.polyval(z, self.coeffs)

    def __add__(self, other: "Poly") -> "Poly":
        n = max(self.coeffs.size, other.coeffs.size)
        a = np.zeros(n, dtype=np.complex128)
        a[: self.coeffs.size] = self.coeffs
        a[: other.coeffs.size] += other.coeffs
        return Poly(a)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (other * (-1.0))

    def __mul__(self, other):
        if isinstance(other, Poly):
            if self.is_zero() or other.is_zero():
                return Poly.zero()
            return Poly(np.convolve(self.coeffs, other.coeffs))
        return Poly(self.coeffs * complex(other))

    __rmul__ = __mul__

    def __repr__(self):
        return f"Poly({list(self.coeffs)})"

    def deriv(self) -> "Poly":
        if self.degree <= 0:
            return Poly.zero()
        k = np.arange(1, self.coeffs.size)
        return Poly(self.coeffs[1:] * k)

    def para(self) -> "Poly":
        """Coefficient-wise conjugate; equals conj(p(conj z))."""
        return Poly(np.conj(self.coeffs))

    def deflate(self, a: complex) -> "Poly":
        """Synthetic division by (z - a), discarding the remainder."""
        c = self.coeffs
        n = c.size
        if n == 1:
            return Poly.zero()
        q = np.empty(n - 1, dtype=np.complex128)
        acc = c[-1]
        for j in range(n - 2, -1, -1):
            q[j] = acc
            acc = c[j] + a * acc
        return Poly(q)

    def taylor_at(self, a: complex, order: int) -> np.ndarray:
        """Coefficients d_0..d_order of p(a + t) as a series in t.

        Repeated synthetic division; O(deg * order).
        """
        d = np.zeros(order + 1, dtype=np.complex128)
        work = self
        for j in range(order + 1):
            d[j] = work(a)
            work = work.deflate(a)
            if work.is_zero():
                break
        return d

    def norm(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def roots(self, tol: Tolerances = DEFAULT) -> np.ndarray:
        """All complex roots, one Newton polish each, residual-checked.

        Raises NonConvergence when a polished root still has residual
        above eps_root relative to the coefficient scale.
        """
        d = self.degree
        if d <= 0:
            return np.zeros(0, dtype=np.complex128)
        r = npoly.polyroots(self.coeffs)
        dp = self.deriv()
        pv = self(r)
        dv = dp(r)
        # one guarded Newton step; skip where the derivative underflows
        ok = np.abs(dv) > 1e-300
        step = np.zeros_like(r)
        step[ok] = pv[ok] / dv[ok]
        cap = 1.0 + np.abs(r)
        step = np.where(np.abs(step) < 0.5 * cap, step, 0.0)
        r = r - step
        scale = self.norm()
        res = np.abs(self(r)) / (scale * np.maximum(1.0, np.abs(r)) ** d)
        if np.any(res > tol.eps_root):
            raise NonConvergence(
                f"root residual {np.max(res):.3e} > {tol.eps_root:.1e}"
            )
        return r


def _match_and_remove(avals: np.ndarray, bvals: np.ndarray, tol_abs):
    """Greedy multiset matching of a against b within tol_abs(x).

    Returns (a_rest, b_rest, n_matched).  Used for zero/pole cancellation
    where the two lists come from exact factored constructions.
    """
    a = list(avals)
    b = list(bvals)
    matched = 0
    out_a = []
    for x in a:
        hit = None
        for j, y in enumerate(b):
            if abs(x - y) <= tol_abs(x):
                hit = j
                break
        if hit is None:
            out_a.append(x)
        else:
            b.pop(hit)
            matched += 1
    return (
        np.array(out_a, dtype=np.complex128),
        np.array(b, dtype=np.complex128),
        matched,
    )


class RationalFn:
    """Quotient of two polynomials with a monic denominator.

    Zero and pole multisets are cached when the function is built from
    factored data, so later arithmetic can cancel common factors and the
    residue engine can avoid re-finding roots of exactly known
    denominators.
    """

    __slots__ = ("num", "den", "_zeros", "_poles")

    def __init__(self, num: Poly, den: Poly, *, zeros=None, poles=None,
                 cancel: bool = True, tol: Tolerances = DEFAULT):
        if den.is_zero():
            raise ZeroDivisionError("denominator is the zero polynomial")
        lead = den.lead
        num = num * (1.0 / lead)
        den = den * (1.0 / lead)
        if num.is_zero():
            den = Poly.one()
            zeros, poles = np.zeros(0, np.complex128), np.zeros(0, np.complex128)
            cancel = False
        self.num = num
        self.den = den
        self._zeros = None if zeros is None else np.asarray(zeros, np.complex128)
        self._poles = None if poles is None else np.asarray(poles, np.complex128)
        if cancel and den.degree >= 1 and num.degree >= 1:
            self._cancel_common(tol)

    # -- construction --------------------------------------------------

    @staticmethod
    def from_factored(scale, zeros, poles, tol: Tolerances = DEFAULT) -> "RationalFn":
        """scale * prod(z - zeros) / prod(z - poles), pre-cancelled."""
        zeros = np.asarray(zeros, dtype=np.complex128).ravel()
        poles = np.asarray(poles, dtype=np.complex128).ravel()
        tol_abs = lambda x: tol.rho_gcd * max(1.0, abs(x))
        z_rest, p_rest, _ = _match_and_remove(zeros, poles, tol_abs)
        num = Poly.from_roots(z_rest, lead=scale)
        den = Poly.from_roots(p_rest)
        return RationalFn(num, den, zeros=z_rest, poles=p_rest, cancel=False)

    @staticmethod
    def const(c) -> "RationalFn":
        return RationalFn(Poly([c]), Poly.one(), zeros=[], poles=[], cancel=False)

    # -- cancellation --------------------------------------------------

    def _cancel_common(self, tol: Tolerances):
        """Remove poles at which the numerator vanishes.

        Works from the cached pole multiset when available (no root
        finding); otherwise the denominator is rooted once.
        """
        poles = self.poles(tol)
        nrm = self.num.norm()
        changed = False
        kept = []
        num = self.num
        den = self.den
        for p in poles:
            d = max(1, num.degree)
            bound = tol.rho_gcd * nrm * max(1.0, abs(p)) ** d
            if num.degree >= 1 and abs(num(p)) <= bound:
                # deflate both sides; dividing the exact denominator
                # keeps its coefficients accurate even when the root
                # estimates of a multiple pole are not
                num = num.deflate(p)
                den = den.deflate(p)
                changed = True
            else:
                kept.append(p)
        if changed:
            lead = den.lead
            self.num = num * (1.0 / lead)
            self.den = den * (1.0 / lead)
            self._poles = np.array(kept, dtype=np.complex128)
            self._zeros = None

    # -- structure -----------------------------------------------------

    @property
    def num_degree(self) -> int:
        return self.num.degree

    @property
    def den_degree(self) -> int:
        return self.den.degree

    def zeros(self, tol: Tolerances = DEFAULT) -> np.ndarray:
        if self._zeros is None:
            self._zeros = self.num.roots(tol)
        return self._zeros

    def poles(self, tol: Tolerances = DEFAULT) -> np.ndarray:
        if self._poles is None:
            self._poles = self.den.roots(tol)
        return self._poles

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def factored(self, tol: Tolerances = DEFAULT) -> "RationalFn":
        """Equivalent function carrying full zero and pole caches.

        Quotients of fully cached operands cancel by multiset matching;
        that is the only stable route when the cancellation involves a
        repeated pole, where re-rooting the expanded product is noisy.
        """
        if self.num.is_zero():
            return RationalFn.const(0.0)
        if self._zeros is not None and self._poles is not None:
            return self
        z = self.zeros(tol)
        p = self.poles(tol)
        num = Poly.from_roots(z, lead=self.num.lead)
        den = Poly.from_roots(p)
        return RationalFn(num, den, zeros=z, poles=p, cancel=False)

    def bounded_on_r(self, tol: Tolerances = DEFAULT) -> bool:
        if self.num_degree > self.den_degree:
            return False
        return not np.any(np.abs(self.poles(tol).imag) <= tol.rho_real)

    # -- evaluation ----------------------------------------------------

    def __call__(self, z):
        """Evaluate at complex z (scalar or array).

        For |z| > 1 the reversed-coefficient form is used so that large
        arguments do not overflow intermediate powers.
        """
        z = np.asarray(z, dtype=np.complex128)
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        out = np.empty_like(z)
        small = np.abs(z) <= 1.0
        if np.any(small):
            zs = z[small]
            out[small] = npoly.polyval(zs, self.num.coeffs) / npoly.polyval(
                zs, self.den.coeffs
            )
        if np.any(~small):
            zb = z[~small]
            w = 1.0 / zb
            nrev = self.num.coeffs[::-1]
            drev = self.den.coeffs[::-1]
            val = npoly.polyval(w, nrev) / npoly.polyval(w, drev)
            out[~small] = val * zb ** (self.num_degree - self.den_degree)
        return out[0] if scalar else out

    # -- arithmetic ----------------------------------------------------

    def _caches_or_none(self, other):
        if self._poles is not None and other._poles is not None:
            return np.concatenate([self._poles, other._poles])
        return None

    def __add__(self, other):
        if not isinstance(other, RationalFn):
            other = RationalFn.const(other)
        if np.array_equal(self.den.coeffs, other.den.coeffs):
            return RationalFn(self.num + other.num, self.den,
                              poles=self._poles, cancel=True)
        num = self.num * other.den + other.num * self.den
        den = self.den * other.den
        return RationalFn(num, den, poles=self._caches_or_none(other))

    __radd__ = __add__

    def __neg__(self):
        return RationalFn(self.num * (-1.0), self.den, zeros=self._zeros,
                          poles=self._poles, cancel=False)

    def __sub__(self, other):
        if not isinstance(other, RationalFn):
            other = RationalFn.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, RationalFn):
            c = complex(other)
            if c == 0:
                return RationalFn.const(0.0)
            return RationalFn(self.num * c, self.den, zeros=self._zeros,
                              poles=self._poles, cancel=False)
        num = self.num * other.num
        den = self.den * other.den
        if (self._zeros is not None and self._poles is not None
                and other._zeros is not None and other._poles is not None):
            # factored path: cancellation is pure multiset matching
            tol_abs = lambda x: DEFAULT.rho_gcd * max(1.0, abs(x))
            zs = np.concatenate([self._zeros, other._zeros])
            ps = np.concatenate([self._poles, other._poles])
            z_rest, p_rest, n = _match_and_remove(zs, ps, tol_abs)
            if n:
                lead = num.lead / den.lead if not num.is_zero() else 0.0
                return RationalFn.from_factored(lead, z_rest, p_rest)
            return RationalFn(num, den, zeros=z_rest, poles=p_rest, cancel=False)
        return RationalFn(num, den, poles=self._caches_or_none(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, RationalFn):
            return self * (1.0 / complex(other))
        inv = RationalFn(other.den, other.num, zeros=other._poles,
                         poles=other._zeros, cancel=False)
        return self * inv

    def __rtruediv__(self, other):
        inv = RationalFn(self.den, self.num, zeros=self._poles,
                         poles=self._zeros, cancel=False)
        return inv * other

    def mul_poly(self, q: Poly) -> "RationalFn":
        """Multiply by a polynomial without touching the denominator."""
        return RationalFn(self.num * q, self.den, poles=self._poles)

    def para(self) -> "RationalFn":
        z = None if self._zeros is None else np.conj(self._zeros)
        p = None if self._poles is None else np.conj(self._poles)
        return RationalFn(self.num.para(), self.den.para(), zeros=z, poles=p,
                          cancel=False)

    def deriv(self) -> "RationalFn":
        num = self.num.deriv() * self.den - self.num * self.den.deriv()
        den = self.den * self.den
        p = None if self._poles is None else np.repeat(self._poles, 2)
        return RationalFn(num, den, poles=p)

    def __repr__(self):
        return f"RationalFn(num={self.num!r}, den={self.den!r})"


# ---------------------------------------------------------------------------
# residue engine
# ---------------------------------------------------------------------------

def _cluster(points: np.ndarray) -> list:
    """Group a pole multiset into clusters of numerically equal points.

    Returns a list of (center, multiplicity, indices).  The gap merges
    the exact duplicates carried by factored pole caches and the
    O(sqrt(eps)) noise of a rooted double root, while keeping genuinely
    distinct poles apart down to microscale separations (the
    near-real-axis spike fixtures sit 1e-6 apart).  Coefficient-built
    denominators with roots of multiplicity three or more should use
    factored constructors instead; their eigenvalue-rooted estimates
    scatter wider than this gap.
    """
    pts = np.asarray(points)
    n = pts.size
    used = np.zeros(n, dtype=bool)
    clusters = []
    for i in range(n):
        if used[i]:
            continue
        gap = 1e-7 * max(1.0, abs(pts[i]))
        idx = np.nonzero(~used & (np.abs(pts - pts[i]) <= gap))[0]
        used[idx] = True
        clusters.append((np.mean(pts[idx]), idx.size, idx))
    return clusters


def _series_div(n: np.ndarray, d: np.ndarray, m: int) -> np.ndarray:
    """First m coefficients of the power series n(t)/d(t), d[0] != 0."""
    q = np.zeros(m, dtype=np.complex128)
    for k in range(m):
        acc = n[k] if k < n.size else 0.0
        for j in range(k):
            acc -= q[j] * (d[k - j] if k - j < d.size else 0.0)
        q[k] = acc / d[0]
    return q


def l2_inner(f: RationalFn, g: RationalFn, tol: Tolerances = DEFAULT) -> complex:
    """<f, g> = integral of f(x) conj(g(x)) dx over R, in closed form.

    The integrand extends to f * g.para() in the upper half plane; the
    integral equals 2*pi*i times the sum of upper-half-plane residues,
    provided the product decays like |x|^-2 and carries no real poles.

    Raises SlowDecay or RealPole when those hypotheses fail.
    """
    h = f * g.para()
    if h.is_zero():
        return 0.0 + 0.0j
    if h.num_degree > h.den_degree - 2:
        raise SlowDecay(
            f"degree gap {h.den_degree - h.num_degree} < 2; integral diverges"
        )
    poles = h.poles(tol)
    total = 0.0 + 0.0j
    for center, mult, _ in _cluster(poles):
        if mult >= 2:
            # clustered eigenvalue roots carry O(sqrt(eps)) noise; the
            # center is a simple root of den^(mult-1), so a couple of
            # Newton steps restore it to machine precision
            dpoly = h.den
            for _ in range(mult - 1):
                dpoly = dpoly.deriv()
            dd = dpoly.deriv()
            for _ in range(3):
                val, dval = dpoly(center), dd(center)
                if abs(dval) < 1e-300:
                    break
                step = val / dval
                if abs(step) > 0.1 * (1.0 + abs(center)):
                    break
                center = center - step
        if abs(center.imag) <= tol.rho_real:
            # removable only if the numerator vanishes to full order
            tay = h.num.taylor_at(center, mult - 1)
            bound = tol.rho_gcd * max(h.num.norm(), 1e-300) * max(1.0, abs(center)) ** max(1, h.num_degree)
            if np.all(np.abs(tay) <= bound):
                continue
            raise RealPole(f"pole at {center} within {tol.rho_real} of R")
        if center.imag < 0:
            continue
        # den = (z - c)^m * reduced, so the Taylor coefficients of the
        # reduced factor at c are den's shifted up by m; this stays in
        # exact coefficient arithmetic instead of rebuilding from roots
        den_tay = h.den.taylor_at(center, 2 * mult - 1)
        ntay = h.num.taylor_at(center, mult - 1)
        q = _series_div(ntay, den_tay[mult:], mult)
        total += q[mult - 1]
    return complex(2j * np.pi * total)


def l2_norm(f: RationalFn, tol: Tolerances = DEFAULT) -> float:
    v = l2_inner(f, f, tol)
    return float(np.sqrt(max(v.real, 0.0)))


# ---------------------------------------------------------------------------
# quadrature oracle
# ---------------------------------------------------------------------------

def quad_oracle(f: RationalFn, g: RationalFn, tol: Tolerances = DEFAULT,
                weight: RationalFn = None) -> complex:
    """Same integral as :func:`l2_inner`, by adaptive quadrature.

    Independent of the residue engine: substitutes x = tan(t), which
    maps R to (-pi/2, pi/2) and makes the integrand bounded whenever the
    product decays like |x|^-2.  Used as the cross-check oracle.

    weight, when given, multiplies the integrand pointwise and must be
    real on R.  The factors are never combined into one rational
    function: a weighted product can carry structurally near-cancelling
    factor pairs whose cancelled form misrepresents the function, while
    each factor on its own evaluates cleanly.
    """
    if weight is None:
        h = f * g.para()
        if h.is_zero():
            return 0.0 + 0.0j
        decay = h.num_degree - h.den_degree
        pole_sets = [f.poles(tol), g.poles(tol)]
    else:
        if f.is_zero() or g.is_zero() or weight.is_zero():
            return 0.0 + 0.0j
        decay = ((f.num_degree - f.den_degree)
                 + (g.num_degree - g.den_degree)
                 + (weight.num_degree - weight.den_degree))
        pole_sets = [f.poles(tol), g.poles(tol), weight.poles(tol)]
    if decay > -2:
        raise SlowDecay("product does not decay like |x|^-2")
    for p in np.concatenate(pole_sets):
        if abs(p.imag) <= tol.rho_real:
            raise RealPole(f"pole at {p} within {tol.rho_real} of R")

    def integrand(t):
        x = np.tan(t)
        v = f(x) * np.conj(g(x)) * (1.0 + x * x)
        if weight is not None:
            v = v * weight(x).real
        return v

    lim = np.pi / 2
    re, re_err = integrate.quad(lambda t: integrand(t).real, -lim, lim,
                                epsabs=1e-13, epsrel=3e-12, limit=400)
    im, im_err = integrate.quad(lambda t: integrand(t).imag, -lim, lim,
                                epsabs=1e-13, epsrel=3e-12, limit=400)
    val = complex(re, im)
    err = re_err + im_err
    if err > max(tol.quad_abs, tol.quad_rel * abs(val)):
        raise QuadratureFailure(f"error estimate {err:.3e} for value {val:.6e}")
    return val


def quad_distance(f: RationalFn, g: RationalFn,
                  tol: Tolerances = DEFAULT) -> float:
    """L2 distance between f and g by pointwise-difference quadrature.

    Subtracting evaluations instead of coefficients matters: the
    coefficient form of f - g inherits eps-level noise scaled by the
    intermediate coefficient norms, which for high degree products can
    swamp a genuinely tiny distance.  Pointwise the floor is
    eps * |f(x)|.
    """

    def integrand(t):
        x = np.tan(t)
        d = f(x) - g(x)
        return (d.real * d.real + d.imag * d.imag) * (1.0 + x * x)

    lim = np.pi / 2
    val, err = integrate.quad(integrand, -lim, lim,
                              epsabs=1e-13, epsrel=3e-12, limit=400)
    if err > max(tol.quad_abs, tol.quad_rel * abs(val)):
        raise QuadratureFailure(f"error estimate {err:.3e} for value {val:.6e}")
    return float(np.sqrt(max(val, 0.0)))


def quad_interval(f: RationalFn, g: RationalFn, a: float, b: float,
                  tol: Tolerances = DEFAULT) -> complex:
    """integral over [a, b] of f conj(g), adaptive quadrature."""
    for p in np.concatenate([f.poles(tol), g.poles(tol)]):
        if abs(p.imag) <= tol.rho_real and a - 1.0 <= p.real <= b + 1.0:
            raise RealPole(f"pole at {p} near [{a}, {b}]")

    def integrand(x):
        return f(x) * np.conj(g(x))

    re, re_err = integrate.quad(lambda x: integrand(x).real, a, b,
                                epsabs=1e-13, epsrel=3e-12, limit=400)
    im, im_err = integrate.quad(lambda x: integrand(x).imag, a, b,
                                epsabs=1e-13, epsrel=3e-12, limit=400)
    val = complex(re, im)
    if re_err + im_err > max(tol.quad_abs, tol.quad_rel * abs(val)):
        raise QuadratureFailure(f"error estimate {re_err + im_err:.3e}")
    return val


# ---------------------------------------------------------------------------
# spectral factorization
# ---------------------------------------------------------------------------

def tan_grid(n: int = 256) -> np.ndarray:
    """n real sample points, tan-spaced so the tails are represented."""
    t = (np.arange(n) + 0.5) / n * np.pi - np.pi / 2
    return np.tan(t)


def _pair_conjugates(roots: np.ndarray, tol: Tolerances):
    """Split a self-conjugate root multiset into (lower-half picks, real).

    Each strictly complex root must have a conjugate partner; real roots
    must occur with even multiplicity.  Returns the roots of the stable
    factor: one of each conjugate pair (the lower-half one) plus each
    real root at half multiplicity.
    """
    rem = list(roots)
    picks = []
    reals = []
    while rem:
        r = rem.pop()
        if abs(r.imag) <= tol.rho_real:
            reals.append(r.real)
            continue
        # find the conjugate partner
        target = np.conj(r)
        gap = 1e-6 * max(1.0, abs(r))
        hit = None
        for j, s in enumerate(rem):
            if abs(s - target) <= gap:
                hit = j
                break
        if hit is None:
            raise NotSelfParaconjugate(f"root {r} has no conjugate partner")
        rem.pop(hit)
        picks.append(r if r.imag < 0 else target)
    reals.sort()
    real_picks = []
    i = 0
    while i < len(reals):
        j = i
        while j < len(reals) and abs(reals[j] - reals[i]) <= 1e-6 * max(1.0, abs(reals[i])):
            j += 1
        count = j - i
        if count % 2:
            raise NotNonnegative(
                f"real root at {reals[i]:.6g} with odd multiplicity {count}"
            )
        real_picks.extend([np.mean(reals[i:j])] * (count // 2))
        i = j
    return picks, real_picks


def spectral_factor(F: RationalFn, tol: Tolerances = DEFAULT) -> RationalFn:
    """Outer-type factor a with |a|^2 = F on R.

    F must be a nonnegative self-paraconjugate rational density that is
    bounded on R.  The factor collects the lower-half zeros and poles of
    F (real zeros at half multiplicity) and a positive scale, so a is
    analytic and zero-free in the open upper half plane.

    The result is verified pointwise on a tan-spaced grid.
    """
    if F.is_zero():
        raise NotNonnegative("zero density has no normalized factor")
    # self-paraconjugacy: with a monic denominator this is realness of
    # all coefficients up to the verification tolerance
    for poly in (F.num, F.den):
        if np.max(np.abs(poly.coeffs.imag)) > 1e-9 * max(1.0, poly.norm()):
            raise NotSelfParaconjugate("coefficients are not real")
    if F.num_degree > F.den_degree:
        raise SlowDecay("density unbounded at infinity")

    zpicks, zreal = _pair_conjugates(F.zeros(tol), tol)
    ppicks, preal = _pair_conjugates(F.poles(tol), tol)
    if preal:
        raise RealPole(f"density has real poles at {preal}")
    a_zeros = np.array(zpicks + zreal, dtype=np.complex128)
    a_poles = np.array(ppicks, dtype=np.complex128)
    a = RationalFn.from_factored(1.0, a_zeros, a_poles, tol)

    # positive scale fixed at the sample point where F is largest
    xs = tan_grid(64)
    Fx = F(xs).real
    if np.min(Fx) < -tol.eps_fac * max(1.0, np.max(np.abs(Fx))):
        raise NotNonnegative(f"density attains {np.min(Fx):.3e} on R")
    k = int(np.argmax(Fx))
    ax = a(xs[k])
    if abs(ax) == 0.0:
        raise NonConvergence("factor vanishes at the calibration point")
    c = np.sqrt(max(Fx[k], 0.0)) / abs(ax)
    a = a * c

    # pointwise verification
    grid = tan_grid(256)
    lhs = np.abs(a(grid)) ** 2
    rhs = F(grid).real
    scale = max(1.0, float(np.max(np.abs(rhs))))
    err = float(np.max(np.abs(lhs - rhs)))
    if err > tol.eps_fac * scale:
        raise NonConvergence(f"factorization residual {err:.3e}")
    return a
