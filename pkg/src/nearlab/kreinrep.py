"""Spectral representation of a symmetric restriction through its gauge.

A restriction T with defect dimensions (1, 1) carries a canonical family
of vector-valued data built from the unit gauge u spanning ran(T+i)^perp
and a chosen self-adjoint extension A:

* the deficiency vector field z -> psi(z) with psi(i) = u, where psi(z)
  spans ran(T - conj(z))^perp away from the spectrum of A;
* the scalar transform f -> fhat, fhat(z) = <f, e(conj z)> with the
  evaluation vector e(z) = psi(z) / <psi(z), u>, which is an isometry of
  the subspace onto a function space on R;
* spectral measures for the gauge: the discrete one carried by the
  eigendata of A, and the absolutely continuous one with density
  |u(x)|^2 inherited from ambient multiplication.

Both measures satisfy the same Parseval identity
<f, g> = integral of fhat conj(ghat) against the measure, and windowed
variants against spectral projections.  For restrictions living on a
model space the de Branges route produces a polynomial E and a weight
R(x) that embeds the model space isometrically into L2(R); for model
frames R is identically 1.

Everything here is finite-dimensional and rational.  The transform of
any subspace element is a ratio of two explicit polynomials sharing the
denominator cancellation, so no limits are taken at the eigenvalues of
A: fhat is evaluated there directly.

Convention: r denotes the (n-1)-degree polynomial with
<u, psi(conj z)> = r(z) / prod(z - x_k).  Its zeros lie strictly in the
open upper half plane (at any point of the closed lower half plane the
gauge pairing cannot vanish, since the pairing of defect directions
there is controlled by the regularity of T), and they are the only
poles of transforms.  In particular transforms are smooth on all of R.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .config import DEFAULT, Tolerances
from .errors import (
    DomainViolation,
    GaugeDegenerate,
    MeasureMismatch,
    NoIsometry,
    NonConvergence,
    NotDefectVector,
    NotNonnegative,
    QuadratureFailure,
    RealZeroE,
    SpectrumCollision,
    UnboundedMultiplier,
)
from .modelspace import ModelSpace
from .ratfield import (
    Poly,
    RationalFn,
    l2_inner,
    l2_norm,
    quad_interval,
    quad_oracle,
    tan_grid,
)
from .symrestrict import SymRestriction, selfadjoint_extensions

_ATOM_GAP = 1e-8


@dataclass(frozen=True)
class KreinFrame:
    """Gauge, extension eigendata, and transform polynomials of T.

    nodes and vecs are the eigenvalues and orthonormal eigenvectors of
    the extension matrix A (y-coordinates).  gauge_coeff[k] = <u, v_k>
    and weights[k] = |gauge_coeff[k]|^2; the weights are the atom
    masses of the discrete gauge measure and sum to ||u||^2 = 1.

    r is the transform of the gauge before evaluation normalization,
    cleared of its real poles: a polynomial of degree n-1 with no real
    zeros.  E is the monic polynomial with zeros conjugate to those of
    the inner function when the restriction lives on a model space
    (None otherwise), and scale2 is the positive constant that makes
    the |E|^2-normalized embedding isometric.
    """

    T: SymRestriction
    alpha: complex
    u: RationalFn
    u_y: np.ndarray
    A: np.ndarray
    nodes: np.ndarray
    vecs: np.ndarray
    gauge_coeff: np.ndarray
    weights: np.ndarray
    h: Poly
    r: RationalFn
    r_poly: Poly = field(repr=False)
    r_roots: np.ndarray = field(repr=False)
    E: Poly | None
    scale2: float | None
    tol: Tolerances = field(repr=False)

    @property
    def dim(self) -> int:
        return self.nodes.size


def _pairing_numerator(frame_nodes, gauge_coeff, f_eig) -> Poly:
    """Polynomial N with <f, psi(conj z)> = N(z) / prod(z - x_k).

    f_eig holds the eigenbasis coefficients <f, v_k>.  Expanding the
    resolvent in the eigenbasis gives the partial-fraction sum
    sum_k conj(a_k) <f, v_k> (x_k + i) / (x_k - z); clearing the
    common monic denominator yields N.
    """
    n = frame_nodes.size
    N = Poly.zero()
    for k in range(n):
        beta = -np.conj(gauge_coeff[k]) * f_eig[k] * (frame_nodes[k] + 1j)
        N = N + Poly.from_roots(np.delete(frame_nodes, k), lead=beta)
    return N


def build_frame(T: SymRestriction, alpha, tol: Tolerances = None,
                gauge: RationalFn = None) -> KreinFrame:
    """Assemble the representation frame for the extension labeled alpha.

    gauge defaults to the plus defect vector of T; a caller may pass
    any unit vector in the same defect line (a phase rotation) and all
    measure identities are unchanged.  Raises GaugeDegenerate when the
    gauge is orthogonal to an eigenvector of the extension (the gauge
    then fails to be cyclic), and SpectrumCollision when the extension
    has a near-degenerate eigenvalue pair.
    """
    tol = tol or T.tol
    A = selfadjoint_extensions(T, alpha)
    if gauge is None:
        u, u_y = T.defect_plus, T.defect_plus_y
    else:
        c, res = T.space.coords(gauge)
        u_y = T.space.y_from_c(c)
        if res > tol.eps_inner * 10 or abs(np.linalg.norm(u_y) - 1.0) > tol.eps_inner:
            raise NotDefectVector("gauge must be a unit vector in the subspace")
        if abs(abs(np.vdot(T.defect_plus_y, u_y)) - 1.0) > tol.eps_inner:
            raise NotDefectVector("gauge is not in the plus defect line")
        u = gauge

    nodes, vecs = np.linalg.eigh(A)
    gaps = np.diff(nodes)
    if gaps.size and gaps.min() < tol.delta_pair:
        raise SpectrumCollision(
            f"extension eigenvalues separated by only {gaps.min():.3e}"
        )
    a = vecs.conj().T @ u_y  # <u, v_k>
    sigma = np.abs(a) ** 2
    if sigma.min() < 1e-12:
        raise GaugeDegenerate(
            "gauge has zero weight on an extension eigenvector"
        )
    h = Poly.from_roots(nodes)
    r_poly = _pairing_numerator(nodes, a, a)
    r_roots = r_poly.roots(tol) if r_poly.degree >= 1 else np.zeros(0, complex)
    if np.any(np.abs(r_roots.imag) <= tol.rho_real):
        raise GaugeDegenerate("gauge pairing vanishes at a real point")
    r = RationalFn(r_poly, Poly.one(), zeros=r_roots, poles=[], cancel=False)

    theta = T.space.theta
    E = scale2 = None
    if theta is not None:
        E = theta.den_poly
        E_roots = np.conj(np.asarray(theta.zeros, dtype=np.complex128))
        if np.any(np.abs(E_roots.imag) <= tol.rho_real):
            raise RealZeroE("inner function zero too close to R")
        rE = RationalFn(r_poly, E, poles=E_roots, cancel=False)
        scale2 = float(l2_inner(rE, rE, tol).real)
        if scale2 <= 0:
            raise GaugeDegenerate("degenerate embedding normalization")

    return KreinFrame(T=T, alpha=complex(alpha), u=u, u_y=u_y, A=A,
                      nodes=nodes, vecs=vecs, gauge_coeff=a, weights=sigma,
                      h=h, r=r, r_poly=r_poly, r_roots=r_roots,
                      E=E, scale2=scale2, tol=tol)


# ---------------------------------------------------------------------------
# deficiency and evaluation vectors
# ---------------------------------------------------------------------------

def deficiency_vector_y(frame: KreinFrame, z: complex) -> np.ndarray:
    z = complex(z)
    if np.min(np.abs(frame.nodes - z)) < _ATOM_GAP:
        raise SpectrumCollision(f"{z} is within {_ATOM_GAP} of an eigenvalue")
    resolvent = np.linalg.solve(frame.A - z * np.eye(frame.dim), frame.u_y)
    psi = frame.u_y + (z - 1j) * resolvent
    # the same vector by the one-step form; disagreement means the
    # resolvent solve lost accuracy
    alt = (frame.A - 1j * np.eye(frame.dim)) @ resolvent
    if np.linalg.norm(psi - alt) > 1e-9 * max(1.0, np.linalg.norm(psi)):
        raise NonConvergence("deficiency vector formulas disagree")
    return psi


def deficiency_vector(frame: KreinFrame, z: complex) -> RationalFn:
    """The vector psi(z) = u + (z-i)(A-z)^{-1} u as a subspace element.

    psi(i) = u, and psi(z) spans ran(T - conj(z))^perp.  Meromorphic in
    z with simple poles at the eigenvalues of A; SpectrumCollision is
    raised within 1e-8 of those.
    """
    y = deficiency_vector_y(frame, z)
    return frame.T.space.synthesize(frame.T.space.c_from_y(y))


def evaluation_vector_y(frame: KreinFrame, z: complex) -> np.ndarray:
    """psi(z) normalized by its gauge pairing: e(z) = psi(z)/<psi(z),u>.

    <f, e(conj z)> evaluates the transform of f at z.  Raises
    GaugeDegenerate where the pairing vanishes; such points exist only
    in the open lower half plane (for the canonical double-zero model
    fixture, at z = -i exactly).
    """
    psi = deficiency_vector_y(frame, z)
    pairing = np.vdot(frame.u_y, psi)  # <psi(z), u>
    if abs(pairing) < 1e-12:
        raise GaugeDegenerate(f"gauge pairing vanished at {z}")
    return psi / pairing


def evaluation_vector(frame: KreinFrame, z: complex) -> RationalFn:
    y = evaluation_vector_y(frame, z)
    return frame.T.space.synthesize(frame.T.space.c_from_y(y))


# ---------------------------------------------------------------------------
# the transform
# ---------------------------------------------------------------------------

def _coords_in_space(frame: KreinFrame, f: RationalFn) -> np.ndarray:
    c, res = frame.T.space.coords(f)
    y = frame.T.space.y_from_c(c)
    if res > frame.tol.eps_inner * 10 * (1.0 + np.linalg.norm(y)):
        # coords() floors at sqrt(eps cond) times the norm; confirm
        # pointwise before refusing the vector
        _, res = frame.T.space.member_residual(f)
        if res > frame.tol.eps_inner * 10 * (1.0 + np.linalg.norm(y)):
            raise DomainViolation("vector is not in the represented subspace")
    return y


def transform(frame: KreinFrame, f: RationalFn) -> RationalFn:
    """The scalar representative fhat of a subspace element.

    fhat(z) = <f, e(conj z)> as a ratio of two polynomials of degree at
    most n-1 with the common spectral denominator cancelled: the only
    poles are the (upper half plane) zeros of the gauge pairing, so
    fhat is smooth on R and finite at every eigenvalue of A.  The gauge
    itself transforms to the constant 1.
    """
    f_y = _coords_in_space(frame, f)
    f_eig = frame.vecs.conj().T @ f_y
    N = _pairing_numerator(frame.nodes, frame.gauge_coeff, f_eig)
    return RationalFn(N, frame.r_poly, poles=frame.r_roots, tol=frame.tol)


def transform_limit(frame: KreinFrame, f: RationalFn, k: int,
                    step: float = 1e-3) -> tuple:
    """Two-sided resolvent-route values of fhat beside the k-th atom.

    Evaluates <f, e(x_k -+ step)> through the vector formulas rather
    than the cancelled rational form; used to confirm that the
    transform continues across the atoms.
    """
    f_y = _coords_in_space(frame, f)
    x = float(frame.nodes[k])
    out = []
    for s in (-step, step):
        e = evaluation_vector_y(frame, x + s)
        out.append(complex(np.vdot(e, f_y)))
    return tuple(out)


# ---------------------------------------------------------------------------
# gauge spectral measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralMeasure:
    """A measure nu on R with <f, g> = integral fhat conj(ghat) d nu.

    kind "discrete": atoms [(x_k, w_k)] from a self-adjoint extension,
    w_k > 0, total mass ||u||^2.  kind "abscont": rational density
    (= |u(x)|^2 for the ambient multiplication operator).  The gauge
    the measure belongs to is carried along so identity checks can
    refuse mismatched pairs.
    """

    kind: str
    gauge: RationalFn
    atoms: tuple = None
    density: RationalFn = None

    def total_mass(self, tol: Tolerances = DEFAULT) -> float:
        if self.kind == "discrete":
            return float(sum(w for _, w in self.atoms))
        return float(l2_inner(self.density, RationalFn.const(1.0), tol).real)


def discrete_measure(frame: KreinFrame) -> SpectralMeasure:
    atoms = tuple((float(x), float(w))
                  for x, w in zip(frame.nodes, frame.weights))
    total = sum(w for _, w in atoms)
    if abs(total - 1.0) > 1e-9:
        raise MeasureMismatch(f"atom masses sum to {total:.12f}, not 1")
    return SpectralMeasure(kind="discrete", gauge=frame.u, atoms=atoms)


def abscont_measure(frame: KreinFrame) -> SpectralMeasure:
    density = frame.u * frame.u.para()
    return SpectralMeasure(kind="abscont", gauge=frame.u, density=density)


def density_real_zeros(measure: SpectralMeasure,
                       tol: Tolerances = DEFAULT) -> np.ndarray:
    """Real zeros of an absolutely continuous density (the finitely
    many points where it fails to be positive)."""
    if measure.kind != "abscont":
        return np.zeros(0)
    zs = measure.density.zeros(tol)
    real = zs[np.abs(zs.imag) <= tol.rho_real]
    return np.unique(np.round(real.real, 9))


def _check_gauge(frame: KreinFrame, measure: SpectralMeasure):
    if l2_norm(measure.gauge - frame.u, frame.tol) > 1e-8:
        raise MeasureMismatch("measure gauge differs from the frame gauge")


def _normalize_window(window):
    if window is None:
        return None
    if np.ndim(window[0]) == 0:
        window = [window]
    return [(float(a), float(b)) for a, b in window]


def verify_isometry(frame: KreinFrame, measure: SpectralMeasure, pairs,
                    window=None) -> dict:
    """Parseval identity of the transform against a gauge measure.

    For each (f, g) the measure-side pairing of fhat and ghat is
    compared with <f, g>; with a window (an interval (a, b) or a list
    of intervals) the comparison is against the spectral projection
    <chi(A) f, g> (discrete) or <chi(M) f, g> (ambient).  The two sides
    travel independent routes: polynomial evaluation against eigendata
    sums or quadrature against the residue engine.
    """
    _check_gauge(frame, measure)
    windows = _normalize_window(window)
    residuals = []
    for f, g in pairs:
        fh = transform(frame, f)
        gh = transform(frame, g)
        if measure.kind == "discrete":
            lhs = 0.0 + 0.0j
            for (x, w) in measure.atoms:
                if windows and not any(a <= x <= b for a, b in windows):
                    continue
                lhs += fh(x) * np.conj(gh(x)) * w
            if windows is None:
                rhs = l2_inner(f, g, frame.tol)
            else:
                f_y = _coords_in_space(frame, f)
                g_y = _coords_in_space(frame, g)
                keep = np.zeros(frame.dim, dtype=bool)
                for j, x in enumerate(frame.nodes):
                    keep[j] = any(a <= x <= b for a, b in windows)
                fe = frame.vecs.conj().T @ f_y
                ge = frame.vecs.conj().T @ g_y
                rhs = complex(np.sum(fe[keep] * np.conj(ge[keep])))
        else:
            fh_w = fh * measure.density
            if windows is None:
                lhs = l2_inner(fh_w, gh, frame.tol)
                rhs = l2_inner(f, g, frame.tol)
            else:
                lhs = sum(quad_interval(fh_w, gh, a, b, frame.tol)
                          for a, b in windows)
                rhs = sum(quad_interval(f, g, a, b, frame.tol)
                          for a, b in windows)
        residuals.append(abs(lhs - rhs))
    check = "krein-%s-%s" % (measure.kind,
                             "windowed" if windows else "isometry")
    mx = float(max(residuals)) if residuals else 0.0
    return {"check": check, "pairs": len(residuals), "max_residual": mx,
            "tolerance": 1e-7, "pass": mx <= 1e-7,
            "residuals": [float(x) for x in residuals]}


# ---------------------------------------------------------------------------
# de Branges route
# ---------------------------------------------------------------------------

def debranges_frame(frame: KreinFrame):
    """(E, r, R): structure polynomial, gauge numerator, embedding weight.

    E is the monic polynomial whose zeros are the conjugated zeros of
    the inner function, so the inner function is recovered (up to its
    unimodular constant) as E~/E with E~ the coefficient-conjugate.
    R(x) = scale2 * |E(x)/r(x)|^2 |u(x)|^2 is the rational weight that
    embeds the model space isometrically in L2(R); for frames built
    over a model space with the canonical gauge it is identically 1.
    """
    if frame.E is None:
        raise DomainViolation(
            "de Branges data requires a frame over a model space"
        )
    E = frame.E
    mu = frame.u * frame.u.para()
    EE = E * E.para()
    rr = RationalFn(frame.r_poly * frame.r_poly.para(), Poly.one(),
                    zeros=np.concatenate([frame.r_roots,
                                          np.conj(frame.r_roots)]),
                    poles=[], cancel=False)
    R = (mu.mul_poly(EE) / rr) * frame.scale2
    vals = R(tan_grid(256))
    if np.max(np.abs(vals.imag)) > 1e-8 * max(1.0, np.max(np.abs(vals))):
        raise NonConvergence("embedding weight is not real on R")
    if vals.real.min() <= 0:
        raise NotNonnegative("embedding weight fails positivity on R")
    return E, frame.r, R


def _quad_line(fn, tol: Tolerances) -> complex:
    """Adaptive quadrature of a pointwise callable over R, tan
    substitution; the contract for non-rational integrands."""

    def part(which):
        return integrate.quad(
            lambda t: which(fn(np.tan(t)) * (1.0 + np.tan(t) ** 2)),
            -np.pi / 2, np.pi / 2, epsabs=1e-13, epsrel=3e-12, limit=400)

    re, re_err = part(np.real)
    im, im_err = part(np.imag)
    val = complex(re, im)
    if re_err + im_err > max(tol.quad_abs, tol.quad_rel * abs(val)):
        raise QuadratureFailure(f"error estimate {re_err + im_err:.3e}")
    return val


def verify_partial_isometry(frame: KreinFrame, pairs=None, count: int = 5,
                            seed: int = 20260822) -> dict:
    """Isometric embedding of the model space under the weight R.

    Checks <sqrt(R) f, sqrt(R) g> over L2(R) against <f, g> for pairs
    from the model space.  The weighted side is integrated pointwise
    (sqrt(R) is not rational); the plain side uses the residue engine.
    """
    E, r, R = debranges_frame(frame)
    msp = ModelSpace(frame.T.space.theta, frame.tol)
    if pairs is None:
        rng = np.random.default_rng(seed)
        pairs = [(msp.random_element(rng), msp.random_element(rng))
                 for _ in range(count)]
    residuals = []
    for f, g in pairs:

        def weighted(x, f=f, g=g):
            w = np.sqrt(np.maximum(R(x).real, 0.0))
            return (w * f(x)) * np.conj(w * g(x))

        lhs = _quad_line(weighted, frame.tol)
        rhs = l2_inner(f, g, frame.tol)
        residuals.append(abs(lhs - rhs))
    mx = float(max(residuals))
    return {"check": "debranges-partial-isometry", "pairs": len(residuals),
            "max_residual": mx, "tolerance": 1e-7, "pass": mx <= 1e-7,
            "residuals": [float(x) for x in residuals]}


# ---------------------------------------------------------------------------
# compression of multiplication algebras
# ---------------------------------------------------------------------------

def compression_multiplier(frame: KreinFrame) -> RationalFn:
    """The multiplier implementing the embedding V of the subspace into
    the model space: v = r / (sqrt(scale2) E u), so V f = v f.

    For model frames v is unimodular on R (for the double-zero fixture
    it is the constant -i).
    """
    if frame.E is None:
        raise DomainViolation("multiplier requires a model-space frame")
    E_roots = np.conj(np.asarray(frame.T.space.theta.zeros, np.complex128))
    rE = RationalFn(frame.r_poly, frame.E, poles=E_roots, cancel=False)
    return (rE / frame.u) * (1.0 / np.sqrt(frame.scale2))


def verify_compression_identity(space, model_space: ModelSpace, multipliers,
                                v0: RationalFn = None, pairs=None,
                                count: int = 3, seed: int = 424242,
                                frame: KreinFrame = None,
                                tol: Tolerances = DEFAULT) -> dict:
    """Compressions of bounded multiplication agree through the weighted
    embedding: <P_S m f, g> = <P_K sqrt(R) m sqrt(R) P_K v0 f, v0 g>.

    space spans S, model_space is the target K, and v0 is the
    multiplier implementing the embedding (taken from the frame when
    omitted).  The weight is recovered from the multiplier itself,
    R = 1/(v0 conj(v0)), which reduces to 1 when v0 is unimodular.
    Both sides are quadrature integrals; the projections drop from the
    bilinear forms because g and v0 g lie in the respective ranges,
    but membership of v0 f in the model space is checked explicitly.
    """
    if v0 is None:
        if frame is None:
            raise DomainViolation("need either v0 or a frame to derive it")
        v0 = compression_multiplier(frame)
    Rw = 1.0 / (v0 * v0.para())

    grid = tan_grid(256)
    for m in multipliers:
        if np.max(np.abs(m(grid))) > 1e3:
            raise UnboundedMultiplier("multiplier exceeds 1e3 on R")

    if pairs is None:
        rng = np.random.default_rng(seed)
        pairs = []
        for _ in range(count):
            c1 = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
            c2 = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
            pairs.append((space.synthesize(c1), space.synthesize(c2)))

    for f, _ in pairs[:1]:
        vf = v0 * f
        if abs(l2_norm(vf, tol) - l2_norm(f, tol)) > 1e-6 * (1 + l2_norm(f, tol)):
            raise NoIsometry("v0 does not map S isometrically")
        if not model_space.contains(vf, tol):
            raise NoIsometry("v0 does not map S into the model space")

    rows = []
    for m in multipliers:
        worst = 0.0
        for f, g in pairs:
            lhs = quad_oracle(m * f, g, tol)
            rhs = quad_oracle((Rw * m) * (v0 * f), v0 * g, tol)
            worst = max(worst, abs(lhs - rhs))
        rows.append({"check": "compression-identity",
                     "max_residual": float(worst), "tolerance": 1e-6,
                     "pass": worst <= 1e-6})
    mx = max(row["max_residual"] for row in rows)
    return {"check": "compression-identity", "multipliers": len(rows),
            "max_residual": float(mx), "tolerance": 1e-6,
            "pass": mx <= 1e-6, "rows": rows}
