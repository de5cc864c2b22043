"""Exception types shared across the package.

Each numerical contract that can fail gets its own class so callers can
distinguish "the input is outside the domain of the operation" from "the
algorithm did not converge".
"""


class LabError(Exception):
    """Base class for all package errors."""


# ---- rational arithmetic ----

class NonConvergence(LabError):
    """Root polishing or a verification residual failed to meet its bound."""


class RealPole(LabError):
    """A pole sits on (or numerically on) the real axis where an integral
    along R or an evaluation requires none."""


class SlowDecay(LabError):
    """Integrand does not decay at least like |x|^-2 at infinity."""


class NotNonnegative(LabError):
    """Spectral factorization input is negative somewhere on R."""


class NotSelfParaconjugate(LabError):
    """Input is not fixed by the para-conjugation f*(z) = conj(f(conj z))."""


class QuadratureFailure(LabError):
    """Adaptive quadrature error estimate exceeded the requested target."""


# ---- inner functions ----

class PoleEvaluation(LabError):
    """Evaluation requested at (or too close to) a pole."""


class DomainViolation(LabError):
    """Argument outside the operation's domain (wrong half plane, modulus
    out of range, Mobius image at infinity)."""


class NotH2Disk(LabError):
    """Function is not analytic on the closed unit disk."""


class NotStrictlyContractiveAtI(LabError):
    """|theta(i)| is too close to 1 for the Crofoot normal form."""


# ---- model spaces ----

class PoleCollision(LabError):
    """Kernel anchor collides with a pole of the inner function (the
    conjugate of one of its zeros)."""


class IllConditioned(LabError):
    """A Gram or coordinate matrix exceeds the conditioning budget."""


class AlphaAtInfinity(LabError):
    """Clark parameter equals the boundary value of theta at infinity; one
    node escapes and the extension is not densely defined."""


# ---- symmetric restrictions ----

class NoSymmetricRestriction(LabError):
    """The domain {f in S : x f in S} has codimension > 1."""


class NotDefectVector(LabError):
    """Supplied vector is not orthogonal to ran(T - conj(w))."""


class NonDenselyDefinedExtension(LabError):
    """The requested extension parameter is the excluded one."""


# ---- Krein frames ----

class SpectrumCollision(LabError):
    """Resolvent evaluation requested at an eigenvalue of the extension."""


class GaugeDegenerate(LabError):
    """The defect pairing <psi(z), u> vanishes at a point where the
    normalized transform is needed."""


class MeasureMismatch(LabError):
    """A spectral measure is used with a frame it was not built from."""


class RealZeroE(LabError):
    """The de Branges polynomial acquired a real zero."""


class UnboundedMultiplier(LabError):
    """Multiplier is unbounded (or numerically huge) on the real axis."""


# ---- channels ----

class NotPSD(LabError):
    """Choi matrix has an eigenvalue below the PSD tolerance."""


class NotUnital(LabError):
    """Channel fails the unitality test where unitality is required."""


class ChannelMismatch(LabError):
    """Two Kraus families do not implement the same channel."""


class NoIsometry(LabError):
    """No scalar isometry relates two Kraus families of a common channel."""


class NotFixingAlgebra(LabError):
    """Channel does not fix the prescribed algebra pointwise."""


class NotComposed(LabError):
    """Map pair fails the factorization-through-composition premise."""


class ContractivityViolation(LabError):
    """A multiplier expected to be a contraction is not one."""


# ---- near invariance ----

class NotRestrictable(LabError):
    """Subspace admits no symmetric restriction of multiplication with
    deficiency indices (1, 1)."""


class FactorizationResidual(LabError):
    """Recovered factorization fails its Gram agreement bound."""


# ---- cli ----

class ConfigInvalid(LabError):
    """Run configuration failed validation."""
