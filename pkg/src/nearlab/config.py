"""Tolerance configuration.

Every module takes its numerical thresholds from a single frozen
:class:`Tolerances` instance so that suites can tighten or relax them in
one place.  The defaults form the contract: they are the values that all
shipped tests and the acceptance gate are calibrated against.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # gcd/cancellation root matching, relative to coefficient scale
    rho_gcd: float = 1e-8
    # half width of the strip around R inside which a pole counts as real
    rho_real: float = 1e-7
    # polynomial root residual bound after polishing
    eps_root: float = 1e-9
    # inner product / unitarity verification bound
    eps_inner: float = 1e-8
    # pointwise factorization agreement bound
    eps_fac: float = 1e-8
    # conditioning budget for Gram and coordinate matrices
    kappa_max: float = 1e8
    # regularity floor: smallest singular value of the domain map
    delta_reg: float = 1e-6
    # minimal pairwise separation of spectral data
    delta_pair: float = 1e-8
    # adaptive quadrature relative error target
    quad_rel: float = 1e-10
    # absolute floor for the quadrature error estimate
    quad_abs: float = 1e-11

    def replace(self, **kw) -> "Tolerances":
        return dataclasses.replace(self, **kw)

    @staticmethod
    def names() -> tuple:
        return tuple(f.name for f in dataclasses.fields(Tolerances))


DEFAULT = Tolerances()
