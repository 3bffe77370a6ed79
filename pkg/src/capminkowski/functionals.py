"""The three functionals whose monotonicity drives the fixed-point scheme.

For an even strictly convex capillary body with support s, curvature
function f, and a positive even weight phi on the cap (all integrals over
the full cap against the spherical measure):

    A_p = V * (int phi s^p)^(-n/p)                    p != 0
        = V * exp( int -phi log s / ((1/n) int phi) )  p  = 0

    B_p = V^(1-n) * (int phi^(-1/(p-1)) f^(p/(p-1)))^(n(p-1)/p)   p != 0, 1
        = V^(1-n) * exp( int log(f/phi) dmu )^n * (int phi)^n     p  = 0
          with dmu the phi-normalized measure phi/(int phi)

    Omega_p = int phi^(-1/(p-1)) f^(p/(p-1))           p != 0, 1
            = exp( int phi log f / ((1/n) int phi) )   p  = 0

They are tied together by an exact identity along the curvature-image
operator and by the Hoelder/Jensen inequality B_p <= n^n A_p for p < 1
(reversed for p > 1); both are checked numerically by
`check_identity_and_inequalities`.  The p = 0 branches are removable limits
of the others only after normalizing phi to unit mass; each branch is
implemented literally as defined, and the branch switch happens for
|p| < 1e-8 to keep the exponents n/p well away from overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .body import CapillaryBody, curvature_function, volume
from .domain import ScalarField, integrate
from .errors import ParameterError

#: |p| below this selects the logarithmic branch
P_ZERO_EPS = 1e-8


def _check_phi(body: CapillaryBody, phi: ScalarField):
    if phi.domain is not body.domain and not body.domain.same_grid(phi.domain):
        raise ParameterError("phi lives on a different grid than the body")
    if phi.values.min() <= 0.0:
        raise ParameterError("phi must be strictly positive")


@dataclass(frozen=True)
class FunctionalReport:
    """Snapshot of the functionals for one (body, phi, p)."""

    p: float
    A: float
    B: float
    Omega: float
    V: float
    theta: float
    n: int

    def __post_init__(self):
        for name in ("A", "B", "Omega", "V"):
            x = getattr(self, name)
            if not np.isfinite(x) or x <= 0.0:
                raise ParameterError(f"functional {name} = {x} is not finite positive")

    def as_dict(self) -> dict:
        return {"p": self.p, "A": self.A, "B": self.B, "Omega": self.Omega,
                "V": self.V, "theta": self.theta, "n": self.n}


def A_p(body: CapillaryBody, phi: ScalarField, p: float) -> float:
    """Volume-weighted s-mean functional; dilation invariant for every p."""
    _check_phi(body, phi)
    n = body.n
    if not (-n <= p <= 1):
        raise ParameterError(f"A_p needs p in [-n, 1], got {p}")
    dom = body.domain
    s = body.s.values
    V = volume(body)
    if abs(p) < P_ZERO_EPS:
        phi_mass = integrate(dom, phi)
        num = integrate(dom, dom.field(-phi.values * np.log(s)))
        return V * np.exp(num / (phi_mass / n))
    mom = integrate(dom, dom.field(phi.values * s**p))
    return V * mom ** (-n / p)


def B_p(body: CapillaryBody, phi: ScalarField, p: float) -> float:
    """Curvature-side companion of A_p (p = 1 excluded)."""
    _check_phi(body, phi)
    n = body.n
    if not (-n <= p < 1):
        raise ParameterError(f"B_p needs p in [-n, 1), got {p}")
    dom = body.domain
    f = curvature_function(body).values
    V = volume(body)
    if abs(p) < P_ZERO_EPS:
        phi_mass = integrate(dom, phi)
        log_avg = integrate(
            dom, dom.field(phi.values * np.log(f / phi.values))) / phi_mass
        return V ** (1 - n) * np.exp(log_avg) ** n * phi_mass**n
    q = p / (p - 1.0)
    mom = integrate(dom, dom.field(phi.values ** (-1.0 / (p - 1.0)) * f**q))
    return V ** (1 - n) * mom ** (n * (p - 1.0) / p)


def Omega_p(body: CapillaryBody, phi: ScalarField, p: float) -> float:
    """Entropy-like curvature integral (p = 1 excluded)."""
    _check_phi(body, phi)
    n = body.n
    if not (-n <= p < 1):
        raise ParameterError(f"Omega_p needs p in [-n, 1), got {p}")
    dom = body.domain
    f = curvature_function(body).values
    if abs(p) < P_ZERO_EPS:
        phi_mass = integrate(dom, phi)
        num = integrate(dom, dom.field(phi.values * np.log(f)))
        return float(np.exp(num / (phi_mass / n)))
    q = p / (p - 1.0)
    return integrate(dom, dom.field(phi.values ** (-1.0 / (p - 1.0)) * f**q))


def report(body: CapillaryBody, phi: ScalarField, p: float) -> FunctionalReport:
    return FunctionalReport(p=p, A=A_p(body, phi, p), B=B_p(body, phi, p),
                            Omega=Omega_p(body, phi, p), V=volume(body),
                            theta=body.theta, n=body.n)


@dataclass(frozen=True)
class IdentityReport:
    """Both sides of the curvature-image identity and of the Hoelder/Jensen
    inequality, with their discrepancies."""

    p: float
    identity_lhs: float      # B_p of the curvature image
    identity_rhs: float      # n^n (V/V_image)^(n-1) A_p of the source
    identity_rel_error: float
    inequality_lhs: float    # B_p of the source
    inequality_rhs: float    # n^n A_p of the source
    inequality_margin: float  # rhs - lhs, >= -tolerance when valid
    identity_ok: bool
    inequality_ok: bool


def check_identity_and_inequalities(Sigma: CapillaryBody, LambdaSigma: CapillaryBody,
                                    phi: ScalarField, p: float,
                                    tol: float = 1e-6) -> IdentityReport:
    """Verify, for a pair produced by the curvature-image operator,

        B_p(image) = n^n (V(source)/V(image))^(n-1) A_p(source)

    and the standalone inequality B_p(source) <= n^n A_p(source) for p < 1.
    Violations beyond `tol` (relative for the identity, absolute relative
    margin for the inequality) are flagged, not raised.
    """
    n = Sigma.n
    V_s = volume(Sigma)
    V_i = volume(LambdaSigma)
    lhs = B_p(LambdaSigma, phi, p)
    rhs = n**n * (V_s / V_i) ** (n - 1) * A_p(Sigma, phi, p)
    rel = abs(lhs - rhs) / abs(rhs)
    ineq_lhs = B_p(Sigma, phi, p)
    ineq_rhs = n**n * A_p(Sigma, phi, p)
    margin = (ineq_rhs - ineq_lhs) / ineq_rhs
    return IdentityReport(
        p=p, identity_lhs=lhs, identity_rhs=rhs, identity_rel_error=rel,
        inequality_lhs=ineq_lhs, inequality_rhs=ineq_rhs, inequality_margin=margin,
        identity_ok=rel <= tol, inequality_ok=margin >= -tol)
