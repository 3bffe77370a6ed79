"""Capillary convex bodies represented by their support function on the cap.

A body here is an even, strictly convex hypersurface Sigma in the closed
upper halfspace meeting the floor at the domain's contact angle.  It is
stored through its capillary support function s on C_theta, the ordinary
support function read through the shifted-normal parametrization.  Validity
means three things, each checked by the constructor:

* s > 0 everywhere,
* the contact-angle condition in support form, s'(theta) = cot(theta) s(theta),
  holds up to the boundary tolerance,
* tau[s] = Hess(s) + s*metric is positive definite at every node (strict
  convexity).

The reciprocal Gauss curvature pulled back to the cap (the curvature
function) is det tau[s]; the enclosed volume is (1/n) * integral of s times
that determinant, and mixed volumes replace one factor of s by another
body's support function.

Spherical caps.  The cap of radius r meeting the floor at angle theta is the
sphere of radius r centered at c = -r*cos(theta)*e_n.  A sphere's support
function is <c, u> + r, which on u = (sin(beta)*omega, cos(beta)) evaluates
to r*(1 - cos(theta)*cos(beta)); this closed form is what `cap_body`
samples, and it makes tau[s] = r * identity exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .domain import (CapDomain, ScalarField, TauField, integrate, make_domain,
                     robin_residual, tau_of, _first_derivative)
from .errors import (ConvexityError, DomainMismatchError, ParameterError,
                     PositivityError, RobinViolationError)

#: hard floor for the smallest tau eigenvalue; strict convexity is an open
#: condition, the floor makes it testable
EPS_CONVEX = 1e-10


def default_boundary_tolerance(domain: CapDomain) -> float:
    """Default Robin tolerance 10*h^2 (second-order stencils)."""
    return 10.0 * domain.h**2


@dataclass(frozen=True, eq=False)
class CapillaryBody:
    """Even strictly convex capillary hypersurface, held as (domain, s)."""

    domain: CapDomain
    s: ScalarField

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def theta(self) -> float:
        return self.domain.theta

    def scaled(self, lam: float) -> "CapillaryBody":
        """Dilation by lam > 0 (support functions are 1-homogeneous)."""
        if lam <= 0:
            raise ParameterError("dilation factor must be positive")
        return CapillaryBody(self.domain, self.domain.field(lam * self.s.values))


def from_support(domain: CapDomain, s: ScalarField, tol_bc: float | None = None,
                 eps_convex: float = EPS_CONVEX) -> CapillaryBody:
    """Validated constructor: returns a body iff all invariants hold.

    Raises
    ------
    PositivityError    if min s <= 0 (reports the minimum and its node).
    RobinViolationError if the contact-angle residual exceeds tol_bc
                        (default 10*h^2).
    ConvexityError     if some tau eigenvalue is <= eps_convex (reports the
                        worst node and the smallest eigenvalue).
    """
    if s.domain is not domain and not domain.same_grid(s.domain):
        raise DomainMismatchError("support field lives on a different grid")
    if tol_bc is None:
        tol_bc = default_boundary_tolerance(domain)
    v = s.values
    k = int(np.argmin(v))
    if v[k] <= 0.0:
        raise PositivityError(
            f"support function must be strictly positive; min {v[k]:.6g} at node {k}",
            min_value=float(v[k]), node=k)
    rr = robin_residual(domain, s)
    if rr > tol_bc:
        raise RobinViolationError(
            f"contact-angle residual {rr:.3e} exceeds tolerance {tol_bc:.3e}",
            residual=rr, tolerance=tol_bc)
    eigs = tau_of(domain, s).eigenvalues()
    j = int(np.argmin(eigs[:, 0]))
    lam_min = float(eigs[j, 0])
    if lam_min <= eps_convex:
        raise ConvexityError(
            f"tau[s] not positive definite: smallest eigenvalue {lam_min:.3e} "
            f"at node {j}", node=j, min_eigenvalue=lam_min)
    return CapillaryBody(domain, s)


def cap_body(domain: CapDomain, r: float) -> CapillaryBody:
    """Spherical cap of radius r: s(beta) = r*(1 - cos(theta)*cos(beta))."""
    if r <= 0:
        raise ParameterError(f"cap radius must be positive, got {r}")
    ct = np.cos(domain.theta)
    s = domain.field(lambda b: r * (1.0 - ct * np.cos(b)))
    return CapillaryBody(domain, s)


def curvature_function(body: CapillaryBody) -> ScalarField:
    """Reciprocal Gauss curvature on the cap: det tau[s] per node.

    The rim node carries the contact condition rather than a collocation
    equation, so its raw one-sided det tau lags the interior scheme by
    O(h^2); the field value there is instead filled by cubic extrapolation
    of the equation-consistent interior values (fourth-order accurate for
    smooth bodies).  Validity checks keep the raw one-sided operator.
    """
    f = tau_of(body.domain, body.s).det()
    f[-1] = 4.0 * f[-2] - 6.0 * f[-3] + 4.0 * f[-4] - f[-5]
    return body.domain.field(f)


def tau(body: CapillaryBody) -> TauField:
    return tau_of(body.domain, body.s)


def volume(body: CapillaryBody) -> float:
    """Enclosed volume (1/n) * integral of s * det tau[s]."""
    f = curvature_function(body)
    return integrate(body.domain, body.domain.field(body.s.values * f.values)) / body.n


def mixed_volume(K: CapillaryBody, L: CapillaryBody) -> float:
    """V(K, L[n-1]) = (1/n) * integral of s_K * f_L; equals volume(K) at K = L."""
    if K.domain is not L.domain and not K.domain.same_grid(L.domain):
        raise DomainMismatchError("mixed volume needs both bodies on one grid")
    f_L = curvature_function(L)
    return integrate(K.domain, K.domain.field(K.s.values * f_L.values)) / K.n


def embed(body: CapillaryBody) -> np.ndarray:
    """Points of the hypersurface from the inverse shifted-normal map.

    X(u) = grad(s_hat) + s_hat * u on the spherical cap, where s_hat is the
    ordinary support function.  For n = 2 the full arc (both halves) is
    returned; for n = 3 the meridian section through the x1-x3 plane,
    mirrored, which revolves to the surface.  Rim points satisfy x_n = 0
    exactly when the contact-angle condition holds, since
    x_n(theta) = sin(theta) * (cot(theta) s(theta) - s'(theta)).
    """
    dom = body.domain
    if dom.mode == "full2d":
        raise ParameterError("embed supports arc and axisymmetric modes only")
    beta = dom.beta
    v = body.s.values
    dv = _first_derivative(dom, v)
    # mirror to beta in [-theta, theta]; s even, s' odd
    b_full = np.concatenate([-beta[::-1], beta[1:]])
    s_full = np.concatenate([v[::-1], v[1:]])
    ds_full = np.concatenate([-dv[::-1], dv[1:]])
    sin_b, cos_b = np.sin(b_full), np.cos(b_full)
    x_h = ds_full * cos_b + s_full * sin_b   # horizontal component
    x_v = -ds_full * sin_b + s_full * cos_b  # vertical component
    if dom.n == 2:
        return np.column_stack([x_h, x_v])
    zeros = np.zeros_like(x_h)
    return np.column_stack([x_h, zeros, x_v])


def save_body(body: CapillaryBody, path) -> None:
    """Self-describing JSON record {n, theta, mode, beta nodes, s values}."""
    dom = body.domain
    record = {
        "format": "capminkowski-body",
        "version": 1,
        "n": dom.n,
        "theta": dom.theta,
        "mode": dom.mode,
        "beta": dom.beta.tolist(),
        "s": body.s.values.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(record, fh, indent=1)
        fh.write("\n")


def load_body(path) -> CapillaryBody:
    """Inverse of save_body; re-validates every invariant."""
    with open(path) as fh:
        record = json.load(fh)
    if record.get("format") != "capminkowski-body":
        raise ParameterError(f"{path} is not a body record")
    beta = np.asarray(record["beta"], dtype=float)
    dom = make_domain(record["n"], record["theta"], beta.size, record["mode"])
    if not np.allclose(dom.beta, beta, rtol=0, atol=1e-12):
        raise ParameterError("stored beta grid is not the uniform grid")
    return from_support(dom, dom.field(np.asarray(record["s"], dtype=float)))
