"""Prescribed-curvature solves on the cap (the Minkowski-type problem).

Given a strictly positive even target f on C_theta, find the even capillary
body whose curvature function matches it:

    det tau[s] = f        in C_theta,
    s'(theta)  = cot(theta) * s(theta)   at the rim.

The even half-grid representation removes the horizontal-translation kernel
<v, zeta>, so the discrete problem has a unique solution and the linearized
operators are invertible.

Discretization.  The collocation equations impose the interior equation at
the nodes beta_0 .. beta_{M-1} (the pole uses the even ghost) and the
contact-angle condition, with the same one-sided stencil `robin_residual`
measures, at the rim node.  The returned body therefore satisfies the rim
condition to solver precision, while the curvature at the rim node is a
diagnostic consistent to O(h^2).

n = 2: det tau = s'' + s is linear in s, so one banded solve suffices.
n = 3 axisymmetric: det tau = (s'' + s)(cot(beta) s' + s) is solved by a
damped Newton iteration whose linearization is the sigma_2 Jacobian-weighted
Helmholtz problem with the same rim condition; the initial guess is the cap
matching the mean of f.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .body import EPS_CONVEX, CapillaryBody, cap_body, from_support
from .domain import CapDomain, ScalarField, robin_residual, tau_of
from .errors import ParameterError, SolverError

log = logging.getLogger(__name__)

#: banded storage bandwidths: the rim row reaches three nodes in, the pole
#: ghost one node out
_BANDS = (3, 1)


def _residual_floor(domain: CapDomain, s_scale: float, f_min: float) -> float:
    """Roundoff floor of the measurable relative residual.

    Evaluating det tau[s] - f costs second differences of s, whose rounding
    noise is about eps * |s| / h^2; no solver can certify a smaller
    residual than that, so the effective tolerance is capped below by it.
    """
    eps = np.finfo(float).eps
    return 64.0 * eps * max(1.0, s_scale) / (domain.h**2 * max(f_min, 1e-300))


@dataclass(frozen=True)
class SolveOptions:
    """Knobs of the prescribed-curvature solve."""

    newton_tol: float = 1e-10   # max relative interior residual
    max_newton: int = 50
    damping: float = 1.0        # initial Newton step factor

    def __post_init__(self):
        if self.newton_tol <= 0:
            raise ParameterError("newton_tol must be positive")
        if self.max_newton < 1:
            raise ParameterError("max_newton must be at least 1")
        if not (0 < self.damping <= 1):
            raise ParameterError("damping must lie in (0, 1]")


@dataclass(frozen=True)
class CompatibilityReport:
    """Validity of a prescription: positivity, evenness, and the horizontal
    moment integrals that must vanish for solvability."""

    positive: bool
    min_value: float
    even: bool
    orthogonality: np.ndarray  # n-1 integrals of <zeta, e_i> * field

    @property
    def ok(self) -> bool:
        return self.positive and self.even and bool(
            np.all(np.abs(self.orthogonality) < 1e-12))


def check_compatibility(domain: CapDomain, field: ScalarField) -> CompatibilityReport:
    """Positivity and evenness flags plus the horizontal moment integrals.

    In the folded arc/axisymmetric representation the moments cancel in
    exact pairs, so they are identically zero; in full2d they are summed
    explicitly over each stored node and its antipodal partner.
    """
    v = field.values
    mn = float(v.min())
    if domain.mode != "full2d":
        orth = np.zeros(domain.n - 1)
    else:
        b = domain.node_beta()
        a = domain.node_alpha()
        w = domain.weights
        # stored weight covers alpha and alpha + pi jointly; the horizontal
        # coordinates at the two are exact negatives (cos(a + pi) = -cos(a)),
        # so each pair cancels exactly in the fold
        ca, sa = np.cos(a), np.sin(a)
        zx = np.sin(b) * (ca + (-ca)) / 2.0
        zy = np.sin(b) * (sa + (-sa)) / 2.0
        orth = np.array([float(w @ (zx * v)), float(w @ (zy * v))])
    return CompatibilityReport(positive=mn > 0.0, min_value=mn, even=True,
                               orthogonality=orth)


def _robin_row(domain: CapDomain):
    """Coefficients of the rim condition on (s_{M-3}, .., s_M).

    The solver imposes the contact condition with a third-order one-sided
    first derivative so the O(h^2) boundary truncation does not dominate the
    solution error (the response to rim perturbations grows sharply as p
    approaches -n).  The public residual measurement `robin_residual` keeps
    its second-order stencil; the two agree to O(h^2) on smooth fields.
    """
    h = domain.h
    return np.array([-2.0 / (6 * h), 9.0 / (6 * h), -18.0 / (6 * h),
                     11.0 / (6 * h) - domain.cot_theta])


def _banded_insert(ab, i, j, value):
    ab[_BANDS[1] + i - j, j] = value


def _apply_linear_arc(domain: CapDomain, s: np.ndarray) -> np.ndarray:
    """Apply the arc collocation operator: tau stencils inside, rim row last.

    Preserves the dtype of `s`, so extended-precision residuals can be
    computed for iterative refinement.
    """
    h = s.dtype.type(domain.h)
    two = s.dtype.type(2.0)
    out = np.empty_like(s)
    out[0] = two * (s[1] - s[0]) / h**2 + s[0]
    out[1:-1] = (s[2:] - two * s[1:-1] + s[:-2]) / h**2 + s[1:-1]
    out[-1] = _robin_row(domain).astype(s.dtype) @ s[-4:]
    return out


def _solve_linear_arc(domain: CapDomain, f: np.ndarray) -> np.ndarray:
    """One banded solve of s'' + s = f with the rim condition.

    Two passes of iterative refinement keep the measured residual near the
    eps/h^2 evaluation floor instead of the eps/h^3 LU forward-error level.
    """
    m = domain.resolution - 1
    h = domain.h
    ab = np.zeros((sum(_BANDS) + 1, m + 1))
    rhs = np.empty(m + 1)
    _banded_insert(ab, 0, 0, -2.0 / h**2 + 1.0)
    _banded_insert(ab, 0, 1, 2.0 / h**2)
    rhs[0] = f[0]
    for j in range(1, m):
        _banded_insert(ab, j, j - 1, 1.0 / h**2)
        _banded_insert(ab, j, j, -2.0 / h**2 + 1.0)
        _banded_insert(ab, j, j + 1, 1.0 / h**2)
    rhs[1:m] = f[1:m]
    row = _robin_row(domain)
    for k, coeff in enumerate(row):
        _banded_insert(ab, m, m - 3 + k, coeff)
    rhs[m] = 0.0
    s = solve_banded(_BANDS, ab, rhs)
    for _ in range(2):
        r = rhs - _apply_linear_arc(domain, s)
        s = s + solve_banded(_BANDS, ab, r)
    return s


def _arc_matrix_banded(domain: CapDomain) -> np.ndarray:
    """Banded storage of the arc collocation matrix (for factor reuse)."""
    m = domain.resolution - 1
    h = domain.h
    ab = np.zeros((sum(_BANDS) + 1, m + 1))
    _banded_insert(ab, 0, 0, -2.0 / h**2 + 1.0)
    _banded_insert(ab, 0, 1, 2.0 / h**2)
    for j in range(1, m):
        _banded_insert(ab, j, j - 1, 1.0 / h**2)
        _banded_insert(ab, j, j, -2.0 / h**2 + 1.0)
        _banded_insert(ab, j, j + 1, 1.0 / h**2)
    row = _robin_row(domain)
    for k, coeff in enumerate(row):
        _banded_insert(ab, m, m - 3 + k, coeff)
    return ab


def solve_linear_arc_extended(domain: CapDomain, f_ld: np.ndarray,
                              ab: np.ndarray | None = None) -> np.ndarray:
    """Arc solve with the state kept in extended precision.

    The banded factorization runs in double; the residual is evaluated and
    accumulated in long double, which pushes the achievable collocation
    residual of the *stored* state below the double-precision floor
    eps * |s| / h^2.  Used by the fixed-point driver, whose stopping
    tolerances sit under that floor on fine grids.
    """
    if ab is None:
        ab = _arc_matrix_banded(domain)
    rhs = np.zeros(domain.resolution, dtype=np.longdouble)
    rhs[:-1] = f_ld[:-1]
    s = solve_banded(_BANDS, ab, rhs.astype(float)).astype(np.longdouble)
    for _ in range(3):
        r = rhs - _apply_linear_arc(domain, s)
        s = s + solve_banded(_BANDS, ab, r.astype(float)).astype(np.longdouble)
    return s


def _axisym_residual(domain: CapDomain, s: np.ndarray, f: np.ndarray):
    """Interior residual lam1*lam2 - f (pole: lam1 = lam2) and the
    eigenvalue pair, using the same stencils as tau_of."""
    h = domain.h
    beta = domain.beta
    lam1 = np.empty_like(s)
    lam2 = np.empty_like(s)
    lam1[0] = 2.0 * (s[1] - s[0]) / h**2 + s[0]
    lam1[1:-1] = (s[2:] - 2.0 * s[1:-1] + s[:-2]) / h**2 + s[1:-1]
    lam1[-1] = np.nan  # rim node carries the Robin row instead
    lam2[0] = lam1[0]
    d1 = (s[2:] - s[:-2]) / (2.0 * h)
    lam2[1:-1] = d1 / np.tan(beta[1:-1]) + s[1:-1]
    lam2[-1] = np.nan
    res = lam1 * lam2 - f
    return res, lam1, lam2


def _axisym_jacobian(domain: CapDomain, lam1, lam2) -> np.ndarray:
    """Banded Jacobian of the sigma_2 collocation system."""
    m = domain.resolution - 1
    h = domain.h
    beta = domain.beta
    ab = np.zeros((sum(_BANDS) + 1, m + 1))
    # pole row: residual (lam1)^2 - f with lam1 = 2(s1 - s0)/h^2 + s0
    _banded_insert(ab, 0, 0, 2.0 * lam1[0] * (-2.0 / h**2 + 1.0))
    _banded_insert(ab, 0, 1, 2.0 * lam1[0] * (2.0 / h**2))
    cot_b = 1.0 / np.tan(beta[1:m])
    for j in range(1, m):
        c = cot_b[j - 1]
        _banded_insert(ab, j, j - 1, lam2[j] / h**2 - lam1[j] * c / (2.0 * h))
        _banded_insert(ab, j, j, lam2[j] * (-2.0 / h**2 + 1.0) + lam1[j])
        _banded_insert(ab, j, j + 1, lam2[j] / h**2 + lam1[j] * c / (2.0 * h))
    row = _robin_row(domain)
    for k, coeff in enumerate(row):
        _banded_insert(ab, m, m - 3 + k, coeff)
    return ab


def _min_tau_eig(domain: CapDomain, s: np.ndarray) -> float:
    return float(tau_of(domain, domain.field(s)).eigenvalues().min())


def _solve_newton_axisym(domain: CapDomain, f: np.ndarray, opts: SolveOptions,
                         s0: np.ndarray | None):
    """Damped Newton for (s'' + s)(cot(beta) s' + s) = f."""
    if s0 is None:
        sigma = float(domain.weights.sum())
        mean_f = float(domain.weights @ f) / sigma
        r0 = mean_f ** (1.0 / (domain.n - 1))
        s = cap_body(domain, r0).s.values.copy()
    else:
        s = s0.copy()
    robin = _robin_row(domain)

    def full_residual(sv):
        res, lam1, lam2 = _axisym_residual(domain, sv, f)
        res[-1] = robin @ sv[-4:]
        rel = np.abs(res[:-1]) / f[:-1]
        scale = max(1.0, np.abs(sv[-1]))
        return res, lam1, lam2, max(float(rel.max()), abs(res[-1]) / scale)

    res, lam1, lam2, err = full_residual(s)
    for it in range(opts.max_newton):
        tol_eff = max(opts.newton_tol,
                      _residual_floor(domain, float(np.abs(s).max()), float(f.min())))
        if err <= tol_eff:
            log.debug("newton converged in %d steps, residual %.3e", it, err)
            return s, it
        ab = _axisym_jacobian(domain, lam1, lam2)
        delta = solve_banded(_BANDS, ab, -res)
        step = opts.damping
        accepted = False
        for _ in range(30):
            trial = s + step * delta
            if trial.min() > 0.0 and _min_tau_eig(domain, trial) > EPS_CONVEX:
                t_res, t1, t2, t_err = full_residual(trial)
                if t_err < err:
                    s, res, lam1, lam2, err = trial, t_res, t1, t2, t_err
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            raise SolverError(
                "Newton step rejected 30 times (convexity loss not recoverable "
                f"by damping); residual {err:.3e}", last_residual=err)
    tol_eff = max(opts.newton_tol,
                  _residual_floor(domain, float(np.abs(s).max()), float(f.min())))
    if err <= tol_eff:
        return s, opts.max_newton
    raise SolverError(
        f"Newton did not reach tolerance {opts.newton_tol:.1e} in "
        f"{opts.max_newton} steps; last residual {err:.3e}", last_residual=err)


def _solve_core(domain: CapDomain, f_target: ScalarField, opts: SolveOptions,
                initial_guess: CapillaryBody | None):
    if domain.mode not in ("arc", "axisymmetric"):
        raise ParameterError("solve requires arc or axisymmetric mode")
    if f_target.domain is not domain and not domain.same_grid(f_target.domain):
        raise ParameterError("target lives on a different grid")
    f = f_target.values
    if f.min() <= 0.0:
        raise ParameterError(
            f"curvature target must be strictly positive; min {f.min():.6g}")

    if domain.n == 2:
        s = _solve_linear_arc(domain, f)
        newton_steps = 0
    else:
        guess = initial_guess.s.values if initial_guess is not None else None
        s, newton_steps = _solve_newton_axisym(domain, f, opts, guess)

    body = from_support(domain, domain.field(s))
    f_out = tau_of(domain, body.s).det()
    rel = np.abs(f_out[:-1] - f[:-1]) / f[:-1]
    worst = float(rel.max())
    tol_eff = max(opts.newton_tol,
                  _residual_floor(domain, float(np.abs(s).max()), float(f.min())))
    if worst > tol_eff:
        raise SolverError(
            f"returned residual {worst:.3e} above tolerance {tol_eff:.1e}",
            last_residual=worst)
    log.debug("solve done: %d newton steps, interior residual %.3e, "
              "max sigma1 %.6g", newton_steps, worst,
              float(tau_of(domain, body.s).trace().max()))
    return body, newton_steps, worst


def solve(domain: CapDomain, f_target: ScalarField, opts: SolveOptions | None = None,
          initial_guess: CapillaryBody | None = None) -> CapillaryBody:
    """Solve det tau[s] = f_target with the contact-angle rim condition.

    Parameters
    ----------
    f_target : strictly positive field on `domain` (even by representation).
    opts : SolveOptions; defaults are newton_tol 1e-10, max_newton 50.
    initial_guess : optional warm start (n = 3); ignored for n = 2.

    Returns a validated CapillaryBody whose interior relative residual is at
    most opts.newton_tol (or the eps/h^2 measurement floor where that is
    larger) and whose rim residual is at solver precision.
    """
    body, _, _ = _solve_core(domain, f_target, opts or SolveOptions(),
                             initial_guess)
    return body


def solve_info(domain: CapDomain, f_target: ScalarField,
               opts: SolveOptions | None = None,
               initial_guess: CapillaryBody | None = None):
    """Like solve, but also return a diagnostics dict (residuals, steps)."""
    body, newton_steps, worst = _solve_core(domain, f_target,
                                            opts or SolveOptions(), initial_guess)
    f = f_target.values
    info = {
        "interior_residual": worst,
        "rim_residual": robin_residual(domain, body.s),
        "newton_steps": newton_steps,
        "max_sigma1": float(tau_of(domain, body.s).trace().max()),
        "mean_target": float(domain.weights @ f) / float(domain.weights.sum()),
    }
    return body, info
