"""Geometry of the unit spherical cap that serves as the Gauss-map domain.

A strictly convex hypersurface in the closed upper halfspace that meets the
floor {x_n = 0} at a constant angle theta in (0, pi/2) is parametrized by its
shifted unit normal u - cos(theta)*e_n.  The image of that map is the polar
cap

    C_theta = { u - cos(theta)*e_n : u on the unit sphere, u_n >= cos(theta) },

and every quantity downstream (support function, curvature function, the
functionals driving the fixed-point iteration) is a field on C_theta.

The chart used here is the polar angle beta in [0, theta] measured from the
vertical axis e_n.  Evenness, invariance under flipping the horizontal
coordinates of zeta, is built into the representation: only beta >= 0 is
stored and the quadrature weights are folded so that integrals run over the
full cap.  This kills the odd kernel <v, zeta> of the linearized problem by
construction, so discrete solves are unique without pinning a translation.

Modes
-----
arc            n = 2; the cap is a circular arc, fields depend on beta only.
axisymmetric   n = 3 with rotationally invariant fields; fields depend on
               beta only, the azimuthal direction enters through the metric.
full2d         n = 3 tensor grid (beta, alpha) with alpha in [0, pi) and the
               antipodal identification alpha ~ alpha + pi.  Quadrature,
               node geometry and compatibility checks only; the differential
               operators are not provided in this mode.

Stencils are second order: central differences inside, an even-symmetry
ghost at the pole beta = 0, one-sided three/four point formulas at the rim
beta = theta.  Quadrature uses hat-function (product trapezoid) weights with
the Jacobian sin(beta)^(n-2) integrated exactly, which keeps every weight
strictly positive (a plain trapezoid rule would assign weight zero to the
n = 3 pole) and reproduces the cap measure exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainMismatchError, ParameterError

MODES = ("arc", "axisymmetric", "full2d")


@dataclass(frozen=True, eq=False)
class CapDomain:
    """Discretized spherical cap C_theta.

    Attributes
    ----------
    n : int
        Ambient dimension (2 or 3); the cap itself is (n-1)-dimensional.
    theta : float
        Contact angle in radians, in the open interval (0, pi/2).
    mode : str
        One of ``arc``, ``axisymmetric``, ``full2d``.
    beta : ndarray
        Polar-angle grid on [0, theta], uniform, endpoints included.
    alpha : ndarray or None
        Azimuth grid on [0, pi) for ``full2d``; None otherwise.
    weights : ndarray
        Per-node quadrature weights for integrals over the *full* cap
        (symmetry factors folded in), one weight per stored node.
    h : float
        Grid spacing of the beta grid.
    """

    n: int
    theta: float
    mode: str
    beta: np.ndarray
    alpha: np.ndarray | None
    weights: np.ndarray
    h: float

    def __post_init__(self):
        self.beta.setflags(write=False)
        self.weights.setflags(write=False)
        if self.alpha is not None:
            self.alpha.setflags(write=False)

    @property
    def num_nodes(self) -> int:
        return self.weights.size

    @property
    def resolution(self) -> int:
        return self.beta.size

    @property
    def cot_theta(self) -> float:
        return np.cos(self.theta) / np.sin(self.theta)

    def cap_measure(self) -> float:
        """Exact spherical measure of the full cap: 2*theta (n=2),
        2*pi*(1 - cos theta) (n=3)."""
        if self.n == 2:
            return 2.0 * self.theta
        return 2.0 * np.pi * (1.0 - np.cos(self.theta))

    def node_beta(self) -> np.ndarray:
        """Polar angle of every stored node, in storage order."""
        if self.mode == "full2d":
            return np.repeat(self.beta, self.alpha.size)
        return self.beta

    def node_alpha(self) -> np.ndarray | None:
        if self.mode == "full2d":
            return np.tile(self.alpha, self.beta.size)
        return None

    def zeta_n(self) -> np.ndarray:
        """Vertical component of zeta = u - cos(theta)*e_n at every node."""
        return np.cos(self.node_beta()) - np.cos(self.theta)

    def field(self, values) -> "ScalarField":
        """Wrap per-node values (array, scalar, or callable of beta) as a
        ScalarField."""
        if callable(values):
            values = values(self.node_beta())
        values = np.asarray(values, dtype=float)
        if values.ndim == 0:
            values = np.full(self.num_nodes, float(values))
        return ScalarField(self, values.copy())

    def same_grid(self, other: "CapDomain") -> bool:
        return (
            self.n == other.n
            and self.mode == other.mode
            and self.beta.size == other.beta.size
            and abs(self.theta - other.theta) < 1e-15
        )


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real values sampled at the nodes of a CapDomain."""

    domain: CapDomain
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.domain.num_nodes,):
            raise ParameterError(
                f"field has {v.shape} values, domain has {self.domain.num_nodes} nodes"
            )
        if not np.all(np.isfinite(v)):
            raise ParameterError("field contains non-finite values")
        object.__setattr__(self, "values", v)
        v.setflags(write=False)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True, eq=False)
class TauField:
    """Per-node symmetric (n-1)x(n-1) matrices tau[s] = Hess(s) + s*metric,
    expressed in an orthonormal frame of the round metric.

    In the arc and axisymmetric modes the frame (meridian, azimuth)
    diagonalizes tau, so the stored matrices are diagonal."""

    domain: CapDomain
    matrices: np.ndarray  # shape (num_nodes, n-1, n-1)

    def __post_init__(self):
        self.matrices.setflags(write=False)

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues per node, shape (num_nodes, n-1), ascending."""
        d = self.matrices.shape[1]
        if d == 1:
            return self.matrices[:, 0, 0][:, None]
        off = np.abs(self.matrices[:, 0, 1]).max() if self.matrices.size else 0.0
        if off == 0.0:
            return np.sort(np.diagonal(self.matrices, axis1=1, axis2=2), axis=1)
        return np.linalg.eigvalsh(self.matrices)

    def det(self) -> np.ndarray:
        """Product of eigenvalues per node (the curvature function integrand)."""
        if self.matrices.shape[1] == 1:
            return self.matrices[:, 0, 0].copy()
        return np.linalg.det(self.matrices)

    def trace(self) -> np.ndarray:
        return np.trace(self.matrices, axis1=1, axis2=2)


def _hat_weights_sin(beta: np.ndarray, h: float, power: int) -> np.ndarray:
    """Weights of the piecewise-linear (hat) quadrature for the measure
    sin(beta)^power dbeta on the grid.  Exact for power in {0, 1}."""
    m = beta.size - 1
    w = np.zeros(beta.size)
    if power == 0:
        w[:] = h
        w[0] = w[-1] = h / 2.0
        return w
    # power == 1: integrate each hat against sin(beta) in closed form.
    # I1(a,b) = int_a^b (x-a) sin x dx,  I2(a,b) = int_a^b (b-x) sin x dx
    a = beta[:-1]
    b = beta[1:]
    i1 = -(b - a) * np.cos(b) + np.sin(b) - np.sin(a)
    i2 = (b - a) * np.cos(a) - np.sin(b) + np.sin(a)
    w[0] = i2[0] / h
    w[-1] = i1[-1] / h
    w[1:-1] = (i1[:-1] + i2[1:]) / h
    return w


def make_domain(n: int, theta: float, resolution: int, mode: str) -> CapDomain:
    """Build a discretized cap C_theta.

    Parameters
    ----------
    n : 2 or 3.
    theta : contact angle in radians, 0 < theta < pi/2.
    resolution : number of beta nodes (>= 16); endpoints 0 and theta included.
    mode : "arc" (n=2), "axisymmetric" or "full2d" (n=3).
    """
    if n not in (2, 3):
        raise ParameterError(f"ambient dimension must be 2 or 3, got {n}")
    theta = float(theta)
    if not (0.0 < theta < np.pi / 2.0):
        raise ParameterError(f"contact angle must lie in (0, pi/2), got {theta}")
    if resolution < 16:
        raise ParameterError(f"resolution must be at least 16, got {resolution}")
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "arc" and n != 2:
        raise ParameterError("arc mode requires n = 2")
    if mode in ("axisymmetric", "full2d") and n != 3:
        raise ParameterError(f"{mode} mode requires n = 3")

    beta = np.linspace(0.0, theta, resolution)
    h = theta / (resolution - 1)

    if mode == "arc":
        # factor 2 folds the mirror half beta < 0
        weights = 2.0 * _hat_weights_sin(beta, h, power=0)
        alpha = None
    elif mode == "axisymmetric":
        weights = 2.0 * np.pi * _hat_weights_sin(beta, h, power=1)
        alpha = None
    else:
        n_alpha = resolution
        d_alpha = np.pi / n_alpha
        alpha = np.arange(n_alpha) * d_alpha
        w_beta = _hat_weights_sin(beta, h, power=1)
        # each stored azimuth also represents alpha + pi
        weights = np.repeat(w_beta, n_alpha) * (2.0 * d_alpha)

    return CapDomain(n=n, theta=theta, mode=mode, beta=beta, alpha=alpha,
                     weights=weights, h=h)


def _require_same_domain(domain: CapDomain, g: ScalarField):
    if g.domain is not domain and not domain.same_grid(g.domain):
        raise DomainMismatchError("field lives on a different grid than the domain")


def integrate(domain: CapDomain, g: ScalarField) -> float:
    """Integral of g over the full cap against the spherical measure."""
    _require_same_domain(domain, g)
    return float(domain.weights @ g.values)


def _first_derivative(domain: CapDomain, v: np.ndarray) -> np.ndarray:
    """d/dbeta at every node: zero at the pole (even fields), central inside,
    one-sided second order at the rim."""
    h = domain.h
    d = np.empty_like(v)
    d[0] = 0.0
    d[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    d[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return d


def _second_derivative(domain: CapDomain, v: np.ndarray) -> np.ndarray:
    """d^2/dbeta^2 at every node: even ghost at the pole, central inside,
    one-sided second order at the rim."""
    h = domain.h
    d = np.empty_like(v)
    d[0] = 2.0 * (v[1] - v[0]) / h**2
    d[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h**2
    d[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / h**2
    return d


def tau_of(domain: CapDomain, s: ScalarField) -> TauField:
    """Covariant tau[s] = Hess(s) + s*metric in an orthonormal frame.

    arc mode: the single entry is s'' + s.
    axisymmetric mode: the frame (meridian, azimuth) diagonalizes tau with
    eigenvalues s'' + s and cot(beta) s' + s; at the pole the azimuthal
    entry is the limit s''(0) + s(0) (removable singularity, even fields
    have s'(0) = 0).
    """
    _require_same_domain(domain, s)
    if domain.mode == "full2d":
        raise ParameterError("tau_of supports arc and axisymmetric modes only")
    v = s.values
    d2 = _second_derivative(domain, v)
    lam1 = d2 + v
    if domain.mode == "arc":
        mats = lam1[:, None, None]
        return TauField(domain, mats.copy())
    d1 = _first_derivative(domain, v)
    lam2 = np.empty_like(lam1)
    lam2[0] = lam1[0]
    lam2[1:] = d1[1:] / np.tan(domain.beta[1:]) + v[1:]
    mats = np.zeros((v.size, 2, 2))
    mats[:, 0, 0] = lam1
    mats[:, 1, 1] = lam2
    return TauField(domain, mats)


def robin_residual(domain: CapDomain, s: ScalarField) -> float:
    """|s'(theta) - cot(theta) s(theta)| from a one-sided second-order stencil.

    Zero means the contact-angle condition holds in support-function form.
    In full2d mode the maximum over the rim nodes is returned.
    """
    _require_same_domain(domain, s)
    h = domain.h
    ct = domain.cot_theta
    if domain.mode == "full2d":
        n_alpha = domain.alpha.size
        grid = s.values.reshape(domain.beta.size, n_alpha)
        d = (3.0 * grid[-1] - 4.0 * grid[-2] + grid[-3]) / (2.0 * h)
        return float(np.max(np.abs(d - ct * grid[-1])))
    v = s.values
    d = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return float(abs(d - ct * v[-1]))


def evenness_residual(domain: CapDomain, g: ScalarField) -> float:
    """Deviation of g from evenness under zeta -> (-zeta_h, zeta_n).

    The stored representation identifies mirror nodes (half beta-grid in the
    arc/axisymmetric modes, alpha ~ alpha + pi in full2d), so the residual of
    any stored field is identically zero.  Imported full tables are folded,
    and their fold residual reported, at parse time.
    """
    _require_same_domain(domain, g)
    return 0.0


def node_vectors(domain: CapDomain, index: int):
    """Return (u, zeta) for the node at `index`: u on the unit sphere with
    u_n >= cos(theta), and zeta = u - cos(theta)*e_n on the cap."""
    if not 0 <= index < domain.num_nodes:
        raise IndexError(f"node index {index} out of range [0, {domain.num_nodes})")
    b = domain.node_beta()[index]
    ct = np.cos(domain.theta)
    if domain.n == 2:
        u = np.array([np.sin(b), np.cos(b)])
    elif domain.mode == "axisymmetric":
        u = np.array([np.sin(b), 0.0, np.cos(b)])
    else:
        a = domain.node_alpha()[index]
        u = np.array([np.sin(b) * np.cos(a), np.sin(b) * np.sin(a), np.cos(b)])
    zeta = u.copy()
    zeta[-1] -= ct
    return u, zeta
