import numpy as np
import pytest

from capminkowski import PhiSpec, make_domain, solve


@pytest.fixture
def arc_domain():
    return make_domain(2, np.pi / 3, 257, "arc")


@pytest.fixture
def axi_domain():
    return make_domain(3, np.pi / 4, 129, "axisymmetric")


def discrete_cap(domain, r=1.0):
    """Cap as the solver's own fixed point: solve(f = r^(n-1))."""
    f = domain.field(np.full(domain.num_nodes, float(r) ** (domain.n - 1)))
    return solve(domain, f)


def manufactured_field(domain):
    """Curvature target whose exact solution is known in closed form."""
    return domain.field(0.875 - 0.15 * np.cos(2.0 * domain.beta))


def manufactured_support(domain):
    b = domain.beta
    return 0.875 - 0.5 * np.cos(b) + 0.05 * np.cos(2.0 * b)


def random_body(domain, rng):
    """Valid body from a random positive even curvature target."""
    k = int(rng.integers(1, 4))
    amp = float(rng.uniform(-0.35, 0.35))
    base = float(rng.uniform(0.7, 1.6))
    f = base * (1.0 + amp * np.cos(2.0 * k * domain.node_beta()))
    return solve(domain, domain.field(np.maximum(f, 0.05)))


def phi_const(domain, value=1.0):
    return PhiSpec.from_function(domain, lambda b: np.full_like(b, value),
                                 provenance=f"const:{value}")


def fixed_point_phi(domain, body, p):
    """phi = f * s^(1-p), for which the body is an exact fixed point."""
    from capminkowski import curvature_function
    f = curvature_function(body).values
    return PhiSpec.from_field(domain, domain.field(f * body.s.values ** (1.0 - p)))
