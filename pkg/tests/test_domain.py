import numpy as np
import pytest

from capminkowski import (ParameterError, cap_body, evenness_residual,
                          integrate, make_domain, node_vectors, robin_residual,
                          tau_of)

THETA = np.pi / 3


def test_make_domain_arc_weight_sum():
    d = make_domain(2, THETA, 129, "arc")
    assert d.beta[0] == 0.0 and d.beta[-1] == pytest.approx(THETA, abs=0)
    assert d.weights.sum() == pytest.approx(2.0 * THETA, rel=1e-14)


def test_make_domain_axisymmetric_weight_sum():
    d = make_domain(3, THETA, 129, "axisymmetric")
    # cap area 2*pi*(1 - cos theta) = pi at theta = pi/3
    assert d.weights.sum() == pytest.approx(np.pi, rel=1e-12)
    assert np.all(d.weights > 0)


def test_make_domain_full2d_weight_sum():
    d = make_domain(3, THETA, 33, "full2d")
    assert d.weights.sum() == pytest.approx(np.pi, rel=1e-12)
    assert np.all(d.weights > 0)
    assert d.alpha.min() == 0.0 and d.alpha.max() < np.pi


@pytest.mark.parametrize("bad", [
    dict(n=4, theta=THETA, resolution=64, mode="arc"),
    dict(n=2, theta=1.6, resolution=64, mode="arc"),       # 1.6 > pi/2
    dict(n=2, theta=0.0, resolution=64, mode="arc"),
    dict(n=2, theta=THETA, resolution=8, mode="arc"),
    dict(n=2, theta=THETA, resolution=64, mode="axisymmetric"),
    dict(n=3, theta=THETA, resolution=64, mode="arc"),
    dict(n=3, theta=THETA, resolution=64, mode="ring"),
])
def test_make_domain_rejects(bad):
    with pytest.raises(ParameterError):
        make_domain(**bad)


def test_quadrature_constants_and_convergence():
    for n, mode, exact in ((2, "arc", 2.0 * THETA),
                           (3, "axisymmetric", np.pi)):
        errs = []
        for res in (65, 129, 257):
            d = make_domain(n, THETA, res, mode)
            val = integrate(d, d.field(lambda b: np.exp(np.cos(b))))
            errs.append(val)
            assert integrate(d, d.field(np.ones(d.num_nodes))) == pytest.approx(
                exact, rel=1e-12)
        # observed order >= 2 against the finest value
        e1, e2 = abs(errs[0] - errs[2]), abs(errs[1] - errs[2])
        assert e1 / e2 > 3.5


def test_integrate_zeta_component():
    # int (cos beta - cos theta) over the full arc = 2 sin(theta) - 2 theta cos(theta)
    d = make_domain(2, THETA, 257, "arc")
    g = d.field(d.zeta_n())
    assert integrate(d, g) == pytest.approx(0.6848532563722793, abs=10 * d.h**2)


def test_tau_cap_is_identity():
    for n, mode in ((2, "arc"), (3, "axisymmetric")):
        d = make_domain(n, THETA, 129, mode)
        for r in (1.0, 2.0):
            t = tau_of(d, cap_body(d, r).s)
            assert np.abs(t.eigenvalues() - r).max() < 10 * d.h**2
            assert np.abs(t.det() - r ** (n - 1)).max() < 10 * r * d.h**2


def test_tau_manufactured_analytic():
    d = make_domain(2, THETA, 257, "arc")
    s = d.field(0.875 - 0.5 * np.cos(d.beta) + 0.05 * np.cos(2 * d.beta))
    t = tau_of(d, s).det()
    want = 0.875 - 0.15 * np.cos(2 * d.beta)
    assert abs(want[0] - 0.725) < 1e-12
    assert np.abs(t - want).max() < 10 * d.h**2


def test_tau_linearity_machine_precision():
    rng = np.random.default_rng(7)
    for n, mode in ((2, "arc"), (3, "axisymmetric")):
        d = make_domain(n, THETA, 65, mode)
        a = rng.random(d.num_nodes)
        b = rng.random(d.num_nodes)
        lhs = tau_of(d, d.field(2.5 * a - 0.7 * b)).matrices
        rhs = 2.5 * tau_of(d, d.field(a)).matrices - 0.7 * tau_of(d, d.field(b)).matrices
        assert np.abs(lhs - rhs).max() < 1e-10


def test_tau_dilation_homogeneity_exact():
    d = make_domain(2, THETA, 65, "arc")
    cap = cap_body(d, 1.0)
    assert np.array_equal(tau_of(d, d.field(2.0 * cap.s.values)).matrices,
                          2.0 * tau_of(d, cap.s).matrices)


def test_robin_residual_cap_and_constant():
    d = make_domain(2, THETA, 257, "arc")
    assert robin_residual(d, cap_body(d, 1.0).s) < 10 * d.h**2
    flat = d.field(np.ones(d.num_nodes))
    assert robin_residual(d, flat) == pytest.approx(1.0 / np.tan(THETA), abs=1e-12)


def test_robin_residual_manufactured_satisfies_bc():
    d = make_domain(2, THETA, 257, "arc")
    s = d.field(0.875 - 0.5 * np.cos(d.beta) + 0.05 * np.cos(2 * d.beta))
    assert robin_residual(d, s) < 10 * d.h**2


def test_evenness_residual_by_representation():
    d = make_domain(2, THETA, 65, "arc")
    assert evenness_residual(d, d.field(np.arange(65, dtype=float))) == 0.0
    d2 = make_domain(3, THETA, 33, "full2d")
    assert evenness_residual(d2, d2.field(np.ones(d2.num_nodes))) == 0.0


def test_node_vectors():
    d = make_domain(2, THETA, 129, "arc")
    u, zeta = node_vectors(d, 0)
    assert np.allclose(u, [0.0, 1.0])
    assert np.allclose(zeta, [0.0, 1.0 - np.cos(THETA)])
    u, zeta = node_vectors(d, d.num_nodes - 1)
    assert u[-1] == pytest.approx(np.cos(THETA), abs=1e-14)
    assert zeta[-1] == pytest.approx(0.0, abs=1e-14)
    # beta = pi/6 sits at the midpoint of the grid
    mid = (d.num_nodes - 1) // 2
    u, zeta = node_vectors(d, mid)
    assert np.allclose(u, [0.5, np.sqrt(3) / 2])
    assert np.allclose(zeta, [0.5, np.sqrt(3) / 2 - 0.5])
    with pytest.raises(IndexError):
        node_vectors(d, d.num_nodes)


def test_node_vectors_full2d_on_sphere():
    d = make_domain(3, THETA, 17, "full2d")
    for idx in (0, 5, d.num_nodes - 1):
        u, zeta = node_vectors(d, idx)
        assert np.linalg.norm(u) == pytest.approx(1.0, abs=1e-14)
        assert u[-1] >= np.cos(THETA) - 1e-14
        shifted = zeta.copy()
        shifted[-1] += np.cos(THETA)
        assert np.linalg.norm(shifted) == pytest.approx(1.0, abs=1e-14)


def test_horizontal_moment_cancels_exactly():
    # the folded weights pair each node with its mirror, so the integral of
    # any horizontal coordinate times an even field is exactly zero
    d = make_domain(2, THETA, 129, "arc")
    phi = np.exp(np.cos(d.beta))
    plus = d.weights / 2 @ (np.sin(d.beta) * phi)
    minus = d.weights / 2 @ (np.sin(-d.beta) * phi)
    assert plus + minus == 0.0


def test_fields_validate():
    d = make_domain(2, THETA, 65, "arc")
    with pytest.raises(ParameterError):
        d.field(np.ones(64))
    with pytest.raises(ParameterError):
        d.field(np.full(65, np.nan))
    v = d.field(np.ones(65)).values
    with pytest.raises(ValueError):
        v[0] = 2.0  # frozen
