"""Cost-model oracles: hand-differentiated Jacobians, finite differences,
explicit quadratic evaluation, two independent optimizer routes, and the
gradient-dominance sweep."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradflow import (
    BasisExpansion,
    CompositeCost,
    check_pl,
    composite_gradient,
    composite_value,
    grad_phi_hat,
    optimizer_oracle,
    pack_quadratic,
    quadratic_basis,
    smoothness_constants,
    unpack_quadratic,
)
from gradflow.config import exact_parameter_config
from gradflow.costs import quadratic_parts
from gradflow.errors import ConvexityError, PreconditionError


@pytest.fixture(scope="module")
def bench():
    cfg = exact_parameter_config()
    return cfg


def make_tracking_cost(matrix, linear, offset, g, reference):
    m = np.asarray(matrix).shape[0]
    p = np.asarray(g).shape[0]
    phi = BasisExpansion(basis=quadratic_basis(m), coeffs=pack_quadratic(matrix, linear, offset))
    psi = BasisExpansion(
        basis=quadratic_basis(p),
        coeffs=pack_quadratic(np.eye(p), -np.asarray(reference, dtype=float), 0.5 * float(np.dot(reference, reference))),
    )
    return CompositeCost(phi=phi, psi=psi, g=np.asarray(g, dtype=float), h=np.zeros((p, p)))


def test_basis_sizes():
    assert quadratic_basis(2).size == 6
    assert quadratic_basis(4).size == 15
    with pytest.raises(PreconditionError):
        quadratic_basis(0)


def test_basis_ordering_m2():
    basis = quadratic_basis(2)
    u = np.array([3.0, 5.0])
    expected = [1.0, 3.0, 5.0, 4.5, 15.0, 12.5]  # 1, u1, u2, u1^2/2, u1 u2, u2^2/2
    assert np.allclose(basis.value(u), expected)


def test_basis_jacobian_rows():
    basis = quadratic_basis(2)
    jac = basis.jacobian(np.array([1.0, 2.0]))
    expected = np.array([[0, 0], [1, 0], [0, 1], [1, 0], [2, 1], [0, 2]], dtype=float)
    assert np.allclose(jac, expected)


def test_basis_jacobian_finite_differences():
    rng = np.random.default_rng(42)
    for m in (1, 2, 4, 6):
        basis = quadratic_basis(m)
        for _ in range(30):
            u = rng.normal(size=m) * 3.0
            step = 1e-5 * (1.0 + np.linalg.norm(u))
            jac = basis.jacobian(u)
            for i in range(m):
                delta = np.zeros(m)
                delta[i] = step
                fd = (basis.value(u + delta) - basis.value(u - delta)) / (2.0 * step)
                denom = 1.0 + np.abs(jac[:, i]).max()
                assert np.abs(fd - jac[:, i]).max() / denom <= 1e-5


def test_pack_examples():
    coeffs = pack_quadratic(np.zeros((3, 3)), np.zeros(3), 3.0)
    expected = np.zeros(10)
    expected[0] = 3.0
    assert np.allclose(coeffs, expected)
    coeffs = pack_quadratic(np.eye(2), np.zeros(2), 0.0)
    assert np.allclose(coeffs, [0, 0, 0, 1, 0, 1])


@settings(max_examples=40, deadline=None)
@given(m=st.integers(min_value=1, max_value=8), seed=st.integers(min_value=0, max_value=2**31))
def test_pack_unpack_roundtrip(m, seed):
    rng = np.random.default_rng(seed)
    root = rng.normal(size=(m, m))
    matrix = root @ root.T
    linear = rng.normal(size=m)
    offset = float(rng.normal())
    quad = unpack_quadratic(pack_quadratic(matrix, linear, offset), m)
    assert np.abs(quad.matrix - matrix).max() <= 1e-12 * max(1.0, np.abs(matrix).max())
    assert np.allclose(quad.linear, linear)
    assert quad.offset == pytest.approx(offset)


def test_pack_rejects_asymmetric():
    with pytest.raises(PreconditionError):
        pack_quadratic(np.array([[1.0, 0.5], [0.0, 1.0]]), np.zeros(2), 0.0)


def test_benchmark_pack_evaluation_oracle(bench):
    cost = bench.cost
    matrix, linear, offset = quadratic_parts(cost.phi.coeffs, 4)
    basis = cost.phi.basis
    rng = np.random.default_rng(9)
    for _ in range(100):
        u = rng.normal(size=4) * 2.0
        direct = 0.5 * u @ matrix @ u + linear @ u + offset
        assert basis.value(u) @ cost.phi.coeffs == pytest.approx(direct, abs=1e-10 * (1 + abs(direct)))


def test_grad_hat_cases(bench):
    basis = quadratic_basis(2)
    coeffs = pack_quadratic(np.eye(2), np.zeros(2), 0.0)
    assert np.allclose(grad_phi_hat(basis, coeffs, np.array([1.0, 2.0])), [1.0, 2.0])
    assert np.allclose(grad_phi_hat(basis, np.zeros(6), np.array([1.0, 2.0])), np.zeros(2))
    cost = bench.cost
    matrix, linear, _ = quadratic_parts(cost.phi.coeffs, 4)
    rng = np.random.default_rng(13)
    u = rng.normal(size=4)
    assert np.allclose(
        grad_phi_hat(cost.phi.basis, cost.phi.coeffs, u), matrix @ u + linear, atol=1e-10
    )


def test_composite_gradient_cases():
    cost = make_tracking_cost(np.eye(2), np.zeros(2), 0.0, np.eye(2), np.zeros(2))
    # phi = |u|^2/2, psi = |y|^2/2, G = I, H = 0: gradient at (1, 0) is (2, 0)
    assert np.allclose(composite_gradient(cost, np.array([1.0, 0.0]), np.zeros(2)), [2.0, 0.0])
    u_star = optimizer_oracle(cost, np.zeros(2))
    assert np.linalg.norm(composite_gradient(cost, u_star, np.zeros(2))) <= 1e-10


def test_composite_gradient_finite_differences(bench):
    cost = bench.cost
    w = bench.disturbance.value(0.0)
    rng = np.random.default_rng(17)
    for _ in range(25):
        u = rng.normal(size=4) * 2.0
        step = 1e-5 * (1.0 + np.linalg.norm(u))
        grad = composite_gradient(cost, u, w)
        for i in range(4):
            delta = np.zeros(4)
            delta[i] = step
            fd = (composite_value(cost, u + delta, w) - composite_value(cost, u - delta, w)) / (
                2.0 * step
            )
            assert abs(fd - grad[i]) / (1.0 + abs(grad[i])) <= 1e-5


def test_optimizer_oracle_trivial():
    cost = make_tracking_cost(np.eye(2), np.zeros(2), 0.0, np.eye(2), np.zeros(2))
    assert np.allclose(optimizer_oracle(cost, np.zeros(2)), np.zeros(2), atol=1e-12)
    cost = make_tracking_cost(np.eye(2), np.zeros(2), 0.0, np.eye(2), np.array([2.0, 0.0]))
    # minimize |u|^2/2 + |u - (2,0)|^2/2
    assert np.allclose(optimizer_oracle(cost, np.zeros(2)), [1.0, 0.0], atol=1e-10)


def test_optimizer_oracle_two_routes_agree(bench):
    cost = bench.cost
    w = bench.disturbance.value(0.0)
    closed = optimizer_oracle(cost, w)
    descent = optimizer_oracle(cost, w, tol=1e-12, force_gradient_descent=True)
    assert np.linalg.norm(closed - descent) <= 1e-8


def test_optimizer_oracle_detects_nonconvex():
    phi = BasisExpansion(
        basis=quadratic_basis(1), coeffs=np.array([0.0, 0.0, -1.0])  # concave u^2/2 term
    )
    psi = BasisExpansion(basis=quadratic_basis(1), coeffs=np.zeros(3))
    cost = CompositeCost(phi=phi, psi=psi, g=np.zeros((1, 1)), h=np.zeros((1, 1)))
    with pytest.raises(ConvexityError):
        optimizer_oracle(cost, np.zeros(1))


def test_smoothness_trivial_cases():
    cost = make_tracking_cost(np.eye(2), np.zeros(2), 0.0, np.eye(2), np.zeros(2))
    smooth = smoothness_constants(cost)
    assert smooth.ell_u == pytest.approx(1.0)
    assert smooth.ell_y == pytest.approx(1.0)
    assert smooth.ell == pytest.approx(2.0)
    assert smooth.mu_u == pytest.approx(2.0)

    cost = make_tracking_cost(np.diag([1.0, 4.0]), np.zeros(2), 0.0, np.zeros((2, 2)), np.zeros(2))
    smooth = smoothness_constants(cost)
    assert smooth.mu_u == pytest.approx(1.0)
    assert smooth.ell_u == pytest.approx(4.0)


def test_smoothness_benchmark_vs_hessian_fd(bench):
    cost = bench.cost
    smooth = smoothness_constants(cost)
    w = bench.disturbance.value(0.0)
    # Hessian of the composite by finite differences of the gradient
    m = 4
    hess = np.zeros((m, m))
    base = np.zeros(m)
    step = 1e-6
    for i in range(m):
        delta = np.zeros(m)
        delta[i] = step
        hess[:, i] = (
            composite_gradient(cost, base + delta, w) - composite_gradient(cost, base - delta, w)
        ) / (2.0 * step)
    hess = 0.5 * (hess + hess.T)
    eigs = np.linalg.eigvalsh(hess)
    assert smooth.mu_u == pytest.approx(eigs.min(), rel=1e-5)
    assert smooth.mu_u <= smooth.ell + 1e-12


def test_check_pl_cases(bench):
    cost = make_tracking_cost(np.eye(2), np.zeros(2), 0.0, np.eye(2), np.zeros(2))
    w = np.zeros(2)
    u_star = optimizer_oracle(cost, w)
    assert check_pl(cost, w, u_star)
    # isotropic equality family: psi identically zero
    phi = BasisExpansion(basis=quadratic_basis(2), coeffs=pack_quadratic(np.eye(2), np.zeros(2), 0.0))
    psi = BasisExpansion(basis=quadratic_basis(2), coeffs=np.zeros(6))
    iso = CompositeCost(phi=phi, psi=psi, g=np.eye(2), h=np.zeros((2, 2)))
    rng = np.random.default_rng(19)
    for _ in range(50):
        u = rng.normal(size=2) * 3.0
        assert check_pl(iso, w, u)
    # benchmark cost, random ball sweep
    cost = bench.cost
    w = bench.disturbance.value(0.0)
    u_star = optimizer_oracle(cost, w)
    smooth = smoothness_constants(cost)
    for _ in range(200):
        u = u_star + rng.normal(size=4)
        assert check_pl(cost, w, u, smooth=smooth, u_star=u_star)


def test_quadratic_parts_allows_indefinite():
    coeffs = np.array([0.0, 0.0, -2.0])  # u^2/2 weight -2: indefinite estimate
    matrix, linear, offset = quadratic_parts(coeffs, 1)
    assert matrix[0, 0] == pytest.approx(-2.0)
    assert np.allclose(linear, [0.0])
    assert offset == 0.0
