"""Plant-side oracles: eigenvalue stability, the Lyapunov solve against an
independent reference solver, steady-state maps, and equilibrium residuals."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import solve_continuous_lyapunov

from gradflow import (
    LyapunovCertificate,
    PlantModel,
    equilibrium_state,
    plant_output,
    plant_rhs,
    solve_lyapunov,
    steady_state_maps,
    validate_hurwitz,
)
from gradflow.config import exact_parameter_config
from gradflow.errors import DimensionError, PreconditionError, StabilityError

# Benchmark Lyapunov pair published with four-decimal precision.
BENCH_P = np.array(
    [
        [1.3220, 0.3400, -0.3819, -0.9667],
        [0.3400, 0.7413, -0.3188, -0.4261],
        [-0.3819, -0.3188, 0.6745, 0.1771],
        [-0.9667, -0.4261, 0.1771, 1.3186],
    ]
)


@pytest.fixture(scope="module")
def bench():
    cfg = exact_parameter_config()
    return cfg.plant, cfg.lyapunov_q


def test_hurwitz_negative_identity():
    ok, margin = validate_hurwitz(-np.eye(2))
    assert ok and margin == pytest.approx(-1.0)


def test_hurwitz_rotation_is_marginal():
    ok, margin = validate_hurwitz(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    assert not ok
    assert margin == pytest.approx(0.0, abs=1e-12)


def test_hurwitz_benchmark(bench):
    plant, _ = bench
    ok, margin = validate_hurwitz(plant.a)
    assert ok
    # independent eigenvalue route
    assert margin == pytest.approx(np.max(np.linalg.eigvals(plant.a).real))
    assert margin < -1.0


def test_hurwitz_rejects_nonsquare():
    with pytest.raises(DimensionError):
        validate_hurwitz(np.zeros((2, 3)))


def test_lyapunov_identity_cases():
    p = solve_lyapunov(-np.eye(2), 2.0 * np.eye(2))
    assert np.allclose(p, np.eye(2), atol=1e-12)
    p = solve_lyapunov(np.diag([-1.0, -2.0]), np.diag([2.0, 4.0]))
    assert np.allclose(p, np.eye(2), atol=1e-12)


def test_lyapunov_benchmark_matches_published(bench):
    plant, q = bench
    p = solve_lyapunov(plant.a, q)
    assert np.abs(p - BENCH_P).max() <= 1e-3
    # the published values themselves close the equation up to rounding
    assert np.abs(plant.a.T @ BENCH_P + BENCH_P @ plant.a + q).max() <= 5e-3


def test_lyapunov_random_property():
    rng = np.random.default_rng(2024)
    for n in (2, 3, 4, 6, 10):
        m = rng.normal(size=(n, n))
        a = m - (np.linalg.norm(m, 2) + 1.0) * np.eye(n)
        g = rng.normal(size=(n, n))
        q = g @ g.T + n * np.eye(n)
        p = solve_lyapunov(a, q)
        assert np.abs(a.T @ p + p @ a + q).max() <= 1e-9 * np.abs(q).max()
        assert np.linalg.eigvalsh(p).min() > 0
        # independent reference: scipy solves X A + A' X = -Q via a' route
        reference = solve_continuous_lyapunov(a.T, -q)
        assert np.allclose(p, reference, atol=1e-9 * np.abs(reference).max())


def test_lyapunov_rejects_bad_inputs():
    with pytest.raises(StabilityError):
        solve_lyapunov(np.eye(2), np.eye(2))
    with pytest.raises(PreconditionError):
        solve_lyapunov(-np.eye(2), -np.eye(2))
    with pytest.raises(PreconditionError):
        solve_lyapunov(-np.eye(2), np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_lyapunov_certificate_validates(bench):
    plant, q = bench
    cert = LyapunovCertificate(q=q, p=solve_lyapunov(plant.a, q))
    assert np.abs(cert.p - cert.p.T).max() == 0.0
    with pytest.raises(PreconditionError):
        LyapunovCertificate(q=q, p=-np.eye(4))


def test_steady_state_trivial():
    plant = PlantModel(a=-np.eye(2), b=np.eye(2), c=np.eye(2), d=np.zeros((2, 2)), e=np.zeros((2, 2)))
    maps = steady_state_maps(plant)
    assert np.allclose(maps.g, np.eye(2), atol=1e-12)
    assert np.allclose(maps.h, np.zeros((2, 2)), atol=1e-12)


def test_steady_state_scalar_algebra():
    # G = -C A^-1 B = I/2 and H = D - C A^-1 E = (1 + 1/2) I for A = -2I
    plant = PlantModel(a=-2.0 * np.eye(2), b=np.eye(2), c=np.eye(2), d=np.eye(2), e=np.eye(2))
    maps = steady_state_maps(plant)
    assert np.allclose(maps.g, 0.5 * np.eye(2), atol=1e-12)
    assert np.allclose(maps.h, 1.5 * np.eye(2), atol=1e-12)


def test_steady_state_benchmark(bench):
    plant, _ = bench
    maps = plant.maps
    # with B = C = identity, G reduces to -A^-1; verified through the residual
    assert np.abs(plant.a @ maps.g + np.eye(4)).max() <= 1e-10 * np.abs(plant.a).max()
    assert np.allclose(maps.h, np.eye(4) + maps.g, atol=1e-12)  # H = I - A^-1 = I + G here


def test_equilibrium_state(bench):
    plant, _ = bench
    assert np.allclose(equilibrium_state(plant, np.zeros(4), np.zeros(4)), np.zeros(4))
    simple = PlantModel(a=-np.eye(2), b=np.eye(2), c=np.eye(2), d=np.zeros((2, 2)), e=np.zeros((2, 2)))
    assert np.allclose(equilibrium_state(simple, np.array([1.0, 2.0]), np.zeros(2)), [1.0, 2.0])
    rng = np.random.default_rng(3)
    u, w = rng.normal(size=4), rng.normal(size=4)
    x_eq = equilibrium_state(plant, u, w)
    residual = plant.a @ x_eq + plant.b @ u + plant.e @ w
    scale = max(np.abs(x_eq).max(), 1.0)
    assert np.abs(residual).max() <= 1e-10 * scale


def test_rhs_and_output(bench):
    plant, _ = bench
    zero4 = np.zeros(4)
    assert np.allclose(plant_rhs(plant, zero4, zero4, zero4), zero4)
    assert np.allclose(plant_output(plant, zero4, zero4), zero4)
    simple = PlantModel(a=-np.eye(2), b=np.eye(2), c=np.eye(2), d=np.zeros((2, 2)), e=np.zeros((2, 2)))
    dx = plant_rhs(simple, np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.zeros(2))
    assert np.allclose(dx, [-1.0, 1.0])
    rng = np.random.default_rng(5)
    u, w = rng.normal(size=4), rng.normal(size=4)
    x_eq = equilibrium_state(plant, u, w)
    assert np.abs(plant_rhs(plant, x_eq, u, w)).max() <= 1e-10
    with pytest.raises(DimensionError):
        plant_rhs(plant, np.zeros(3), np.zeros(4), np.zeros(4))


def test_output_at_equilibrium_matches_maps(bench):
    plant, _ = bench
    rng = np.random.default_rng(7)
    u, w = rng.normal(size=4), rng.normal(size=4)
    x_eq = equilibrium_state(plant, u, w)
    y_eq = plant_output(plant, x_eq, w)
    expected = plant.maps.g @ u + plant.maps.h @ w
    assert np.abs(y_eq - expected).max() <= 1e-9 * max(np.abs(expected).max(), 1.0)


def test_exponential_convergence_to_equilibrium(bench):
    plant, q = bench
    p = solve_lyapunov(plant.a, q)
    lam = np.linalg.eigvalsh(q).min() / np.linalg.eigvalsh(p).max()
    rng = np.random.default_rng(11)
    u, w = rng.normal(size=4), rng.normal(size=4)
    x_eq = equilibrium_state(plant, u, w)
    x0 = x_eq + rng.normal(size=4)
    horizon = 6.0
    sol = solve_ivp(
        lambda _t, x: plant.a @ x + plant.b @ u + plant.e @ w,
        (0.0, horizon),
        x0,
        rtol=1e-10,
        atol=1e-12,
    )
    final_gap = np.linalg.norm(sol.y[:, -1] - x_eq)
    assert final_gap <= np.linalg.norm(x0 - x_eq) * np.exp(-lam * horizon / 2.0)


def test_plant_rejects_inconsistent_dimensions():
    with pytest.raises(DimensionError):
        PlantModel(a=-np.eye(2), b=np.ones((3, 1)), c=np.eye(2), d=np.zeros((2, 1)), e=np.zeros((2, 1)))
    with pytest.raises(StabilityError):
        PlantModel(a=np.eye(2), b=np.eye(2), c=np.eye(2), d=np.zeros((2, 2)), e=np.zeros((2, 2)))
