"""Built-in invariant suite behind `gradflow selftest`.

Each check re-derives an expected value through an independent route
(scipy reference solvers, finite differences, closed forms, brute-force
minimizers) and compares against the package implementation.
"""

from __future__ import annotations

import numpy as np

from .certificates import compute_constants, epsilon_condition, evaluate_bound, gain_bound
from .config import exact_parameter_config, fig2a_config
from .costs import (
    check_pl,
    optimizer_oracle,
    pack_quadratic,
    quadratic_basis,
    smoothness_constants,
    unpack_quadratic,
)
from .experiment import run_experiment
from .learning import (
    Dataset,
    EvaluationRecord,
    fit_lasso,
    fit_ls,
    fit_ridge,
    ls_residual,
    rls_init,
    rls_update,
)
from .plant import lyapunov_certificate, solve_lyapunov
from .reporting import trajectory_csv_text
from .simulate import rk4_step, run_simulation, sample_arrivals


def _random_stable(rng, n):
    m = rng.normal(size=(n, n))
    return m - (np.linalg.norm(m, 2) + 1.0) * np.eye(n)


def _random_spd(rng, n):
    m = rng.normal(size=(n, n))
    return m @ m.T + n * np.eye(n)


def check_lyapunov_solver():
    from scipy.linalg import solve_continuous_lyapunov

    rng = np.random.default_rng(7)
    worst = 0.0
    for n in (2, 3, 5, 8):
        a = _random_stable(rng, n)
        q = _random_spd(rng, n)
        p = solve_lyapunov(a, q)
        if np.linalg.eigvalsh(p).min() <= 0:
            return False, "P not positive definite"
        residual = np.abs(a.T @ p + p @ a + q).max() / np.abs(q).max()
        reference = solve_continuous_lyapunov(a.T, -q)
        worst = max(worst, residual, np.abs(p - reference).max() / np.abs(reference).max())
    return worst < 1e-9, f"worst scaled residual {worst:.2e}"


def check_steady_state():
    cfg = exact_parameter_config()
    plant = cfg.plant
    rng = np.random.default_rng(11)
    u = rng.normal(size=plant.m)
    w = rng.normal(size=plant.q)
    from .plant import equilibrium_state, plant_output

    x_eq = equilibrium_state(plant, u, w)
    y_eq = plant_output(plant, x_eq, w)
    err = np.abs(y_eq - (plant.maps.g @ u + plant.maps.h @ w)).max()
    return err < 1e-9, f"output map mismatch {err:.2e}"


def check_basis_jacobians():
    rng = np.random.default_rng(23)
    worst = 0.0
    for m in (1, 2, 4):
        basis = quadratic_basis(m)
        for _ in range(40):
            u = rng.normal(size=m)
            step = 1e-5 * (1.0 + np.linalg.norm(u))
            jac = basis.jacobian(u)
            for i in range(m):
                delta = np.zeros(m)
                delta[i] = step
                fd = (basis.value(u + delta) - basis.value(u - delta)) / (2 * step)
                worst = max(worst, np.abs(fd - jac[:, i]).max() / (1.0 + np.abs(jac[:, i]).max()))
    return worst < 1e-5, f"worst relative FD error {worst:.2e}"


def check_pack_roundtrip():
    rng = np.random.default_rng(31)
    for m in (1, 3, 6, 8):
        mat = _random_spd(rng, m)
        lin = rng.normal(size=m)
        off = rng.normal()
        coeffs = pack_quadratic(mat, lin, off)
        quad = unpack_quadratic(coeffs, m)
        if np.abs(quad.matrix - mat).max() > 1e-12 or np.abs(quad.linear - lin).max() > 1e-12:
            return False, f"round trip broke at m={m}"
        basis = quadratic_basis(m)
        for _ in range(10):
            u = rng.normal(size=m)
            direct = 0.5 * u @ mat @ u + lin @ u + off
            if abs(basis.value(u) @ coeffs - direct) > 1e-10 * (1 + abs(direct)):
                return False, "expansion disagrees with the explicit quadratic"
    return True, "pack/unpack and evaluation agree"


def check_optimizer_and_pl():
    cfg = exact_parameter_config()
    cost = cfg.cost
    w = cfg.disturbance.value(0.0)
    u_closed = optimizer_oracle(cost, w)
    u_gd = optimizer_oracle(cost, w, tol=1e-12, force_gradient_descent=True)
    gap = np.linalg.norm(u_closed - u_gd)
    if gap > 1e-8:
        return False, f"oracle routes disagree by {gap:.2e}"
    rng = np.random.default_rng(43)
    smooth = smoothness_constants(cost)
    for _ in range(200):
        u = u_closed + rng.normal(size=cost.m) * 2.0
        if not check_pl(cost, w, u, smooth=smooth, u_star=u_closed):
            return False, "gradient-dominance inequality failed"
    return True, "oracle cross-check and gradient dominance hold"


def check_least_squares():
    rng = np.random.default_rng(5)
    basis = quadratic_basis(3)
    coeffs_true = rng.normal(size=basis.size)
    data = Dataset(basis=basis)
    for k in range(25):
        point = rng.normal(size=3) * 1.5
        data.append(EvaluationRecord(t=float(k), point=point, value=float(basis.value(point) @ coeffs_true)))
    fitted = fit_ls(data)
    err = np.linalg.norm(fitted - coeffs_true)
    if err > 1e-8:
        return False, f"noiseless recovery error {err:.2e}"
    b = data.regression_matrix()
    direct = float(np.linalg.norm(b @ fitted - data.targets()) ** 2)
    if abs(ls_residual(data) - direct) > 1e-10:
        return False, "projection residual disagrees with the direct residual"
    return True, f"recovery error {err:.2e}"


def check_ridge_optimality():
    rng = np.random.default_rng(17)
    basis = quadratic_basis(2)
    data = Dataset(basis=basis)
    for k in range(4):
        point = rng.normal(size=2)
        data.append(EvaluationRecord(t=float(k), point=point, value=rng.normal()))
    lam = 0.37
    fitted = fit_ridge(data, lam)
    b = data.regression_matrix()
    foc = np.abs(b.T @ (b @ fitted - data.targets()) + lam * fitted).max()
    return foc < 1e-10, f"first-order-condition residual {foc:.2e}"


def check_lasso_orthonormal():
    from .costs import CallableBasis

    rng = np.random.default_rng(29)
    q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
    targets = rng.normal(size=5) * 2.0
    # identity feature map: each record's point is one orthonormal design row
    basis = CallableBasis(5, 5, lambda u: u, lambda u: np.eye(5))
    data = Dataset(basis=basis)
    for row, v in zip(q, targets):
        data.append(EvaluationRecord(t=0.0, point=row, value=float(v)))
    lam = 0.3
    ours = fit_lasso(data, lam)

    # brute-force coordinate descent on 0.5|y - Qx|^2 + lam |x|_1
    x = np.zeros(5)
    for _ in range(500):
        for i in range(5):
            resid = targets - q @ x + q[:, i] * x[i]
            rho_i = q[:, i] @ resid
            x[i] = np.sign(rho_i) * max(abs(rho_i) - lam, 0.0)
    gap = np.abs(ours - x).max()
    return gap < 1e-8, f"coordinate-descent gap {gap:.2e}"


def check_rls_matches_batch():
    rng = np.random.default_rng(37)
    basis = quadratic_basis(2)
    coeffs_true = rng.normal(size=basis.size)
    data = Dataset(basis=basis)
    state = rls_init(np.zeros(basis.size), 1e8)
    for k in range(30):
        point = rng.normal(size=2) * 2.0
        rec = EvaluationRecord(t=float(k), point=point, value=float(basis.value(point) @ coeffs_true))
        data.append(rec)
        state = rls_update(state, rec, basis)
    gap = np.linalg.norm(state.coeffs - fit_ls(data))
    return gap < 1e-4, f"batch gap {gap:.2e}"


def check_rk4_order():
    cfg = exact_parameter_config()
    from .simulate import closed_loop_field

    field = closed_loop_field(
        cfg.plant, cfg.cost, cfg.cost.phi.coeffs, cfg.cost.psi.coeffs, cfg.sim.eta, cfg.disturbance
    )

    def endpoint(h, steps):
        x = np.ones(cfg.plant.n)
        u = np.ones(cfg.plant.m)
        t = 0.0
        for _ in range(steps):
            x, u = rk4_step(field, t, x, u, h)
            t += h
        return np.concatenate([x, u])

    coarse = endpoint(0.04, 25)
    medium = endpoint(0.02, 50)
    fine = endpoint(0.01, 100)
    ratio = np.linalg.norm(coarse - medium) / np.linalg.norm(medium - fine)
    return 12.0 <= ratio <= 20.0, f"refinement ratio {ratio:.2f}"


def check_arrivals():
    rng1 = np.random.default_rng(99)
    rng2 = np.random.default_rng(99)
    t1 = sample_arrivals(2.0, 1e4, rng1)
    t2 = sample_arrivals(2.0, 1e4, rng2)
    if t1.shape != t2.shape or np.any(t1 != t2):
        return False, "same seed produced different arrival streams"
    gaps = np.diff(np.concatenate([[0.0], t1]))
    mean = gaps.mean()
    sigma = 0.5 / np.sqrt(gaps.size)
    return abs(mean - 0.5) < 3 * sigma, f"mean gap {mean:.4f} (target 0.5 +/- {3*sigma:.4f})"


def check_gain_identity():
    rng = np.random.default_rng(61)
    worst = 0.0
    for _ in range(2000):
        s = rng.uniform(0.05, 0.95)
        lam_q = rng.uniform(0.1, 10.0)
        pab = rng.uniform(0.1, 10.0)
        ell_y = rng.uniform(0.1, 10.0)
        g_norm = rng.uniform(0.1, 10.0)
        c_norm = rng.uniform(0.1, 10.0)
        direct = gain_bound(s, lam_q, pab, ell_y, g_norm, c_norm)
        a1, a2 = 1.0 - s, (1.0 - s) * lam_q
        b1, b2 = ell_y * g_norm * c_norm, 2.0 * pab
        alternate = a1 * a2 / (b1 * b2 * (1.0 + a1))
        worst = max(worst, abs(direct - alternate) / alternate)
    return worst < 1e-12, f"worst relative gap {worst:.2e}"


def check_bound_constant_forcing():
    cfg = exact_parameter_config()
    lyap = lyapunov_certificate(cfg.plant, cfg.lyapunov_q)
    smooth = smoothness_constants(cfg.cost)
    cert = compute_constants(cfg.plant, lyap, smooth, cfg.sim.eta, cfg.s)
    applied = epsilon_condition(cert, smooth, 1.0, 0.0, 0.0)
    a = applied.a
    times = np.linspace(0.0, 10.0, 100001)
    delta_bar = 0.7
    z0 = 2.0

    from .simulate import ClosedLoopTrajectory

    n = times.size
    traj = ClosedLoopTrajectory(
        times=times,
        x=np.zeros((n, 1)), u=np.zeros((n, 1)), y=np.zeros((n, 1)),
        u_star=np.zeros((n, 1)), x_star=np.zeros((n, 1)), y_star=np.zeros((n, 1)),
        z_norm=np.full(n, z0), u_err_norm=np.zeros(n), x_err_norm=np.zeros(n),
        wdot_norm=np.zeros(n), event_flags=np.zeros(n, dtype=int),
        alpha_err_norm=np.zeros(n), rho_err_norm=np.zeros(n),
        phi_arrival_times=np.empty(0), psi_arrival_times=np.empty(0),
        alpha_history=(), rho_history=(),
    )
    bound = evaluate_bound(traj, cert, smooth, np.full(n, delta_bar), 1.0, "global")
    closed = (
        cert.kappa1 * z0 * np.exp(-0.5 * a * times)
        + (2.0 * cert.kappa2 / a) * delta_bar * (1.0 - np.exp(-0.5 * a * times))
    )
    gap = np.abs(bound.values - closed).max()
    return gap < 1e-8, f"max gap to the closed form {gap:.2e}"


def check_run_determinism():
    cfg = fig2a_config()
    import copy

    from .config import config_from_dict

    data = copy.deepcopy(cfg.to_dict())
    data["simulation"]["horizon"] = 2.0
    short = config_from_dict(data)
    t1 = run_simulation(short.plant, short.cost, short.sim, short.disturbance)
    t2 = run_simulation(short.plant, short.cost, short.sim, short.disturbance)
    same = trajectory_csv_text(t1) == trajectory_csv_text(t2)
    if not same:
        return False, "two identical runs produced different logs"
    changes = np.array([est.since for est in t1.alpha_history[1:]])
    arrivals = t1.phi_arrival_times
    frozen = all(np.abs(arrivals - t).min() < 1e-9 for t in changes)
    return frozen, "bit-identical logs; estimates changed only at arrivals"


def check_exact_run_regulates():
    cfg = exact_parameter_config(horizon=10.0)
    result = run_experiment(cfg)
    traj = result.trajectory
    decayed = traj.z_norm[-1] < traj.z_norm[0] * 1e-1
    dominated = result.report.status == "PASS"
    return decayed and dominated, (
        f"final/initial error {traj.z_norm[-1] / traj.z_norm[0]:.2e}, report {result.report.status}"
    )


CHECKS = [
    ("lyapunov_solver", check_lyapunov_solver),
    ("steady_state_maps", check_steady_state),
    ("basis_jacobians_fd", check_basis_jacobians),
    ("quadratic_pack_roundtrip", check_pack_roundtrip),
    ("optimizer_oracle_and_pl", check_optimizer_and_pl),
    ("least_squares", check_least_squares),
    ("ridge_optimality", check_ridge_optimality),
    ("lasso_orthonormal", check_lasso_orthonormal),
    ("rls_matches_batch", check_rls_matches_batch),
    ("rk4_order", check_rk4_order),
    ("poisson_arrivals", check_arrivals),
    ("gain_bound_identity", check_gain_identity),
    ("bound_constant_forcing", check_bound_constant_forcing),
    ("run_determinism", check_run_determinism),
    ("exact_run_regulates", check_exact_run_regulates),
]


def run_selftest() -> int:
    """Run every check, print one line each, return the failure count."""
    failures = 0
    for name, check in CHECKS:
        try:
            ok, detail = check()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        failures += 0 if ok else 1
    print(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed")
    return failures
