"""Closed-loop event simulation: the plant driven by the gradient-flow
controller, with sporadic functional evaluations arriving on Poisson clocks
and triggering coefficient refits.

Between arrivals the coefficient estimates are frozen, so the integration
grid is the union of the fixed-step grid and the arrival times: steps are
shortened to land exactly on events and refits never happen mid-step, which
preserves the integrator order and the piecewise-constant estimate
semantics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .costs import (
    BasisSet,
    CompositeCost,
    QuadraticBasis,
    SmoothnessConstants,
    optimizer_oracle,
    quadratic_parts,
    smoothness_constants,
)
from .errors import DimensionError, DivergenceError, PreconditionError
from .learning import (
    Dataset,
    EvaluationRecord,
    ParameterEstimate,
    RlsState,
    fit_lasso,
    fit_ls,
    fit_ridge,
    rls_init,
    rls_update,
)
from .plant import PlantModel, plant_output

ESTIMATORS = ("ls", "ridge", "lasso", "rls")

PHI_EVENT = 1
PSI_EVENT = 2


class DisturbanceSignal:
    """Time-varying exogenous input w(t) with an analytic derivative."""

    dim: int

    def value(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, t: float) -> np.ndarray:
        raise NotImplementedError


class ConstantDisturbance(DisturbanceSignal):
    def __init__(self, offset):
        self.offset = np.asarray(offset, dtype=float)
        self.dim = self.offset.size

    def value(self, t):
        return self.offset

    def derivative(self, t):
        return np.zeros(self.dim)


class SinusoidalDisturbance(DisturbanceSignal):
    """Per-coordinate w_i(t) = offset_i + amplitude_i * sin(omega t + phase)."""

    def __init__(self, offset, amplitude, omega: float, phase: float = 0.0):
        self.offset = np.asarray(offset, dtype=float)
        self.amplitude = np.asarray(amplitude, dtype=float)
        if self.amplitude.shape != self.offset.shape:
            raise DimensionError("offset and amplitude must have equal shapes")
        self.omega = float(omega)
        self.phase = float(phase)
        self.dim = self.offset.size

    def value(self, t):
        return self.offset + self.amplitude * np.sin(self.omega * t + self.phase)

    def derivative(self, t):
        return self.amplitude * self.omega * np.cos(self.omega * t + self.phase)


class PiecewiseLinearDisturbance(DisturbanceSignal):
    """Linear interpolation through knots; right-continuous slope, flat outside."""

    def __init__(self, times: Sequence[float], values):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.times.ndim != 1 or self.times.size < 2:
            raise PreconditionError("need at least two knots")
        if np.any(np.diff(self.times) <= 0):
            raise PreconditionError("knot times must be strictly increasing")
        if self.values.shape[0] != self.times.size:
            raise DimensionError("one value row per knot required")
        self.dim = self.values.shape[1]

    def value(self, t):
        return np.array(
            [np.interp(t, self.times, self.values[:, i]) for i in range(self.dim)]
        )

    def derivative(self, t):
        if t < self.times[0] or t >= self.times[-1]:
            return np.zeros(self.dim)
        k = int(np.searchsorted(self.times, t, side="right") - 1)
        dt = self.times[k + 1] - self.times[k]
        return (self.values[k + 1] - self.values[k]) / dt


def sample_arrivals(rate: float, horizon: float, rng: np.random.Generator) -> np.ndarray:
    """Event times of a Poisson clock on (0, horizon), exponential gaps of mean 1/rate."""
    if rate < 0.0:
        raise PreconditionError(f"arrival rate must be >= 0, got {rate}")
    if rate == 0.0:
        return np.empty(0)
    times = []
    t = rng.exponential(1.0 / rate)
    while t < horizon:
        times.append(t)
        t += rng.exponential(1.0 / rate)
    return np.array(times)


def controller_rhs(
    u,
    y,
    alpha_hat,
    rho_hat,
    eta: float,
    phi_basis: BasisSet,
    psi_basis: BasisSet,
    g: np.ndarray,
) -> np.ndarray:
    """Gradient-flow control field -eta (db(u)' alpha_hat + G' dd(y)' rho_hat)."""
    grad_u = phi_basis.jacobian(u).T @ np.asarray(alpha_hat, dtype=float)
    grad_y = psi_basis.jacobian(y).T @ np.asarray(rho_hat, dtype=float)
    return -eta * (grad_u + g.T @ grad_y)


def rk4_step(field: Callable, t: float, x: np.ndarray, u: np.ndarray, h: float):
    """Classical 4th-order step of the coupled field(t, x, u) -> (dx, du)."""
    if h <= 0.0:
        raise PreconditionError(f"step must be positive, got {h}")
    k1x, k1u = field(t, x, u)
    k2x, k2u = field(t + 0.5 * h, x + 0.5 * h * k1x, u + 0.5 * h * k1u)
    k3x, k3u = field(t + 0.5 * h, x + 0.5 * h * k2x, u + 0.5 * h * k2u)
    k4x, k4u = field(t + h, x + h * k3x, u + h * k3u)
    x_next = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    u_next = u + (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    return x_next, u_next


def _gradient_operator(basis: BasisSet, coeffs: np.ndarray) -> Callable:
    """Fast evaluator of point -> jacobian(point)' coeffs for frozen coefficients."""
    coeffs = np.asarray(coeffs, dtype=float)
    if isinstance(basis, QuadraticBasis):
        mat, lin, _ = quadratic_parts(coeffs, basis.input_dim)
        return lambda point: mat @ point + lin
    return lambda point: basis.jacobian(point).T @ coeffs


def closed_loop_field(
    plant: PlantModel,
    cost: CompositeCost,
    alpha_hat,
    rho_hat,
    eta: float,
    disturbance: DisturbanceSignal,
) -> Callable:
    """Coupled vector field of the interconnection for frozen estimates."""
    grad_phi = _gradient_operator(cost.phi.basis, alpha_hat)
    grad_psi = _gradient_operator(cost.psi.basis, rho_hat)
    a, b, c, d, e = plant.a, plant.b, plant.c, plant.d, plant.e
    gt = cost.g.T

    def field(t, x, u):
        w = disturbance.value(t)
        y = c @ x + d @ w
        dx = a @ x + b @ u + e @ w
        du = -eta * (grad_phi(u) + gt @ grad_psi(y))
        return dx, du

    return field


@dataclass(frozen=True)
class SimulationConfig:
    """Run parameters: gain, grid, horizon, arrival rates, noise, estimator,
    initial condition, and logging cadence."""

    eta: float
    step: float
    horizon: float
    seed: int
    x0: np.ndarray
    u0: np.ndarray
    phi_rate: float = 0.0
    psi_rate: float = 0.0
    noise_std_phi: float = 0.0
    noise_std_psi: float = 0.0
    estimator: str = "ls"
    lam: float = 1e-3
    rls_cov_scale: float = 1e6
    learn_phi: bool = False
    learn_psi: bool = False
    phi_seed_points: tuple = ()
    psi_seed_points: tuple = ()
    phi_seed_values: Optional[tuple] = None
    psi_seed_values: Optional[tuple] = None
    log_decimation: int = 10

    def __post_init__(self):
        if self.eta < 0.0:
            raise PreconditionError(f"gain must be >= 0, got {self.eta}")
        if self.step <= 0.0:
            raise PreconditionError(f"step must be positive, got {self.step}")
        if self.horizon < self.step:
            raise PreconditionError("horizon must be at least one step")
        if self.phi_rate < 0.0 or self.psi_rate < 0.0:
            raise PreconditionError("arrival rates must be >= 0")
        if self.noise_std_phi < 0.0 or self.noise_std_psi < 0.0:
            raise PreconditionError("noise standard deviations must be >= 0")
        if self.estimator not in ESTIMATORS:
            raise PreconditionError(
                f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}"
            )
        if self.log_decimation < 1:
            raise PreconditionError("log decimation must be >= 1")
        if self.learn_phi and len(self.phi_seed_points) == 0:
            raise PreconditionError("learning the input loss requires recorded seed points")
        if self.learn_psi and len(self.psi_seed_points) == 0:
            raise PreconditionError("learning the output loss requires recorded seed points")
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float))
        object.__setattr__(self, "u0", np.asarray(self.u0, dtype=float))
        object.__setattr__(
            self, "phi_seed_points", tuple(np.asarray(p, dtype=float) for p in self.phi_seed_points)
        )
        object.__setattr__(
            self, "psi_seed_points", tuple(np.asarray(p, dtype=float) for p in self.psi_seed_points)
        )
        for name in ("phi_seed_values", "psi_seed_values"):
            values = getattr(self, name)
            if values is not None:
                points = getattr(self, name.replace("_values", "_points"))
                if len(values) != len(points):
                    raise PreconditionError(f"{name} must pair up with the seed points")
                object.__setattr__(self, name, tuple(float(v) for v in values))


@dataclass(frozen=True)
class ClosedLoopTrajectory:
    """Logged run: states, optimizer track, error norms, events, and the
    piecewise-constant estimate histories.

    At every sample, z = (u - u*, x - x*) with x* the equilibrium induced by
    the current optimizer and disturbance.
    """

    times: np.ndarray
    x: np.ndarray
    u: np.ndarray
    y: np.ndarray
    u_star: np.ndarray
    x_star: np.ndarray
    y_star: np.ndarray
    z_norm: np.ndarray
    u_err_norm: np.ndarray
    x_err_norm: np.ndarray
    wdot_norm: np.ndarray
    event_flags: np.ndarray
    alpha_err_norm: np.ndarray
    rho_err_norm: np.ndarray
    phi_arrival_times: np.ndarray
    psi_arrival_times: np.ndarray
    alpha_history: tuple
    rho_history: tuple

    @property
    def sample_count(self) -> int:
        return self.times.size


class _CoefficientLearner:
    """Wraps one estimator choice behind ingest-and-refit semantics."""

    def __init__(self, kind: str, basis: BasisSet, lam: float, rls_cov_scale: float):
        self.kind = kind
        self.lam = lam
        self.dataset = Dataset(basis=basis)
        self._rls: Optional[RlsState] = None
        if kind == "rls":
            self._rls = rls_init(np.zeros(basis.size), rls_cov_scale)

    def ingest(self, record: EvaluationRecord) -> np.ndarray:
        self.dataset.append(record)
        if self.kind == "ls":
            return fit_ls(self.dataset)
        if self.kind == "ridge":
            return fit_ridge(self.dataset, self.lam)
        if self.kind == "lasso":
            return fit_lasso(self.dataset, self.lam)
        self._rls = rls_update(self._rls, record, self.dataset.basis)
        return self._rls.coeffs.copy()


def _merge_grid(horizon: float, step: float, events: list[tuple[float, int]]):
    """Union of the fixed grid and event times; returns (times, flags, is_base)."""
    n_full = int(np.floor(horizon / step + 1e-12))
    base = np.arange(n_full + 1) * step
    if base[-1] < horizon - 1e-12 * max(1.0, horizon):
        base = np.append(base, horizon)  # short final step, never a stretched one
    else:
        base[-1] = horizon
    tol = 1e-12 * max(1.0, horizon)
    times = list(base)
    flags = [0] * len(times)
    is_base = [True] * len(times)
    for t_ev, flag in events:
        k = int(np.searchsorted(base, t_ev))
        snap = None
        if k < base.size and abs(base[k] - t_ev) <= tol:
            snap = k
        elif k > 0 and abs(base[k - 1] - t_ev) <= tol:
            snap = k - 1
        if snap is not None:
            times.append(base[snap])
        else:
            times.append(t_ev)
        flags.append(flag)
        is_base.append(snap is not None)
    order = np.argsort(times, kind="stable")
    merged_t, merged_f, merged_b = [], [], []
    for idx in order:
        if merged_t and abs(times[idx] - merged_t[-1]) <= tol:
            merged_f[-1] |= flags[idx]
            merged_b[-1] = merged_b[-1] or is_base[idx]
        else:
            merged_t.append(times[idx])
            merged_f.append(flags[idx])
            merged_b.append(is_base[idx])
    return np.array(merged_t), np.array(merged_f, dtype=int), np.array(merged_b, dtype=bool)


def run_simulation(
    plant: PlantModel,
    cost: CompositeCost,
    config: SimulationConfig,
    disturbance: DisturbanceSignal,
    smooth: Optional[SmoothnessConstants] = None,
) -> ClosedLoopTrajectory:
    """Integrate the interconnection over the horizon.

    Event loop: between arrivals, integrate with frozen estimates; at each
    input-loss arrival, record (u, phi(u) + noise) and refit; at each
    output-loss arrival (when enabled), record (y, psi(y) + noise) and
    refit. The optimizer track u*_t and the error z are evaluated at every
    logged sample.
    """
    constants = smoothness_constants(cost, smooth)  # validates strong convexity
    if config.x0.shape != (plant.n,) or config.u0.shape != (plant.m,):
        raise DimensionError("initial condition dimensions do not match the plant")
    if disturbance.dim != plant.q:
        raise DimensionError("disturbance dimension does not match the plant")

    seeds = np.random.SeedSequence(config.seed).spawn(3)
    rng_phi = np.random.default_rng(seeds[0])
    rng_psi = np.random.default_rng(seeds[1])
    rng_noise = np.random.default_rng(seeds[2])

    phi_times = (
        sample_arrivals(config.phi_rate, config.horizon, rng_phi)
        if config.learn_phi
        else np.empty(0)
    )
    psi_times = (
        sample_arrivals(config.psi_rate, config.horizon, rng_psi)
        if config.learn_psi
        else np.empty(0)
    )

    def _noisy(value: float, std: float) -> float:
        return value + (rng_noise.normal(0.0, std) if std > 0.0 else 0.0)

    def _seed_records(points, values, evaluate, noise_std):
        # recorded values are used verbatim when supplied; otherwise the true
        # loss is evaluated at the configured points (plus optional noise)
        for k, point in enumerate(points):
            if values is not None:
                yield EvaluationRecord(t=0.0, point=point, value=values[k])
            else:
                yield EvaluationRecord(t=0.0, point=point, value=_noisy(evaluate(point), noise_std))

    phi_learner = rho_learner = None
    if config.learn_phi:
        phi_learner = _CoefficientLearner(
            config.estimator, cost.phi.basis, config.lam, config.rls_cov_scale
        )
        alpha_hat = np.zeros(cost.phi.basis.size)
        for rec in _seed_records(
            config.phi_seed_points, config.phi_seed_values, cost.phi_value, config.noise_std_phi
        ):
            alpha_hat = phi_learner.ingest(rec)
    else:
        alpha_hat = cost.phi.coeffs.copy()
    if config.learn_psi:
        rho_learner = _CoefficientLearner(
            config.estimator, cost.psi.basis, config.lam, config.rls_cov_scale
        )
        rho_hat = np.zeros(cost.psi.basis.size)
        for rec in _seed_records(
            config.psi_seed_points, config.psi_seed_values, cost.psi_value, config.noise_std_psi
        ):
            rho_hat = rho_learner.ingest(rec)
    else:
        rho_hat = cost.psi.coeffs.copy()

    alpha_history = [ParameterEstimate(coeffs=alpha_hat.copy(), since=0.0, method=config.estimator)]
    rho_history = [ParameterEstimate(coeffs=rho_hat.copy(), since=0.0, method=config.estimator)]

    events = [(t, PHI_EVENT) for t in phi_times] + [(t, PSI_EVENT) for t in psi_times]
    times, flags, is_base = _merge_grid(config.horizon, config.step, events)
    base_counter = np.cumsum(is_base) - 1
    log_mask = (is_base & (base_counter % config.log_decimation == 0)) | (flags > 0)
    log_mask[0] = True
    log_mask[-1] = True

    field = closed_loop_field(plant, cost, alpha_hat, rho_hat, config.eta, disturbance)
    x = config.x0.copy()
    u = config.u0.copy()

    logs: dict[str, list] = {key: [] for key in (
        "t", "x", "u", "y", "u_star", "x_star", "y_star",
        "wdot", "flag", "a_err", "r_err",
    )}

    def _log(idx: int):
        t = times[idx]
        w = disturbance.value(t)
        y = plant_output(plant, x, w)
        u_star = optimizer_oracle(cost, w, smooth=constants)
        x_star = -plant.maps.a_inv @ (plant.b @ u_star + plant.e @ w)
        logs["t"].append(t)
        logs["x"].append(x.copy())
        logs["u"].append(u.copy())
        logs["y"].append(y)
        logs["u_star"].append(u_star)
        logs["x_star"].append(x_star)
        logs["y_star"].append(cost.g @ u_star + cost.h @ w)
        logs["wdot"].append(float(np.linalg.norm(disturbance.derivative(t))))
        logs["flag"].append(int(flags[idx]))
        logs["a_err"].append(float(np.linalg.norm(cost.phi.coeffs - alpha_hat)))
        logs["r_err"].append(float(np.linalg.norm(cost.psi.coeffs - rho_hat)))

    _log(0)
    for idx in range(times.size - 1):
        h_k = times[idx + 1] - times[idx]
        with np.errstate(over="ignore", invalid="ignore"):  # divergence reported below
            x, u = rk4_step(field, times[idx], x, u, h_k)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
            raise DivergenceError(
                f"state became non-finite at t = {times[idx + 1]:.6g}", time=float(times[idx + 1])
            )
        t_now = times[idx + 1]
        flag = flags[idx + 1]
        refit = False
        if flag & PHI_EVENT:
            rec = EvaluationRecord(
                t=t_now, point=u.copy(), value=_noisy(cost.phi_value(u), config.noise_std_phi)
            )
            alpha_hat = phi_learner.ingest(rec)
            alpha_history.append(
                ParameterEstimate(coeffs=alpha_hat.copy(), since=t_now, method=config.estimator)
            )
            refit = True
        if flag & PSI_EVENT:
            y_now = plant_output(plant, x, disturbance.value(t_now))
            rec = EvaluationRecord(
                t=t_now, point=y_now, value=_noisy(cost.psi_value(y_now), config.noise_std_psi)
            )
            rho_hat = rho_learner.ingest(rec)
            rho_history.append(
                ParameterEstimate(coeffs=rho_hat.copy(), since=t_now, method=config.estimator)
            )
            refit = True
        if refit:
            field = closed_loop_field(plant, cost, alpha_hat, rho_hat, config.eta, disturbance)
        if log_mask[idx + 1]:
            _log(idx + 1)

    u_arr = np.array(logs["u"])
    x_arr = np.array(logs["x"])
    u_star_arr = np.array(logs["u_star"])
    x_star_arr = np.array(logs["x_star"])
    u_err = np.linalg.norm(u_arr - u_star_arr, axis=1)
    x_err = np.linalg.norm(x_arr - x_star_arr, axis=1)
    return ClosedLoopTrajectory(
        times=np.array(logs["t"]),
        x=x_arr,
        u=u_arr,
        y=np.array(logs["y"]),
        u_star=u_star_arr,
        x_star=x_star_arr,
        y_star=np.array(logs["y_star"]),
        z_norm=np.hypot(u_err, x_err),
        u_err_norm=u_err,
        x_err_norm=x_err,
        wdot_norm=np.array(logs["wdot"]),
        event_flags=np.array(logs["flag"], dtype=int),
        alpha_err_norm=np.array(logs["a_err"]),
        rho_err_norm=np.array(logs["r_err"]),
        phi_arrival_times=phi_times,
        psi_arrival_times=psi_times,
        alpha_history=tuple(alpha_history),
        rho_history=tuple(rho_history),
    )
