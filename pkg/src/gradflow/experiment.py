"""End-to-end experiment orchestration: simulate, certify, evaluate the
envelope, and condense the outcome into a report."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .certificates import (
    BoundTrajectory,
    Certificate,
    compute_constants,
    delta_signal,
    epsilon_condition,
    evaluate_bound,
    iss_asymptote,
)
from .config import ExperimentConfig
from .costs import SmoothnessConstants, smoothness_constants
from .plant import lyapunov_certificate
from .reporting import RunReport
from .simulate import ClosedLoopTrajectory, run_simulation

BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    smooth: SmoothnessConstants
    certificate: Optional[Certificate]
    trajectory: ClosedLoopTrajectory
    delta: np.ndarray
    bound: BoundTrajectory
    report: RunReport


def _tail_asymptote(
    bound: BoundTrajectory,
    trajectory: ClosedLoopTrajectory,
    cert: Certificate,
    smooth: SmoothnessConstants,
    delta: np.ndarray,
    g_norm: float,
    truncated: bool,
):
    """Ultimate bound computed on the last interval with a valid certificate."""
    valid = [iv for iv in bound.intervals if iv.valid]
    if not valid:
        return None, "none"
    last = valid[-1]
    applied = epsilon_condition(
        cert,
        smooth,
        g_norm,
        float(trajectory.alpha_err_norm[last.start_index]),
        float(trajectory.rho_err_norm[last.start_index]),
        truncated,
    )
    sup_delta = float(delta[last.start_index : last.end_index + 1].max())
    sup_wdot = float(trajectory.wdot_norm[last.start_index : last.end_index + 1].max())
    scope = "global" if last.start_index == 0 else "tail"
    return iss_asymptote(applied, sup_delta, sup_wdot), scope


def run_experiment(
    cfg: ExperimentConfig, restart_policy: Optional[str] = None
) -> ExperimentResult:
    """Run the closed loop and evaluate the certificate machinery on the log.

    A zero gain (diagnostic preset: the input stays frozen) has no
    certificate; such runs report INCONCLUSIVE with the bound column absent.
    """
    policy = restart_policy or cfg.restart_policy
    start = time.perf_counter()
    smooth = smoothness_constants(cfg.cost)
    cert = None
    if cfg.sim.eta > 0.0:
        lyap = lyapunov_certificate(cfg.plant, cfg.lyapunov_q)
        cert = compute_constants(cfg.plant, lyap, smooth, cfg.sim.eta, cfg.s)
    trajectory = run_simulation(cfg.plant, cfg.cost, cfg.sim, cfg.disturbance, smooth)
    truncated = cfg.cost.phi_tail is not None or cfg.cost.psi_tail is not None
    delta = delta_signal(trajectory, cfg.cost)
    g_norm = float(np.linalg.norm(cfg.cost.g, 2))
    if cert is not None:
        bound = evaluate_bound(trajectory, cert, smooth, delta, g_norm, policy, truncated)
        applied_global = epsilon_condition(
            cert,
            smooth,
            g_norm,
            float(trajectory.alpha_err_norm.max()),
            float(trajectory.rho_err_norm.max()),
            truncated,
        )
    else:
        bound = BoundTrajectory(
            times=trajectory.times.copy(),
            values=np.full(trajectory.sample_count, np.nan),
            intervals=(),
        )
        applied_global = None
    finite = np.isfinite(bound.values)
    max_violation = (
        float((trajectory.z_norm[finite] - bound.values[finite]).max()) if finite.any() else None
    )
    if cert is not None:
        iss_value, iss_scope = _tail_asymptote(
            bound, trajectory, cert, smooth, delta, g_norm, truncated
        )
    else:
        iss_value, iss_scope = None, "none"
    if not finite.any():
        status = "INCONCLUSIVE"
    elif max_violation is not None and max_violation > BOUND_SLACK:
        status = "FAIL"
    else:
        status = "PASS"
    nan = float("nan")
    report = RunReport(
        status=status,
        gain_ok=cert.gain_ok if cert is not None else False,
        epsilon_global=float(applied_global.epsilon) if applied_global else nan,
        epsilon_limit=float(cert.epsilon_limit) if cert is not None else nan,
        epsilon_ok_global=bool(applied_global.epsilon_ok) if applied_global else False,
        a_global=float(applied_global.a) if applied_global else nan,
        bound_coverage=bound.coverage,
        max_bound_violation=max_violation,
        final_z=float(trajectory.z_norm[-1]),
        iss_asymptote=iss_value,
        iss_scope=iss_scope,
        wall_time=time.perf_counter() - start,
    )
    return ExperimentResult(
        config=cfg,
        smooth=smooth,
        certificate=cert,
        trajectory=trajectory,
        delta=delta,
        bound=bound,
        report=report,
    )


def certify_only(cfg: ExperimentConfig) -> Certificate:
    """Certificate constants and conditions without running a simulation.

    The learning-error level is applied at the exact-knowledge boundary
    (zero error), so the reported decay rate is the ceiling c0.
    """
    lyap = lyapunov_certificate(cfg.plant, cfg.lyapunov_q)
    smooth = smoothness_constants(cfg.cost)
    cert = compute_constants(cfg.plant, lyap, smooth, cfg.sim.eta, cfg.s)
    g_norm = float(np.linalg.norm(cfg.cost.g, 2))
    truncated = cfg.cost.phi_tail is not None or cfg.cost.psi_tail is not None
    return epsilon_condition(cert, smooth, g_norm, 0.0, 0.0, truncated)
