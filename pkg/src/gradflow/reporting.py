"""Output surfaces: the trajectory CSV, plain-text reports, and the run
figure (error norm against its envelope with arrival markers)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .certificates import BoundTrajectory, Certificate
from .simulate import ClosedLoopTrajectory

CSV_HEADER = "t,z_norm,u_err_norm,x_err_norm,bound,event,wdot_norm"


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def trajectory_csv_text(
    trajectory: ClosedLoopTrajectory, bound: Optional[BoundTrajectory] = None
) -> str:
    """CSV body with one row per logged sample; the bound column is empty
    where no valid certificate exists."""
    values = bound.values if bound is not None else np.full(trajectory.sample_count, np.nan)
    lines = [CSV_HEADER]
    for k in range(trajectory.sample_count):
        bound_field = "" if math.isnan(values[k]) else _fmt(values[k])
        lines.append(
            ",".join(
                (
                    _fmt(trajectory.times[k]),
                    _fmt(trajectory.z_norm[k]),
                    _fmt(trajectory.u_err_norm[k]),
                    _fmt(trajectory.x_err_norm[k]),
                    bound_field,
                    str(int(trajectory.event_flags[k])),
                    _fmt(trajectory.wdot_norm[k]),
                )
            )
        )
    return "\n".join(lines) + "\n"


def write_trajectory_csv(path, trajectory, bound=None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(trajectory_csv_text(trajectory, bound))


def certificate_report(cert: Certificate) -> str:
    """Plain-text key = value report of every constant and condition flag."""
    rows = [
        ("s", cert.s),
        ("theta", cert.theta),
        ("eta", cert.eta),
        ("eta_max", cert.eta_max),
        ("gain_condition", cert.gain_ok),
        ("c0", cert.c0),
        ("c1", cert.c1),
        ("c2", cert.c2),
        ("c3", cert.c3),
        ("c4", cert.c4),
        ("c5", cert.c5),
        ("kappa1", cert.kappa1),
        ("kappa2", cert.kappa2),
        ("kappa3", cert.kappa3),
        ("epsilon_limit", cert.epsilon_limit),
        ("epsilon", cert.epsilon),
        ("epsilon_condition", cert.epsilon_ok),
        ("epsilon_boundary", cert.boundary),
        ("truncated", cert.truncated),
        ("decay_rate_a", cert.a),
    ]
    lines = []
    for key, value in rows:
        if value is None:
            text = "n/a"
        elif isinstance(value, bool):
            text = "true" if value else "false"
        else:
            text = f"{value:.12g}"
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RunReport:
    """Condensed outcome of one experiment run.

    ``max_bound_violation`` is the largest value of |z| minus the envelope
    over the samples where the envelope exists; anything above the 1e-9
    slack marks the run FAIL. Runs whose certificate is valid nowhere are
    INCONCLUSIVE.
    """

    status: str
    gain_ok: bool
    epsilon_global: float
    epsilon_limit: float
    epsilon_ok_global: bool
    a_global: float
    bound_coverage: float
    max_bound_violation: Optional[float]
    final_z: float
    iss_asymptote: Optional[float]
    iss_scope: str
    wall_time: float

    def to_text(self) -> str:
        rows = [
            ("status", self.status),
            ("gain_condition", "true" if self.gain_ok else "false"),
            ("epsilon_global", f"{self.epsilon_global:.12g}"),
            ("epsilon_limit", f"{self.epsilon_limit:.12g}"),
            ("epsilon_condition_global", "true" if self.epsilon_ok_global else "false"),
            ("decay_rate_a_global", f"{self.a_global:.12g}"),
            ("bound_coverage", f"{self.bound_coverage:.6g}"),
            (
                "max_bound_violation",
                "n/a" if self.max_bound_violation is None else f"{self.max_bound_violation:.12g}",
            ),
            ("final_z", f"{self.final_z:.12g}"),
            (
                "iss_asymptote",
                "n/a" if self.iss_asymptote is None else f"{self.iss_asymptote:.12g}",
            ),
            ("iss_scope", self.iss_scope),
            ("wall_time_s", f"{self.wall_time:.3f}"),
        ]
        return "\n".join(f"{key} = {value}" for key, value in rows) + "\n"


def render_run_figure(
    trajectory: ClosedLoopTrajectory,
    bound: Optional[BoundTrajectory],
    path,
    title: Optional[str] = None,
) -> None:
    """Save the error-norm trace with its envelope and arrival markers."""
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.2))
    positive = trajectory.z_norm > 0
    ax.semilogy(trajectory.times[positive], trajectory.z_norm[positive], label=r"$\|z(t)\|$",
                color="tab:blue", linewidth=1.2)
    if bound is not None and np.any(np.isfinite(bound.values)):
        ax.semilogy(bound.times, bound.values, label="envelope", color="tab:red",
                    linewidth=1.2, linestyle="--")
    arrivals = np.concatenate([trajectory.phi_arrival_times, trajectory.psi_arrival_times])
    for t_arr in np.sort(arrivals):
        ax.axvline(t_arr, color="black", linestyle=":", linewidth=0.6, alpha=0.6)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("tracking error norm")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
