"""Stability certificates for the learned gradient-flow loop: the gain
condition, the admissible learning-error level, the decay/gain constants of
the error envelope, the envelope itself evaluated along a trajectory, and
the ultimate-bound asymptote.

The envelope has the form

    |z(t)| <= k1 exp(-a (t-t0)/2) |z(t0)|
            + k2 int exp(-a (t-tau)/2) delta(tau) dtau
            + k3 int exp(-a (t-tau)/2) |dw/dt(tau)| dtau,

valid while the weighted worst-case estimation error stays below c0/c3.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .costs import CompositeCost, SmoothnessConstants
from .errors import CertificateInvalidError, DegenerateCouplingError, PreconditionError
from .plant import LyapunovCertificate, PlantModel
from .simulate import ClosedLoopTrajectory


def compute_theta(ell_y: float, g_norm: float, c_norm: float, pab_norm: float) -> float:
    """Splitting ratio between the controller and plant energy functions.

    theta = b1 / (b1 + b2) with b1 = ell_y |G||C| and b2 = 2 |P A^-1 B|; this
    is the maximizer of the admissible-gain expression.
    """
    b1 = ell_y * g_norm * c_norm
    b2 = 2.0 * pab_norm
    if b1 <= 0.0:
        raise DegenerateCouplingError(
            "output coupling ell_y |G||C| is zero; the splitting ratio is undefined"
        )
    if b2 <= 0.0:
        raise PreconditionError("|P A^-1 B| must be positive")
    return b1 / (b1 + b2)


def gain_bound(
    s: float, lam_q_min: float, pab_norm: float, ell_y: float, g_norm: float, c_norm: float
) -> float:
    """Supremum of admissible controller gains,
    (1-s)^2 lam_min(Q) / ((2-s) 2 |P A^-1 B| ell_y |G||C|)."""
    if not 0.0 < s < 1.0:
        raise PreconditionError(f"s must lie in (0, 1), got {s}")
    denom = (2.0 - s) * 2.0 * pab_norm * ell_y * g_norm * c_norm
    if denom <= 0.0:
        raise DegenerateCouplingError("zero output coupling; the gain bound is undefined")
    return (1.0 - s) ** 2 * lam_q_min / denom


def check_gain(eta: float, eta_max: float) -> bool:
    """Strict admissibility 0 < eta < eta_max."""
    return 0.0 < eta < eta_max


@dataclass(frozen=True)
class Certificate:
    """All envelope constants plus, once applied to a run, the learning-error
    level and the resulting decay rate.

    ``epsilon``/``a`` stay None until the certificate is applied to
    estimation errors through :func:`epsilon_condition`. ``boundary`` marks
    the exact-knowledge limit epsilon = 0, where the decay rate equals c0.
    """

    s: float
    theta: float
    eta: float
    eta_max: float
    gain_ok: bool
    c0: float
    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    kappa1: float
    kappa2: float
    kappa3: float
    epsilon_limit: float
    epsilon: Optional[float] = None
    epsilon_ok: Optional[bool] = None
    a: Optional[float] = None
    boundary: bool = False
    truncated: bool = False


def compute_constants(
    plant: PlantModel,
    lyap: LyapunovCertificate,
    smooth: SmoothnessConstants,
    eta: float,
    s: float,
) -> Certificate:
    """Assemble the full constant set from the plant, its Lyapunov pair, and
    the cost curvature bounds."""
    if eta <= 0.0:
        raise PreconditionError(f"gain must be positive, got {eta}")
    if not 0.0 < s < 1.0:
        raise PreconditionError(f"s must lie in (0, 1), got {s}")
    maps = plant.maps
    g_norm = float(np.linalg.norm(maps.g, 2))
    c_norm = float(np.linalg.norm(plant.c, 2))
    pab_norm = float(np.linalg.norm(lyap.p @ maps.a_inv @ plant.b, 2))
    pae_norm = float(np.linalg.norm(lyap.p.T @ maps.a_inv @ plant.e, 2))
    lam_p = np.linalg.eigvalsh(lyap.p)
    lam_q_min = float(np.linalg.eigvalsh(lyap.q).min())
    lam_p_min, lam_p_max = float(lam_p.min()), float(lam_p.max())

    theta = compute_theta(smooth.ell_y, g_norm, c_norm, pab_norm)
    eta_max = gain_bound(s, lam_q_min, pab_norm, smooth.ell_y, g_norm, c_norm)

    c0 = s * min(2.0 * smooth.mu_u * eta, lam_q_min / lam_p_max)
    c1 = min((1.0 - theta) * smooth.mu_u / (2.0 * eta), theta * lam_p_min / eta)
    c2 = max((1.0 - theta) * smooth.ell / (2.0 * eta), theta * lam_p_max / eta)
    c3 = max(2.0 * eta * smooth.ell / smooth.mu_u, 4.0 * pab_norm / c1)
    c4 = np.sqrt(eta) * max(
        smooth.ell * np.sqrt(2.0 / smooth.mu_u), 2.0 * pab_norm / np.sqrt(lam_p_min)
    )
    c5 = 2.0 * pae_norm / (np.sqrt(eta) * np.sqrt(lam_p_min))
    kappa1 = float(np.sqrt(c2 / c1))
    if c1 > c2 or kappa1 < 1.0:
        raise CertificateInvalidError(
            f"quadratic sandwich is inverted (c1 = {c1}, c2 = {c2})"
        )
    return Certificate(
        s=s,
        theta=theta,
        eta=eta,
        eta_max=eta_max,
        gain_ok=check_gain(eta, eta_max),
        c0=c0,
        c1=c1,
        c2=c2,
        c3=c3,
        c4=c4,
        c5=c5,
        kappa1=kappa1,
        kappa2=float(c4 / (2.0 * np.sqrt(c1))),
        kappa3=float(c5 / (2.0 * np.sqrt(c1))),
        epsilon_limit=c0 / c3,
    )


def weighted_error_level(
    smooth: SmoothnessConstants,
    g_norm: float,
    sup_alpha_err: float,
    sup_rho_err: float,
    truncated: bool,
) -> float:
    """Smoothness-weighted worst-case learning error (plus fixed truncation
    terms in the truncated variant)."""
    if truncated:
        return (
            smooth.ell_u_lead * sup_alpha_err
            + smooth.ell_y_lead * g_norm**2 * sup_rho_err
            + smooth.ell_u_tail
            + smooth.ell_y_tail * g_norm**2
        )
    return smooth.ell_u * sup_alpha_err + smooth.ell_y * g_norm**2 * sup_rho_err


def epsilon_condition(
    cert: Certificate,
    smooth: SmoothnessConstants,
    g_norm: float,
    sup_alpha_err: float,
    sup_rho_err: float,
    truncated: bool = False,
) -> Certificate:
    """Apply the admissibility test to worst-case estimation errors.

    Returns a copy of the certificate carrying epsilon, the strict
    satisfaction flag, and the decay rate a = c0 - epsilon c3. epsilon = 0 is
    the exact-knowledge boundary: satisfied, flagged, with a = c0.
    """
    eps = weighted_error_level(smooth, g_norm, sup_alpha_err, sup_rho_err, truncated)
    boundary = eps == 0.0
    satisfied = eps < cert.epsilon_limit
    return dataclasses.replace(
        cert,
        epsilon=eps,
        epsilon_ok=satisfied,
        a=cert.c0 - eps * cert.c3,
        boundary=boundary,
        truncated=truncated,
    )


def _spectral_norms(basis, points: np.ndarray) -> np.ndarray:
    return np.array([np.linalg.norm(basis.jacobian(pt), 2) for pt in points])


def delta_signal(
    trajectory: ClosedLoopTrajectory,
    cost: CompositeCost,
    include_truncation: Optional[bool] = None,
) -> np.ndarray:
    """Per-sample forcing term of the envelope.

    |db(u*)| |alpha - alpha_hat| + |G| |dd(y*)| |rho - rho_hat|, plus the
    truncation gradients |de_phi(u*)| + |G| |de_psi(y*)| when tails are in
    play. Jacobian norms are spectral.
    """
    if include_truncation is None:
        include_truncation = cost.phi_tail is not None or cost.psi_tail is not None
    g_norm = float(np.linalg.norm(cost.g, 2))
    out = _spectral_norms(cost.phi.basis, trajectory.u_star) * trajectory.alpha_err_norm
    out = out + g_norm * _spectral_norms(cost.psi.basis, trajectory.y_star) * trajectory.rho_err_norm
    if include_truncation:
        if cost.phi_tail is not None:
            out = out + np.array(
                [np.linalg.norm(cost.phi_tail.gradient(pt)) for pt in trajectory.u_star]
            )
        if cost.psi_tail is not None:
            out = out + g_norm * np.array(
                [np.linalg.norm(cost.psi_tail.gradient(pt)) for pt in trajectory.y_star]
            )
    return out


@dataclass(frozen=True)
class BoundInterval:
    """Envelope metadata for one inter-arrival stretch."""

    start_index: int
    end_index: int
    t_start: float
    t_end: float
    epsilon: float
    a: float
    valid: bool
    anchor_z: float
    start_value: float
    end_value: float


@dataclass(frozen=True)
class BoundTrajectory:
    """Envelope values aligned with the trajectory samples (NaN where no
    valid certificate exists) plus per-interval restart metadata."""

    times: np.ndarray
    values: np.ndarray
    intervals: tuple

    @property
    def coverage(self) -> float:
        return float(np.mean(np.isfinite(self.values)))


def evaluate_bound(
    trajectory: ClosedLoopTrajectory,
    cert: Certificate,
    smooth: SmoothnessConstants,
    delta: np.ndarray,
    g_norm: float,
    restart_policy: str = "per-arrival",
    truncated: bool = False,
) -> BoundTrajectory:
    """Evaluate the error envelope along the run.

    Convolution integrals use the exact exponential-kernel recursion
    I_next = exp(-a h / 2) I + trapezoidal increment. Policy "per-arrival"
    re-anchors the envelope at every arrival with the interval-local frozen
    estimation errors (the estimates only change there, so the interval sup
    is the value at the interval start); policy "global" applies a single
    anchor at t0 with the running sup over the whole record.
    """
    if restart_policy not in ("per-arrival", "global"):
        raise PreconditionError(f"unknown restart policy {restart_policy!r}")
    times = trajectory.times
    n = times.size
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (n,):
        raise PreconditionError("delta series must align with the trajectory samples")
    wdot = trajectory.wdot_norm

    if restart_policy == "per-arrival":
        anchors = [0] + [int(i) for i in np.flatnonzero(trajectory.event_flags > 0) if i > 0]
    else:
        anchors = [0]
    anchors = sorted(set(anchors))
    boundaries = anchors + [n - 1]

    values = np.full(n, np.nan)
    intervals = []
    for k, start in enumerate(anchors):
        end = boundaries[k + 1]
        if end <= start:
            continue
        if restart_policy == "per-arrival":
            sup_alpha = float(trajectory.alpha_err_norm[start])
            sup_rho = float(trajectory.rho_err_norm[start])
        else:
            sup_alpha = float(trajectory.alpha_err_norm.max())
            sup_rho = float(trajectory.rho_err_norm.max())
        applied = epsilon_condition(cert, smooth, g_norm, sup_alpha, sup_rho, truncated)
        a = applied.a
        anchor_z = float(trajectory.z_norm[start])
        valid = bool(applied.epsilon_ok) and a > 0.0
        start_value = cert.kappa1 * anchor_z
        end_value = np.nan
        if valid:
            i_delta = 0.0
            i_wdot = 0.0
            values[start] = start_value
            for j in range(start + 1, end + 1):
                h = times[j] - times[j - 1]
                decay = np.exp(-0.5 * a * h)
                i_delta = decay * i_delta + 0.5 * h * (decay * delta[j - 1] + delta[j])
                i_wdot = decay * i_wdot + 0.5 * h * (decay * wdot[j - 1] + wdot[j])
                value = (
                    cert.kappa1 * anchor_z * np.exp(-0.5 * a * (times[j] - times[start]))
                    + cert.kappa2 * i_delta
                    + cert.kappa3 * i_wdot
                )
                if j < end or end == n - 1:
                    values[j] = value
                end_value = value
        intervals.append(
            BoundInterval(
                start_index=start,
                end_index=end,
                t_start=float(times[start]),
                t_end=float(times[end]),
                epsilon=float(applied.epsilon),
                a=float(a),
                valid=valid,
                anchor_z=anchor_z,
                start_value=start_value if valid else np.nan,
                end_value=float(end_value) if valid else np.nan,
            )
        )
    # the final sample belongs to the last interval; earlier interval right
    # endpoints are owned by the next interval's anchor (right continuity)
    return BoundTrajectory(times=times.copy(), values=values, intervals=tuple(intervals))


def iss_asymptote(cert: Certificate, sup_delta: float, sup_wdot: float) -> float:
    """Ultimate error level 2 a^-1 (k2 sup delta + k3 sup |dw/dt|)."""
    if cert.a is None:
        raise PreconditionError("apply epsilon_condition before the asymptote")
    if cert.a <= 0.0:
        raise CertificateInvalidError(f"decay rate a = {cert.a} is not positive")
    return 2.0 / cert.a * (cert.kappa2 * sup_delta + cert.kappa3 * sup_wdot)
