"""Estimators for basis-expansion coefficients from streaming noisy
functional evaluations: batch least squares (over- and under-determined),
ridge, lasso via soft thresholding, and recursive least squares.

All estimators are deterministic functions of the dataset and their tuning
parameter: same inputs give bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .costs import BasisSet
from .errors import EstimatorStateError, PreconditionError, RankError

SVD_CUTOFF_RTOL = 1e-12


@dataclass(frozen=True)
class EvaluationRecord:
    """One functional evaluation: time received, query point, noisy value.

    Recorded (historical) data carries t = 0 by convention.
    """

    t: float
    point: np.ndarray
    value: float

    def __post_init__(self):
        if self.t < 0.0:
            raise PreconditionError(f"record time must be >= 0, got {self.t}")
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))
        object.__setattr__(self, "value", float(self.value))


@dataclass
class Dataset:
    """Ordered evaluation records plus the induced regression system.

    Row k of the regression matrix is the basis evaluated at record k's
    point; the target vector stacks the noisy values.
    """

    basis: BasisSet
    records: list[EvaluationRecord] = field(default_factory=list)

    def __post_init__(self):
        self._rows = [self.basis.value(rec.point) for rec in self.records]

    def append(self, record: EvaluationRecord) -> None:
        self.records.append(record)
        self._rows.append(self.basis.value(record.point))

    @property
    def count(self) -> int:
        return len(self.records)

    def regression_matrix(self) -> np.ndarray:
        if not self._rows:
            return np.empty((0, self.basis.size))
        return np.vstack(self._rows)

    def targets(self) -> np.ndarray:
        return np.array([rec.value for rec in self.records])


@dataclass(frozen=True)
class ParameterEstimate:
    """Coefficient snapshot valid from `since` until the next refit
    (piecewise constant, right continuous)."""

    coeffs: np.ndarray
    since: float
    method: str

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))


def _pinv_factors(matrix: np.ndarray):
    u, sing, vt = np.linalg.svd(matrix, full_matrices=False)
    cutoff = SVD_CUTOFF_RTOL * (sing[0] if sing.size else 0.0)
    keep = sing > cutoff
    return u[:, keep], sing[keep], vt[keep]


def fit_ls(data: Dataset) -> np.ndarray:
    """Pseudo-inverse least squares.

    Full-column-rank overdetermined systems give the unique residual
    minimizer; underdetermined/consistent systems give the minimum-norm
    interpolant. Singular values below 1e-12 of the largest are dropped,
    which keeps fits from clustered trajectory points stable.
    """
    if data.count < 1:
        raise PreconditionError("dataset is empty")
    u, sing, vt = _pinv_factors(data.regression_matrix())
    return vt.T @ ((u.T @ data.targets()) / sing)


def ls_residual(data: Dataset) -> float:
    """Squared norm of the component of the targets outside the column space,
    |(I - B B^+) targets|^2."""
    if data.count < 1:
        raise PreconditionError("dataset is empty")
    targets = data.targets()
    u, _, _ = _pinv_factors(data.regression_matrix())
    projected = u @ (u.T @ targets)
    return float(np.linalg.norm(targets - projected) ** 2)


def fit_ridge(data: Dataset, lam: float) -> np.ndarray:
    """Closed-form ridge estimate (B'B + lam I)^-1 B' targets; always well posed."""
    if lam <= 0.0:
        raise PreconditionError(f"ridge parameter must be positive, got {lam}")
    if data.count < 1:
        raise PreconditionError("dataset is empty")
    b = data.regression_matrix()
    gram = b.T @ b + lam * np.eye(b.shape[1])
    return np.linalg.solve(gram, b.T @ data.targets())


def soft_threshold(z: np.ndarray, lam: float) -> np.ndarray:
    """Entrywise shrinkage max(|z| - lam, 0) * sign(z)."""
    z = np.asarray(z, dtype=float)
    return np.maximum(np.abs(z) - lam, 0.0) * np.sign(z)


def fit_lasso(data: Dataset, lam: float) -> np.ndarray:
    """Soft-thresholded least squares.

    Computes z = (B'B)^-1 B' targets and shrinks it entrywise. This equals
    the exact lasso solution only for orthonormal designs; for general
    designs it is the standard one-shot surrogate. Requires B'B invertible.
    """
    if lam < 0.0:
        raise PreconditionError(f"lasso parameter must be >= 0, got {lam}")
    if data.count < 1:
        raise PreconditionError("dataset is empty")
    b = data.regression_matrix()
    if np.linalg.matrix_rank(b) < b.shape[1]:
        raise RankError(
            f"design matrix rank {np.linalg.matrix_rank(b)} < {b.shape[1]}; "
            "lasso needs a full-column-rank design"
        )
    z = np.linalg.solve(b.T @ b, b.T @ data.targets())
    return soft_threshold(z, lam)


@dataclass(frozen=True)
class RlsState:
    """Recursive least-squares state: current estimate and SPD gain matrix."""

    coeffs: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        object.__setattr__(self, "cov", np.asarray(self.cov, dtype=float))


def rls_init(coeffs0, cov_scale: float) -> RlsState:
    """Fresh state with estimate coeffs0 and gain matrix cov_scale * I."""
    coeffs0 = np.asarray(coeffs0, dtype=float)
    if cov_scale < 0.0:
        raise PreconditionError(f"covariance scale must be >= 0, got {cov_scale}")
    return RlsState(coeffs=coeffs0.copy(), cov=cov_scale * np.eye(coeffs0.size))


def rls_update(state: RlsState, record: EvaluationRecord, basis: BasisSet) -> RlsState:
    """One rank-one recursion step.

    gain = P b / (1 + b' P b); estimate += gain * innovation;
    P -= gain (P b)'. The gain matrix must stay positive definite; if
    round-off breaks that, the state is rejected and should be re-built.
    """
    row = basis.value(record.point)
    pb = state.cov @ row
    denom = 1.0 + float(row @ pb)
    if denom <= 0.0:
        raise EstimatorStateError("gain denominator is non-positive; re-initialize the state")
    gain = pb / denom
    coeffs = state.coeffs + gain * (record.value - float(row @ state.coeffs))
    cov = state.cov - np.outer(gain, pb)
    cov = 0.5 * (cov + cov.T)
    try:
        np.linalg.cholesky(cov + np.eye(cov.shape[0]) * 1e-300)
    except np.linalg.LinAlgError as exc:
        raise EstimatorStateError(
            "gain matrix lost positive definiteness; re-initialize the state"
        ) from exc
    return RlsState(coeffs=coeffs, cov=cov)


def estimation_error(coeffs_hat, coeffs_true) -> float:
    """Euclidean distance between estimated and true coefficients."""
    coeffs_hat = np.asarray(coeffs_hat, dtype=float)
    coeffs_true = np.asarray(coeffs_true, dtype=float)
    if coeffs_hat.shape != coeffs_true.shape:
        raise PreconditionError(
            f"coefficient shapes differ: {coeffs_hat.shape} vs {coeffs_true.shape}"
        )
    return float(np.linalg.norm(coeffs_hat - coeffs_true))


def running_sup_error(history) -> float:
    """Supremum of an error history (plain max over the window)."""
    history = np.asarray(list(history), dtype=float)
    if history.size == 0:
        raise PreconditionError("error history is empty")
    return float(history.max())
