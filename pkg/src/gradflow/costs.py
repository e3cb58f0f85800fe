"""Basis-expansion cost models, their gradients, curvature constants, and the
time-varying optimizer oracle.

The regulated objective is phi(u) + psi(G u + H w) where both losses are
linear combinations of known differentiable basis functions with unknown
coefficients. The quadratic basis covers every convex quadratic loss; other
losses plug in through the generic ``BasisSet`` interface.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    ConvergenceError,
    ConvexityError,
    DimensionError,
    PreconditionError,
)

GD_MAX_ITERATIONS = 10**6
GD_DEFAULT_TOL = 1e-10


class BasisSet:
    """Differentiable basis b: R^input_dim -> R^size with Jacobian db/dpoint."""

    input_dim: int
    size: int

    def value(self, point: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, point: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check_point(self, point) -> np.ndarray:
        point = np.asarray(point, dtype=float)
        if point.shape != (self.input_dim,):
            raise DimensionError(
                f"point must have shape ({self.input_dim},), got {point.shape}"
            )
        return point


class CallableBasis(BasisSet):
    """Basis defined by user-supplied value/Jacobian callables."""

    def __init__(self, input_dim: int, size: int, value: Callable, jacobian: Callable):
        self.input_dim = int(input_dim)
        self.size = int(size)
        self._value = value
        self._jacobian = jacobian

    def value(self, point):
        return np.asarray(self._value(self._check_point(point)), dtype=float)

    def jacobian(self, point):
        return np.asarray(self._jacobian(self._check_point(point)), dtype=float)


class QuadraticBasis(BasisSet):
    """Basis spanning all quadratics on R^m.

    Ordering: constant 1; linear u_1..u_m; then the upper triangle of the
    curvature matrix row-major, where diagonal entries use u_i^2/2 and each
    off-diagonal pair (i<j) uses the single product u_i*u_j so the expansion
    is a free linear parameterization (no symmetry constraint needed; the
    paired off-diagonal weight folds into one coefficient).
    """

    def __init__(self, m: int):
        if m < 1:
            raise PreconditionError(f"input dimension must be >= 1, got {m}")
        self.input_dim = int(m)
        self.size = 1 + m + m * (m + 1) // 2
        self._pairs = [(i, j) for i in range(m) for j in range(i, m)]

    def value(self, point):
        u = self._check_point(point)
        m = self.input_dim
        out = np.empty(self.size)
        out[0] = 1.0
        out[1 : 1 + m] = u
        for k, (i, j) in enumerate(self._pairs):
            out[1 + m + k] = 0.5 * u[i] * u[i] if i == j else u[i] * u[j]
        return out

    def jacobian(self, point):
        u = self._check_point(point)
        m = self.input_dim
        jac = np.zeros((self.size, m))
        jac[1 : 1 + m, :] = np.eye(m)
        for k, (i, j) in enumerate(self._pairs):
            row = 1 + m + k
            if i == j:
                jac[row, i] = u[i]
            else:
                jac[row, i] = u[j]
                jac[row, j] = u[i]
        return jac


def quadratic_basis(m: int) -> QuadraticBasis:
    """Quadratic basis on R^m with 1 + m + m(m+1)/2 functions."""
    return QuadraticBasis(m)


@dataclass(frozen=True)
class QuadraticCost:
    """Quadratic loss 0.5 u' M u + v' u + r with M symmetric PSD."""

    matrix: np.ndarray
    linear: np.ndarray
    offset: float

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        linear = np.asarray(self.linear, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionError(f"curvature matrix must be square, got shape {matrix.shape}")
        if linear.shape != (matrix.shape[0],):
            raise DimensionError(
                f"linear term must have shape ({matrix.shape[0]},), got {linear.shape}"
            )
        scale = max(np.abs(matrix).max(), 1.0)
        if np.abs(matrix - matrix.T).max() > 1e-12 * scale:
            raise PreconditionError("curvature matrix must be symmetric")
        matrix = 0.5 * (matrix + matrix.T)
        if np.linalg.eigvalsh(matrix).min() < -1e-10 * scale:
            raise PreconditionError("curvature matrix must be positive semidefinite")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "linear", linear)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def value(self, point) -> float:
        point = np.asarray(point, dtype=float)
        return float(0.5 * point @ self.matrix @ point + self.linear @ point + self.offset)

    def gradient(self, point) -> np.ndarray:
        return self.matrix @ np.asarray(point, dtype=float) + self.linear


def pack_quadratic(matrix, linear, offset) -> np.ndarray:
    """Coefficient vector of a quadratic loss in the quadratic-basis ordering."""
    cost = QuadraticCost(matrix=matrix, linear=linear, offset=offset)
    m = cost.dim
    coeffs = np.empty(1 + m + m * (m + 1) // 2)
    coeffs[0] = cost.offset
    coeffs[1 : 1 + m] = cost.linear
    k = 1 + m
    for i in range(m):
        for j in range(i, m):
            coeffs[k] = cost.matrix[i, i] if i == j else cost.matrix[i, j]
            k += 1
    return coeffs


def quadratic_parts(coeffs, m: int) -> tuple[np.ndarray, np.ndarray, float]:
    """(matrix, linear, offset) encoded by a quadratic-basis coefficient vector.

    No convexity validation: estimated coefficients may be indefinite.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    expected = 1 + m + m * (m + 1) // 2
    if coeffs.shape != (expected,):
        raise DimensionError(f"coefficients must have shape ({expected},), got {coeffs.shape}")
    matrix = np.zeros((m, m))
    k = 1 + m
    for i in range(m):
        for j in range(i, m):
            if i == j:
                matrix[i, i] = coeffs[k]
            else:
                matrix[i, j] = matrix[j, i] = coeffs[k]
            k += 1
    return matrix, coeffs[1 : 1 + m].copy(), float(coeffs[0])


def unpack_quadratic(coeffs, m: int) -> QuadraticCost:
    """Inverse of pack_quadratic."""
    matrix, linear, offset = quadratic_parts(coeffs, m)
    return QuadraticCost(matrix=matrix, linear=linear, offset=offset)


def grad_phi_hat(basis: BasisSet, alpha_hat, u) -> np.ndarray:
    """Estimated gradient: the basis Jacobian transposed times the coefficients."""
    alpha_hat = np.asarray(alpha_hat, dtype=float)
    if alpha_hat.shape != (basis.size,):
        raise DimensionError(f"coefficients must have shape ({basis.size},), got {alpha_hat.shape}")
    return basis.jacobian(u).T @ alpha_hat


def grad_psi_hat(basis: BasisSet, rho_hat, y) -> np.ndarray:
    """Estimated output-loss gradient; same contraction on the output basis."""
    return grad_phi_hat(basis, rho_hat, y)


@dataclass(frozen=True)
class BasisExpansion:
    """A basis with a fixed coefficient vector."""

    basis: BasisSet
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape != (self.basis.size,):
            raise DimensionError(
                f"coefficients must have shape ({self.basis.size},), got {coeffs.shape}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    def value(self, point) -> float:
        return float(self.basis.value(point) @ self.coeffs)

    def gradient(self, point) -> np.ndarray:
        return self.basis.jacobian(point).T @ self.coeffs

    def quadratic(self) -> Optional[QuadraticCost]:
        """The expansion as an explicit quadratic when the basis supports it."""
        if isinstance(self.basis, QuadraticBasis):
            return unpack_quadratic(self.coeffs, self.basis.input_dim)
        return None


@dataclass(frozen=True)
class CompositeCost:
    """The full objective phi(u) + psi(G u + H w).

    ``phi``/``psi`` hold the learned (leading) part of each expansion;
    ``phi_tail``/``psi_tail`` are optional fixed-coefficient tails left out
    of the learning, used for truncated-expansion runs. True values and
    gradients always include the tails.
    """

    phi: BasisExpansion
    psi: BasisExpansion
    g: np.ndarray
    h: np.ndarray
    phi_tail: Optional[BasisExpansion] = None
    psi_tail: Optional[BasisExpansion] = None

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        h = np.asarray(self.h, dtype=float)
        if g.shape != (self.psi.basis.input_dim, self.phi.basis.input_dim):
            raise DimensionError(
                f"G must map inputs to outputs, expected shape "
                f"({self.psi.basis.input_dim}, {self.phi.basis.input_dim}), got {g.shape}"
            )
        if h.shape[0] != self.psi.basis.input_dim:
            raise DimensionError(f"H must have {self.psi.basis.input_dim} rows, got {h.shape}")
        if self.phi_tail is not None and self.phi_tail.basis.input_dim != self.phi.basis.input_dim:
            raise DimensionError("phi tail must share the input dimension of phi")
        if self.psi_tail is not None and self.psi_tail.basis.input_dim != self.psi.basis.input_dim:
            raise DimensionError("psi tail must share the input dimension of psi")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h", h)

    @property
    def m(self) -> int:
        return self.phi.basis.input_dim

    @property
    def p(self) -> int:
        return self.psi.basis.input_dim

    def phi_value(self, u) -> float:
        value = self.phi.value(u)
        if self.phi_tail is not None:
            value += self.phi_tail.value(u)
        return value

    def psi_value(self, y) -> float:
        value = self.psi.value(y)
        if self.psi_tail is not None:
            value += self.psi_tail.value(y)
        return value

    def phi_gradient(self, u) -> np.ndarray:
        grad = self.phi.gradient(u)
        if self.phi_tail is not None:
            grad = grad + self.phi_tail.gradient(u)
        return grad

    def psi_gradient(self, y) -> np.ndarray:
        grad = self.psi.gradient(y)
        if self.psi_tail is not None:
            grad = grad + self.psi_tail.gradient(y)
        return grad

    def steady_output(self, u, w) -> np.ndarray:
        return self.g @ np.asarray(u, dtype=float) + self.h @ np.asarray(w, dtype=float)

    def is_quadratic(self) -> bool:
        parts = [self.phi, self.psi] + [t for t in (self.phi_tail, self.psi_tail) if t is not None]
        return all(isinstance(part.basis, QuadraticBasis) for part in parts)

    def total_quadratic_parts(self):
        """((matrix, linear, offset) of phi, same of psi) with tails folded in.

        Raw coefficients: no convexity validation here, so downstream checks
        can report convexity failures precisely.
        """
        if not self.is_quadratic():
            return None
        phi_mat, phi_lin, phi_off = quadratic_parts(self.phi.coeffs, self.m)
        psi_mat, psi_lin, psi_off = quadratic_parts(self.psi.coeffs, self.p)
        if self.phi_tail is not None:
            mat, lin, off = quadratic_parts(self.phi_tail.coeffs, self.m)
            phi_mat, phi_lin, phi_off = phi_mat + mat, phi_lin + lin, phi_off + off
        if self.psi_tail is not None:
            mat, lin, off = quadratic_parts(self.psi_tail.coeffs, self.p)
            psi_mat, psi_lin, psi_off = psi_mat + mat, psi_lin + lin, psi_off + off
        return (phi_mat, phi_lin, phi_off), (psi_mat, psi_lin, psi_off)


def composite_value(cost: CompositeCost, u, w) -> float:
    """phi(u) + psi(G u + H w), tails included."""
    return cost.phi_value(u) + cost.psi_value(cost.steady_output(u, w))


def composite_gradient(cost: CompositeCost, u, w) -> np.ndarray:
    """Gradient of the composite objective in u, tails included."""
    y = cost.steady_output(u, w)
    return cost.phi_gradient(u) + cost.g.T @ cost.psi_gradient(y)


@dataclass(frozen=True)
class SmoothnessConstants:
    """Curvature bounds of the composite objective.

    ell_u / ell_y bound the full losses, ell = ell_u + |G|^2 ell_y bounds the
    composite, mu_u is its strong-convexity modulus. The *_lead entries bound
    the learned leading expansions and *_tail the fixed tails (all zero when
    there is no truncation).
    """

    ell_u: float
    ell_y: float
    ell: float
    mu_u: float
    ell_u_lead: float
    ell_y_lead: float
    ell_u_tail: float
    ell_y_tail: float

    def __post_init__(self):
        if self.mu_u <= 0.0:
            raise ConvexityError(f"strong-convexity modulus must be positive, got {self.mu_u}")
        if self.mu_u > self.ell * (1.0 + 1e-12):
            raise PreconditionError(
                f"mu_u = {self.mu_u} exceeds the smoothness bound ell = {self.ell}"
            )


def smoothness_constants(
    cost: CompositeCost, supplied: Optional[SmoothnessConstants] = None
) -> SmoothnessConstants:
    """Analytic constants for all-quadratic costs, else pass-through of supplied ones."""
    if supplied is not None:
        return supplied
    if not cost.is_quadratic():
        raise PreconditionError(
            "constants are analytic only for quadratic-basis costs; supply them explicitly"
        )
    (phi_mat, _, _), (psi_mat, _, _) = cost.total_quadratic_parts()
    g_norm = float(np.linalg.norm(cost.g, 2))
    ell_u = float(np.linalg.norm(phi_mat, 2))
    ell_y = float(np.linalg.norm(psi_mat, 2))
    composite_curvature = phi_mat + cost.g.T @ psi_mat @ cost.g
    mu_u = float(np.linalg.eigvalsh(0.5 * (composite_curvature + composite_curvature.T)).min())
    if mu_u <= 0.0:
        raise ConvexityError(f"composite curvature is not positive definite (min eig {mu_u:.3e})")

    def _tail_norm(tail: Optional[BasisExpansion]) -> float:
        if tail is None:
            return 0.0
        mat, _, _ = quadratic_parts(tail.coeffs, tail.basis.input_dim)
        return float(np.linalg.norm(mat, 2))

    return SmoothnessConstants(
        ell_u=ell_u,
        ell_y=ell_y,
        ell=ell_u + g_norm**2 * ell_y,
        mu_u=mu_u,
        ell_u_lead=float(np.linalg.norm(quadratic_parts(cost.phi.coeffs, cost.m)[0], 2)),
        ell_y_lead=float(np.linalg.norm(quadratic_parts(cost.psi.coeffs, cost.p)[0], 2)),
        ell_u_tail=_tail_norm(cost.phi_tail),
        ell_y_tail=_tail_norm(cost.psi_tail),
    )


def optimizer_oracle(
    cost: CompositeCost,
    w,
    tol: float = GD_DEFAULT_TOL,
    smooth: Optional[SmoothnessConstants] = None,
    force_gradient_descent: bool = False,
) -> np.ndarray:
    """Minimizer of the composite objective for a fixed disturbance.

    All-quadratic costs use the linear first-order condition
    (Phi + G' Psi G) u = -(phi linear) - G'(Psi H w + psi linear); everything
    else falls back to gradient descent with step 1/ell until the gradient
    norm reaches the tolerance.
    """
    w = np.asarray(w, dtype=float)
    if not force_gradient_descent and cost.is_quadratic():
        (phi_mat, phi_lin, _), (psi_mat, psi_lin, _) = cost.total_quadratic_parts()
        curvature = phi_mat + cost.g.T @ psi_mat @ cost.g
        if np.linalg.eigvalsh(0.5 * (curvature + curvature.T)).min() <= 0.0:
            raise ConvexityError("composite curvature is not positive definite")
        rhs = -phi_lin - cost.g.T @ (psi_mat @ (cost.h @ w) + psi_lin)
        return np.linalg.solve(curvature, rhs)

    constants = smoothness_constants(cost, smooth)
    step = 1.0 / constants.ell
    u = np.zeros(cost.m)
    grad = composite_gradient(cost, u, w)
    grad_norm = float(np.linalg.norm(grad))
    growth_streak = 0
    for _ in range(GD_MAX_ITERATIONS):
        if grad_norm <= tol:
            return u
        u = u - step * grad
        grad = composite_gradient(cost, u, w)
        new_norm = float(np.linalg.norm(grad))
        growth_streak = growth_streak + 1 if new_norm > grad_norm else 0
        if growth_streak >= 50:
            raise ConvexityError(
                "gradient descent is non-contracting; the composite cost is not strongly convex"
            )
        grad_norm = new_norm
    raise ConvergenceError(
        f"optimizer did not reach gradient norm {tol:.1e} in {GD_MAX_ITERATIONS} iterations"
    )


def check_pl(
    cost: CompositeCost,
    w,
    u,
    tol: float = 1e-9,
    smooth: Optional[SmoothnessConstants] = None,
    u_star: Optional[np.ndarray] = None,
) -> bool:
    """Gradient-dominance check |grad|^2 + tol >= 2 mu_u (f(u) - f(u*))."""
    constants = smoothness_constants(cost, smooth)
    if u_star is None:
        u_star = optimizer_oracle(cost, w, smooth=smooth)
    lhs = float(np.linalg.norm(composite_gradient(cost, u, w)) ** 2)
    gap = composite_value(cost, u, w) - composite_value(cost, u_star, w)
    return lhs + tol >= 2.0 * constants.mu_u * gap
