"""Linear time-invariant plant: stability validation, Lyapunov certificates,
and the algebraic steady-state maps from inputs/disturbances to outputs.

The plant is

    dx/dt = A x + B u + E w,      y = C x + D w,

with A required to be Hurwitz. All residual checks are scaled by the
max-norm of the operands.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DimensionError, PreconditionError, SingularMatrixError, StabilityError

LYAPUNOV_RESIDUAL_RTOL = 1e-9
MAP_RESIDUAL_RTOL = 1e-10


def _as_matrix(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    return arr


def validate_hurwitz(a) -> tuple[bool, float]:
    """Return (is_hurwitz, margin) where margin is the largest eigenvalue real part.

    Strictly negative margin means Hurwitz; the margin is reported so that
    near-marginal systems are diagnosable.
    """
    a = _as_matrix(a, "A")
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"A must be square, got shape {a.shape}")
    margin = float(np.max(np.linalg.eigvals(a).real))
    return margin < 0.0, margin


@dataclass(frozen=True)
class PlantModel:
    """Matrices (A, B, C, D, E) of the plant; A is checked to be Hurwitz."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    e: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _as_matrix(self.a, "A"))
        object.__setattr__(self, "b", _as_matrix(self.b, "B"))
        object.__setattr__(self, "c", _as_matrix(self.c, "C"))
        object.__setattr__(self, "d", _as_matrix(self.d, "D"))
        object.__setattr__(self, "e", _as_matrix(self.e, "E"))
        n = self.a.shape[0]
        if self.a.shape != (n, n):
            raise DimensionError(f"A must be square, got shape {self.a.shape}")
        if self.b.shape[0] != n:
            raise DimensionError(f"B must have {n} rows, got shape {self.b.shape}")
        if self.e.shape[0] != n:
            raise DimensionError(f"E must have {n} rows, got shape {self.e.shape}")
        if self.c.shape[1] != n:
            raise DimensionError(f"C must have {n} columns, got shape {self.c.shape}")
        p = self.c.shape[0]
        if self.d.shape[0] != p:
            raise DimensionError(f"D must have {p} rows, got shape {self.d.shape}")
        if self.d.shape[1] != self.e.shape[1]:
            raise DimensionError(
                f"D and E must agree on the disturbance dimension, got {self.d.shape} vs {self.e.shape}"
            )
        hurwitz, margin = validate_hurwitz(self.a)
        if not hurwitz:
            raise StabilityError(f"A is not Hurwitz (max eigenvalue real part {margin:.6g})")

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[1]

    @property
    def p(self) -> int:
        return self.c.shape[0]

    @property
    def q(self) -> int:
        return self.e.shape[1]

    @cached_property
    def maps(self) -> "SteadyStateMaps":
        return steady_state_maps(self)


@dataclass(frozen=True)
class SteadyStateMaps:
    """Algebraic equilibrium maps y_eq = G u + H w, with the A-inverse cached."""

    g: np.ndarray
    h: np.ndarray
    a_inv: np.ndarray = field(repr=False)


def steady_state_maps(plant: PlantModel) -> SteadyStateMaps:
    """Compute G = -C A^-1 B and H = D - C A^-1 E with a residual check."""
    try:
        a_inv = np.linalg.inv(plant.a)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("A is singular; steady-state maps undefined") from exc
    g = -plant.c @ a_inv @ plant.b
    h = plant.d - plant.c @ a_inv @ plant.e
    scale = max(np.abs(plant.a).max() * np.abs(a_inv @ plant.b).max(), np.abs(plant.b).max(), 1.0)
    residual = np.abs(plant.a @ (-a_inv @ plant.b) + plant.b).max()
    if residual > MAP_RESIDUAL_RTOL * scale:
        raise SingularMatrixError(
            f"A-inverse residual {residual:.3e} exceeds {MAP_RESIDUAL_RTOL:.0e} x {scale:.3e}"
        )
    return SteadyStateMaps(g=g, h=h, a_inv=a_inv)


def equilibrium_state(plant: PlantModel, u, w) -> np.ndarray:
    """Unique equilibrium x_eq = -A^-1 (B u + E w) for constant (u, w)."""
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if u.shape != (plant.m,):
        raise DimensionError(f"u must have shape ({plant.m},), got {u.shape}")
    if w.shape != (plant.q,):
        raise DimensionError(f"w must have shape ({plant.q},), got {w.shape}")
    return -plant.maps.a_inv @ (plant.b @ u + plant.e @ w)


def plant_rhs(plant: PlantModel, x, u, w) -> np.ndarray:
    """Vector field A x + B u + E w."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.shape != (plant.n,) or u.shape != (plant.m,) or w.shape != (plant.q,):
        raise DimensionError(
            f"expected shapes ({plant.n},), ({plant.m},), ({plant.q},); "
            f"got {x.shape}, {u.shape}, {w.shape}"
        )
    return plant.a @ x + plant.b @ u + plant.e @ w


def plant_output(plant: PlantModel, x, w) -> np.ndarray:
    """Output map y = C x + D w."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.shape != (plant.n,) or w.shape != (plant.q,):
        raise DimensionError(
            f"expected shapes ({plant.n},), ({plant.q},); got {x.shape}, {w.shape}"
        )
    return plant.c @ x + plant.d @ w


def _check_spd(q: np.ndarray, name: str) -> np.ndarray:
    q = _as_matrix(q, name)
    if q.shape[0] != q.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {q.shape}")
    scale = max(np.abs(q).max(), 1.0)
    if np.abs(q - q.T).max() > 1e-12 * scale:
        raise PreconditionError(f"{name} must be symmetric")
    if np.linalg.eigvalsh(q).min() <= 0.0:
        raise PreconditionError(f"{name} must be positive definite")
    return 0.5 * (q + q.T)


def solve_lyapunov(a, q) -> np.ndarray:
    """Solve A'P + P A = -Q for symmetric positive-definite P.

    Solved through the n^2 x n^2 Kronecker-sum linear system obtained by
    vectorization; adequate at desk scale (n up to a few tens) and avoids a
    Schur decomposition. Raises StabilityError when A is not Hurwitz (no SPD
    solution exists) and PreconditionError when Q is not SPD.
    """
    a = _as_matrix(a, "A")
    q = _check_spd(q, "Q")
    if a.shape != q.shape:
        raise DimensionError(f"A and Q must have equal shapes, got {a.shape} vs {q.shape}")
    hurwitz, margin = validate_hurwitz(a)
    if not hurwitz:
        raise StabilityError(
            f"A is not Hurwitz (margin {margin:.6g}); Lyapunov equation has no SPD solution"
        )
    n = a.shape[0]
    eye = np.eye(n)
    # vec(A'P + P A) = (I (x) A' + A' (x) I) vec(P), column-major vec
    system = np.kron(eye, a.T) + np.kron(a.T, eye)
    p = np.linalg.solve(system, -q.flatten(order="F")).reshape((n, n), order="F")
    p = 0.5 * (p + p.T)
    residual = np.abs(a.T @ p + p @ a + q).max()
    if residual > LYAPUNOV_RESIDUAL_RTOL * np.abs(q).max():
        raise SingularMatrixError(
            f"Lyapunov residual {residual:.3e} exceeds tolerance; A may be near-marginal"
        )
    return p


@dataclass(frozen=True)
class LyapunovCertificate:
    """Pair (Q, P) with A'P + P A = -Q; P symmetric positive definite."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", _check_spd(self.q, "Q"))
        p = _as_matrix(self.p, "P")
        scale = max(np.abs(p).max(), 1.0)
        if np.abs(p - p.T).max() > 1e-12 * scale:
            raise PreconditionError("P must be symmetric")
        p = 0.5 * (p + p.T)
        if np.linalg.eigvalsh(p).min() <= 0.0:
            raise PreconditionError("P must be positive definite")
        object.__setattr__(self, "p", p)


def lyapunov_certificate(plant: PlantModel, q) -> LyapunovCertificate:
    """Solve the Lyapunov equation for the plant and wrap the result."""
    return LyapunovCertificate(q=q, p=solve_lyapunov(plant.a, q))
