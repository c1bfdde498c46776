"""Benchmark problem builders and exponent-sequence generators.

Two reconstruction problems are provided: a discrete-gradient operator on a
square grid whose Gram matrix is the 5-point Dirichlet Laplacian, and a
one-dimensional heat-equation control problem with two time-dependent
controls acting through fixed spatial windows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse

from .operators import MatrixOperator, NormalSystem

__all__ = [
    "MMatrixProblem",
    "HeatControlProblem",
    "build_bidiagonal_D",
    "build_mmatrix_problem",
    "build_heat_control_problem",
    "pk_ramp_mmatrix",
    "pk_ramp_control",
    "pk_random",
]


def build_bidiagonal_D(d: int) -> np.ndarray:
    """The (d+1) x d backward-difference matrix with Dirichlet closure.

    Ones on the main diagonal, minus ones on the first subdiagonal; the
    extra last row contains only the trailing -1, so that ``D^T D`` is the
    1-D Dirichlet Laplacian stencil ``tridiag(-1, 2, -1)``.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    return np.eye(d + 1, d) - np.eye(d + 1, d, k=-1)


@dataclass
class MMatrixProblem:
    """Discrete-gradient reconstruction problem on a d x d interior grid.

    ``op`` has shape ``2d(d+1) x d^2`` and its Gram matrix is the scaled
    5-point Laplacian; ``f`` is the dual right-hand side sampled from a
    fixed oscillatory source term.
    """

    d: int
    op: MatrixOperator
    f: np.ndarray

    @property
    def n_unknowns(self) -> int:
        return self.d * self.d

    def normal_system(self) -> NormalSystem:
        return NormalSystem(self.op, self.f)

    def to_grid(self, x) -> np.ndarray:
        """Reshape a coefficient vector to the (x1, x2) grid."""
        return np.asarray(x, float).reshape((self.d, self.d), order="F")


def build_mmatrix_problem(d: int) -> MMatrixProblem:
    """Assemble the gradient operator ``(d+1) * [I kron D; D kron I]`` and
    the source ``f(x1, x2) = 10 x1 sin(5 x2) cos(7 x1)`` on the interior
    nodes ``x = i*h``, ``h = 1/(d+1)``.

    Flattening puts the x1 index fastest, consistent with ``I kron D``
    differencing along x1 within each grid column.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    D = sparse.csr_matrix(build_bidiagonal_D(d))
    eye = sparse.identity(d, format="csr")
    A = (d + 1.0) * sparse.vstack([sparse.kron(eye, D), sparse.kron(D, eye)])
    h = 1.0 / (d + 1)
    nodes = np.arange(1, d + 1) * h
    x1, x2 = np.meshgrid(nodes, nodes, indexing="ij")
    f = (10.0 * x1 * np.sin(5.0 * x2) * np.cos(7.0 * x1)).flatten(order="F")
    return MMatrixProblem(d=d, op=MatrixOperator(A.tocsr()), f=f)


@dataclass
class HeatControlProblem:
    """Terminal-state control of the 1-D heat equation with two inputs.

    The map ``op`` sends the stacked control vector ``(u1, u2)`` (one value
    per time step each) to the state at the horizon, discretised by the
    midpoint rule in time and second-order finite differences in space.
    """

    n: int
    m: int
    horizon: float
    dt: float
    dx: float
    op: MatrixOperator
    y_target: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    node_x: np.ndarray
    eigvals: np.ndarray = field(repr=False)
    eigvecs: np.ndarray = field(repr=False)

    @property
    def n_controls(self) -> int:
        return 2 * self.m

    def propagator(self, tau: float) -> np.ndarray:
        """Matrix exponential ``exp(tau * Lap)`` via the symmetric eigenbasis."""
        return (self.eigvecs * np.exp(self.eigvals * tau)) @ self.eigvecs.T

    def normal_system(self) -> NormalSystem:
        return NormalSystem(self.op, self.op.adjoint_apply(self.y_target), y=self.y_target)

    def split_controls(self, u):
        u = np.asarray(u, float)
        return u[: self.m], u[self.m :]


def build_heat_control_problem(include_boundary: bool = True) -> HeatControlProblem:
    """Fixed-parameter control problem: 49 interior nodes, 50 time steps,
    unit horizon, control windows (0.2, 0.3) and (0.6, 0.7), and a Gaussian
    target ``0.4 exp(-70 (x - 0.7)^2)``.

    ``include_boundary`` decides whether grid nodes landing exactly on a
    window endpoint belong to the window (the endpoints are grid points
    here).  Including them reproduces the reference sparsity tables; the
    strict reading of the indicator excludes them.
    """
    n, m, horizon = 49, 50, 1.0
    dt = dx = 1.0 / 50.0
    lap = (
        np.diag(-2.0 * np.ones(n)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
    ) / dx**2
    eigvals, eigvecs = np.linalg.eigh(lap)
    xs = np.arange(1, n + 1) * dx
    if include_boundary:
        d1 = ((xs >= 0.2) & (xs <= 0.3)).astype(float)
        d2 = ((xs >= 0.6) & (xs <= 0.7)).astype(float)
    else:
        d1 = ((xs > 0.2) & (xs < 0.3)).astype(float)
        d2 = ((xs > 0.6) & (xs < 0.7)).astype(float)
    cols = []
    for dvec in (d1, d2):
        coeff = eigvecs.T @ dvec
        for k in range(1, m + 1):
            tau = horizon - (k - 1) * dt - dt / 2.0
            cols.append((eigvecs @ (np.exp(eigvals * tau) * coeff)) * dt)
    A = np.stack(cols, axis=1)
    y = 0.4 * np.exp(-70.0 * (xs - 0.7) ** 2)
    return HeatControlProblem(
        n=n,
        m=m,
        horizon=horizon,
        dt=dt,
        dx=dx,
        op=MatrixOperator(A),
        y_target=y,
        d1=d1,
        d2=d2,
        node_x=xs,
        eigvals=eigvals,
        eigvecs=eigvecs,
    )


def pk_ramp_mmatrix(N: int) -> np.ndarray:
    """Exponent ramp ``0.1 + 1/P`` with ``P`` linearly spaced on [1, 100].

    Starts at 1.1 and decays to 0.11; the leading entry exceeds 1, so
    penalty sequences built from it need the permissive exponent flag.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    return 0.1 + 1.0 / np.linspace(1.0, 100.0, N)


def pk_ramp_control(N: int) -> np.ndarray:
    """Reversed ramp ``flip(0.5 + 1/P)`` with ``P`` linearly spaced on [2, 100].

    Runs from 0.51 up to 1.0: strong sparsity on the leading block of
    indices, progressively relaxed toward the trailing block.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    return np.flip(0.5 + 1.0 / np.linspace(2.0, 100.0, N)).copy()


def pk_random(N: int, seed: int) -> np.ndarray:
    """Uniform exponents in the open interval (0, 1) from a counter-based
    generator; identical seeds give identical vectors on every platform."""
    if N < 1:
        raise ValueError("N must be at least 1")
    rng = np.random.Generator(np.random.Philox(seed))
    out = rng.random(N)
    while np.any(out <= 0.0):
        mask = out <= 0.0
        out[mask] = rng.random(int(mask.sum()))
    return out
