"""Linear operators, weighted normal-equation solves, and optimality residuals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sparse
import scipy.sparse.linalg as splinalg

from .penalties import PenaltySequence, Variant, weight_vector

__all__ = [
    "MatrixOperator",
    "NormalSystem",
    "SingularSystemError",
    "PowerIterationError",
    "gram_solve",
    "operator_norm_sq",
    "optimality_residual_inf",
    "save_coo",
    "load_coo",
]

# Below this column count the Gram matrix is kept dense; direct dense solves
# beat sparse factorization at small sizes.
_DENSE_CUTOFF = 1024

_RESIDUAL_RTOL = 1e-10


class SingularSystemError(np.linalg.LinAlgError):
    """The weighted normal system could not be solved to the residual contract."""


class PowerIterationError(RuntimeError):
    """Power iteration failed to converge within the iteration budget."""


class MatrixOperator:
    """A dense or sparse matrix wrapped with apply/adjoint and a cached Gram.

    The Gram matrix ``A^T A`` never changes across reweighting iterations,
    so it is assembled once; only the diagonal added on top of it varies.
    """

    def __init__(self, mat):
        if sparse.issparse(mat):
            self._mat = mat.tocsr()
            self._sparse = True
        else:
            self._mat = np.atleast_2d(np.asarray(mat, dtype=float))
            self._sparse = False
        self._gram = None

    @property
    def shape(self):
        return self._mat.shape

    @property
    def rows(self) -> int:
        return self._mat.shape[0]

    @property
    def cols(self) -> int:
        return self._mat.shape[1]

    @property
    def is_sparse(self) -> bool:
        return self._sparse

    @property
    def matrix(self):
        return self._mat

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.cols:
            raise ValueError(f"operand length {x.shape[-1]} != cols {self.cols}")
        return self._mat @ x

    def adjoint_apply(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.rows:
            raise ValueError(f"operand length {y.shape[-1]} != rows {self.rows}")
        return self._mat.T @ y

    def __matmul__(self, x):
        return self.apply(x)

    def gram(self):
        """Cached ``A^T A``; sparse CSC above the dense cutoff, dense below."""
        if self._gram is None:
            g = self._mat.T @ self._mat
            if self._sparse:
                g = g.toarray() if self.cols <= _DENSE_CUTOFF else g.tocsc()
            self._gram = g
        return self._gram

    def to_dense(self) -> np.ndarray:
        return self._mat.toarray() if self._sparse else self._mat


@dataclass
class NormalSystem:
    """Normal-equation data: operator plus dual right-hand side ``f = A^T y``.

    ``y`` is retained when known; some objectives are only available up to
    a constant without it.
    """

    op: MatrixOperator
    f: np.ndarray
    y: Optional[np.ndarray] = None

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=float)
        if self.f.shape != (self.op.cols,):
            raise ValueError(f"rhs length {self.f.shape} != cols {self.op.cols}")
        if self.y is not None:
            self.y = np.asarray(self.y, dtype=float)
            if self.y.shape != (self.op.rows,):
                raise ValueError(f"data length {self.y.shape} != rows {self.op.rows}")


def _check_residual(M_apply, solve_again, x, f):
    r = M_apply(x) - f
    bound = _RESIDUAL_RTOL * (1.0 + np.max(np.abs(f)))
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("solver returned non-finite entries")
    if np.max(np.abs(r)) > bound:
        x = x - solve_again(r)  # one step of iterative refinement
        r = M_apply(x) - f
        if np.max(np.abs(r)) > bound:
            raise SingularSystemError(
                f"normal-equation residual {np.max(np.abs(r)):.3e} exceeds contract {bound:.3e}"
            )
    return x


def gram_solve(op: MatrixOperator, w, alpha: float, f) -> np.ndarray:
    """Solve ``(A^T A + alpha * diag(w)) x = f`` by direct factorization.

    The system is refactored on every call since the diagonal changes with
    each reweighting step.  Raises :class:`SingularSystemError` when the
    matrix is (numerically) singular, which can happen when some ``w_k``
    vanish on a null direction of ``A``.
    """
    w = np.asarray(w, dtype=float)
    f = np.asarray(f, dtype=float)
    if w.shape != (op.cols,):
        raise ValueError(f"weight length {w.shape} != cols {op.cols}")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    G = op.gram()
    if sparse.issparse(G):
        M = (G + sparse.diags(alpha * w)).tocsc()
        try:
            lu = splinalg.splu(M)
        except RuntimeError as exc:
            raise SingularSystemError(str(exc)) from exc
        x = lu.solve(f)
        return _check_residual(lambda v: M @ v, lu.solve, x, f)
    M = G + np.diag(alpha * w)
    try:
        cho = scipy.linalg.cho_factor(M, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    solve = lambda b: scipy.linalg.cho_solve(cho, b, check_finite=False)
    return _check_residual(lambda v: M @ v, solve, solve(f), f)


def operator_norm_sq(op: MatrixOperator, tol: float = 1e-10, max_iters: int = 50_000) -> float:
    """Squared spectral norm ``||A||^2`` via power iteration on the Gram matrix."""
    G = op.gram()
    rng = np.random.default_rng(0)
    v = rng.standard_normal(op.cols)
    nv = np.linalg.norm(v)
    v /= nv
    lam = 0.0
    for _ in range(max_iters):
        u = G @ v
        lam_new = float(v @ u)
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return 0.0
        v = u / nu
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            return lam_new
        lam = lam_new
    raise PowerIterationError(f"no convergence after {max_iters} iterations")


def optimality_residual_inf(sys: NormalSystem, alpha: float, eps: float,
                            pk: PenaltySequence, variant: Variant, x) -> float:
    """Sup-norm residual of the smoothed stationarity equation at ``x``.

    Evaluates ``||A^T A x - f + alpha * w(x) . x||_inf`` with the variant's
    reweighting diagonal frozen at ``x`` itself; a zero residual means ``x``
    is a fixed point of the reweighted iteration.
    """
    x = np.asarray(x, dtype=float)
    w = weight_vector(pk, eps, x, variant)
    r = sys.op.gram() @ x - sys.f + alpha * w * x
    return float(np.max(np.abs(r)))


def save_coo(path, op: MatrixOperator) -> None:
    """Write the operator as coordinate-format text lines ``row col value``."""
    mat = op.matrix.tocoo() if op.is_sparse else sparse.coo_matrix(op.matrix)
    with open(path, "w") as fh:
        fh.write(f"# {mat.shape[0]} {mat.shape[1]}\n")
        for i, j, v in zip(mat.row, mat.col, mat.data):
            fh.write(f"{i} {j} {v!r}\n")


def load_coo(path) -> MatrixOperator:
    """Read an operator written by :func:`save_coo`."""
    rows, cols, data = [], [], []
    shape = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                m, n = line[1:].split()
                shape = (int(m), int(n))
                continue
            i, j, v = line.split()
            rows.append(int(i))
            cols.append(int(j))
            data.append(float(v))
    if shape is None:
        raise ValueError("missing shape header line")
    return MatrixOperator(sparse.coo_matrix((data, (rows, cols)), shape=shape))
