"""Sparse and regularized reconstruction from compressive measurements.

Two solvers share one interface: they take a plain real sensing matrix and
measurement vector, so the 0/1 pattern matrices and the +-1 difference
matrix all run through identical code paths.

omp      greedy orthogonal matching pursuit with column-normalized
         selection and unnormalized least-squares refitting.
tv_admm  anisotropic total-variation minimization with an L2 data term,
         solved by an augmented Lagrangian / alternating direction scheme:
         shrinkage on the gradient split variable, an exact (factorized)
         or conjugate-gradient solve for the image, and a running
         multiplier update.

Total variation uses per-pixel forward differences.  boundary="zero"
treats pixels outside the grid as zero, which additionally penalizes the
outermost row/column values; that pins the additive constant that
zero-row-sum sensing matrices (the differential mode) cannot observe.
boundary="replicate" makes the operator shift-invariant instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidMatrixError, ParameterError, SolverDivergenceError
from .ioutil import fmt_float, write_csv
from .pgm import DEFAULT_MAXVAL, write_pgm

BOUNDARIES = ("zero", "replicate")
X_STEPS = ("auto", "direct", "cg")
DIVERGENCE_PATIENCE = 10
MU_UNIT = 256.0     # data-fidelity weight for unit-scale measurements
BETA_UNIT = 32.0    # splitting penalty for unit-scale measurements


# ---------------------------------------------------------------------------
# options and result types
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class OmpOptions:
    """max_sparsity None means min(M, N); residual_tol is relative to ||y||."""

    max_sparsity: int | None = None
    residual_tol: float = 0.05

    def __post_init__(self):
        if self.max_sparsity is not None and self.max_sparsity < 1:
            raise ParameterError(f"max_sparsity must be >= 1, got {self.max_sparsity}")
        if self.residual_tol < 0:
            raise ParameterError(f"residual_tol must be >= 0, got {self.residual_tol}")


@dataclass(eq=False)
class TvOptions:
    """TV-ADMM parameters.

    mu and beta_w default to MU_UNIT/mean|y| and BETA_UNIT/mean|y|; scaling
    both with the data makes the whole iterate sequence exactly equivariant
    under y -> c*y, so tuning survives count-scale changes.  The stopping
    rule is a relative-change threshold on the image between outer
    iterations, capped at max_outer.
    """

    mu: float | None = None
    beta_w: float | None = None
    max_outer: int = 300
    rel_change_tol: float = 1e-4
    nonneg: bool = False
    boundary: str = "zero"
    x_step: str = "auto"
    cg_tol: float = 1e-8
    cg_maxiter: int | None = None

    def __post_init__(self):
        if self.mu is not None and self.mu <= 0:
            raise ParameterError(f"mu must be positive, got {self.mu}")
        if self.beta_w is not None and self.beta_w <= 0:
            raise ParameterError(f"beta_w must be positive, got {self.beta_w}")
        if self.max_outer < 1:
            raise ParameterError(f"max_outer must be >= 1, got {self.max_outer}")
        if self.rel_change_tol <= 0:
            raise ParameterError(f"rel_change_tol must be positive, got {self.rel_change_tol}")
        if self.boundary not in BOUNDARIES:
            raise ParameterError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if self.x_step not in X_STEPS:
            raise ParameterError(f"x_step must be one of {X_STEPS}, got {self.x_step!r}")
        if self.cg_tol <= 0:
            raise ParameterError(f"cg_tol must be positive, got {self.cg_tol}")


@dataclass(eq=False)
class ReconImage:
    """A real-valued reconstruction (background values may be negative).

    support lists the selected pixel indices in selection order (omp only);
    objective_history holds the per-outer-iteration objective (tv only).
    """

    rows: int
    cols: int
    values: np.ndarray
    solver_name: str
    iterations: int
    residual_norm: float
    flags: tuple[str, ...] = ()
    support: tuple[int, ...] | None = None
    objective_history: tuple[float, ...] | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.rows, self.cols):
            raise ParameterError(
                f"image shape {self.values.shape} != ({self.rows}, {self.cols})"
            )

    def ravel(self) -> np.ndarray:
        return self.values.ravel()


def _check_problem(A, y, shape):
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if A.ndim != 2:
        raise ParameterError(f"sensing matrix must be 2-D, got shape {A.shape}")
    m, n = A.shape
    if y.shape[0] != m:
        raise ParameterError(f"measurement vector length {y.shape[0]} != {m} rows")
    rows, cols = shape
    if rows * cols != n:
        raise ParameterError(f"shape {shape} has {rows * cols} pixels, matrix has {n} columns")
    return A, y


# ---------------------------------------------------------------------------
# forward differences and their adjoint
# ---------------------------------------------------------------------------

def grad2d(x: np.ndarray, boundary: str) -> np.ndarray:
    """Per-pixel forward differences; returns (2, rows, cols): horizontal, vertical."""
    gh = np.zeros_like(x)
    gv = np.zeros_like(x)
    gh[:, :-1] = x[:, 1:] - x[:, :-1]
    gv[:-1, :] = x[1:, :] - x[:-1, :]
    if boundary == "zero":
        gh[:, -1] = -x[:, -1]
        gv[-1, :] = -x[-1, :]
    return np.stack([gh, gv])


def grad2d_adjoint(g: np.ndarray, boundary: str) -> np.ndarray:
    """Exact adjoint of grad2d: <grad2d(x), g> == <x, grad2d_adjoint(g)>."""
    gh, gv = g
    out = np.zeros_like(gh)
    if boundary == "zero":
        out[:, 1:] += gh[:, :-1]
        out -= gh
        out[1:, :] += gv[:-1, :]
        out -= gv
    else:
        out[:, 1:] += gh[:, :-1]
        out[:, :-1] -= gh[:, :-1]
        out[1:, :] += gv[:-1, :]
        out[:-1, :] -= gv[:-1, :]
    return out


def _laplacian_1d(n: int, boundary: str) -> np.ndarray:
    """Dense n x n matrix of D^T D for the 1-D forward difference D."""
    if n == 1:
        return np.array([[1.0]]) if boundary == "zero" else np.array([[0.0]])
    L = 2.0 * np.eye(n) - np.diag(np.ones(n - 1), 1) - np.diag(np.ones(n - 1), -1)
    L[0, 0] = 1.0
    if boundary == "replicate":
        L[-1, -1] = 1.0
    return L


def dtd_dense(shape: tuple[int, int], boundary: str) -> np.ndarray:
    """Dense N x N matrix of the combined difference operator's D^T D."""
    rows, cols = shape
    return (np.kron(np.eye(rows), _laplacian_1d(cols, boundary))
            + np.kron(_laplacian_1d(rows, boundary), np.eye(cols)))


def tv_value(x: np.ndarray, boundary: str) -> float:
    """Anisotropic total variation: sum of absolute forward differences."""
    return float(np.abs(grad2d(x, boundary)).sum())


def _shrink(u: np.ndarray, tau: float) -> np.ndarray:
    return np.sign(u) * np.maximum(np.abs(u) - tau, 0.0)


class _DivergenceGuard:
    """Aborts when the objective rises for ``patience`` consecutive updates."""

    def __init__(self, patience: int = DIVERGENCE_PATIENCE):
        self.patience = patience
        self.rise = 0
        self.history: list[float] = []

    def update(self, objective: float, iteration: int) -> None:
        if self.history and objective > self.history[-1]:
            self.rise += 1
            if self.rise >= self.patience:
                raise SolverDivergenceError(
                    f"objective increased for {self.patience} consecutive iterations "
                    f"at outer iteration {iteration}",
                    iteration=iteration,
                    objective_tail=self.history[-self.patience:] + [objective],
                )
        else:
            self.rise = 0
        self.history.append(objective)


def _cg(matvec, b, x0, rtol, maxiter):
    """Plain conjugate gradient on an SPD (or consistent PSD) system."""
    x = x0.copy()
    r = b - matvec(x)
    p = r.copy()
    rs = float(r @ r)
    threshold = rtol * float(np.linalg.norm(b))
    for _ in range(maxiter):
        if np.sqrt(rs) <= threshold:
            break
        Ap = matvec(p)
        denom = float(p @ Ap)
        if denom <= 0.0:
            break
        alpha = rs / denom
        x += alpha * p
        r -= alpha * Ap
        rs_new = float(r @ r)
        p = r + (rs_new / rs) * p
        rs = rs_new
    return x


# ---------------------------------------------------------------------------
# orthogonal matching pursuit
# ---------------------------------------------------------------------------

def omp(A, y, shape: tuple[int, int], opts: OmpOptions | None = None) -> ReconImage:
    """Greedy sparse recovery.

    Each iteration selects the column whose unit-normalized correlation
    with the residual is largest (ties broken by lowest index), refits by
    least squares on the selected support using the unnormalized columns,
    and updates the residual; stops at the sparsity cap or when
    ||r|| <= residual_tol * ||y||.  A numerically dependent candidate
    column triggers a least-norm fallback fit and the "rank_deficient"
    flag.
    """
    opts = opts or OmpOptions()
    A, y = _check_problem(A, y, shape)
    m, n = A.shape
    rows, cols = shape

    col_norms = np.linalg.norm(A, axis=0)
    dead = np.flatnonzero(col_norms == 0.0)
    if dead.size:
        raise InvalidMatrixError(f"sensing matrix has a zero column at index {dead[0]}")
    cap = min(m, n) if opts.max_sparsity is None else opts.max_sparsity
    if cap > min(m, n):
        raise ParameterError(f"max_sparsity {cap} exceeds min(M, N) = {min(m, n)}")

    y_norm = float(np.linalg.norm(y))
    if y_norm == 0.0:
        return ReconImage(rows=rows, cols=cols, values=np.zeros(shape),
                          solver_name="omp", iterations=0, residual_norm=0.0,
                          support=())

    normalized = A / col_norms
    support: list[int] = []
    flags: set[str] = set()
    # lower-triangular factor of the support Gram matrix, grown in place
    L = np.zeros((cap, cap))
    aty = np.zeros(cap)
    coeffs = np.zeros(0)
    r = y.copy()

    while len(support) < cap and np.linalg.norm(r) > opts.residual_tol * y_norm:
        corr = np.abs(normalized.T @ r)
        if support:
            corr[support] = -1.0
        j = int(np.argmax(corr))
        if corr[j] <= 1e-12 * y_norm:
            break  # residual orthogonal to every remaining column
        k = len(support)
        col = A[:, j]
        d = float(col @ col)
        if k == 0:
            s2 = d
            w = np.zeros(0)
        else:
            g = A[:, support].T @ col
            w = scipy.linalg.solve_triangular(L[:k, :k], g, lower=True)
            s2 = d - float(w @ w)
        if s2 <= 1e-12 * d:
            # dependent column: least-norm fit of the current support
            flags.add("rank_deficient")
            coeffs, *_ = np.linalg.lstsq(A[:, support], y, rcond=None)
            r = y - A[:, support] @ coeffs
            break
        L[k, :k] = w
        L[k, k] = np.sqrt(s2)
        aty[k] = float(col @ y)
        support.append(j)
        k += 1
        z = scipy.linalg.solve_triangular(L[:k, :k], aty[:k], lower=True)
        coeffs = scipy.linalg.solve_triangular(L[:k, :k].T, z, lower=False)
        r = y - A[:, support] @ coeffs

    x = np.zeros(n)
    if support:
        x[support] = coeffs
    return ReconImage(rows=rows, cols=cols, values=x.reshape(shape),
                      solver_name="omp", iterations=len(support),
                      residual_norm=float(np.linalg.norm(r)),
                      flags=tuple(sorted(flags)), support=tuple(support))


# ---------------------------------------------------------------------------
# total-variation ADMM
# ---------------------------------------------------------------------------

def _data_scale(y: np.ndarray) -> float:
    s = float(np.abs(y).mean())
    return s if s > 0 else 1.0


def tv_admm(A, y, shape: tuple[int, int], opts: TvOptions | None = None,
            gram: np.ndarray | None = None) -> ReconImage:
    """Approximately minimize  sum_n |D_n x|_1 + (mu/2) ||A x - y||^2.

    Alternation per outer iteration: shrinkage on w = Dx + nu/beta_w, an
    exact solve of the quadratic x-subproblem (normal operator
    mu A^T A + beta_w D^T D) via a cached Cholesky factorization (x_step
    "direct") or warm-started conjugate gradient (x_step "cg"), then the
    multiplier update nu += beta_w (Dx - w).  With boundary "replicate" and
    a sensing matrix whose rows sum to zero the normal operator is
    singular along the constant image; the direct path pins that component
    (the returned image then has zero mean, which is the only component
    such measurements do not determine).

    ``gram`` may pass a precomputed A^T A to amortize the dense product
    across repeated solves with the same matrix.

    Raises SolverDivergenceError if the objective increases for
    DIVERGENCE_PATIENCE consecutive outer iterations.
    """
    opts = opts or TvOptions()
    A, y = _check_problem(A, y, shape)
    m, n = A.shape
    rows, cols = shape

    if float(np.linalg.norm(y)) == 0.0:
        return ReconImage(rows=rows, cols=cols, values=np.zeros(shape),
                          solver_name="tv_admm", iterations=0, residual_norm=0.0,
                          objective_history=())

    scale = _data_scale(y)
    mu = opts.mu if opts.mu is not None else MU_UNIT / scale
    beta = opts.beta_w if opts.beta_w is not None else BETA_UNIT / scale
    boundary = opts.boundary

    mode = opts.x_step
    if mode == "auto":
        mode = "direct" if n <= 4096 else "cg"

    Aty = A.T @ y
    if mode == "direct":
        G = np.asarray(gram, dtype=float) if gram is not None else A.T @ A
        if G.shape != (n, n):
            raise ParameterError(f"gram must be {n} x {n}, got {G.shape}")
        K = mu * G + beta * dtd_dense(shape, boundary)
        row_sums = A @ np.ones(n)
        if boundary == "replicate" and np.abs(row_sums).max() <= 1e-9 * np.abs(A).sum(axis=1).max():
            K += beta / n  # pin the unobserved constant component
        factor = scipy.linalg.cho_factor(K)

        def solve_x(rhs, _x_prev):
            return scipy.linalg.cho_solve(factor, rhs)
    else:
        cg_iters = opts.cg_maxiter if opts.cg_maxiter is not None else 10 * n

        def matvec(v):
            img = v.reshape(shape)
            return (mu * (A.T @ (A @ v))
                    + beta * grad2d_adjoint(grad2d(img, boundary), boundary).ravel())

        def solve_x(rhs, x_prev):
            return _cg(matvec, rhs, x_prev, opts.cg_tol, cg_iters)

    x = np.zeros(shape)
    w = np.zeros((2, rows, cols))
    nu = np.zeros((2, rows, cols))
    guard = _DivergenceGuard()
    iterations = 0

    for it in range(1, opts.max_outer + 1):
        iterations = it
        gx = grad2d(x, boundary)
        w = _shrink(gx + nu / beta, 1.0 / beta)
        rhs = mu * Aty + beta * grad2d_adjoint(w - nu / beta, boundary).ravel()
        x_new = solve_x(rhs, x.ravel()).reshape(shape)
        gx_new = grad2d(x_new, boundary)
        nu += beta * (gx_new - w)

        residual = A @ x_new.ravel() - y
        objective = float(np.abs(gx_new).sum() + 0.5 * mu * (residual @ residual))
        guard.update(objective, it)

        change = float(np.linalg.norm(x_new - x))
        base = float(np.linalg.norm(x))
        x = x_new
        if base > 0 and change / base <= opts.rel_change_tol:
            break

    if opts.nonneg:
        x = np.maximum(x, 0.0)

    final_residual = float(np.linalg.norm(A @ x.ravel() - y))
    return ReconImage(rows=rows, cols=cols, values=x, solver_name="tv_admm",
                      iterations=iterations, residual_norm=final_residual,
                      objective_history=tuple(guard.history))


# ---------------------------------------------------------------------------
# image export
# ---------------------------------------------------------------------------

def save_recon_csv(image: ReconImage, path) -> None:
    """Raw real-valued image grid as CSV (one row per image row)."""
    header = [f"col_{j}" for j in range(image.cols)]
    write_csv(path, header, image.values.tolist())


def load_recon_csv(path) -> np.ndarray:
    import csv as _csv
    from pathlib import Path as _Path

    with _Path(path).open(newline="") as fh:
        reader = _csv.reader(fh)
        next(reader)  # header
        return np.array([[float(v) for v in row] for row in reader])


def save_recon_pgm(image: ReconImage, path) -> None:
    """Affinely mapped PGM export (min -> 0, max -> maxval) with a sidecar
    text file recording the mapping so values can be recovered."""
    lo = float(image.values.min())
    hi = float(image.values.max())
    if hi > lo:
        ints = np.rint((image.values - lo) / (hi - lo) * DEFAULT_MAXVAL).astype(np.int64)
    else:
        ints = np.zeros((image.rows, image.cols), dtype=np.int64)
    write_pgm(path, ints, DEFAULT_MAXVAL)
    sidecar = (
        f"min {fmt_float(lo)}\n"
        f"max {fmt_float(hi)}\n"
        f"maxval {DEFAULT_MAXVAL}\n"
        "mapping value = min + pgm/maxval * (max - min)\n"
    )
    from pathlib import Path as _Path

    _Path(str(path) + ".txt").write_text(sidecar)
