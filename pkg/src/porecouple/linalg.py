"""Sparse storage and linear solvers for saddle-point systems.

Storage is scipy CSR, canonicalised (sorted indices, duplicates summed,
explicit zeros dropped).  The direct path is SuperLU with partial pivoting;
the iterative path is restarted GMRES preconditioned with an incomplete LU.
Residuals are always recomputed from the returned vector.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.io import mmwrite

from .errors import ConfigurationError, SolverError

DEFAULT_TOL = 1e-10


@dataclass
class LinearSolveReport:
    residual_norm: float
    rhs_norm: float
    iterations: int
    method: str

    @property
    def relative_residual(self):
        return self.residual_norm / max(self.rhs_norm, 1e-300)


def finalize(A):
    """Canonical CSR: sorted column indices, summed duplicates, no stored zeros."""
    A = sp.csr_matrix(A, dtype=float)
    A.sum_duplicates()
    A.eliminate_zeros()
    A.sort_indices()
    return A


def _residual(A, x, b):
    return float(np.linalg.norm(A @ x - b))


def _factorize(A):
    try:
        return spla.splu(A.tocsc(), permc_spec="COLAMD", diag_pivot_thresh=1.0)
    except RuntimeError as exc:  # "Factor is exactly singular"
        raise SolverError(f"direct factorisation failed: {exc}") from exc


def _direct(A, lu, b, max_refine=3):
    x = lu.solve(b)
    if not np.all(np.isfinite(x)):
        raise SolverError("direct solve produced non-finite values")
    bn = float(np.linalg.norm(b))
    res = _residual(A, x, b)
    steps = 0
    # always refine once: the norm is dominated by momentum rows, and one step
    # brings the continuity rows to round-off as well
    while steps == 0 or (res > 1e-14 * bn and steps < max_refine):
        x_new = x + lu.solve(b - A @ x)
        res_new = _residual(A, x_new, b)
        steps += 1
        if not res_new < 0.5 * res:
            if res_new < res:
                x, res = x_new, res_new
            break
        x, res = x_new, res_new
    return x, steps


def _iterative(A, b, tol, max_iter):
    bn = float(np.linalg.norm(b))
    try:
        ilu = spla.spilu(A.tocsc(), drop_tol=1e-5, fill_factor=20)
    except RuntimeError:
        # fall back to a block-diagonal (Jacobi) preconditioner
        d = A.diagonal()
        d[d == 0] = 1.0
        ilu = None
        M = spla.LinearOperator(A.shape, lambda r: r / d)
    if ilu is not None:
        M = spla.LinearOperator(A.shape, ilu.solve)
    count = [0]

    def cb(_):
        count[0] += 1

    x, info = spla.gmres(A, b, M=M, rtol=tol, atol=0.0, restart=200, maxiter=max_iter,
                         callback=cb, callback_type="pr_norm")
    if info < 0:
        raise SolverError("GMRES breakdown")
    return x, count[0]


def solve(A, b, method="direct", tol=DEFAULT_TOL, max_iter=1000):
    """Solve ``A x = b``; raise SolverError unless ||Ax - b|| <= tol ||b||."""
    return solve_many(A, [b], method, tol, max_iter)[0]


def solve_many(A, rhs_list, method="direct", tol=DEFAULT_TOL, max_iter=1000):
    """Solve for several right-hand sides, sharing one factorisation."""
    A = sp.csr_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ConfigurationError("matrix must be square")
    if method not in ("direct", "iterative"):
        raise ConfigurationError(f"unknown method {method!r}")
    if np.any(np.asarray(abs(A).sum(axis=1)).ravel() == 0):
        raise SolverError("matrix has an empty row (singular)")
    lu = None
    out = []
    for b in rhs_list:
        b = np.asarray(b, float)
        if b.shape != (A.shape[0],):
            raise ConfigurationError("right-hand side has the wrong size")
        bn = float(np.linalg.norm(b))
        if bn == 0.0:
            out.append((np.zeros_like(b), LinearSolveReport(0.0, 0.0, 0, method)))
            continue
        if method == "direct":
            if lu is None:
                lu = _factorize(A)
            x, its = _direct(A, lu, b)
        else:
            x, its = _iterative(A, b, tol, max_iter)
        report = LinearSolveReport(_residual(A, x, b), bn, its, method)
        if not report.residual_norm <= tol * bn:
            raise SolverError(
                f"{method} solve missed the tolerance: |r| = {report.residual_norm:.3e}, "
                f"tol*|b| = {tol * bn:.3e}", report)
        out.append((x, report))
    return out


def attach_mean_zero_gauge(A, b, pressure_indices, weights=None):
    """Append a Lagrange multiplier enforcing sum_k w_k p_k = 0.

    The multiplier column is the transpose of the constraint row, so the
    augmented matrix stays symmetric whenever A is.  Returns the bordered
    system; the last unknown is the multiplier.
    """
    idx = np.asarray(pressure_indices, dtype=np.int64)
    if idx.size == 0:
        raise ConfigurationError("gauge needs at least one pressure unknown")
    w = np.ones(idx.size) if weights is None else np.asarray(weights, float)
    n = A.shape[0]
    col = sp.csr_matrix((w, (idx, np.zeros_like(idx))), shape=(n, 1))
    row = col.T
    Ag = sp.bmat([[A, col], [row, None]], format="csr")
    bg = np.concatenate([np.asarray(b, float), [0.0]])
    return finalize(Ag), bg


def dump_matrix_market(path, A, comment=""):
    mmwrite(path, sp.coo_matrix(A), comment=comment)
