"""Brute-force reference solvers used to cross-check the active-set engine.

These are deliberately independent of the QR/active-set machinery: the QP
oracle enumerates equality-constrained candidates over independent column
subsets and certifies KKT by enumerating multiplier supports; the cone
oracle enumerates faces.  Both are exponential in the constraint count and
meant for the small random instances of the verification suites.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np


@dataclass(frozen=True)
class OracleResult:
    feasible: bool
    x: np.ndarray | None


def _independent_subsets(c_mat: np.ndarray, max_size: int, tol: float = 1e-10):
    """Yield index tuples whose columns are linearly independent."""
    m = c_mat.shape[1]
    yield ()
    for k in range(1, max_size + 1):
        for subset in combinations(range(m), k):
            sub = c_mat[:, subset]
            if np.linalg.matrix_rank(sub, tol=tol) == k:
                yield subset


def _equality_projection(x_star, c_mat, b, subset):
    """Projection of x_star onto {x : C_A^T x = b_A} for independent A."""
    if not subset:
        return x_star.copy()
    a = c_mat[:, subset]
    rhs = b[list(subset)] - a.T @ x_star
    mu = np.linalg.solve(a.T @ a, rhs)
    return x_star + a @ mu


def _kkt_certified(x, x_star, c_mat, b, tol):
    """True iff x* - x lies in -cone(C_T) for the tight set T at x."""
    resid = c_mat.T @ x - b
    tight = np.flatnonzero(np.abs(resid) <= tol * (1.0 + np.abs(b)))
    g = x - x_star  # need g = C_T mu with mu >= 0
    gnorm = float(np.linalg.norm(g))
    if gnorm <= tol:
        return True
    if tight.size == 0:
        return False
    cols = c_mat[:, tight]
    # Caratheodory: a conic representation exists on some independent subset
    for k in range(1, min(len(tight), x.shape[0]) + 1):
        for sub in combinations(range(len(tight)), k):
            a = cols[:, sub]
            mu, res, rank, _ = np.linalg.lstsq(a, g, rcond=None)
            if float(np.linalg.norm(a @ mu - g)) <= tol * (1.0 + gnorm) and np.all(
                mu >= -tol * (1.0 + gnorm)
            ):
                return True
    return False


def project_polyhedron_enum(x_star, c_mat, b, tol: float = 1e-9) -> OracleResult:
    """Projection of x_star onto {x : C^T x >= b} by exhaustive enumeration.

    Every candidate is the equality projection onto an independent subset
    of constraints; a candidate wins if it is primal feasible and KKT
    certified.  If no candidate qualifies the system is infeasible (the
    projection onto a nonempty closed polyhedron always arises this way).
    """
    x_star = np.asarray(x_star, dtype=float)
    c_mat = np.asarray(c_mat, dtype=float)
    b = np.asarray(b, dtype=float)
    n, m = c_mat.shape
    best = None
    best_obj = np.inf
    for subset in _independent_subsets(c_mat, min(n, m)):
        try:
            x = _equality_projection(x_star, c_mat, b, subset)
        except np.linalg.LinAlgError:
            continue
        if np.any(c_mat.T @ x - b < -tol * (1.0 + np.abs(b))):
            continue
        if not _kkt_certified(x, x_star, c_mat, b, tol):
            continue
        obj = float(np.linalg.norm(x - x_star))
        if obj < best_obj:
            best, best_obj = x, obj
    if best is None:
        return OracleResult(False, None)
    return OracleResult(True, best)


def cone_project_enum(generators, w, tol: float = 1e-10) -> np.ndarray:
    """Projection of w onto cone(G) (columns of G) by face enumeration.

    A candidate from the span projection onto an independent generator
    subset is optimal iff its coefficients are nonnegative, the residual is
    orthogonal to the candidate, and no generator sees positive residual
    inner product.
    """
    g_mat = np.asarray(generators, dtype=float)
    w = np.asarray(w, dtype=float)
    n, m = g_mat.shape
    scale = 1.0 + float(np.linalg.norm(w))
    best = None
    best_obj = np.inf
    for subset in _independent_subsets(g_mat, min(n, m)):
        if not subset:
            y = np.zeros(n)
        else:
            a = g_mat[:, subset]
            coef = np.linalg.solve(a.T @ a, a.T @ w)
            if np.any(coef < -tol * scale):
                continue
            y = a @ coef
        resid = w - y
        if abs(float(resid @ y)) > tol * scale * scale:
            continue
        if np.any(g_mat.T @ resid > tol * scale):
            continue
        obj = float(np.linalg.norm(resid))
        if obj < best_obj:
            best, best_obj = y, obj
    if best is None:
        raise RuntimeError("cone projection enumeration found no optimum")
    return best
