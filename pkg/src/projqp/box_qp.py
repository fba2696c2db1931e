"""Exact solver for one box plus one violated halfspace.

Projects x* (already inside the box) onto {L <= x <= U, c_p^T x >= b_hat}.
Because box normals are orthogonal, the optimal step direction is read off
componentwise: coordinates pressed against the bound they would leave stay
put, everything else moves along c_p.  Each pass either reaches the
halfspace or makes at least one new bound tight, so the loop ends after at
most n+1 passes, with d = 0 certifying infeasibility (c_p is then in the
normal cone of the box where c_p^T x is maximal).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_vector

FEAS_TOL = 1e-9


@dataclass(frozen=True)
class BoxQp:
    """Problem data; bounds may be +-inf, x* must satisfy them."""

    x_star: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    c_p: np.ndarray
    b_hat: float

    def __post_init__(self):
        x = as_vector(self.x_star, "x_star")
        c = as_vector(self.c_p, "c_p")
        lo = np.asarray(self.lower, dtype=float)
        up = np.asarray(self.upper, dtype=float)
        if np.any(np.isnan(lo)) or np.any(np.isnan(up)):
            raise ValueError("bounds must not be NaN")
        if not (lo.shape == up.shape == x.shape == c.shape):
            raise ValueError("inconsistent dimensions")
        if np.any(lo > up):
            raise ValueError("requires lower <= upper")
        if np.any(x < lo - FEAS_TOL * (1.0 + np.abs(lo))) or np.any(
            x > up + FEAS_TOL * (1.0 + np.abs(up))
        ):
            raise ValueError("x_star must lie in the box")
        object.__setattr__(self, "x_star", x)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)
        object.__setattr__(self, "c_p", c)
        object.__setattr__(self, "b_hat", float(self.b_hat))


@dataclass(frozen=True)
class BoxQpResult:
    feasible: bool
    x: np.ndarray | None
    trace: tuple[tuple[np.ndarray, np.ndarray | None], ...]
    """Pairs (x_tilde_j, y_j); y_0 pairs with x_tilde_1 and so on."""


def _tight_upper(x, upper, c_sign):
    out = np.zeros(x.shape, dtype=bool)
    finite = np.isfinite(upper)  # infinite bounds are never tight
    if np.any(finite):
        uf = upper[finite]
        out[finite] = (c_sign[finite] > 0.0) & (x[finite] >= uf - FEAS_TOL * (1.0 + np.abs(uf)))
    return out


def _tight_lower(x, lower, c_sign):
    out = np.zeros(x.shape, dtype=bool)
    finite = np.isfinite(lower)
    if np.any(finite):
        lf = lower[finite]
        out[finite] = (c_sign[finite] < 0.0) & (x[finite] <= lf + FEAS_TOL * (1.0 + np.abs(lf)))
    return out


def box_step_direction(x_tilde, c_p, lower, upper) -> np.ndarray:
    """Componentwise step direction: d_i = 0 where moving along (c_p)_i
    would leave the box, else d_i = (c_p)_i (zero components stay zero)."""
    x = np.asarray(x_tilde, dtype=float)
    c = np.asarray(c_p, dtype=float)
    lo = np.asarray(lower, dtype=float)
    up = np.asarray(upper, dtype=float)
    d = c.copy()
    d[_tight_upper(x, up, c)] = 0.0
    d[_tight_lower(x, lo, c)] = 0.0
    return d


def solve_box_qp(p: BoxQp, max_passes: int | None = None) -> BoxQpResult:
    """Run the box algorithm to optimality, keeping the (x~, y) trace."""
    x = p.x_star.copy()
    trace: list[tuple[np.ndarray, np.ndarray | None]] = [(x.copy(), None)]
    cap = max_passes if max_passes is not None else p.x_star.shape[0] + 1
    scale = 1.0 + abs(p.b_hat)
    passes = 0
    while float(p.c_p @ x) < p.b_hat - FEAS_TOL * scale:
        if passes > cap:
            raise RuntimeError("box solver exceeded its finite pass bound")
        d = box_step_direction(x, p.c_p, p.lower, p.upper)
        nd = float(np.linalg.norm(d))
        if nd <= FEAS_TOL * (1.0 + float(np.linalg.norm(p.c_p))):
            return BoxQpResult(False, None, tuple(trace))
        t2 = (p.b_hat - float(p.c_p @ x)) / float(p.c_p @ d)
        y = x + t2 * d
        x = np.clip(y, p.lower, p.upper)
        trace.append((x.copy(), y))
        passes += 1
    return BoxQpResult(True, x, tuple(trace))


def box_infeasibility_system(p: BoxQp, x_tilde) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Farkas witness over the finite box faces plus c_p at a d = 0 point.

    Returns (C, b, lam): columns are the active face normals (e_i for lower
    faces, -e_i for upper) and c_p, with lam >= 0, C lam = 0 and
    lam^T b > 0 whenever c_p^T x_tilde < b_hat.
    """
    x = np.asarray(x_tilde, dtype=float)
    n = x.shape[0]
    cols = []
    rhs = []
    lam = []
    for i in range(n):
        ci = p.c_p[i]
        if ci > 0.0:
            cols.append(-np.eye(n)[:, i])
            rhs.append(-p.upper[i])
            lam.append(ci)
        elif ci < 0.0:
            cols.append(np.eye(n)[:, i])
            rhs.append(p.lower[i])
            lam.append(-ci)
    cols.append(p.c_p.copy())
    rhs.append(p.b_hat)
    lam.append(1.0)
    return np.column_stack(cols), np.asarray(rhs), np.asarray(lam)
