"""Dual active-set engine for least-distance quadratic programs.

Solves min (1/2)||x - x*||^2 subject to C^T x >= b by maintaining an
*s-tuple* ``(x, J, u, N, Q, R, q)``: ``x`` is the projection of ``x*``
onto the constraints indexed by the ordered active set ``J``, all of which
are tight at ``x``; ``u >= 0`` are the KKT multipliers with
``x* - x = -N u``; and ``(Q, R)`` is the economy QR factorization of the
active-normal matrix ``N`` whose i-th column is constraint column J(i).

The building blocks are the inner step (add one violated constraint,
possibly dropping active ones, so that the objective strictly increases or
infeasibility is certified), its degenerate variant for the all-zero
multiplier state, a primal refinement of the degenerate step direction,
and two dimension reductions through the QR factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Protocol, Union

import numpy as np

from .linalg import (
    DependentColumn,
    QrFactors,
    as_matrix,
    as_vector,
    qr_append_column,
    qr_delete_column,
    qr_factorize,
    solve_upper,
)

INF = math.inf


@dataclass(frozen=True)
class GiTolerances:
    """Numerical thresholds for the active-set engine.

    ``feas_tol`` scales with ``1 + ||x||`` wherever it is applied; the |z|=0
    test uses ``z_tol * (1 + ||c_p||)``.  ``cond_tol`` is the acceptance
    threshold for a new active normal: when the component of c_p outside
    the active span is below it, the step prefers dropping a blocking
    column over dividing by ||z||^2 (the near-parallel update would
    otherwise amplify round-off catastrophically).
    """

    feas_tol: float = 1e-9
    dual_tol: float = 1e-10
    cert_tol: float = 1e-10
    step_tol: float = 1e-12
    z_tol: float = 1e-10
    cond_tol: float = 1e-8
    r_pos_tol: float = 1e-13


DEFAULT_TOLS = GiTolerances()


class PreconditionViolated(ValueError):
    """A step was invoked outside its contract (constraint already active,
    not violated, zero normal, or nonzero multipliers in the degenerate step)."""


class IterationLimitError(RuntimeError):
    """Step or solve budget exhausted; distinct from an infeasibility verdict."""

    def __init__(self, message: str, x: np.ndarray | None = None):
        super().__init__(message)
        self.x = x


class NumericalError(RuntimeError):
    """Internal consistency failure that indicates numerical breakdown."""


@dataclass
class InvariantMonitor:
    """Counts s-tuple/step invariant checks and violations.

    Enabled by default; the acceptance suite asserts ``violations == 0``
    after running every solver path.  ``fail`` keeps message construction
    off the hot path.
    """

    checks: int = 0
    violations: int = 0
    messages: list[str] = field(default_factory=list)
    enabled: bool = True

    def record(self, ok: bool, message: str) -> None:
        if not self.enabled:
            return
        self.checks += 1
        if not ok:
            self.fail(message)

    def fail(self, message: str) -> None:
        self.violations += 1
        if len(self.messages) < 64:
            self.messages.append(message)

    def reset(self) -> None:
        self.checks = 0
        self.violations = 0
        self.messages.clear()


MONITOR = InvariantMonitor()


class ConstraintView(Protocol):
    """Anything that exposes a point to project from and constraint columns."""

    x_star: np.ndarray

    def column(self, p: int) -> np.ndarray: ...

    def rhs(self, p: int) -> float: ...

    @property
    def m(self) -> int: ...


@dataclass(frozen=True)
class QpProblem:
    """Least-distance QP data: project ``x_star`` onto {x : C^T x >= b}."""

    x_star: np.ndarray
    c_mat: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x_star", as_vector(self.x_star, "x_star"))
        object.__setattr__(self, "c_mat", as_matrix(self.c_mat, "c_mat"))
        object.__setattr__(self, "b", as_vector(self.b, "b"))
        n, m = self.c_mat.shape
        if self.x_star.shape[0] != n:
            raise ValueError(f"x_star has length {self.x_star.shape[0]}, C has {n} rows")
        if self.b.shape[0] != m:
            raise ValueError(f"b has length {self.b.shape[0]}, C has {m} columns")

    @property
    def n(self) -> int:
        return self.c_mat.shape[0]

    @property
    def m(self) -> int:
        return self.c_mat.shape[1]

    def column(self, p: int) -> np.ndarray:
        return self.c_mat[:, p]

    def rhs(self, p: int) -> float:
        return float(self.b[p])


@dataclass(frozen=True)
class STuple:
    """Active-set state; see module docstring for the invariants."""

    x: np.ndarray
    j_set: tuple[int, ...]
    u: np.ndarray
    n_mat: np.ndarray
    qr: QrFactors

    @property
    def q(self) -> int:
        return len(self.j_set)


@dataclass(frozen=True)
class InfeasibilityCertificate:
    """Farkas witness: lam >= 0, C_{J'} lam = 0 and lam^T b_{J'} > 0."""

    j_prime: tuple[int, ...]
    lam: np.ndarray


@dataclass(frozen=True)
class Advanced:
    s_tuple: STuple
    events: tuple[str, ...] = ()


@dataclass(frozen=True)
class Infeasible:
    certificate: InfeasibilityCertificate
    events: tuple[str, ...] = ()


StepOutcome = Union[Advanced, Infeasible]


@dataclass(frozen=True)
class Solution:
    """Feasible optimum returned by ``gi_solve``."""

    x: np.ndarray
    j_set: tuple[int, ...]
    u: np.ndarray
    s_tuple: STuple
    inner_steps: int


@dataclass(frozen=True)
class GiOptions:
    max_inner_steps: int | None = None
    violated_rule: str = "most-violated"  # or "first"
    tols: GiTolerances = DEFAULT_TOLS


def v_value(x: np.ndarray, x_star: np.ndarray) -> float:
    d = x - x_star
    return 0.5 * float(d @ d)


_EMPTY_QR_CACHE: dict[int, QrFactors] = {}
_EMPTY_U = np.zeros(0)


def empty_s_tuple(x_star) -> STuple:
    """Initial s-tuple: x = x*, empty active set."""
    x = as_vector(x_star, "x_star")
    n = x.shape[0]
    qr = _EMPTY_QR_CACHE.get(n)
    if qr is None:
        qr = qr_factorize(np.zeros((n, 0)))
        _EMPTY_QR_CACHE[n] = qr
    return STuple(x=x.copy(), j_set=(), u=_EMPTY_U, n_mat=qr.mat, qr=qr)


def _nrm(v: np.ndarray) -> float:
    return math.sqrt(float(v @ v))


_EYE_CACHE: dict[int, np.ndarray] = {}


def _eye(q: int) -> np.ndarray:
    e = _EYE_CACHE.get(q)
    if e is None:
        e = np.eye(q)
        _EYE_CACHE[q] = e
    return e


def _appended(vec: np.ndarray, tail: float) -> np.ndarray:
    out = np.empty(vec.shape[0] + 1)
    out[:-1] = vec
    out[-1] = tail
    return out


def _append_col(mat: np.ndarray, col: np.ndarray) -> np.ndarray:
    n, q = mat.shape
    out = np.empty((n, q + 1))
    out[:, :q] = mat
    out[:, q] = col
    return out


def check_s_tuple(
    s: STuple,
    qp: ConstraintView,
    tols: GiTolerances = DEFAULT_TOLS,
    where: str = "",
    monitor: InvariantMonitor | None = None,
) -> bool:
    """Verify the testable s-tuple invariants, recording to the monitor.

    The projection property itself (that x projects x* onto the active
    polyhedron) follows from tightness + nonnegative multipliers + the KKT
    residual, since those are sufficient optimality conditions here; the
    brute-force cross-check lives in the test suite.
    """
    mon = MONITOR if monitor is None else monitor
    if not mon.enabled:
        return True
    ok = True
    x_norm = _nrm(s.x)
    for i, j in enumerate(s.j_set):
        if not np.array_equal(s.n_mat[:, i], qp.column(j)):
            mon.fail(f"{where}: column {i} differs from store column {j}")
            ok = False
    mon.checks += 1
    if s.q:
        b_j = np.array([qp.rhs(j) for j in s.j_set])
        tight = float(np.max(np.abs(s.n_mat.T @ s.x - b_j)))
        if tight > tols.feas_tol * (1.0 + x_norm):
            mon.fail(f"{where}: active residual {tight:.3e}")
            ok = False
    mon.checks += 1
    if s.u.size and float(s.u.min()) < -tols.dual_tol:
        mon.fail(f"{where}: negative multiplier {float(s.u.min()):.3e}")
        ok = False
    mon.checks += 1
    kkt = _nrm((qp.x_star - s.x) + s.n_mat @ s.u)
    if kkt > tols.feas_tol * (1.0 + _nrm(qp.x_star)):
        mon.fail(f"{where}: KKT residual {kkt:.3e}")
        ok = False
    mon.checks += 1
    if s.q:
        orth = float(np.max(np.abs(s.qr.q_mat.T @ s.qr.q_mat - _eye(s.q))))
        recon = float(np.max(np.abs(s.qr.q_mat @ s.qr.r_mat - s.n_mat)))
        if orth > 1e-10 or recon > 1e-10 * (1.0 + float(np.max(np.abs(s.n_mat)))):
            mon.fail(f"{where}: QR drift orth={orth:.3e} recon={recon:.3e}")
            ok = False
    mon.checks += 1
    return ok


def _check_v_increase(
    v_before: float,
    v_after: float,
    tols: GiTolerances,
    where: str,
    monitor: InvariantMonitor | None = None,
) -> None:
    mon = MONITOR if monitor is None else monitor
    if not mon.enabled:
        return
    mon.checks += 1
    if not v_after > v_before - tols.step_tol * (1.0 + abs(v_before)):
        mon.fail(f"{where}: v did not increase ({v_before:.6e} -> {v_after:.6e})")


def _violation(c_p: np.ndarray, b_p: float, x: np.ndarray, tols: GiTolerances) -> float:
    nrm = _nrm(c_p)
    if nrm == 0.0:
        raise PreconditionViolated("constraint normal is zero")
    return (float(c_p @ x) - b_p) / nrm


def _require_violated(c_p, b_p, x, tols) -> None:
    # callers decide what counts as violated under their own feas_tol; the
    # step itself only refuses constraints that are satisfied outright
    if _violation(c_p, b_p, x, tols) >= 0.0:
        raise PreconditionViolated("constraint is not violated at x")


def _clip_dual(u: np.ndarray, tols: GiTolerances) -> np.ndarray:
    # round-off can leave multipliers at -1e-17; exact zeros keep t1 ratios sane
    if u.size == 0 or float(u.min()) >= 0.0:
        return u
    mask = (u < 0.0) & (u >= -tols.dual_tol)
    u = u.copy()
    u[mask] = 0.0
    return u


def inner_gi_step(
    s: STuple,
    p: int,
    qp: ConstraintView,
    tols: GiTolerances = DEFAULT_TOLS,
    monitor: InvariantMonitor | None = None,
) -> StepOutcome:
    """One dual active-set step: make constraint ``p`` feasible.

    Alternates partial steps (dropping the active constraint whose
    multiplier hits zero first) with a final full step that adds ``p``;
    when no step is possible in either space the accumulated coefficients
    form an infeasibility certificate.  Multipliers at zero are handled by
    zero-length partial steps, which is exactly the degenerate-drop rule.
    """
    if p in s.j_set:
        raise PreconditionViolated(f"constraint {p} already active")
    c_p = qp.column(p)
    b_p = qp.rhs(p)
    _require_violated(c_p, b_p, s.x, tols)

    x = s.x.copy()
    j_work = list(s.j_set)
    u_plus = _appended(s.u, 0.0)
    n_mat = s.n_mat.copy()
    qr = s.qr
    events: list[str] = []
    v0 = v_value(x, qp.x_star)
    max_cycles = len(j_work) + qp.m + 2

    for _ in range(max_cycles):
        qtc = qr.q_mat.T @ c_p
        z = c_p - qr.q_mat @ qtc
        r = solve_upper(qr.r_mat, qtc)
        z_norm = _nrm(z)
        scale = 1.0 + _nrm(c_p)
        z_zero = z_norm <= tols.z_tol * scale

        r_scale = 1.0 + (float(np.max(np.abs(r))) if r.size else 0.0)
        pos = np.flatnonzero(r > tols.r_pos_tol * r_scale)
        if pos.size == 0:
            t1, l = INF, -1
        else:
            ratios = u_plus[pos] / r[pos]
            k = int(np.argmin(ratios))  # first minimum = lowest position in J
            t1, l = float(ratios[k]), int(pos[k])

        if z_zero or (z_norm <= tols.cond_tol * scale and t1 < INF):
            # the second case: c_p is nearly dependent on the active normals,
            # so replace a blocking column instead of stepping along z
            t2 = INF
        else:
            t2 = (b_p - float(c_p @ x)) / float(z @ c_p)

        if t1 == INF and t2 == INF:
            lam = np.append(np.maximum(-r, 0.0), 1.0)
            cert = InfeasibilityCertificate(tuple(j_work) + (p,), lam)
            events.append("infeasible")
            mon = MONITOR if monitor is None else monitor
            mon.record(
                verify_certificate(cert, qp, tols=tols),
                "inner_gi_step: invalid infeasibility certificate",
            )
            return Infeasible(cert, tuple(events))

        if t2 <= t1:  # full step; ties resolve to the full step
            x = x + t2 * z
            u_plus = _clip_dual(u_plus + t2 * _appended(-r, 1.0), tols)
            try:
                qr2 = qr_append_column(qr, c_p)
            except DependentColumn as exc:  # z != 0 should preclude this
                raise NumericalError(f"dependent column on full step: {exc}") from exc
            s2 = STuple(
                x=x,
                j_set=tuple(j_work) + (p,),
                u=u_plus,
                n_mat=_append_col(n_mat, c_p),
                qr=qr2,
            )
            events += ["full", f"add:{p}"]
            check_s_tuple(s2, qp, tols, "inner_gi_step", monitor)
            _check_v_increase(v0, v_value(x, qp.x_star), tols, "inner_gi_step", monitor)
            return Advanced(s2, tuple(events))

        # dual-only step when t2 = inf, otherwise partial step in both spaces
        if math.isinf(t2):
            events.append("dual")
        else:
            x = x + t1 * z
            events.append("partial")
        u_plus = _clip_dual(u_plus + t1 * _appended(-r, 1.0), tols)
        u_plus = np.delete(u_plus, l)
        events.append(f"drop:{j_work[l]}")
        del j_work[l]
        n_mat = np.delete(n_mat, l, axis=1)
        qr = qr_delete_column(qr, l)

    raise IterationLimitError("anti-cycling cap exceeded in inner GI step", x)


@dataclass(frozen=True)
class AplusOptions:
    """Controls the primal refinement of the degenerate step direction.

    The stopping criterion for "good enough" directions is not prescribed,
    so it is exposed as a round budget plus an optional target residual.
    """

    rounds: int = 1
    pool: tuple[int, ...] | None = None  # defaults to the dropped candidates
    rule: str = "lowest"  # or "greedy" (largest improvement first)
    target_norm: float | None = None


@dataclass(frozen=True)
class DirectionState:
    """State threaded through the primal direction refinement."""

    j_set: tuple[int, ...]
    n_mat: np.ndarray
    qr: QrFactors
    r: np.ndarray
    y: np.ndarray
    events: tuple[str, ...] = ()


def _refine_direction(
    j_work: list[int],
    n_mat: np.ndarray,
    qr: QrFactors,
    r: np.ndarray,
    c_p: np.ndarray,
    qp: ConstraintView,
    pool: list[int],
    opt: AplusOptions,
) -> tuple[list[int], np.ndarray, QrFactors, np.ndarray, np.ndarray, list[str]]:
    events: list[str] = []
    n = c_p.shape[0]
    y = n_mat @ r if r.size else np.zeros(n)
    enter_tol = 1e-12 * (1.0 + float(np.linalg.norm(c_p)))
    pool_left = [j for j in pool if j not in j_work]
    rounds = 0
    max_rounds = opt.rounds if opt.rounds is not None else len(pool_left) + 1

    while rounds < max_rounds:
        gains = [(j, float(-(qp.column(j) @ (c_p - y)))) for j in pool_left]
        eligible = [(j, g) for j, g in gains if g > enter_tol]
        if not eligible:
            break  # y is the cone projection over the full candidate set
        if opt.rule == "greedy":
            j_in = max(eligible, key=lambda jg: jg[1])[0]
        else:
            j_in = min(j for j, _ in eligible)
        c_in = qp.column(j_in)
        try:
            qr_plus = qr_append_column(qr, c_in)
        except DependentColumn:
            pool_left.remove(j_in)
            events.append(f"skip-dependent:{j_in}")
            continue
        n_plus = np.hstack([n_mat, c_in[:, None]])
        r_ext = np.append(r, 0.0)
        r_plus = solve_upper(qr_plus.r_mat, qr_plus.q_mat.T @ c_p)
        guard = 0
        while True:
            q_cur = n_mat.shape[1]
            scale = 1.0 + float(np.max(np.abs(r_plus))) if r_plus.size else 1.0
            pos = np.flatnonzero(r_plus[:q_cur] > 1e-13 * scale)
            if pos.size == 0:
                break
            t3_vals = -r_ext[pos] / r_plus[pos]
            k = int(np.argmin(t3_vals))
            t3, l = float(t3_vals[k]), int(pos[k])
            r_ext = r_ext + t3 * r_plus
            removed = j_work.pop(l)
            pool_left.append(removed)  # dropped columns rejoin the candidates
            events.append(f"drop:{removed}")
            n_mat = np.delete(n_mat, l, axis=1)
            qr = qr_delete_column(qr, l)
            n_plus = np.delete(n_plus, l, axis=1)
            qr_plus = qr_delete_column(qr_plus, l)
            r_ext = np.delete(r_ext, l)
            r_plus = solve_upper(qr_plus.r_mat, qr_plus.q_mat.T @ c_p)
            guard += 1
            if guard > q_cur + len(pool) + 2:
                raise NumericalError("direction refinement failed to settle")
        j_work.append(j_in)
        pool_left.remove(j_in)
        events.append(f"enter:{j_in}")
        n_mat, qr, r = n_plus, qr_plus, r_plus
        if r.size and r[-1] > 1e-10 * (1.0 + float(np.max(np.abs(r)))):
            events.append("warn-positive-entering-coefficient")
        y = n_mat @ r
        rounds += 1
        if opt.target_norm is not None and float(np.linalg.norm(c_p - y)) <= opt.target_norm:
            break
    return j_work, n_mat, qr, r, y, events


def improve_step_direction(
    s: STuple,
    p: int,
    qp: ConstraintView,
    j_pool,
    max_rounds: int | None = None,
    rule: str = "lowest",
) -> DirectionState:
    """Primal active-set refinement of the degenerate step direction.

    ``s`` is the state after the drop loop of the degenerate step (so its
    span coefficients for ``c_p`` satisfy r <= 0); ``j_pool`` holds the
    dropped candidate indices.  With an unlimited round budget the result
    satisfies ``c_p - y = P_cone(-N0)(c_p)`` over the original column set.
    """
    c_p = qp.column(p)
    r = solve_upper(s.qr.r_mat, s.qr.q_mat.T @ c_p)
    opt = AplusOptions(
        rounds=max_rounds if max_rounds is not None else len(tuple(j_pool)) + 1,
        rule=rule,
    )
    j_work, n_mat, qr, r, y, events = _refine_direction(
        list(s.j_set), s.n_mat.copy(), s.qr, r, c_p, qp, list(j_pool), opt
    )
    return DirectionState(tuple(j_work), n_mat, qr, r, y, tuple(events))


def degenerate_inner_gi_step(
    s: STuple,
    p: int,
    qp: ConstraintView,
    tols: GiTolerances = DEFAULT_TOLS,
    aplus: AplusOptions | None = None,
    monitor: InvariantMonitor | None = None,
) -> StepOutcome:
    """The inner step variant for all-zero multipliers.

    Drops active columns while the span coefficients of ``c_p`` have a
    positive entry (lowest index first), optionally refines the direction
    against the dropped candidates, then takes a single full step onto the
    remaining tight system plus ``p``.  With |z| = 0 the coefficients give
    an infeasibility certificate.
    """
    if p in s.j_set:
        raise PreconditionViolated(f"constraint {p} already active")
    if s.u.size and float(np.max(np.abs(s.u))) > tols.dual_tol:
        raise PreconditionViolated("multipliers are not zero; use inner_gi_step")
    c_p = qp.column(p)
    b_p = qp.rhs(p)
    _require_violated(c_p, b_p, s.x, tols)

    x = s.x
    j0 = list(s.j_set)
    j_work = list(s.j_set)
    n_mat = s.n_mat.copy()
    qr = s.qr
    events: list[str] = []

    while True:
        r = solve_upper(qr.r_mat, qr.q_mat.T @ c_p)
        scale = 1.0 + (float(np.max(np.abs(r))) if r.size else 0.0)
        pos = np.flatnonzero(r > tols.r_pos_tol * scale)
        if pos.size == 0:
            break
        l = int(pos[0])  # lowest index
        events.append(f"drop:{j_work[l]}")
        del j_work[l]
        n_mat = np.delete(n_mat, l, axis=1)
        qr = qr_delete_column(qr, l)

    if aplus is not None and aplus.rounds:
        pool = list(aplus.pool) if aplus.pool is not None else [j for j in j0 if j not in j_work]
        j_work, n_mat, qr, r, _, ev = _refine_direction(j_work, n_mat, qr, r, c_p, qp, pool, aplus)
        events += ev

    z = c_p - qr.q_mat @ (qr.q_mat.T @ c_p)
    if _nrm(z) <= tols.z_tol * (1.0 + _nrm(c_p)):
        lam = np.append(np.maximum(-r, 0.0), 1.0)
        cert = InfeasibilityCertificate(tuple(j_work) + (p,), lam)
        events.append("infeasible")
        mon = MONITOR if monitor is None else monitor
        mon.record(
            verify_certificate(cert, qp, tols=tols),
            "degenerate_inner_gi_step: invalid infeasibility certificate",
        )
        return Infeasible(cert, tuple(events))

    t2 = (b_p - float(c_p @ x)) / float(z @ c_p)
    x2 = x + t2 * z
    u2 = _clip_dual(_appended(-t2 * r, t2), tols)
    try:
        qr2 = qr_append_column(qr, c_p)
    except DependentColumn as exc:
        raise NumericalError(f"dependent column on degenerate step: {exc}") from exc
    s2 = STuple(
        x=x2,
        j_set=tuple(j_work) + (p,),
        u=u2,
        n_mat=_append_col(n_mat, c_p),
        qr=qr2,
    )
    events += ["full", f"add:{p}"]
    check_s_tuple(s2, qp, tols, "degenerate_inner_gi_step", monitor)
    _check_v_increase(
        v_value(x, qp.x_star), v_value(x2, qp.x_star), tols, "degenerate_inner_gi_step", monitor
    )
    return Advanced(s2, tuple(events))


def gi_solve(qp: QpProblem, options: GiOptions | None = None) -> Solution | Infeasible:
    """Project ``x*`` onto {x : C^T x >= b} by repeated inner steps.

    Raises ``IterationLimitError`` when the step budget is exhausted, which
    is a different outcome from a certified ``Infeasible``.
    """
    opts = options or GiOptions()
    tols = opts.tols
    cap = opts.max_inner_steps
    if cap is None:
        cap = 100 + 20 * qp.m
    col_norms = np.linalg.norm(qp.c_mat, axis=0)
    if np.any(col_norms == 0.0):
        raise PreconditionViolated("zero constraint normal in problem")
    s = empty_s_tuple(qp.x_star)
    inner = 0
    while True:
        resid = (qp.c_mat.T @ s.x - qp.b) / col_norms
        thresh = -tols.feas_tol * (1.0 + _nrm(s.x))
        violated = np.flatnonzero(resid < thresh)
        if violated.size == 0:
            return Solution(s.x, s.j_set, s.u, s, inner)
        if opts.violated_rule == "first":
            p = int(violated[0])
        else:
            p = int(violated[np.argmin(resid[violated])])
        if inner >= cap:
            raise IterationLimitError(f"inner step budget {cap} exhausted", s.x)
        outcome = inner_gi_step(s, p, qp, tols)
        inner += 1
        if isinstance(outcome, Infeasible):
            return outcome
        s = outcome.s_tuple


def verify_certificate(
    cert: InfeasibilityCertificate,
    qp_or_c_mat,
    b=None,
    tols: GiTolerances = DEFAULT_TOLS,
) -> bool:
    """Farkas check: lam >= 0, ||C_{J'} lam|| small, lam^T b_{J'} > cert_tol."""
    if b is None:
        cols = np.column_stack([qp_or_c_mat.column(j) for j in cert.j_prime])
        b_j = np.array([qp_or_c_mat.rhs(j) for j in cert.j_prime])
    else:
        c_mat = as_matrix(qp_or_c_mat, "c_mat")
        b_all = as_vector(b, "b")
        cols = c_mat[:, list(cert.j_prime)]
        b_j = b_all[list(cert.j_prime)]
    lam = cert.lam
    if lam.shape[0] != len(cert.j_prime) or np.any(lam < 0.0):
        return False
    scale = 1.0 + float(np.sum(lam))
    if float(np.linalg.norm(cols @ lam)) > tols.cert_tol * scale:
        return False
    return float(lam @ b_j) > tols.cert_tol


def project_polyhedron_reduced(
    x,
    c_mat,
    b,
    inner_solver: Callable[[QpProblem], Solution | Infeasible] | None = None,
) -> np.ndarray:
    """Projection onto {x : C^T x >= b} through the QR of C.

    With C = QR (full column rank d), solving the d-dimensional problem
    z = P_{R^T z >= b}(Q^T x) gives the projection as Qz + (I - QQ^T)x.
    Falls back to the direct solve when C is rank deficient.
    """
    x = as_vector(x, "x")
    solver = inner_solver or gi_solve
    try:
        f = qr_factorize(c_mat)
    except Exception:
        res = solver(QpProblem(x, c_mat, b))
        if isinstance(res, Infeasible):
            raise ValueError("polyhedron is empty") from None
        return res.x
    qtx = f.q_mat.T @ x
    res = solver(QpProblem(qtx, f.r_mat, b))
    if isinstance(res, Infeasible):
        raise ValueError("polyhedron is empty")
    return f.q_mat @ res.x + (x - f.q_mat @ qtx)


def cone_project_reduced(n0_mat, c_p) -> tuple[np.ndarray, tuple[int, ...], np.ndarray]:
    """Projection of ``c_p`` onto cone(-N0) computed in the reduced space.

    Factor N0 = Q0 R0 and project w = Q0^T c_p onto cone(-R0) there; the
    lift Q0 y~ is the full-space cone projection.  The reduced projection
    is obtained through the polar identity: P_cone(w) = w - P_polar(w) with
    polar(cone(-R0)) = {v : R0^T v >= 0}, a least-distance QP.

    Returns ``(y, J, r)`` with y = Q0 y~, supporting columns J of N0 and
    strictly negative coefficients r with y~ = (R0)_J r.
    """
    f = qr_factorize(n0_mat)  # RankDeficient propagates
    c_p = as_vector(c_p, "c_p")
    w = f.q_mat.T @ c_p
    res = gi_solve(QpProblem(w, f.r_mat, np.zeros(f.ncols)))
    if isinstance(res, Infeasible):  # 0 is always feasible for the polar QP
        raise NumericalError("polar projection reported infeasible")
    y_tilde = w - res.x
    y = f.q_mat @ y_tilde
    support = [(j, -float(res.u[i])) for i, j in enumerate(res.j_set) if res.u[i] > DEFAULT_TOLS.dual_tol]
    j_idx = tuple(j for j, _ in support)
    r = np.array([c for _, c in support])
    return y, j_idx, r
