"""Anatomy of the dual active-set engine on a hand-sized projection.

Projecting the origin onto a polyhedron one constraint at a time: every
inner step either adds the violated constraint in a single full step or
first drops active constraints whose multipliers hit zero.  The active-set
state (point, active indices, multipliers, QR of active normals) is the
warm start carried between steps, which is what makes repeated projection
against a growing constraint collection cheap.

The last section shows the other possible outcome: an infeasibility
certificate, a nonnegative combination of normals that sums to zero with
positive combined right-hand side.

Run:  python demos/warmstart_projection.py
"""

import numpy as np

from projqp.activeset_qp import (
    Infeasible,
    QpProblem,
    empty_s_tuple,
    inner_gi_step,
    v_value,
    verify_certificate,
)


def show(s, x_star, note=""):
    print(f"  x = {np.round(s.x, 6)}  J = {list(s.j_set)}  u = {np.round(s.u, 6)}"
          f"  v = {v_value(s.x, x_star):.6f}  {note}")


def main():
    # three halfspaces around the point (1, 1); the diagonal one is slack at
    # the optimum, so the engine must discard it again after trying it
    c_mat = np.column_stack([
        np.array([1.0, 0.0]),
        np.array([1.0, 1.0]) / np.sqrt(2.0),
        np.array([0.0, 1.0]),
    ])
    b = np.array([1.0, np.sqrt(2.0) * 0.9, 1.0])
    qp = QpProblem(np.zeros(2), c_mat, b)

    s = empty_s_tuple(qp.x_star)
    print("projecting (0,0) onto {x1 >= 1} & {(x1+x2)/sqrt2 >= 1.27} & {x2 >= 1}")
    show(s, qp.x_star, "(start: empty active set)")
    for p in (0, 1, 2):
        out = inner_gi_step(s, p, qp)
        s = out.s_tuple
        show(s, qp.x_star, f"(added constraint {p}; events: {', '.join(out.events)})")
    print("  note the objective v rising monotonically and constraint 1 leaving")
    print()

    # an empty system: x1 >= 1 and -x1 >= 0
    qp2 = QpProblem(np.zeros(1), np.array([[1.0, -1.0]]), np.array([1.0, 0.0]))
    s2 = empty_s_tuple(qp2.x_star)
    s2 = inner_gi_step(s2, 0, qp2).s_tuple
    out = inner_gi_step(s2, 1, qp2)
    assert isinstance(out, Infeasible)
    cert = out.certificate
    print("infeasible pair {x1 >= 1} & {x1 <= 0}:")
    print(f"  certificate lambda = {cert.lam} on columns {list(cert.j_prime)}")
    print(f"  C lambda = {qp2.c_mat[:, list(cert.j_prime)] @ cert.lam}"
          f"  lambda.b = {cert.lam @ qp2.b[list(cert.j_prime)]:.1f} > 0")
    print(f"  verify_certificate -> {verify_certificate(cert, qp2.c_mat, qp2.b)}")


if __name__ == "__main__":
    main()
