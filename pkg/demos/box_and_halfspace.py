"""Exact projection onto a box intersected with one halfspace.

Box normals are orthogonal, so the optimal active set can be discovered
coordinate by coordinate: walk along the halfspace normal, freeze every
coordinate that presses against its bound, repeat.  Each pass either
reaches the halfspace or locks a new coordinate, so the trace below is
never longer than the dimension plus one.  A zero direction certifies
infeasibility: the halfspace then lies beyond the box's reach.

Run:  python demos/box_and_halfspace.py
"""

import numpy as np

from projqp.box_qp import BoxQp, solve_box_qp


def walkthrough(title, problem):
    print(title)
    res = solve_box_qp(problem)
    for j, (x_t, y) in enumerate(res.trace):
        if y is None:
            print(f"  x~0 = {np.round(x_t, 6)}   (start, inside the box)")
        else:
            print(f"  y{j - 1}  = {np.round(y, 6)} -> clamp -> x~{j} = {np.round(x_t, 6)}")
    if res.feasible:
        print(f"  optimum: {np.round(res.x, 6)}"
              f"  (halfspace value {problem.c_p @ res.x:.6f} = {problem.b_hat})")
    else:
        print("  infeasible: the step direction vanished, c_p is in the box's"
              " normal cone")
    print()


def main():
    walkthrough(
        "unit box, halfspace -x1 + x2 >= 0.5 from x* = (1, 0.5):",
        BoxQp(np.array([1.0, 0.5]), np.zeros(2), np.ones(2), np.array([-1.0, 1.0]), 0.5),
    )
    walkthrough(
        "same box, unreachable halfspace x1 + x2 >= 3:",
        BoxQp(np.ones(2), np.zeros(2), np.ones(2), np.array([1.0, 1.0]), 3.0),
    )
    walkthrough(
        "half-open box (no upper bound on x1), target five units out:",
        BoxQp(
            np.array([0.25, 0.5]),
            np.zeros(2),
            np.array([np.inf, 1.0]),
            np.array([1.0, 0.0]),
            5.25,
        ),
    )


if __name__ == "__main__":
    main()
