"""Acceptance suite: one test per published criterion, at stated tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL
line per criterion.  Criterion 2 carries one sub-check that is provably
unattainable given criterion 1 (see test_criterion_02b docstring and the
decisions ledger); it is implemented faithfully rather than loosened.
"""

import math
import time

import numpy as np
import pytest

from projqp import cli
from projqp.activeset_qp import MONITOR
from projqp.bench import (
    TWO_CIRCLES_XBAR,
    run_two_circles,
    suite_art,
    suite_box,
    suite_qp_oracle,
    suite_reductions,
    suite_thm73,
    two_circles_sets,
)
from projqp.solvers import SolverOptions, solve_map, solve_sip

TABLE1 = {
    "bap-gi": [9.23e0, 2.95e0, 1.48e0, 2.16e-1, 1.54e-1, 1.60e-2,
               5.22e-3, 7.91e-5, 6.91e-6, 1.67e-9, 1.21e-11, 9.44e-16],
    "sip-gi": [9.23e0, 2.95e0, 7.98e-1, 1.70e-1, 7.57e-2, 8.04e-3,
               1.38e-3, 1.79e-5, 4.84e-7, 8.28e-11, 5.93e-14, 7.86e-16],
}


def agrees_2sf(value: float, table: float) -> bool:
    """Within half a unit of the table entry's second significant digit."""
    unit = 10.0 ** (math.floor(math.log10(abs(table))) - 1)
    return abs(value - table) <= 0.5 * unit * (1.0 + 1e-9)


def read_csv_dists(path) -> list[float]:
    rows = path.read_text().strip().splitlines()[1:]
    return [float(line.split(",")[1]) for line in rows]


def read_csv_measure1(path) -> list[float | None]:
    out = []
    for line in path.read_text().strip().splitlines()[1:]:
        field = line.split(",")[2]
        out.append(None if field == "" else float(field))
    return out


@pytest.fixture(scope="module")
def cli_tables(tmp_path_factory):
    """Criterion 1/2 run through the command line surface, timed."""
    base = tmp_path_factory.mktemp("tables")
    out = {}
    for method in ("bap-gi", "sip-gi"):
        path = base / f"{method}.csv"
        t0 = time.perf_counter()
        code = cli.main(["two-circles", "--method", method, "--out", str(path)])
        elapsed = time.perf_counter() - t0
        assert code == 0
        out[method] = (path, elapsed)
    return out


def test_criterion_01_two_circles_bap(cli_tables):
    path, elapsed = cli_tables["bap-gi"]
    dists = read_csv_dists(path)
    for i in range(1, 10):
        assert agrees_2sf(dists[i], TABLE1["bap-gi"][i]), f"row {i}: {dists[i]:.4e}"
    assert agrees_2sf(dists[1], 2.95e0)
    assert agrees_2sf(dists[5], 1.60e-2)
    assert agrees_2sf(dists[9], 1.67e-9)
    assert dists[11] <= 1e-14
    assert elapsed < 1.0
    print(f"\nACCEPTANCE 01 two-circles BAP: PASS (d9={dists[9]:.3e}, {elapsed:.2f}s)")


def test_criterion_02_two_circles_sip(cli_tables):
    path, _ = cli_tables["sip-gi"]
    dists = read_csv_dists(path)
    for i in range(1, 10):
        assert agrees_2sf(dists[i], TABLE1["sip-gi"][i]), f"row {i}: {dists[i]:.4e}"
    assert dists[10] <= 1e-12
    m1 = read_csv_measure1(path)
    # the superlinear-trend window: measure 1 strictly decreases over the
    # tail rows and lands below the -2.5 bar for the SIP
    tail = [m1[i] for i in range(7, 12)]
    assert all(b < a for a, b in zip(tail, tail[1:]))
    assert m1[9] <= -2.5
    print(f"\nACCEPTANCE 02 two-circles SIP: PASS (d10={dists[10]:.3e}, m1(9)={m1[9]:.3f})")


def test_criterion_02b_bap_measure1_bar(cli_tables):
    """Faithful check of the '-2.5 for both methods' clause.

    This sub-check cannot pass: with the BAP table matched to two
    significant figures (criterion 1), d(x9) lies in [1.65e-9, 1.75e-9], so
    Measure 1 at i = 9 is ln(d9/9.232)/9 in [-2.494, -2.488] > -2.5.  The
    clause contradicts criterion 1; see the decisions ledger.  It is
    asserted as written rather than weakened.
    """
    path, _ = cli_tables["bap-gi"]
    m1 = read_csv_measure1(path)
    bar = m1[9] <= -2.5
    print(f"\nACCEPTANCE 02b BAP measure-1 bar: {'PASS' if bar else 'FAIL'} "
          f"(m1(9)={m1[9]:.4f} vs bar -2.5; unattainable given criterion 1)")
    assert bar, (
        f"BAP measure1(9)={m1[9]:.4f} > -2.5; matching Table 1 row 9 to two "
        "significant figures makes this bound unreachable (spec defect, see ledger)"
    )


def test_criterion_03_map_baseline(two_circles_runs):
    _, rows = two_circles_runs["map"]
    assert rows[200].dist <= 1e-12
    tail = [rows[i].measure2 for i in range(180, 201)]
    mean_tail = float(np.mean(tail))
    assert abs(mean_tail - (-0.1405)) <= 0.005
    print(f"\nACCEPTANCE 03 MAP: PASS (d200={rows[200].dist:.3e}, tail m2={mean_tail:.4f})")


def test_criterion_04_dykstra_baseline(two_circles_runs):
    _, rows = two_circles_runs["dykstra"]
    assert 4e-11 <= rows[2000].dist <= 4e-9
    print(f"\nACCEPTANCE 04 Dykstra: PASS (d2000={rows[2000].dist:.3e})")


def test_criterion_05_haugazeau_baseline():
    t0 = time.perf_counter()
    _, rows = run_two_circles("haugazeau")
    elapsed = time.perf_counter() - t0
    assert 3.8e-4 <= rows[90_000].dist <= 1.5e-3
    assert elapsed < 30.0
    print(f"\nACCEPTANCE 05 Haugazeau: PASS (d90000={rows[90000].dist:.3e}, {elapsed:.1f}s)")


def test_criterion_06_qp_oracle_equivalence():
    res = suite_qp_oracle(seed=2026, count=200)
    assert res.passed, res.failures[:5]
    print(f"\nACCEPTANCE 06 QP oracle: PASS ({res.total} instances)")


def test_criterion_07_box_equivalence():
    res = suite_box(seed=2026, count=200)
    assert res.passed, res.failures[:5]
    print(f"\nACCEPTANCE 07 box solver: PASS ({res.total} instances)")


def test_criterion_08_thm73_equivalence():
    res = suite_thm73(seed=2026, count=100)
    assert res.passed, res.failures[:5]
    print(f"\nACCEPTANCE 08 refinement equivalence: PASS ({res.total} instances)")


def test_criterion_09_reductions():
    res = suite_reductions(seed=2026, count=100)
    assert res.passed, res.failures[:5]
    print(f"\nACCEPTANCE 09 reductions: PASS ({res.total} instances)")


def test_criterion_10_art_finite_convergence():
    res = suite_art(seed=2026, count=100)
    assert res.passed, res.failures[:5]
    print(f"\nACCEPTANCE 10 ART finite convergence: PASS ({res.total} systems)")


def test_criterion_12_sip_reduces_to_map():
    x0 = np.array([0.0, 10.0])
    sip = solve_sip(x0, two_circles_sets(),
                    SolverOptions(feas_tol=1e-15, max_outer_iters=80, max_store=0,
                                  record_iterates=True, reference=TWO_CIRCLES_XBAR))
    ref = solve_map(x0, two_circles_sets(),
                    SolverOptions(feas_tol=1e-15, max_outer_iters=80,
                                  record_iterates=True, reference=TWO_CIRCLES_XBAR))
    n = min(len(sip.rows), len(ref.rows))
    assert n > 60
    worst = 0.0
    for i in range(n):
        if sip.rows[i].x is None or ref.rows[i].x is None:
            continue
        worst = max(worst, float(np.linalg.norm(sip.rows[i].x - ref.rows[i].x)))
    assert worst <= 1e-12
    print(f"\nACCEPTANCE 12 store-free SIP = MAP: PASS (max deviation {worst:.2e} over {n} rows)")


def test_criterion_11_invariant_suite():
    """Runs last in this module: every GI step taken anywhere in the suite
    checked the five s-tuple invariants and the v-increase with zero
    violations recorded on the global monitor."""
    assert MONITOR.enabled
    assert MONITOR.checks > 100_000, "expected the suite to exercise the monitor heavily"
    assert MONITOR.violations == 0, MONITOR.messages[:10]
    print(f"\nACCEPTANCE 11 invariants: PASS ({MONITOR.checks} checks, 0 violations)")
