"""Acceptance criteria 1-9, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v`` (the summary lines are
printed at the end of the module) or directly with
``python3 tests/test_acceptance.py``.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from foliation_bounds.bounds import BoundInput, best_bound, optimal_bound_expansion, optimal_s, zhong_yang
from foliation_bounds.foliation_zoo import isoparametric_example, standard_zoo
from foliation_bounds.model_ode import (
    ModelProblem,
    check_central_minimal,
    check_diameter_monotone,
    model_eigenvalue,
)
from foliation_bounds.psi_kernel import (
    HALF_PI,
    barrier_integral_crosscheck,
    psi,
    psi_ode_residual,
    refined_zhong_yang,
)
from foliation_bounds.sl_engine import solve_neumann_shooting
from foliation_bounds.suites import dominance_margins, random_model_inputs

RESULTS: dict[int, tuple[bool, str]] = {}


def _timed(fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    return ok, detail, time.perf_counter() - t0


def criterion_1():
    def body():
        grid = np.linspace(-HALF_PI + 1e-3, HALF_PI - 1e-3, 2001)
        worst = max(psi_ode_residual(float(t)) for t in grid)
        end = abs(psi(HALF_PI) - 1.0)
        return worst <= 1e-10 and end <= 1e-6, f"max residual {worst:.2e}, |psi(pi/2) - 1| = {end:.1e}"

    ok, detail, dt = _timed(body)
    return ok and dt < 1.0, f"{detail}, {dt:.2f} s (limit 1 s)"


def criterion_2():
    def body():
        flat = max(
            abs(model_eigenvalue(ModelProblem(0.0, 3, 0.0, delta)) - math.pi**2 / delta**2)
            / (math.pi**2 / delta**2)
            for delta in (0.5, 1.0, 2.0, 3.0)
        )
        eps = 1e-4 * math.pi
        delta = math.pi - 2 * eps
        full = model_eigenvalue(ModelProblem(1.0, 3, -delta / 2, delta))
        ok = flat <= 1e-8 and abs(full - 3.0) <= 1e-3
        return ok, f"K=0 worst rel err {flat:.1e}, near-full value {full:.9f}"

    ok, detail, dt = _timed(body)
    return ok and dt < 10.0, f"{detail}, {dt:.1f} s (limit 10 s)"


def criterion_3():
    def body():
        d_grid = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
        reports = []
        for n in (2, 3, 5):
            reports.append(check_central_minimal(1.0, n, HALF_PI, 9, 1e-10, 1e-7))
            reports.append(check_diameter_monotone(1.0, n, d_grid, 1e-10, 1e-7))
        worst = min(r.worst_margin for r in reports)
        return all(r.passed for r in reports), f"{len(reports)} checks, worst margin {worst:.2e}"

    ok, detail, dt = _timed(body)
    return ok and dt < 60.0, f"{detail}, {dt:.1f} s (limit 60 s)"


def criterion_4():
    def body():
        s_grid = np.linspace(0.01, 0.99, 99)
        worst = math.inf
        for inp in random_model_inputs(seed=0, count=50):
            _, margin = dominance_margins(inp, 1e-10, 1e-7, s_grid)
            worst = min(worst, margin)
        return worst >= 0, f"50 inputs, worst margin {worst:.2e}"

    ok, detail, dt = _timed(body)
    return ok and dt < 300.0, f"{detail}, {dt:.1f} s (limit 300 s)"


def criterion_5():
    rng = np.random.default_rng(1)
    s = np.linspace(0.0, 1.0, 1_000_001)[1:-1]
    grid_err = expansion_err = 0.0
    checked = 0
    while checked < 200:
        n = int(rng.integers(2, 11))
        K = float(rng.random())
        d = float(0.2 + 2.8 * rng.random())
        if K > 0 and d > math.pi / math.sqrt(K):
            continue
        inp = BoundInput(n, K, d)
        opt = optimal_s(inp)
        if opt.regime != "interior":
            continue
        A, B = math.pi**2 / d**2, (n - 1) * K
        b = -4 * A * s**2 + (4 * A + B) * s
        grid_err = max(grid_err, abs(float(b.max()) - opt.bound))
        expansion_err = max(expansion_err, abs(optimal_bound_expansion(inp) - opt.bound))
        checked += 1
    ok = grid_err <= 1e-9 and expansion_err <= 1e-12
    return ok, f"200 inputs, grid error {grid_err:.1e}, expansion error {expansion_err:.1e}"


def criterion_6():
    def body():
        cases = [(1, n, None, None, float(n)) for n in (2, 3, 5)]
        cases += [(2, m1 + m2 + 1, m1, m2, 2.0 * (m1 + m2 + 2)) for m1, m2 in ((1, 1), (1, 2), (2, 2))]
        worst = 0.0
        for g, n, m1, m2, expected in cases:
            ex = isoparametric_example(g, n, m1, m2)
            lam = solve_neumann_shooting(ex.reduction, 2, 1e-10).first_nonzero
            worst = max(worst, abs(lam - expected) / expected)
        return worst <= 1e-6, f"6 reductions, worst rel err {worst:.1e}"

    ok, detail, dt = _timed(body)
    return ok and dt < 30.0, f"{detail}, {dt:.1f} s (limit 30 s)"


def criterion_7():
    worst = math.inf
    equality = []
    tori = []
    for ex in standard_zoo():
        inp = BoundInput(ex.ambient_dim, ex.K_ambient, ex.known_diameter)
        for r in best_bound(inp, use_model=True):
            if r.valid:
                worst = min(worst, ex.known_lambda1B + 1e-9 - r.value)
        if ex.name.startswith("mapping_torus"):
            tori.append(ex.name)
        if abs(zhong_yang(inp).value - ex.known_lambda1B) <= 1e-9:
            equality.append(ex.name)
    tori_only = sorted(equality) == sorted(tori) and len(tori) == 3
    ok = worst >= 0 and tori_only
    return ok, f"worst slack {worst:.3g}, Zhong-Yang equality on {len(equality)} fixtures, exactly the tori: {tori_only}"


def criterion_8():
    equal = strict = True
    for d in (0.3, 1.0, math.pi, 5.0):
        zy = zhong_yang(BoundInput(2, 0.0, d)).value
        equal &= refined_zhong_yang(d, 1.0) == zy
        strict &= all(refined_zhong_yang(d, k) > zy for k in (1e-3, 0.25, 0.5, 0.9, 0.999))
    cross = barrier_integral_crosscheck()
    ok = equal and strict and cross["difference"] <= 1e-9
    return bool(ok), (
        f"equality at k=1: {bool(equal)}, strict for k<1: {bool(strict)}, "
        f"quadrature difference {cross['difference']:.1e}"
    )


def criterion_9():
    proc = subprocess.run(
        [sys.executable, "-m", "foliation_bounds", "verify", "--negative-control"],
        capture_output=True,
        text=True,
    )
    first = proc.stdout.splitlines()[2].split()[0] if proc.returncode in (0, 1) else "?"
    return proc.returncode == 1, f"exit status {proc.returncode}, first failing suite {first}"


CRITERIA = {
    1: ("psi ODE residual", criterion_1),
    2: ("model closed forms", criterion_2),
    3: ("model monotonicity", criterion_3),
    4: ("Shi-Zhang dominance", criterion_4),
    5: ("optimal-s closed form", criterion_5),
    6: ("zoo ground truth", criterion_6),
    7: ("bound soundness on the zoo", criterion_7),
    8: ("refined bound ordering", criterion_8),
    9: ("negative control", criterion_9),
}


def _line(num: int) -> str:
    ok, detail = RESULTS[num]
    return f"criterion {num} [{'PASS' if ok else 'FAIL'}] {CRITERIA[num][0]}: {detail}"


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    lines = [_line(k) for k in sorted(RESULTS)]
    if reporter is not None:
        reporter.write_sep("=", "acceptance criteria")
        for line in lines:
            reporter.write_line(line)
    else:
        print("\n".join(lines))


@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_criterion(num):
    ok, detail = CRITERIA[num][1]()
    RESULTS[num] = (ok, detail)
    print(_line(num))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for num, (_, fn) in CRITERIA.items():
        RESULTS[num] = fn()
        print(_line(num), flush=True)
        failed += not RESULTS[num][0]
    raise SystemExit(1 if failed else 0)
