"""Verification suites run by ``foliation-bounds verify``.

Each suite returns a :class:`CheckReport`.  ``SuiteSettings`` carries the
run-wide tolerances so that a fast, loose run and a slow, strict run share
the same code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bounds import BoundInput, best_bound, optimal_bound_expansion, optimal_s, shi_zhang
from .checks import CheckReport
from .foliation_zoo import (
    hopf_inequality,
    rigidity_certificate,
    standard_zoo,
    verify_isoparametric_inequality,
)
from .model_ode import ModelProblem, check_central_minimal, check_diameter_monotone, model_eigenvalue
from .psi_kernel import (
    HALF_PI,
    barrier_integral,
    barrier_integral_crosscheck,
    psi,
    psi_ode_residual,
    refined_zhong_yang,
    series_partial_sum,
)
from .sl_engine import solve_neumann_fd_extrapolated, solve_neumann_shooting

NEGATIVE_CONTROL_OFFSET = 0.01


@dataclass(frozen=True)
class SuiteSettings:
    tolerance: float = 1e-10
    mesh: int = 1024
    seed: int = 0
    negative_control: bool = False
    dominance_samples: int = 10

    @property
    def solver_tol(self) -> float:
        return min(max(self.tolerance, 1e-12), 1e-6)

    @property
    def slack(self) -> float:
        return max(1e-7, 10 * self.solver_tol)


def _combine(name: str, reports: list[CheckReport], **details) -> CheckReport:
    failed = [r for r in reports if not r.passed]
    return CheckReport(
        name=name,
        passed=not failed,
        worst_margin=min((r.worst_margin for r in reports), default=0.0),
        violations=[{"check": r.name, "margin": r.worst_margin} for r in failed],
        details={"checks": len(reports), **details},
    )


def psi_residual_suite(cfg: SuiteSettings) -> CheckReport:
    offset = NEGATIVE_CONTROL_OFFSET if cfg.negative_control else 0.0
    grid = np.linspace(-HALF_PI + 1e-3, HALF_PI - 1e-3, 2001)
    worst = max(psi_ode_residual(float(t), offset) for t in grid)
    end_err = max(abs(psi(HALF_PI) + offset - 1.0), abs(psi(-HALF_PI) + offset + 1.0))
    margin = min(1e-10 - worst, 1e-6 - end_err)
    return CheckReport(
        "psi_ode_residual",
        margin >= 0,
        margin,
        details={"max_residual": worst, "endpoint_error": end_err, "psi_offset": offset},
    )


def series_suite(cfg: SuiteSettings) -> CheckReport:
    worst = math.inf
    details = {}
    exact_zero = series_partial_sum(0.0, 0) == 2.0
    for x in (0.1, 0.3, 0.5):
        target = 1 / math.sqrt(1 + x) + 1 / math.sqrt(1 - x)
        errors = [abs(series_partial_sum(x, N) - target) for N in range(0, 12)]
        # the tail shrinks at least by x^2 per extra term (coefficients decrease)
        ok = all(e1 <= e0 * x**2 * (1 + 1e-9) + 1e-15 for e0, e1 in zip(errors, errors[1:]))
        details[str(x)] = errors[-1]
        worst = min(worst, 1.0 if ok else -1.0)
    return CheckReport("series_consistency", exact_zero and worst > 0, worst, details=details)


def barrier_suite(cfg: SuiteSettings) -> CheckReport:
    cross = barrier_integral_crosscheck()
    value = barrier_integral()
    in_range = 0.0 < value < HALF_PI
    margin = 1e-9 - cross["difference"]
    return CheckReport(
        "barrier_dual_quadrature",
        in_range and margin >= 0,
        margin,
        details={"integral": value, **cross},
    )


def refined_suite(cfg: SuiteSettings) -> CheckReport:
    worst = math.inf
    bad = []
    for d in (0.5, 1.0, math.pi, 4.0):
        zy = math.pi**2 / d**2
        if refined_zhong_yang(d, 1.0) != zy:
            bad.append({"d": d, "k": 1.0})
        for k in (0.05, 0.3, 0.7, 0.99):
            gap = refined_zhong_yang(d, k) - zy
            worst = min(worst, gap)
            if gap <= 1e-12:
                bad.append({"d": d, "k": k, "gap": gap})
    return CheckReport("refined_bound_ordering", not bad, worst, violations=bad)


def central_minimal_suite(cfg: SuiteSettings) -> CheckReport:
    reports = [
        check_central_minimal(1.0, n, HALF_PI, 9, cfg.solver_tol, cfg.slack) for n in (2, 3, 5)
    ]
    return _combine("model_central_minimal", reports)


def diameter_monotone_suite(cfg: SuiteSettings) -> CheckReport:
    grid = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
    reports = [check_diameter_monotone(1.0, n, grid, cfg.solver_tol, cfg.slack) for n in (2, 3, 5)]
    return _combine("model_diameter_monotone", reports)


def random_model_inputs(seed: int, count: int) -> list[BoundInput]:
    """Random (n, K, d) with n in [2, 10], K in (0, 1], d in (0.2, 0.9 pi/sqrt K)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(2, 11))
        K = float(1.0 - rng.random())  # (0, 1]
        d = float(0.2 + (0.9 * math.pi / math.sqrt(K) - 0.2) * rng.random())
        out.append(BoundInput(n, K, d))
    return out


def dominance_margins(inp: BoundInput, tol: float, slack: float, s_grid=None) -> tuple[float, float]:
    """Model eigenvalue and the worst relative margin of ``model - shi_zhang(s)`` over ``s``."""
    s_grid = np.linspace(0.01, 0.99, 99) if s_grid is None else s_grid
    lam = model_eigenvalue(ModelProblem.central(inp.K, inp.n, inp.d), tol, cross_check=False)
    sz = max(shi_zhang(inp, float(s)).value for s in s_grid)
    return lam, (lam - sz) / lam + slack


def dominance_suite(cfg: SuiteSettings) -> CheckReport:
    worst = math.inf
    bad = []
    for inp in random_model_inputs(cfg.seed, cfg.dominance_samples):
        lam, margin = dominance_margins(inp, cfg.solver_tol, cfg.slack)
        worst = min(worst, margin)
        if margin < 0:
            bad.append({"n": inp.n, "K": inp.K, "d": inp.d, "model": lam})
    return CheckReport(
        "shi_zhang_dominance", not bad, worst, violations=bad,
        details={"samples": cfg.dominance_samples, "seed": cfg.seed},
    )


def optimal_s_suite(cfg: SuiteSettings) -> CheckReport:
    rng = np.random.default_rng(cfg.seed)
    s = np.linspace(0.0, 1.0, 1_000_001)[1:-1]
    worst_grid = 0.0
    worst_expansion = 0.0
    checked = 0
    while checked < 200:
        n = int(rng.integers(2, 11))
        K = float(rng.random())
        d = float(0.3 + 2.7 * rng.random())
        if K > 0 and d > math.pi / math.sqrt(K):
            continue
        inp = BoundInput(n, K, d)
        opt = optimal_s(inp)
        if opt.regime != "interior":
            continue
        b = -4 * opt.A * s**2 + (4 * opt.A + opt.B) * s
        worst_grid = max(worst_grid, abs(float(np.max(b)) - opt.bound))
        worst_expansion = max(worst_expansion, abs(optimal_bound_expansion(inp) - opt.bound))
        checked += 1
    margin = min(1e-9 - worst_grid, 1e-12 - worst_expansion)
    return CheckReport(
        "optimal_s_closed_form",
        margin >= 0,
        margin,
        details={"grid_error": worst_grid, "expansion_error": worst_expansion, "inputs": checked},
    )


def reduction_suite(cfg: SuiteSettings) -> CheckReport:
    worst = math.inf
    bad = []
    fd_tol = max(1e-6, 10 * cfg.tolerance)
    for ex in standard_zoo():
        if ex.reduction is None:
            continue
        shoot = solve_neumann_shooting(ex.reduction, 2, cfg.solver_tol).first_nonzero
        fd = solve_neumann_fd_extrapolated(ex.reduction, 2, cfg.mesh).first_nonzero
        rel_s = abs(shoot - ex.known_lambda1B) / ex.known_lambda1B
        rel_f = abs(fd - ex.known_lambda1B) / ex.known_lambda1B
        margin = min(1e-6 - rel_s, fd_tol - rel_f)
        worst = min(worst, margin)
        if margin < 0:
            bad.append({"fixture": ex.name, "shooting": shoot, "finite_difference": fd})
    return CheckReport("zoo_reduction_fidelity", not bad, worst, violations=bad)


def soundness_suite(cfg: SuiteSettings) -> CheckReport:
    worst = math.inf
    bad = []
    equality = []
    model_gap = {}
    for ex in standard_zoo():
        inp = BoundInput(ex.ambient_dim, ex.K_ambient, ex.known_diameter)
        results = best_bound(inp, use_model=True, tol=cfg.solver_tol, fd_mesh=cfg.mesh)
        model = next((r.value for r in results if r.name == "model"), None)
        if model is not None:
            # observed only; no claim is made about equality cases
            model_gap[ex.name] = ex.known_lambda1B - model
        for r in results:
            if not r.valid:
                continue
            margin = ex.known_lambda1B + 1e-9 - r.value
            worst = min(worst, margin)
            if margin < 0:
                bad.append({"fixture": ex.name, "bound": r.name, "value": r.value})
        zy = next(r for r in results if r.name == "zhong_yang").value
        if abs(zy - ex.known_lambda1B) <= 1e-9:
            equality.append(ex.name)
    tori_only = all(name.startswith("mapping_torus") for name in equality) and len(equality) == 3
    inequality_checks = [
        verify_isoparametric_inequality(g, n, np.linspace(0.01, 0.99, 99))
        for g, n in ((1, 2), (2, 3), (3, 4), (4, 9), (6, 13))
    ]
    hopf_ok = all(np.all(hopf_inequality(k, np.linspace(0.01, 0.99, 99)) >= 0) for k in (1, 2, 3))
    passed = not bad and tori_only and hopf_ok and all(inequality_checks)
    return CheckReport(
        "zoo_bound_soundness",
        passed,
        worst,
        violations=bad,
        details={"zhong_yang_equality": equality, "model_gap": model_gap},
    )


def rigidity_suite(cfg: SuiteSettings) -> CheckReport:
    clean = [rigidity_certificate(1.0, 101), rigidity_certificate(9.0, 1001)]
    control = rigidity_certificate(1.0, 101, perturbation=0.01)
    passed = all(clean) and not control.passed
    return CheckReport(
        "rigidity_certificates",
        passed,
        min(r.worst_margin for r in clean),
        details={"negative_control_deviation": control.details["max_deviation"]},
    )


SUITES: list[tuple[str, Callable[[SuiteSettings], CheckReport]]] = [
    ("psi_ode_residual", psi_residual_suite),
    ("series_consistency", series_suite),
    ("barrier_dual_quadrature", barrier_suite),
    ("refined_bound_ordering", refined_suite),
    ("optimal_s_closed_form", optimal_s_suite),
    ("model_central_minimal", central_minimal_suite),
    ("model_diameter_monotone", diameter_monotone_suite),
    ("shi_zhang_dominance", dominance_suite),
    ("zoo_reduction_fidelity", reduction_suite),
    ("zoo_bound_soundness", soundness_suite),
    ("rigidity_certificates", rigidity_suite),
]


def run_suites(cfg: SuiteSettings) -> list[CheckReport]:
    return [fn(cfg) for _, fn in SUITES]
