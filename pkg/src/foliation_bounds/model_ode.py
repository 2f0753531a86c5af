"""The one-dimensional comparison model ``v'' - (n-1) sqrt(K) tan(sqrt(K) x) v' = -lambda v``.

``lambda(K, n, delta, a)`` is the first nonzero Neumann eigenvalue on
``[a, a + delta]``.  For ``K > 0`` the problem is solved in the rescaled
variable ``sqrt(K) x`` (unit curvature) and the eigenvalue multiplied back by
``K``; ``K = 0`` is the drift-free interval with gap ``(pi / delta)^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .checks import CheckReport
from .errors import DomainError, NonConvergence
from .sl_engine import SLProblem, SpectrumResult, solve_neumann_fd_extrapolated, solve_neumann_shooting

POLE_GUARD = 1e-9
NEAR_POLE = 1e-4
CROSS_CHECK_MESH = 1024
MONOTONE_SLACK = 1e-7


@dataclass(frozen=True)
class ModelProblem:
    K: float
    n: int
    a: float
    delta: float

    def __post_init__(self):
        if self.K < 0 or not math.isfinite(self.K):
            raise DomainError(f"K must be finite and >= 0, got {self.K}")
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"n must be an integer >= 2, got {self.n}")
        if not self.delta > 0:
            raise DomainError(f"delta must be positive, got {self.delta}")
        if self.K > 0:
            half = math.pi / (2.0 * math.sqrt(self.K))
            gap = min(self.a + half, half - (self.a + self.delta))
            if gap < POLE_GUARD:
                raise DomainError(
                    f"interval [{self.a}, {self.a + self.delta}] reaches a tan pole "
                    f"at +-{half} (clearance {gap:.3g})"
                )

    @classmethod
    def central(cls, K: float, n: int, delta: float) -> "ModelProblem":
        return cls(K, n, -0.5 * delta, delta)

    @property
    def pole_clearance(self) -> float:
        """Distance of the interval from the nearest pole, in the original units."""
        if self.K == 0:
            return math.inf
        half = math.pi / (2.0 * math.sqrt(self.K))
        return min(self.a + half, half - (self.a + self.delta))

    def unit_problem(self) -> SLProblem:
        """Equivalent problem at curvature 1 (or 0); eigenvalues scale by ``K``."""
        if self.K == 0:
            return SLProblem(
                self.a,
                self.a + self.delta,
                lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                label="F(x) = 0",
            )
        rk = math.sqrt(self.K)
        c = float(self.n - 1)
        return SLProblem(
            self.a * rk,
            (self.a + self.delta) * rk,
            lambda x: -c * np.tan(x),
            lambda x: -c / np.cos(x) ** 2,
            label=f"F(x) = -{self.n - 1} tan(x)",
        )

    @property
    def scale(self) -> float:
        return self.K if self.K > 0 else 1.0


def model_spectrum(problem: ModelProblem, tol: float = 1e-10, count: int = 2) -> SpectrumResult:
    """Shooting spectrum of the model, in the caller's units."""
    unit = problem.unit_problem()
    itol = None
    if problem.pole_clearance < NEAR_POLE:
        itol = tol / 1000.0
    result = solve_neumann_shooting(unit, count, tol, integrator_tol=itol)
    result.eigenvalues = result.eigenvalues * problem.scale
    if problem.K > 0:
        rk = math.sqrt(problem.K)
        for pts in result.eigenfunction_samples:
            pts[:, 0] /= rk
    result.diagnostics["rescaled"] = problem.K > 0
    return result


@dataclass
class ModelSolution:
    value: float
    spectrum: SpectrumResult
    fd_value: Optional[float] = None
    fd_mesh: Optional[int] = None

    @property
    def relative_disagreement(self) -> Optional[float]:
        if self.fd_value is None:
            return None
        return abs(self.value - self.fd_value) / self.value


def model_solve(
    problem: ModelProblem,
    tol: float = 1e-10,
    cross_check: bool = True,
    fd_mesh: int = CROSS_CHECK_MESH,
) -> ModelSolution:
    """Shooting value of ``lambda(K, n, delta, a)`` with an optional finite-difference cross-check.

    Disagreement beyond ``max(1e-6, 10 tol)`` relative raises :class:`NonConvergence`.
    """
    spectrum = model_spectrum(problem, tol)
    sol = ModelSolution(spectrum.first_nonzero, spectrum)
    if cross_check:
        fd = solve_neumann_fd_extrapolated(problem.unit_problem(), 2, fd_mesh)
        sol.fd_value = fd.first_nonzero * problem.scale
        sol.fd_mesh = fd_mesh
        rel = sol.relative_disagreement
        if rel > max(1e-6, 10 * tol):
            raise NonConvergence(
                f"shooting {sol.value!r} and finite differences {sol.fd_value!r} disagree "
                f"(relative {rel:.2e}) for {problem}"
            )
    return sol


def model_eigenvalue(
    problem: ModelProblem,
    tol: float = 1e-10,
    cross_check: bool = True,
    fd_mesh: int = CROSS_CHECK_MESH,
) -> float:
    """First nonzero Neumann eigenvalue ``lambda(K, n, delta, a)``."""
    return model_solve(problem, tol, cross_check, fd_mesh).value


def _relative_gap(values: np.ndarray, reference: float) -> np.ndarray:
    return (values - reference) / abs(reference)


def admissible_offsets(K: float, delta: float, grid: int) -> np.ndarray:
    """``grid`` left endpoints spread symmetrically over the admissible range.

    The range of ``a`` with ``[a, a + delta]`` inside ``(-pi/2sqrtK, pi/2sqrtK)``
    is cut into ``grid + 1`` equal gaps; both ends are excluded.
    """
    half = math.pi / (2.0 * math.sqrt(K))
    lo, hi = -half, half - delta
    return lo + (hi - lo) * np.arange(1, grid + 1) / (grid + 1)


def check_central_minimal(
    K: float,
    n: int,
    delta: float,
    grid: int = 9,
    tol: float = 1e-10,
    slack: float = MONOTONE_SLACK,
) -> CheckReport:
    """Check that the centred interval minimises ``lambda`` over positions ``a``."""
    if K <= 0:
        raise DomainError("central minimality needs K > 0")
    if not delta < math.pi / math.sqrt(K):
        raise DomainError("delta must be below pi / sqrt(K)")
    if grid < 8:
        raise DomainError("use at least 8 sample positions")
    centre = model_eigenvalue(ModelProblem.central(K, n, delta), tol, cross_check=False)
    offsets = admissible_offsets(K, delta, grid)
    values = np.array(
        [model_eigenvalue(ModelProblem(K, n, float(a), delta), tol, cross_check=False) for a in offsets]
    )
    margins = _relative_gap(values, centre) + slack
    violations = [
        {"a": float(a), "lambda": float(v), "centre": centre}
        for a, v, m in zip(offsets, values, margins)
        if m < 0
    ]
    return CheckReport(
        name=f"central_minimal(K={K:g}, n={n}, delta={delta:g})",
        passed=not violations,
        worst_margin=float(np.min(margins)),
        violations=violations,
        details={"a": offsets.tolist(), "lambda": values.tolist(), "centre": centre},
    )


def check_diameter_monotone(
    K: float,
    n: int,
    d_grid: Sequence[float],
    tol: float = 1e-10,
    slack: float = MONOTONE_SLACK,
) -> CheckReport:
    """Check that ``d -> lambda(K, n, d, -d/2)`` does not increase along ``d_grid``."""
    d_grid = [float(d) for d in d_grid]
    if any(b <= a for a, b in zip(d_grid, d_grid[1:])):
        raise DomainError("d_grid must be strictly ascending")
    values = [model_eigenvalue(ModelProblem.central(K, n, d), tol, cross_check=False) for d in d_grid]
    violations = []
    worst = math.inf
    for (d0, v0), (d1, v1) in zip(zip(d_grid, values), zip(d_grid[1:], values[1:])):
        margin = (v0 - v1) / v0 + slack
        worst = min(worst, margin)
        if margin < 0:
            violations.append({"d": [d0, d1], "lambda": [v0, v1]})
    return CheckReport(
        name=f"diameter_monotone(K={K:g}, n={n})",
        passed=not violations,
        worst_margin=worst if math.isfinite(worst) else 0.0,
        violations=violations,
        details={"d": d_grid, "lambda": values},
    )


def sweep_central(K: float, n: int, d_values: Iterable[float], tol: float = 1e-10) -> dict[float, float]:
    """``lambda(K, n, d, -d/2)`` keyed by ``d``."""
    return {float(d): model_eigenvalue(ModelProblem.central(K, n, float(d)), tol, cross_check=False) for d in d_values}
