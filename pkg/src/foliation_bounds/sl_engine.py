"""Neumann eigensolvers for one-dimensional drift operators.

The operator is ``v'' + F(x) v' = -lambda v`` on ``[left, right]`` with
``v' = 0`` at regular ends.  An end may instead be a regular singular point
where ``F ~ m / t`` with ``t`` the distance to the end measured into the
interval (``cot`` and ``tan`` drifts of rotationally symmetric reductions);
there the bounded Frobenius branch ``v = v(0) (1 - lambda t^2 / (2 (m + 1)) + ...)``
is selected.

Two independent routes are provided:

* :func:`solve_neumann_shooting` -- Pruefer phase shooting from both ends to the
  midpoint, eigenvalues located by bracketing and Brent's method.
* :func:`solve_neumann_fd` -- a conservative second-order finite-difference
  discretisation of the self-adjoint form ``(w v')' = -lambda w v`` with
  ``w = exp(int F)``, solved as a symmetric tridiagonal eigenproblem.

The two share nothing except the :class:`SLProblem` description, so their
agreement is a meaningful check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import solve_ivp
from scipy.linalg import LinAlgError, eigh_tridiagonal
from scipy.optimize import brentq

from .errors import (
    BracketFailure,
    DomainError,
    InvalidEndpoint,
    NonConvergence,
    StiffIntegration,
)

__all__ = [
    "EndpointKind",
    "NEUMANN",
    "SLProblem",
    "SpectrumResult",
    "singular_pole",
    "solve_neumann_fd",
    "solve_neumann_fd_extrapolated",
    "solve_neumann_shooting",
]

Drift = Callable[[np.ndarray], np.ndarray]

# Relative offset of the first integration point from a singular endpoint.
FROBENIUS_OFFSET = 1e-6
SCAN_SUBDIVISIONS = 200
MAX_WINDOW_DOUBLINGS = 12
MAX_COUNT = 10
MIN_MESH = 64
_GL_NODES, _GL_WEIGHTS = leggauss(8)


@dataclass(frozen=True)
class EndpointKind:
    """Classification of an interval end: ``neumann_regular`` or ``singular_pole``."""

    kind: str = "neumann_regular"
    multiplicity: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("neumann_regular", "singular_pole"):
            raise DomainError(f"unknown endpoint kind {self.kind!r}")

    @property
    def is_singular(self) -> bool:
        return self.kind == "singular_pole"

    def validate(self) -> None:
        if self.is_singular:
            m = self.multiplicity
            if m is None or not np.isfinite(m) or m <= 0:
                raise InvalidEndpoint(
                    f"singular endpoint needs a positive multiplicity, got {m!r}"
                )

    def describe(self) -> str:
        if self.is_singular:
            return f"singular_pole({self.multiplicity:g})"
        return self.kind


NEUMANN = EndpointKind()


def singular_pole(multiplicity: float) -> EndpointKind:
    return EndpointKind("singular_pole", float(multiplicity))


@dataclass(frozen=True)
class SLProblem:
    """Drift eigenproblem ``v'' + F v' = -lambda v`` with Neumann-type ends.

    ``drift`` must accept numpy arrays and scalars.  ``label`` is a free-form
    description used in reports (function handles do not serialise).
    """

    interval_left: float
    interval_right: float
    drift: Drift
    drift_derivative: Optional[Drift] = None
    left_endpoint: EndpointKind = NEUMANN
    right_endpoint: EndpointKind = NEUMANN
    label: str = ""

    def __post_init__(self):
        if not (np.isfinite(self.interval_left) and np.isfinite(self.interval_right)):
            raise DomainError("interval ends must be finite")
        if not self.interval_left < self.interval_right:
            raise DomainError(
                f"empty interval [{self.interval_left}, {self.interval_right}]"
            )

    @property
    def length(self) -> float:
        return self.interval_right - self.interval_left

    def validate(self) -> None:
        self.left_endpoint.validate()
        self.right_endpoint.validate()


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenfunction_samples: list[np.ndarray]  # each an (N, 2) array of (x, v(x))
    method: str
    residual: float
    mesh_size: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def first_nonzero(self) -> float:
        return float(self.eigenvalues[1])


def _check_count(count: int) -> None:
    if not 1 <= count <= MAX_COUNT:
        raise DomainError(f"count must be in [1, {MAX_COUNT}], got {count}")


# ---------------------------------------------------------------------------
# finite differences


def _segment_integrals(F: Drift, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gauss-Legendre integrals of ``F`` over ``[a, b]`` (broadcast); nodes are interior."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    pts = mid[..., None] + half[..., None] * _GL_NODES
    return half * np.sum(np.asarray(F(pts), dtype=float) * _GL_WEIGHTS, axis=-1)


def _fd_coefficients(problem: SLProblem, mesh: int):
    """Flux coefficients ``w(x_{i+1/2})``, dual-cell masses and node coordinates.

    ``w`` is only ever evaluated strictly inside the interval, so singular
    ends need no special stencil: the dual cell of an end node integrates
    ``w ~ t^m`` exactly enough and reproduces the Frobenius condition
    ``2 (m + 1) (v_1 - v_0) / h^2 = -lambda v_0``.
    """
    L, R = problem.interval_left, problem.interval_right
    h = (R - L) / mesh
    y = L + 0.5 * h * np.arange(2 * mesh + 1)  # half-step grid, y[2i] = x_i
    F = problem.drift

    seg = _segment_integrals(F, y[:-1], y[1:])
    # log w at y[1..2N-1], anchored at y[1]; the end points y[0], y[2N] are never needed
    logw = np.empty(2 * mesh + 1)
    logw[0] = logw[-1] = np.nan
    logw[1] = 0.0
    logw[2:-1] = np.cumsum(seg[1:-1])
    if not np.all(np.isfinite(logw[1:-1])):
        raise NonConvergence("drift is not integrable on the interior of the interval")

    # log w at the quadrature nodes of every segment
    a, b = y[:-1], y[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * _GL_NODES  # (2N, q)
    log_nodes = np.empty_like(nodes)
    anchor = np.broadcast_to(a[1:, None], nodes[1:].shape)
    log_nodes[1:] = logw[1:-1, None] + _segment_integrals(F, anchor, nodes[1:])
    log_nodes[0] = logw[1] - _segment_integrals(
        F, nodes[0], np.full_like(nodes[0], y[1])
    )

    shift = max(np.max(logw[1:-1]), np.max(log_nodes))
    flux = np.exp(logw[1::2] - shift)  # w(y_{2i+1}), i = 0..N-1
    seg_mass = half * np.sum(np.exp(log_nodes - shift) * _GL_WEIGHTS, axis=1)
    mass = np.zeros(mesh + 1)
    mass[:-1] += seg_mass[0::2]
    mass[1:] += seg_mass[1::2]
    x = L + h * np.arange(mesh + 1)
    return x, h, flux, mass


def solve_neumann_fd(problem: SLProblem, count: int = 2, mesh: int = 1024) -> SpectrumResult:
    """Smallest ``count`` eigenvalues of the second-order finite-difference operator.

    ``mesh`` is the number of cells.  Eigenvalue error is ``O(h^2)``, which is
    what :func:`solve_neumann_fd_extrapolated` relies on.
    """
    problem.validate()
    _check_count(count)
    if mesh < MIN_MESH:
        raise DomainError(f"mesh must be >= {MIN_MESH}, got {mesh}")
    if count > mesh:
        raise DomainError("count exceeds the number of grid nodes")

    x, h, flux, mass = _fd_coefficients(problem, mesh)
    if np.any(mass <= 0) or np.any(flux <= 0):
        raise NonConvergence("weight underflow; the drift is too strong for this mesh")
    stiff_diag = np.zeros(mesh + 1)
    stiff_diag[:-1] += flux / h
    stiff_diag[1:] += flux / h
    root_mass = np.sqrt(mass)
    diag = stiff_diag / mass
    off = -(flux / h) / (root_mass[:-1] * root_mass[1:])
    try:
        vals, vecs = eigh_tridiagonal(
            diag, off, select="i", select_range=(0, count - 1), lapack_driver="stemr"
        )
    except (LinAlgError, ValueError) as exc:
        raise NonConvergence(f"tridiagonal eigensolve failed: {exc}") from exc

    order = np.argsort(vals)
    vals = vals[order]
    vecs = vecs[:, order] / root_mass[:, None]

    samples = []
    residual = 0.0
    for j in range(count):
        v = vecs[:, j]
        v = v / v[np.argmax(np.abs(v))]
        if v[0] < 0:
            v = -v
        # generalized residual (S v - lambda M v) / M at every node
        Sv = stiff_diag * v
        Sv[:-1] -= flux / h * v[1:]
        Sv[1:] -= flux / h * v[:-1]
        r = np.max(np.abs(Sv / mass - vals[j] * v)) / max(1.0, abs(vals[j]))
        residual = max(residual, float(r))
        samples.append(np.column_stack([x, v]))

    return SpectrumResult(
        eigenvalues=vals,
        eigenfunction_samples=samples,
        method="finite_difference",
        residual=residual,
        mesh_size=mesh,
    )


def solve_neumann_fd_extrapolated(
    problem: SLProblem, count: int = 2, mesh: int = 2048
) -> SpectrumResult:
    """Richardson extrapolation ``(4 lambda_{2N} - lambda_N) / 3`` of :func:`solve_neumann_fd`."""
    coarse = solve_neumann_fd(problem, count, mesh)
    fine = solve_neumann_fd(problem, count, 2 * mesh)
    extrapolated = (4.0 * fine.eigenvalues - coarse.eigenvalues) / 3.0
    extrapolated[0] = fine.eigenvalues[0] if abs(fine.eigenvalues[0]) > 0 else 0.0
    fine.eigenvalues = extrapolated
    fine.diagnostics = {
        "coarse": coarse.eigenvalues.tolist(),
        "fine_mesh": 2 * mesh,
        "richardson_correction": (extrapolated - coarse.eigenvalues).tolist(),
    }
    return fine


# ---------------------------------------------------------------------------
# shooting


def _frobenius_start(endpoint: EndpointKind, lam: float, t: float) -> tuple[float, float]:
    """``(v, dv/dt)`` of the bounded branch at distance ``t`` into the interval."""
    if not endpoint.is_singular or t == 0.0:
        return 1.0, 0.0
    m = endpoint.multiplicity
    return 1.0 - lam * t * t / (2.0 * (m + 1.0)), -lam * t / (m + 1.0)


def _solve(rhs, span, y0, tol, dense=False):
    sol = solve_ivp(
        rhs, span, y0, method="RK45", rtol=tol, atol=tol, dense_output=dense
    )
    if sol.status != 0:
        msg = str(sol.message)
        if "step size" in msg:
            raise StiffIntegration(f"integration over {span} failed: {msg}")
        raise NonConvergence(f"integration over {span} failed: {msg}")
    return sol


class _Shooter:
    """Pruefer phase mismatch between left and right integrations at the midpoint."""

    def __init__(self, problem: SLProblem, integrator_tol: float):
        self.problem = problem
        self.tol = integrator_tol
        L, R = problem.interval_left, problem.interval_right
        t0 = FROBENIUS_OFFSET * problem.length
        self.t_left = t0 if problem.left_endpoint.is_singular else 0.0
        self.t_right = t0 if problem.right_endpoint.is_singular else 0.0
        self.x_left = L + self.t_left
        self.x_right = R - self.t_right
        self.x_mid = 0.5 * (L + R)
        self._cache: dict[float, float] = {}

    def _phase_rhs(self, lam):
        F = self.problem.drift

        def rhs(x, th):
            s = math.sin(th[0])
            c = math.cos(th[0])
            return [c * c + float(F(x)) * s * c + lam * s * s]

        return rhs

    def start_phases(self, lam):
        v, dv = _frobenius_start(self.problem.left_endpoint, lam, self.t_left)
        th_left = math.atan2(v, dv)
        v, dv = _frobenius_start(self.problem.right_endpoint, lam, self.t_right)
        th_right = math.atan2(v, -dv)
        return th_left, th_right

    def mismatch(self, lam: float) -> float:
        """``theta_left(mid) - theta_right(mid)``; equals ``k pi`` at the k-th eigenvalue."""
        if lam in self._cache:
            return self._cache[lam]
        th_l, th_r = self.start_phases(lam)
        rhs = self._phase_rhs(lam)
        left = _solve(rhs, (self.x_left, self.x_mid), [th_l], self.tol)
        right = _solve(rhs, (self.x_right, self.x_mid), [th_r], self.tol)
        value = float(left.y[0, -1] - right.y[0, -1])
        self._cache[lam] = value
        return value

    def eigenfunction(self, lam: float, samples: int, tol: float) -> tuple[np.ndarray, float]:
        """Samples ``(x, v)`` on a uniform grid, and the max ODE residual there."""
        problem = self.problem
        F = problem.drift

        def rhs(x, y):
            return [y[1], -float(F(x)) * y[1] - lam * y[0]]

        v, dv = _frobenius_start(problem.left_endpoint, lam, self.t_left)
        left = _solve(rhs, (self.x_left, self.x_mid), [v, dv], tol, dense=True)
        v, dv = _frobenius_start(problem.right_endpoint, lam, self.t_right)
        right = _solve(rhs, (self.x_right, self.x_mid), [v, -dv], tol, dense=True)

        vl, zl = left.y[:, -1]
        vr, zr = right.y[:, -1]
        scale = (vl * vr + zl * zr) / (vr * vr + zr * zr)

        L, R = problem.interval_left, problem.interval_right
        x_mid, x_lo, x_hi = self.x_mid, self.x_left, self.x_right

        def evaluate(x):
            x = np.asarray(x, dtype=float)
            out = np.empty((2, x.size))
            on_left = x <= x_mid
            out[:, on_left] = left.sol(np.clip(x[on_left], x_lo, x_mid))
            out[:, ~on_left] = scale * right.sol(np.clip(x[~on_left], x_mid, x_hi))
            # points closer to a pole than the start offset use the series branch
            for endpoint, t_end, sign, factor, start in (
                (problem.left_endpoint, self.t_left, 1.0, 1.0, L),
                (problem.right_endpoint, self.t_right, -1.0, scale, R),
            ):
                if not endpoint.is_singular:
                    continue
                t = np.abs(x - start)
                for i in np.flatnonzero(t < t_end):
                    v0, dv0 = _frobenius_start(endpoint, lam, float(t[i]))
                    out[:, i] = factor * np.array([v0, sign * dv0])
            return out

        x = np.linspace(L, R, samples)
        v_s, z_s = evaluate(x)
        norm = v_s[np.argmax(np.abs(v_s))]
        if v_s[0] < 0:
            norm = -abs(norm)
        else:
            norm = abs(norm)
        v_s = v_s / norm

        # v'' from a fourth-order difference of v' on a quarter-spaced stencil,
        # which never reaches the end nodes
        hx = 0.25 * (x[1] - x[0])
        xi = x[1:-1]
        z = [evaluate(xi + j * hx)[1] / norm for j in (-2, -1, 1, 2)]
        dz = (z[0] - 8 * z[1] + 8 * z[2] - z[3]) / (12 * hx)
        res = np.abs(dz + F(xi) * z_s[1:-1] / norm + lam * v_s[1:-1])
        return np.column_stack([x, v_s]), float(np.max(res))


def _max_abs_drift_derivative(problem: SLProblem) -> float:
    L, R = problem.interval_left, problem.interval_right
    ell = problem.length
    # central 90% only: near a pole (or a regular end hugging one) F' is unbounded
    lo, hi = L + 0.05 * ell, R - 0.05 * ell
    xs = np.linspace(lo, hi, 401)
    if problem.drift_derivative is not None:
        dF = np.asarray(problem.drift_derivative(xs), dtype=float)
    else:
        dF = np.gradient(np.asarray(problem.drift(xs), dtype=float), xs)
    return float(np.max(np.abs(dF)))


def scan_window(problem: SLProblem) -> float:
    """Upper end of the initial eigenvalue scan window."""
    ell = problem.length
    return 4.0 * (math.pi / ell) ** 2 * (1.0 + _max_abs_drift_derivative(problem) * ell**2)


def solve_neumann_shooting(
    problem: SLProblem,
    count: int = 2,
    tol: float = 1e-10,
    *,
    samples: int = 1001,
    integrator_tol: Optional[float] = None,
) -> SpectrumResult:
    """Smallest ``count`` Neumann eigenvalues by Pruefer-phase shooting.

    The phase mismatch at the midpoint is strictly increasing in ``lambda``
    and equals ``k pi`` at the k-th eigenvalue.  The scan window is cut into
    200 subdivisions; the bracket for each ``k`` is found by bisection over
    those grid points and refined with Brent's method.
    """
    problem.validate()
    _check_count(count)
    if not 1e-12 <= tol <= 1e-6:
        raise DomainError(f"tol must lie in [1e-12, 1e-6], got {tol}")
    itol = integrator_tol if integrator_tol is not None else tol / 10.0
    itol = max(itol, 1e-13)
    shooter = _Shooter(problem, itol)

    window = scan_window(problem)
    target_top = (count - 1) * math.pi
    for _ in range(MAX_WINDOW_DOUBLINGS):
        if shooter.mismatch(window) > target_top:
            break
        window *= 2.0
    else:
        raise BracketFailure(
            f"phase mismatch never reached {count - 1} pi below lambda = {window:g}"
        )
    grid = np.linspace(0.0, window, SCAN_SUBDIVISIONS + 1)

    eigenvalues = []
    for k in range(count):
        target = k * math.pi
        if k == 0 and abs(shooter.mismatch(0.0)) <= 1e-9:
            eigenvalues.append(0.0)
            continue
        lo, hi = 0, SCAN_SUBDIVISIONS
        if shooter.mismatch(grid[hi]) < target:
            raise BracketFailure(f"no sign change for mode {k} in the scan window")
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if shooter.mismatch(grid[mid]) >= target:
                hi = mid
            else:
                lo = mid
        a, b = grid[lo], grid[hi]
        fa = shooter.mismatch(a) - target
        fb = shooter.mismatch(b) - target
        if fa == 0.0:
            lam = a
        elif fb == 0.0:
            lam = b
        elif fa * fb > 0:
            raise BracketFailure(f"mode {k}: mismatch does not change sign on [{a}, {b}]")
        else:
            lam = brentq(
                lambda s: shooter.mismatch(s) - target,
                a,
                b,
                xtol=1e-3 * tol * b,
                rtol=max(tol / 10.0, 4.5e-16),
                maxiter=200,
            )
        eigenvalues.append(float(lam))

    vals = np.array(eigenvalues)
    if np.any(np.diff(vals) <= 0):
        raise NonConvergence(f"eigenvalues not strictly ascending: {vals}")

    sample_tol = min(itol, 1e-12)
    eigfuns = []
    residual = 0.0
    for lam in vals:
        pts, res = shooter.eigenfunction(lam, samples, sample_tol)
        eigfuns.append(pts)
        residual = max(residual, res)

    return SpectrumResult(
        eigenvalues=vals,
        eigenfunction_samples=eigfuns,
        method="shooting",
        residual=residual,
        mesh_size=samples,
        diagnostics={
            "scan_window": window,
            "integrator_tol": itol,
            "mismatch_evaluations": len(shooter._cache),
        },
    )
