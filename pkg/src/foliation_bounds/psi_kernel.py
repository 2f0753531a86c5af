"""The auxiliary function psi of the refined Zhong-Yang argument and everything built on it.

    psi(theta) = (4/pi) (theta sec^2 theta + tan theta) - 2 tan theta sec theta

is odd, continuous on ``[-pi/2, pi/2]`` with ``psi(+-pi/2) = +-1``, and solves

    psi'' - 2 tan(theta) psi' - 2 sec^2(theta) psi = -2 tan(theta) sec(theta).

Near ``+-pi/2`` the two halves of the closed form blow up and cancel, so
evaluation switches to the complementary angle ``h = pi/2 - |theta|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np
from scipy import integrate

from .checks import CheckReport
from .errors import DomainError, QuadratureFailure, SeriesOverflow
from .quadrature import adaptive_simpson, gauss_legendre

HALF_PI = 0.5 * math.pi
SERIES_SWITCH = 1e-4
SERIES_CAP = 30
RESIDUAL_DIGITS = 50

# psi(pi/2 - h) = sum c_j h^j
_LIMIT_SERIES = (
    1.0,
    -8.0 / (3.0 * math.pi),
    1.0 / 4.0,
    -16.0 / (45.0 * math.pi),
    1.0 / 24.0,
    -16.0 / (315.0 * math.pi),
)


def _psi_positive(theta: np.ndarray) -> np.ndarray:
    """psi on ``0 <= theta <= pi/2``."""
    out = np.empty_like(theta)
    inner = theta <= 0.25 * math.pi
    t = theta[inner]
    sec2 = 1.0 / np.cos(t) ** 2
    tan = np.tan(t)
    out[inner] = 4.0 / math.pi * (t * sec2 + tan) - 2.0 * tan * np.sqrt(sec2)

    h = HALF_PI - theta[~inner]
    outer = np.empty_like(h)
    near = h < SERIES_SWITCH
    hn = h[near]
    outer[near] = np.polyval(_LIMIT_SERIES[::-1], hn)
    hf = h[~near]
    sin_h = np.sin(hf)
    # same closed form written in h; avoids the sec^2 - sec^2 cancellation
    num = 4.0 * np.sin(0.5 * hf) ** 2 - 4.0 / math.pi * (hf - sin_h * np.cos(hf))
    outer[~near] = num / sin_h**2
    out[~inner] = outer
    return out


def psi(theta):
    """Evaluate psi; accepts a scalar or an array with ``|theta| <= pi/2``."""
    arr = np.asarray(theta, dtype=float)
    if np.any(np.abs(arr) > HALF_PI) or np.any(~np.isfinite(arr)):
        raise DomainError("psi is defined on [-pi/2, pi/2]")
    flat = np.atleast_1d(arr).ravel()
    values = np.sign(flat) * _psi_positive(np.abs(flat))
    if arr.ndim == 0:
        return float(values[0])
    return values.reshape(arr.shape)


def psi_derivatives(theta: float, digits: int = RESIDUAL_DIGITS):
    """``(psi, psi', psi'')`` in ``digits``-digit arithmetic from the hand-differentiated closed form.

    With ``s = sec theta`` and ``t = tan theta``::

        psi'  = (4/pi)(2 s^2 + 2 theta s^2 t) - 2 (s^3 + s t^2)
        psi'' = (4/pi)(6 s^2 t + 4 theta s^2 t^2 + 2 theta s^4) - 2 (5 s^3 t + s t^3)
    """
    if not abs(theta) < HALF_PI:
        raise DomainError("derivatives need |theta| < pi/2")
    with mpmath.workdps(digits):
        th = mpmath.mpf(theta)
        s = mpmath.sec(th)
        t = mpmath.tan(th)
        c = 4 / mpmath.pi
        p0 = c * (th * s**2 + t) - 2 * t * s
        p1 = c * (2 * s**2 + 2 * th * s**2 * t) - 2 * (s**3 + s * t**2)
        p2 = c * (6 * s**2 * t + 4 * th * s**2 * t**2 + 2 * th * s**4) - 2 * (5 * s**3 * t + s * t**3)
        return p0, p1, p2


def psi_ode_residual(theta: float, offset: float = 0.0) -> float:
    """``|psi'' - 2 tan psi' - 2 sec^2 psi + 2 tan sec|`` at ``theta``.

    The individual terms grow like ``sec^4``, so the sum is formed in
    extended precision; ``offset`` shifts psi by a constant and exists for
    fault injection.
    """
    if abs(theta) > HALF_PI - 1e-3:
        raise DomainError("residual is evaluated on |theta| <= pi/2 - 1e-3")
    with mpmath.workdps(RESIDUAL_DIGITS):
        p0, p1, p2 = psi_derivatives(theta)
        p0 = p0 + offset
        th = mpmath.mpf(theta)
        s = mpmath.sec(th)
        t = mpmath.tan(th)
        r = p2 - 2 * t * p1 - 2 * s**2 * p0 + 2 * t * s
        return float(abs(r))


def series_coefficient(k: int) -> Fraction:
    """``(4k-1)!! / (4k)!!``, the k-th coefficient in ``1/sqrt(1+x) + 1/sqrt(1-x) = 2 sum c_k x^{2k}``."""
    if int(k) != k or k < 0:
        raise DomainError("k must be a non-negative integer")
    if k > SERIES_CAP:
        raise SeriesOverflow(f"coefficients are only provided up to k = {SERIES_CAP}")
    num = math.prod(range(4 * k - 1, 0, -2))
    den = math.prod(range(4 * k, 0, -2))
    return Fraction(num, den)


def series_partial_sum(x: float, order: int) -> float:
    """``2 sum_{k <= order} c_k x^{2k}``."""
    return 2.0 * sum(float(series_coefficient(k)) * x ** (2 * k) for k in range(order + 1))


def _psi_squared(theta):
    return psi(theta) ** 2


@lru_cache(maxsize=None)
def barrier_integral(quad_tol: float = 1e-12) -> float:
    """``int_0^{pi/2} psi^2``, by adaptive Gauss-Kronrod (QUADPACK)."""
    if not 1e-12 <= quad_tol <= 1e-6:
        raise DomainError("quad_tol must lie in [1e-12, 1e-6]")
    value, err, info = integrate.quad(
        lambda t: psi(t) ** 2, 0.0, HALF_PI, epsabs=quad_tol, epsrel=0.0, limit=200, full_output=True
    )[:3]
    if err > quad_tol:
        raise QuadratureFailure(f"barrier integral error estimate {err:.2e} exceeds {quad_tol:.0e}")
    return float(value)


def barrier_integral_crosscheck(tol: float = 1e-12, nodes: int = 256) -> dict[str, float]:
    """Barrier integral by adaptive Simpson and by ``nodes``-point Gauss-Legendre."""
    simpson = adaptive_simpson(_psi_squared, 0.0, HALF_PI, tol)
    gl = gauss_legendre(_psi_squared, 0.0, HALF_PI, nodes)
    return {"simpson": simpson, "gauss_legendre": gl, "difference": abs(simpson - gl)}


def asymmetry_parameter(k: float) -> float:
    """``a = (1 - k) / (1 + k)`` for an eigenfunction normalised to ``max = 1, min = -k``."""
    if not 0 < k <= 1:
        raise DomainError("k must lie in (0, 1]")
    return (1.0 - k) / (1.0 + k)


def refined_zhong_yang(d: float, k: float, quad_tol: float = 1e-12) -> float:
    """Lower bound ``((pi + (3/4) a^2 I) / d)^2`` with ``I`` the barrier integral."""
    if not d > 0:
        raise DomainError("d must be positive")
    a = asymmetry_parameter(k)
    if a == 0.0:
        # same expression as the plain Zhong-Yang bound, so equality is exact
        return math.pi**2 / d**2
    return ((math.pi + 0.75 * a * a * barrier_integral(quad_tol)) / d) ** 2


@dataclass(frozen=True)
class Normalization:
    """Rescaling of an eigenfunction with range ``[-k, 1]`` to ``[-1/(1+eps), 1/(1+eps)]``."""

    k: float
    epsilon: float = 0.0

    def __post_init__(self):
        if not 0 < self.k <= 1:
            raise DomainError("k must lie in (0, 1]")
        if self.epsilon < 0:
            raise DomainError("epsilon must be >= 0")

    @property
    def a_eps(self) -> float:
        return (1.0 - self.k) / (1.0 + self.k) / (1.0 + self.epsilon)

    @property
    def delta_angle(self) -> float:
        """Shrink of the angle range: ``sin(pi/2 - delta) = 1 / (1 + eps)``."""
        return HALF_PI - math.asin(1.0 / (1.0 + self.epsilon))

    def rescale(self, u):
        """``v_eps = (u - (1-k)/2) / ((1+eps)(1+k)/2)``."""
        u = np.asarray(u, dtype=float)
        return (u - 0.5 * (1.0 - self.k)) / ((1.0 + self.epsilon) * 0.5 * (1.0 + self.k))


def saturation_profile(lam: float, t, u, du) -> np.ndarray:
    """``|d theta/dt|^2 / lam`` for ``theta = arcsin u``; ``nan`` where ``|u| >= 1``."""
    u = np.asarray(u, dtype=float)
    du = np.asarray(du, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        grad2 = du**2 / ((1.0 - u) * (1.0 + u))
    grad2 = np.where(np.abs(u) < 1.0, grad2, np.nan)
    return grad2 / lam


def gradient_estimate_check(
    lam: float,
    norm: Normalization,
    theta_grid: Sequence[float],
    rtol: float = 1e-9,
) -> CheckReport:
    """Gradient estimate ``|theta'|^2 <= lam (1 + a_eps psi(theta))`` on ``u(t) = -cos(sqrt(lam) t)``.

    Each grid angle is mapped back to the time ``t`` with ``sin theta = u(t)``
    and the angular speed is computed by the chain rule.  For ``a_eps = 0``
    the estimate must be an equality; the report's ``max_deviation`` is the
    largest relative gap to ``lam (1 + a_eps psi)``.
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    theta = np.asarray(theta_grid, dtype=float)
    if np.any(np.abs(theta) >= HALF_PI):
        raise DomainError("theta grid must lie in (-pi/2, pi/2)")
    w = math.sqrt(lam)
    t = np.arccos(-np.sin(theta)) / w
    u = -np.cos(w * t)
    du = w * np.sin(w * t)
    ratio = saturation_profile(lam, t, u, du)
    bound = 1.0 + norm.a_eps * psi(theta)
    gap = bound - ratio
    deviation = float(np.max(np.abs(gap) / bound))
    holds = bool(np.all(gap >= -rtol * bound))
    saturated = norm.a_eps > 0 or deviation <= rtol
    return CheckReport(
        name=f"gradient_estimate(lambda={lam:g})",
        passed=holds and saturated,
        worst_margin=float(np.min(gap / bound)) if norm.a_eps > 0 else rtol - deviation,
        details={"max_deviation": deviation, "a_eps": norm.a_eps, "points": int(theta.size)},
    )
