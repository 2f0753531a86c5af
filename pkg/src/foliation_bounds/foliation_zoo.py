"""Foliations with known first basic eigenvalue and leaf-space diameter.

The fixtures are ground truth for the bounds: Hopf circle actions on odd
spheres, isoparametric foliations of round spheres, and mapping tori (the
equality case of the Zhong-Yang type estimate).  Codimension-one fixtures
carry the radial drift problem whose Neumann spectrum is the basic spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .checks import CheckReport
from .errors import DomainError, InvalidMultiplicity
from .psi_kernel import saturation_profile
from .sl_engine import NEUMANN, SLProblem, singular_pole

ISOPARAMETRIC_G = (1, 2, 3, 4, 6)
RIGIDITY_OFFSET = 1e-3  # keeps 1 - u^2 well away from cancellation


@dataclass(frozen=True)
class FoliationExample:
    name: str
    ambient_dim: int
    K_ambient: float
    known_lambda1B: float
    known_diameter: float
    reduction: Optional[SLProblem] = None
    multiplicity_data: Optional[tuple[int, int, int]] = None
    spectrum: Optional[tuple[float, ...]] = None  # leading basic eigenvalues, when known

    def __post_init__(self):
        if not self.known_lambda1B > 0 or not self.known_diameter > 0:
            raise DomainError("known eigenvalue and diameter must be positive")

    def to_dict(self) -> dict:
        red = None
        if self.reduction is not None:
            r = self.reduction
            red = {
                "interval": [r.interval_left, r.interval_right],
                "drift": r.label,
                "left_endpoint": r.left_endpoint.describe(),
                "right_endpoint": r.right_endpoint.describe(),
            }
        return {
            "name": self.name,
            "ambient_dim": self.ambient_dim,
            "K_ambient": self.K_ambient,
            "known_lambda1B": self.known_lambda1B,
            "known_diameter": self.known_diameter,
            "reduction": red,
            "multiplicity_data": list(self.multiplicity_data) if self.multiplicity_data else None,
            "spectrum": list(self.spectrum) if self.spectrum else None,
        }


def hopf_example(n_complex: int) -> FoliationExample:
    """Circle action on ``S^{2n+1}``; leaf space ``CP^n`` with diameter ``pi/2``."""
    if int(n_complex) != n_complex or n_complex < 1:
        raise DomainError("n_complex must be a positive integer")
    n = int(n_complex)
    return FoliationExample(
        name=f"hopf(S^{2 * n + 1} -> CP^{n})",
        ambient_dim=2 * n + 1,
        K_ambient=1.0,
        known_lambda1B=2.0 * (2 * n + 2),
        known_diameter=math.pi / 2,
    )


def hopf_inequality(n_complex: int, s) -> np.ndarray:
    """``2 (2 - s) n + 4 (1 - 4 s (1 - s))``; non-negative iff the bound holds at ``s``."""
    s = np.asarray(s, dtype=float)
    return 2.0 * (2.0 - s) * n_complex + 4.0 * (1.0 - 4.0 * s * (1.0 - s))


def _cot(x):
    return 1.0 / np.tan(x)


def isoparametric_example(
    g: int, n: int, m1: Optional[int] = None, m2: Optional[int] = None
) -> FoliationExample:
    """Isoparametric foliation of ``S^n`` with ``g`` principal curvatures.

    ``lambda_1^B = g (g + n - 1)`` and the leaf space is an interval of length
    ``pi/g``.  For ``g = 1`` (geodesic spheres) the reduction is
    ``v'' + (n - 1) cot(t) v'`` on ``(0, pi)``; for ``g = 2``
    (``S^{m1} x S^{m2}``, so ``n = m1 + m2 + 1``) it is
    ``v'' + (m1 cot t - m2 tan t) v'`` on ``(0, pi/2)``.  Larger ``g`` have no
    reduction here.
    """
    if g not in ISOPARAMETRIC_G:
        raise DomainError(f"g must be one of {ISOPARAMETRIC_G}, got {g}")
    if int(n) != n or n < 2:
        raise DomainError("n must be an integer >= 2")
    reduction = None
    mult = None
    if g == 1:
        c = float(n - 1)
        reduction = SLProblem(
            0.0,
            math.pi,
            lambda t: c * _cot(t),
            lambda t: -c / np.sin(t) ** 2,
            singular_pole(c),
            singular_pole(c),
            label=f"F(t) = {n - 1} cot(t)",
        )
    elif g == 2:
        if m1 is None or m2 is None:
            raise InvalidMultiplicity("g = 2 needs multiplicities m1, m2")
        if m1 < 1 or m2 < 1 or m1 + m2 + 1 != n:
            raise InvalidMultiplicity(f"g = 2 needs m1 + m2 + 1 = n, got {m1} + {m2} + 1 vs {n}")
        a, b = float(m1), float(m2)
        reduction = SLProblem(
            0.0,
            math.pi / 2,
            lambda t: a * _cot(t) - b * np.tan(t),
            lambda t: -a / np.sin(t) ** 2 - b / np.cos(t) ** 2,
            singular_pole(a),
            singular_pole(b),
            label=f"F(t) = {m1} cot(t) - {m2} tan(t)",
        )
    if m1 is not None and m2 is not None:
        mult = (g, int(m1), int(m2))
    return FoliationExample(
        name=f"isoparametric(g={g}, S^{n})",
        ambient_dim=int(n),
        K_ambient=1.0,
        known_lambda1B=float(g * (g + n - 1)),
        known_diameter=math.pi / g,
        reduction=reduction,
        multiplicity_data=mult,
    )


def isoparametric_inequality(g: int, n: int, s) -> np.ndarray:
    """``[1 - 4 s (1 - s)] g^2 + (g - s)(n - 1)``."""
    s = np.asarray(s, dtype=float)
    return (1.0 - 4.0 * s * (1.0 - s)) * g * g + (g - s) * (n - 1)


def verify_isoparametric_inequality(g: int, n: int, s_grid: Sequence[float]) -> CheckReport:
    s = np.asarray(s_grid, dtype=float)
    if np.any((s <= 0) | (s >= 1)):
        raise DomainError("s grid must lie in (0, 1)")
    values = isoparametric_inequality(g, n, s)
    bad = values < -1e-12
    return CheckReport(
        name=f"isoparametric_inequality(g={g}, n={n})",
        passed=not bool(np.any(bad)),
        worst_margin=float(np.min(values)),
        violations=[{"s": float(x), "value": float(v)} for x, v in zip(s[bad], values[bad])],
    )


def mapping_torus_example(lam: float, ambient_dim: int = 2) -> FoliationExample:
    """Mapping torus with circle leaf space of radius ``1/sqrt(lam)``.

    The basic spectrum is the circle spectrum ``k^2 lam``.  The reduction is
    the drift-free Neumann problem on half the circle, whose nonzero spectrum
    coincides with the even (cosine) modes of the circle.
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    half = math.pi / math.sqrt(lam)
    return FoliationExample(
        name=f"mapping_torus(lambda={lam:.12g})",
        ambient_dim=ambient_dim,
        K_ambient=0.0,
        known_lambda1B=float(lam),
        known_diameter=half,
        reduction=SLProblem(
            0.0,
            half,
            lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            NEUMANN,
            NEUMANN,
            label="F(t) = 0 (half circle)",
        ),
        spectrum=tuple(float(k * k * lam) for k in range(1, 4)),
    )


def rigidity_certificate(
    lam: float, grid_points: int = 101, perturbation: float = 0.0, rtol: float = 1e-9
) -> CheckReport:
    """Saturation ``|grad theta|^2 = lam`` for ``u = -cos(sqrt(lam) t) + perturbation``.

    The grid spans ``(0, pi/sqrt(lam))`` offset from both ends, avoiding the
    critical points of ``u``.  A nonzero ``perturbation`` is a negative control.
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    if grid_points < 2:
        raise DomainError("need at least two grid points")
    w = math.sqrt(lam)
    span = math.pi / w
    t = np.linspace(RIGIDITY_OFFSET * span, (1 - RIGIDITY_OFFSET) * span, grid_points)
    u = -np.cos(w * t) + perturbation
    du = w * np.sin(w * t)
    ratio = saturation_profile(lam, t, u, du)
    dev = np.abs(ratio - 1.0)
    dev = np.where(np.isnan(dev), np.inf, dev)
    worst = float(np.max(dev))
    return CheckReport(
        name=f"rigidity(lambda={lam:.6g})",
        passed=worst <= rtol,
        worst_margin=rtol - worst,
        details={"max_deviation": worst, "points": grid_points, "perturbation": perturbation},
    )


def standard_zoo() -> list[FoliationExample]:
    """Hopf (n = 1, 2, 3), isoparametric for every admissible g, mapping tori (1, 4, pi^2)."""
    zoo = [hopf_example(k) for k in (1, 2, 3)]
    zoo += [isoparametric_example(1, n) for n in (2, 3, 5)]
    zoo += [isoparametric_example(2, m1 + m2 + 1, m1, m2) for m1, m2 in ((1, 1), (1, 2), (2, 2))]
    # g = 3: m in {1, 2, 4, 8}, n = 3m + 1;  g = 4: n = 2(m1 + m2) + 1;  g = 6: m in {1, 2}, n = 6m + 1
    zoo += [isoparametric_example(3, 4, 1, 1), isoparametric_example(3, 7, 2, 2)]
    zoo += [isoparametric_example(4, 5, 1, 1), isoparametric_example(4, 9, 2, 2)]
    zoo += [isoparametric_example(6, 7, 1, 1), isoparametric_example(6, 13, 2, 2)]
    zoo += [mapping_torus_example(lam) for lam in (1.0, 4.0, math.pi**2)]
    return zoo
