"""Closed-form lower bounds for the first nonzero basic eigenvalue.

All bounds take the triple (n, K, d): ambient dimension, Ricci lower bound
``(n - 1) K`` and leaf-space diameter.  ``K`` carries units of 1/length^2 and
``d`` of length; nothing here is rescaled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import DomainError, HierarchyViolation, InvalidInput
from .model_ode import CROSS_CHECK_MESH, ModelProblem, model_solve
from .psi_kernel import refined_zhong_yang

BOUND_NAMES = (
    "zhong_yang",
    "lichnerowicz",
    "li_type",
    "shi_zhang",
    "shi_zhang_optimal",
    "refined_zy",
    "model",
)
BOUNDARY_S = 1.0 - 1e-9
DIAMETER_SLACK = 1e-12
HIERARCHY_RTOL = 1e-7


@dataclass(frozen=True)
class BoundInput:
    n: int
    K: float
    d: float

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 2:
            raise InvalidInput(f"n must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not (math.isfinite(self.K) and self.K >= 0):
            raise InvalidInput(f"K must be finite and >= 0, got {self.K!r}")
        if not (math.isfinite(self.d) and self.d > 0):
            raise InvalidInput(f"d must be finite and positive, got {self.d!r}")
        if self.K > 0 and self.d > self.max_diameter * (1 + DIAMETER_SLACK):
            raise InvalidInput(
                f"d = {self.d} exceeds the Bonnet-Myers bound pi/sqrt(K) = {self.max_diameter}"
            )

    @property
    def max_diameter(self) -> float:
        return math.pi / math.sqrt(self.K) if self.K > 0 else math.inf

    @property
    def at_myers_limit(self) -> bool:
        return self.K > 0 and abs(self.d - self.max_diameter) <= DIAMETER_SLACK * self.max_diameter


@dataclass
class BoundResult:
    name: str
    value: float
    valid: bool = True
    note: str = ""
    s: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class OptimalS:
    A: float
    B: float
    s0: float
    regime: str
    s_star: float
    bound: float
    note: str = ""


def _dimension_note(inp: BoundInput) -> str:
    return "n = 2: case analysis extrapolated from n >= 3" if inp.n == 2 else ""


def zhong_yang(inp: BoundInput) -> BoundResult:
    return BoundResult("zhong_yang", math.pi**2 / inp.d**2, True, "needs Ric >= 0 only")


def lichnerowicz(inp: BoundInput) -> BoundResult:
    valid = inp.K > 0
    return BoundResult(
        "lichnerowicz",
        inp.n * inp.K,
        valid,
        "needs K > 0" if valid else "invalid: K = 0",
    )


def shi_zhang(inp: BoundInput, s: float) -> BoundResult:
    """``4 s (1 - s) pi^2 / d^2 + s (n - 1) K`` for ``0 < s < 1``."""
    if not 0.0 < s < 1.0:
        raise DomainError(f"s must lie in (0, 1), got {s}")
    A = math.pi**2 / inp.d**2
    value = 4.0 * s * (1.0 - s) * A + s * (inp.n - 1) * inp.K
    return BoundResult("shi_zhang", value, True, f"s = {s:.12g}", s=s)


def li_type(inp: BoundInput) -> BoundResult:
    res = shi_zhang(inp, 0.5)
    return BoundResult("li_type", res.value, True, "shi_zhang at s = 1/2", s=0.5)


def optimal_s(inp: BoundInput) -> OptimalS:
    """Maximise ``b(s) = -4 A s^2 + (4A + B) s`` over ``0 < s < 1``.

    The vertex ``s0 = (4A + B) / (8A)`` is interior iff
    ``d < 2 pi / sqrt((n - 1) K)``; otherwise the supremum ``B`` is only
    approached as ``s -> 1`` and ``s_star`` is reported just below 1.
    """
    A = math.pi**2 / inp.d**2
    B = (inp.n - 1) * inp.K
    s0 = (4.0 * A + B) / (8.0 * A)
    notes = [_dimension_note(inp)] if inp.n == 2 else []
    if s0 < 1.0:
        bound = (4.0 * A + B) ** 2 / (16.0 * A)
        return OptimalS(A, B, s0, "interior", s0, bound, "; ".join(notes))
    notes.append("supremum at s -> 1 not attained; reporting (n-1)K")
    return OptimalS(A, B, s0, "boundary", BOUNDARY_S, B, "; ".join(notes))


def optimal_bound_expansion(inp: BoundInput) -> float:
    """``pi^2/d^2 + (n-1)K/2 + (n-1)^2 K^2 d^2 / (16 pi^2)``, the interior optimum written out."""
    return (
        math.pi**2 / inp.d**2
        + 0.5 * (inp.n - 1) * inp.K
        + (inp.n - 1) ** 2 * inp.K**2 * inp.d**2 / (16.0 * math.pi**2)
    )


def shi_zhang_optimal(inp: BoundInput) -> BoundResult:
    opt = optimal_s(inp)
    note = f"{opt.regime} regime, s0 = {opt.s0:.6g}"
    if opt.note:
        note += "; " + opt.note
    return BoundResult("shi_zhang_optimal", opt.bound, True, note, s=opt.s_star)


def model_bound(inp: BoundInput, tol: float = 1e-10, fd_mesh: int = CROSS_CHECK_MESH) -> BoundResult:
    """``lambda(K, n, d, -d/2)`` from the one-dimensional model (needs ``K > 0``, ``d < pi/sqrt K``)."""
    sol = model_solve(ModelProblem.central(inp.K, inp.n, inp.d), tol, True, fd_mesh)
    return BoundResult(
        "model",
        sol.value,
        True,
        "first Neumann eigenvalue of the centred model",
        diagnostics={
            "method": "shooting",
            "mesh": fd_mesh,
            "residual": sol.spectrum.residual,
            "fd_value": sol.fd_value,
        },
    )


def best_bound(
    inp: BoundInput,
    use_model: bool = False,
    tol: float = 1e-10,
    k: Optional[float] = None,
    fd_mesh: int = CROSS_CHECK_MESH,
) -> list[BoundResult]:
    """Every bound for ``inp``, sorted by decreasing value.

    ``k`` (minus the minimum of the eigenfunction normalised to max 1) enables
    the refined Zhong-Yang entry.  The model entry is skipped at the
    Bonnet-Myers limit ``d = pi/sqrt(K)``, where Lichnerowicz already gives the
    answer.  Raises :class:`HierarchyViolation` if the computed values break
    ``model >= shi_zhang_optimal >= li_type`` or ``model >= zhong_yang``.
    """
    results = [
        zhong_yang(inp),
        lichnerowicz(inp),
        li_type(inp),
        shi_zhang_optimal(inp),
    ]
    if k is not None:
        results.append(
            BoundResult("refined_zy", refined_zhong_yang(inp.d, k), True, f"k = {k:.12g}")
        )
    if use_model:
        if inp.K == 0:
            results[0].note += "; model with K = 0 coincides with zhong_yang"
        elif inp.at_myers_limit:
            lich = results[1]
            lich.note += "; d = pi/sqrt(K): model skipped, lichnerowicz dominates"
        else:
            results.append(model_bound(inp, tol, fd_mesh))

    by_name = {r.name: r for r in results}
    model = by_name.get("model")
    if model is not None:
        slack = HIERARCHY_RTOL * model.value
        chain = [
            ("model", "shi_zhang_optimal"),
            ("shi_zhang_optimal", "li_type"),
            ("model", "zhong_yang"),
        ]
        for hi, lo in chain:
            if by_name[hi].value < by_name[lo].value - slack:
                raise HierarchyViolation(
                    f"{hi} = {by_name[hi].value!r} < {lo} = {by_name[lo].value!r} for {inp}"
                )
    results.sort(key=lambda r: (-r.value, BOUND_NAMES.index(r.name)))
    return results
