from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class CheckReport:
    """Outcome of a numerical verification.

    ``worst_margin`` is signed: non-negative means the check held with that much
    room to spare, negative means it failed by that amount.
    """

    name: str
    passed: bool
    worst_margin: float
    violations: list[dict[str, Any]] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed
