"""Two independent quadrature rules used to cross-check the barrier integral."""

from __future__ import annotations

from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import QuadratureFailure


def gauss_legendre(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, nodes: int = 256) -> float:
    x, w = leggauss(nodes)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return float(half * np.dot(w, f(mid + half * x)))


def adaptive_simpson(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-12,
    max_depth: int = 40,
    max_intervals: int = 200_000,
) -> float:
    """Adaptive Simpson with the usual ``|S2 - S1| <= 15 tol`` acceptance and Richardson correction.

    Tolerance is split in half at every bisection.  Raises
    :class:`QuadratureFailure` when the depth or interval budget runs out.
    """
    fa, fm, fb = f(np.array([a, 0.5 * (a + b), b]))
    whole = (b - a) / 6.0 * (fa + 4 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = 0.0
    processed = 0
    while stack:
        lo, hi, flo, fmid, fhi, est, eps, depth = stack.pop()
        processed += 1
        if processed > max_intervals:
            raise QuadratureFailure("adaptive Simpson exceeded its interval budget")
        mid = 0.5 * (lo + hi)
        fl, fr = f(np.array([0.5 * (lo + mid), 0.5 * (mid + hi)]))
        left = (mid - lo) / 6.0 * (flo + 4 * fl + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4 * fr + fhi)
        delta = left + right - est
        if abs(delta) <= 15 * eps:
            total += left + right + delta / 15.0
        elif depth >= max_depth:
            raise QuadratureFailure(f"adaptive Simpson hit depth {max_depth} near {mid}")
        else:
            stack.append((lo, mid, flo, fl, fmid, left, 0.5 * eps, depth + 1))
            stack.append((mid, hi, fmid, fr, fhi, right, 0.5 * eps, depth + 1))
    return float(total)
