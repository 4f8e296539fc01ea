#!/usr/bin/env python3
"""
Real root isolation for polynomials on a half line.

Coefficient vectors are ascending (c[k] multiplies x**k). Low degrees go
through a Sturm sequence with bisection and Brent polishing; moderate
degrees fall back to companion-matrix eigenvalues; beyond that the caller is
told there is nothing reliable to return and relies on its grids.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np
import numpy.polynomial.polynomial as poly
from scipy.optimize import brentq

from secalloc.errors import RootSolveError

logger = logging.getLogger(__name__)

# Coefficients below this fraction of the largest one are treated as zero.
TRIM_RTOL = 1e-13


def trim(c: Sequence[float], rtol: float = TRIM_RTOL) -> np.ndarray:
    """Drop negligible trailing coefficients."""
    c = np.asarray(c, dtype=float)
    if not len(c):
        return np.zeros(1)
    scale = np.max(np.abs(c))
    if scale == 0:
        return np.zeros(1)
    return poly.polytrim(c, rtol * scale)


def sign_variations(values: Sequence[float]) -> int:
    """Number of sign changes, ignoring zeros."""
    signs = [np.sign(v) for v in values if v != 0]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def sturm_sequence(c: Sequence[float]) -> List[np.ndarray]:
    c = trim(c)
    seq = [c / np.max(np.abs(c))]
    if len(c) == 1:
        return seq
    derivative = poly.polyder(seq[0])
    seq.append(derivative / np.max(np.abs(derivative)))
    while len(seq[-1]) > 1:
        _, rem = poly.polydiv(seq[-2], seq[-1])
        rem = trim(-rem)
        if not np.any(rem):
            break
        seq.append(rem / np.max(np.abs(rem)))
    return seq


def _variations_at(seq: List[np.ndarray], x: float) -> int:
    return sign_variations([poly.polyval(x, p) for p in seq])


def cauchy_bound(c: Sequence[float]) -> float:
    """Every real root lies in [-bound, bound]."""
    c = trim(c)
    if len(c) == 1:
        return 0.0
    return 1.0 + float(np.max(np.abs(c[:-1])) / abs(c[-1]))


def isolate_real_roots(c: Sequence[float], lo: float = 0.0, hi: Optional[float] = None,
                       width: float = 1e-12) -> List[float]:
    """Distinct real roots in [lo, hi] via Sturm counting and bisection."""
    c = trim(c)
    if len(c) == 1:
        return []
    hi = cauchy_bound(c) if hi is None else hi
    if hi <= lo:
        return []

    seq = sturm_sequence(c)
    roots = []
    if poly.polyval(lo, c) == 0:
        roots.append(lo)

    stack = [(lo, hi, _variations_at(seq, lo), _variations_at(seq, hi))]
    while stack:
        a, b, va, vb = stack.pop()
        count = va - vb
        if count <= 0:
            continue
        if count == 1 or b - a <= width * max(1.0, abs(b)):
            roots.append(_polish(c, a, b))
            continue
        mid = 0.5 * (a + b)
        vm = _variations_at(seq, mid)
        stack.append((a, mid, va, vm))
        stack.append((mid, b, vm, vb))

    return sorted(set(roots))


def _polish(c: np.ndarray, a: float, b: float) -> float:
    fa, fb = poly.polyval(a, c), poly.polyval(b, c)
    if fa == 0:
        # Root at the open end of (a, b]; step inside.
        a = a + 1e-9 * (b - a)
        fa = poly.polyval(a, c)
    if fb == 0:
        return b
    if fa * fb < 0:
        try:
            return brentq(poly.polyval, a, b, args=(c,), xtol=1e-14, rtol=4 * np.finfo(float).eps)
        except (RuntimeError, ValueError) as e:
            raise RootSolveError(f"Brent refinement failed on [{a}, {b}]: {str(e)}") from e
    # Even-multiplicity root; the bracket is already narrow.
    return 0.5 * (a + b)


def companion_real_roots(c: Sequence[float], lo: float = 0.0, hi: float = np.inf,
                         imag_rtol: float = 1e-7) -> List[float]:
    """Real roots in [lo, hi] from companion-matrix eigenvalues."""
    c = trim(c)
    if len(c) == 1:
        return []
    roots = poly.polyroots(c)
    real = [float(r.real) for r in roots if abs(r.imag) <= imag_rtol * max(1.0, abs(r))]
    return sorted(r for r in real if lo <= r <= hi)


def real_roots(c: Sequence[float], lo: float = 0.0, hi: Optional[float] = None,
               sturm_max_degree: int = 16, poly_max_degree: int = 48) -> List[float]:
    """Real roots in [lo, hi], choosing the method by degree."""
    c = trim(c)
    degree = len(c) - 1
    if degree <= 0:
        return []
    if degree <= sturm_max_degree:
        return isolate_real_roots(c, lo, hi)
    if degree <= poly_max_degree:
        return companion_real_roots(c, lo, np.inf if hi is None else hi)
    logger.debug(f"Skipping root solve for degree {degree} polynomial")
    return []


def ratio_stationary_points(num: Sequence[float], den: Sequence[float], **limits: int) -> List[float]:
    """Points x >= 0 where d/dx [num(x)/den(x)] vanishes."""
    num, den = trim(num), trim(den)
    cross = poly.polysub(poly.polymul(poly.polyder(num), den), poly.polymul(num, poly.polyder(den)))
    return real_roots(cross, 0.0, None, **limits)
