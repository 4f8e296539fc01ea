#!/usr/bin/env python3
"""
Closed-loop consensus dynamics.

Builds L̄ = L + Θ for a network and answers the single-input single-output
questions the impact analysis needs for every (output, attack) vertex pair:
numerator polynomial of G(s) = e_out⊤(sI + L̄)⁻¹e_a, relative degree and
finite invariant zeros. Also implements the uniform self-loop offset that
moves every finite invariant zero into the open left half-plane.

Numerators are stored factored (gain and zeros). The gain is the first
nonzero Markov parameter and the zeros are the finite generalized
eigenvalues of the Rosenbrock pencil, so nothing here depends on a
monomial-basis fit.
"""

import logging
import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Hashable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from numpy.polynomial import polynomial as npoly

from secalloc.config import DynamicsSettings
from secalloc.errors import NumericalError, RootSolveError
from secalloc.graph import Network, distance_matrix, laplacian

logger = logging.getLogger(__name__)

# Relative eigenvalue floor for the positive-definiteness check on L̄.
PD_RTOL = 1e-12
# A zero this close to a pole (relative to the spectral radius) cancels it.
POLE_MATCH_RTOL = 1e-8


@dataclass(frozen=True)
class Numerator:
    """P(s) = gain · Π (s − zeros[j]) for one vertex pair."""

    gain: float
    zeros: np.ndarray
    relative_degree: int

    @property
    def degree(self) -> int:
        return len(self.zeros)

    @property
    def coeffs(self) -> np.ndarray:
        """Ascending real coefficients."""
        if self.degree == 0:
            return np.array([self.gain])
        return self.gain * np.real(npoly.polyfromroots(self.zeros))

    def evaluate(self, s: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
        s = np.asarray(s, dtype=complex)
        value = np.full(s.shape, self.gain, dtype=complex)
        for z in self.zeros:
            value = value * (s - z)
        return value


class ClosedLoopSystem:
    """L̄ with its spectrum, characteristic polynomial and a numerator memo.

    Everything except the numerator cache is fixed at construction; the
    cache is guarded by a lock and always returns the first object stored
    under a key.
    """

    def __init__(self, net: Network, lbar: np.ndarray, eigenvalues: np.ndarray,
                 eigenvectors: np.ndarray, charpoly: np.ndarray,
                 distances: np.ndarray, settings: DynamicsSettings):
        self.net = net
        self.lbar = lbar
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors
        self.charpoly = charpoly
        self.distances = distances
        self.settings = settings
        self._numerators: Dict[Tuple[int, int], Numerator] = {}
        self._memo: Dict[Hashable, Any] = {}
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self.net.n

    @property
    def scale(self) -> float:
        """Spectral norm ‖L̄‖ (largest eigenvalue)."""
        return float(self.eigenvalues[-1])

    @property
    def delta(self) -> np.ndarray:
        return np.asarray(self.net.delta)

    def numerator_factors(self, out: int, a: int) -> Numerator:
        key = (min(out, a), max(out, a))
        with self._lock:
            cached = self._numerators.get(key)
        if cached is not None:
            return cached

        computed = _factor_numerator(self, key[1], key[0])
        with self._lock:
            return self._numerators.setdefault(key, computed)

    def cached_pairs(self) -> int:
        with self._lock:
            return len(self._numerators)

    def memo(self, key: Hashable, factory: Callable[[], Any]) -> Any:
        """Per-system memo for helpers built on top of this system."""
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        value = factory()
        with self._lock:
            return self._memo.setdefault(key, value)


@dataclass
class ZeroReport:
    pairs: List[Tuple[int, int]]
    relative_degrees: List[int]
    zeros: List[np.ndarray]
    max_real_part: float = field(default=float("-inf"))

    def to_records(self) -> List[dict]:
        """Diagnostic dump with 1-based vertices."""
        records = []
        for (a, m), r, zeros in zip(self.pairs, self.relative_degrees, self.zeros):
            records.append({
                "pair": [a + 1, m + 1],
                "relative_degree": r,
                "zeros": [[float(z.real), float(z.imag)] for z in zeros],
            })
        return records


def faddeev_leverrier(matrix: Union[np.ndarray, Sequence[Sequence[float]]],
                      exact: bool = False) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Characteristic polynomial of det(sI + M) and adjugate terms.

    Returns ascending coefficients c with det(sI + M) = Σ c[k] s^k and
    matrices B with adj(sI + M) = Σ B[k] s^k. With exact=True the recurrence
    runs on Fraction entries (object arrays).
    """
    if exact:
        a = -np.array([[Fraction(x) for x in row] for row in np.asarray(matrix, dtype=float)], dtype=object)
        one, zero = Fraction(1), Fraction(0)
    else:
        a = -np.asarray(matrix, dtype=float)
        one, zero = 1.0, 0.0

    n = a.shape[0]
    identity = np.full((n, n), zero, dtype=a.dtype)
    np.fill_diagonal(identity, one)

    coeffs = [zero] * (n + 1)
    coeffs[n] = one
    adjugate = [None] * n
    m_k = np.full((n, n), zero, dtype=a.dtype)
    for k in range(1, n + 1):
        m_k = a.dot(m_k) + coeffs[n - k + 1] * identity
        adjugate[n - k] = m_k
        coeffs[n - k] = -np.trace(a.dot(m_k)) / k

    return np.array(coeffs, dtype=a.dtype), adjugate


def build_system(net: Network, settings: Optional[DynamicsSettings] = None) -> ClosedLoopSystem:
    """Assemble L̄ = L + Θ and check that it is positive definite."""
    settings = settings or DynamicsSettings()
    lbar = laplacian(net) + np.diag(net.theta)
    eigenvalues, eigenvectors = np.linalg.eigh(lbar)

    if eigenvalues[0] <= PD_RTOL * max(eigenvalues[-1], 1.0):
        raise NumericalError(f"L̄ is not positive definite (smallest eigenvalue {eigenvalues[0]:.3e})")

    if net.n <= settings.faddeev_max_order:
        charpoly, _ = faddeev_leverrier(lbar)
    else:
        charpoly = np.real(npoly.polyfromroots(-eigenvalues))

    logger.debug(f"Built closed loop with n={net.n}, spectrum [{eigenvalues[0]:.4g}, {eigenvalues[-1]:.4g}]")
    return ClosedLoopSystem(net, lbar, eigenvalues, eigenvectors, np.asarray(charpoly, dtype=float),
                            distance_matrix(net), settings)


def relative_degree(sys: ClosedLoopSystem, out: int, a: int) -> int:
    """Index of the first Markov parameter e_out⊤(−L̄)^(r−1) e_a above tolerance.

    The result is compared with the graph-distance law r = dist + 1; a
    disagreement means the floating-point test was fooled and is an error.
    """
    r, _ = _markov(sys, out, a)
    expected = int(sys.distances[out, a]) + 1
    if r != expected:
        raise NumericalError(
            f"Relative degree of ({out + 1}, {a + 1}) is {r} by Markov parameters "
            f"but {expected} by graph distance"
        )
    return r


def _markov(sys: ClosedLoopSystem, out: int, a: int) -> Tuple[int, float]:
    rtol = sys.settings.markov_rtol
    v = np.zeros(sys.n)
    v[a] = 1.0
    for k in range(sys.n):
        if abs(v[out]) > rtol * sys.scale ** k:
            return k + 1, float(v[out])
        v = -sys.lbar @ v
    raise NumericalError(f"No nonzero Markov parameter for ({out + 1}, {a + 1})")


def _factor_numerator(sys: ClosedLoopSystem, out: int, a: int) -> Numerator:
    r = relative_degree(sys, out, a)
    _, gain = _markov(sys, out, a)
    expected = sys.n - r
    if expected == 0:
        return Numerator(gain=gain, zeros=np.zeros(0, dtype=complex), relative_degree=r)

    n = sys.n
    pencil = np.zeros((n + 1, n + 1))
    pencil[:n, :n] = -sys.lbar
    pencil[a, n] = 1.0
    pencil[n, out] = 1.0
    mass = np.zeros((n + 1, n + 1))
    mass[:n, :n] = np.eye(n)

    alpha, beta = scipy.linalg.eig(pencil, mass, right=False, homogeneous_eigvals=True)
    magnitude = np.abs(alpha) / np.maximum(np.abs(beta), np.finfo(float).tiny)
    finite = np.isfinite(magnitude) & (np.abs(beta) > 0)
    if np.count_nonzero(finite) < expected:
        raise RootSolveError(
            f"Pencil of ({out + 1}, {a + 1}) has {np.count_nonzero(finite)} finite zeros, expected {expected}"
        )

    # The infinite eigenvalues come back as very large finite ones; keep the
    # n − r smallest in magnitude.
    order = np.argsort(np.where(finite, magnitude, np.inf))
    zeros = (alpha[order[:expected]] / beta[order[:expected]]).astype(complex)
    zeros = _conjugate_clean(zeros)

    if expected < len(order) and magnitude[order[expected]] < 10 * magnitude[order[expected - 1]]:
        logger.warning(f"Zeros of ({out + 1}, {a + 1}) are poorly separated from the infinite eigenvalues")
    _check_residuals(sys, out, a, zeros)
    return Numerator(gain=gain, zeros=zeros, relative_degree=r)


def _conjugate_clean(zeros: np.ndarray) -> np.ndarray:
    """Snap tiny imaginary parts to zero and sort by (real, imag)."""
    scale = max(1.0, float(np.max(np.abs(zeros)))) if len(zeros) else 1.0
    cleaned = np.where(np.abs(zeros.imag) < 1e-10 * scale, zeros.real + 0j, zeros)
    return cleaned[np.lexsort((cleaned.imag, cleaned.real))]


def _check_residuals(sys: ClosedLoopSystem, out: int, a: int, zeros: np.ndarray) -> None:
    """Modal residual of G at each zero; zeros sitting on a pole are skipped."""
    pole_scale = max(1.0, float(np.max(np.abs(sys.eigenvalues))))
    on_pole = np.any(np.abs(zeros[:, None] + sys.eigenvalues[None, :]) <= POLE_MATCH_RTOL * pole_scale, axis=1)
    if on_pole.any():
        logger.debug(f"Zeros of ({out + 1}, {a + 1}): {np.count_nonzero(on_pole)} cancel a pole")
    zeros = zeros[~on_pole]
    if not len(zeros):
        return

    weights = sys.eigenvectors[out, :] * sys.eigenvectors[a, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = weights[None, :] / (zeros[:, None] + sys.eigenvalues[None, :])
        residual = np.abs(terms.sum(axis=1)) / np.maximum(np.abs(terms).sum(axis=1), np.finfo(float).tiny)
    residual = residual[np.isfinite(residual)]
    if not len(residual):
        return
    worst = float(residual.max())
    if worst > sys.settings.zero_residual_tol:
        logger.warning(f"Zeros of ({out + 1}, {a + 1}) have relative residual {worst:.2e}")


def numerator(sys: ClosedLoopSystem, out: int, a: int) -> np.ndarray:
    """Ascending coefficients of P_(out,a)(s), with G = P/Q."""
    return sys.numerator_factors(out, a).coeffs


def invariant_zeros(sys: ClosedLoopSystem, out: int, a: int) -> np.ndarray:
    """Finite invariant zeros of the (a → out) channel."""
    return sys.numerator_factors(out, a).zeros


def transfer_value(sys: ClosedLoopSystem, out: int, a: int,
                   s: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
    """G(s) = Σ_k v_out,k v_a,k / (s + λ_k)."""
    s = np.asarray(s, dtype=complex)
    weights = sys.eigenvectors[out, :] * sys.eigenvectors[a, :]
    return (weights / (s[..., None] + sys.eigenvalues)).sum(axis=-1)


def zero_report(sys: ClosedLoopSystem, pairs: Optional[Sequence[Tuple[int, int]]] = None,
                workers: int = 1) -> ZeroReport:
    """Invariant zeros for (a, m) pairs; every unordered pair by default."""
    if pairs is None:
        pairs = [(a, m) for a in range(sys.n) for m in range(a, sys.n)]
    pairs = list(pairs)

    factors: List[Optional[Numerator]] = [None] * len(pairs)
    if workers <= 1:
        factors = [sys.numerator_factors(m, a) for a, m in pairs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            future_to_index = {
                executor.submit(sys.numerator_factors, m, a): i for i, (a, m) in enumerate(pairs)
            }
            for future in as_completed(future_to_index):
                factors[future_to_index[future]] = future.result()

    real_parts = [float(f.zeros.real.max()) for f in factors if f.degree > 0]
    return ZeroReport(
        pairs=pairs,
        relative_degrees=[f.relative_degree for f in factors],
        zeros=[f.zeros for f in factors],
        max_real_part=max(real_parts) if real_parts else float("-inf"),
    )


def tune_self_loops(net: Network, margin: float,
                    settings: Optional[DynamicsSettings] = None,
                    workers: int = 1) -> Network:
    """Shift every θ_i by one offset so all finite invariant zeros sit at Re ≤ −margin."""
    if margin <= 0:
        raise ValueError(f"margin must be positive, got {margin}")

    report = zero_report(build_system(net, settings), workers=workers)
    mu = report.max_real_part
    if mu <= -margin:
        logger.info(f"Self-loop gains kept: largest zero real part {mu:.6g} <= -{margin}")
        return net

    offset = mu + margin
    tuned = net.with_theta([t + offset for t in net.theta])
    logger.info(f"Self-loop gains raised by {offset:.6g} (largest zero real part was {mu:.6g})")

    recheck = zero_report(build_system(tuned, settings), workers=workers).max_real_part
    if recheck > -margin + 1e-8:
        logger.warning(f"After tuning the largest zero real part is still {recheck:.6g}")
    return tuned
