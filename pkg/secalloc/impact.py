#!/usr/bin/env python3
"""
Worst-case impact of stealthy attacks.

J_ρ(a, M) is the largest output energy an attacker at vertex a can push into
target ρ while every monitor m ∈ M stays under its alarm threshold δ_m. In
the frequency domain this is the semi-infinite program

    minimize   Σ_m γ_m δ_m
    subject to Σ_m γ_m R_m(x) ≥ R_ρ(x)   for all x = ω² ≥ 0,   γ_m ≥ ε_γ

with R_i(x) = |P_(i,a)(jω)|². It is solved by cutting planes over a small
dense LP, and each bounded answer comes with a certificate: the supremum of
R_ρ/Σγ_m R_m over the whole half line is at most one.

Densities are evaluated in log space from their factored form, and
frequencies are handled in units of ‖L̄‖ so grids mean the same thing on
every network.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npoly
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import linprog, minimize_scalar
from scipy.special import logsumexp

from secalloc.config import ImpactSettings
from secalloc.dynamics import ClosedLoopSystem, Numerator
from secalloc.errors import InvalidScenario, IterationLimit, NumericalError, SchemaError
from secalloc.graph import MonitorSet
from secalloc.polyroots import ratio_stationary_points

logger = logging.getLogger(__name__)

# Two zeros closer than this are treated as the same zero.
ZERO_MATCH_TOL = 1e-6
# Local maxima of the search grid refined per supremum evaluation.
REFINE_PEAKS = 3


class ImpactStatus(str, Enum):
    BOUNDED = "bounded"
    UNBOUNDED = "unbounded"


def density_coefficients(p: Sequence[float]) -> np.ndarray:
    """Coefficients in x of |P(jω)|² at x = ω².

    With P(s) = E(s²) + s·O(s²), P(jω) = E(−x) + jω·O(−x), hence
    |P(jω)|² = E(−x)² + x·O(−x)².
    """
    p = np.asarray(p, dtype=float)
    even = p[0::2] * (-1.0) ** np.arange(len(p[0::2]))
    odd = p[1::2] * (-1.0) ** np.arange(len(p[1::2]))
    result = npoly.polymul(even, even)
    if len(odd):
        result = npoly.polyadd(result, npoly.polymulx(npoly.polymul(odd, odd)))
    return npoly.polytrim(result, 0.0) if np.any(result) else np.zeros(1)


@dataclass(frozen=True)
class SpectralDensity:
    """R(x) = |P(jω)|² at x = ω², kept both expanded and factored."""

    coeffs: np.ndarray
    gain: float
    zeros: np.ndarray

    @classmethod
    def from_numerator(cls, factors: Numerator) -> "SpectralDensity":
        return cls(density_coefficients(factors.coeffs), factors.gain, factors.zeros)

    @property
    def degree(self) -> int:
        return len(self.zeros)

    @property
    def leading(self) -> float:
        return self.gain ** 2

    def log_value(self, x: Union[float, np.ndarray]) -> np.ndarray:
        """log R(x) for x ≥ 0; −inf where R vanishes."""
        w = np.sqrt(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore"):
            total = np.full(w.shape, 2.0 * np.log(abs(self.gain)))
            for z in self.zeros:
                total = total + np.log(z.real ** 2 + (w - z.imag) ** 2)
        return total

    def __call__(self, x: Union[float, np.ndarray]) -> np.ndarray:
        return np.exp(self.log_value(x))

    def scaled(self, scale: float) -> Tuple[np.ndarray, float]:
        """(coefficients of R̂, log weight) with R(scale²·u) = exp(weight)·R̂(u)."""
        monic = Numerator(gain=1.0, zeros=self.zeros / scale, relative_degree=0)
        weight = 2.0 * np.log(abs(self.gain)) + 2.0 * self.degree * np.log(scale)
        return density_coefficients(monic.coeffs), weight


class Belief(BaseModel):
    """Defender's belief π_a(ρ) over targets given the attack vertex."""

    model_config = ConfigDict(frozen=True)

    kind: str = "uniform"
    table: Optional[Dict[int, Dict[int, float]]] = None

    @model_validator(mode="after")
    def _check_kind(self) -> "Belief":
        if self.kind not in ("uniform", "table"):
            raise ValueError(f"Unknown belief kind: {self.kind}")
        if self.kind == "table" and not self.table:
            raise ValueError("Table belief needs a table")
        return self

    def probabilities(self, a: int, n: int) -> np.ndarray:
        if self.kind == "uniform":
            pi = np.full(n, 1.0 / max(n - 1, 1))
            pi[a] = 0.0
            return pi

        row = self.table.get(a)
        if row is None:
            raise SchemaError(f"Belief table has no row for attack vertex {a + 1}")
        pi = np.zeros(n)
        for rho, p in row.items():
            pi[rho] = p
        return pi

    def check(self, n: int) -> "Belief":
        if self.kind == "uniform":
            return self
        for a in range(n):
            pi = self.probabilities(a, n)
            if pi[a] != 0.0:
                raise SchemaError(f"Belief for attack vertex {a + 1} puts mass on the attack vertex")
            others = np.delete(pi, a)
            if np.any(others <= 0):
                raise SchemaError(f"Belief for attack vertex {a + 1} must be positive on every target")
            if abs(others.sum() - 1.0) > 1e-12:
                raise SchemaError(f"Belief for attack vertex {a + 1} sums to {others.sum()}, not 1")
        return self

    @classmethod
    def from_document(cls, document: Dict[str, Dict[str, float]]) -> "Belief":
        """Table belief from a 1-based {"a": {"rho": p}} mapping."""
        try:
            table = {int(a) - 1: {int(rho) - 1: float(p) for rho, p in row.items()}
                     for a, row in document.items()}
        except (AttributeError, TypeError, ValueError) as e:
            raise SchemaError(f"Belief document is malformed: {e}") from e
        return cls(kind="table", table=table)


class CostModel(BaseModel):
    """Linear sensor cost c(|M|) = κ|M|."""

    model_config = ConfigDict(frozen=True)

    kappa: float = Field(5.0, ge=0)

    def cost(self, size: int) -> float:
        return self.kappa * size


@dataclass(frozen=True)
class ScenarioCost:
    """Q or R for one (a, M): a finite value or Unbounded, never a sentinel."""

    status: ImpactStatus
    value: Optional[float] = None

    @classmethod
    def bounded(cls, value: float) -> "ScenarioCost":
        return cls(ImpactStatus.BOUNDED, float(value))

    @classmethod
    def unbounded(cls) -> "ScenarioCost":
        return cls(ImpactStatus.UNBOUNDED)

    @property
    def is_bounded(self) -> bool:
        return self.status is ImpactStatus.BOUNDED

    @property
    def sort_value(self) -> float:
        return self.value if self.is_bounded else float("inf")

    def plus(self, amount: float) -> "ScenarioCost":
        return ScenarioCost.bounded(self.value + amount) if self.is_bounded else self


@dataclass
class ImpactResult:
    status: ImpactStatus
    value: Optional[float] = None
    gamma: Dict[int, float] = field(default_factory=dict)
    certificate_min: Optional[float] = None
    worst_frequency: Optional[float] = None
    cuts: int = 0
    # "sturm", "companion" or "grid": how the supremum over the half line was searched.
    sup_search: Optional[str] = None

    @property
    def is_bounded(self) -> bool:
        return self.status is ImpactStatus.BOUNDED

    @classmethod
    def unbounded(cls) -> "ImpactResult":
        return cls(status=ImpactStatus.UNBOUNDED)

    def to_document(self) -> dict:
        if not self.is_bounded:
            return {"status": self.status.value}
        return {
            "status": self.status.value,
            "value": self.value,
            "gamma": {str(m + 1): g for m, g in sorted(self.gamma.items())},
            "worst_frequency": self.worst_frequency,
            "certificate_min": self.certificate_min,
            "sup_search": self.sup_search,
        }


class ImpactAnalyzer:
    """Impact computations for one closed-loop system.

    Holds the density cache and the fixed search grid so repeated scenarios
    on the same system (the game evaluates thousands) reuse them. Safe to
    share across threads.
    """

    def __init__(self, sys: ClosedLoopSystem, settings: Optional[ImpactSettings] = None):
        self.sys = sys
        self.settings = settings or ImpactSettings()
        self.scale = sys.scale
        self.search_grid = np.logspace(np.log10(self.settings.grid_min), np.log10(self.settings.grid_max),
                                       self.settings.search_points)
        self.initial_grid = np.concatenate([
            [0.0],
            np.logspace(np.log10(self.settings.grid_min), np.log10(self.settings.grid_max),
                        self.settings.grid_points),
        ])
        # Offset from the search grid so the final check samples new points.
        self.check_grid = np.logspace(np.log10(self.settings.grid_min), np.log10(self.settings.grid_max),
                                      2 * self.settings.search_points + 1)
        # Any ratio above this already satisfies its row at γ = ε_γ.
        self.log_cap = np.log(1e3 / self.settings.eps_gamma)

    @classmethod
    def for_system(cls, sys: ClosedLoopSystem, settings: Optional[ImpactSettings] = None) -> "ImpactAnalyzer":
        settings = settings or ImpactSettings()
        return sys.memo(("impact", settings.model_dump_json()), lambda: cls(sys, settings))

    def density(self, out: int, a: int) -> SpectralDensity:
        key = ("density", min(out, a), max(out, a))
        return self.sys.memo(key, lambda: SpectralDensity.from_numerator(self.sys.numerator_factors(out, a)))

    def _grid_log(self, out: int, a: int) -> np.ndarray:
        key = ("grid", self.settings.search_points, min(out, a), max(out, a))
        return self.sys.memo(key, lambda: self._log_density(self.density(out, a), self.search_grid))

    def _check_log(self, out: int, a: int) -> np.ndarray:
        key = ("check", self.settings.search_points, min(out, a), max(out, a))
        return self.sys.memo(key, lambda: self._log_density(self.density(out, a), self.check_grid))

    def _scaled(self, out: int, a: int) -> Tuple[np.ndarray, float]:
        key = ("scaled", min(out, a), max(out, a))
        return self.sys.memo(key, lambda: self.density(out, a).scaled(self.scale))

    def _log_density(self, d: SpectralDensity, u: np.ndarray) -> np.ndarray:
        return d.log_value(self.scale ** 2 * np.asarray(u, dtype=float))

    # -- scenario checks ----------------------------------------------------

    def _check_scenario(self, a: int, rho: int, monitors: Sequence[int]) -> None:
        n = self.sys.n
        if rho == a:
            raise InvalidScenario(f"Target {rho + 1} equals the attack vertex")
        if not monitors:
            raise InvalidScenario("Monitor set is empty")
        for v in (a, rho, *monitors):
            if not 0 <= v < n:
                raise InvalidScenario(f"Vertex {v + 1} outside 1..{n}")

    def boundedness(self, a: int, rho: int, m_set: MonitorSet) -> ImpactStatus:
        self._check_scenario(a, rho, m_set.vertices)
        r_rho = self.sys.numerator_factors(rho, a).relative_degree
        r_min = min(self.sys.numerator_factors(m, a).relative_degree for m in m_set)
        return ImpactStatus.BOUNDED if r_min <= r_rho else ImpactStatus.UNBOUNDED

    # -- supremum of the target/monitor ratio -------------------------------

    def _log_ratio(self, target: SpectralDensity, monitors: List[SpectralDensity],
                   log_gamma: np.ndarray, u: np.ndarray) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        stacked = np.array([self._log_density(d, u) for d in monitors]) + log_gamma[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            value = self._log_density(target, u) - logsumexp(stacked, axis=0)
        return np.where(np.isnan(value), -np.inf, value)

    def _limit_log_ratio(self, target: SpectralDensity, monitors: List[SpectralDensity],
                         log_gamma: np.ndarray) -> float:
        top = max(d.degree for d in monitors)
        if target.degree < top:
            return -np.inf
        if target.degree > top:
            return np.inf
        lead = [lg + np.log(d.leading) for lg, d in zip(log_gamma, monitors) if d.degree == top]
        return float(np.log(target.leading) - logsumexp(lead))

    def sup_log_ratio(self, a: int, rho: int, monitors: Sequence[int],
                      gamma: np.ndarray) -> Tuple[float, float]:
        """(log sup_x R_ρ/Σγ_m R_m, argmax in scaled units); argmax may be inf."""
        target = self.density(rho, a)
        dens = [self.density(m, a) for m in monitors]
        log_gamma = np.log(np.asarray(gamma, dtype=float))

        with np.errstate(divide="ignore", invalid="ignore"):
            grid_values = self._grid_log(rho, a) - logsumexp(
                np.array([self._grid_log(m, a) for m in monitors]) + log_gamma[:, None], axis=0)
        grid_values = np.where(np.isnan(grid_values), -np.inf, grid_values)

        candidates = [0.0]
        for i in _local_maxima(grid_values)[:REFINE_PEAKS]:
            lo = np.log(self.search_grid[max(i - 1, 0)])
            hi = np.log(self.search_grid[min(i + 1, len(self.search_grid) - 1)])
            candidates.append(float(self.search_grid[i]))
            if hi > lo:
                refined = minimize_scalar(
                    lambda t: -float(self._log_ratio(target, dens, log_gamma, np.exp(t))[0]),
                    bounds=(lo, hi), method="bounded", options={"xatol": 1e-10},
                )
                candidates.append(float(np.exp(refined.x)))

        candidates.extend(self._stationary_candidates(a, rho, monitors, log_gamma))

        points = np.array(candidates)
        values = self._log_ratio(target, dens, log_gamma, points)
        best = int(np.argmax(values))
        best_value, best_point = float(values[best]), float(points[best])

        limit = self._limit_log_ratio(target, dens, log_gamma)
        if limit > best_value:
            return limit, float("inf")
        return best_value, best_point

    def sup_search(self, a: int, rho: int, monitors: Sequence[int]) -> str:
        """Root method available for the stationary points of the ratio, by degree bound."""
        s = self.settings
        degree = self.density(rho, a).degree + max(self.density(m, a).degree for m in monitors) - 1
        if degree <= s.sturm_max_degree:
            return "sturm"
        if degree <= s.poly_max_degree:
            return "companion"
        return "grid"

    def _stationary_candidates(self, a: int, rho: int, monitors: Sequence[int],
                               log_gamma: np.ndarray) -> List[float]:
        s = self.settings
        if self.sup_search(a, rho, monitors) == "grid":
            return []
        target_coeffs, _ = self._scaled(rho, a)
        scaled = [self._scaled(m, a) for m in monitors]

        weights = np.array([lg + w for lg, (_, w) in zip(log_gamma, scaled)])
        weights = np.exp(weights - weights.max())
        denominator = np.zeros(1)
        for weight, (coeffs, _) in zip(weights, scaled):
            denominator = npoly.polyadd(denominator, weight * coeffs)
        return ratio_stationary_points(target_coeffs, denominator,
                                       sturm_max_degree=s.sturm_max_degree,
                                       poly_max_degree=s.poly_max_degree)

    # -- operations ---------------------------------------------------------

    def single_monitor_bound(self, a: int, rho: int, m: int,
                             delta_m: Optional[float] = None) -> ImpactResult:
        """δ_m · sup_x R_ρ(x)/R_m(x), or Unbounded when r_m > r_ρ."""
        delta_m = self.sys.delta[m] if delta_m is None else delta_m
        if self.boundedness(a, rho, MonitorSet.of([m])) is ImpactStatus.UNBOUNDED:
            return ImpactResult.unbounded()
        if m == rho:
            # R_ρ/R_m ≡ 1.
            return ImpactResult(status=ImpactStatus.BOUNDED, value=float(delta_m), gamma={m: 1.0},
                                certificate_min=0.0, worst_frequency=0.0, sup_search=self.sup_search(a, rho, [m]))

        log_t, u_star = self.sup_log_ratio(a, rho, [m], np.ones(1))
        if not np.isfinite(log_t):
            return ImpactResult.unbounded()
        log_c, u_c = self._check_sup(a, rho, [m], np.ones(1))
        if log_c > log_t:
            logger.debug(f"a={a + 1} rho={rho + 1} m={m + 1}: check grid peak at u={u_c:.3e} beats search")
            log_t, u_star = log_c, u_c
        t = float(np.exp(log_t))
        return ImpactResult(
            status=ImpactStatus.BOUNDED,
            value=delta_m * t,
            gamma={m: t},
            certificate_min=self._checked_certificate(a, rho, [m], np.array([t]), u_star),
            worst_frequency=self._frequency(u_star),
            sup_search=self.sup_search(a, rho, [m]),
        )

    def worst_case_impact(self, a: int, rho: int, m_set: MonitorSet) -> ImpactResult:
        if self.boundedness(a, rho, m_set) is ImpactStatus.UNBOUNDED:
            return ImpactResult.unbounded()
        if len(m_set) == 1:
            return self.single_monitor_bound(a, rho, m_set.vertices[0])

        s = self.settings
        monitors = list(m_set.vertices)
        delta = self.sys.delta[monitors]
        target = self.density(rho, a)
        dens = [self.density(m, a) for m in monitors]

        points = list(self.initial_grid)
        for cuts in range(1, s.max_cuts + 1):
            gamma = self._solve_lp(target, dens, delta, np.array(points))
            if gamma is None:
                logger.debug(f"LP infeasible for a={a + 1}, rho={rho + 1}, M={m_set.one_based()}")
                return ImpactResult.unbounded()

            log_t, u_star = self.sup_log_ratio(a, rho, monitors, gamma)
            if log_t <= np.log1p(s.cut_tol):
                log_c, u_c = self._check_sup(a, rho, monitors, gamma)
                if log_c <= np.log1p(s.cut_tol):
                    log_t = max(log_t, log_c)
                    break
                logger.debug(f"Check grid peak at u={u_c:.3e} missed by the supremum search; adding a cut")
                points.append(u_c)
                continue
            points.append(u_star if np.isfinite(u_star) else 10.0 * max(points))
        else:
            raise IterationLimit(
                f"No certificate after {s.max_cuts} cuts for a={a + 1}, rho={rho + 1}, M={m_set.one_based()}"
            )

        t = float(np.exp(log_t))
        gamma = gamma * max(t, 1.0)
        certificate_min = self._checked_certificate(a, rho, monitors, gamma, u_star)
        logger.debug(f"a={a + 1} rho={rho + 1} M={m_set.one_based()}: certified after {cuts} LPs")
        return ImpactResult(
            status=ImpactStatus.BOUNDED,
            value=float(gamma @ delta),
            gamma={m: float(g) for m, g in zip(monitors, gamma)},
            certificate_min=certificate_min,
            worst_frequency=self._frequency(u_star),
            cuts=cuts,
            sup_search=self.sup_search(a, rho, monitors),
        )

    def _check_sup(self, a: int, rho: int, monitors: Sequence[int],
                   gamma: np.ndarray) -> Tuple[float, float]:
        """Largest log ratio over x = 0 and the check grid, and where it sits."""
        log_gamma = np.log(np.asarray(gamma, dtype=float))
        dens = [self.density(m, a) for m in monitors]
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = self._check_log(rho, a) - logsumexp(
                np.array([self._check_log(m, a) for m in monitors]) + log_gamma[:, None], axis=0)
        logs = np.concatenate([self._log_ratio(self.density(rho, a), dens, log_gamma, np.zeros(1)), logs])
        logs = np.where(np.isnan(logs), -np.inf, logs)
        i = int(np.argmax(logs))
        return float(logs[i]), (0.0 if i == 0 else float(self.check_grid[i - 1]))

    def _checked_certificate(self, a: int, rho: int, monitors: Sequence[int], gamma: np.ndarray,
                             u_star: float) -> float:
        """Smallest (1 − r)/(1 + r) of r = R_ρ/Σγ_m R_m on an independent grid.

        Raises IterationLimit when it falls below −ε_cert, i.e. the supremum
        search missed a peak.
        """
        target = self.density(rho, a)
        dens = [self.density(m, a) for m in monitors]
        log_gamma = np.log(np.asarray(gamma, dtype=float))

        log_c, _ = self._check_sup(a, rho, monitors, gamma)
        extra = [u_star] if np.isfinite(u_star) else []
        logs = np.concatenate([[log_c], self._log_ratio(target, dens, log_gamma, np.array(extra)),
                               [self._limit_log_ratio(target, dens, log_gamma)]])

        ratio = np.exp(np.max(logs))
        certificate_min = float((1.0 - ratio) / (1.0 + ratio))
        if certificate_min < -self.settings.eps_cert:
            raise IterationLimit(
                f"Certificate check failed for a={a + 1}, rho={rho + 1}, M={[m + 1 for m in monitors]}: "
                f"minimum {certificate_min:.3e}"
            )
        return certificate_min

    def _solve_lp(self, target: SpectralDensity, monitors: List[SpectralDensity],
                  delta: np.ndarray, points: np.ndarray) -> Optional[np.ndarray]:
        """Dense LP over the current cut set; None when infeasible."""
        s = self.settings
        log_target = self._log_density(target, points)
        with np.errstate(invalid="ignore"):
            logs = np.array([self._log_density(d, points) for d in monitors]) - log_target[None, :]
        keep = ~np.any(np.isnan(logs), axis=0)
        rows = np.exp(np.minimum(logs[:, keep], self.log_cap)).T

        top = max(d.degree for d in monitors)
        if top == target.degree:
            asymptotic = [d.leading / target.leading if d.degree == top else 0.0 for d in monitors]
            rows = np.vstack([rows, asymptotic])

        res = linprog(
            c=delta,
            A_ub=-rows,
            b_ub=-np.ones(len(rows)),
            bounds=[(s.eps_gamma, None)] * len(monitors),
            method="highs",
            options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
        )
        if res.status == 2:
            return None
        if res.status != 0:
            raise NumericalError(f"LP solve failed: {res.message}")
        return np.maximum(res.x, s.eps_gamma)

    def _frequency(self, u: float) -> Optional[float]:
        return float(self.scale * np.sqrt(u)) if np.isfinite(u) else None

    def certificate_ratio(self, a: int, rho: int, gamma: Dict[int, float],
                          omega: np.ndarray) -> np.ndarray:
        """p_γ(x)/(R_ρ(x) + Σγ_m R_m(x)) at x = ω², a scale-free certificate value."""
        monitors = sorted(gamma)
        u = (np.asarray(omega, dtype=float) / self.scale) ** 2
        log_ratio = self._log_ratio(self.density(rho, a), [self.density(m, a) for m in monitors],
                                    np.log([gamma[m] for m in monitors]), u)
        ratio = np.exp(log_ratio)
        return (1.0 - ratio) / (1.0 + ratio)

    def expected_impact(self, a: int, m_set: MonitorSet, belief: Belief) -> ScenarioCost:
        """Q(a, M) = Σ_ρ π_a(ρ) J_ρ(a, M)."""
        pi = belief.probabilities(a, self.sys.n)
        targets = [rho for rho in range(self.sys.n) if rho != a and pi[rho] > 0]
        if any(self.boundedness(a, rho, m_set) is ImpactStatus.UNBOUNDED for rho in targets):
            return ScenarioCost.unbounded()

        total = 0.0
        for rho in targets:
            result = self.worst_case_impact(a, rho, m_set)
            if not result.is_bounded:
                return ScenarioCost.unbounded()
            total += pi[rho] * result.value
        return ScenarioCost.bounded(total)

    def defense_cost(self, a: int, m_set: MonitorSet, belief: Belief, cost: CostModel) -> ScenarioCost:
        """R(a, M) = c(|M|) + Q(a, M)."""
        return self.expected_impact(a, m_set, belief).plus(cost.cost(len(m_set)))


def _local_maxima(values: np.ndarray) -> List[int]:
    """Indices of grid local maxima, largest first."""
    padded = np.concatenate([[-np.inf], values, [-np.inf]])
    peaks = np.flatnonzero((padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:])
                           & np.isfinite(values))
    return sorted(peaks.tolist(), key=lambda i: -values[i])


def spectral_density(sys: ClosedLoopSystem, out: int, a: int) -> SpectralDensity:
    return ImpactAnalyzer.for_system(sys).density(out, a)


def boundedness(sys: ClosedLoopSystem, a: int, rho: int, m_set: MonitorSet) -> ImpactStatus:
    return ImpactAnalyzer.for_system(sys).boundedness(a, rho, m_set)


def zero_condition(sys: ClosedLoopSystem, a: int, rho: int, m: int) -> bool:
    """Every unstable zero of the (a → m) channel is also a zero of (a → ρ)."""
    target = sys.numerator_factors(rho, a).zeros
    for z in sys.numerator_factors(m, a).zeros:
        if z.real > 0 and not np.any(np.abs(target - z) <= ZERO_MATCH_TOL * max(1.0, abs(z))):
            return False
    return True


def single_monitor_bound(sys: ClosedLoopSystem, a: int, rho: int, m: int,
                         delta_m: Optional[float] = None,
                         settings: Optional[ImpactSettings] = None) -> ImpactResult:
    return ImpactAnalyzer.for_system(sys, settings).single_monitor_bound(a, rho, m, delta_m)


def worst_case_impact(sys: ClosedLoopSystem, a: int, rho: int, m_set: MonitorSet,
                      settings: Optional[ImpactSettings] = None) -> ImpactResult:
    return ImpactAnalyzer.for_system(sys, settings).worst_case_impact(a, rho, m_set)


def expected_impact(sys: ClosedLoopSystem, a: int, m_set: MonitorSet, belief: Belief,
                    settings: Optional[ImpactSettings] = None) -> ScenarioCost:
    return ImpactAnalyzer.for_system(sys, settings).expected_impact(a, m_set, belief)


def defense_cost(sys: ClosedLoopSystem, a: int, m_set: MonitorSet, belief: Belief,
                 cost: CostModel, settings: Optional[ImpactSettings] = None) -> ScenarioCost:
    return ImpactAnalyzer.for_system(sys, settings).defense_cost(a, m_set, belief, cost)
