#!/usr/bin/env python3
"""
Independent brute-force validators.

Slow, simple and built on different machinery from the library proper:
the dominating check scans neighborhoods literally, the sweep oracle solves
(jωI + L̄)z = e_a at every grid frequency, and the discretized oracle
maximizes finite-horizon output energy through generalized symmetric
eigenproblems. The CLI exposes them through --verify.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from secalloc.config import OracleSettings
from secalloc.dynamics import ClosedLoopSystem, relative_degree
from secalloc.errors import InvalidScenario, ScopeError
from secalloc.graph import MonitorSet, Network

logger = logging.getLogger(__name__)

# Regularization of the monitor energy form, relative to its mean eigenvalue.
ENERGY_RIDGE = 1e-12
# Complex solves per batch in the frequency sweep.
SWEEP_BATCH = 4096


def dominating_oracle(net: Network, m_set: MonitorSet) -> bool:
    """Every vertex is in M or has a neighbor in M."""
    members = set(m_set.vertices)
    for u in range(net.n):
        if u in members:
            continue
        if not any(v in members for v in net.neighbors(u)):
            return False
    return True


def _channel_responses(sys: ClosedLoopSystem, a: int, outputs: Sequence[int],
                       omega: np.ndarray) -> np.ndarray:
    """|e_i⊤(jωI + L̄)⁻¹e_a|² for each output i (rows) and frequency (columns)."""
    n = sys.n
    rhs = np.zeros(n, dtype=complex)
    rhs[a] = 1.0
    power = np.empty((len(outputs), len(omega)))
    for start in range(0, len(omega), SWEEP_BATCH):
        w = omega[start:start + SWEEP_BATCH]
        matrices = sys.lbar[None, :, :] + 1j * w[:, None, None] * np.eye(n)[None, :, :]
        z = np.linalg.solve(matrices, np.broadcast_to(rhs, (len(w), n))[..., None])[..., 0]
        power[:, start:start + len(w)] = np.abs(z[:, list(outputs)].T) ** 2
    return power


def _frequency_grid(settings: OracleSettings, grid_size: Optional[int]) -> np.ndarray:
    size = grid_size or settings.sweep_points
    return np.logspace(np.log10(settings.sweep_min), np.log10(settings.sweep_max), size)


def _refine_peak(ratio, omega: np.ndarray, i: int) -> float:
    """Golden-section search on log ω around grid index i."""
    lo, hi = np.log(omega[max(i - 1, 0)]), np.log(omega[min(i + 1, len(omega) - 1)])
    if hi <= lo:
        return float(ratio(omega[i]))
    refined = minimize_scalar(lambda t: -ratio(np.exp(t)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
    return max(float(ratio(omega[i])), float(-refined.fun))


def sweep_ratio_oracle(sys: ClosedLoopSystem, a: int, rho: int, m: int,
                       delta_m: Optional[float] = None, grid_size: Optional[int] = None,
                       settings: Optional[OracleSettings] = None) -> float:
    """δ_m · max_ω |G_ρ(jω)|²/|G_m(jω)|² on a dense log grid, refined at the peak."""
    settings = settings or OracleSettings()
    delta_m = sys.delta[m] if delta_m is None else delta_m
    if relative_degree(sys, m, a) > relative_degree(sys, rho, a):
        raise InvalidScenario(f"Monitor {m + 1} is farther from {a + 1} than target {rho + 1}")

    omega = _frequency_grid(settings, grid_size)
    power = _channel_responses(sys, a, [rho, m], omega)
    ratios = power[0] / power[1]
    i = int(np.argmax(ratios))

    def ratio(w: float) -> float:
        p = _channel_responses(sys, a, [rho, m], np.atleast_1d(w))
        return p[0, 0] / p[1, 0]

    return delta_m * _refine_peak(ratio, omega, i)


def sweep_pair_oracle(sys: ClosedLoopSystem, a: int, rho: int, monitors: Tuple[int, int],
                      grid_size: Optional[int] = None,
                      settings: Optional[OracleSettings] = None) -> float:
    """Two-monitor impact by a 1-D search over the multiplier direction.

    For γ ∝ (t, 1 − t) the smallest feasible scale is the sweep maximum of
    R_ρ/(t R_1 + (1 − t) R_2); the value is that scale times tδ_1 + (1 − t)δ_2.
    """
    settings = settings or OracleSettings()
    m1, m2 = monitors
    delta = sys.delta[[m1, m2]]
    omega = _frequency_grid(settings, grid_size)
    power = _channel_responses(sys, a, [rho, m1, m2], omega)

    def value(t: float) -> float:
        with np.errstate(divide="ignore"):
            scale = np.max(power[0] / (t * power[1] + (1.0 - t) * power[2]))
        return float(scale * (t * delta[0] + (1.0 - t) * delta[1]))

    refined = minimize_scalar(value, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-10})
    return min(value(0.0), value(1.0), float(refined.fun))


@dataclass
class DiscretizedAttackProblem:
    """Finite-horizon attack maps sampled on a fine grid.

    The attack is piecewise constant over `hold` integration steps of length
    `step`, so `horizon` attack values drive `horizon * hold` samples.
    """

    step: float
    hold: int
    horizon: int
    outputs: Tuple[int, ...]
    input_maps: Dict[int, np.ndarray]

    @property
    def duration(self) -> float:
        return self.step * self.hold * self.horizon

    def energy_form(self, i: int) -> np.ndarray:
        """W_i with output energy h‖H_i u‖² = u⊤W_i u."""
        h_i = self.input_maps[i]
        return self.step * h_i.T @ h_i


def build_discretized_problem(sys: ClosedLoopSystem, a: int, rho: int, monitors: Sequence[int],
                              settings: Optional[OracleSettings] = None,
                              horizon_factor: Optional[float] = None) -> DiscretizedAttackProblem:
    settings = settings or OracleSettings()
    lam_min, lam_max = float(sys.eigenvalues[0]), float(sys.eigenvalues[-1])
    duration = (horizon_factor or settings.horizon_factor) / lam_min

    fine = max(settings.output_steps, int(np.ceil(duration * lam_max / settings.step_guard)))
    fine = int(np.ceil(fine / settings.hold)) * settings.hold
    step = duration / fine
    horizon = fine // settings.hold

    a_d = scipy.linalg.expm(-sys.lbar * step)
    b_d = np.linalg.solve(sys.lbar, (np.eye(sys.n) - a_d)[:, a])

    outputs = tuple(dict.fromkeys([rho, *monitors]))
    pulse = np.zeros((fine + 1, len(outputs)))
    x = np.zeros(sys.n)
    for j in range(fine):
        x = a_d @ x + (b_d if j < settings.hold else 0.0)
        pulse[j + 1] = x[list(outputs)]

    rows = np.arange(1, fine + 1)[:, None]
    lag = rows - settings.hold * np.arange(horizon)[None, :]
    mask = lag >= 0
    maps = {}
    for k, i in enumerate(outputs):
        maps[i] = np.where(mask, pulse[np.clip(lag, 0, fine), k], 0.0)

    logger.debug(f"Discretized a={a + 1}: step {step:.3e}, {fine} samples, {horizon} attack values")
    return DiscretizedAttackProblem(step=step, hold=settings.hold, horizon=horizon,
                                    outputs=outputs, input_maps=maps)


def _largest_generalized(w_target: np.ndarray, w_monitor: np.ndarray) -> float:
    if not np.any(w_target):
        return 0.0
    k = len(w_monitor)
    ridge = ENERGY_RIDGE * np.trace(w_monitor) / k
    values = scipy.linalg.eigh(w_target, w_monitor + ridge * np.eye(k), eigvals_only=True,
                               subset_by_index=[k - 1, k - 1])
    return float(values[0])


def discretized_impact_oracle(problem: DiscretizedAttackProblem, rho: int, monitors: Sequence[int],
                              delta: Sequence[float]) -> float:
    """Largest target energy under monitor energy budgets, for one or two monitors."""
    monitors = list(monitors)
    if len(monitors) > 2:
        raise ScopeError(f"Discretized oracle handles at most two monitors, got {len(monitors)}")
    if not monitors:
        raise InvalidScenario("Monitor set is empty")

    w_target = problem.energy_form(rho)
    forms = [problem.energy_form(m) for m in monitors]
    if len(monitors) == 1:
        return delta[0] * _largest_generalized(w_target, forms[0])

    def value(t: float) -> float:
        scale = _largest_generalized(w_target, t * forms[0] + (1.0 - t) * forms[1])
        return scale * (t * delta[0] + (1.0 - t) * delta[1])

    refined = minimize_scalar(value, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-6})
    return min(value(0.0), value(1.0), float(refined.fun))
