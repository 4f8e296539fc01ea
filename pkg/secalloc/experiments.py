#!/usr/bin/env python3
"""
Desk-scale experiments.

- Monte-Carlo trend of the dominating-set count against graph size, next to
  the subset count S(n, n_s) and the first-moment estimate.
- The 50-vertex protocol: seeded random network, self-loop tuning, dominating
  sets with three sensors, Stackelberg solution and summary.
- Time-domain stealthiness demonstration: integrate the closed loop under a
  calibrated sinusoidal attack at the certificate's worst frequency.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, field_validator
from scipy.integrate import cumulative_trapezoid

from secalloc.config import Settings, SimulationSettings
from secalloc.dynamics import ClosedLoopSystem, build_system, tune_self_loops
from secalloc.errors import EmptyCollection, InvalidScenario
from secalloc.game import GameSolution, solve_stackelberg
from secalloc.graph import (MonitorSet, count_dominating_sets, enumerate_dominating_sets,
                            generate_erdos_renyi, network_summary, subset_count)
from secalloc.impact import Belief, CostModel, ImpactResult

logger = logging.getLogger(__name__)

TREND_COLUMNS = ["n", "samples", "mean_dom_count", "subset_count"]


class ExperimentConfig(BaseModel):
    n_list: List[int] = [10, 15, 20, 25]
    q: float = Field(0.5, gt=0, le=1)
    samples: int = Field(100, ge=1)
    n_s: int = Field(3, ge=1)
    seed: int = 1
    kappa: float = Field(5.0, ge=0)
    theta_default: float = Field(0.5, gt=0)
    delta_default: float = Field(1.0, gt=0)
    margin: float = Field(0.1, gt=0)
    demo_n: int = Field(50, ge=2)
    max_resamples: int = Field(20, ge=1)
    workers: int = Field(1, ge=1)

    @field_validator("n_list")
    @classmethod
    def _sizes(cls, value: List[int]) -> List[int]:
        if not value or any(n < 2 for n in value):
            raise ValueError("graph sizes must all be at least 2")
        return value

    @classmethod
    def from_settings(cls, settings: Settings, **overrides) -> "ExperimentConfig":
        base = dict(
            q=settings.generation.q,
            n_s=settings.game.budget,
            seed=settings.processing.seed,
            kappa=settings.game.kappa,
            theta_default=settings.network.theta_default,
            delta_default=settings.network.delta_default,
            margin=settings.game.margin,
            workers=settings.processing.workers,
        )
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)


class TrendRow(BaseModel):
    n: int
    samples: int
    mean_dom_count: float
    subset_count: int


def expected_dominating_count(n: int, q: float, n_s: int) -> float:
    """Σ_k C(n,k)(1 − (1 − q)^k)^(n − k): mean count over all G(n, q) samples."""
    return float(sum(math.comb(n, k) * (1.0 - (1.0 - q) ** k) ** (n - k) for k in range(1, n_s + 1)))


def _sample_count(n: int, cfg: ExperimentConfig, index: int) -> int:
    net = generate_erdos_renyi(n, cfg.q, cfg.seed + index, cfg.theta_default, cfg.delta_default)
    return count_dominating_sets(net, cfg.n_s)


def count_dominating_trend(cfg: ExperimentConfig) -> List[TrendRow]:
    """Mean dominating-set count per graph size; sample i uses seed base + i."""
    rows = []
    for n in cfg.n_list:
        counts = [0] * cfg.samples
        if cfg.workers <= 1:
            counts = [_sample_count(n, cfg, i) for i in range(cfg.samples)]
        else:
            with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
                future_to_index = {executor.submit(_sample_count, n, cfg, i): i for i in range(cfg.samples)}
                for future in as_completed(future_to_index):
                    counts[future_to_index[future]] = future.result()

        mean = float(np.mean(counts))
        rows.append(TrendRow(n=n, samples=cfg.samples, mean_dom_count=mean,
                             subset_count=subset_count(n, min(cfg.n_s, n))))
        logger.info(f"n={n}: mean dominating count {mean:.3f} "
                    f"(first-moment estimate {expected_dominating_count(n, cfg.q, cfg.n_s):.3f})")
    return rows


def write_trend(rows: Sequence[TrendRow], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([row.model_dump() for row in rows], columns=TREND_COLUMNS)
    frame.to_csv(path, index=False, float_format="%.9g", lineterminator="\n")
    logger.info(f"Wrote {len(rows)} trend rows to {path}")
    return path


@dataclass
class DemoReport:
    solution: GameSolution
    summary: Dict[str, object]

    def to_document(self) -> dict:
        return {"summary": self.summary, "solution": self.solution.to_document()}


def run_demo50(seed: int, cfg: Optional[ExperimentConfig] = None,
               settings: Optional[Settings] = None) -> DemoReport:
    """Seeded 50-vertex run: generate, tune, enumerate, solve, summarize.

    A sample without a dominating set inside the budget is replaced by the
    next seed; the seed actually used is reported.
    """
    cfg = cfg or ExperimentConfig()
    settings = settings or Settings()
    belief = Belief()
    cost = CostModel(kappa=cfg.kappa)

    for attempt in range(cfg.max_resamples):
        used_seed = seed + attempt
        net = generate_erdos_renyi(cfg.demo_n, cfg.q, used_seed, cfg.theta_default, cfg.delta_default,
                                   settings.generation.max_attempts)
        try:
            collection = enumerate_dominating_sets(net, cfg.n_s, cfg.workers)
        except EmptyCollection:
            logger.warning(f"Seed {used_seed}: no dominating set with {cfg.n_s} sensors, resampling")
            continue
        break
    else:
        raise EmptyCollection(f"No sampled network had a dominating set after {cfg.max_resamples} seeds")

    tuned = tune_self_loops(net, cfg.margin, settings.dynamics, cfg.workers)
    sys = build_system(tuned, settings.dynamics)
    solution = solve_stackelberg(sys, collection, belief, cost, cfg.workers, settings.impact)

    q_all = [q.value for row in solution.table for q in row.q_by_attack]
    r_all = [cost.cost(len(row.m)) + q.value for row in solution.table for q in row.q_by_attack]
    stats = network_summary(net)
    summary = {
        "seed": used_seed,
        "n": stats.n,
        "edges": stats.edges,
        "theta_offset": float(tuned.theta[0] - net.theta[0]),
        "dominating_count": len(collection),
        "subset_count": subset_count(cfg.demo_n, cfg.n_s),
        "max_r": max(r_all),
        "max_q": max(q_all),
        "r_star": solution.r_star,
        "q_star": solution.q_star,
        "m_star": solution.best_monitor_set.one_based(),
        "a_star": solution.best_attack + 1,
    }
    logger.info(f"Demo seed {used_seed}: {len(collection)} dominating sets, R*={solution.r_star:.6g}")
    return DemoReport(solution=solution, summary=summary)


@dataclass
class Trace:
    t: np.ndarray
    x: np.ndarray
    a: int
    rho: int
    monitors: Tuple[int, ...]
    amplitude: float
    omega: float
    outputs: Dict[int, np.ndarray] = field(default_factory=dict)
    powers: Dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def step(self) -> float:
        return float(self.t[1] - self.t[0])

    def final_power(self, vertex: int) -> float:
        return float(self.powers[vertex][-1])


def _rk4(lbar: np.ndarray, a: int, attack, t: np.ndarray) -> np.ndarray:
    """Fixed-step RK4 for ẋ = −L̄x + e_a ζ(t) from x(0) = 0."""
    n = len(lbar)
    h = t[1] - t[0]
    e_a = np.zeros(n)
    e_a[a] = 1.0

    def f(time: float, x: np.ndarray) -> np.ndarray:
        return -lbar @ x + e_a * attack(time)

    x = np.zeros((len(t), n))
    for k in range(len(t) - 1):
        tk, xk = t[k], x[k]
        k1 = f(tk, xk)
        k2 = f(tk + h / 2, xk + h * k1 / 2)
        k3 = f(tk + h / 2, xk + h * k2 / 2)
        k4 = f(tk + h, xk + h * k3)
        x[k + 1] = xk + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
    return x


def _running_power(y: np.ndarray, t: np.ndarray) -> np.ndarray:
    energy = cumulative_trapezoid(y ** 2, t, initial=0.0)
    power = np.zeros_like(energy)
    power[1:] = energy[1:] / t[1:]
    return power


def simulate_attack(sys: ClosedLoopSystem, a: int, rho: int, m_set: MonitorSet, impact: ImpactResult,
                    duration: Optional[float] = None, amplitude: Optional[float] = None,
                    settings: Optional[SimulationSettings] = None) -> Trace:
    """Integrate the attacked closed loop and record outputs and running powers.

    The attack is α·sin(ω*t), or the constant α when ω* = 0. Unless an
    amplitude is given, α is set so the binding monitor ends the run at
    (1 − headroom)·δ_m; the system is linear from rest, so the unit-amplitude
    run is simply rescaled.
    """
    settings = settings or SimulationSettings()
    if not impact.is_bounded:
        raise InvalidScenario("Cannot simulate an attack with unbounded impact")
    if impact.worst_frequency is None:
        raise InvalidScenario("Worst case sits at infinite frequency; no sinusoid to simulate")
    if rho == a:
        raise InvalidScenario(f"Target {rho + 1} equals the attack vertex")

    duration = duration or settings.duration
    omega = float(impact.worst_frequency)
    steps = int(np.ceil(duration * sys.scale / settings.step_guard))
    t = np.linspace(0.0, duration, steps + 1)

    if omega > 0:
        unit_attack = lambda time: np.sin(omega * time)  # noqa: E731
    else:
        unit_attack = lambda time: 1.0  # noqa: E731
    x_unit = _rk4(sys.lbar, a, unit_attack, t)

    monitors = tuple(m_set.vertices)
    if amplitude is None:
        unit_powers = {m: _running_power(x_unit[:, m], t)[-1] for m in monitors}
        ratios = [sys.delta[m] / p for m, p in unit_powers.items() if p > 0]
        amplitude = float(np.sqrt((1.0 - settings.headroom) * min(ratios))) if ratios else 0.0

    x = amplitude * x_unit
    vertices = dict.fromkeys([rho, *monitors])
    outputs = {v: x[:, v] for v in vertices}
    powers = {v: _running_power(outputs[v], t) for v in vertices}

    logger.info(f"Simulated a={a + 1} rho={rho + 1} M={m_set.one_based()}: amplitude {amplitude:.6g}, "
                f"omega {omega:.6g}, target power {powers[rho][-1]:.6g}")
    return Trace(t=t, x=x, a=a, rho=rho, monitors=monitors, amplitude=amplitude, omega=omega,
                 outputs=outputs, powers=powers)


def write_trace(trace: Trace, out_dir: Union[str, Path], stem: str = "trace") -> Tuple[Path, Path]:
    """CSV trace plus an 8-line JSON header sidecar."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    columns = {"t": trace.t}
    for i in range(trace.x.shape[1]):
        columns[f"x_{i + 1}"] = trace.x[:, i]
    columns["y_rho"] = trace.outputs[trace.rho]
    for m in trace.monitors:
        columns[f"y_m{m + 1}"] = trace.outputs[m]
    columns["p_rho"] = trace.powers[trace.rho]
    for m in trace.monitors:
        columns[f"p_m{m + 1}"] = trace.powers[m]

    csv_path = out_dir / f"{stem}.csv"
    pd.DataFrame(columns).to_csv(csv_path, index=False, float_format="%.9g", lineterminator="\n")

    header = {
        "a": trace.a + 1,
        "rho": trace.rho + 1,
        "monitors": [m + 1 for m in trace.monitors],
        "amplitude": float(f"{trace.amplitude:.9g}"),
        "omega": float(f"{trace.omega:.9g}"),
        "step": float(f"{trace.step:.9g}"),
    }
    lines = [f"  {json.dumps(key)}: {json.dumps(value)}" for key, value in header.items()]
    header_path = out_dir / f"{stem}.header.json"
    with open(header_path, 'w', encoding='utf-8') as f:
        f.write("{\n" + ",\n".join(lines) + "\n}\n")

    logger.info(f"Wrote trace {csv_path} ({len(trace.t)} samples)")
    return csv_path, header_path
