#!/usr/bin/env python3
"""
Command-line surface for the security allocation toolkit.

    python -m secalloc dominating --network net.json --budget 2
    python -m secalloc impact --network net.json --a 1 --rho 3 --monitors 2
    python -m secalloc solve --network net.json --budget 1 --kappa 5
    python -m secalloc experiment fig2 --n-list 10,15 --samples 5
    python -m secalloc generate --n 20 --q 0.5 --seed 7

Vertices are 1-based on the command line and in every file written.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from secalloc.config import RunConfig, build_run_config
from secalloc.dynamics import build_system, tune_self_loops, zero_report
from secalloc.errors import NumericalError, SchemaError, SecAllocError, UnboundedImpact
from secalloc.experiments import (ExperimentConfig, count_dominating_trend, run_demo50,
                                  simulate_attack, write_trace, write_trend)
from secalloc.game import brute_force_stackelberg, solve_stackelberg, verify_stackelberg
from secalloc.graph import (MonitorSet, Network, enumerate_dominating_sets, generate_erdos_renyi,
                            load_network, network_summary, save_network, subset_count)
from secalloc.impact import Belief, CostModel, ImpactAnalyzer, zero_condition
from secalloc.oracle import build_discretized_problem, discretized_impact_oracle, sweep_ratio_oracle
from secalloc.output import write_json

logger = logging.getLogger(__name__)


def _vertex_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from e


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=str, default=None, help="JSON or YAML config file (flag vocabulary)")
    parent.add_argument("--network", type=str, default=None, help="Network JSON file")
    parent.add_argument("--budget", type=int, default=None, help="Sensor budget n_s")
    parent.add_argument("--kappa", type=float, default=None, help="Cost per sensor")
    parent.add_argument("--belief", type=str, default=None, help="'uniform' or a belief JSON file")
    parent.add_argument("--margin", type=float, default=None, help="Self-loop tuning margin")
    parent.add_argument("--workers", type=int, default=None, help="Worker threads")
    parent.add_argument("--seed", type=int, default=None, help="Random seed")
    parent.add_argument("--out", type=str, default=None, help="Output directory")
    parent.add_argument("--tune", action=argparse.BooleanOptionalAction, default=None,
                        help="Shift self-loop gains so every invariant zero sits at Re <= -margin (solve: on by default)")
    parent.add_argument("--verify", action="store_true", default=None, help="Re-check results with oracles")
    parent.add_argument("--require-bounded", dest="require_bounded", action="store_true", default=None,
                        help="Fail with exit code 5 on an unbounded impact")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="secalloc", description="Stackelberg sensor placement for networked control")
    common = _common_options()
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("dominating", parents=[common], help="Enumerate dominating monitor sets")

    impact = sub.add_parser("impact", parents=[common], help="Worst-case impact for one scenario")
    impact.add_argument("--a", type=int, required=True, help="Attack vertex")
    impact.add_argument("--rho", type=int, required=True, help="Target vertex")
    impact.add_argument("--monitors", type=_vertex_list, required=True, help="Comma-separated monitor vertices")
    impact.add_argument("--zeros", type=str, default=None, help="Write the invariant-zero dump here")

    sub.add_parser("solve", parents=[common], help="Solve the Stackelberg game")

    experiment = sub.add_parser("experiment", parents=[common], help="Run an experiment")
    experiment.add_argument("which", choices=["fig2", "demo50", "simulate"])
    experiment.add_argument("--n-list", dest="n_list", type=_vertex_list, default=None, help="Graph sizes")
    experiment.add_argument("--samples", type=int, default=None, help="Monte-Carlo samples per size")
    experiment.add_argument("--q", type=float, default=None, help="Edge probability")
    experiment.add_argument("--n", type=int, default=None, help="Demo network size")
    experiment.add_argument("--a", type=int, default=None, help="Attack vertex (simulate)")
    experiment.add_argument("--rho", type=int, default=None, help="Target vertex (simulate)")
    experiment.add_argument("--monitors", type=_vertex_list, default=None, help="Monitor vertices (simulate)")
    experiment.add_argument("--duration", type=float, default=None, help="Simulated time (simulate)")

    generate = sub.add_parser("generate", parents=[common], help="Write a seeded Erdős–Rényi network")
    generate.add_argument("--n", type=int, required=True, help="Vertex count")
    generate.add_argument("--q", type=float, default=None, help="Edge probability")
    generate.add_argument("--output", type=str, default=None, help="Network file (default OUT/network.json)")
    return parser


def _flags(args: argparse.Namespace) -> Dict[str, Any]:
    keys = ["network", "budget", "kappa", "belief", "margin", "workers", "seed", "out",
            "tune", "verify", "require_bounded", "q"]
    return {key: getattr(args, key, None) for key in keys}


def _load_network(cfg: RunConfig, tune_by_default: bool = False) -> Network:
    if not cfg.network_path:
        raise SchemaError("No network given (use --network or the config file)")
    defaults = cfg.settings.network
    net = load_network(cfg.network_path, theta_default=defaults.theta_default,
                       delta_default=defaults.delta_default)
    tune = tune_by_default if cfg.tune is None else cfg.tune
    if tune:
        net = tune_self_loops(net, cfg.margin, cfg.settings.dynamics, cfg.workers)
    return net


def _load_belief(cfg: RunConfig, n: int) -> Belief:
    if cfg.belief == "uniform":
        return Belief()
    path = Path(cfg.belief)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            document = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise SchemaError(f"Cannot read belief file {path}: {e}") from e
    return Belief.from_document(document).check(n)


def _zero_based(vertices: List[int], n: int) -> List[int]:
    for v in vertices:
        if not 1 <= v <= n:
            raise SchemaError(f"Vertex {v} outside 1..{n}")
    return [v - 1 for v in vertices]


def _monitor_set(vertices: List[int], n: int) -> MonitorSet:
    try:
        return MonitorSet.of(_zero_based(vertices, n))
    except ValidationError as e:
        raise SchemaError(f"Invalid monitor list {vertices}: {e}") from e


def cmd_dominating(cfg: RunConfig) -> int:
    net = _load_network(cfg)
    collection = enumerate_dominating_sets(net, cfg.budget, cfg.workers)
    total = subset_count(net.n, min(cfg.budget, net.n))

    out_dir = Path(cfg.out_dir)
    write_json(collection.to_document(), out_dir / "dominating.json")
    write_json({
        "count": len(collection),
        "subset_count": total,
        "budget": cfg.budget,
        "network": network_summary(net).model_dump(),
    }, out_dir / "dominating_summary.json")

    print(f"Dominating sets: {len(collection)} of {total} subsets (budget {cfg.budget})")
    return 0


def cmd_impact(cfg: RunConfig, a: int, rho: int, monitors: List[int], zeros_path: Optional[str] = None) -> int:
    net = _load_network(cfg)
    a, rho = _zero_based([a, rho], net.n)
    m_set = _monitor_set(monitors, net.n)

    sys_ = build_system(net, cfg.settings.dynamics)
    analyzer = ImpactAnalyzer.for_system(sys_, cfg.settings.impact)
    result = analyzer.worst_case_impact(a, rho, m_set)

    if not cfg.tune and not any(zero_condition(sys_, a, rho, m) for m in m_set):
        logger.warning("No monitor shares the unstable invariant zeros of the attack channel; consider --tune")

    document = {"a": a + 1, "rho": rho + 1, "monitors": m_set.one_based(), **result.to_document()}
    if cfg.verify and result.is_bounded:
        document["oracle"] = _impact_oracle(sys_, a, rho, m_set, cfg)
    write_json(document, Path(cfg.out_dir) / "impact.json")

    if zeros_path:
        report = zero_report(sys_, [(a, m) for m in sorted({rho, *m_set.vertices})])
        write_json(report.to_records(), zeros_path)

    if result.is_bounded:
        print(f"J = {result.value:.9g} (worst frequency {result.worst_frequency})")
    else:
        print("J = unbounded")
        if cfg.require_bounded:
            raise UnboundedImpact(f"Impact of a={a + 1} on rho={rho + 1} is unbounded for M={m_set.one_based()}")
    return 0


def _impact_oracle(sys_, a: int, rho: int, m_set: MonitorSet, cfg: RunConfig) -> Optional[float]:
    oracle_settings = cfg.settings.oracle
    if len(m_set) == 1:
        return sweep_ratio_oracle(sys_, a, rho, m_set.vertices[0], settings=oracle_settings)
    if len(m_set) == 2:
        problem = build_discretized_problem(sys_, a, rho, m_set.vertices, oracle_settings)
        return discretized_impact_oracle(problem, rho, m_set.vertices, sys_.delta[list(m_set.vertices)])
    logger.warning(f"No oracle for {len(m_set)} monitors")
    return None


def cmd_solve(cfg: RunConfig) -> int:
    net = _load_network(cfg, tune_by_default=True)
    sys_ = build_system(net, cfg.settings.dynamics)
    belief = _load_belief(cfg, net.n)
    cost = CostModel(kappa=cfg.kappa)

    collection = enumerate_dominating_sets(net, cfg.budget, cfg.workers)
    solution = solve_stackelberg(sys_, collection, belief, cost, cfg.workers, cfg.settings.impact)

    if cfg.verify:
        if not verify_stackelberg(solution, sys_, belief, cost, cfg.settings.impact):
            raise NumericalError("Stackelberg verification failed")
        reference = brute_force_stackelberg(sys_, collection, belief, cost, cfg.settings.impact)
        if reference.to_json() != solution.to_json():
            raise NumericalError("Brute-force solution differs from the parallel solver")
        logger.info("Solution verified")

    write_json(solution.to_document(), Path(cfg.out_dir) / "solution.json")
    print(f"M* = {solution.best_monitor_set.one_based()}")
    print(f"a* = {solution.best_attack + 1}")
    print(f"R* = {solution.r_star:.9g}")
    print(f"Q* = {solution.q_star:.9g}")
    return 0


def cmd_experiment(cfg: RunConfig, which: str, args: argparse.Namespace) -> int:
    out_dir = Path(cfg.out_dir)
    try:
        exp = ExperimentConfig.from_settings(
            cfg.settings,
            n_list=args.n_list,
            samples=args.samples,
            demo_n=args.n,
            n_s=cfg.budget,
            kappa=cfg.kappa,
            margin=cfg.margin,
            seed=cfg.seed,
            workers=cfg.workers,
        )
    except ValidationError as e:
        raise SchemaError(f"Invalid experiment options: {e}") from e

    if which == "fig2":
        rows = count_dominating_trend(exp)
        write_trend(rows, out_dir / "fig2.csv")
        for row in rows:
            print(f"n={row.n}: mean {row.mean_dom_count:.4f} of {row.subset_count} subsets")
        return 0

    if which == "demo50":
        report = run_demo50(exp.seed, exp, cfg.settings)
        write_json(report.to_document(), out_dir / "demo50.json")
        for key, value in report.summary.items():
            print(f"{key}: {value}")
        return 0

    if args.a is None or args.rho is None or not args.monitors:
        raise SchemaError("simulate needs --a, --rho and --monitors")
    net = _load_network(cfg)
    a, rho = _zero_based([args.a, args.rho], net.n)
    m_set = _monitor_set(args.monitors, net.n)
    sys_ = build_system(net, cfg.settings.dynamics)
    impact = ImpactAnalyzer.for_system(sys_, cfg.settings.impact).worst_case_impact(a, rho, m_set)
    trace = simulate_attack(sys_, a, rho, m_set, impact, args.duration, settings=cfg.settings.simulation)
    write_trace(trace, out_dir)
    print(f"Target power {trace.final_power(rho):.9g}, impact {impact.value:.9g}")
    return 0


def cmd_generate(cfg: RunConfig, n: int, output: Optional[str] = None) -> int:
    settings = cfg.settings
    net = generate_erdos_renyi(n, settings.generation.q, cfg.seed,
                               settings.network.theta_default, settings.network.delta_default,
                               settings.generation.max_attempts)
    path = save_network(net, output or Path(cfg.out_dir) / "network.json")
    print(f"Generated G({n}, {settings.generation.q}) with {len(net.edges)} edges: {path}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=os.getenv("LOG_LEVEL", "INFO").upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    )
    args = build_parser().parse_args(argv)

    try:
        cfg = build_run_config(args.config, _flags(args))
        if args.command == "dominating":
            return cmd_dominating(cfg)
        if args.command == "impact":
            return cmd_impact(cfg, args.a, args.rho, args.monitors, args.zeros)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "experiment":
            return cmd_experiment(cfg, args.which, args)
        return cmd_generate(cfg, args.n, args.output)
    except SecAllocError as e:
        logger.error(f"{type(e).__name__}: {str(e)}")
        return e.exit_code
    except ValidationError as e:
        logger.error(f"Invalid input: {str(e)}")
        return SchemaError.exit_code


if __name__ == "__main__":
    sys.exit(main())
