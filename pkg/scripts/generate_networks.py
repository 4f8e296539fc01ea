#!/usr/bin/env python3
"""
Sample Network Generator for the security allocation toolkit

Generates seeded connected Erdős–Rényi networks in the network JSON format
and a validation report summarizing them (degrees, diameter, algebraic
connectivity, dominating-set counts).
"""

import argparse
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from secalloc.errors import SecAllocError
from secalloc.graph import count_dominating_sets, generate_erdos_renyi, network_summary, save_network, subset_count

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def summarize(path: Path, net, budget: int) -> Dict[str, Any]:
    """Validation record for one generated network."""
    stats = network_summary(net)
    count = count_dominating_sets(net, budget)
    issues = []
    if count == 0:
        issues.append(f"no dominating set with at most {budget} vertices")
    return {
        "file": path.name,
        **stats.model_dump(),
        "dominating_count": count,
        "subset_count": subset_count(net.n, min(budget, net.n)),
        "issues": issues,
    }


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Generate sample network data")
    parser.add_argument("--num_networks", type=int, default=10, help="Number of networks to generate")
    parser.add_argument("--n", type=int, default=20, help="Vertices per network")
    parser.add_argument("--q", type=float, default=0.5, help="Edge probability")
    parser.add_argument("--seed", type=int, default=1, help="Seed of the first network")
    parser.add_argument("--budget", type=int, default=3, help="Sensor budget for the report")
    parser.add_argument("--output_dir", type=str, default="data/networks", help="Output directory for networks")
    parser.add_argument("--report", type=str, default="validation_report.json", help="Validation report file")
    args = parser.parse_args(argv)

    output_dir = Path(args.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    print(f"Generating {args.num_networks} networks G({args.n}, {args.q})...")

    records = []
    for i in range(args.num_networks):
        seed = args.seed + i
        try:
            net = generate_erdos_renyi(args.n, args.q, seed)
        except SecAllocError as e:
            logger.error(f"Error generating network with seed {seed}: {str(e)}")
            return e.exit_code

        filepath = save_network(net, output_dir / f"network_{seed:04d}.json")
        records.append(summarize(filepath, net, args.budget))

        if (i + 1) % 10 == 0:
            print(f"Generated {i + 1}/{args.num_networks} networks...")

    report = {
        "overall_status": "PASS" if not any(r["issues"] for r in records) else "WARN",
        "parameters": {"n": args.n, "q": args.q, "seed": args.seed, "budget": args.budget},
        "networks": records,
    }
    with open(args.report, 'w', encoding='utf-8') as f:
        json.dump(report, f, indent=2, ensure_ascii=False)
        f.write("\n")

    print(f"Network generation complete!")
    print(f"Networks saved to: {output_dir.absolute()}")
    print(f"Overall Status: {report['overall_status']}")
    print(f"Detailed report saved to: {args.report}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
