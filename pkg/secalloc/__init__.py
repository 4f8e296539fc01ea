#!/usr/bin/env python3
"""
Security Allocation - Stackelberg sensor placement for networked control systems
"""

from .graph import Network, MonitorSet, DominatingCollection, parse_network, enumerate_dominating_sets
from .dynamics import ClosedLoopSystem, build_system, tune_self_loops
from .impact import Belief, CostModel, ImpactResult, ImpactStatus, worst_case_impact, expected_impact
from .game import GameSolution, solve_stackelberg

__version__ = "1.0.0"
__all__ = [
    "Network", "MonitorSet", "DominatingCollection", "parse_network", "enumerate_dominating_sets",
    "ClosedLoopSystem", "build_system", "tune_self_loops",
    "Belief", "CostModel", "ImpactResult", "ImpactStatus", "worst_case_impact", "expected_impact",
    "GameSolution", "solve_stackelberg",
]
