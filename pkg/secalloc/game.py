#!/usr/bin/env python3
"""
Stackelberg sensor-placement game.

The defender announces a dominating monitor set M; the adversary answers
with the attack vertex maximizing the expected impact Q(a, M); the defender
picks the M minimizing R(a*(M), M) = κ|M| + Q(a*(M), M).

Ties: the adversary prefers the smallest vertex index; the defender prefers
smaller R, then smaller |M|, then the lexicographically smaller M.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from secalloc.config import ImpactSettings
from secalloc.dynamics import ClosedLoopSystem
from secalloc.errors import EmptyCollection, UnboundedImpact
from secalloc.graph import DominatingCollection, MonitorSet, partition
from secalloc.impact import Belief, CostModel, ImpactAnalyzer, ScenarioCost
from secalloc.output import dumps

logger = logging.getLogger(__name__)

TIE_RTOL = 1e-9


def _within(value: float, best: float) -> bool:
    return abs(value - best) <= TIE_RTOL * max(1.0, abs(best))


@dataclass
class GameRow:
    m: MonitorSet
    a_best: int
    r: ScenarioCost
    q: ScenarioCost
    q_by_attack: List[ScenarioCost] = field(default_factory=list, repr=False)

    def to_document(self) -> dict:
        return {
            "m": self.m.one_based(),
            "a_best": self.a_best + 1,
            "r": self.r.value,
            "q": self.q.value,
        }


@dataclass
class GameSolution:
    best_monitor_set: MonitorSet
    best_attack: int
    r_star: float
    q_star: float
    table: List[GameRow]

    def to_document(self) -> dict:
        return {
            "m_star": self.best_monitor_set.one_based(),
            "a_star": self.best_attack + 1,
            "r_star": self.r_star,
            "q_star": self.q_star,
            "table": [row.to_document() for row in self.table],
        }

    def to_json(self) -> str:
        return dumps(self.to_document())


def adversary_choice(q_values: Sequence[ScenarioCost]) -> int:
    """Maximizer of Q; an Unbounded attack wins outright; ties go to the smallest index."""
    for a, q in enumerate(q_values):
        if not q.is_bounded:
            return a
    best = max(q.value for q in q_values)
    return next(a for a, q in enumerate(q_values) if _within(q.value, best) or q.value > best)


def attack_values(analyzer: ImpactAnalyzer, m_set: MonitorSet, belief: Belief) -> List[ScenarioCost]:
    return [analyzer.expected_impact(a, m_set, belief) for a in range(analyzer.sys.n)]


def best_response(sys: ClosedLoopSystem, m_set: MonitorSet, belief: Belief,
                  settings: Optional[ImpactSettings] = None) -> Tuple[int, ScenarioCost]:
    """a*(M) over the whole vertex set, with its Q value."""
    values = attack_values(ImpactAnalyzer.for_system(sys, settings), m_set, belief)
    a = adversary_choice(values)
    return a, values[a]


def _evaluate_row(analyzer: ImpactAnalyzer, m_set: MonitorSet, belief: Belief, cost: CostModel) -> GameRow:
    values = attack_values(analyzer, m_set, belief)
    a = adversary_choice(values)
    return GameRow(m=m_set, a_best=a, r=values[a].plus(cost.cost(len(m_set))), q=values[a], q_by_attack=values)


def _evaluate_chunk(analyzer: ImpactAnalyzer, chunk: List[MonitorSet], belief: Belief,
                    cost: CostModel) -> List[GameRow]:
    return [_evaluate_row(analyzer, m_set, belief, cost) for m_set in chunk]


def defender_choice(table: Sequence[GameRow]) -> GameRow:
    bounded = [row for row in table if row.r.is_bounded]
    if not bounded:
        raise UnboundedImpact("Every monitor set leaves some attack unbounded")
    best = min(row.r.value for row in bounded)
    ties = [row for row in bounded if _within(row.r.value, best) or row.r.value < best]
    return min(ties, key=lambda row: (len(row.m), row.m.vertices))


def _solution(table: List[GameRow]) -> GameSolution:
    chosen = defender_choice(table)
    return GameSolution(
        best_monitor_set=chosen.m,
        best_attack=chosen.a_best,
        r_star=chosen.r.value,
        q_star=chosen.q.value,
        table=table,
    )


def solve_stackelberg(sys: ClosedLoopSystem, collection: DominatingCollection, belief: Belief,
                      cost: CostModel, workers: int = 1,
                      settings: Optional[ImpactSettings] = None) -> GameSolution:
    """Evaluate every monitor set, in parallel chunks, and pick the Stackelberg pair."""
    if len(collection) == 0:
        raise EmptyCollection("No monitor sets to evaluate")

    start_time = time.time()
    analyzer = ImpactAnalyzer.for_system(sys, settings)
    chunks = partition(list(collection), workers)

    results: List[List[GameRow]] = [[] for _ in chunks]
    if workers <= 1:
        results = [_evaluate_chunk(analyzer, chunk, belief, cost) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            future_to_chunk = {
                executor.submit(_evaluate_chunk, analyzer, chunk, belief, cost): i
                for i, chunk in enumerate(chunks)
            }
            for future in as_completed(future_to_chunk):
                results[future_to_chunk[future]] = future.result()

    table = [row for chunk_rows in results for row in chunk_rows]
    solution = _solution(table)

    elapsed = time.time() - start_time
    logger.info(
        f"Solved game over {len(table)} monitor sets in {elapsed:.2f}s: "
        f"M*={solution.best_monitor_set.one_based()}, a*={solution.best_attack + 1}, R*={solution.r_star:.6g}"
    )
    return solution


def brute_force_stackelberg(sys: ClosedLoopSystem, collection: DominatingCollection, belief: Belief,
                            cost: CostModel, settings: Optional[ImpactSettings] = None) -> GameSolution:
    """Plain double loop over monitor sets and attack vertices."""
    if len(collection) == 0:
        raise EmptyCollection("No monitor sets to evaluate")

    analyzer = ImpactAnalyzer.for_system(sys, settings)
    table = []
    for m_set in collection:
        best_a, best_q = None, None
        values = []
        for a in range(sys.n):
            q = analyzer.expected_impact(a, m_set, belief)
            values.append(q)
            if best_a is None:
                best_a, best_q = a, q
            elif not best_q.is_bounded:
                continue
            elif not q.is_bounded:
                best_a, best_q = a, q
            elif q.value > best_q.value and not _within(q.value, best_q.value):
                best_a, best_q = a, q
        table.append(GameRow(m=m_set, a_best=best_a, r=best_q.plus(cost.cost(len(m_set))),
                             q=best_q, q_by_attack=values))

    best_row = None
    for row in table:
        if not row.r.is_bounded:
            continue
        if best_row is None:
            best_row = row
        elif row.r.value < best_row.r.value and not _within(row.r.value, best_row.r.value):
            best_row = row
        elif _within(row.r.value, best_row.r.value) and \
                (len(row.m), row.m.vertices) < (len(best_row.m), best_row.m.vertices):
            best_row = row
    if best_row is None:
        raise UnboundedImpact("Every monitor set leaves some attack unbounded")

    return GameSolution(best_monitor_set=best_row.m, best_attack=best_row.a_best,
                        r_star=best_row.r.value, q_star=best_row.q.value, table=table)


def verify_stackelberg(solution: GameSolution, sys: ClosedLoopSystem, belief: Belief, cost: CostModel,
                       settings: Optional[ImpactSettings] = None) -> bool:
    """Re-check both optimality conditions row by row."""
    analyzer = ImpactAnalyzer.for_system(sys, settings)

    for row in solution.table:
        values = attack_values(analyzer, row.m, belief)
        chosen = values[row.a_best]
        if not chosen.is_bounded:
            if row.q.is_bounded or row.r.is_bounded:
                logger.warning(f"Row {row.m.one_based()}: a*={row.a_best + 1} is unbounded but Q or R is finite")
                return False
            if any(not q.is_bounded for q in values[:row.a_best]):
                logger.warning(f"Row {row.m.one_based()}: an unbounded attack precedes a*={row.a_best + 1}")
                return False
            continue
        if not row.q.is_bounded or not _within(row.q.value, chosen.value):
            logger.warning(f"Row {row.m.one_based()}: recorded Q {row.q.value} != {chosen.value}")
            return False
        for a, q in enumerate(values):
            if not q.is_bounded or q.value > chosen.value + TIE_RTOL * max(1.0, abs(chosen.value)):
                logger.warning(f"Row {row.m.one_based()}: attack {a + 1} beats a*={row.a_best + 1}")
                return False
        if not _within(row.r.value, cost.cost(len(row.m)) + chosen.value):
            logger.warning(f"Row {row.m.one_based()}: R is not c(|M|) + Q")
            return False

    if not _within(solution.r_star, cost.cost(len(solution.best_monitor_set)) + solution.q_star):
        logger.warning("r_star is not c(|M*|) + q_star")
        return False

    star_row = next((row for row in solution.table if row.m == solution.best_monitor_set), None)
    if star_row is None or not _within(star_row.r.value, solution.r_star) \
            or star_row.a_best != solution.best_attack:
        logger.warning("Solution does not match its own table row")
        return False

    for row in solution.table:
        if row.r.is_bounded and row.r.value < solution.r_star - TIE_RTOL * max(1.0, abs(solution.r_star)):
            logger.warning(f"Row {row.m.one_based()} has smaller R than M*")
            return False
    return True
