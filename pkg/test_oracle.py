import itertools
from functools import lru_cache

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from secalloc.config import OracleSettings
from secalloc.dynamics import build_system, tune_self_loops
from secalloc.errors import InvalidScenario, ScopeError
from secalloc.graph import MonitorSet, generate_erdos_renyi, make_network
from secalloc.impact import single_monitor_bound, worst_case_impact
from secalloc.oracle import (build_discretized_problem, discretized_impact_oracle, dominating_oracle,
                             sweep_pair_oracle, sweep_ratio_oracle)


class TestDominatingOracle:
    def test_path(self, p3):
        assert dominating_oracle(p3, MonitorSet.of([1]))
        assert not dominating_oracle(p3, MonitorSet.of([2]))

    def test_star(self, star):
        assert dominating_oracle(star, MonitorSet.of([0]))
        assert not dominating_oracle(star, MonitorSet.of([1, 2, 3]))


class TestSweepOracle:
    def test_path_values(self, p3_system):
        assert sweep_ratio_oracle(p3_system, 0, 2, 1) == pytest.approx(4 / 9, rel=1e-6)
        assert sweep_ratio_oracle(p3_system, 0, 2, 0) == pytest.approx(1 / 7.5625, rel=1e-6)
        assert sweep_ratio_oracle(p3_system, 0, 2, 2) == pytest.approx(1.0, rel=1e-9)

    def test_rejects_unbounded_scenario(self, p3_system):
        with pytest.raises(InvalidScenario):
            sweep_ratio_oracle(p3_system, 0, 1, 2)

    def test_pair(self, p3_system):
        assert sweep_pair_oracle(p3_system, 0, 2, (0, 1), grid_size=20_000) == pytest.approx(1 / 7.5625, rel=1e-4)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(min_value=3, max_value=6), st.integers(min_value=0, max_value=10_000))
    def test_agrees_with_library(self, n, seed):
        sys = build_system(generate_erdos_renyi(n, 0.5, seed))
        for a, rho, m in itertools.islice(itertools.permutations(range(n), 3), 12):
            result = single_monitor_bound(sys, a, rho, m)
            if not result.is_bounded:
                continue
            assert sweep_ratio_oracle(sys, a, rho, m, grid_size=20_000) == pytest.approx(result.value, rel=1e-5)


class TestDiscretizedOracle:
    @pytest.fixture(scope="class")
    def path_problem(self):
        sys = build_system(make_network(3, [(0, 1), (1, 2)]))
        return build_discretized_problem(sys, 0, 2, [0, 1])

    def test_shapes(self, path_problem):
        k = path_problem.horizon
        assert path_problem.outputs == (2, 0, 1)
        assert path_problem.input_maps[2].shape == (k * path_problem.hold, k)
        assert path_problem.energy_form(2).shape == (k, k)
        assert path_problem.duration == pytest.approx(100.0)

    def test_single_monitor(self, path_problem):
        assert discretized_impact_oracle(path_problem, 2, [1], [1.0]) == pytest.approx(4 / 9, rel=0.05)

    def test_threshold_scaling(self, path_problem):
        once = discretized_impact_oracle(path_problem, 2, [1], [1.0])
        assert discretized_impact_oracle(path_problem, 2, [1], [2.0]) == pytest.approx(2 * once)

    def test_two_monitors(self, path_problem, p3_system):
        expected = worst_case_impact(p3_system, 0, 2, MonitorSet.of([0, 1])).value
        assert discretized_impact_oracle(path_problem, 2, [0, 1], [1.0, 1.0]) == pytest.approx(expected, rel=0.05)

    def test_scope(self, path_problem):
        with pytest.raises(ScopeError):
            discretized_impact_oracle(path_problem, 2, [0, 1, 2], [1.0, 1.0, 1.0])
        with pytest.raises(InvalidScenario):
            discretized_impact_oracle(path_problem, 2, [], [])

    def test_longer_horizon_never_lowers_the_value(self, p3_system):
        # Same step at every horizon: a shorter attack fits at the end of a longer one.
        oracle_settings = OracleSettings(output_steps=10, step_guard=175 / 349.5)
        values = []
        for factor in (25, 50, 100, 200):
            problem = build_discretized_problem(p3_system, 0, 2, [1], oracle_settings, horizon_factor=factor)
            assert problem.step == pytest.approx(1 / 7)
            values.append(discretized_impact_oracle(problem, 2, [1], [1.0]))
        for shorter, longer in zip(values, values[1:]):
            assert longer >= shorter * (1 - 1e-6)
        for shorter, longer in zip(values[1:], values[2:]):
            assert abs(longer - shorter) / longer < 0.01
        assert values[-1] <= 4 / 9 * (1 + 1e-6)


@lru_cache(maxsize=None)
def two_monitor_scenarios(count):
    """(system, a, rho, monitors) with both monitors strictly closer to a than rho is."""
    found = []
    for seed in range(500):
        net = tune_self_loops(generate_erdos_renyi(5, 0.5, seed), 0.1)
        lengths = dict(nx.all_pairs_shortest_path_length(net.to_networkx()))
        scenario = next(
            ((a, rho, pair) for a in range(5) for rho in range(5) if lengths[a][rho] >= 2
             for pair in itertools.combinations(range(5), 2)
             if rho not in pair and all(lengths[a][m] < lengths[a][rho] for m in pair)),
            None,
        )
        if scenario is not None:
            found.append((build_system(net), *scenario))
        if len(found) == count:
            return found
    raise AssertionError(f"only {len(found)} scenarios found")


@pytest.mark.slow
@pytest.mark.parametrize("index", range(20))
def test_two_monitor_impact_matches_time_domain(index):
    sys, a, rho, pair = two_monitor_scenarios(20)[index]
    expected = worst_case_impact(sys, a, rho, MonitorSet.of(list(pair))).value
    problem = build_discretized_problem(sys, a, rho, list(pair))
    delta = [float(sys.delta[m]) for m in pair]
    assert discretized_impact_oracle(problem, rho, list(pair), delta) == pytest.approx(expected, rel=0.05)
