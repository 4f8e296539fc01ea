import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from secalloc.config import ImpactSettings
from secalloc.dynamics import build_system, relative_degree
from secalloc.errors import InvalidScenario, IterationLimit, SchemaError
from secalloc.graph import MonitorSet, generate_erdos_renyi, is_dominating, make_network
from secalloc.impact import (Belief, CostModel, ImpactAnalyzer, ImpactResult, ImpactStatus, ScenarioCost,
                             boundedness, defense_cost, density_coefficients, expected_impact,
                             single_monitor_bound, spectral_density, worst_case_impact, zero_condition)

small_graphs = st.builds(
    lambda n, seed: generate_erdos_renyi(n, 0.5, seed),
    st.integers(min_value=3, max_value=6),
    st.integers(min_value=0, max_value=10_000),
)


class TestDensity:
    @pytest.mark.parametrize("p, expected", [
        ([1.5, 1.0], [2.25, 1.0]),
        ([1.0], [1.0]),
        ([2.75, 4.0, 1.0], [7.5625, 10.5, 1.0]),
    ])
    def test_coefficients(self, p, expected):
        np.testing.assert_allclose(density_coefficients(p), expected)

    def test_path_densities(self, p3_system):
        np.testing.assert_allclose(spectral_density(p3_system, 1, 0).coeffs, [2.25, 1.0])
        np.testing.assert_allclose(spectral_density(p3_system, 0, 0).coeffs, [7.5625, 10.5, 1.0])

    def test_factored_value_matches_coefficients(self, p3_system):
        d = spectral_density(p3_system, 0, 0)
        x = np.array([0.0, 0.3, 2.0, 40.0])
        np.testing.assert_allclose(d(x), np.polynomial.polynomial.polyval(x, d.coeffs), rtol=1e-12)

    def test_scaled_form(self, p3_system):
        d = spectral_density(p3_system, 0, 0)
        coeffs, weight = d.scaled(3.5)
        u = 0.7
        assert d(3.5 ** 2 * u) == pytest.approx(np.exp(weight) * np.polynomial.polynomial.polyval(u, coeffs))


class TestBoundedness:
    def test_path_cases(self, p3_system):
        assert boundedness(p3_system, 0, 1, MonitorSet.of([2])) is ImpactStatus.UNBOUNDED
        assert boundedness(p3_system, 0, 2, MonitorSet.of([1])) is ImpactStatus.BOUNDED
        assert boundedness(p3_system, 0, 1, MonitorSet.of([1, 2])) is ImpactStatus.BOUNDED
        assert boundedness(p3_system, 0, 2, MonitorSet.of([0])) is ImpactStatus.BOUNDED

    def test_invalid_scenarios(self, p3_system):
        with pytest.raises(InvalidScenario):
            boundedness(p3_system, 0, 0, MonitorSet.of([1]))
        with pytest.raises(InvalidScenario):
            boundedness(p3_system, 0, 1, MonitorSet.of([7]))

    @settings(max_examples=15, deadline=None)
    @given(small_graphs)
    def test_single_monitor_law(self, net):
        sys = build_system(net)
        for a, rho, m in itertools.permutations(range(net.n), 3):
            expected = relative_degree(sys, m, a) <= relative_degree(sys, rho, a)
            result = single_monitor_bound(sys, a, rho, m)
            assert result.is_bounded == expected

    @settings(max_examples=20, deadline=None)
    @given(small_graphs)
    def test_bounded_for_every_attack_iff_dominating(self, net):
        sys = build_system(net)
        for k in (1, 2):
            for subset in itertools.combinations(range(net.n), k):
                m_set = MonitorSet.of(subset)
                all_bounded = all(
                    boundedness(sys, a, rho, m_set) is ImpactStatus.BOUNDED
                    for a in range(net.n) for rho in range(net.n) if rho != a
                )
                assert all_bounded == is_dominating(net, m_set)

    def test_zero_condition_on_stable_network(self, p3_system):
        assert zero_condition(p3_system, 0, 2, 1)


class TestWorstCaseImpact:
    def test_single_monitor_values(self, p3_system):
        assert single_monitor_bound(p3_system, 0, 2, 1).value == pytest.approx(4 / 9, rel=1e-6)
        assert single_monitor_bound(p3_system, 0, 2, 0).value == pytest.approx(1 / 7.5625, rel=1e-6)
        assert single_monitor_bound(p3_system, 0, 2, 2).value == pytest.approx(1.0, abs=1e-12)

    def test_worst_frequency_at_dc(self, p3_system):
        result = single_monitor_bound(p3_system, 0, 2, 1)
        assert result.worst_frequency == pytest.approx(0.0, abs=1e-6)

    def test_single_set_matches_single_bound(self, p3_system):
        assert worst_case_impact(p3_system, 0, 2, MonitorSet.of([1])).value == pytest.approx(4 / 9, rel=1e-6)

    def test_two_monitors(self, p3_system):
        result = worst_case_impact(p3_system, 0, 2, MonitorSet.of([0, 1]))
        assert result.is_bounded
        assert result.value == pytest.approx(1 / 7.5625, rel=1e-6)
        assert result.value <= 1 / 7.5625 * (1 + 1e-6)
        assert result.certificate_min >= -1e-9
        assert set(result.gamma) == {0, 1}

    def test_target_monitored(self, p3_system):
        result = worst_case_impact(p3_system, 0, 2, MonitorSet.of([1, 2]))
        assert result.value <= 4 / 9 * (1 + 1e-6)

    def test_unbounded(self, p3_system):
        result = worst_case_impact(p3_system, 0, 1, MonitorSet.of([2]))
        assert result.status is ImpactStatus.UNBOUNDED
        assert result.value is None
        assert result.to_document() == {"status": "unbounded"}

    def test_document(self, p3_system):
        document = worst_case_impact(p3_system, 0, 2, MonitorSet.of([0, 1])).to_document()
        assert document["status"] == "bounded"
        assert list(document["gamma"]) == ["1", "2"]
        assert set(document) == {"status", "value", "gamma", "worst_frequency", "certificate_min", "sup_search"}
        assert document["sup_search"] == "sturm"

    @pytest.mark.parametrize("c", [0.5, 2.0, 7.0])
    def test_threshold_scaling(self, c):
        base = build_system(make_network(3, [(0, 1), (1, 2)]))
        scaled = build_system(make_network(3, [(0, 1), (1, 2)], delta=c))
        for monitors in ([1], [0, 1]):
            m_set = MonitorSet.of(monitors)
            assert worst_case_impact(scaled, 0, 2, m_set).value == pytest.approx(
                c * worst_case_impact(base, 0, 2, m_set).value, rel=1e-6)

    @settings(max_examples=8, deadline=None)
    @given(small_graphs)
    def test_multi_monitor_bounds(self, net):
        sys = build_system(net)
        for a, rho in [(0, 1), (net.n - 1, 0)]:
            for pair in itertools.combinations(range(net.n), 2):
                m_set = MonitorSet.of(pair)
                result = worst_case_impact(sys, a, rho, m_set)
                singles = [single_monitor_bound(sys, a, rho, m) for m in pair]
                bounded_singles = [s.value for s in singles if s.is_bounded]
                if not bounded_singles:
                    continue
                assert result.is_bounded
                assert result.value <= min(bounded_singles) * (1 + 1e-6) + 1e-9
                assert result.certificate_min >= -1e-7

                for v in range(net.n):
                    if v in pair:
                        continue
                    bigger = worst_case_impact(sys, a, rho, m_set.union(v))
                    assert bigger.value <= result.value * (1 + 1e-6) + 1e-9

    def test_certificate_holds_on_dense_grid(self, er_small):
        sys = build_system(er_small)
        analyzer = ImpactAnalyzer.for_system(sys)
        # A monitor on the attack vertex itself keeps the scenario bounded.
        result = analyzer.worst_case_impact(0, 3, MonitorSet.of([0, 1, 2]))
        assert result.is_bounded
        assert result.certificate_min >= -analyzer.settings.eps_cert
        omega = np.concatenate([[0.0], np.logspace(-3, 3, 10_000)])
        assert np.min(analyzer.certificate_ratio(0, 3, result.gamma, omega)) >= -1e-7

    @pytest.mark.parametrize("seed", range(50))
    def test_monitoring_the_target_costs_its_threshold(self, seed):
        rng = np.random.default_rng(seed)
        n = 3 + seed % 6
        net = generate_erdos_renyi(n, 0.5, seed).with_delta(rng.uniform(0.1, 10.0, size=n))
        a, rho = (int(v) for v in rng.choice(n, size=2, replace=False))
        result = worst_case_impact(build_system(net), a, rho, MonitorSet.of([rho]))
        assert result.is_bounded
        assert abs(result.value - net.delta[rho]) <= 1e-9 * net.delta[rho]

    def test_certificate_check_catches_missed_peak(self, p3, monkeypatch):
        analyzer = ImpactAnalyzer(build_system(p3), ImpactSettings(max_cuts=4))
        seen = []

        def tiny_lp(self, target, monitors, delta, points):
            seen.append(len(points))
            return np.full(len(monitors), 1e-6)

        monkeypatch.setattr(ImpactAnalyzer, "sup_log_ratio", lambda self, a, rho, monitors, gamma: (0.0, 1.0))
        monkeypatch.setattr(ImpactAnalyzer, "_solve_lp", tiny_lp)
        with pytest.raises(IterationLimit):
            analyzer.worst_case_impact(0, 2, MonitorSet.of([0, 1]))
        # each missed peak came back as a new cut
        assert seen == [seen[0] + k for k in range(4)]

    def test_single_monitor_falls_back_to_check_grid(self, p3_system, monkeypatch):
        # R_3/R_2 = 1/(x + 2.25) for an attack on vertex 1.
        monkeypatch.setattr(ImpactAnalyzer, "sup_log_ratio", lambda self, a, rho, monitors, gamma: (-50.0, 1.0))
        result = ImpactAnalyzer(p3_system).single_monitor_bound(0, 2, 1)
        assert result.value == pytest.approx(1 / 2.25, rel=1e-5)
        assert result.certificate_min >= -1e-9

    def test_grid_only_regime_is_recorded(self):
        sys = build_system(make_network(5, [(0, 1), (1, 2), (2, 3), (3, 4)]))
        m_set = MonitorSet.of([0, 1])
        exact = ImpactAnalyzer(sys).worst_case_impact(0, 4, m_set)
        grid = ImpactAnalyzer(sys, ImpactSettings(sturm_max_degree=1, poly_max_degree=2)).worst_case_impact(0, 4, m_set)
        assert exact.sup_search == "sturm"
        assert grid.sup_search == "grid"
        assert grid.value == pytest.approx(exact.value, rel=1e-6)
        assert grid.certificate_min >= -1e-9

    def test_iteration_limit(self, p3, monkeypatch):
        sys = build_system(p3)
        analyzer = ImpactAnalyzer(sys, ImpactSettings(max_cuts=3))
        monkeypatch.setattr(ImpactAnalyzer, "sup_log_ratio", lambda self, a, rho, monitors, gamma: (np.log(2.0), 1.0))
        with pytest.raises(IterationLimit):
            analyzer.worst_case_impact(0, 2, MonitorSet.of([0, 1]))


class TestExpectedImpact:
    def test_values(self, p3_system):
        belief = Belief()
        assert expected_impact(p3_system, 1, MonitorSet.of([1]), belief).value == pytest.approx(4 / 9, rel=1e-6)
        assert expected_impact(p3_system, 0, MonitorSet.of([1]), belief).value == pytest.approx(13 / 18, rel=1e-6)

    def test_defense_cost(self, p3_system):
        belief = Belief()
        m_set = MonitorSet.of([1])
        assert defense_cost(p3_system, 0, m_set, belief, CostModel(kappa=5)).value == pytest.approx(
            5 + 13 / 18, rel=1e-6)
        assert defense_cost(p3_system, 0, m_set, belief, CostModel(kappa=0)).value == pytest.approx(
            13 / 18, rel=1e-6)

    def test_unbounded_propagates(self, p3_system):
        cost = defense_cost(p3_system, 0, MonitorSet.of([2]), Belief(), CostModel())
        assert not cost.is_bounded
        assert cost.sort_value == float("inf")

    def test_table_belief(self, p3_system):
        belief = Belief.from_document({
            "1": {"2": 0.25, "3": 0.75},
            "2": {"1": 0.5, "3": 0.5},
            "3": {"1": 0.5, "2": 0.5},
        }).check(3)
        q = expected_impact(p3_system, 0, MonitorSet.of([1]), belief)
        assert q.value == pytest.approx(0.25 + 0.75 * 4 / 9, rel=1e-6)


class TestBelief:
    def test_uniform(self):
        np.testing.assert_allclose(Belief().probabilities(1, 4), [1 / 3, 0.0, 1 / 3, 1 / 3])

    @pytest.mark.parametrize("document", [
        {"1": {"1": 0.5, "2": 0.5}},
        {"1": {"2": 0.6, "3": 0.6}, "2": {"1": 0.5, "3": 0.5}, "3": {"1": 0.5, "2": 0.5}},
        {"1": {"2": 1.0}, "2": {"1": 0.5, "3": 0.5}, "3": {"1": 0.5, "2": 0.5}},
        {"1": {"2": 0.5, "3": 0.5}},
        {"1": "nope"},
    ])
    def test_invalid_tables(self, document):
        with pytest.raises(SchemaError):
            Belief.from_document(document).check(3)

    def test_unknown_kind(self):
        with pytest.raises(ValidationError):
            Belief(kind="adversarial")


class TestScenarioCost:
    def test_plus(self):
        assert ScenarioCost.bounded(1.5).plus(2.0).value == 3.5
        assert not ScenarioCost.unbounded().plus(2.0).is_bounded

    def test_unbounded_result(self):
        assert ImpactResult.unbounded().to_document() == {"status": "unbounded"}
