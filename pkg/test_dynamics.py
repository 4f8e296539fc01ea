import logging
import threading
import warnings
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as npoly
from scipy.optimize import linear_sum_assignment

import secalloc.dynamics as dynamics
from secalloc.dynamics import (ZeroReport, build_system, faddeev_leverrier, invariant_zeros, numerator,
                               relative_degree, transfer_value, tune_self_loops, zero_report)
from secalloc.errors import NumericalError
from secalloc.graph import generate_erdos_renyi, make_network

random_graphs = st.builds(
    lambda n, q, seed: generate_erdos_renyi(n, q, seed),
    st.integers(min_value=2, max_value=8),
    st.sampled_from([0.3, 0.5, 0.8]),
    st.integers(min_value=0, max_value=10_000),
)


def matched_distance(x, y):
    """Largest distance after optimally pairing two equal-size root sets."""
    if len(x) == 0:
        return 0.0
    cost = np.abs(np.subtract.outer(x, y))
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


class TestBuildSystem:
    def test_path_spectrum(self, p3_system):
        np.testing.assert_allclose(p3_system.eigenvalues, [0.5, 1.5, 3.5])
        assert p3_system.scale == pytest.approx(3.5)

    def test_complete_graph_spectrum(self):
        sys = build_system(make_network(3, [(0, 1), (0, 2), (1, 2)], theta=1.0))
        np.testing.assert_allclose(sys.eigenvalues, [1.0, 4.0, 4.0])

    def test_charpoly(self, p3_system):
        np.testing.assert_allclose(p3_system.charpoly, [2.625, 7.75, 5.5, 1.0])
        assert p3_system.charpoly[0] == pytest.approx(np.linalg.det(p3_system.lbar))

    def test_large_network_uses_spectrum(self):
        sys = build_system(generate_erdos_renyi(25, 0.5, 2))
        assert sys.charpoly[-1] == pytest.approx(1.0)
        assert sys.charpoly[0] == pytest.approx(np.prod(sys.eigenvalues), rel=1e-8)

    def test_not_positive_definite(self):
        with pytest.raises(NumericalError):
            build_system(make_network(2, [(0, 1)], theta=1e-14))


class TestFaddeevLeverrier:
    def test_exact_arithmetic(self, p3_system):
        coeffs, adjugate = faddeev_leverrier(p3_system.lbar, exact=True)
        assert list(coeffs) == [Fraction(21, 8), Fraction(31, 4), Fraction(11, 2), Fraction(1)]
        assert adjugate[0][2, 0] == Fraction(1)

    @settings(max_examples=25, deadline=None)
    @given(random_graphs)
    def test_adjugate_matches_numerators(self, net):
        sys = build_system(net)
        _, adjugate = faddeev_leverrier(sys.lbar)
        for out in range(net.n):
            for a in range(net.n):
                p = numerator(sys, out, a)
                entries = np.array([b[out, a] for b in adjugate])
                scale = np.max(np.abs(entries))
                np.testing.assert_allclose(entries[:len(p)], p, rtol=1e-7, atol=1e-9 * scale)
                np.testing.assert_allclose(entries[len(p):], 0.0, atol=1e-9 * scale)


class TestNumerators:
    def test_path_numerators(self, p3_system):
        np.testing.assert_allclose(numerator(p3_system, 2, 0), [1.0])
        np.testing.assert_allclose(numerator(p3_system, 1, 0), [1.5, 1.0])
        np.testing.assert_allclose(numerator(p3_system, 0, 0), [2.75, 4.0, 1.0])

    def test_path_zeros(self, p3_system):
        np.testing.assert_allclose(invariant_zeros(p3_system, 1, 0), [-1.5])
        assert len(invariant_zeros(p3_system, 2, 0)) == 0

    def test_relative_degree(self, p3_system):
        assert relative_degree(p3_system, 0, 0) == 1
        assert relative_degree(p3_system, 1, 0) == 2
        assert relative_degree(p3_system, 2, 0) == 3

    def test_complete_graph_relative_degree(self, k3):
        sys = build_system(k3)
        assert all(relative_degree(sys, i, j) == 2 for i in range(3) for j in range(3) if i != j)

    def test_zero_on_pole_is_quiet(self, k3, caplog):
        # adj(sI + L̄)[0, 1] = s + 3.5 on K3, and 3.5 is a double eigenvalue of L̄.
        sys = build_system(k3)
        with warnings.catch_warnings():
            warnings.simplefilter("error", RuntimeWarning)
            with caplog.at_level(logging.WARNING, logger="secalloc.dynamics"):
                zeros = invariant_zeros(sys, 0, 1)
        np.testing.assert_allclose(zeros.real, [-3.5])
        assert not caplog.records

    @settings(max_examples=25, deadline=None)
    @given(random_graphs)
    def test_relative_degree_is_distance_plus_one(self, net):
        sys = build_system(net)
        lengths = dict(nx.all_pairs_shortest_path_length(net.to_networkx()))
        for out in range(net.n):
            for a in range(net.n):
                r = relative_degree(sys, out, a)
                assert r == lengths[out][a] + 1
                assert len(numerator(sys, out, a)) - 1 + r == net.n

    @settings(max_examples=20, deadline=None)
    @given(random_graphs, st.floats(min_value=0.1, max_value=3.0), st.floats(min_value=-5.0, max_value=5.0))
    def test_transfer_matches_ratio(self, net, re, im):
        sys = build_system(net)
        s = complex(re, im)
        q = npoly.polyval(s, sys.charpoly)
        for out in range(net.n):
            for a in range(net.n):
                ratio = npoly.polyval(s, numerator(sys, out, a)) / q
                direct = np.linalg.solve(s * np.eye(net.n) + sys.lbar, np.eye(net.n)[:, a])[out]
                assert abs(ratio - direct) <= 1e-8 * (1 + abs(direct))
                assert abs(transfer_value(sys, out, a, s) - direct) <= 1e-9 * (1 + abs(direct))

    def test_symmetric_pairs(self, er_small):
        sys = build_system(er_small)
        for out in range(er_small.n):
            for a in range(er_small.n):
                np.testing.assert_allclose(numerator(sys, out, a), numerator(sys, a, out))

    @settings(max_examples=15, deadline=None)
    @given(st.integers(min_value=2, max_value=7), st.integers(min_value=0, max_value=1000),
           st.floats(min_value=0.1, max_value=5.0))
    def test_self_loop_shift_moves_zeros(self, n, seed, c):
        net = generate_erdos_renyi(n, 0.5, seed)
        base = build_system(net)
        shifted = build_system(net.with_theta([t + c for t in net.theta]))
        for out in range(n):
            for a in range(n):
                z0 = invariant_zeros(base, out, a)
                z1 = invariant_zeros(shifted, out, a)
                assert len(z0) == len(z1)
                assert matched_distance(z0 - c, z1) <= 1e-6 * max(1.0, np.max(np.abs(z1), initial=0.0))

    def test_concurrent_cache(self, er_small):
        sys = build_system(er_small)
        results = []

        def worker():
            results.append(sys.numerator_factors(4, 1))

        threads = [threading.Thread(target=worker) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert all(r is results[0] for r in results)
        assert sys.cached_pairs() == 1


class TestZeroReport:
    def test_records(self, p3_system):
        report = zero_report(p3_system, [(0, 1), (0, 2)])
        records = report.to_records()
        assert records[0]["pair"] == [1, 2]
        assert records[0]["relative_degree"] == 2
        assert records[0]["zeros"] == [[pytest.approx(-1.5), 0.0]]
        assert records[1]["zeros"] == []
        assert report.max_real_part == pytest.approx(-1.5)

    def test_all_pairs_parallel(self, er_small):
        sys = build_system(er_small)
        sequential = zero_report(sys)
        parallel = zero_report(build_system(er_small), workers=4)
        assert sequential.pairs == parallel.pairs
        assert sequential.relative_degrees == parallel.relative_degrees
        assert len(sequential.pairs) == er_small.n * (er_small.n + 1) // 2


class TestTuning:
    def test_stable_network_unchanged(self, p3):
        assert tune_self_loops(p3, 0.1) == p3

    def test_offset_arithmetic(self, p3, monkeypatch):
        reports = iter([0.3, -0.5])

        def fake_report(sys, pairs=None, workers=1):
            return ZeroReport(pairs=[], relative_degrees=[], zeros=[], max_real_part=next(reports))

        monkeypatch.setattr(dynamics, "zero_report", fake_report)
        tuned = tune_self_loops(p3, 0.1)
        np.testing.assert_allclose(tuned.theta, [0.9, 0.9, 0.9])
        assert tuned.edges == p3.edges

    @settings(max_examples=10, deadline=None)
    @given(st.integers(min_value=3, max_value=8), st.integers(min_value=0, max_value=1000))
    def test_postcondition(self, n, seed):
        net = generate_erdos_renyi(n, 0.5, seed, theta=0.05)
        tuned = tune_self_loops(net, 0.1)
        assert zero_report(build_system(tuned)).max_real_part <= -0.1 + 1e-6
        offsets = np.subtract(tuned.theta, net.theta)
        assert np.ptp(offsets) == pytest.approx(0.0, abs=1e-12)

    def test_margin_must_be_positive(self, p3):
        with pytest.raises(ValueError):
            tune_self_loops(p3, 0.0)
