import itertools

import numpy as np
import pytest

from epitrace.contacts import (
    ContactGraph,
    TruncatedExponential,
    _linear_to_pair,
    build_graph,
    load_edgelist,
    sample_day,
    save_edgelist,
)


class TestBuildGraph:
    def test_two_agents_fully_matched_gets_full_weight(self):
        g = build_graph(2, mean_degree=1.0, heavy_pair_fraction=1.0, rng=np.random.default_rng(0))
        assert g.weight(0, 1) == pytest.approx(1.0)
        assert g.mean_expected_degree() == pytest.approx(1.0)

    def test_uniform_background_closed_form(self):
        # no heavy pairs: every weight is mean_degree / (n - 1) = 0.125
        g = build_graph(5, mean_degree=0.5, heavy_pair_fraction=0.0, rng=np.random.default_rng(0))
        for u, v in itertools.combinations(range(5), 2):
            assert g.weight(u, v) == pytest.approx(0.125)
        # verified by summing weights per node
        for u in range(5):
            assert g.expected_degree(u) == pytest.approx(0.5)

    def test_mean_degree_budget_exact(self):
        g = build_graph(400, mean_degree=7.0, heavy_pair_fraction=0.3, rng=np.random.default_rng(1))
        assert g.mean_expected_degree() == pytest.approx(7.0, abs=1e-9)

    def test_heavy_pairs_are_disjoint_and_weighted(self):
        g = build_graph(100, mean_degree=5.0, heavy_pair_fraction=0.5, rng=np.random.default_rng(2))
        assert len(g.edge_w) == 25
        seen = set(g.edge_u.tolist()) | set(g.edge_v.tolist())
        assert len(seen) == 50  # a matching: no agent in two heavy pairs
        assert (g.edge_w == pytest.approx(0.9)) or np.allclose(g.edge_w, g.edge_w[0])
        assert g.edge_w[0] > g.background_weight

    def test_rejects_unreachable_mean_degree(self):
        with pytest.raises(ValueError):
            build_graph(10, mean_degree=10.0, heavy_pair_fraction=0.0, rng=np.random.default_rng(0))

    def test_rejects_bad_arguments(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            build_graph(1, 0.5, 0.0, rng)
        with pytest.raises(ValueError):
            build_graph(10, 0.0, 0.0, rng)
        with pytest.raises(ValueError):
            build_graph(10, 2.0, 1.5, rng)

    def test_empirical_mean_daily_contacts_large_population(self):
        # population-level check on the reference scenario scale
        rng = np.random.default_rng(3)
        g = build_graph(10000, mean_degree=10.0, heavy_pair_fraction=0.4, rng=rng)
        everyone = range(10000)
        totals = []
        for day in range(1, 31):
            contacts = sample_day(g, day, everyone, rng)
            totals.append(2 * len(contacts) / 10000)
        assert 9.5 <= float(np.mean(totals)) <= 10.5


class TestSampleDay:
    def test_empty_active_set(self):
        g = build_graph(10, 2.0, 0.0, np.random.default_rng(0))
        assert len(sample_day(g, 1, [], np.random.default_rng(1))) == 0
        assert len(sample_day(g, 1, [3], np.random.default_rng(1))) == 0

    def test_certain_pair_meets_every_day(self):
        g = ContactGraph.from_edges(2, [(0, 1, 1.0)])
        rng = np.random.default_rng(5)
        for day in range(1, 50):
            contacts = list(sample_day(g, day, [0, 1], rng))
            assert len(contacts) == 1
            c = contacts[0]
            assert (c.u, c.v, c.day) == (0, 1, day)
            assert 0.0 < c.distance <= 5.0
            assert 0.0 < c.duration <= 120.0

    def test_pair_frequency_matches_weight(self):
        g = ContactGraph.from_edges(2, [(0, 1, 0.3)])
        rng = np.random.default_rng(8)
        hits = sum(len(sample_day(g, day, [0, 1], rng)) for day in range(100_000))
        assert 0.295 <= hits / 100_000 <= 0.305

    def test_background_frequency_matches_weight(self):
        g = ContactGraph(4, [], background_weight=0.2)
        rng = np.random.default_rng(9)
        days = 30_000
        hits = sum(len(sample_day(g, day, range(4), rng)) for day in range(days))
        # 6 pairs at weight 0.2: expected within 3 sigma
        expected = 6 * 0.2
        sigma = np.sqrt(6 * 0.2 * 0.8 / days)
        assert abs(hits / days - expected) < 3 * sigma

    def test_isolated_never_appear(self):
        g = build_graph(40, 5.0, 0.5, np.random.default_rng(1))
        rng = np.random.default_rng(2)
        active = [i for i in range(40) if i % 3 != 0]
        for day in range(1, 30):
            contacts = sample_day(g, day, active, rng)
            endpoints = set(contacts.u.tolist()) | set(contacts.v.tolist())
            assert all(e % 3 != 0 for e in endpoints)

    def test_undirected_uniqueness(self):
        g = build_graph(60, 8.0, 0.2, np.random.default_rng(4))
        rng = np.random.default_rng(5)
        for day in range(1, 20):
            contacts = sample_day(g, day, range(60), rng)
            assert (contacts.u < contacts.v).all()
            pairs = list(zip(contacts.u.tolist(), contacts.v.tolist()))
            assert len(pairs) == len(set(pairs))

    def test_per_pair_long_run_frequency_three_sigma(self):
        n, w, days = 10, 0.15, 40_000
        g = ContactGraph(n, [(0, 1, 0.6)], background_weight=w)
        rng = np.random.default_rng(6)
        counts: dict[tuple[int, int], int] = {}
        for day in range(days):
            for c in sample_day(g, day, range(n), rng):
                counts[(c.u, c.v)] = counts.get((c.u, c.v), 0) + 1
        for u, v in itertools.combinations(range(n), 2):
            weight = g.weight(u, v)
            freq = counts.get((u, v), 0) / days
            sigma = np.sqrt(weight * (1 - weight) / days)
            assert abs(freq - weight) < 3.5 * sigma, (u, v, freq, weight)


class TestPairIndexing:
    @pytest.mark.parametrize("a", [2, 3, 5, 17, 101])
    def test_inverts_triangle_enumeration(self, a):
        pairs = list(itertools.combinations(range(a), 2))
        idx = np.arange(len(pairs))
        i, j = _linear_to_pair(idx, a)
        assert [(x, y) for x, y in zip(i.tolist(), j.tolist())] == pairs


class TestDistributions:
    def test_truncated_exponential_support(self):
        dist = TruncatedExponential(scale=1.5, upper=5.0)
        samples = dist.sample(np.random.default_rng(0), 50_000)
        assert (samples > 0).all()
        assert (samples <= 5.0).all()
        # mean of a truncated exponential is below the scale
        assert 1.0 < samples.mean() < 1.5

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            TruncatedExponential(scale=0.0, upper=1.0)
        with pytest.raises(ValueError):
            TruncatedExponential(scale=1.0, upper=-2.0)


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        g = build_graph(30, 4.0, 0.6, np.random.default_rng(12))
        path = tmp_path / "graph.txt"
        save_edgelist(g, path)
        loaded = load_edgelist(path)
        assert loaded.n == g.n
        assert loaded.background_weight == pytest.approx(g.background_weight)
        assert loaded.distance_dist == g.distance_dist
        assert loaded.duration_dist == g.duration_dist
        for u, v in itertools.combinations(range(30), 2):
            assert loaded.weight(u, v) == pytest.approx(g.weight(u, v))
        # identical sampling under identical generator state
        day = list(sample_day(g, 3, range(30), np.random.default_rng(77)))
        day_loaded = list(sample_day(loaded, 3, range(30), np.random.default_rng(77)))
        assert day == day_loaded

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "nope.txt"
        path.write_text("0 1 0.5\n")
        with pytest.raises(ValueError):
            load_edgelist(path)


class TestGraphValidation:
    def test_rejects_self_edge_and_bad_weight(self):
        with pytest.raises(ValueError):
            ContactGraph(3, [(1, 1, 0.5)], background_weight=0.0)
        with pytest.raises(ValueError):
            ContactGraph(3, [(0, 1, 1.5)], background_weight=0.0)
        with pytest.raises(ValueError):
            ContactGraph(3, [(0, 1, 0.5), (1, 0, 0.7)], background_weight=0.0)

    def test_symmetric_weight_lookup(self):
        g = ContactGraph(3, [(0, 1, 0.4)], background_weight=0.1)
        assert g.weight(0, 1) == g.weight(1, 0) == pytest.approx(0.4)
        assert g.weight(1, 2) == pytest.approx(0.1)
        assert g.weight(2, 2) == 0.0
