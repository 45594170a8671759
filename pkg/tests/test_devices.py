import numpy as np
import pytest

from epitrace.contacts import Contact, ContactSet
from epitrace.devices import (
    DeviceRecord,
    DeviceStore,
    TokenRouter,
    apply_app_usage,
    assign_day_pseudonyms,
    dump_store,
    generate_token,
    prune_window,
    record_day_contacts,
    trajectory_seed_tokens,
    update_dev_data,
)


def fresh(n):
    return [DeviceStore(i) for i in range(n)], TokenRouter()


class TestUpdateDevData:
    def test_mirrored_records(self):
        stores, router = fresh(2)
        rng = np.random.default_rng(0)
        update_dev_data(stores[0], stores[1], Contact(0, 1, 3, 1.2, 20.0), router, rng)
        assert len(stores[0].records) == len(stores[1].records) == 1
        ru, rv = stores[0].records[0], stores[1].records[0]
        assert ru.day == rv.day == 3
        assert (ru.distance, ru.duration) == (1.2, 20.0)
        assert (rv.distance, rv.duration) == (1.2, 20.0)
        assert ru.own_token == rv.peer_token
        assert ru.peer_token == rv.own_token
        assert router.lookup(ru.own_token) is stores[0]
        assert router.lookup(rv.own_token) is stores[1]

    def test_store_order_does_not_matter(self):
        stores, router = fresh(2)
        rng = np.random.default_rng(0)
        update_dev_data(stores[1], stores[0], Contact(0, 1, 3, 1.2, 20.0), router, rng)
        assert router.lookup(stores[0].records[0].own_token) is stores[0]

    def test_wrong_stores_rejected(self):
        stores, router = fresh(3)
        with pytest.raises(ValueError):
            update_dev_data(stores[0], stores[2], Contact(0, 1, 3, 1.2, 20.0), router, np.random.default_rng(0))

    def test_fresh_tokens_per_contact(self):
        stores, router = fresh(2)
        rng = np.random.default_rng(1)
        update_dev_data(stores[0], stores[1], Contact(0, 1, 1, 0.5, 5.0), router, rng)
        update_dev_data(stores[0], stores[1], Contact(0, 1, 2, 0.5, 5.0), router, rng)
        tokens = {rec.own_token for s in stores for rec in s.records}
        assert len(tokens) == 4

    def test_router_entry_count(self):
        stores, router = fresh(4)
        rng = np.random.default_rng(2)
        pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (0, 1), (1, 2), (2, 3), (0, 3)]
        for day, (u, v) in enumerate(pairs, start=1):
            update_dev_data(stores[u], stores[v], Contact(u, v, day, 1.0, 10.0), router, rng)
        assert len(router) == 20  # two tokens per contact

    def test_router_rejects_duplicate_registration(self):
        stores, router = fresh(2)
        token = generate_token(router, np.random.default_rng(0))
        router.register(token, stores[0])
        with pytest.raises(ValueError):
            router.register(token, stores[1])

    def test_router_miss_is_silent(self):
        _, router = fresh(1)
        assert router.lookup(12345) is None


class TestAppUsage:
    def test_always_recorded_when_both_certain(self):
        rng = np.random.default_rng(0)
        c = Contact(0, 1, 1, 1.0, 5.0)
        assert all(apply_app_usage(c, 1.0, 1.0, rng) for _ in range(200))

    def test_never_recorded_when_one_side_inactive(self):
        rng = np.random.default_rng(0)
        c = Contact(0, 1, 1, 1.0, 5.0)
        assert not any(apply_app_usage(c, 0.0, rho, rng) for rho in (0.0, 0.5, 1.0) for _ in range(100))

    def test_product_rate(self):
        rng = np.random.default_rng(3)
        c = Contact(0, 1, 1, 1.0, 5.0)
        hits = sum(apply_app_usage(c, 0.75, 0.75, rng) for _ in range(100_000))
        assert 0.552 <= hits / 100_000 <= 0.573  # around 0.5625

    def test_rejects_bad_probability(self):
        with pytest.raises(ValueError):
            apply_app_usage(Contact(0, 1, 1, 1.0, 5.0), 1.2, 0.5, np.random.default_rng(0))


class TestPruneWindow:
    def build_store(self, days):
        stores, router = fresh(2)
        rng = np.random.default_rng(4)
        for day in days:
            update_dev_data(stores[0], stores[1], Contact(0, 1, day, 1.0, 10.0), router, rng)
        return stores[0], router

    def test_drops_only_stale_records(self):
        store, router = self.build_store([1, 10])
        old_token = store.records[0].own_token
        prune_window(store, current_day=20, window=14, router=router)
        assert [rec.day for rec in store.records] == [10]
        assert old_token not in store.own_tokens
        assert router.lookup(old_token) is None
        assert store.records[0].own_token in store.own_tokens

    def test_noop_when_all_inside_window(self):
        store, _ = self.build_store([8, 9, 10])
        before = list(store.records)
        prune_window(store, current_day=20, window=14)
        assert store.records == before

    def test_matches_filter_oracle(self):
        rng = np.random.default_rng(5)
        days = sorted(int(d) for d in rng.integers(1, 31, size=100))
        store, _ = self.build_store(days)
        expected = [rec for rec in store.records if rec.day >= 30 - 14]
        prune_window(store, current_day=30, window=14)
        assert store.records == expected
        assert set(store.own_tokens) == {rec.own_token for rec in expected}

    def test_rejects_bad_window(self):
        store, _ = self.build_store([1])
        with pytest.raises(ValueError):
            prune_window(store, 5, 0)


class TestBulkRecording:
    def day_contacts(self, day, pairs, rng):
        contacts = [Contact(u, v, day, float(rng.uniform(0.1, 5)), float(rng.uniform(1, 120))) for u, v in pairs]
        return ContactSet.from_contacts(day, contacts)

    def test_mirror_consistency(self):
        rng = np.random.default_rng(6)
        stores, router = fresh(8)
        pairs = [(u, v) for u in range(8) for v in range(u + 1, 8)]
        recorded = record_day_contacts(
            self.day_contacts(1, pairs, rng), stores, router, np.ones(8), rng
        )
        assert recorded == len(pairs)
        # every record has exactly one mirror in the peer's store
        all_records = [(s._sim_owner, rec) for s in stores for rec in s.records]
        by_own = {rec.own_token: (owner, rec) for owner, rec in all_records}
        for owner, rec in all_records:
            peer_owner, mirror = by_own[rec.peer_token]
            assert mirror.peer_token == rec.own_token
            assert (mirror.day, mirror.distance, mirror.duration) == (rec.day, rec.distance, rec.duration)
            assert peer_owner != owner

    def test_zero_usage_records_nothing(self):
        rng = np.random.default_rng(7)
        stores, router = fresh(4)
        recorded = record_day_contacts(
            self.day_contacts(1, [(0, 1), (2, 3)], rng), stores, router, np.zeros(4), rng
        )
        assert recorded == 0
        assert len(router) == 0
        assert all(not s.records for s in stores)

    def test_usage_rate(self):
        rng = np.random.default_rng(8)
        stores, router = fresh(2)
        total = 0
        for day in range(1, 401):
            total += record_day_contacts(
                self.day_contacts(day, [(0, 1)], rng), stores, router, np.full(2, 0.75), rng
            )
        assert 0.45 < total / 400 < 0.68  # around 0.5625


class TestProtocolHelpers:
    def test_trajectory_seed_tokens_are_window_peer_tokens(self):
        stores, router = fresh(2)
        rng = np.random.default_rng(9)
        for day in (1, 5, 12):
            update_dev_data(stores[0], stores[1], Contact(0, 1, day, 1.0, 10.0), router, rng)
        tokens = trajectory_seed_tokens(stores[0], day=15, window=10)
        expected = [rec.peer_token for rec in stores[0].records if rec.day >= 5]
        assert tokens == expected
        for token in tokens:
            assert router.lookup(token) is stores[1]

    def test_assign_day_pseudonyms(self):
        stores, _ = fresh(50)
        linkage = assign_day_pseudonyms(stores, np.random.default_rng(10))
        assert len(linkage) == 50
        assert sorted(linkage.values()) == list(range(50))
        for store in stores:
            assert linkage[store.day_pseudonym] == store._sim_owner
        # fresh pseudonyms each day
        second = assign_day_pseudonyms(stores, np.random.default_rng(11))
        assert set(second) != set(linkage)

    def test_score_matches_flag_count(self):
        store = DeviceStore(0)
        store.score += 1
        store.iteration_flags.add(3)
        assert store.score == len(store.iteration_flags)
        store.reset_protocol_state()
        assert store.score == 0 and not store.iteration_flags

    def test_dump_store(self):
        stores, router = fresh(2)
        rng = np.random.default_rng(12)
        update_dev_data(stores[0], stores[1], Contact(0, 1, 4, 1.25, 30.0), router, rng)
        text = dump_store(stores[0])
        assert len(text.splitlines()) == 1
        assert "day=4" in text and "dist=1.25m" in text
