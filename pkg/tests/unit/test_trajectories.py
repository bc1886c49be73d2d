import pytest

from src.core.errors import HorizonOverflow, MissingProfileError
from src.domain.entities import Aircraft
from src.domain.grid import reverse_bfs_distances
from src.domain.pathgen import Path, generate_catalog
from src.domain.trajectories import (
    ProfileClassSpec,
    ProfileStore,
    ProfileSynthesisSpec,
    SpeedProfile,
    build_occupancy_index,
    entry_window,
    node_times,
    synthesize_profiles,
)
from src.infrastructure.persistence.repositories import load_profiles
from tests.conftest import DATA


class TestSynthesizedProfiles:
    """Калибровка синтетических профилей по опубликованным временам пролёта"""

    @pytest.fixture(scope="class")
    def store(self):
        return load_profiles(DATA / "profiles" / "arlanda_synthetic.toml")

    @pytest.mark.parametrize("hops, transit", [(8, 11), (6, 8), (5, 7)])
    def test_heavy_medium_transit(self, store, hops, transit):
        a = Aircraft("6", entry=0, planned_time=0)
        assert store.lookup(a, hops, "heavy_medium").transit == transit

    def test_light_not_faster(self, store):
        a = Aircraft("28", entry=0, planned_time=0, category=2)
        for hops in range(1, 15):
            light = store.lookup(a, hops, "light").transit
            heavy = store.lookup(a, hops, "heavy_medium").transit
            assert light >= heavy

    def test_segments_slow_down_towards_runway(self, store):
        a = Aircraft("6", entry=0, planned_time=0)
        segments = store.lookup(a, 8, "heavy_medium").segment_times
        assert all(u >= 1 for u in segments)
        assert sum(segments[-2:]) >= sum(segments[:2])

    def test_constant_profiles(self):
        store = synthesize_profiles(ProfileSynthesisSpec(max_length=4, constant_minutes=2))
        a = Aircraft("a", entry=0, planned_time=0)
        assert len(store) == 4
        assert store.lookup(a, 3).segment_times == (2, 2, 2)

    def test_cap_speed(self):
        spec = ProfileSynthesisSpec(
            pixel_side_nm=6.0,
            max_length=3,
            classes={"fast": ProfileClassSpec(360.0, 0.0, 360.0)},
        )
        store = synthesize_profiles(spec)
        assert store.profiles[("fast", 3)].segment_times == (1, 1, 1)


class TestProfileStore:
    @pytest.fixture
    def store(self):
        store = ProfileStore()
        store.add(SpeedProfile("default", (1, 1)))
        store.add(SpeedProfile("light", (2, 2)))
        store.add(SpeedProfile("x", (3, 3)))
        return store

    def test_aircraft_key_wins(self, store):
        assert store.lookup(Aircraft("x", 0, 0, 2), 2, "light").segment_times == (3, 3)

    def test_category_before_default(self, store):
        assert store.lookup(Aircraft("y", 0, 0, 2), 2, "light").segment_times == (2, 2)
        assert store.lookup(Aircraft("y", 0, 0), 2, "heavy_medium").segment_times == (1, 1)

    def test_missing_length(self, store):
        with pytest.raises(MissingProfileError):
            store.lookup(Aircraft("y", 0, 0), 5)

    def test_segment_shorter_than_a_minute(self):
        with pytest.raises(ValueError):
            SpeedProfile("default", (1, 0))


class TestNodeTimes:
    @pytest.fixture
    def store(self):
        return synthesize_profiles(ProfileSynthesisSpec(max_length=5, constant_minutes=1))

    def test_times_follow_profile(self, store):
        rows = node_times(Aircraft("a", 0, 3), Path((0, 4, 8), 2.0), 3, store)
        assert rows == [(0, 3), (4, 4), (8, 5)]

    def test_horizon_overflow(self, store):
        with pytest.raises(HorizonOverflow):
            node_times(Aircraft("a", 0, 3), Path((0, 4, 8), 2.0), 3, store, horizon=4)

    def test_entry_window_clamped_at_origin(self):
        assert list(entry_window(Aircraft("a", 0, 1), 3)) == [0, 1, 2, 3, 4]
        assert list(entry_window(Aircraft("a", 0, 5), 0)) == [5]


class TestOccupancyIndex:
    """ξ, Ξ и отсев траекторий за горизонтом на сетке 3x3"""

    @pytest.fixture
    def catalog(self, grid_3x3):
        g, turns = grid_3x3
        return generate_catalog(g, turns, reverse_bfs_distances(g), 4)

    @pytest.fixture
    def index(self, catalog):
        store = synthesize_profiles(ProfileSynthesisSpec(max_length=4, constant_minutes=1))
        return build_occupancy_index(catalog, [Aircraft("a", 0, 5)], 1, store, horizon=7)

    def test_catalog_has_three_routes(self, catalog):
        assert {p.nodes for p in catalog} == {(0, 4, 8), (0, 1, 5, 8), (0, 3, 7, 8)}

    def test_xi_and_point(self, catalog, index):
        direct = catalog.path_id((0, 4, 8))
        assert index.xi("a", direct, 8) == 7
        assert index.point("a", 8, 7) == frozenset({direct})
        assert len(index.point("a", 8, 8)) == 2

    def test_window(self, catalog, index):
        assert index.window("a", 8, 7, 2) == frozenset(range(len(catalog)))

    def test_late_trajectories_excluded(self, catalog, index):
        direct = catalog.path_id((0, 4, 8))
        assert len(index.excluded) == 5
        assert len(index.trajectories) == 4
        assert ("a", direct, 6) in index.excluded
        assert index.trajectories[("a", direct, 5)].landing == 7

    def test_occupants(self, catalog, index):
        direct = catalog.path_id((0, 4, 8))
        assert index.occupants("a", 4, 5) == [("a", direct, 4)]
        assert index.node_time(("a", direct, 4), 8) == 6
