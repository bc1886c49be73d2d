from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from src.core.errors import HorizonOverflow, MissingProfileError
from src.core.logging import get_logger
from src.domain.entities import Aircraft
from src.domain.pathgen import Path, PathCatalog
from src.domain.value_objects import NodeId

log = get_logger(__name__)

DEFAULT_PROFILE_KEY = "default"


@dataclass(frozen=True)
class SpeedProfile:
    key: str
    segment_times: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(u < 1 for u in self.segment_times):
            raise ValueError(f"profile {self.key} has a segment shorter than 1 minute")

    @property
    def route_length(self) -> int:
        return len(self.segment_times)

    @property
    def transit(self) -> int:
        return sum(self.segment_times)


@dataclass
class ProfileStore:
    """Профили по (ключ, длина маршрута); ключ - id ВС, имя категории или 'default'"""
    profiles: dict[tuple[str, int], SpeedProfile] = field(default_factory=dict)

    def add(self, profile: SpeedProfile) -> None:
        self.profiles[(profile.key, profile.route_length)] = profile

    def lookup(self, aircraft: Aircraft, hops: int, category_name: str | None = None) -> SpeedProfile:
        for key in (aircraft.id, category_name, DEFAULT_PROFILE_KEY):
            if key is not None and (key, hops) in self.profiles:
                return self.profiles[(key, hops)]
        raise MissingProfileError(
            f"no profile of length {hops} for aircraft {aircraft.id}",
            aircraft=aircraft.id,
            length=hops,
        )

    def lengths(self, key: str) -> list[int]:
        return sorted(p for k, p in self.profiles if k == key)

    def __len__(self) -> int:
        return len(self.profiles)


@dataclass(frozen=True)
class ProfileClassSpec:
    """Скорость на сегменте растёт с удалением от ВПП: final + slope*(h-1), но не выше cap"""
    final_speed_kt: float
    slope_kt_per_hop: float
    cap_speed_kt: float


@dataclass(frozen=True)
class ProfileSynthesisSpec:
    pixel_side_nm: float = 6.0
    min_length: int = 1
    max_length: int = 13
    constant_minutes: int | None = None
    classes: Mapping[str, ProfileClassSpec] = field(default_factory=dict)


def _remaining_minutes(spec: ProfileClassSpec, pixel_side_nm: float, hops: int) -> list[float]:
    # G(h): время от узла, отстоящего на h переходов, до ВПП
    total, out = 0.0, [0.0]
    for h in range(1, hops + 1):
        speed = min(spec.cap_speed_kt, spec.final_speed_kt + spec.slope_kt_per_hop * (h - 1))
        total += max(1.0, 60.0 * pixel_side_nm / speed)
        out.append(total)
    return out


def synthesize_profiles(spec: ProfileSynthesisSpec) -> ProfileStore:
    store = ProfileStore()
    lengths = range(max(1, spec.min_length), spec.max_length + 1)
    if spec.constant_minutes is not None:
        for p in lengths:
            store.add(SpeedProfile(DEFAULT_PROFILE_KEY, (spec.constant_minutes,) * p))
        return store

    for key, cls in spec.classes.items():
        raw = _remaining_minutes(cls, spec.pixel_side_nm, spec.max_length)
        remaining = [math.floor(v + 0.5) for v in raw]  # half-up, не банковское
        for p in lengths:
            # сегмент k пути длины p отстоит от ВПП на p-k+1 переходов
            times = tuple(remaining[p - k + 1] - remaining[p - k] for k in range(1, p + 1))
            store.add(SpeedProfile(key, times))
    log.debug(f"synthesized {len(store)} speed profiles", extra={"classes": list(spec.classes)})
    return store


def node_times(
    aircraft: Aircraft,
    path: Path,
    entry_time: int,
    profiles: ProfileStore,
    horizon: int | None = None,
    category_name: str | None = None,
) -> list[tuple[NodeId, int]]:
    if path.hop_count == 0:
        times = [entry_time]
    else:
        profile = profiles.lookup(aircraft, path.hop_count, category_name)
        times = [entry_time]
        for u in profile.segment_times:
            times.append(times[-1] + u)
    if horizon is not None and times[-1] > horizon:
        raise HorizonOverflow(
            f"aircraft {aircraft.id} lands at {times[-1]} > {horizon}",
            aircraft=aircraft.id,
            landing=times[-1],
        )
    return list(zip(path.nodes, times))


def entry_window(aircraft: Aircraft, mu: int) -> range:
    return range(max(0, aircraft.planned_time - mu), aircraft.planned_time + mu + 1)


@dataclass(frozen=True, slots=True)
class Trajectory:
    aircraft: str
    path_id: int
    entry_time: int
    times: tuple[int, ...]

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.aircraft, self.path_id, self.entry_time)

    @property
    def landing(self) -> int:
        return self.times[-1]


@dataclass
class OccupancyIndex:
    """ξ, Ξ и Υ по всем допустимым траекториям"""
    catalog: PathCatalog
    mu: int
    trajectories: dict[tuple[str, int, int], Trajectory] = field(default_factory=dict)
    excluded: list[tuple[str, int, int]] = field(default_factory=list)
    # (ВС, узел, время) -> ключи траекторий
    _occupants: dict[tuple[str, NodeId, int], list[tuple[str, int, int]]] = field(
        default_factory=lambda: defaultdict(list), repr=False
    )
    _offsets: dict[tuple[str, int], tuple[int, ...]] = field(default_factory=dict, repr=False)
    _planned: dict[str, int] = field(default_factory=dict, repr=False)

    def xi(self, aircraft: str, path_id: int, node: NodeId) -> int:
        """Время в узле при входе в плановое время"""
        offsets = self._offsets[(aircraft, path_id)]
        position = self.catalog[path_id].nodes.index(node)
        return self._planned[aircraft] + offsets[position]

    def point(self, aircraft: str, node: NodeId, t: int) -> frozenset[int]:
        """Ξ_{a,i,t}: пути, на которых ВС при плановом входе находится в i в момент t"""
        return frozenset(
            pid for pid in self.catalog.through_node(node)
            if (aircraft, pid) in self._offsets and self.xi(aircraft, pid, node) == t
        )

    def window(self, aircraft: str, node: NodeId, t: int, sigma: int) -> frozenset[int]:
        """Υ_{a,i,t,σ}"""
        out: set[int] = set()
        for tau in range(t, t + sigma):
            out |= self.point(aircraft, node, tau)
        return frozenset(out)

    def occupants(self, aircraft: str, node: NodeId, t: int) -> list[tuple[str, int, int]]:
        """Сохранённые траектории ВС, проходящие узел ровно в момент t (с учётом сдвига входа)"""
        return self._occupants.get((aircraft, node, t), [])

    def occupants_between(
        self, aircraft: str, node: NodeId, t_from: int, t_to: int
    ) -> list[tuple[str, int, int]]:
        out: list[tuple[str, int, int]] = []
        for t in range(t_from, t_to + 1):
            out.extend(self.occupants(aircraft, node, t))
        return out

    def occupancy_times(self, aircraft: str, node: NodeId) -> list[int]:
        return sorted({t for (a, i, t) in self._occupants if a == aircraft and i == node})

    def of_aircraft(self, aircraft: str) -> list[Trajectory]:
        return [tr for key, tr in self.trajectories.items() if key[0] == aircraft]

    def node_time(self, key: tuple[str, int, int], node: NodeId) -> int:
        trajectory = self.trajectories[key]
        return trajectory.times[self.catalog[trajectory.path_id].nodes.index(node)]


def build_occupancy_index(
    catalog: PathCatalog,
    aircraft: Iterable[Aircraft],
    mu: int,
    profiles: ProfileStore,
    horizon: int,
    category_names: Mapping[int, str] | None = None,
) -> OccupancyIndex:
    index = OccupancyIndex(catalog=catalog, mu=mu)
    for a in aircraft:
        index._planned[a.id] = a.planned_time
        cat_name = category_names.get(a.category) if category_names else None
        for pid in catalog.entry_paths(a.entry):
            path = catalog[pid]
            base = node_times(a, path, 0, profiles, None, cat_name)
            offsets = tuple(t for _, t in base)
            index._offsets[(a.id, pid)] = offsets
            for t0 in entry_window(a, mu):
                key = (a.id, pid, t0)
                times = tuple(t0 + off for off in offsets)
                if times[-1] > horizon:
                    index.excluded.append(key)
                    continue
                index.trajectories[key] = Trajectory(a.id, pid, t0, times)
                for node, t in zip(path.nodes, times):
                    index._occupants[(a.id, node, t)].append(key)
    if index.excluded:
        log.warning(
            f"{len(index.excluded)} trajectories land after the horizon and are excluded",
            extra={"horizon": horizon},
        )
    log.debug(f"occupancy index: {len(index.trajectories)} trajectories")
    return index
