"""Household screening, group assignment and balanced two-wave panel.

A household-wave is screened against four exclusion reasons, checked in a
fixed order and ledgered under the first one that fires:

1. ``MissingVehicleInfo`` - some vehicle lacks make, model, year, fuel or
   body, or is a truck without curb weight;
2. ``IncompleteVmt`` - some vehicle has no usable odometer series or
   averages more than the outlier threshold;
3. ``NoFactorAvailable`` - some vehicle has no emission-factor entry;
4. ``Unmatched`` - the household passed this wave but not the other one.

Only households passing both waves enter the panel.
"""

from __future__ import annotations

import csv
import enum
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .config import Radius, RunConfig
from .emissions import VehicleEmission, household_daily_co2, resolve_factor, vehicle_emission
from .errors import EmptyPanel, EmptyStationSet, NoFactorAvailable, NonMonotone, RailCarbonError, TooFewReadings
from .records import (
    WAVES,
    FactorTables,
    HouseholdRecord,
    OdometerReading,
    RawSurvey,
    StationSet,
    TripDayRecord,
    VehicleRecord,
)

EARTH_RADIUS_MI = 3958.8


class ExclusionReason(str, enum.Enum):
    MissingVehicleInfo = "MissingVehicleInfo"
    IncompleteVmt = "IncompleteVmt"
    NoFactorAvailable = "NoFactorAvailable"
    Unmatched = "Unmatched"


class Group(enum.IntEnum):
    Control = 0
    Experimental = 1


@dataclass(frozen=True)
class GroupLabel:
    group: Group
    distance_to_nearest_station: float

    @property
    def experimental(self) -> bool:
        return self.group is Group.Experimental


# -- odometer ----------------------------------------------------------------


def _longest_nondecreasing(readings: Sequence[OdometerReading]) -> list[OdometerReading]:
    # O(n^2) DP; a survey week has at most a handful of readings
    n = len(readings)
    if all(a.reading_miles <= b.reading_miles for a, b in zip(readings, readings[1:])):
        return list(readings)
    best = [1] * n
    prev = [-1] * n
    for i in range(n):
        for j in range(i):
            if readings[j].reading_miles <= readings[i].reading_miles and best[j] + 1 > best[i]:
                best[i], prev[i] = best[j] + 1, j
    if not n:
        return []
    # ties go to the chain ending latest, which also covers the widest span
    end = max(range(n), key=lambda i: (best[i], i))
    chain = []
    while end != -1:
        chain.append(readings[end])
        end = prev[end]
    return chain[::-1]


def daily_average_vmt(readings: Iterable[OdometerReading], min_readings: int = 3) -> float:
    """Average miles per day from end-of-day cumulative odometer readings.

    Readings that break monotonicity are discarded by keeping the longest
    non-decreasing run (in day order); the average is then the distance
    between its first and last reading divided by the days between them.
    """
    rs = sorted(readings, key=lambda r: r.day_index)
    if len(rs) < min_readings:
        raise TooFewReadings(f"{len(rs)} odometer readings, need at least {min_readings}")
    chain = _longest_nondecreasing(rs)
    if len(chain) < min_readings:
        raise NonMonotone(f"no non-decreasing subset of {min_readings} readings among {len(rs)}")
    first, last = chain[0], chain[-1]
    return (last.reading_miles - first.reading_miles) / (last.day_index - first.day_index)


def is_monotone(readings: Iterable[OdometerReading]) -> bool:
    rs = sorted(readings, key=lambda r: r.day_index)
    return all(a.reading_miles <= b.reading_miles for a, b in zip(rs, rs[1:]))


# -- distance and groups -----------------------------------------------------


def haversine_miles(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_MI * math.asin(min(1.0, math.sqrt(a)))


def station_distance(lat: float, lon: float, stations: StationSet) -> float:
    if not len(stations):
        raise EmptyStationSet("distance-based grouping needs at least one station")
    return min(haversine_miles(lat, lon, s.lat, s.lon) for s in stations)


def assign_group(distance_miles: float, radius: Radius) -> GroupLabel:
    if distance_miles < 0:
        raise ValueError("distance must be non-negative")
    g = Group.Experimental if distance_miles <= radius.miles else Group.Control
    return GroupLabel(g, distance_miles)


# -- screening ---------------------------------------------------------------


@dataclass(frozen=True)
class HouseholdWaveBundle:
    household: HouseholdRecord
    vehicles: tuple[VehicleRecord, ...]
    odometer: Mapping[str, tuple[OdometerReading, ...]]
    trips: tuple[TripDayRecord, ...]

    @classmethod
    def from_survey(cls, survey: RawSurvey, household: HouseholdRecord) -> "HouseholdWaveBundle":
        key = (household.household_id, household.wave)
        vehicles = tuple(survey.vehicles_by_household.get(key, ()))
        odo = {
            v.vehicle_id: tuple(survey.odometer_by_vehicle.get((*key, v.vehicle_id), ()))
            for v in vehicles
        }
        return cls(household, vehicles, odo, tuple(survey.trips_by_household.get(key, ())))


@dataclass(frozen=True)
class ScreenResult:
    """Outcome of screening one household-wave.

    ``reason`` is None when the household-wave passes; ``emissions`` is then
    filled with one entry per vehicle.
    """

    reason: ExclusionReason | None
    detail: str = ""
    emissions: tuple[VehicleEmission, ...] = ()

    @property
    def passed(self) -> bool:
        return self.reason is None


def _missing_info(v: VehicleRecord) -> str | None:
    for name in ("make", "model", "model_year", "fuel", "body"):
        if getattr(v, name) is None:
            return f"vehicle {v.vehicle_id} missing {name}"
    if v.body == "truck" and v.curb_weight_lb is None:
        return f"truck {v.vehicle_id} missing curb weight"
    return None


def screen_household_wave(bundle: HouseholdWaveBundle, factors: FactorTables, cfg: RunConfig) -> ScreenResult:
    vehicles = sorted(bundle.vehicles, key=lambda v: v.vehicle_id)
    for v in vehicles:
        why = _missing_info(v)
        if why:
            return ScreenResult(ExclusionReason.MissingVehicleInfo, why)

    vmts: dict[str, float] = {}
    for v in vehicles:
        try:
            vmt = daily_average_vmt(bundle.odometer.get(v.vehicle_id, ()), cfg.min_odometer_readings)
        except (TooFewReadings, NonMonotone) as exc:
            return ScreenResult(ExclusionReason.IncompleteVmt, f"vehicle {v.vehicle_id}: {exc}")
        if vmt > cfg.outlier_vmt_per_day:
            return ScreenResult(ExclusionReason.IncompleteVmt,
                                f"vehicle {v.vehicle_id} averages {vmt:.1f} mi/day")
        vmts[v.vehicle_id] = vmt

    year = cfg.calendar_years[bundle.household.wave]
    for v in vehicles:
        try:
            resolve_factor(v, year, factors)
        except (NoFactorAvailable, ValueError, RailCarbonError) as exc:
            return ScreenResult(ExclusionReason.NoFactorAvailable, f"vehicle {v.vehicle_id}: {exc}")

    emissions = tuple(vehicle_emission(v, vmts[v.vehicle_id], year, factors) for v in vehicles)
    return ScreenResult(None, emissions=emissions)


# -- panel -------------------------------------------------------------------


@dataclass(frozen=True)
class PanelObservation:
    household_id: str
    wave: int
    group: int
    distance_miles: float
    veh_cnt: int
    ppl_cnt: int
    income_bracket: int | None
    daily_vmt: float
    daily_co2_g: float
    car_trips: float | None = None
    bus_trips: float | None = None
    train_trips: float | None = None
    trip_days: int = 0
    vehicles: tuple[VehicleEmission, ...] = ()

    @property
    def period(self) -> int:
        return self.wave - 1


METRICS = ("co2", "vmt", "car_trips", "bus_trips", "train_trips")
_METRIC_ATTR = {"co2": "daily_co2_g", "vmt": "daily_vmt", "car_trips": "car_trips",
                "bus_trips": "bus_trips", "train_trips": "train_trips"}


def metric_value(obs: PanelObservation, metric: str) -> float | None:
    try:
        return getattr(obs, _METRIC_ATTR[metric])
    except KeyError:
        raise ValueError(f"unknown metric {metric!r}; expected one of {', '.join(METRICS)}") from None


@dataclass(frozen=True)
class BalancedPanel:
    observations: tuple[PanelObservation, ...]
    ledger: Mapping[tuple[int, ExclusionReason], int]
    input_counts: Mapping[int, int]
    radius: Radius
    screening: Mapping[tuple[str, int], ScreenResult] = field(default_factory=dict, compare=False)

    def wave(self, wave: int) -> list[PanelObservation]:
        return [o for o in self.observations if o.wave == wave]

    def cell(self, group: int, wave: int) -> list[PanelObservation]:
        return [o for o in self.observations if o.group == group and o.wave == wave]

    @property
    def household_ids(self) -> list[str]:
        return sorted({o.household_id for o in self.observations})

    def ledger_total(self, wave: int) -> int:
        return sum(self.ledger.get((wave, r), 0) for r in ExclusionReason)

    def with_radius(self, radius: Radius) -> "BalancedPanel":
        """Regroup households at another catchment radius; emissions are reused."""
        obs = tuple(replace(o, group=int(assign_group(o.distance_miles, radius).group)) for o in self.observations)
        return replace(self, observations=obs, radius=radius)

    def vehicle_emissions(self) -> list[VehicleEmission]:
        return [e for o in self.observations for e in o.vehicles]

    def write_ledger_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["wave", *[r.value for r in ExclusionReason], "Total", "Retained"])
            for wave in WAVES:
                counts = [self.ledger.get((wave, r), 0) for r in ExclusionReason]
                w.writerow([f"Wave{wave}", *counts, sum(counts), len(self.wave(wave))])
        return path


def _trip_means(trips: Sequence[TripDayRecord]) -> tuple[float | None, float | None, float | None, int]:
    if not trips:
        return None, None, None, 0
    n = len(trips)
    return (
        sum(t.car_trips for t in trips) / n,
        sum(t.bus_trips for t in trips) / n,
        sum(t.train_trips for t in trips) / n,
        n,
    )


def build_balanced_panel(survey: RawSurvey, factors: FactorTables, stations: StationSet,
                         cfg: RunConfig) -> BalancedPanel:
    results: dict[tuple[str, int], ScreenResult] = {}
    for h in sorted(survey.households, key=lambda h: (h.household_id, h.wave)):
        bundle = HouseholdWaveBundle.from_survey(survey, h)
        results[(h.household_id, h.wave)] = screen_household_wave(bundle, factors, cfg)

    ledger: Counter = Counter()
    retained: list[str] = []
    ids = sorted({hid for hid, _ in results})
    for hid in ids:
        passed = {w: (hid, w) in results and results[(hid, w)].passed for w in WAVES}
        if all(passed.values()):
            retained.append(hid)
            continue
        for w in WAVES:
            res = results.get((hid, w))
            if res is None:
                continue
            ledger[(w, res.reason if res.reason else ExclusionReason.Unmatched)] += 1

    if not retained:
        raise EmptyPanel("no household passed screening in both waves")

    index = survey.household_index
    observations: list[PanelObservation] = []
    for hid in retained:
        # group membership is fixed by the pre-opening home location
        base = index[(hid, 1)]
        label = assign_group(station_distance(base.home_lat, base.home_lon, stations), cfg.catchment_radius)
        for w in WAVES:
            h = index[(hid, w)]
            res = results[(hid, w)]
            car, bus, train, days = _trip_means(survey.trips_by_household.get((hid, w), ()))
            observations.append(PanelObservation(
                household_id=hid,
                wave=w,
                group=int(label.group),
                distance_miles=label.distance_to_nearest_station,
                veh_cnt=len(res.emissions),
                ppl_cnt=h.size_12plus,
                income_bracket=h.income_bracket,
                daily_vmt=math.fsum(e.daily_vmt for e in res.emissions),
                daily_co2_g=household_daily_co2(res.emissions),
                car_trips=car,
                bus_trips=bus,
                train_trips=train,
                trip_days=days,
                vehicles=res.emissions,
            ))

    input_counts = Counter(w for _, w in results)
    return BalancedPanel(
        observations=tuple(observations),
        ledger={(w, r): ledger.get((w, r), 0) for w in WAVES for r in ExclusionReason},
        input_counts={w: input_counts.get(w, 0) for w in WAVES},
        radius=cfg.catchment_radius,
        screening=results,
    )
