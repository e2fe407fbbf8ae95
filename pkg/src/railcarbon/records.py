"""Immutable domain records for survey, factor and station inputs."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

Fuel = Literal["gasoline", "hybrid", "electric"]
Body = Literal["auto", "truck", "motorcycle"]

FUELS: tuple[str, ...] = ("gasoline", "hybrid", "electric")
BODIES: tuple[str, ...] = ("auto", "truck", "motorcycle")
VEHICLE_CLASSES: tuple[str, ...] = ("LDA", "LDT1", "LDT2", "MCY")
WAVES: tuple[int, ...] = (1, 2)

HouseholdWave = tuple[str, int]


@dataclass(frozen=True)
class HouseholdRecord:
    household_id: str
    wave: int
    home_lat: float
    home_lon: float
    size_12plus: int
    income_bracket: int | None = None


@dataclass(frozen=True)
class VehicleRecord:
    """One vehicle as reported by a household in one wave.

    ``make``, ``model``, ``model_year``, ``fuel`` and ``body`` are None when
    the respondent left them blank; screening treats that as missing vehicle
    information rather than a parse failure.
    """

    household_id: str
    wave: int
    vehicle_id: str
    make: str | None
    model: str | None
    model_year: int | None
    fuel: str | None
    body: str | None
    curb_weight_lb: float | None = None

    @property
    def electrified(self) -> bool:
        return self.fuel in ("hybrid", "electric")


@dataclass(frozen=True)
class OdometerReading:
    household_id: str
    wave: int
    vehicle_id: str
    day_index: int
    reading_miles: float


@dataclass(frozen=True)
class TripDayRecord:
    household_id: str
    wave: int
    day_index: int
    car_trips: float
    bus_trips: float
    train_trips: float


@dataclass(frozen=True)
class RawSurvey:
    """Cross-referenced survey tables.

    The loaders guarantee every child row points at an existing
    (household_id, wave) pair and every odometer row at an existing vehicle.
    """

    households: tuple[HouseholdRecord, ...]
    vehicles: tuple[VehicleRecord, ...] = ()
    odometer: tuple[OdometerReading, ...] = ()
    trips: tuple[TripDayRecord, ...] = ()

    @cached_property
    def household_index(self) -> dict[HouseholdWave, HouseholdRecord]:
        return {(h.household_id, h.wave): h for h in self.households}

    @cached_property
    def vehicles_by_household(self) -> dict[HouseholdWave, list[VehicleRecord]]:
        out: dict[HouseholdWave, list[VehicleRecord]] = defaultdict(list)
        for v in self.vehicles:
            out[(v.household_id, v.wave)].append(v)
        return dict(out)

    @cached_property
    def odometer_by_vehicle(self) -> dict[tuple[str, int, str], list[OdometerReading]]:
        out: dict[tuple[str, int, str], list[OdometerReading]] = defaultdict(list)
        for r in self.odometer:
            out[(r.household_id, r.wave, r.vehicle_id)].append(r)
        for rows in out.values():
            rows.sort(key=lambda r: r.day_index)
        return dict(out)

    @cached_property
    def trips_by_household(self) -> dict[HouseholdWave, list[TripDayRecord]]:
        out: dict[HouseholdWave, list[TripDayRecord]] = defaultdict(list)
        for t in self.trips:
            out[(t.household_id, t.wave)].append(t)
        return dict(out)

    def vehicle_count(self, household_id: str, wave: int) -> int:
        return len(self.vehicles_by_household.get((household_id, wave), ()))

    def counts(self) -> dict[str, int]:
        return {
            "households": len(self.households),
            "vehicles": len(self.vehicles),
            "odometer": len(self.odometer),
            "trips": len(self.trips),
        }


@dataclass(frozen=True)
class GasolineFactor:
    run_g_per_mile: float
    start_g_per_day: float


@dataclass(frozen=True)
class ElectrifiedFactor:
    combined_g_per_mile: float

    @property
    def start_g_per_day(self) -> float:
        return 0.0


def _norm(text: str) -> str:
    return " ".join(text.split()).casefold()


@dataclass(frozen=True)
class FactorTables:
    """Emission-factor lookup tables.

    ``gasoline`` is keyed by (calendar_year, vehicle_class, model_year);
    ``electrified`` by (make, model, model_year). Make/model matching is
    whitespace- and case-insensitive.
    """

    gasoline: dict[tuple[int, str, int], GasolineFactor] = field(default_factory=dict)
    electrified: dict[tuple[str, str, int], ElectrifiedFactor] = field(default_factory=dict)
    ldt_split_threshold_lb: float | None = None

    @cached_property
    def _electrified_index(self) -> dict[tuple[str, str, int], ElectrifiedFactor]:
        return {(_norm(mk), _norm(md), yr): f for (mk, md, yr), f in self.electrified.items()}

    def find_electrified(self, make: str, model: str, model_year: int) -> ElectrifiedFactor | None:
        return self._electrified_index.get((_norm(make), _norm(model), model_year))


@dataclass(frozen=True)
class Station:
    station_id: str
    lat: float
    lon: float


@dataclass(frozen=True)
class StationSet:
    stations: tuple[Station, ...] = ()

    def __len__(self) -> int:
        return len(self.stations)

    def __iter__(self):
        return iter(self.stations)
