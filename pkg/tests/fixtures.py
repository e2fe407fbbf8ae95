"""Small hand-built surveys for tracing screening and ledger rules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from railcarbon.config import Radius
from railcarbon.panel import BalancedPanel, PanelObservation
from railcarbon.records import (
    ElectrifiedFactor,
    FactorTables,
    GasolineFactor,
    HouseholdRecord,
    OdometerReading,
    RawSurvey,
    Station,
    StationSet,
    TripDayRecord,
    VehicleRecord,
)

STATION = (34.0, -118.0)
MILES_PER_DEG_LAT = 3958.8 * math.pi / 180

FACTORS = FactorTables(
    gasoline={
        (cy, cls, 2005): GasolineFactor(run, start)
        for cy in (2011, 2012)
        for cls, run, start in (("LDA", 400.0, 300.0), ("LDT1", 480.0, 330.0), ("LDT2", 560.0, 360.0),
                                ("MCY", 180.0, 40.0))
    },
    electrified={("M", "Hybrid", 2012): ElectrifiedFactor(250.0)},
    ldt_split_threshold_lb=3750.0,
)

STATIONS = StationSet((Station("S1", *STATION),))


def home_at(distance_mi: float) -> tuple[float, float]:
    """A point due north of the station at the given great-circle distance."""
    return STATION[0] + distance_mi / MILES_PER_DEG_LAT, STATION[1]


def steady(miles_per_day: float, start: float = 1000.0, days: int = 7) -> list[float]:
    return [start + miles_per_day * d for d in range(days)]


@dataclass
class Car:
    vid: str = "V1"
    readings: list[float] | None = None
    make: str | None = "M"
    model: str | None = "Sedan"
    year: int | None = 2005
    fuel: str | None = "gasoline"
    body: str | None = "auto"
    weight: float | None = None


@dataclass
class SurveyBuilder:
    households: list = field(default_factory=list)
    vehicles: list = field(default_factory=list)
    odometer: list = field(default_factory=list)
    trips: list = field(default_factory=list)

    def add(self, hid: str, wave: int, distance_mi: float = 0.3, cars=(), size: int = 2,
            income: int | None = 3, trips=((2, 0, 0),) * 7) -> "SurveyBuilder":
        lat, lon = home_at(distance_mi)
        self.households.append(HouseholdRecord(hid, wave, lat, lon, size, income))
        for c in cars:
            self.vehicles.append(VehicleRecord(hid, wave, c.vid, c.make, c.model, c.year, c.fuel, c.body, c.weight))
            for day, r in enumerate(c.readings if c.readings is not None else steady(20.0), start=1):
                if r is not None:
                    self.odometer.append(OdometerReading(hid, wave, c.vid, day, float(r)))
        for day, (car, bus, train) in enumerate(trips, start=1):
            self.trips.append(TripDayRecord(hid, wave, day, car, bus, train))
        return self

    def both(self, hid: str, **kw) -> "SurveyBuilder":
        return self.add(hid, 1, **kw).add(hid, 2, **kw)

    def build(self) -> RawSurvey:
        return RawSurvey(tuple(self.households), tuple(self.vehicles), tuple(self.odometer), tuple(self.trips))


def obs(hid: str, wave: int, group: int, co2: float, income: int | None = 1, veh: int = 1, ppl: int = 2,
        distance: float | None = None, vehicles=()) -> PanelObservation:
    """A panel row built directly, bypassing screening."""
    d = distance if distance is not None else (0.2 if group else 2.0)
    return PanelObservation(hid, wave, group, d, veh, ppl, income, 10.0, float(co2), vehicles=vehicles)


def panel_of(rows) -> BalancedPanel:
    return BalancedPanel(tuple(rows), {}, {1: len(rows) // 2, 2: len(rows) // 2}, Radius(0.5, "mile"))
