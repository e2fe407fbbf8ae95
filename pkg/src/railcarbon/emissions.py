"""Vehicle classification, factor lookup and daily CO2 per vehicle/household.

Gasoline vehicles::

    daily_co2 = run_rate * daily_vmt + start_rate

Hybrid and electric vehicles use one combined tailpipe-plus-upstream rate
and no start emissions::

    daily_co2 = combined_rate * daily_vmt

All quantities are grams of CO2 per day.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import MissingCurbWeight, NegativeVmt, NoFactorAvailable, NonPositiveWeight
from .records import ElectrifiedFactor, FactorTables, GasolineFactor, VehicleRecord

TEST_WEIGHT_MARGIN_LB = 300.0
ELECTRIFIED = "Electrified"


@dataclass(frozen=True)
class VehicleEmission:
    household_id: str
    wave: int
    vehicle_id: str
    vehicle_class: str
    daily_vmt: float
    daily_co2_g: float


def equivalent_test_weight(curb_weight_lb: float) -> float:
    if curb_weight_lb is None or not curb_weight_lb > 0:
        raise NonPositiveWeight(f"curb weight must be positive, got {curb_weight_lb}")
    return curb_weight_lb + TEST_WEIGHT_MARGIN_LB


def classify_vehicle(v: VehicleRecord, threshold_lb: float | None) -> str:
    """Map a gasoline vehicle to LDA, LDT1, LDT2 or MCY.

    Trucks whose equivalent test weight equals the threshold fall in LDT1.
    """
    if v.body == "auto":
        return "LDA"
    if v.body == "motorcycle":
        return "MCY"
    if v.body != "truck":
        raise ValueError(f"unknown body type {v.body!r}")
    if v.curb_weight_lb is None:
        raise MissingCurbWeight(f"truck {v.vehicle_id!r} of household {v.household_id!r} has no curb weight")
    if threshold_lb is None:
        raise ValueError("factor tables carry no ldt_split_threshold_lb; trucks cannot be classified")
    return "LDT1" if equivalent_test_weight(v.curb_weight_lb) <= threshold_lb else "LDT2"


def lookup_gasoline_factor(vehicle_class: str, model_year: int, calendar_year: int,
                           factors: FactorTables) -> GasolineFactor:
    try:
        return factors.gasoline[(calendar_year, vehicle_class, model_year)]
    except KeyError:
        raise NoFactorAvailable(
            f"no gasoline factor for {vehicle_class} model year {model_year} in calendar year {calendar_year}"
        ) from None


def lookup_electrified_factor(make: str, model: str, model_year: int, factors: FactorTables) -> ElectrifiedFactor:
    f = factors.find_electrified(make, model, model_year)
    if f is None:
        raise NoFactorAvailable(f"no electrified factor for {make} {model} {model_year}")
    return f


def _check_vmt(daily_vmt: float) -> None:
    if daily_vmt < 0 or math.isnan(daily_vmt):
        raise NegativeVmt(f"daily VMT must be non-negative, got {daily_vmt}")


def gasoline_daily_co2(f: GasolineFactor, daily_vmt: float) -> float:
    _check_vmt(daily_vmt)
    return f.run_g_per_mile * daily_vmt + f.start_g_per_day


def electrified_daily_co2(f: ElectrifiedFactor, daily_vmt: float) -> float:
    _check_vmt(daily_vmt)
    return f.combined_g_per_mile * daily_vmt


def resolve_factor(v: VehicleRecord, calendar_year: int,
                   factors: FactorTables) -> tuple[str, GasolineFactor | ElectrifiedFactor]:
    """Classify ``v`` and fetch its factor, raising NoFactorAvailable on a miss."""
    if v.electrified:
        return ELECTRIFIED, lookup_electrified_factor(v.make, v.model, v.model_year, factors)
    cls = classify_vehicle(v, factors.ldt_split_threshold_lb)
    return cls, lookup_gasoline_factor(cls, v.model_year, calendar_year, factors)


def vehicle_emission(v: VehicleRecord, daily_vmt: float, calendar_year: int,
                     factors: FactorTables) -> VehicleEmission:
    cls, f = resolve_factor(v, calendar_year, factors)
    if isinstance(f, ElectrifiedFactor):
        co2 = electrified_daily_co2(f, daily_vmt)
    else:
        co2 = gasoline_daily_co2(f, daily_vmt)
    return VehicleEmission(v.household_id, v.wave, v.vehicle_id, cls, daily_vmt, co2)


def household_daily_co2(vehicles: Iterable[VehicleEmission]) -> float:
    # fixed order by vehicle_id so the float sum is reproducible
    return math.fsum(e.daily_co2_g for e in sorted(vehicles, key=lambda e: e.vehicle_id))


def write_emissions_csv(rows: Iterable[VehicleEmission], path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["household_id", "wave", "vehicle_id", "class", "daily_vmt", "daily_co2_g"])
        for e in rows:
            w.writerow([e.household_id, e.wave, e.vehicle_id, e.vehicle_class, repr(e.daily_vmt), repr(e.daily_co2_g)])
    return path
