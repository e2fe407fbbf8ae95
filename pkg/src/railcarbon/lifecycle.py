"""Transit life-cycle CO2 accounting.

Per passenger trip, the operational factor is grams per passenger-mile
times the average trip length. The life-cycle factor scales it by

    scale = gross / operational

where gross sums all five per-passenger-mile components (vehicle
operation, propulsion electricity, energy production, vehicle manufacturing
and maintenance, infrastructure) and operational sums the first three.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .errors import MalformedRow, NegativeInput, NegativeTrips, ZeroOperational
from .panel import BalancedPanel, Group
from .stats import TestResult, paired_t

LIFECYCLE_COLUMNS = ("mode", "g_per_passenger_mile", "avg_trip_miles", "scale_factor")
COMPONENT_COLUMNS = (
    "comp_vehicle_operation",
    "comp_propulsion",
    "comp_energy_production",
    "comp_vehicle_manufacturing",
    "comp_infrastructure",
)
MODES = ("bus", "rail")


class ScaleBelowOneWarning(UserWarning):
    """A life-cycle scale factor below one: gross emissions under operational."""


@dataclass(frozen=True)
class LifecycleComponents:
    vehicle_operation: float
    propulsion_electricity: float
    energy_production: float
    vehicle_manufacturing_maintenance: float
    infrastructure_construction_operation: float

    def __post_init__(self):
        for name, v in self.__dict__.items():
            if v < 0:
                raise NegativeInput(f"{name} must be non-negative, got {v}")

    @property
    def operational(self) -> float:
        return math.fsum((self.vehicle_operation, self.propulsion_electricity, self.energy_production))

    @property
    def gross(self) -> float:
        return math.fsum((self.vehicle_operation, self.propulsion_electricity, self.energy_production,
                          self.vehicle_manufacturing_maintenance, self.infrastructure_construction_operation))


def scale_factor(c: LifecycleComponents, decimals: int | None = None) -> float:
    """Gross over operational emissions; optionally rounded for display parity."""
    op = c.operational
    if op <= 0:
        raise ZeroOperational("operational emissions must be positive to form a scale factor")
    s = c.gross / op
    return round(s, decimals) if decimals is not None else s


def per_trip_operational(g_per_passenger_mile: float, avg_trip_miles: float) -> float:
    if g_per_passenger_mile < 0 or avg_trip_miles < 0:
        raise NegativeInput("per-mile rate and trip length must be non-negative")
    return g_per_passenger_mile * avg_trip_miles


def per_trip_lifecycle(operational: float, scale: float) -> float:
    if operational < 0:
        raise NegativeInput("operational grams per trip must be non-negative")
    if scale < 1.0:
        warnings.warn(f"life-cycle scale factor {scale} is below 1", ScaleBelowOneWarning, stacklevel=2)
    return operational * scale


@dataclass(frozen=True)
class ModeFactors:
    mode: str
    g_per_passenger_mile: float
    avg_trip_miles: float
    scale_factor: float
    components: LifecycleComponents | None = None

    @property
    def per_trip_operational(self) -> float:
        return per_trip_operational(self.g_per_passenger_mile, self.avg_trip_miles)

    @property
    def per_trip_lifecycle(self) -> float:
        return per_trip_lifecycle(self.per_trip_operational, self.scale_factor)


def household_transit_co2(bus_trips: float, rail_trips: float, bus: ModeFactors, rail: ModeFactors) -> float:
    """Daily household life-cycle transit CO2 (grams) from daily trip counts."""
    if bus_trips < 0 or rail_trips < 0:
        raise NegativeTrips("trip counts must be non-negative")
    return bus_trips * bus.per_trip_lifecycle + rail_trips * rail.per_trip_lifecycle


@dataclass(frozen=True)
class NetEffect:
    vehicle_effect: float
    transit_offset: float
    net: float
    offset_share: float | None


def net_effect_summary(did_effect: float, transit_delta: float) -> NetEffect:
    """Combine the vehicle treatment effect with a transit emission change.

    ``offset_share`` is |transit_delta / did_effect|, or None when the vehicle
    effect is zero.
    """
    share = None if did_effect == 0 else abs(transit_delta / did_effect)
    return NetEffect(did_effect, transit_delta, did_effect + transit_delta, share)


# -- lifecycle.csv -----------------------------------------------------------


def load_lifecycle(path: str | Path, scale_decimals: int | None = None) -> dict[str, ModeFactors]:
    """Read mode factors; full component rows override a given scale factor."""
    path = Path(path)
    out: dict[str, ModeFactors] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(line for line in fh if not line.lstrip().startswith("#"))
        header = [h.strip() for h in next(reader, [])]
        if tuple(header[:4]) != LIFECYCLE_COLUMNS or header[4:] not in ([], list(COMPONENT_COLUMNS)):
            raise MalformedRow(str(path), 1, f"header must be {','.join(LIFECYCLE_COLUMNS + COMPONENT_COLUMNS)}"
                                              " (component columns optional)")
        for lineno, values in enumerate(reader, start=2):
            if not any(v.strip() for v in values):
                continue
            if len(values) != len(header):
                raise MalformedRow(str(path), lineno, f"expected {len(header)} fields, got {len(values)}")
            row = dict(zip(header, (v.strip() for v in values)))
            mode = row["mode"].lower()
            if mode not in MODES:
                raise MalformedRow(str(path), lineno, f"mode must be bus or rail, got {mode!r}")
            if mode in out:
                raise MalformedRow(str(path), lineno, f"duplicate mode {mode!r}")
            try:
                g = float(row["g_per_passenger_mile"])
                miles = float(row["avg_trip_miles"])
                comps = [row.get(c, "") for c in COMPONENT_COLUMNS]
                components = None
                if all(comps):
                    components = LifecycleComponents(*map(float, comps))
                    scale = scale_factor(components, scale_decimals)
                elif any(comps):
                    raise MalformedRow(str(path), lineno, "component columns must be all filled or all blank")
                elif row["scale_factor"]:
                    scale = float(row["scale_factor"])
                else:
                    raise MalformedRow(str(path), lineno, "need a scale_factor or all five components")
            except ValueError:
                raise MalformedRow(str(path), lineno, "non-numeric factor") from None
            except NegativeInput as exc:
                raise MalformedRow(str(path), lineno, str(exc)) from None
            if g < 0 or miles < 0:
                raise MalformedRow(str(path), lineno, "negative rate or trip length")
            out[mode] = ModeFactors(mode, g, miles, scale, components)
    missing = [m for m in MODES if m not in out]
    if missing:
        raise MalformedRow(str(path), None, f"missing mode rows: {', '.join(missing)}")
    return out


# -- household transit table -------------------------------------------------


@dataclass(frozen=True)
class TransitCell:
    group: int
    wave: int
    households: int
    persons: int
    mean_g_per_day: float


@dataclass(frozen=True)
class TransitGroupChange:
    group: int
    wave1: TransitCell
    wave2: TransitCell
    difference: float
    percent_difference: float
    test: TestResult | None


def household_transit_series(panel: BalancedPanel, factors: Mapping[str, ModeFactors],
                             group: int) -> dict[str, tuple[float, float, int, int]]:
    """Per household with trip logs in both waves: (wave1 g/day, wave2 g/day, persons w1, persons w2)."""
    bus, rail = factors["bus"], factors["rail"]
    per: dict[str, dict[int, tuple[float, int]]] = {}
    for o in panel.observations:
        if o.group != group or o.bus_trips is None or o.train_trips is None:
            continue
        per.setdefault(o.household_id, {})[o.wave] = (
            household_transit_co2(o.bus_trips, o.train_trips, bus, rail), o.ppl_cnt)
    return {hid: (w[1][0], w[2][0], w[1][1], w[2][1]) for hid, w in sorted(per.items()) if 1 in w and 2 in w}


def transit_emission_table(panel: BalancedPanel, factors: Mapping[str, ModeFactors]) -> list[TransitGroupChange]:
    """Household transit CO2 by group and wave with paired wave-over-wave tests."""
    out = []
    for group in (Group.Control, Group.Experimental):
        series = household_transit_series(panel, factors, group)
        n = len(series)
        w1 = [s[0] for s in series.values()]
        w2 = [s[1] for s in series.values()]
        m1 = math.fsum(w1) / n if n else math.nan
        m2 = math.fsum(w2) / n if n else math.nan
        cell1 = TransitCell(int(group), 1, n, sum(s[2] for s in series.values()), m1)
        cell2 = TransitCell(int(group), 2, n, sum(s[3] for s in series.values()), m2)
        diffs = [b - a for a, b in zip(w1, w2)]
        test = None
        if n >= 2 and any(d != diffs[0] for d in diffs):
            test = paired_t(diffs)
        pct = (m2 - m1) / m1 if n and m1 != 0 else math.nan
        out.append(TransitGroupChange(int(group), cell1, cell2, m2 - m1, pct, test))
    return out


def rail_trip_change(panel: BalancedPanel, group: int = Group.Experimental) -> float:
    """Mean daily train trips, wave 2 minus wave 1, over households logging both waves."""
    per: dict[str, dict[int, float]] = {}
    for o in panel.observations:
        if o.group == group and o.train_trips is not None:
            per.setdefault(o.household_id, {})[o.wave] = o.train_trips
    both = [w for w in per.values() if 1 in w and 2 in w]
    if not both:
        return math.nan
    return math.fsum(w[2] - w[1] for w in both) / len(both)


def rail_countervailing_bound(panel: BalancedPanel, rail: ModeFactors) -> float:
    """Extra daily rail life-cycle CO2 implied by the experimental group's added train trips."""
    return rail_trip_change(panel, Group.Experimental) * rail.per_trip_lifecycle
