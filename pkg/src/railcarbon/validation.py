"""Non-throwing dataset checks run before panel construction."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .panel import is_monotone
from .records import WAVES, FactorTables, RawSurvey, StationSet

FATAL = "fatal"
WARNING = "warning"


@dataclass(frozen=True)
class Issue:
    category: str
    severity: str
    household_id: str | None = None
    wave: int | None = None
    vehicle_id: str | None = None
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...] = ()
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def fatal(self) -> tuple[Issue, ...]:
        return tuple(i for i in self.issues if i.severity == FATAL)

    @property
    def ok(self) -> bool:
        return not self.fatal

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "counts": dict(self.counts),
            "issues": [i.__dict__ for i in self.issues],
        }


def validate_dataset(survey: RawSurvey, factors: FactorTables, stations: StationSet,
                     min_readings: int = 3) -> ValidationReport:
    """Collect data-quality issues without modifying or rejecting anything.

    Fatal issues (no households, a wave with no households, no stations,
    trucks present but no LDT split threshold) stop the pipeline; the rest
    are informational and are resolved later by panel screening.
    """
    issues: list[Issue] = []

    if not survey.households:
        issues.append(Issue("NoHouseholds", FATAL, detail="survey has no household rows"))
    for w in WAVES:
        if survey.households and not any(h.wave == w for h in survey.households):
            issues.append(Issue("MissingWave", FATAL, wave=w, detail=f"no households in wave {w}"))
    if not len(stations):
        issues.append(Issue("EmptyStationSet", FATAL, detail="no stations for distance-based grouping"))
    has_gas_truck = any(v.body == "truck" and v.fuel == "gasoline" for v in survey.vehicles)
    if has_gas_truck and factors.ldt_split_threshold_lb is None:
        issues.append(Issue("MissingLdtThreshold", FATAL,
                            detail="gasoline trucks present but factor file sets no ldt_split_threshold_lb"))

    for h in sorted(survey.households, key=lambda h: (h.household_id, h.wave)):
        if h.income_bracket is None:
            issues.append(Issue("MissingIncome", WARNING, h.household_id, h.wave))
        if (h.household_id, h.wave) not in survey.trips_by_household:
            issues.append(Issue("MissingTripLog", WARNING, h.household_id, h.wave))

    for v in sorted(survey.vehicles, key=lambda v: (v.household_id, v.wave, v.vehicle_id)):
        missing = [n for n in ("make", "model", "model_year", "fuel", "body") if getattr(v, n) is None]
        if v.body == "truck" and v.curb_weight_lb is None:
            missing.append("curb_weight_lb")
        if missing:
            issues.append(Issue("MissingVehicleInfo", WARNING, v.household_id, v.wave, v.vehicle_id,
                                "missing " + ", ".join(missing)))
        readings = survey.odometer_by_vehicle.get((v.household_id, v.wave, v.vehicle_id), [])
        if len(readings) < min_readings:
            issues.append(Issue("TooFewOdometerReadings", WARNING, v.household_id, v.wave, v.vehicle_id,
                                f"{len(readings)} readings"))
        if not is_monotone(readings):
            issues.append(Issue("UnreliableOdometer", WARNING, v.household_id, v.wave, v.vehicle_id,
                                "odometer decreases between days"))

    counts = dict(sorted(Counter(i.category for i in issues).items()))
    return ValidationReport(tuple(issues), counts)
