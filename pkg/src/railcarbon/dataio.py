"""CSV readers and writers for survey, factor-table and station files.

Every file is UTF-8, comma-separated, with a header row carrying exactly the
column names below. Blank fields mean "missing".
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Mapping

from .errors import DanglingReference, DuplicateKey, InputError, MalformedRow, NegativeRate
from .records import (
    BODIES,
    FUELS,
    VEHICLE_CLASSES,
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

log = logging.getLogger(__name__)

COLUMNS: dict[str, tuple[str, ...]] = {
    "households": ("household_id", "wave", "home_lat", "home_lon", "size_12plus", "income_bracket"),
    "vehicles": (
        "household_id", "wave", "vehicle_id", "make", "model",
        "model_year", "fuel", "body", "curb_weight_lb",
    ),
    "odometer": ("household_id", "wave", "vehicle_id", "day_index", "reading_miles"),
    "trips": ("household_id", "wave", "day_index", "car_trips", "bus_trips", "train_trips"),
    "factors_gasoline": ("calendar_year", "vehicle_class", "model_year", "run_g_per_mile", "start_g_per_day"),
    "factors_electrified": ("make", "model", "model_year", "combined_g_per_mile"),
    "stations": ("station_id", "lat", "lon"),
}

SURVEY_FILES = ("households", "vehicles", "odometer", "trips")
THRESHOLD_KEY = "ldt_split_threshold_lb"
MIN_MODEL_YEAR = 1950


@dataclass
class FileCounts:
    read: int = 0
    parsed: int = 0
    rejected: int = 0


@dataclass
class LoadReport:
    """Row bookkeeping for one load: read = parsed + rejected, per file."""

    counts: dict[str, FileCounts] = field(default_factory=dict)
    errors: list[InputError] = field(default_factory=list)


def _resolve(source: str | Path | Mapping[str, str | Path], names: tuple[str, ...]) -> dict[str, Path]:
    if isinstance(source, Mapping):
        missing = [n for n in names if n not in source]
        if missing:
            raise FileNotFoundError(f"no path given for {', '.join(missing)}")
        return {n: Path(source[n]) for n in names}
    base = Path(source)
    return {n: base / f"{n}.csv" for n in names}


def _rows(path: Path, kind: str) -> Iterator[tuple[int, dict[str, str]]]:
    """Yield (line number, row) pairs, skipping leading ``#`` comment lines."""
    expected = COLUMNS[kind]
    with open(path, newline="", encoding="utf-8") as fh:
        lines = iter(enumerate(fh, start=1))
        header_line = None
        for lineno, text in lines:
            if text.lstrip().startswith("#") or not text.strip():
                continue
            header_line = (lineno, text)
            break
        if header_line is None:
            return
        header = next(csv.reader([header_line[1]]))
        header = [h.strip() for h in header]
        if tuple(header) != expected:
            raise MalformedRow(str(path), header_line[0], f"header must be {','.join(expected)}, got {','.join(header)}")
        for lineno, text in lines:
            if not text.strip():
                continue
            values = next(csv.reader([text]))
            if len(values) != len(expected):
                raise MalformedRow(str(path), lineno, f"expected {len(expected)} fields, got {len(values)}")
            yield lineno, {k: v.strip() for k, v in zip(expected, values)}


def _header_comments(path: Path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for text in fh:
            s = text.strip()
            if not s:
                continue
            if not s.startswith("#"):
                break
            body = s.lstrip("#").strip()
            if "=" in body:
                k, v = body.split("=", 1)
                out[k.strip()] = v.strip()
    return out


class _Field:
    """Typed field parsing bound to one file/line so errors carry location."""

    def __init__(self, file: str, line: int, row: dict[str, str]):
        self.file, self.line, self.row = file, line, row

    def fail(self, reason: str) -> MalformedRow:
        return MalformedRow(self.file, self.line, reason)

    def text(self, name: str, required: bool = True) -> str | None:
        v = self.row[name]
        if not v:
            if required:
                raise self.fail(f"{name} is required")
            return None
        return v

    def integer(self, name: str, required: bool = True, lo: int | None = None, hi: int | None = None) -> int | None:
        v = self.text(name, required)
        if v is None:
            return None
        try:
            out = int(v)
        except ValueError:
            raise self.fail(f"{name}={v!r} is not an integer") from None
        if (lo is not None and out < lo) or (hi is not None and out > hi):
            raise self.fail(f"{name}={out} outside [{lo}, {hi}]")
        return out

    def real(self, name: str, required: bool = True, lo: float | None = None, hi: float | None = None) -> float | None:
        v = self.text(name, required)
        if v is None:
            return None
        try:
            out = float(v)
        except ValueError:
            raise self.fail(f"{name}={v!r} is not a number") from None
        if not math.isfinite(out):
            raise self.fail(f"{name}={v!r} is not finite")
        if (lo is not None and out < lo) or (hi is not None and out > hi):
            raise self.fail(f"{name}={out} outside [{lo}, {hi}]")
        return out

    def choice(self, name: str, options: tuple[str, ...]) -> str | None:
        v = self.text(name, required=False)
        if v is None:
            return None
        v = v.lower()
        if v not in options:
            raise self.fail(f"{name}={v!r} not one of {', '.join(options)}")
        return v


def _parse_household(f: _Field, days: int, years: Mapping[int, int] | None) -> HouseholdRecord:
    return HouseholdRecord(
        household_id=f.text("household_id"),
        wave=f.integer("wave", lo=1, hi=2),
        home_lat=f.real("home_lat", lo=-90.0, hi=90.0),
        home_lon=f.real("home_lon", lo=-180.0, hi=180.0),
        size_12plus=f.integer("size_12plus", lo=1),
        income_bracket=f.integer("income_bracket", required=False, lo=1, hi=6),
    )


def _parse_vehicle(f: _Field, days: int, years: Mapping[int, int] | None) -> VehicleRecord:
    wave = f.integer("wave", lo=1, hi=2)
    hi = years[wave] + 1 if years else None
    weight = f.real("curb_weight_lb", required=False)
    if weight is not None and weight <= 0:
        raise f.fail(f"curb_weight_lb={weight} must be positive")
    return VehicleRecord(
        household_id=f.text("household_id"),
        wave=wave,
        vehicle_id=f.text("vehicle_id"),
        make=f.text("make", required=False),
        model=f.text("model", required=False),
        model_year=f.integer("model_year", required=False, lo=MIN_MODEL_YEAR, hi=hi),
        fuel=f.choice("fuel", FUELS),
        body=f.choice("body", BODIES),
        curb_weight_lb=weight,
    )


def _parse_odometer(f: _Field, days: int, years: Mapping[int, int] | None) -> OdometerReading:
    return OdometerReading(
        household_id=f.text("household_id"),
        wave=f.integer("wave", lo=1, hi=2),
        vehicle_id=f.text("vehicle_id"),
        day_index=f.integer("day_index", lo=1, hi=days),
        reading_miles=f.real("reading_miles", lo=0.0),
    )


def _parse_trips(f: _Field, days: int, years: Mapping[int, int] | None) -> TripDayRecord:
    return TripDayRecord(
        household_id=f.text("household_id"),
        wave=f.integer("wave", lo=1, hi=2),
        day_index=f.integer("day_index", lo=1, hi=days),
        car_trips=f.integer("car_trips", lo=0),
        bus_trips=f.integer("bus_trips", lo=0),
        train_trips=f.integer("train_trips", lo=0),
    )


_PARSERS: dict[str, tuple[Callable, Callable]] = {
    "households": (_parse_household, lambda r: (r.household_id, r.wave)),
    "vehicles": (_parse_vehicle, lambda r: (r.household_id, r.wave, r.vehicle_id)),
    "odometer": (_parse_odometer, lambda r: (r.household_id, r.wave, r.vehicle_id, r.day_index)),
    "trips": (_parse_trips, lambda r: (r.household_id, r.wave, r.day_index)),
}


def load_survey_with_report(
    source: str | Path | Mapping[str, str | Path],
    *,
    calendar_years: Mapping[int, int] | None = None,
    survey_days: int = 7,
    errors: str = "raise",
) -> tuple[RawSurvey, LoadReport]:
    """Load and cross-reference the four survey files.

    With ``errors="collect"`` bad rows are rejected and recorded in the
    report instead of raising; nothing is dropped without a record.
    """
    if errors not in ("raise", "collect"):
        raise ValueError("errors must be 'raise' or 'collect'")
    paths = _resolve(source, SURVEY_FILES)
    report = LoadReport()
    tables: dict[str, list] = {}
    keys_seen: dict[str, set] = {}

    def reject(err: InputError, counts: FileCounts):
        if errors == "raise":
            raise err
        counts.rejected += 1
        report.errors.append(err)

    for kind in SURVEY_FILES:
        parse, key_of = _PARSERS[kind]
        counts = report.counts.setdefault(kind, FileCounts())
        rows: list = []
        seen: dict = {}
        path = paths[kind]
        for lineno, raw in _rows(path, kind):
            counts.read += 1
            try:
                rec = parse(_Field(str(path), lineno, raw), survey_days, calendar_years)
            except MalformedRow as err:
                reject(err, counts)
                continue
            key = key_of(rec)
            if key in seen:
                reject(DuplicateKey(str(path), lineno, f"duplicate key {key}, first seen on line {seen[key][0]}"), counts)
                continue
            parent = None
            if kind in ("vehicles", "trips", "odometer"):
                parent = key[:2]
                if parent not in keys_seen["households"]:
                    reject(DanglingReference(str(path), lineno, f"no household {parent[0]!r} in wave {parent[1]}"), counts)
                    continue
            if kind == "odometer" and key[:3] not in keys_seen["vehicles"]:
                reject(DanglingReference(str(path), lineno, f"no vehicle {key[2]!r} for household {key[0]!r} wave {key[1]}"), counts)
                continue
            seen[key] = (lineno, rec)
            rows.append(rec)
            counts.parsed += 1
        tables[kind] = rows
        keys_seen[kind] = set(seen)
        log.info("%s: %d read, %d parsed, %d rejected", path, counts.read, counts.parsed, counts.rejected)

    survey = RawSurvey(
        households=tuple(tables["households"]),
        vehicles=tuple(tables["vehicles"]),
        odometer=tuple(tables["odometer"]),
        trips=tuple(tables["trips"]),
    )
    return survey, report


def load_survey(source, *, calendar_years=None, survey_days: int = 7) -> RawSurvey:
    survey, _ = load_survey_with_report(source, calendar_years=calendar_years, survey_days=survey_days)
    return survey


def load_factor_tables(source: str | Path | Mapping[str, str | Path]) -> FactorTables:
    paths = _resolve(source, ("factors_gasoline", "factors_electrified"))
    gpath = paths["factors_gasoline"]
    gasoline: dict[tuple[int, str, int], GasolineFactor] = {}
    first_line: dict = {}
    for lineno, raw in _rows(gpath, "factors_gasoline"):
        f = _Field(str(gpath), lineno, raw)
        cls = f.text("vehicle_class").upper()
        if cls not in VEHICLE_CLASSES:
            raise f.fail(f"vehicle_class={cls!r} not one of {', '.join(VEHICLE_CLASSES)}")
        key = (f.integer("calendar_year"), cls, f.integer("model_year"))
        run, start = f.real("run_g_per_mile"), f.real("start_g_per_day")
        if run < 0 or start < 0:
            raise NegativeRate(str(gpath), lineno, f"negative rate for {key}")
        if key in gasoline:
            raise DuplicateKey(str(gpath), lineno, f"duplicate key {key}, first seen on line {first_line[key]}")
        gasoline[key] = GasolineFactor(run, start)
        first_line[key] = lineno

    threshold = None
    meta = _header_comments(gpath)
    if THRESHOLD_KEY in meta:
        try:
            threshold = float(meta[THRESHOLD_KEY])
        except ValueError:
            raise MalformedRow(str(gpath), 1, f"bad {THRESHOLD_KEY} value {meta[THRESHOLD_KEY]!r}") from None

    epath = paths["factors_electrified"]
    electrified: dict[tuple[str, str, int], ElectrifiedFactor] = {}
    first_line = {}
    for lineno, raw in _rows(epath, "factors_electrified"):
        f = _Field(str(epath), lineno, raw)
        key = (f.text("make"), f.text("model"), f.integer("model_year"))
        rate = f.real("combined_g_per_mile")
        if rate < 0:
            raise NegativeRate(str(epath), lineno, f"negative rate for {key}")
        if key in electrified:
            raise DuplicateKey(str(epath), lineno, f"duplicate key {key}, first seen on line {first_line[key]}")
        electrified[key] = ElectrifiedFactor(rate)
        first_line[key] = lineno

    return FactorTables(gasoline=gasoline, electrified=electrified, ldt_split_threshold_lb=threshold)


def load_stations(path: str | Path) -> StationSet:
    path = Path(path)
    stations: list[Station] = []
    seen: dict[str, int] = {}
    for lineno, raw in _rows(path, "stations"):
        f = _Field(str(path), lineno, raw)
        sid = f.text("station_id")
        if sid in seen:
            raise DuplicateKey(str(path), lineno, f"duplicate station {sid!r}, first seen on line {seen[sid]}")
        seen[sid] = lineno
        stations.append(Station(sid, f.real("lat", lo=-90.0, hi=90.0), f.real("lon", lo=-180.0, hi=180.0)))
    return StationSet(tuple(stations))


# -- writers -----------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _write(path: Path, kind: str, rows, comments: list[str] | None = None) -> None:
    cols = COLUMNS[kind]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for c in comments or ():
            fh.write(f"# {c}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            values = r if isinstance(r, tuple) else [getattr(r, c) for c in cols]
            w.writerow([_fmt(v) for v in values])


def write_survey(survey: RawSurvey, directory: str | Path) -> dict[str, Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for kind in SURVEY_FILES:
        paths[kind] = out / f"{kind}.csv"
        _write(paths[kind], kind, getattr(survey, kind))
    return paths


def write_factor_tables(factors: FactorTables, directory: str | Path) -> dict[str, Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    comments = []
    if factors.ldt_split_threshold_lb is not None:
        comments.append(f"{THRESHOLD_KEY}={_fmt(float(factors.ldt_split_threshold_lb))}")
    g = [(cy, cls, my, f.run_g_per_mile, f.start_g_per_day) for (cy, cls, my), f in factors.gasoline.items()]
    e = [(mk, md, my, f.combined_g_per_mile) for (mk, md, my), f in factors.electrified.items()]
    paths = {"factors_gasoline": out / "factors_gasoline.csv", "factors_electrified": out / "factors_electrified.csv"}
    _write(paths["factors_gasoline"], "factors_gasoline", g, comments)
    _write(paths["factors_electrified"], "factors_electrified", e)
    return paths


def write_stations(stations: StationSet, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    _write(path, "stations", [(s.station_id, s.lat, s.lon) for s in stations])
    return path
