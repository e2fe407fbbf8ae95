"""Run configuration: radius parsing and the dotted-key config file format.

A config file is plain text, one ``key = value`` per line, ``#`` starts a
comment::

    data.households = households.csv
    panel.catchment_radius = 0.5 mile
    did.covariates = veh_cnt, ppl_cnt, income_dummies

Relative ``data.*`` paths resolve against the config file's directory.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from .errors import ConfigError

MILES_PER_KM = 0.621371
# keys passed through untouched for the modules that own them
EXTRA_PREFIXES = ("sim.", "lifecycle.")

COVARIATES: tuple[str, ...] = ("veh_cnt", "ppl_cnt", "income_dummies")

DATA_KEYS: tuple[str, ...] = (
    "households",
    "vehicles",
    "odometer",
    "trips",
    "factors_gasoline",
    "factors_electrified",
    "stations",
    "lifecycle",
)

_UNITS = {"mi": "mile", "mile": "mile", "miles": "mile", "km": "km", "kilometer": "km", "kilometers": "km"}
_RADIUS_RE = re.compile(r"^\s*([0-9.]+(?:/[0-9.]+)?)\s*([A-Za-z]+)\s*$")


@dataclass(frozen=True)
class Radius:
    value: float
    unit: str = "mile"

    def __post_init__(self):
        if self.unit not in ("mile", "km"):
            raise ConfigError(f"unknown radius unit {self.unit!r}")
        if not self.value > 0:
            raise ConfigError(f"catchment radius must be positive, got {self.value}")

    @property
    def miles(self) -> float:
        return self.value * MILES_PER_KM if self.unit == "km" else self.value

    def __str__(self) -> str:
        short = "mi" if self.unit == "mile" else "km"
        return f"{self.value:g}{short}"


def parse_radius(text: str) -> Radius:
    """Parse ``0.5mi``, ``1 km``, ``3/4 mile`` and similar."""
    m = _RADIUS_RE.match(text)
    if not m or m.group(2).lower() not in _UNITS:
        raise ConfigError(f"cannot parse radius {text!r}; expected <number><mi|km>")
    try:
        value = float(Fraction(m.group(1)))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse radius {text!r}") from exc
    return Radius(value, _UNITS[m.group(2).lower()])


def parse_radii(text: str) -> list[Radius]:
    return [parse_radius(part) for part in text.split(",") if part.strip()]


@dataclass(frozen=True)
class RunConfig:
    catchment_radius: Radius = Radius(0.5, "mile")
    outlier_vmt_per_day: float = 200.0
    min_odometer_readings: int = 3
    ttest_variant: str = "welch"
    covariates: tuple[str, ...] = COVARIATES
    survey_days: int = 7
    seed: int = 0
    calendar_years: Mapping[int, int] = field(default_factory=lambda: {1: 2011, 2: 2012})
    data: Mapping[str, Path] = field(default_factory=dict)
    extra: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.outlier_vmt_per_day > 0:
            raise ConfigError("panel.outlier_vmt_per_day must be positive")
        if self.min_odometer_readings < 2:
            raise ConfigError("panel.min_odometer_readings must be at least 2")
        if self.ttest_variant not in ("welch", "pooled"):
            raise ConfigError(f"stats.ttest must be welch or pooled, got {self.ttest_variant!r}")
        unknown = set(self.covariates) - set(COVARIATES)
        if unknown:
            raise ConfigError(f"unknown covariates: {sorted(unknown)}")
        if set(self.calendar_years) != {1, 2}:
            raise ConfigError("calendar years must be given for waves 1 and 2")

    def with_overrides(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    @classmethod
    def from_mapping(cls, values: Mapping[str, str], base_dir: Path | None = None) -> "RunConfig":
        base = Path(base_dir) if base_dir is not None else Path(".")
        kwargs: dict = {}
        data: dict[str, Path] = {}
        extra: dict[str, str] = {}
        years = {1: 2011, 2: 2012}
        for key, raw in values.items():
            try:
                if key.startswith("data."):
                    name = key[5:]
                    if name not in DATA_KEYS:
                        raise ConfigError(f"unknown data file key {key!r}")
                    p = Path(raw)
                    data[name] = p if p.is_absolute() else base / p
                elif key == "panel.catchment_radius":
                    kwargs["catchment_radius"] = parse_radius(raw)
                elif key == "panel.outlier_vmt_per_day":
                    kwargs["outlier_vmt_per_day"] = float(raw)
                elif key == "panel.min_odometer_readings":
                    kwargs["min_odometer_readings"] = int(raw)
                elif key == "stats.ttest":
                    kwargs["ttest_variant"] = raw.strip().lower()
                elif key == "did.covariates":
                    items = [c.strip() for c in raw.split(",") if c.strip()]
                    kwargs["covariates"] = () if items in ([], ["none"]) else tuple(items)
                elif key == "survey.days":
                    kwargs["survey_days"] = int(raw)
                elif key == "survey.wave1_year":
                    years[1] = int(raw)
                elif key == "survey.wave2_year":
                    years[2] = int(raw)
                elif key == "run.seed":
                    kwargs["seed"] = int(raw)
                elif key.startswith(EXTRA_PREFIXES):
                    extra[key] = raw
                else:
                    raise ConfigError(f"unknown config key {key!r}")
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        return cls(calendar_years=years, data=data, extra=extra, **kwargs)

    def to_mapping(self) -> dict[str, str]:
        """Flatten back to dotted keys (paths as given, not resolved)."""
        out = {
            "panel.catchment_radius": f"{self.catchment_radius.value:g} {self.catchment_radius.unit}",
            "panel.outlier_vmt_per_day": f"{self.outlier_vmt_per_day:g}",
            "panel.min_odometer_readings": str(self.min_odometer_readings),
            "stats.ttest": self.ttest_variant,
            "did.covariates": ", ".join(self.covariates) or "none",
            "survey.days": str(self.survey_days),
            "survey.wave1_year": str(self.calendar_years[1]),
            "survey.wave2_year": str(self.calendar_years[2]),
            "run.seed": str(self.seed),
        }
        out.update({f"data.{k}": str(v) for k, v in sorted(self.data.items())})
        out.update(dict(sorted(self.extra.items())))
        return out


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return RunConfig.from_mapping(parse_config_text(text, str(path)), base_dir=path.parent)
