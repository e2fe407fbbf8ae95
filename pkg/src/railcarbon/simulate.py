"""Synthetic survey generation and Monte Carlo estimator-recovery runs.

The generator works backwards from emissions: each household-wave gets a
target daily CO2 equal to its group-by-wave cell mean plus mean-zero noise,
and that target is split over the household's vehicles and converted into a
seven-day odometer series through the vehicle's emission factors. Running
the ordinary pipeline on the output therefore recovers known cell means and
a known treatment effect.

Cell means follow a parallel-trends construction::

    control,      wave 1: mu00
    experimental, wave 1: mu10
    control,      wave 2: mu01            (secular change d = mu01 - mu00)
    experimental, wave 2: mu10 + d + tau
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Mapping, Sequence

import numpy as np

from .config import RunConfig
from .emissions import equivalent_test_weight
from .errors import ConfigError, InfeasibleTarget, RailCarbonError
from .evaluate import MODEL_LADDER, did_fit
from .panel import EARTH_RADIUS_MI, build_balanced_panel
from .records import (
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
from .stats import t_critical

# observed income-bracket counts (brackets 1-6) over the 312 households reporting one
_INCOME_COUNTS = (42, 77, 71, 48, 35, 39)

CLASS_RUN_MULTIPLIER = {"LDA": 1.0, "LDT1": 1.2, "LDT2": 1.45, "MCY": 0.45}
CLASS_START_MULTIPLIER = {"LDA": 1.0, "LDT1": 1.15, "LDT2": 1.3, "MCY": 0.3}
ELECTRIFIED_MODELS = (("Synthmotor", "Hybrid A"), ("Synthmotor", "Hybrid B"), ("Voltworks", "EV One"))

# cap on the gamma shape; beyond this the noise is indistinguishable from normal
_MAX_GAMMA_SHAPE = 400.0


@dataclass(frozen=True)
class SimConfig:
    households_per_cell: int = 80
    cell_means: tuple[float, float, float] = (9992.7, 9371.1, 10815.9)
    tau: float = -2316.8
    noise_sd: float = 8698.3
    vehicle_count_probs: tuple[float, float, float, float] = (0.0, 0.86, 0.12, 0.02)
    income_probs: tuple[float, ...] = tuple(c / sum(_INCOME_COUNTS) for c in _INCOME_COUNTS)
    missing_income_prob: float = 0.025
    size_probs: tuple[float, ...] = (0.55, 0.30, 0.10, 0.04, 0.01)
    truck_prob: float = 0.30
    motorcycle_prob: float = 0.02
    electrified_prob: float = 0.04
    run_g_per_mile: float = 380.0
    start_g_per_day: float = 250.0
    electrified_g_per_mile: float = 210.0
    ldt_split_threshold_lb: float = 3750.0
    model_years: tuple[int, int] = (1995, 2011)
    calendar_years: tuple[int, int] = (2011, 2012)
    station: tuple[float, float] = (34.0283, -118.3884)
    experimental_distance: tuple[float, float] = (0.05, 0.45)
    control_distance: tuple[float, float] = (0.6, 3.0)
    car_trips: float = 4.5
    bus_trips: tuple[float, float, float, float] = (0.50, 0.42, 0.57, 0.38)
    train_trips: tuple[float, float, float, float] = (0.05, 0.02, 0.11, 0.17)
    trip_logs: bool = True
    seed: int = 2011

    def __post_init__(self):
        for name in ("vehicle_count_probs", "income_probs", "size_probs"):
            probs = getattr(self, name)
            if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-9:
                raise ConfigError(f"{name} must be non-negative and sum to 1")
        if len(self.vehicle_count_probs) != 4 or len(self.income_probs) != 6:
            raise ConfigError("vehicle_count_probs needs 4 entries (0-3), income_probs 6 (brackets 1-6)")
        if self.noise_sd < 0:
            raise ConfigError("noise_sd must be non-negative")
        if self.households_per_cell < 2:
            raise ConfigError("households_per_cell must be at least 2")
        for name in ("missing_income_prob", "truck_prob", "motorcycle_prob", "electrified_prob"):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f"{name} must be a probability")
        if self.truck_prob + self.motorcycle_prob > 1:
            raise ConfigError("truck_prob + motorcycle_prob exceeds 1")
        if self.experimental_distance[1] >= self.control_distance[0]:
            raise ConfigError("experimental and control distance bands overlap")

    @classmethod
    def from_cell_means(cls, mu00: float, mu10: float, mu01: float, mu11: float, **kw) -> "SimConfig":
        """Configure from four target cell means; tau is implied."""
        tau = (mu11 - mu10) - (mu01 - mu00)
        return cls(cell_means=(mu00, mu10, mu01), tau=tau, **kw)

    @property
    def target_means(self) -> dict[tuple[int, int], float]:
        """Expected daily CO2 keyed by (group, wave)."""
        mu00, mu10, mu01 = self.cell_means
        return {(0, 1): mu00, (1, 1): mu10, (0, 2): mu01, (1, 2): mu10 + (mu01 - mu00) + self.tau}

    @classmethod
    def from_mapping(cls, values: Mapping[str, str]) -> "SimConfig":
        """Read ``sim.*`` keys; list-valued fields are comma-separated."""
        kinds = {f.name: f for f in fields(cls)}
        kw: dict = {}
        for key, raw in values.items():
            if not key.startswith("sim."):
                continue
            name = key[4:]
            if name not in kinds:
                raise ConfigError(f"unknown simulation key {key!r}")
            default = getattr(cls, name, None)
            try:
                if isinstance(default, bool):
                    kw[name] = raw.strip().lower() in ("1", "true", "yes", "on")
                elif isinstance(default, tuple):
                    parts = [p.strip() for p in raw.split(",") if p.strip()]
                    cast = int if all(isinstance(x, int) for x in default) else float
                    kw[name] = tuple(cast(p) for p in parts)
                elif isinstance(default, int):
                    kw[name] = int(raw)
                else:
                    kw[name] = float(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        if "seed" not in kw and "run.seed" in values:
            kw["seed"] = int(values["run.seed"])
        return cls(**kw)

    def run_config(self, **overrides) -> RunConfig:
        """A pipeline config consistent with the generated files."""
        base = RunConfig(calendar_years={1: self.calendar_years[0], 2: self.calendar_years[1]}, seed=self.seed)
        return base.with_overrides(**overrides) if overrides else base


@dataclass(frozen=True)
class SyntheticData:
    survey: RawSurvey
    factors: FactorTables
    stations: StationSet
    targets: Mapping[tuple[str, int], float]
    groups: Mapping[str, int]
    config: SimConfig


def synthetic_factor_tables(cfg: SimConfig) -> FactorTables:
    """Deterministic factor tables covering every class and model year the generator draws."""
    gasoline: dict[tuple[int, str, int], GasolineFactor] = {}
    lo, hi = cfg.model_years
    for cy in cfg.calendar_years:
        for cls in VEHICLE_CLASSES:
            for my in range(lo, hi + 1):
                age = max(0, cy - my)
                gasoline[(cy, cls, my)] = GasolineFactor(
                    run_g_per_mile=round(cfg.run_g_per_mile * CLASS_RUN_MULTIPLIER[cls] * (1 + 0.006 * (age - 8)), 3),
                    start_g_per_day=round(cfg.start_g_per_day * CLASS_START_MULTIPLIER[cls] * (1 + 0.01 * (age - 8)), 3),
                )
    electrified: dict[tuple[str, str, int], ElectrifiedFactor] = {}
    for i, (make, model) in enumerate(ELECTRIFIED_MODELS):
        for my in range(max(lo, 2000), hi + 1):
            electrified[(make, model, my)] = ElectrifiedFactor(round(cfg.electrified_g_per_mile * (0.6 + 0.3 * i), 3))
    return FactorTables(gasoline, electrified, cfg.ldt_split_threshold_lb)


def _destination(lat: float, lon: float, distance_mi: float, bearing: float) -> tuple[float, float]:
    d = distance_mi / EARTH_RADIUS_MI
    p1, l1 = math.radians(lat), math.radians(lon)
    p2 = math.asin(math.sin(p1) * math.cos(d) + math.cos(p1) * math.sin(d) * math.cos(bearing))
    l2 = l1 + math.atan2(math.sin(bearing) * math.sin(d) * math.cos(p1), math.cos(d) - math.sin(p1) * math.sin(p2))
    return math.degrees(p2), (math.degrees(l2) + 540.0) % 360.0 - 180.0


def _vehicle_class(body: str, curb_weight_lb: float | None, threshold: float) -> str:
    if body == "auto":
        return "LDA"
    if body == "motorcycle":
        return "MCY"
    return "LDT1" if equivalent_test_weight(curb_weight_lb) <= threshold else "LDT2"


def _draw_fleet(rng: np.random.Generator, cfg: SimConfig, counts: np.ndarray, ids: list[str]) -> list[list[dict]]:
    """Vehicle templates per household; each vehicle is kept across both waves."""
    m = int(counts.sum())
    lo, hi = cfg.model_years
    elec = rng.random(m) < cfg.electrified_prob
    which = rng.integers(len(ELECTRIFIED_MODELS), size=m)
    elec_year = rng.integers(max(lo, 2000), hi + 1, size=m)
    u = rng.random(m)
    gas_year = rng.integers(lo, hi + 1, size=m)
    weight = np.round(rng.uniform(3000.0, 5500.0, size=m))
    fleets: list[list[dict]] = []
    v = 0
    for hid, k in zip(ids, counts.tolist()):
        fleet = []
        for j in range(1, k + 1):
            if elec[v]:
                make, model = ELECTRIFIED_MODELS[which[v]]
                fleet.append(dict(vehicle_id=f"{hid}-V{j}", make=make, model=model, model_year=int(elec_year[v]),
                                  fuel="hybrid" if "Hybrid" in model else "electric", body="auto",
                                  curb_weight_lb=None))
            else:
                body = ("truck" if u[v] < cfg.truck_prob
                        else "motorcycle" if u[v] < cfg.truck_prob + cfg.motorcycle_prob else "auto")
                fleet.append(dict(vehicle_id=f"{hid}-V{j}", make="Genericar", model=f"{body.title()} {j}",
                                  model_year=int(gas_year[v]), fuel="gasoline", body=body,
                                  curb_weight_lb=float(weight[v]) if body == "truck" else None))
            v += 1
        fleets.append(fleet)
    return fleets


def _rates(tpl: dict, cy: int, factors: FactorTables) -> tuple[float, float]:
    """(run g/mi, start g/day) for a vehicle template in a calendar year."""
    if tpl["fuel"] != "gasoline":
        return factors.find_electrified(tpl["make"], tpl["model"], tpl["model_year"]).combined_g_per_mile, 0.0
    cls = _vehicle_class(tpl["body"], tpl["curb_weight_lb"], factors.ldt_split_threshold_lb)
    f = factors.gasoline[(cy, cls, tpl["model_year"])]
    return f.run_g_per_mile, f.start_g_per_day


def generate_panel(cfg: SimConfig, seed: int | np.random.SeedSequence | None = None) -> SyntheticData:
    """Generate a synthetic two-wave survey with known cell means.

    With ``noise_sd = 0`` every cell's realized mean household emission
    equals its configured mean up to rounding. The same (cfg, seed) always
    yields identical records.

    Noise is a shifted gamma variate with mean zero and variance
    ``noise_sd**2`` whose shape is chosen per household so the target never
    drops below the household's summed start emissions.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(cfg.seed if seed is None else seed)
    rng = np.random.default_rng(ss)
    factors = synthetic_factor_tables(cfg)
    station = Station("S1", *cfg.station)
    n = cfg.households_per_cell
    means = cfg.target_means

    group_of = np.repeat([1, 0], n)
    ids = [f"{'E' if g else 'C'}{i % n + 1:04d}" for i, g in enumerate(group_of.tolist())]
    h = len(ids)
    counts = rng.choice(4, size=h, p=cfg.vehicle_count_probs)
    fleets = _draw_fleet(rng, cfg, counts, ids)
    lo_e, hi_e = cfg.experimental_distance
    lo_c, hi_c = cfg.control_distance
    u = rng.random(h)
    dist = np.where(group_of == 1, lo_e + u * (hi_e - lo_e), lo_c + u * (hi_c - lo_c))
    bearing = rng.uniform(0.0, 2 * math.pi, size=h)
    sizes = rng.choice(len(cfg.size_probs), size=h, p=cfg.size_probs) + 1
    homes = [_destination(station.lat, station.lon, d, b) for d, b in zip(dist.tolist(), bearing.tolist())]

    # per (household, wave): target emission, start floor, vehicle rates
    targets: dict[tuple[str, int], float] = {}
    rates: dict[tuple[int, int], list[tuple[float, float]]] = {}
    levels = np.zeros((h, 2))
    floors = np.zeros((h, 2))
    for w, cy in enumerate(cfg.calendar_years):
        for group in (0, 1):
            members = np.flatnonzero(group_of == group)
            driving = [i for i in members.tolist() if fleets[i]]
            mean = means[(group, w + 1)]
            if not driving:
                if mean != 0:
                    raise InfeasibleTarget(f"cell ({group}, {w + 1}) has no vehicles but a non-zero mean")
                continue
            # zero-vehicle households emit nothing, so the rest of the cell carries its mean
            level = mean * len(members) / len(driving)
            for i in driving:
                r = [_rates(t, cy, factors) for t in fleets[i]]
                rates[(i, w)] = r
                floor = math.fsum(s for _, s in r)
                if level <= floor:
                    raise InfeasibleTarget(f"household {ids[i]} wave {w + 1}: target {level:.1f} g/day "
                                           f"does not exceed start emissions {floor:.1f}")
                levels[i, w], floors[i, w] = level, floor

    active = levels > 0
    if cfg.noise_sd > 0:
        shape = np.minimum(_MAX_GAMMA_SHAPE, ((levels - floors) / cfg.noise_sd) ** 2)
        shape = np.where(active, shape, 1.0)
        noise = cfg.noise_sd * (rng.gamma(shape) - shape) / np.sqrt(shape)
    else:
        noise = np.zeros((h, 2))
    target = np.where(active, levels + noise, 0.0)

    income_missing = rng.random((h, 2)) < cfg.missing_income_prob
    income = rng.choice(6, size=(h, 2), p=cfg.income_probs) + 1
    m = int(counts.sum())
    shares = [rng.dirichlet(np.ones(k)) if k > 1 else np.ones(k) for k in counts.tolist() for _ in (1, 2)]
    starts = np.round(rng.uniform(5_000.0, 150_000.0, size=(2, m)), 1)
    steps = np.cumsum(rng.dirichlet(np.ones(6), size=(2, m)), axis=2)
    if cfg.trip_logs:
        cells = (group_of[:, None] * 2 + np.arange(2)[None, :])
        car_rate = np.where(counts > 0, cfg.car_trips, 0.2 * cfg.car_trips)[:, None] * np.ones((1, 2))
        car = rng.poisson(car_rate[..., None] * np.ones(7))
        bus = rng.poisson(np.asarray(cfg.bus_trips)[cells][..., None] * np.ones(7))
        train = rng.poisson(np.asarray(cfg.train_trips)[cells][..., None] * np.ones(7))

    households, vehicles, odometer, trips = [], [], [], []
    v0 = 0
    for i, hid in enumerate(ids):
        lat, lon = homes[i]
        fleet = fleets[i]
        for w in range(2):
            wave = w + 1
            inc = None if income_missing[i, w] else int(income[i, w])
            households.append(HouseholdRecord(hid, wave, lat, lon, int(sizes[i]), inc))
            targets[(hid, wave)] = float(target[i, w])
            if fleet:
                running = float(target[i, w] - floors[i, w])
                share = shares[2 * i + w]
                for j, (tpl, (run, _)) in enumerate(zip(fleet, rates[(i, w)])):
                    vehicles.append(VehicleRecord(hid, wave, **tpl))
                    total = 6.0 * float(share[j]) * running / run
                    s0 = float(starts[w, v0 + j])
                    mid = [min(s0 + x * total, s0 + total) for x in steps[w, v0 + j, :5].tolist()]
                    vid = tpl["vehicle_id"]
                    odometer.extend(OdometerReading(hid, wave, vid, d + 1, r)
                                    for d, r in enumerate([s0, *mid, s0 + total]))
            if cfg.trip_logs:
                c, b, t = car[i, w].tolist(), bus[i, w].tolist(), train[i, w].tolist()
                trips.extend(TripDayRecord(hid, wave, d + 1, c[d], b[d], t[d]) for d in range(7))
        v0 += len(fleet)

    survey = RawSurvey(tuple(households), tuple(vehicles), tuple(odometer), tuple(trips))
    groups = {hid: int(g) for hid, g in zip(ids, group_of.tolist())}
    return SyntheticData(survey, factors, StationSet((station,)), targets, groups, cfg)


# -- Monte Carlo -------------------------------------------------------------


@dataclass(frozen=True)
class RecoveryReport:
    replications: int
    tau: float
    mean_estimate: float
    bias: float
    rmse: float
    empirical_sd: float
    mean_se: float
    coverage: float
    rejection_rate: float
    alpha: float
    mean_n: float
    failures: int
    estimates: tuple[float, ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "estimates"}
        return d


def replication_seeds(master: int, replications: int) -> list[np.random.SeedSequence]:
    """Counter-based child seeds: replication i always gets spawn key (i,)."""
    return [np.random.SeedSequence(master, spawn_key=(i,)) for i in range(replications)]


def run_replication(cfg: SimConfig, seed: np.random.SeedSequence, spec: Sequence[str],
                    run_cfg: RunConfig | None = None) -> tuple[float, float, int, int]:
    """Generate, screen and fit once; returns (estimate, se, df, n).

    Trip logs are skipped: they are drawn last, so every other record is
    unchanged, and the emission fit never reads them.
    """
    data = generate_panel(replace(cfg, trip_logs=False), seed)
    panel = build_balanced_panel(data.survey, data.factors, data.stations, run_cfg or cfg.run_config())
    fit = did_fit(panel, spec)
    return fit.treatment_effect, fit.ols.se("wvexp"), fit.ols.df_resid, fit.n_used


def recovery_experiment(cfg: SimConfig, replications: int, spec: Sequence[str] = MODEL_LADDER[4],
                        alpha: float = 0.05, run_cfg: RunConfig | None = None) -> RecoveryReport:
    """Repeat the full pipeline on fresh synthetic panels and score the DID estimate.

    Coverage counts replications whose (1 - alpha) t-interval contains the
    true effect; rejection rate counts p < alpha for a zero effect.
    """
    if replications < 2:
        raise ValueError("need at least two replications")
    results: list[tuple[float, float, int, int] | None] = []
    for seed in replication_seeds(cfg.seed, replications):
        try:
            results.append(run_replication(cfg, seed, spec, run_cfg))
        except RailCarbonError:
            results.append(None)
    ok = [r for r in results if r is not None]
    if len(ok) < 2:
        raise RailCarbonError(f"only {len(ok)} of {replications} replications produced a fit")

    est = np.array([r[0] for r in ok])
    se = np.array([r[1] for r in ok])
    tau = cfg.tau
    tol = 1e-9 * max(1.0, abs(tau))
    crit = {df: t_critical(alpha, df) for df in {r[2] for r in ok}}
    covered = [abs(b - tau) <= crit[df] * s + tol for b, s, df, _ in ok]
    rejected = [abs(b) > crit[df] * s + tol for b, s, df, _ in ok]
    err = est - tau
    return RecoveryReport(
        replications=replications,
        tau=tau,
        mean_estimate=float(math.fsum(est) / est.size),
        bias=float(math.fsum(err) / err.size),
        rmse=float(math.sqrt(math.fsum(err ** 2) / err.size)),
        empirical_sd=float(np.std(est, ddof=1)),
        mean_se=float(math.fsum(se) / se.size),
        coverage=sum(covered) / len(ok),
        rejection_rate=sum(rejected) / len(ok),
        alpha=alpha,
        mean_n=float(np.mean([r[3] for r in ok])),
        failures=replications - len(ok),
        estimates=tuple(float(x) for x in est),
    )


def with_seed(cfg: SimConfig, seed: int) -> SimConfig:
    return replace(cfg, seed=seed)
