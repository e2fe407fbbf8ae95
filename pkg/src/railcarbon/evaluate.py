"""Difference-in-differences regressions, group contrasts and radius sweeps.

The regression is

    y = b0 + b1*experimental + b2*wave2 + b3*experimental*wave2 + Z'b4 + e

where the interaction coefficient b3 is the treatment effect. With no
covariates the model is saturated in the four group-by-wave cells, so b3
equals the four-mean difference-in-differences exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .config import COVARIATES, Radius
from .errors import AllRowsDropped, EmptyGroup
from .panel import BalancedPanel, Group, PanelObservation, metric_value
from .stats import OlsFit, TestResult, mean_sd, ols_fit, paired_t, two_sample_t

log = logging.getLogger(__name__)

CORE_TERMS = ("const", "experimental", "wave", "wvexp")
INCOME_BRACKETS = (2, 3, 4, 5, 6)
INCOME_LABELS = {
    1: "HH income less than $15,000/yr",
    2: "$15,001 - $35,000",
    3: "$35,001 - $55,000",
    4: "$55,001 - $75,000",
    5: "$75,001 - $100,000",
    6: "$100,001 or more",
}

MODEL_LADDER: dict[int, tuple[str, ...]] = {
    1: (),
    2: ("veh_cnt",),
    3: ("veh_cnt", "ppl_cnt"),
    4: ("veh_cnt", "ppl_cnt", "income_dummies"),
}


def covariate_spec(flags: Iterable[str]) -> tuple[str, ...]:
    """Normalize a covariate selection to the canonical column order."""
    chosen = set(flags)
    unknown = chosen - set(COVARIATES)
    if unknown:
        raise ValueError(f"unknown covariates: {sorted(unknown)}")
    return tuple(c for c in COVARIATES if c in chosen)


def column_names(spec: Sequence[str]) -> tuple[str, ...]:
    names = list(CORE_TERMS)
    for c in covariate_spec(spec):
        if c == "income_dummies":
            names.extend(f"income_{b}" for b in INCOME_BRACKETS)
        else:
            names.append(c)
    return tuple(names)


@dataclass(frozen=True)
class DesignMatrix:
    X: np.ndarray
    y: np.ndarray
    names: tuple[str, ...]
    rows: tuple[PanelObservation, ...]
    dropped: int


def did_design_matrix(observations: Sequence[PanelObservation] | BalancedPanel,
                      spec: Sequence[str] = (), outcome: str = "co2") -> DesignMatrix:
    obs = observations.observations if isinstance(observations, BalancedPanel) else tuple(observations)
    spec = covariate_spec(spec)
    if not obs:
        raise AllRowsDropped("empty panel")
    use_income = "income_dummies" in spec
    rows = tuple(o for o in obs if not (use_income and o.income_bracket is None)
                 and metric_value(o, outcome) is not None)
    dropped = len(obs) - len(rows)
    if dropped:
        log.info("dropped %d of %d rows with missing covariates or outcome", dropped, len(obs))
    if not rows:
        raise AllRowsDropped(f"all {len(obs)} rows dropped for missing data")

    names = column_names(spec)
    X = np.empty((len(rows), len(names)))
    for i, o in enumerate(rows):
        x, t = float(o.group), float(o.period)
        vals = [1.0, x, t, x * t]
        for c in spec:
            if c == "veh_cnt":
                vals.append(float(o.veh_cnt))
            elif c == "ppl_cnt":
                vals.append(float(o.ppl_cnt))
            else:
                vals.extend(1.0 if o.income_bracket == b else 0.0 for b in INCOME_BRACKETS)
        X[i] = vals
    y = np.array([metric_value(o, outcome) for o in rows], dtype=float)
    return DesignMatrix(X, y, names, rows, dropped)


@dataclass(frozen=True)
class DidFit:
    ols: OlsFit
    spec: tuple[str, ...]
    cell_means: dict[str, float]
    cell_counts: dict[str, int]
    n_used: int
    n_dropped: int

    @property
    def group_effect(self) -> float:
        return self.ols.coef("experimental")

    @property
    def wave_effect(self) -> float:
        return self.ols.coef("wave")

    @property
    def treatment_effect(self) -> float:
        return self.ols.coef("wvexp")

    @property
    def four_mean_did(self) -> float:
        m = self.cell_means
        return (m["mu11"] - m["mu10"]) - (m["mu01"] - m["mu00"])

    @property
    def n_experimental(self) -> int:
        return self.cell_counts["mu10"] + self.cell_counts["mu11"]

    @property
    def n_control(self) -> int:
        return self.cell_counts["mu00"] + self.cell_counts["mu01"]


def _cells(rows: Sequence[PanelObservation], y: np.ndarray) -> tuple[dict[str, float], dict[str, int]]:
    means, counts = {}, {}
    for g in (0, 1):
        for t in (0, 1):
            key = f"mu{g}{t}"
            vals = [float(v) for o, v in zip(rows, y) if o.group == g and o.period == t]
            counts[key] = len(vals)
            means[key] = math.fsum(vals) / len(vals) if vals else math.nan
    return means, counts


def did_fit(panel: BalancedPanel | Sequence[PanelObservation], spec: Sequence[str] = (),
            outcome: str = "co2") -> DidFit:
    dm = did_design_matrix(panel, spec, outcome)
    fit = ols_fit(dm.X, dm.y, dm.names)
    means, counts = _cells(dm.rows, dm.y)
    return DidFit(fit, covariate_spec(spec), means, counts, len(dm.rows), dm.dropped)


def model_ladder(panel: BalancedPanel, models: Iterable[int] = (1, 2, 3, 4), outcome: str = "co2") -> dict[int, DidFit]:
    return {m: did_fit(panel, MODEL_LADDER[m], outcome) for m in models}


# -- group contrasts ---------------------------------------------------------


@dataclass(frozen=True)
class ContrastRow:
    metric: str
    wave: int
    control_mean: float
    experimental_mean: float
    control_sd: float
    experimental_sd: float
    n_control: int
    n_experimental: int
    difference: float
    percent_difference: float
    p_two_sided: float
    test: TestResult | None
    vehicles_control: int = 0
    vehicles_experimental: int = 0


def _values(obs: Iterable[PanelObservation], metric: str) -> list[float]:
    return [v for v in (metric_value(o, metric) for o in obs) if v is not None]


def group_contrast_table(panel: BalancedPanel, metric: str = "co2", wave: int = 2,
                         variant: str = "welch") -> ContrastRow:
    """Experimental vs. control contrast for one metric in one wave.

    Percent difference uses the control mean as its base.
    """
    ctrl_obs = panel.cell(Group.Control, wave)
    expt_obs = panel.cell(Group.Experimental, wave)
    ctrl = _values(ctrl_obs, metric)
    expt = _values(expt_obs, metric)
    if not ctrl or not expt:
        raise EmptyGroup(f"wave {wave} has {len(ctrl)} control and {len(expt)} experimental values for {metric}")
    mc, sc = mean_sd(ctrl)
    me, se = mean_sd(expt)
    diff = me - mc
    pct = diff / mc if mc != 0 else math.nan
    test = None
    p = math.nan
    if len(ctrl) >= 2 and len(expt) >= 2:
        if sc == 0 and se == 0 and diff == 0:
            p = 1.0
        else:
            test = two_sample_t(expt, ctrl, variant)
            p = test.p_two_sided
    return ContrastRow(metric, wave, mc, me, sc, se, len(ctrl), len(expt), diff, pct, p, test,
                       sum(o.veh_cnt for o in ctrl_obs), sum(o.veh_cnt for o in expt_obs))


def unchanged_holdings(panel: BalancedPanel) -> BalancedPanel:
    """Sub-panel of households that kept the same vehicle ids in both waves."""
    fleets: dict[str, dict[int, frozenset[str]]] = {}
    for o in panel.observations:
        fleets.setdefault(o.household_id, {})[o.wave] = frozenset(e.vehicle_id for e in o.vehicles)
    keep = {hid for hid, f in fleets.items() if f.get(1) == f.get(2)}
    return replace(panel, observations=tuple(o for o in panel.observations if o.household_id in keep))


def paired_differences(panel: BalancedPanel, group: int, metric: str) -> list[float]:
    by_wave: dict[int, dict[str, float | None]] = {1: {}, 2: {}}
    for o in panel.observations:
        if o.group == group:
            by_wave[o.wave][o.household_id] = metric_value(o, metric)
    diffs = []
    for hid in sorted(by_wave[1]):
        a, b = by_wave[1][hid], by_wave[2].get(hid)
        if a is not None and b is not None:
            diffs.append(b - a)
    return diffs


def within_group_change(panel: BalancedPanel, group: int, metric: str = "co2") -> TestResult:
    """Paired t-test of wave 2 minus wave 1 within one group."""
    return paired_t(paired_differences(panel, group, metric))


# -- sensitivity -------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    radius: Radius
    fit: DidFit


def sensitivity_sweep(panel: BalancedPanel, radii: Sequence[Radius],
                      spec: Sequence[str] = MODEL_LADDER[4]) -> list[SweepRow]:
    """Refit the DID model with the experimental group redrawn at each radius."""
    return [SweepRow(r, did_fit(panel.with_radius(r), spec)) for r in radii]


def significance_stars(p: float) -> str:
    if p is None or math.isnan(p):
        return ""
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.1:
        return "*"
    return ""
