"""Machine-readable and human-readable report emission.

JSON documents carry every number at full float precision (NaN and
infinities become ``null``). Text tables round for display only: grams to
0.1, percentages to 0.01 points, coefficients to 0.1 with significance
stars.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import hashlib
import json
import math
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .config import Radius, RunConfig
from .evaluate import INCOME_BRACKETS, INCOME_LABELS, ContrastRow, DidFit, SweepRow, significance_stars
from .lifecycle import ModeFactors, NetEffect, TransitGroupChange
from .panel import BalancedPanel, ExclusionReason
from .simulate import RecoveryReport
from .stats import TestResult

STARS_LEGEND = "Standard errors in parentheses, * p<0.1, ** p<0.05, *** p<0.01"
TERM_LABELS = {
    "experimental": "Experimental group dummy",
    "wave": "Wave 2 dummy",
    "wvexp": "Wave experimental interaction",
    "veh_cnt": "Number of household vehicles",
    "ppl_cnt": "Household size > 12 years old",
    **{f"income_{b}": INCOME_LABELS[b] for b in INCOME_BRACKETS},
    "const": "Constant",
}
METRIC_LABELS = {
    "co2": "Average daily household vehicle CO2 (grams)",
    "vmt": "Household-level average daily VMT",
    "car_trips": "Household-level average daily car trips",
    "bus_trips": "Household-level average daily bus trips",
    "train_trips": "Household-level average daily train trips",
}


# -- JSON ----------------------------------------------------------------------


def jsonable(obj: Any) -> Any:
    """Convert results into plain JSON types without rounding."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value if isinstance(obj.value, str) else obj.name
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, Radius):
        return {"value": obj.value, "unit": obj.unit, "miles": obj.miles}
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return [jsonable(x) for x in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Mapping):
        return {str(jsonable(k)) if not isinstance(k, str) else k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(jsonable(obj), indent=2, allow_nan=False) + "\n"


def write_json(path: str | Path, obj: Any) -> Path:
    path = Path(path)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


# -- manifest ------------------------------------------------------------------


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


@dataclasses.dataclass(frozen=True)
class RunManifest:
    """Provenance for one run; the digest ignores the timestamp."""

    inputs: Mapping[str, str]
    config: Mapping[str, str]
    version: str
    row_counts: Mapping[str, Any]
    timestamp: str = ""

    def body(self) -> dict:
        return {
            "version": self.version,
            "inputs": dict(sorted(self.inputs.items())),
            "config": dict(sorted(self.config.items())),
            "row_counts": jsonable(self.row_counts),
        }

    @property
    def digest(self) -> str:
        canonical = json.dumps(self.body(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def embedded(self) -> dict:
        """The manifest as embedded in reports: everything but the timestamp."""
        return {**self.body(), "digest": self.digest}

    def to_dict(self) -> dict:
        return {**self.embedded(), "timestamp": self.timestamp}


def build_manifest(cfg: RunConfig, version: str, row_counts: Mapping[str, Any] | None = None,
                   timestamp: str = "") -> RunManifest:
    """Digest every existing input file named in the config.

    Data paths are recorded by file name only so the digest does not depend
    on where the inputs live.
    """
    inputs = {name: file_digest(p) for name, p in sorted(cfg.data.items()) if Path(p).is_file()}
    config = cfg.to_mapping()
    for name, p in cfg.data.items():
        config[f"data.{name}"] = Path(p).name
    return RunManifest(inputs, config, version, dict(row_counts or {}), timestamp)


def with_manifest(manifest: RunManifest | None, payload: Mapping[str, Any]) -> dict:
    out = {"manifest": manifest.embedded()} if manifest is not None else {}
    out.update(payload)
    return out


# -- result dictionaries -----------------------------------------------------


def ttest_dict(t: TestResult | None) -> dict | None:
    if t is None:
        return None
    return {"statistic": t.statistic, "df": t.df, "p_two_sided": t.p_two_sided, "mean_diff": t.mean_diff, "n": list(t.n)}


def did_dict(fit: DidFit, model: int | str | None = None) -> dict:
    o = fit.ols
    terms = {
        name: {"coef": o.coefficients[j], "se": o.standard_errors[j], "t": o.t_values[j], "p": o.p_values[j]}
        for j, name in enumerate(o.names)
    }
    return {
        "model": model,
        "covariates": list(fit.spec),
        "terms": terms,
        "treatment_effect": fit.treatment_effect,
        "four_mean_did": fit.four_mean_did,
        "cell_means": fit.cell_means,
        "cell_counts": fit.cell_counts,
        "n": fit.n_used,
        "n_dropped": fit.n_dropped,
        "n_experimental": fit.n_experimental,
        "n_control": fit.n_control,
        "r_squared": o.r_squared,
        "adj_r_squared": o.adj_r_squared,
        "sigma2": o.sigma2,
        "df_resid": o.df_resid,
    }


def contrast_dict(row: ContrastRow) -> dict:
    d = {f.name: getattr(row, f.name) for f in dataclasses.fields(row) if f.name != "test"}
    d["test"] = ttest_dict(row.test)
    return d


def ledger_dict(panel: BalancedPanel) -> dict:
    out = {}
    for w in (1, 2):
        counts = {r.value: panel.ledger.get((w, r), 0) for r in ExclusionReason}
        out[f"wave{w}"] = {**counts, "Total": sum(counts.values()), "Retained": len(panel.wave(w)),
                           "Input": panel.input_counts.get(w, 0)}
    return out


def sweep_dict(rows: Sequence[SweepRow]) -> list[dict]:
    return [{"radius": r.radius, "label": str(r.radius), **did_dict(r.fit)} for r in rows]


def mode_dict(m: ModeFactors) -> dict:
    return {
        "mode": m.mode,
        "g_per_passenger_mile": m.g_per_passenger_mile,
        "avg_trip_miles": m.avg_trip_miles,
        "scale_factor": m.scale_factor,
        "per_trip_operational": m.per_trip_operational,
        "per_trip_lifecycle": m.per_trip_lifecycle,
        "components": None if m.components is None else {
            **jsonable(m.components), "operational": m.components.operational, "gross": m.components.gross},
    }


def transit_dict(rows: Sequence[TransitGroupChange]) -> list[dict]:
    return [{"group": r.group, "wave1": r.wave1, "wave2": r.wave2, "difference": r.difference,
             "percent_difference": r.percent_difference, "test": ttest_dict(r.test)} for r in rows]


def net_dict(n: NetEffect) -> dict:
    return jsonable(n)


def recovery_dict(r: RecoveryReport) -> dict:
    return jsonable(r)


# -- text tables ---------------------------------------------------------------


def _fixed(x: float, decimals: int) -> str:
    # values that round to zero print as 0.0, never -0.0
    text = f"{x:.{decimals}f}"
    return text[1:] if text.startswith("-") and float(text) == 0 else text


def _g(x: float | None) -> str:
    return "" if x is None or not math.isfinite(x) else _fixed(x, 1)


def _pct(frac: float | None) -> str:
    return "" if frac is None or not math.isfinite(frac) else f"{100 * frac:.2f}%"


def _p(p: float | None) -> str:
    return "" if p is None or not math.isfinite(p) else f"{p:.4f}"


def _x2(x: float | None) -> str:
    return "" if x is None or not math.isfinite(x) else f"{x:.2f}"


def align(rows: Sequence[Sequence[str]], title: str = "", footer: str = "") -> str:
    """Left-align the first column and right-align the rest."""
    widths = [max(len(r[j]) if j < len(r) else 0 for r in rows) for j in range(max(map(len, rows)))]
    lines = [title] if title else []
    for r in rows:
        cells = [r[0].ljust(widths[0])] + [c.rjust(widths[j + 1]) for j, c in enumerate(r[1:])]
        lines.append("  ".join(cells).rstrip())
    if footer:
        lines.append(footer)
    return "\n".join(lines) + "\n"


def contrast_table(by_wave: Mapping[int, ContrastRow], title: str = "") -> str:
    """Two-wave group contrast in the layout of the emissions-by-group table."""
    w1, w2 = by_wave[1], by_wave[2]
    gram = w1.metric == "co2"
    val = _g if gram else _x2
    rows = [
        ["", "Wave 1", "", "Wave 2", ""],
        ["", "control", "experimental", "control", "experimental"],
        ["Number of households with usable data", str(w1.n_control), str(w1.n_experimental),
         str(w2.n_control), str(w2.n_experimental)],
    ]
    if gram:
        rows.append(["Number of vehicles in households with usable data", str(w1.vehicles_control),
                     str(w1.vehicles_experimental), str(w2.vehicles_control), str(w2.vehicles_experimental)])
    rows += [
        [METRIC_LABELS.get(w1.metric, w1.metric), val(w1.control_mean), val(w1.experimental_mean),
         val(w2.control_mean), val(w2.experimental_mean)],
        ["(standard deviation)", val(w1.control_sd), val(w1.experimental_sd), val(w2.control_sd), val(w2.experimental_sd)],
        ["Difference: experimental-control", "", val(w1.difference), "", val(w2.difference)],
        ["% Difference: (experimental-control)/control", "", _pct(w1.percent_difference), "",
         _pct(w2.percent_difference)],
        ["p-value of two-sample t-test (two-sided)", "", _p(w1.p_two_sided), "", _p(w2.p_two_sided)],
    ]
    return align(rows, title)


def _coef_cell(fit: DidFit, name: str) -> str:
    o = fit.ols
    if name not in o.names:
        return ""
    j = o.names.index(name)
    return f"{_fixed(o.coefficients[j], 1)}{significance_stars(o.p_values[j])} ({_fixed(o.standard_errors[j], 1)})"


def did_table(fits: Mapping[Any, DidFit], title: str = "") -> str:
    """Model ladder with one column per model and terms as rows."""
    keys = list(fits)
    present = {n for f in fits.values() for n in f.ols.names}
    order = ["experimental", "wave", "wvexp", "veh_cnt", "ppl_cnt", *[f"income_{b}" for b in INCOME_BRACKETS], "const"]
    rows = [["", *[f"Model {k}" for k in keys]]]
    for name in order:
        if name not in present:
            continue
        if name == "income_2":
            rows.append(["Household annual income", *[""] * len(keys)])
        rows.append([TERM_LABELS[name], *[_coef_cell(fits[k], name) for k in keys]])
    rows.append(["N", *[str(fits[k].n_used) for k in keys]])
    rows.append(["adj. R-sq", *[f"{fits[k].ols.adj_r_squared:.3f}" for k in keys]])
    return align(rows, title, STARS_LEGEND)


def sensitivity_table(rows_in: Sequence[SweepRow], first_model: int = 4, title: str = "") -> str:
    """Radius sweep with one column per experimental-group definition."""
    head = ["", *[f"Model {first_model + i}" for i in range(len(rows_in))]]
    fits = [r.fit for r in rows_in]
    rows = [
        head,
        ["Experimental group definition", *[f"< {r.radius}" for r in rows_in]],
        *[[TERM_LABELS[n], *[_coef_cell(f, n) for f in fits]] for n in ("experimental", "wave", "wvexp")],
        ["Total N", *[str(f.n_used) for f in fits]],
        ["from experimental group", *[str(f.n_experimental) for f in fits]],
        ["from control group", *[str(f.n_control) for f in fits]],
        ["adj. R-sq", *[f"{f.ols.adj_r_squared:.3f}" for f in fits]],
    ]
    return align(rows, title, STARS_LEGEND)


def transit_table(rows_in: Sequence[TransitGroupChange], title: str = "") -> str:
    """Household transit life-cycle CO2 by group and wave with paired tests."""
    rows = [["", "Wave 1", "Wave 2", "Difference", "% Difference", "paired p"]]
    for r in rows_in:
        label = "experimental" if r.group == 1 else "control"
        rows.append([f"{label} (n={r.wave1.households})", _g(r.wave1.mean_g_per_day), _g(r.wave2.mean_g_per_day),
                     _g(r.difference), _pct(r.percent_difference), _p(r.test.p_two_sided if r.test else None)])
    return align(rows, title)


def lifecycle_table(factors: Mapping[str, ModeFactors], title: str = "") -> str:
    rows = [["", *[m for m in factors]]]
    rows.append(["grams per passenger-mile", *[_g(m.g_per_passenger_mile) for m in factors.values()]])
    rows.append(["average trip miles", *[_x2(m.avg_trip_miles) for m in factors.values()]])
    rows.append(["operational grams per trip", *[_g(m.per_trip_operational) for m in factors.values()]])
    rows.append(["life-cycle scale factor", *[_x2(m.scale_factor) for m in factors.values()]])
    rows.append(["life-cycle grams per trip", *[_g(m.per_trip_lifecycle) for m in factors.values()]])
    return align(rows, title)


def recovery_table(r: RecoveryReport, title: str = "") -> str:
    rows = [
        ["replications", str(r.replications)],
        ["failed replications", str(r.failures)],
        ["true effect", _g(r.tau)],
        ["mean estimate", _g(r.mean_estimate)],
        ["bias", _g(r.bias)],
        ["RMSE", _g(r.rmse)],
        ["empirical sd", _g(r.empirical_sd)],
        ["mean reported SE", _g(r.mean_se)],
        [f"{100 * (1 - r.alpha):g}% CI coverage", f"{r.coverage:.3f}"],
        [f"rejection rate at alpha={r.alpha:g}", f"{r.rejection_rate:.3f}"],
    ]
    return align(rows, title)


# -- CSV -----------------------------------------------------------------------


def _csv_value(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x)) if math.isfinite(x) else ""
    return str(x)


def write_csv(path: str | Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_csv_value(x) for x in r])
    return path


CONTRAST_HEADER = ("metric", "wave", "n_control", "n_experimental", "vehicles_control", "vehicles_experimental",
                   "control_mean", "experimental_mean", "control_sd", "experimental_sd", "difference",
                   "percent_difference", "t", "df", "p_two_sided")


def write_contrast_csv(path: str | Path, rows: Sequence[ContrastRow]) -> Path:
    return write_csv(path, CONTRAST_HEADER, [
        (r.metric, r.wave, r.n_control, r.n_experimental, r.vehicles_control, r.vehicles_experimental,
         r.control_mean, r.experimental_mean, r.control_sd, r.experimental_sd, r.difference,
         r.percent_difference, r.test.statistic if r.test else None, r.test.df if r.test else None, r.p_two_sided)
        for r in rows
    ])


def write_sensitivity_csv(path: str | Path, rows: Sequence[SweepRow]) -> Path:
    header = ("radius", "radius_miles", "n", "n_experimental", "n_control", "adj_r_squared",
              *[f"{t}_{s}" for t in ("experimental", "wave", "wvexp") for s in ("coef", "se", "p")])
    out = []
    for r in rows:
        o = r.fit.ols
        terms = [v for t in ("experimental", "wave", "wvexp") for v in (o.coef(t), o.se(t), o.pvalue(t))]
        out.append((str(r.radius), r.radius.miles, r.fit.n_used, r.fit.n_experimental, r.fit.n_control,
                    o.adj_r_squared, *terms))
    return write_csv(path, header, out)


def write_did_csv(path: str | Path, fits: Mapping[Any, DidFit]) -> Path:
    rows = []
    for k, f in fits.items():
        o = f.ols
        for j, name in enumerate(o.names):
            rows.append((k, name, o.coefficients[j], o.standard_errors[j], o.t_values[j], o.p_values[j], f.n_used))
    return write_csv(path, ("model", "term", "coef", "se", "t", "p", "n"), rows)
