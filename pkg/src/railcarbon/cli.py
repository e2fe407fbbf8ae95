"""Command-line entry point.

Every subcommand reads the same ``key = value`` config, writes its results
under ``--out`` and refreshes ``manifest.json`` there. Report files embed
the manifest without its timestamp, so reruns on unchanged inputs rewrite
them byte for byte.

Exit status: 0 success, 1 validation or pipeline failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .config import RunConfig, load_config, parse_radii
from .dataio import load_factor_tables, load_stations, load_survey_with_report, write_factor_tables, write_stations, write_survey
from .emissions import write_emissions_csv
from .errors import ConfigError, RailCarbonError
from .evaluate import (
    MODEL_LADDER,
    did_fit,
    group_contrast_table,
    sensitivity_sweep,
    unchanged_holdings,
    within_group_change,
)
from .lifecycle import load_lifecycle, net_effect_summary, rail_countervailing_bound, rail_trip_change, transit_emission_table
from .panel import BalancedPanel, build_balanced_panel, metric_value
from .records import FactorTables, RawSurvey, StationSet
from .simulate import SimConfig, generate_panel, recovery_experiment
from . import report as rpt
from .validation import validate_dataset

log = logging.getLogger("railcarbon")

SUBCOMMANDS = ("validate", "panel", "emissions", "contrast", "did", "lifecycle", "sensitivity", "simulate",
               "recover", "report")
DEFAULT_RADII = "0.5mi,1km,0.75mi"
CONTRAST_METRICS = ("co2", "vmt", "car_trips", "bus_trips", "train_trips")
SURVEY_KEYS = ("households", "vehicles", "odometer", "trips")


class ValidationFailed(RailCarbonError):
    """Input data has fatal validation issues."""


class UsageError(Exception):
    pass


# -- run context -------------------------------------------------------------


@dataclass
class Run:
    cfg: RunConfig
    out: Path
    args: argparse.Namespace
    row_counts: dict = field(default_factory=dict)
    _inputs: tuple[RawSurvey, FactorTables, StationSet] | None = None
    _panel: BalancedPanel | None = None

    def path(self, name: str) -> Path:
        return self.out / name

    def need(self, *keys: str) -> None:
        missing = [k for k in keys if k not in self.cfg.data]
        if missing:
            raise ConfigError("config lacks " + ", ".join(f"data.{k}" for k in missing))

    def inputs(self) -> tuple[RawSurvey, FactorTables, StationSet]:
        if self._inputs is None:
            self.need(*SURVEY_KEYS, "factors_gasoline", "factors_electrified", "stations")
            d = self.cfg.data
            survey, load = load_survey_with_report({k: d[k] for k in SURVEY_KEYS},
                                                   calendar_years=self.cfg.calendar_years,
                                                   survey_days=self.cfg.survey_days)
            factors = load_factor_tables(d)
            stations = load_stations(d["stations"])
            self.row_counts["input"] = {k: vars(c) for k, c in load.counts.items()}
            self._inputs = (survey, factors, stations)
        return self._inputs

    def validated_inputs(self) -> tuple[RawSurvey, FactorTables, StationSet]:
        survey, factors, stations = self.inputs()
        rep = validate_dataset(survey, factors, stations, self.cfg.min_odometer_readings)
        if not rep.ok:
            raise ValidationFailed("; ".join(f"{i.category}: {i.detail}" for i in rep.fatal))
        return survey, factors, stations

    def panel(self) -> BalancedPanel:
        if self._panel is None:
            survey, factors, stations = self.validated_inputs()
            self._panel = build_balanced_panel(survey, factors, stations, self.cfg)
            self.row_counts["panel"] = {"households": len(self._panel.household_ids),
                                        "observations": len(self._panel.observations),
                                        "ledger": rpt.ledger_dict(self._panel)}
        return self._panel

    def manifest(self) -> rpt.RunManifest:
        return rpt.build_manifest(self.cfg, __version__, self.row_counts)

    def write_json(self, name: str, payload: dict) -> Path:
        return rpt.write_json(self.path(name), rpt.with_manifest(self.manifest(), payload))

    def write_text(self, name: str, text: str) -> Path:
        p = self.path(name)
        p.write_text(text, encoding="utf-8")
        return p

    def model_keys(self) -> list[int]:
        m = self.args.model
        return [1, 2, 3, 4] if m == "all" else [int(m)]


# -- subcommands -------------------------------------------------------------


def cmd_validate(run: Run) -> int:
    run.need(*SURVEY_KEYS, "factors_gasoline", "factors_electrified", "stations")
    d = run.cfg.data
    survey, load = load_survey_with_report({k: d[k] for k in SURVEY_KEYS}, calendar_years=run.cfg.calendar_years,
                                           survey_days=run.cfg.survey_days, errors="collect")
    factors = load_factor_tables(d)
    stations = load_stations(d["stations"])
    run.row_counts["input"] = {k: vars(c) for k, c in load.counts.items()}
    rep = validate_dataset(survey, factors, stations, run.cfg.min_odometer_readings)
    rejected = [str(e) for e in load.errors]
    ok = rep.ok and not rejected
    run.write_json("validation.json", {"ok": ok, "rejected_rows": rejected, **rep.to_dict()})
    print(f"{len(rep.issues)} issues ({len(rep.fatal)} fatal), {len(rejected)} rejected rows")
    for line in rejected:
        print(f"  rejected: {line}")
    for i in rep.issues:
        where = " ".join(str(x) for x in (i.household_id, i.wave, i.vehicle_id) if x is not None)
        print(f"  {i.severity}: {i.category} {where} {i.detail}".rstrip())
    return 0 if ok else 1


def cmd_panel(run: Run) -> int:
    panel = run.panel()
    panel.write_ledger_csv(run.path("panel_ledger.csv"))
    rpt.write_csv(run.path("panel.csv"),
                  ("household_id", "wave", "group", "distance_miles", "veh_cnt", "ppl_cnt", "income_bracket",
                   "daily_vmt", "daily_co2_g", "car_trips", "bus_trips", "train_trips"),
                  [(o.household_id, o.wave, o.group, o.distance_miles, o.veh_cnt, o.ppl_cnt, o.income_bracket,
                    o.daily_vmt, o.daily_co2_g, o.car_trips, o.bus_trips, o.train_trips)
                   for o in panel.observations])
    run.write_json("panel.json", {"radius": panel.radius, "ledger": rpt.ledger_dict(panel),
                                  "households": len(panel.household_ids)})
    print(f"balanced panel: {len(panel.household_ids)} households, {len(panel.observations)} observations")
    return 0


def cmd_emissions(run: Run) -> int:
    panel = run.panel()
    write_emissions_csv(panel.vehicle_emissions(), run.path("emissions.csv"))
    print(f"{len(panel.vehicle_emissions())} vehicle-wave emission rows")
    return 0


def _contrasts(run: Run, panel: BalancedPanel, suffix: str = "") -> tuple[dict, str]:
    payload, text = {}, []
    for metric in CONTRAST_METRICS:
        if all(metric_value(o, metric) is None for o in panel.observations):
            continue  # no trip logs
        rows = {w: group_contrast_table(panel, metric, w, run.cfg.ttest_variant) for w in (1, 2)}
        rpt.write_contrast_csv(run.path(f"contrast_{metric}{suffix}.csv"), list(rows.values()))
        payload[metric] = [rpt.contrast_dict(r) for r in rows.values()]
        text.append(rpt.contrast_table(rows, title=f"{rpt.METRIC_LABELS[metric]}{suffix and ' (' + suffix[1:] + ')'}"))
    return payload, "\n".join(text)


def _paired(panel: BalancedPanel) -> dict:
    out = {}
    for g, label in ((0, "control"), (1, "experimental")):
        try:
            out[label] = rpt.ttest_dict(within_group_change(panel, g, "co2"))
        except RailCarbonError as exc:
            out[label] = {"error": str(exc)}
    return out


def cmd_contrast(run: Run) -> int:
    panel = run.panel()
    payload, text = _contrasts(run, panel)
    sub = unchanged_holdings(panel)
    sub_payload, sub_text = ({}, "") if not sub.observations else _contrasts(run, sub, "_unchanged_holdings")
    run.write_json("contrast.json", {
        "ttest": run.cfg.ttest_variant,
        "all_households": payload,
        "unchanged_holdings": sub_payload,
        "within_group_change_co2": _paired(panel),
        "within_group_change_co2_unchanged_holdings": _paired(sub) if sub.observations else {},
    })
    text = text + ("\n" + sub_text if sub_text else "")
    run.write_text("contrast.txt", text)
    print(text, end="")
    return 0


def cmd_did(run: Run) -> int:
    panel = run.panel()
    fits = {k: did_fit(panel, MODEL_LADDER[k]) for k in run.model_keys()}
    for k, f in fits.items():
        run.write_json(f"did_model{k}.json", rpt.did_dict(f, k))
    rpt.write_did_csv(run.path("did.csv"), fits)
    text = rpt.did_table(fits, "Difference-in-differences estimates of household vehicle CO2 (g/day)")
    run.write_text("did.txt", text)
    print(text, end="")
    return 0


def _scale_decimals(cfg: RunConfig) -> int | None:
    raw = cfg.extra.get("lifecycle.scale_decimals", "").strip()
    if raw in ("", "none"):
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"bad value for lifecycle.scale_decimals: {raw!r}") from None


def cmd_lifecycle(run: Run) -> int:
    run.need("lifecycle")
    factors = load_lifecycle(run.cfg.data["lifecycle"], _scale_decimals(run.cfg))
    panel = run.panel()
    rail = factors["rail"]
    payload: dict = {"modes": {m: rpt.mode_dict(f) for m, f in factors.items()}}
    text = [rpt.lifecycle_table(factors, "Per-trip transit CO2 (grams)")]
    if any(o.train_trips is not None for o in panel.observations):
        transit = transit_emission_table(panel, factors)
        bound = rail_countervailing_bound(panel, rail)
        effect = did_fit(panel, run.cfg.covariates).treatment_effect
        net = net_effect_summary(effect, bound)
        payload.update({
            "transit_by_group": rpt.transit_dict(transit),
            "rail_trip_change_experimental": rail_trip_change(panel),
            "rail_countervailing_bound": bound,
            "vehicle_model_covariates": list(run.cfg.covariates),
            "net_effect": rpt.net_dict(net),
        })
        text.append(rpt.transit_table(transit, "Household transit life-cycle CO2 (g/day)"))
        text.append(rpt.align([
            ["vehicle CO2 treatment effect", f"{net.vehicle_effect:.1f}"],
            ["rail countervailing increase", f"{net.transit_offset:.1f}"],
            ["net change", f"{net.net:.1f}"],
            ["offset share", "" if net.offset_share is None else f"{100 * net.offset_share:.2f}%"],
        ], "Net effect (g/day)"))
    run.write_json("lifecycle.json", payload)
    out = "\n".join(text)
    run.write_text("lifecycle.txt", out)
    print(out, end="")
    return 0


def cmd_sensitivity(run: Run) -> int:
    try:
        radii = parse_radii(run.args.radii or DEFAULT_RADII)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    panel = run.panel()
    rows = sensitivity_sweep(panel, radii, run.cfg.covariates)
    rpt.write_sensitivity_csv(run.path("sensitivity.csv"), rows)
    run.write_json("sensitivity.json", {"covariates": list(run.cfg.covariates), "fits": rpt.sweep_dict(rows)})
    text = rpt.sensitivity_table(rows, title="Catchment radius sensitivity of the DID treatment effect")
    run.write_text("sensitivity.txt", text)
    print(text, end="")
    return 0


def _sim_config(run: Run) -> SimConfig:
    values = {**run.cfg.extra, "run.seed": str(run.cfg.seed)}
    sim = SimConfig.from_mapping(values)
    if run.args.seed is not None:
        sim = replace(sim, seed=run.args.seed)
    return sim


def cmd_simulate(run: Run) -> int:
    sim = _sim_config(run)
    data = generate_panel(sim)
    target = run.out / "data"
    write_survey(data.survey, target)
    write_factor_tables(data.factors, target)
    write_stations(data.stations, target / "stations.csv")
    conf = ["# generated dataset; run the pipeline with --config on this file"]
    conf += [f"data.{k} = {k}.csv" for k in (*SURVEY_KEYS, "factors_gasoline", "factors_electrified", "stations")]
    conf += [f"survey.wave1_year = {sim.calendar_years[0]}", f"survey.wave2_year = {sim.calendar_years[1]}"]
    (target / "run.conf").write_text("\n".join(conf) + "\n", encoding="utf-8")
    run.row_counts["simulated"] = data.survey.counts()
    run.write_json("simulate.json", {"sim_config": sim, "target_means": {f"{g}{w}": m for (g, w), m in
                                                                        sim.target_means.items()}})
    print(f"wrote synthetic survey to {target}")
    return 0


def cmd_recover(run: Run) -> int:
    sim = _sim_config(run)
    reps = run.args.reps if run.args.reps is not None else 200
    if reps < 2:
        raise UsageError("--reps must be at least 2")
    spec = run.cfg.covariates if run.args.model == "all" else MODEL_LADDER[int(run.args.model)]
    result = recovery_experiment(sim, reps, spec, run_cfg=sim.run_config(outlier_vmt_per_day=run.cfg.outlier_vmt_per_day))
    run.write_json("recovery.json", {"sim_config": sim, "covariates": list(spec), "report": rpt.recovery_dict(result)})
    text = rpt.recovery_table(result, "Estimator recovery")
    run.write_text("recovery.txt", text)
    print(text, end="")
    return 0


def cmd_report(run: Run) -> int:
    run.args.model = "all"
    for step in (cmd_panel, cmd_emissions, cmd_contrast, cmd_did, cmd_sensitivity):
        step(run)
    parts = [run.path(n).read_text(encoding="utf-8") for n in ("contrast.txt", "did.txt", "sensitivity.txt")]
    if "lifecycle" in run.cfg.data:
        cmd_lifecycle(run)
        parts.append(run.path("lifecycle.txt").read_text(encoding="utf-8"))
    run.write_text("report.txt", "\n".join(parts))
    return 0


COMMANDS: dict[str, Callable[[Run], int]] = {
    "validate": cmd_validate, "panel": cmd_panel, "emissions": cmd_emissions, "contrast": cmd_contrast,
    "did": cmd_did, "lifecycle": cmd_lifecycle, "sensitivity": cmd_sensitivity, "simulate": cmd_simulate,
    "recover": cmd_recover, "report": cmd_report,
}


# -- argument parsing -----------------------------------------------------------


def _u64(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value run configuration file")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--radii", help=f"comma-separated catchment radii (default: {DEFAULT_RADII})")
    common.add_argument("--model", choices=("1", "2", "3", "4", "all"), default="all")
    common.add_argument("--ttest", choices=("welch", "pooled"))
    common.add_argument("--seed", type=_u64)
    common.add_argument("--reps", type=_positive)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="railcarbon", description="Household vehicle CO2 difference-in-differences pipeline.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(SUBCOMMANDS) + "}")
    sub.required = True
    helps = {
        "validate": "check input files without building anything",
        "panel": "screen households and write the balanced panel and exclusion ledger",
        "emissions": "write per-vehicle daily CO2 for the balanced panel",
        "contrast": "experimental vs. control contrasts by wave",
        "did": "difference-in-differences model ladder",
        "lifecycle": "transit life-cycle factors and net effect",
        "sensitivity": "refit across catchment radii",
        "simulate": "write a synthetic survey with known effects",
        "recover": "Monte Carlo estimator recovery",
        "report": "run panel, emissions, contrast, did, sensitivity and lifecycle",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _load_run(args: argparse.Namespace) -> Run:
    if args.config:
        cfg = load_config(args.config)
    elif args.command in ("simulate", "recover"):
        cfg = RunConfig()
    else:
        raise UsageError(f"{args.command} needs --config")
    if args.ttest:
        cfg = cfg.with_overrides(ttest_variant=args.ttest)
    if args.seed is not None:
        cfg = cfg.with_overrides(seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return Run(cfg, out, args)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        run = _load_run(args)
        status = COMMANDS[args.command](run)
    except (UsageError, ConfigError) as exc:
        print(f"railcarbon {args.command}: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except (RailCarbonError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    stamp = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
    manifest = replace(run.manifest(), timestamp=stamp)
    rpt.write_json(run.path("manifest.json"), manifest.to_dict())
    return status


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
