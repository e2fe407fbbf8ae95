"""Acceptance criteria 1-10, one test per criterion.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""

from __future__ import annotations

import numpy as np
import pytest

import test_properties as props
from fixtures import FACTORS, STATIONS, Car, SurveyBuilder, steady
from oracles import ols_normal_equations, t_tail_quad
from railcarbon.config import RunConfig
from railcarbon.evaluate import did_fit, group_contrast_table
from railcarbon.lifecycle import (
    LifecycleComponents,
    ModeFactors,
    household_transit_co2,
    net_effect_summary,
    per_trip_operational,
    scale_factor,
)
from railcarbon.panel import ExclusionReason, build_balanced_panel
from railcarbon.simulate import SimConfig, recovery_experiment
from railcarbon.stats import ols_fit, t_tail_two_sided

GOLD = LifecycleComponents(0.0, 120.73, 3.29, 1.31, 53.72)
ORANGE = LifecycleComponents(53.91, 0.0, 14.63, 19.09, 19.84)

# fixed before the first run and never changed
RECOVERY_SEED = 2011


def test_criterion_01_saturated_did(sample_panel):
    b = did_fit(sample_panel).ols.coefficients
    for got, want in zip(b, (9992.7, -621.6, 823.2, -2316.8)):
        assert abs(got - want) <= 1e-6 * abs(want)


def test_criterion_02_group_contrast(sample_panel):
    w2 = group_contrast_table(sample_panel, "co2", wave=2)
    w1 = group_contrast_table(sample_panel, "co2", wave=1)
    assert w2.difference == pytest.approx(-2938.4, abs=0.01)
    assert 100 * w2.percent_difference == pytest.approx(-27.17, abs=0.01)
    assert w1.difference == pytest.approx(-621.6, abs=0.01)
    assert 100 * w1.percent_difference == pytest.approx(-6.22, abs=0.01)


def test_criterion_03_lifecycle_factors():
    assert per_trip_operational(99.3, 6.81) == pytest.approx(676.2, abs=0.05)
    assert per_trip_operational(224.1, 4.2) == pytest.approx(941.2, abs=0.05)
    s_rail, s_bus = scale_factor(GOLD), scale_factor(ORANGE)
    assert s_rail == pytest.approx(1.44, abs=0.005)
    assert s_bus == pytest.approx(1.57, abs=0.005)
    # the published per-trip figures multiply by the two-decimal scale factors
    rail = ModeFactors("rail", 99.3, 6.81, scale_factor(GOLD, decimals=2), GOLD)
    bus = ModeFactors("bus", 224.1, 4.2, scale_factor(ORANGE, decimals=2), ORANGE)
    assert rail.per_trip_lifecycle == pytest.approx(973.7, abs=0.1)
    assert bus.per_trip_lifecycle == pytest.approx(1477.7, abs=0.1)
    assert household_transit_co2(0.0, 0.15, bus, rail) == pytest.approx(146.1, abs=0.5)


def test_criterion_04_component_sums():
    assert round(GOLD.gross, 2) == 179.05 and round(GOLD.operational, 2) == 124.02
    assert round(ORANGE.gross, 2) == 107.47 and round(ORANGE.operational, 2) == 68.54


def test_criterion_05_net_effect():
    n = net_effect_summary(-3145.0, 146.0)
    assert n.net == pytest.approx(-2999.0, abs=0.5)
    assert 100 * n.offset_share == pytest.approx(4.6, abs=0.1)


def test_criterion_06_ols_oracle():
    rng = np.random.default_rng(606)
    for _ in range(100):
        n = int(rng.integers(15, 201))
        k = int(rng.integers(2, min(12, n - 2) + 1))
        X = np.column_stack([np.ones(n), rng.normal(size=(n, k - 1))])
        beta = rng.uniform(1, 10, size=k) * rng.choice([-1, 1], size=k)
        y = X @ beta + rng.normal(scale=0.5, size=n)
        fit = ols_fit(X, y)
        b, se = ols_normal_equations(X, y)
        np.testing.assert_allclose(fit.coefficients, b, rtol=1e-8)
        np.testing.assert_allclose(fit.standard_errors, se, rtol=1e-8)


def test_criterion_07_t_tail():
    for df in (1, 3, 4, 10, 30, 120, 1e5):
        for t in np.linspace(0.0, 6.0, 61):
            assert abs(t_tail_two_sided(float(t), df) - t_tail_quad(float(t), df)) <= 1e-6


def test_criterion_08_estimator_recovery():
    cfg = SimConfig(tau=-3145.0, noise_sd=8000.0, households_per_cell=80, seed=RECOVERY_SEED)
    effect = recovery_experiment(cfg, 500)
    assert effect.failures == 0
    assert abs(effect.bias) < 0.05 * 3145.0
    assert 0.93 <= effect.coverage <= 0.97
    null = recovery_experiment(SimConfig(tau=0.0, noise_sd=8000.0, households_per_cell=80, seed=RECOVERY_SEED), 500)
    assert 0.03 <= null.rejection_rate <= 0.07


def ledger_fixture():
    """Twelve households; the expected ledger is traced by hand in the comments."""
    b = SurveyBuilder()
    b.both("H01", distance_mi=0.2, cars=[Car()])                        # retained, experimental
    b.both("H02", distance_mi=0.4, cars=[Car(), Car("V2", fuel="hybrid", make="M", model="Hybrid", year=2012)])
    b.both("H03", distance_mi=1.5, cars=[Car(body="truck", weight=3450.0)])  # retained, control
    b.both("H04", distance_mi=2.0, cars=[])                             # retained, no vehicles
    b.add("H05", 1, cars=[Car(make=None)])                              # w1 MissingVehicleInfo
    b.add("H05", 2, cars=[Car()])                                       # w2 Unmatched
    b.add("H06", 1, cars=[Car()])                                       # w1 Unmatched
    b.add("H06", 2, cars=[Car(body="truck")])                           # w2 MissingVehicleInfo (no weight)
    b.add("H07", 1, cars=[Car(readings=[1000, 1020, None, None, None, None, None])])  # w1 IncompleteVmt
    b.add("H07", 2, cars=[Car()])                                       # w2 Unmatched
    b.add("H08", 1, cars=[Car()])                                       # w1 Unmatched
    b.add("H08", 2, cars=[Car(readings=steady(250.0))])                 # w2 IncompleteVmt (outlier)
    b.add("H09", 1, cars=[Car(year=1955)])                              # w1 NoFactorAvailable
    b.add("H09", 2, cars=[Car()])                                       # w2 Unmatched
    b.add("H10", 1, cars=[Car(model=None)])                             # w1 MissingVehicleInfo
    b.add("H10", 2, cars=[Car(year=1955)])                              # w2 NoFactorAvailable
    b.add("H11", 1, cars=[Car()])                                       # w1 Unmatched, absent in wave 2
    b.add("H12", 1, cars=[Car(model=None, readings=steady(250.0))])     # w1 MissingVehicleInfo wins
    b.add("H12", 2, cars=[Car(year=1955, readings=steady(250.0))])      # w2 IncompleteVmt wins
    return b.build()


EXPECTED_LEDGER = {
    1: {"MissingVehicleInfo": 3, "IncompleteVmt": 1, "NoFactorAvailable": 1, "Unmatched": 3},
    2: {"MissingVehicleInfo": 1, "IncompleteVmt": 2, "NoFactorAvailable": 1, "Unmatched": 3},
}


def test_criterion_09_ledger_fixture():
    panel = build_balanced_panel(ledger_fixture(), FACTORS, STATIONS, RunConfig())
    got = {w: {r.value: panel.ledger[(w, r)] for r in ExclusionReason} for w in (1, 2)}
    assert got == EXPECTED_LEDGER
    assert panel.household_ids == ["H01", "H02", "H03", "H04"]
    ids = {w: sorted(o.household_id for o in panel.wave(w)) for w in (1, 2)}
    assert ids[1] == ids[2]
    assert panel.input_counts == {1: 12, 2: 11}
    for w in (1, 2):
        assert panel.input_counts[w] == len(panel.wave(w)) + panel.ledger_total(w)


PROPERTIES = (
    "test_ols_shift_equivariance",
    "test_ols_scale_equivariance",
    "test_saturated_model_identity",
    "test_catchment_monotone_in_radius",
    "test_experimental_count_non_decreasing",
    "test_emissions_non_negative_and_affine",
    "test_household_emission_additive_and_order_free",
)


def test_criterion_10_invariant_suite():
    for name in PROPERTIES:
        before = props.CALLS[name]
        getattr(props, name)()
        assert props.CALLS[name] - before >= 1000, name
