from __future__ import annotations

import warnings

import pytest

from railcarbon.errors import MalformedRow, NegativeInput, NegativeTrips, ZeroOperational
from railcarbon.lifecycle import (
    LifecycleComponents,
    ModeFactors,
    ScaleBelowOneWarning,
    household_transit_co2,
    load_lifecycle,
    net_effect_summary,
    per_trip_lifecycle,
    per_trip_operational,
    rail_countervailing_bound,
    rail_trip_change,
    scale_factor,
    transit_emission_table,
)
from railcarbon.sample import write_lifecycle_csv

GOLD = LifecycleComponents(0.0, 120.73, 3.29, 1.31, 53.72)
ORANGE = LifecycleComponents(53.91, 0.0, 14.63, 19.09, 19.84)


def rail(scale=1.44):
    return ModeFactors("rail", 99.3, 6.81, scale)


def bus(scale=1.57):
    return ModeFactors("bus", 224.1, 4.2, scale)


def test_per_trip_operational():
    assert round(per_trip_operational(99.3, 6.81), 1) == 676.2
    assert round(per_trip_operational(224.1, 4.2), 1) == 941.2
    assert per_trip_operational(99.3, 0) == 0


def test_per_trip_operational_negative():
    with pytest.raises(NegativeInput):
        per_trip_operational(-1, 2)


def test_component_totals():
    assert GOLD.gross == pytest.approx(179.05, abs=1e-9)
    assert GOLD.operational == pytest.approx(124.02, abs=1e-9)
    assert ORANGE.gross == pytest.approx(107.47, abs=1e-9)
    assert ORANGE.operational == pytest.approx(68.54, abs=1e-9)


def test_scale_factors():
    assert scale_factor(GOLD) == pytest.approx(1.44, abs=0.005)
    assert scale_factor(ORANGE) == pytest.approx(1.57, abs=0.005)
    assert scale_factor(GOLD, decimals=2) == 1.44
    assert scale_factor(LifecycleComponents(10, 5, 2, 0, 0)) == 1.0


def test_scale_factor_zero_operational():
    with pytest.raises(ZeroOperational):
        scale_factor(LifecycleComponents(0, 0, 0, 1, 1))


def test_negative_component():
    with pytest.raises(NegativeInput):
        LifecycleComponents(0, -1, 0, 0, 0)


def test_per_trip_lifecycle():
    assert per_trip_lifecycle(676.2, 1.44) == pytest.approx(973.7, abs=0.1)
    assert per_trip_lifecycle(941.2, 1.57) == pytest.approx(1477.7, abs=0.1)
    assert per_trip_lifecycle(512.0, 1.0) == 512.0


def test_scale_below_one_warns():
    with pytest.warns(ScaleBelowOneWarning):
        assert per_trip_lifecycle(100.0, 0.9) == pytest.approx(90.0)


def test_household_transit_co2():
    assert household_transit_co2(0, 0.15, bus(), rail()) == pytest.approx(146.1, abs=0.5)
    assert household_transit_co2(1, 0, bus(), rail()) == pytest.approx(1477.7, abs=0.1)
    assert household_transit_co2(0, 0, bus(), rail()) == 0


def test_household_transit_negative():
    with pytest.raises(NegativeTrips):
        household_transit_co2(-1, 0, bus(), rail())


def test_net_effect():
    n = net_effect_summary(-3145.0, 146.0)
    assert n.net == pytest.approx(-2999.0)
    assert n.offset_share == pytest.approx(0.046, abs=0.001)
    assert net_effect_summary(-3145.0, 0.0).offset_share == 0
    z = net_effect_summary(0.0, 100.0)
    assert z.net == 100 and z.offset_share is None


def test_load_lifecycle_sample(tmp_path):
    path = write_lifecycle_csv(tmp_path / "lc.csv")
    rounded = load_lifecycle(path, scale_decimals=2)
    assert rounded["rail"].scale_factor == 1.44 and rounded["bus"].scale_factor == 1.57
    assert rounded["rail"].per_trip_lifecycle == pytest.approx(973.7, abs=0.1)
    assert rounded["bus"].per_trip_lifecycle == pytest.approx(1477.7, abs=0.1)
    full = load_lifecycle(path)
    assert full["rail"].scale_factor == pytest.approx(179.05 / 124.02, rel=1e-12)


def test_load_lifecycle_scale_only(tmp_path):
    p = tmp_path / "lc.csv"
    p.write_text("mode,g_per_passenger_mile,avg_trip_miles,scale_factor\nrail,99.3,6.81,1.44\nbus,224.1,4.2,1.57\n")
    f = load_lifecycle(p)
    assert f["rail"].components is None and f["bus"].scale_factor == 1.57


def test_components_override_scale(tmp_path):
    p = tmp_path / "lc.csv"
    write_lifecycle_csv(p)
    p.write_text(p.read_text().replace("rail,99.3,6.81,,", "rail,99.3,6.81,9.9,"))
    assert load_lifecycle(p, scale_decimals=2)["rail"].scale_factor == 1.44


@pytest.mark.parametrize("body", [
    "rail,99.3,6.81,1.44\n",                                  # bus row missing
    "rail,99.3,6.81,1.44\nbus,224.1,4.2,\n",                 # no scale and no components
    "rail,99.3,6.81,1.44\nbus,abc,4.2,1.5\n",                # non-numeric
    "rail,99.3,6.81,1.44\nrail,99.3,6.81,1.44\n",            # duplicate mode
    "tram,99.3,6.81,1.44\nbus,224.1,4.2,1.57\n",             # unknown mode
])
def test_load_lifecycle_rejects(tmp_path, body):
    p = tmp_path / "lc.csv"
    p.write_text("mode,g_per_passenger_mile,avg_trip_miles,scale_factor\n" + body)
    with pytest.raises(MalformedRow):
        load_lifecycle(p)


def test_transit_table_and_bound(sample_panel, tmp_path):
    factors = load_lifecycle(write_lifecycle_csv(tmp_path / "lc.csv"), scale_decimals=2)
    table = transit_emission_table(sample_panel, factors)
    assert [t.group for t in table] == [0, 1]
    for t in table:
        assert t.wave1.households == t.wave2.households == 80
        assert t.difference == pytest.approx(t.wave2.mean_g_per_day - t.wave1.mean_g_per_day)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        bound = rail_countervailing_bound(sample_panel, factors["rail"])
    assert bound == pytest.approx(rail_trip_change(sample_panel) * factors["rail"].per_trip_lifecycle)
