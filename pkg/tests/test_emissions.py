from __future__ import annotations

import numpy as np
import pytest

from railcarbon.emissions import (
    VehicleEmission,
    classify_vehicle,
    electrified_daily_co2,
    equivalent_test_weight,
    gasoline_daily_co2,
    household_daily_co2,
    lookup_gasoline_factor,
    vehicle_emission,
    write_emissions_csv,
)
from railcarbon.errors import MissingCurbWeight, NegativeVmt, NoFactorAvailable, NonPositiveWeight
from railcarbon.records import ElectrifiedFactor, FactorTables, GasolineFactor, VehicleRecord


def vehicle(body="auto", weight=None, fuel="gasoline", make="M", model="X", year=2005, vid="V1"):
    return VehicleRecord("H1", 1, vid, make, model, year, fuel, body, weight)


FACTORS = FactorTables(
    gasoline={
        (2011, "LDA", 2005): GasolineFactor(400.0, 300.0),
        (2012, "MCY", 2008): GasolineFactor(180.0, 40.0),
        (2011, "LDT1", 2005): GasolineFactor(480.0, 330.0),
    },
    electrified={("M", "X", 2012): ElectrifiedFactor(250.0)},
    ldt_split_threshold_lb=3750.0,
)


@pytest.mark.parametrize("curb, etw", [(3450, 3750), (5000, 5300)])
def test_equivalent_test_weight(curb, etw):
    assert equivalent_test_weight(curb) == etw


@pytest.mark.parametrize("curb", [0, -10])
def test_equivalent_test_weight_rejects(curb):
    with pytest.raises(NonPositiveWeight):
        equivalent_test_weight(curb)


def test_classify_fixed_bodies():
    assert classify_vehicle(vehicle("auto"), 3750) == "LDA"
    assert classify_vehicle(vehicle("motorcycle"), 3750) == "MCY"


def test_classify_truck_boundary_is_ldt1():
    assert classify_vehicle(vehicle("truck", 3450), 3750) == "LDT1"
    assert classify_vehicle(vehicle("truck", 3451), 3750) == "LDT2"


def test_classify_truck_without_weight():
    with pytest.raises(MissingCurbWeight):
        classify_vehicle(vehicle("truck", None), 3750)


def test_lookup_hits_and_misses():
    assert lookup_gasoline_factor("LDA", 2005, 2011, FACTORS) == GasolineFactor(400.0, 300.0)
    assert lookup_gasoline_factor("MCY", 2008, 2012, FACTORS) == GasolineFactor(180.0, 40.0)
    with pytest.raises(NoFactorAvailable):
        lookup_gasoline_factor("LDA", 1949, 2011, FACTORS)


@pytest.mark.parametrize("run, start, vmt, expected", [
    (400, 300, 20, 8300),
    (400, 300, 0, 300),
    (0, 0, 50, 0),
])
def test_gasoline_daily_co2(run, start, vmt, expected):
    assert gasoline_daily_co2(GasolineFactor(run, start), vmt) == expected


@pytest.mark.parametrize("rate, vmt, expected", [(250, 10, 2500), (250, 0, 0), (0, 40, 0)])
def test_electrified_daily_co2(rate, vmt, expected):
    assert electrified_daily_co2(ElectrifiedFactor(rate), vmt) == expected


def test_negative_vmt_rejected():
    with pytest.raises(NegativeVmt):
        gasoline_daily_co2(GasolineFactor(1, 1), -0.1)
    with pytest.raises(NegativeVmt):
        electrified_daily_co2(ElectrifiedFactor(1), float("nan"))


def test_household_sum():
    e = lambda vid, g: VehicleEmission("H", 1, vid, "LDA", 0.0, g)  # noqa: E731
    assert household_daily_co2([e("a", 8300), e("b", 2500)]) == 10800
    assert household_daily_co2([]) == 0
    assert household_daily_co2([e("a", 8300)]) == 8300


def test_vehicle_emission_routes_by_fuel():
    gas = vehicle_emission(vehicle(), 20.0, 2011, FACTORS)
    assert (gas.vehicle_class, gas.daily_co2_g) == ("LDA", 8300.0)
    hyb = vehicle_emission(vehicle(fuel="hybrid", year=2012), 10.0, 2011, FACTORS)
    assert (hyb.vehicle_class, hyb.daily_co2_g) == ("Electrified", 2500.0)
    truck = vehicle_emission(vehicle("truck", 3450), 10.0, 2011, FACTORS)
    assert (truck.vehicle_class, truck.daily_co2_g) == ("LDT1", 5130.0)


def test_emissions_csv(tmp_path):
    rows = [VehicleEmission("H1", 1, "V1", "LDA", 20.0, 8300.0)]
    text = write_emissions_csv(rows, tmp_path / "e.csv").read_text()
    assert text.splitlines() == ["household_id,wave,vehicle_id,class,daily_vmt,daily_co2_g",
                                 "H1,1,V1,LDA,20.0,8300.0"]


def test_sample_panel_reproduces_cell_means(sample_panel):
    """Constructed per-cell targets come back as the published group-by-wave means."""
    targets = {(0, 1): 9992.7, (1, 1): 9371.1, (0, 2): 10815.9, (1, 2): 7877.5}
    for (g, w), mu in targets.items():
        cell = sample_panel.cell(g, w)
        assert len(cell) == 80
        assert np.mean([o.daily_co2_g for o in cell]) == pytest.approx(mu, abs=0.05)
    w1 = np.mean([o.daily_co2_g for o in sample_panel.wave(1)])
    w2 = np.mean([o.daily_co2_g for o in sample_panel.wave(2)])
    assert round(w1, 1) == 9681.9
    assert round(w2, 1) == 9346.7
