import math
from dataclasses import replace

import pytest

from celldim.dimensioning import (CSV_COLUMNS, FIGURES, RunOptions, SweepPoint, UnicastDimensioner,
                                  dimension, dimension_broadcast_only, dimension_hybrid, make_points,
                                  rows_csv, run_point, spectrum_saving, sweep, unicast_traffic)
from celldim.scenario import ServiceConfig, efficiency_profile, preset_scenario

FAST = RunOptions(n_samples=20_000, unicast_samples=5_000, load_nodes=32, load_draws=300)
SVC = ServiceConfig()


def test_spectrum_saving():
    assert spectrum_saving(320.0) == 0.0
    assert spectrum_saving(120.0) == 200.0
    assert spectrum_saving(400.0) == -80.0
    with pytest.raises(ValueError):
        spectrum_saving(-1.0)


def test_unit_ese_hook():
    r = dimension_broadcast_only(preset_scenario("rural"), SVC, ese_override=(1.0, 1.0))
    assert r.bw_required == pytest.approx(343.80, abs=1e-6)
    assert r.bw_saving == 320.0 - r.bw_required


def test_no_regional_programs():
    c = replace(SVC, n_regional_hd=0)
    r = dimension_broadcast_only(preset_scenario("urban"), c, seed=1, opts=FAST)
    assert r.bw_regional_sfn == 0.0 and r.bw_national_sfn > 0


def test_rural_legacy_sixteen_km_exceeds_band():
    r = dimension_broadcast_only(preset_scenario("rural", isd=16000.0), SVC, seed=1, opts=FAST)
    assert r.bw_required > 320.0 and r.bw_saving < 0


def test_zero_unicast_traffic_is_broadcast_only():
    s = preset_scenario("urban", dtt_penetration=0.0)
    r = dimension_hybrid(s, SVC, seed=2, opts=FAST)
    assert r.bw_unicast == 0.0
    ese_r = 3 * SVC.n_broadcast_hybrid * SVC.r_hd / r.bw_regional_sfn
    assert r.bw_required == pytest.approx(3 * 3 * 7.14 / ese_r)


def test_unicast_term_scales_with_reuse():
    s = preset_scenario("urban", isd=300.0, dtt_penetration=0.03)
    r = dimension_hybrid(s, SVC, seed=3, opts=FAST)
    rho, hd = unicast_traffic(s, SVC)
    per_colour = UnicastDimensioner(s, SVC, efficiency_profile(s, "unicast"), rho, hd, 3,
                                    FAST).search().bw
    assert r.bw_unicast == pytest.approx(s.reuse_K * per_colour, abs=1e-12)
    assert r.aggregate_blocking <= SVC.blocking_target


def test_infeasible_when_ceiling_hit():
    s = preset_scenario("urban", isd=1500.0)
    r = dimension_hybrid(s, SVC, seed=1, opts=FAST)
    assert r.status == "infeasible" and math.isinf(r.bw_required) and not r.feasible


@pytest.mark.parametrize("morph,isd", [("rural", 10000.0), ("urban", 1000.0)])
def test_more_receive_antennas_never_hurt(morph, isd):
    reqs = [dimension(preset_scenario(morph, isd=isd, rx_antenna_count=m), SVC, "broadcast", 4,
                      FAST).bw_required for m in (1, 4, 8)]
    assert reqs[0] >= reqs[1] >= reqs[2]


def test_hybrid_constant_in_added_programs():
    s = preset_scenario("urban", isd=300.0, dtt_penetration=0.02)
    base = dimension_hybrid(s, SVC, seed=5, opts=FAST)
    for extra in (10, 40):
        r = dimension_hybrid(s, replace(SVC, extra_programs=extra), seed=5, opts=FAST)
        assert r.bw_required == base.bw_required


def test_broadcast_grows_with_added_programs():
    s = preset_scenario("urban")
    reqs = [dimension_broadcast_only(s, replace(SVC, extra_programs=e), seed=5, opts=FAST).bw_required
            for e in (0, 10, 20)]
    assert reqs[0] < reqs[1] < reqs[2]


def test_csv_header_is_stable():
    assert rows_csv([]).strip() == ",".join(CSV_COLUMNS)
    assert CSV_COLUMNS == ("axis_value", "mode", "antennas", "bw_national_mhz", "bw_regional_mhz",
                           "bw_unicast_mhz", "bw_required_mhz", "bw_saving_mhz", "sinr1pct_nat_db",
                           "sinr1pct_reg_db", "load_x", "blocking", "status")


def test_sweep_deterministic_and_ordered():
    pts = make_points("isd", [300.0, 700.0], preset_scenario("urban"), SVC,
                      modes=("broadcast",), antennas=("4x1", "4x4"))
    assert [(p.antennas, p.value) for p in pts] == [("4x1", 300.0), ("4x1", 700.0),
                                                    ("4x4", 300.0), ("4x4", 700.0)]
    a = rows_csv(sweep(pts, seed=9, opts=FAST))
    b = rows_csv(sweep(pts, seed=9, opts=FAST, jobs=2))
    assert a == b
    assert len(a.splitlines()) == 5


def test_point_errors_are_recorded():
    s = preset_scenario("urban")
    row = run_point(SweepPoint("isd", 500.0, "nonsense", "4x1", s, SVC), 1, FAST)
    assert row.result is None and "mode" in row.error
    line = rows_csv([row]).splitlines()[1]
    assert line.startswith("500.0,nonsense,4x1,") and "error" in line


def test_infeasible_row_formatting():
    s = preset_scenario("urban", isd=1500.0)
    row = run_point(SweepPoint("isd", 1500.0, "hybrid", "4x1", s, SVC), 1, FAST)
    fields = rows_csv([row]).splitlines()[1].split(",")
    assert fields[5] == "inf" and fields[-1] == "infeasible"


def test_efficiency_overrides_applied():
    s = preset_scenario("urban")
    a = dimension(s, SVC, "broadcast", 1, FAST)
    b = dimension(s, SVC, "broadcast", 1, FAST, {"broadcast": {"fading_margin": 0.0}})
    assert b.bw_required < a.bw_required


def test_figure_presets():
    assert FIGURES["fig5"].values[0] == 4000.0 and FIGURES["fig5"].values[-1] == 16000.0
    assert FIGURES["fig5"].antennas == ("4x1", "4x4", "8x8")
    assert FIGURES["fig6"].modes == ("hybrid",)
    assert FIGURES["fig8"].axis == "penetration"
    assert FIGURES["fig9"].axis == "extra_programs"


def test_empty_sweep_rejected():
    with pytest.raises(ValueError):
        make_points("isd", [], preset_scenario("urban"), SVC)
