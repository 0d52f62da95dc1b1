from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from celldim.geometry import hexagon_area
from celldim.scenario import ServiceConfig, efficiency_profile, preset_scenario
from celldim.traffic import (AllOutageError, ProgramCatalog, ViewerModel, build_classes,
                             expected_viewers, popularity_model, tv_receivers, unicast_intensity)

SVC = ServiceConfig()
PROF = efficiency_profile(preset_scenario("urban"), "unicast")


def test_top_programs_share_half():
    cat = popularity_model(SVC)
    assert len(cat.programs) == 60
    for p in cat.programs[:3]:
        assert p.popularity == pytest.approx(1 / 6) and p.is_hd and p.delivery == "broadcast"
    assert cat.unicast_mass == pytest.approx(0.5)
    assert sum(p.popularity for p in cat.programs) == pytest.approx(1.0, abs=1e-12)


def test_tail_is_zipf_within_family():
    cat = popularity_model(SVC)
    hd = [p.popularity for p in cat.programs[3:] if p.is_hd]
    assert all(a > b for a, b in zip(hd, hd[1:]))
    # ranks 4 and 5 are both HD: ratio follows 1/rank
    assert cat.programs[3].popularity / cat.programs[4].popularity == pytest.approx(5 / 4)


@pytest.mark.parametrize("extra", [0, 1, 20, 200])
def test_extra_programs_keep_masses(extra):
    base = popularity_model(SVC)
    cat = popularity_model(SVC, extra_programs=extra)
    assert len(cat.programs) == 60 + extra
    assert cat.mass("broadcast") == pytest.approx(0.5, abs=1e-12)
    assert cat.unicast_hd_share == pytest.approx(base.unicast_hd_share, abs=1e-12)


def test_catalog_must_sum_to_one():
    with pytest.raises(ValueError):
        ProgramCatalog(tuple(popularity_model(SVC).programs[:10]))


def test_expected_viewers_rural():
    s = preset_scenario("rural", isd=12000.0)
    area = hexagon_area(12000.0) / 1e6
    assert area == pytest.approx(124.71, abs=0.01)
    assert tv_receivers(s, area) == pytest.approx(71.26, abs=0.01)
    assert expected_viewers(s, area) == pytest.approx(28.5, abs=0.01)


def test_expected_viewers_urban_and_household_base():
    s = preset_scenario("urban", isd=500.0)
    area = hexagon_area(500.0) / 1e6
    assert tv_receivers(s, area) == pytest.approx(154.6, abs=0.1)
    assert expected_viewers(s, area) == pytest.approx(61.9, abs=0.1)
    hh = replace(s, viewer_base="household")
    assert expected_viewers(hh, area) == pytest.approx(61.9 / 2, abs=0.1)
    assert expected_viewers(replace(s, population_density=0.0), area) == 0.0


def test_unicast_intensity():
    cat = popularity_model(SVC)
    assert unicast_intensity(ViewerModel(28.5), cat) == pytest.approx(14.25)


@settings(max_examples=30, deadline=None)
@given(t_s=st.floats(1.0, 1e5), e_n=st.floats(0.0, 1e4))
def test_intensity_independent_of_session_length(t_s, e_n):
    cat = popularity_model(SVC)
    a = unicast_intensity(ViewerModel(e_n, session_length=t_s, subsession_length=t_s / 2), cat)
    assert a == pytest.approx(e_n * 0.5, rel=1e-12, abs=1e-12)


def test_viewer_model_rates():
    v = ViewerModel(30.0, session_length=3600.0, subsession_length=900.0)
    assert v.arrival_rate == pytest.approx(30 / 3600)
    assert v.exit_prob == pytest.approx(0.25)
    with pytest.raises(ValueError):
        ViewerModel(1.0, session_length=10.0, subsession_length=20.0)


def _sinr(n=20_000, seed=0):
    return 10 ** (np.random.default_rng(seed).normal(1.5, 1.2, n))


def test_single_class():
    cl = build_classes(_sinr(), 100, PROF, SVC, 10.0, 1.0)
    assert len(cl.classes) == 1
    assert cl.classes[0].rho == pytest.approx(10.0 - cl.outage_rho)


def test_traffic_conserved():
    cl = build_classes(_sinr(), 5, PROF, SVC, 14.25, 0.8)
    assert cl.total_rho + cl.outage_rho == pytest.approx(14.25, abs=1e-9)
    assert cl.total_rho <= 14.25
    assert 0 < cl.outage_rho


def test_hd_sd_split():
    cl = build_classes(10 ** np.linspace(1, 4, 1000), 10, PROF, SVC, 5.0, 0.6)
    hd = sum(c.rho for c in cl.family(True))
    sd = sum(c.rho for c in cl.family(False))
    assert hd / (hd + sd) == pytest.approx(0.6)


@pytest.mark.parametrize("hd", [True, False])
def test_bandwidth_strictly_decreasing_within_family(hd):
    fam = build_classes(_sinr(), 5, PROF, SVC, 14.25, 0.7).family(hd)
    b = [c.b for c in fam]
    assert all(x > y for x, y in zip(b, b[1:]))


def test_bucket_bandwidth_set_by_worst_served_user():
    s = np.sort(_sinr(1000, 3))
    cl = build_classes(s, 50, PROF, SVC, 2.0, 1.0)
    from celldim.sfn import spectral_efficiency
    ese = spectral_efficiency(s, PROF)
    served = ese * SVC.link_bw_cap >= SVC.r_hd
    upper = s[500:][served[500:]]
    assert cl.classes[-1].b == pytest.approx(SVC.r_hd / spectral_efficiency(upper[0], PROF))


def test_all_outage_raises():
    with pytest.raises(AllOutageError):
        build_classes(np.full(100, 1e-6), 5, PROF, SVC, 3.0, 0.5)


def test_delta_must_divide_hundred():
    with pytest.raises(ValueError):
        build_classes(_sinr(), 7, PROF, SVC, 3.0, 0.5)


def test_classes_csv():
    text = build_classes(_sinr(), 25, PROF, SVC, 3.0, 0.5).csv()
    assert text.splitlines()[0] == "k,family,sinr_edge_db,b_k_mhz,rho_k"
