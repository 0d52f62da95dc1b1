from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from celldim import propagation as prop
from celldim.geometry import UserPosition, build_layout
from celldim.scenario import EfficiencyProfile, ServiceConfig, efficiency_profile, preset_scenario
from celldim.sfn import (WeightParams, broadcast_bandwidth, broadcast_bandwidth_split,
                         broadcast_ese, program_counts, sfn_sinr, sfn_split,
                         simulate_sinr_distribution, spectral_efficiency, weight)

P = WeightParams(400.0 / 3.0, 100.0 / 3.0)


def test_weight_examples():
    assert weight(0.0, P) == 1.0
    assert weight(-P.t_u / 2, P) == pytest.approx(0.5)
    assert weight(P.t_cp + P.t_u, P) == 0.0
    assert weight(P.t_cp + P.t_u / 4, P) == pytest.approx(0.75)
    assert weight(-P.t_u - 1e-9, P) == 0.0


@settings(max_examples=100, deadline=None)
@given(tau=st.floats(-1e4, 1e4), t_u=st.floats(1.0, 500.0), frac=st.floats(0.0, 0.99))
def test_weight_bounded(tau, t_u, frac):
    w = weight(tau, WeightParams(t_u, frac * t_u))
    assert 0.0 <= w <= 1.0


def test_weight_params_validation():
    with pytest.raises(ValueError):
        WeightParams(10.0, 10.0)
    with pytest.raises(ValueError):
        WeightParams(0.0, 0.0)
    assert weight(5.0, WeightParams(10.0, 0.0)) == pytest.approx(0.5)


def _profile(beta, xi, margin=5.0):
    return EfficiencyProfile(beta_eff=beta, xi_eff=xi, fading_margin=margin)


def test_split_single_site_is_noise_limited():
    c, d = sfn_split([[1000.0]], [[2e-9]], [True], P)
    assert (c[0], d[0]) == (2e-9, 0.0)


def test_split_equidistant_sites_add_constructively():
    c, d = sfn_split([[800.0, 800.0]], [[1e-9, 1e-9]], [True, True], P)
    assert c[0] == pytest.approx(2e-9) and d[0] == 0.0


def test_split_distant_site_is_pure_interference():
    far = 1000.0 + prop.SPEED_OF_LIGHT_M_PER_US * (P.t_cp + P.t_u + 1.0)
    c, d = sfn_split([[1000.0, far]], [[1e-9, 1e-9]], [True, True], P)
    n0 = 1e-10
    assert c[0] / (d[0] + n0) == pytest.approx(1e-9 / (1e-9 + n0))


def test_split_conserves_power():
    rng = np.random.default_rng(0)
    dist = rng.uniform(100, 60_000, (50, 19))
    rx = rng.uniform(0, 1, (50, 19))
    c, d = sfn_split(dist, rx, np.ones(19, bool), P)
    np.testing.assert_allclose(c + d, rx.sum(axis=1), rtol=1e-12)


def test_split_sync_to_nearest_active_site():
    # nearest site silent: reference moves to the next one
    c, d = sfn_split([[10.0, 5000.0]], [[1.0, 1.0]], [False, True], P)
    assert (c[0], d[0]) == (1.0, 0.0)


def test_sfn_sinr_matches_manual():
    s = preset_scenario("urban")
    lay = build_layout(500.0, 1)
    xy = np.array([100.0, 50.0])
    dist = np.hypot(*(lay.site_positions - xy).T)
    sh = np.linspace(-3, 3, lay.n_sites)
    got = sfn_sinr(UserPosition(xy, dist), lay, s, sh)
    rx = prop.received_power(dist, s, sh)
    tau = (dist - dist.min()) / prop.SPEED_OF_LIGHT_M_PER_US
    w = weight(tau, WeightParams.from_scenario(s))
    assert got == pytest.approx((w * rx).sum() / (((1 - w) * rx).sum() + prop.noise_power(s)))


def test_sinr_monotone_in_cyclic_prefix():
    rng = np.random.default_rng(1)
    dist = rng.uniform(100, 80_000, (200, 37))
    rx = rng.uniform(0, 1, (200, 37))
    prev = None
    for t_cp in (0.0, 10.0, 33.0, 60.0, 120.0):
        c, d = sfn_split(dist, rx, np.ones(37, bool), WeightParams(133.0, t_cp))
        sinr = c / (d + 1e-3)
        if prev is not None:
            assert np.all(sinr >= prev - 1e-15)
        prev = sinr


def test_regional_never_better_at_matched_seed():
    s = preset_scenario("rural", isd=8000.0)
    nat = simulate_sinr_distribution(build_layout(8000.0, 3), s, 20_000, 4)
    reg = simulate_sinr_distribution(build_layout(8000.0, 3, True), s, 20_000, 4, regional=True)
    # only the coverage tail is ordered: silenced sites also stop interfering
    assert reg.percentile(0.01) <= nat.percentile(0.01)


def test_no_shadowing_centre_user_deterministic():
    s = preset_scenario("urban", shadowing_sigma=0.0)
    lay = build_layout(500.0, 2)
    user = UserPosition(np.zeros(2), np.hypot(*lay.site_positions.T))
    a = sfn_sinr(user, lay, s)
    assert a == sfn_sinr(user, lay, s)


def test_minimum_samples():
    with pytest.raises(ValueError):
        simulate_sinr_distribution(build_layout(500.0, 1), preset_scenario("urban"), 100, 1)


def test_percentile_stable_across_seeds():
    s = preset_scenario("rural")
    lay = build_layout(s.isd, s.interferer_rings)
    vals = [simulate_sinr_distribution(lay, s, 100_000, seed).percentile_db(0.01)
            for seed in range(10)]
    assert max(vals) - min(vals) <= 0.6  # within +-0.3 dB of the middle


def test_cdf_csv():
    s = preset_scenario("urban")
    dist = simulate_sinr_distribution(build_layout(500.0, 1), s, 10_000, 1)
    lines = dist.cdf_csv(11).splitlines()
    assert lines[0] == "sinr_db,cdf" and len(lines) == 12


def test_ese_examples():
    assert broadcast_ese(10 ** 0.5, _profile(0.75, 1.0)) == pytest.approx(0.75)
    assert broadcast_ese(1e30, _profile(0.65, 8.0)) == pytest.approx(5.85)
    assert broadcast_ese(10.0, _profile(0.65, 0.5)) == pytest.approx(0.889, abs=1e-3)
    with pytest.raises(ValueError):
        broadcast_ese(0.0, _profile(0.65, 1.0))


def test_more_antennas_never_lower_ese():
    sinr = np.geomspace(1e-3, 1e6, 50)
    prev = None
    for m_r in (1, 4, 8):
        e = spectral_efficiency(sinr, efficiency_profile(preset_scenario("rural", rx_antenna_count=m_r),
                                                         "broadcast"))
        if prev is not None:
            assert np.all(e >= prev)
        prev = e


def test_broadcast_bandwidth_unit_ese():
    c = ServiceConfig()
    assert program_counts(c) == (33, 24, 3, 0)
    assert broadcast_bandwidth(c, 1.0, 1.0, 3) == pytest.approx(343.80, abs=1e-6)
    assert broadcast_bandwidth_split(c, 1.0, 1.0, 3) == pytest.approx((279.54, 64.26))
    assert broadcast_bandwidth(c, 2.0, 2.0, 3) == pytest.approx(343.80 / 2)


def test_broadcast_bandwidth_zero_programs():
    c = ServiceConfig(n_hd_total=0, n_sd_total=0, n_regional_hd=0, n_broadcast_hybrid=0)
    assert broadcast_bandwidth(c, 1.0, 1.0, 3) == 0.0


def test_extra_programs_national_or_regional():
    c = replace(ServiceConfig(), extra_programs=10)
    assert program_counts(c) == (43, 24, 3, 0)
    assert program_counts(replace(c, extra_regional=True)) == (33, 24, 13, 0)
