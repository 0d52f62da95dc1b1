"""Per-link propagation loss, receive-antenna directivity and noise power.

All powers are on the 20 MHz reference bandwidth; SINR is therefore free of
the actual allocated bandwidth.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .scenario import Scenario

log = logging.getLogger(__name__)

MIN_DISTANCE_M = 10.0
SPEED_OF_LIGHT_M_PER_US = 299.792458

_clamp_logged = False


def _log_clamp_once():
    global _clamp_logged
    if not _clamp_logged:
        log.info("path loss: distances below %.0f m clamped", MIN_DISTANCE_M)
        _clamp_logged = True


def _hata_mobile_correction(f: float, hm: float, large_city: bool) -> float:
    if large_city:
        if f >= 300.0:
            return 3.2 * math.log10(11.75 * hm) ** 2 - 4.97
        return 8.29 * math.log10(1.54 * hm) ** 2 - 1.1
    return (1.1 * math.log10(f) - 0.7) * hm - (1.56 * math.log10(f) - 0.8)


def _distance_exponent(d_km, f: float, hb: float):
    """Exponent on log10(d) extending Hata beyond 20 km (ITU-R P.529 form)."""
    d_km = np.asarray(d_km, dtype=float)
    hb_eff = hb / math.sqrt(1.0 + 7e-6 * hb ** 2)
    far = np.log10(np.maximum(d_km, 20.0) / 20.0) ** 0.8
    return 1.0 + (0.14 + 1.87e-4 * f + 1.07e-3 * hb_eff) * far


def _log_distance(d_km, f: float, hb: float, extended: bool):
    d_km = np.asarray(d_km, dtype=float)
    ld = np.log10(d_km)
    if not extended:
        return ld
    # ld > 1.3 wherever the exponent differs from 1, so the power is well defined.
    return np.where(d_km > 20.0, np.abs(ld) ** _distance_exponent(d_km, f, hb), ld)


def hata_urban(d_km, f: float, hb: float, hm: float, large_city: bool = False,
               extended: bool = True):
    """Okumura-Hata urban median loss in dB (f in MHz, heights in m)."""
    a_hm = _hata_mobile_correction(f, hm, large_city)
    return (69.55 + 26.16 * math.log10(f) - 13.82 * math.log10(hb) - a_hm
            + (44.9 - 6.55 * math.log10(hb)) * _log_distance(d_km, f, hb, extended))


def hata_suburban(d_km, f: float, hb: float, hm: float, extended: bool = True):
    return hata_urban(d_km, f, hb, hm, extended=extended) - 2.0 * math.log10(f / 28.0) ** 2 - 5.4


def hata_open(d_km, f: float, hb: float, hm: float, extended: bool = True):
    """Okumura-Hata open/rural area variant."""
    lf = math.log10(f)
    return hata_urban(d_km, f, hb, hm, extended=extended) - 4.78 * lf ** 2 + 18.33 * lf - 40.94


def cost231_urban(d_km, f: float, hb: float, hm: float, c_m: float = 3.0,
                  extended: bool = True):
    """COST-231 Hata, metropolitan centre (``c_m`` = 3 dB)."""
    a_hm = _hata_mobile_correction(f, hm, large_city=True)
    return (46.3 + 33.9 * math.log10(f) - 13.82 * math.log10(hb) - a_hm
            + (44.9 - 6.55 * math.log10(hb)) * _log_distance(d_km, f, hb, extended) + c_m)


def path_loss(d, scenario: Scenario):
    """Median path loss in dB at distance ``d`` metres (array or scalar).

    Distances below 10 m are clamped to 10 m.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d < MIN_DISTANCE_M):
        _log_clamp_once()
    d_km = np.maximum(d, MIN_DISTANCE_M) / 1000.0
    f, hb, hm = scenario.carrier_freq, scenario.bs_height, scenario.rx_height
    model = scenario.path_loss_model
    if model == "hata_open":
        out = hata_open(d_km, f, hb, hm)
    elif model == "hata_suburban":
        out = hata_suburban(d_km, f, hb, hm)
    elif model == "hata_urban":
        out = hata_urban(d_km, f, hb, hm)
    elif model == "cost231_urban":
        out = cost231_urban(d_km, f, hb, hm)
    else:
        raise ValueError(f"unknown path loss model {model!r}")
    return out if out.ndim else float(out)


# Receive-antenna discrimination template for UHF rooftop antennas:
# 0 dB within +-20 deg, linear to 16 dB at +-60 deg, 16 dB beyond.
_MASK_ANGLES = np.array([0.0, 20.0, 60.0, 180.0])
_MASK_DB = np.array([0.0, 0.0, 16.0, 16.0])


@dataclass(frozen=True)
class DirectionalMask:
    angles_deg: np.ndarray = _MASK_ANGLES
    discrimination_db: np.ndarray = _MASK_DB

    def __call__(self, off_boresight_deg):
        """Attenuation in dB (>= 0) at the given off-boresight angle(s)."""
        a = np.abs(np.asarray(off_boresight_deg, dtype=float))
        a = np.abs((a + 180.0) % 360.0 - 180.0)
        return np.interp(a, self.angles_deg, self.discrimination_db)


BT419_UHF = DirectionalMask()


@dataclass(frozen=True)
class LinkLoss:
    path_loss: float
    shadowing: float
    antenna_gain_tx: float
    antenna_gain_rx: float
    wall_loss: float

    @property
    def total_db(self) -> float:
        return (self.path_loss + self.shadowing - self.antenna_gain_tx
                - self.antenna_gain_rx + self.wall_loss)

    @property
    def total_q(self) -> float:
        return 10.0 ** (self.total_db / 10.0)


def link_q(distance: float, scenario: Scenario, shadowing: float = 0.0,
           off_boresight_deg: float = 0.0) -> LinkLoss:
    """Loss of one link; the directional mask only applies to rooftop patterns."""
    g_rx = scenario.rx_antenna_gain
    if scenario.rx_pattern == "directional_mask":
        g_rx -= float(BT419_UHF(off_boresight_deg))
    return LinkLoss(path_loss=float(path_loss(distance, scenario)), shadowing=float(shadowing),
                    antenna_gain_tx=scenario.bs_antenna_gain, antenna_gain_rx=g_rx,
                    wall_loss=scenario.wall_loss)


def loss_db(distance, scenario: Scenario, shadowing=0.0, off_boresight_deg=None):
    """Vectorised total loss in dB (path loss + shadowing - gains + wall)."""
    total = (path_loss(distance, scenario) + shadowing - scenario.bs_antenna_gain
             - scenario.rx_antenna_gain + scenario.wall_loss)
    if scenario.rx_pattern == "directional_mask" and off_boresight_deg is not None:
        total = total + BT419_UHF(off_boresight_deg)
    return total


def dbm_to_watt(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def noise_power(scenario: Scenario) -> float:
    """Noise power in W on the 20 MHz reference bandwidth."""
    return float(dbm_to_watt(scenario.noise_floor))


def tx_power(scenario: Scenario) -> float:
    """Average per-site transmit power in W on the 20 MHz reference."""
    return float(dbm_to_watt(scenario.tx_power_total))


def draw_shadowing(rng: np.random.Generator, n_sites: int, n: int, sigma: float) -> np.ndarray:
    """Independent log-normal shadowing in dB, shape ``(n, n_sites)``.

    Drawn site-major so that a layout with more rings reuses the draws of
    the inner sites for the same seed.
    """
    return sigma * rng.standard_normal((n_sites, n)).T


def received_power(dist, scenario: Scenario, shadowing, off_boresight_deg=None):
    """Received power in W, ``P / q`` with ``q`` the linear total loss."""
    q_db = loss_db(dist, scenario, shadowing, off_boresight_deg)
    return tx_power(scenario) * 10.0 ** (-q_db / 10.0)


def bearing_deg(user_xy: np.ndarray, site_xy: np.ndarray) -> np.ndarray:
    """Bearing from each user to each site, degrees, shape ``(n_users, n_sites)``."""
    diff = site_xy[None, :, :] - np.asarray(user_xy)[:, None, :]
    return np.degrees(np.arctan2(diff[..., 1], diff[..., 0]))
