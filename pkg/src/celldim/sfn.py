"""SFN broadcast: constructive-delay weighting, SINR Monte Carlo, broadcast ESE
and the broadcast-only bandwidth requirement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import propagation as prop
from .geometry import HexLayout, UserPosition, sample_hexagon, site_distances
from .scenario import EfficiencyProfile, Scenario, ServiceConfig


@dataclass(frozen=True)
class WeightParams:
    t_u: float  # us
    t_cp: float  # us

    def __post_init__(self):
        if not self.t_u > 0:
            raise ValueError("t_u must be > 0")
        if not 0 <= self.t_cp < self.t_u:
            raise ValueError("need 0 <= t_cp < t_u")

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> "WeightParams":
        return cls(scenario.t_u, scenario.t_cp)


def weight(tau, params: WeightParams):
    """Constructive fraction of a copy arriving ``tau`` us after the reference.

    Trapezoid: ramps up over ``[-t_u, 0)``, flat over the cyclic prefix,
    ramps down over ``[t_cp, t_cp + t_u)``.
    """
    tau = np.asarray(tau, dtype=float)
    t_u, t_cp = params.t_u, params.t_cp
    out = np.select(
        [tau < -t_u, tau < 0.0, tau < t_cp, tau < t_cp + t_u],
        [0.0, 1.0 + tau / t_u, 1.0, 1.0 - (tau - t_cp) / t_u],
        default=0.0,
    )
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SinrDistribution:
    samples: np.ndarray  # linear SINR
    seed: int
    constructive: np.ndarray | None = None
    destructive: np.ndarray | None = None

    @property
    def sample_count(self) -> int:
        return len(self.samples)

    def percentile(self, p: float) -> float:
        """Linear SINR at quantile ``p`` (a fraction, e.g. 0.01)."""
        return float(np.quantile(self.samples, p))

    def percentile_db(self, p: float) -> float:
        return 10.0 * np.log10(self.percentile(p))

    def cdf_csv(self, points: int = 1001) -> str:
        qs = np.linspace(0.0, 1.0, points)
        vals = 10.0 * np.log10(np.maximum(np.quantile(self.samples, qs), 1e-300))
        rows = ["sinr_db,cdf"] + [f"{v:.6f},{q:.6f}" for v, q in zip(vals, qs)]
        return "\n".join(rows) + "\n"


def sfn_split(dist, rx_power, active, params: WeightParams):
    """Constructive and destructive received power per user.

    ``dist`` and ``rx_power`` have shape ``(n, n_sites)``; ``active`` flags
    sites transmitting the SFN content. Delays are taken relative to the
    nearest active site.
    """
    dist = np.atleast_2d(dist)
    rx_power = np.atleast_2d(rx_power)
    active = np.asarray(active, dtype=bool)
    d_act = dist[:, active]
    p_act = rx_power[:, active]
    r0 = d_act.min(axis=1, keepdims=True)
    tau = (d_act - r0) / prop.SPEED_OF_LIGHT_M_PER_US
    w = weight(tau, params)
    constructive = np.sum(w * p_act, axis=1)
    destructive = np.sum((1.0 - w) * p_act, axis=1)
    return constructive, destructive


def sfn_sinr(user: UserPosition, layout: HexLayout, scenario: Scenario,
             shadowing_realization=None, regional: bool = False,
             off_boresight_deg=None) -> float:
    """Raw SFN SINR (linear) of one user in cell 0."""
    dist = np.asarray(user.distance_to_site, dtype=float)[None, :]
    shadow = 0.0 if shadowing_realization is None else np.asarray(shadowing_realization)[None, :]
    rx = prop.received_power(dist, scenario, shadow, off_boresight_deg)
    active = layout.region_mask if regional else np.ones(layout.n_sites, dtype=bool)
    c, d = sfn_split(dist, rx, active, WeightParams.from_scenario(scenario))
    return float(c[0] / (d[0] + prop.noise_power(scenario)))


def _draw_links(layout: HexLayout, scenario: Scenario, n_samples: int, seed: int):
    """Common random numbers for one Monte Carlo run.

    Returns distances and masked received powers, both ``(n, n_sites)``.
    The rooftop antenna points at the strongest site of the full network,
    whichever content is being received.
    """
    rng = np.random.default_rng(seed)
    xy = sample_hexagon(n_samples, layout.isd, rng)
    dist = site_distances(xy, layout)
    shadow = prop.draw_shadowing(rng, layout.n_sites, n_samples, scenario.shadowing_sigma)
    off = None
    if scenario.rx_pattern == "directional_mask":
        bare = prop.loss_db(dist, scenario, shadow)
        best = np.argmin(bare, axis=1)
        bearing = prop.bearing_deg(xy, layout.site_positions)
        off = bearing - bearing[np.arange(n_samples), best][:, None]
    rx = prop.received_power(dist, scenario, shadow, off)
    return dist, rx


def simulate_sinr_distribution(layout: HexLayout, scenario: Scenario, n_samples: int,
                               seed: int, regional: bool = False,
                               min_samples: int = 10_000) -> SinrDistribution:
    """SFN SINR over uniform users in cell 0 and independent site shadowing.

    With ``regional`` only sites in the region mask transmit; the others are
    silent on the regional sub-band.
    """
    if n_samples < min_samples:
        raise ValueError(f"n_samples must be >= {min_samples}")
    dist, rx = _draw_links(layout, scenario, n_samples, seed)
    active = layout.region_mask if regional else np.ones(layout.n_sites, dtype=bool)
    c, d = sfn_split(dist, rx, active, WeightParams.from_scenario(scenario))
    sinr = c / (d + prop.noise_power(scenario))
    return SinrDistribution(samples=sinr, seed=seed, constructive=c, destructive=d)


def effective_sinr(sinr, profile: EfficiencyProfile):
    """Raw SINR reduced by the fast-fading margin."""
    return np.asarray(sinr, dtype=float) * 10.0 ** (-profile.fading_margin / 10.0)


def spectral_efficiency(sinr, profile: EfficiencyProfile):
    """Modified Shannon ESE, ``beta * min(log2(1 + xi * SINR_faded), cap)``.

    Vectorised; raw SINR is reduced by the fading margin first.
    """
    s = effective_sinr(sinr, profile)
    return profile.beta_eff * np.minimum(np.log2(1.0 + profile.xi_eff * s),
                                         profile.per_stream_cap)


def broadcast_ese(sinr_1pct: float, profile: EfficiencyProfile) -> float:
    """Effective spectral efficiency (bps/Hz) of the SFN link.

    Single stream with diversity, so the per-stream cap applies once.
    """
    if not sinr_1pct > 0:
        raise ValueError("sinr_1pct must be > 0")
    return float(spectral_efficiency(sinr_1pct, profile))


def program_counts(service: ServiceConfig) -> tuple[int, int, int, int]:
    """``(hd_national, sd_national, hd_regional, sd_regional)`` for broadcast-only.

    Extra programs are HD; they join the regional SFNs if ``extra_regional``.
    """
    hd_l = service.n_hd_total - service.n_regional_hd
    hd_r = service.n_regional_hd
    if service.extra_regional:
        hd_r += service.extra_programs
    else:
        hd_l += service.extra_programs
    return hd_l, service.n_sd_total, hd_r, 0


def broadcast_bandwidth(service: ServiceConfig, ese_national: float, ese_regional: float,
                        X: int) -> float:
    """Bandwidth in MHz of a regional-border cell: national SFN plus ``X`` regional SFNs."""
    return sum(broadcast_bandwidth_split(service, ese_national, ese_regional, X))


def broadcast_bandwidth_split(service: ServiceConfig, ese_national: float,
                              ese_regional: float, X: int) -> tuple[float, float]:
    """National and regional (summed over ``X`` regions) bandwidth in MHz."""
    if not (ese_national > 0 and ese_regional > 0):
        raise ValueError("spectral efficiencies must be > 0")
    hd_l, sd_l, hd_r, sd_r = program_counts(service)
    national = (hd_l * service.r_hd + sd_l * service.r_sd) / ese_national
    regional = X * (hd_r * service.r_hd + sd_r * service.r_sd) / ese_regional
    return national, regional
