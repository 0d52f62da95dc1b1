"""Unicast links under partial co-channel interference and the network-load
fixed point."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import propagation as prop
from .geometry import HexLayout, cell_radius, sample_hexagon
from .scenario import EfficiencyProfile, Scenario, efficiency_profile
from .sfn import SinrDistribution, spectral_efficiency

log = logging.getLogger(__name__)

# Axial generator of the co-channel sub-lattice for each reuse factor.
REUSE_GENERATORS = {1: (1, 0), 3: (1, 1), 4: (2, 0), 7: (2, 1)}


def cochannel_sites(layout: HexLayout, reuse_K: int) -> np.ndarray:
    """Indices of sites sharing cell 0's frequency colour, site 0 excluded."""
    if reuse_K not in REUSE_GENERATORS:
        raise ValueError(f"unsupported reuse factor {reuse_K}; use one of {sorted(REUSE_GENERATORS)}")
    i, j = REUSE_GENERATORS[reuse_K]
    # Second generator is the first rotated by 60 degrees: (q, r) -> (-r, q + r).
    u0, u1, v0, v1 = i, j, -j, i + j
    a, b = layout.axial[:, 0], layout.axial[:, 1]
    m_num = v1 * a - v0 * b
    n_num = -u1 * a + u0 * b
    member = (m_num % reuse_K == 0) & (n_num % reuse_K == 0)
    member[0] = False
    return np.flatnonzero(member)


@dataclass(frozen=True)
class CollisionVector:
    flags: np.ndarray  # per interfering site, True if transmitting

    @classmethod
    def draw(cls, m: int, x: float, rng: np.random.Generator) -> "CollisionVector":
        return cls(rng.random(m) < x)


@dataclass(frozen=True)
class LoadSolution:
    x: float
    iterations: int
    residual: float
    converged: bool = True


def _link_powers(xy: np.ndarray, interferer_xy: np.ndarray, scenario: Scenario,
                 shadow_serving, shadow_interf):
    """Serving (site 0) and interferer received powers in W.

    A rooftop directional antenna is pointed at the serving site.
    """
    xy = np.atleast_2d(xy)
    d0 = np.hypot(xy[:, 0], xy[:, 1])
    diff = interferer_xy[None, :, :] - xy[:, None, :]
    di = np.hypot(diff[..., 0], diff[..., 1])
    off = None
    if scenario.rx_pattern == "directional_mask":
        to_serving = np.degrees(np.arctan2(-xy[:, 1], -xy[:, 0]))
        off = np.degrees(np.arctan2(diff[..., 1], diff[..., 0])) - to_serving[:, None]
    s = prop.received_power(d0, scenario, shadow_serving)
    i = prop.received_power(di, scenario, shadow_interf, off)
    return s, i


def unicast_sinr(r, collision, scenario: Scenario, interferer_xy: np.ndarray,
                 shadowing_realization=None, theta=0.0):
    """Raw unicast SINR of a user at distance ``r`` (m) and bearing ``theta``
    (rad) from the serving site at the origin.

    ``collision`` flags which interferers transmit; ``shadowing_realization``
    holds the serving-site draw first, then one per interferer.
    """
    r, theta = np.broadcast_arrays(np.atleast_1d(np.asarray(r, dtype=float)),
                                   np.atleast_1d(np.asarray(theta, dtype=float)))
    xy = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)
    interferer_xy = np.asarray(interferer_xy, dtype=float).reshape(-1, 2)
    m = len(interferer_xy)
    if shadowing_realization is None:
        sh0, shi = 0.0, 0.0
    else:
        sh = np.atleast_2d(np.asarray(shadowing_realization, dtype=float))
        sh0, shi = sh[:, 0], sh[:, 1:1 + m]
    s, i = _link_powers(xy, interferer_xy, scenario, sh0, shi)
    if isinstance(collision, CollisionVector):
        collision = collision.flags
    flags = np.atleast_2d(np.asarray(collision, dtype=float))
    out = s / (np.sum(flags * i, axis=1) + prop.noise_power(scenario))
    return out if out.size > 1 else float(out[0])


def unicast_ese(sinr, profile: EfficiencyProfile):
    """Unicast ESE; ``beta_eff`` already carries the spatial multiplexing order."""
    sinr = np.asarray(sinr, dtype=float)
    if np.any(sinr <= 0):
        raise ValueError("sinr must be > 0")
    out = spectral_efficiency(sinr, profile)
    return out if out.ndim else float(out)


class LoadModel:
    """Monte Carlo pieces of the load fixed point, drawn once per seed.

    The radial integral uses Gauss-Legendre nodes on ``[0, R]`` with density
    ``2r/R^2``; at each node ``n_draws`` (angle, shadowing, collision uniform)
    tuples are drawn once and reused for every ``x`` so the map is smooth and
    monotone in ``x``.
    """

    def __init__(self, scenario: Scenario, layout: HexLayout, profile: EfficiencyProfile,
                 seed: int, n_nodes: int = 64, n_draws: int = 1000):
        self.profile = profile
        self.radius = cell_radius(layout.isd)
        t, w = np.polynomial.legendre.leggauss(n_nodes)
        r = 0.5 * self.radius * (t + 1.0)
        self.nodes = r
        self.density_weights = 0.5 * self.radius * w * 2.0 * r / self.radius ** 2
        sites = cochannel_sites(layout, scenario.reuse_K)
        interferer_xy = layout.site_positions[sites]
        m = len(sites)
        rng = np.random.default_rng(seed)
        theta = rng.uniform(0.0, 2.0 * np.pi, size=(n_nodes, n_draws))
        shadow = scenario.shadowing_sigma * rng.standard_normal((n_nodes, n_draws, m + 1))
        self.uniforms = rng.random((n_nodes, n_draws, m))
        xy = np.stack([r[:, None] * np.cos(theta), r[:, None] * np.sin(theta)], axis=-1)
        s, i = _link_powers(xy.reshape(-1, 2), interferer_xy, scenario,
                            shadow[..., 0].reshape(-1), shadow[..., 1:].reshape(-1, m))
        self.serving = s.reshape(n_nodes, n_draws)
        self.interf = i.reshape(n_nodes, n_draws, m)
        self.noise = prop.noise_power(scenario)

    def mean_ese(self, x: float) -> np.ndarray:
        """ESE averaged over collisions and shadowing at each radial node."""
        on = self.uniforms < x
        interference = np.einsum("ndm,ndm->nd", on, self.interf) if on.any() else 0.0
        sinr = self.serving / (interference + self.noise)
        return spectral_efficiency(sinr, self.profile).mean(axis=1)

    def load_map(self, x: float, demand_mbps: float, bw_uni: float) -> float:
        """Right-hand side of the load equation before the ``min(., 1)`` clamp."""
        if demand_mbps == 0:
            return 0.0
        return float(demand_mbps / bw_uni * np.sum(self.density_weights / self.mean_ese(x)))


def _secant_finish(x: float, fx: float, prev, tol: float) -> float:
    """Secant root of ``f(x) - x`` through the last two iterates.

    A residual below ``tol`` leaves the iterate up to ``tol / (1 - f')`` from
    the root when the map is steep; one secant step removes most of that.
    Clamped limits and implausible steps fall back to ``f(x)``.
    """
    if fx <= 0.0 or fx >= 1.0 or prev is None:
        return fx
    x0, g0 = prev
    g = fx - x
    if g == g0:
        return fx
    root = x - g * (x - x0) / (g - g0)
    if not 0.0 <= root <= 1.0 or abs(root - fx) > 10.0 * tol:
        return fx
    return root


def solve_load(scenario: Scenario, layout: HexLayout, rho_hd: float, rho_sd: float,
               bw_uni: float, seed: int, profile: EfficiencyProfile | None = None,
               r_hd: float = 7.14, r_sd: float = 1.83, alpha: float = 0.5,
               tol: float = 1e-3, max_iter: int = 100, model: LoadModel | None = None,
               **model_kw) -> LoadSolution:
    """Damped fixed-point iteration for the unicast network load ``x``.

    On convergence the returned ``x`` is the (clamped) image of the last
    iterate, so the saturated and idle limits come out as exactly 1 and 0.
    """
    if not bw_uni > 0:
        raise ValueError("bw_uni must be > 0")
    if model is None:
        if profile is None:
            profile = efficiency_profile(scenario, "unicast")
        model = LoadModel(scenario, layout, profile, seed, **model_kw)
    demand = rho_hd * r_hd + rho_sd * r_sd
    x = 0.0
    prev = None
    residual = math.inf
    for it in range(1, max_iter + 1):
        fx = min(model.load_map(x, demand, bw_uni), 1.0)
        residual = abs(x - fx)
        if residual <= tol:
            return LoadSolution(x=_secant_finish(x, fx, prev, tol), iterations=it,
                                residual=residual)
        prev = (x, fx - x)
        x = min(max((1.0 - alpha) * x + alpha * fx, 0.0), 1.0)
    log.warning("load fixed point not converged after %d iterations (residual %.2e)",
                max_iter, residual)
    return LoadSolution(x=x, iterations=max_iter, residual=residual, converged=False)


class UnicastSampler:
    """Users, shadowing and collision uniforms drawn once; SINR for any load."""

    def __init__(self, layout: HexLayout, scenario: Scenario, n_samples: int, seed: int):
        sites = cochannel_sites(layout, scenario.reuse_K)
        interferer_xy = layout.site_positions[sites]
        m = len(sites)
        rng = np.random.default_rng(seed)
        xy = sample_hexagon(n_samples, layout.isd, rng)
        shadow = scenario.shadowing_sigma * rng.standard_normal((n_samples, m + 1))
        self.uniforms = rng.random((n_samples, m))
        self.serving, self.interf = _link_powers(xy, interferer_xy, scenario,
                                                 shadow[:, 0], shadow[:, 1:])
        self.noise = prop.noise_power(scenario)
        self.seed = seed

    def distribution(self, x: float) -> SinrDistribution:
        interference = np.sum((self.uniforms < x) * self.interf, axis=1)
        return SinrDistribution(samples=self.serving / (interference + self.noise),
                                seed=self.seed)


def unicast_sinr_distribution(layout: HexLayout, scenario: Scenario, x: float,
                              n_samples: int, seed: int) -> SinrDistribution:
    """Unicast SINR of uniform users in cell 0 with interferers active w.p. ``x``."""
    return UnicastSampler(layout, scenario, n_samples, seed).distribution(x)
