"""Viewer population, program popularity and streaming-class construction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import EfficiencyProfile, Scenario, ServiceConfig
from .sfn import SinrDistribution, spectral_efficiency


@dataclass(frozen=True)
class Program:
    id: int
    is_hd: bool
    popularity: float
    delivery: str  # "broadcast" | "unicast"


@dataclass(frozen=True)
class ProgramCatalog:
    programs: tuple[Program, ...]

    def __post_init__(self):
        total = sum(p.popularity for p in self.programs)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"popularities sum to {total}, expected 1")

    def mass(self, delivery: str | None = None, is_hd: bool | None = None) -> float:
        return float(sum(p.popularity for p in self.programs
                         if (delivery is None or p.delivery == delivery)
                         and (is_hd is None or p.is_hd == is_hd)))

    @property
    def unicast_mass(self) -> float:
        return self.mass("unicast")

    @property
    def unicast_hd_share(self) -> float:
        """HD fraction of the unicast popularity mass (0 if nothing is unicast)."""
        total = self.unicast_mass
        return self.mass("unicast", True) / total if total > 0 else 0.0


def _zipf(ranks: np.ndarray, s: float) -> np.ndarray:
    return 1.0 / np.asarray(ranks, dtype=float) ** s


def popularity_model(service: ServiceConfig, catalog_size: int | None = None,
                     extra_programs: int | None = None) -> ProgramCatalog:
    """Top programs share the broadcast viewer mass equally; the tail is Zipf.

    Programs are ranked HD first, then SD; the first
    ``service.n_broadcast_hybrid`` are broadcast, the rest unicast. Extra
    programs are HD, appended to the tail ranks. They dilute popularity within
    the HD tail only, so the HD and SD tail masses of the base catalog are
    preserved.
    """
    n_hd, n_sd = service.n_hd_total, service.n_sd_total
    if catalog_size is None:
        catalog_size = n_hd + n_sd
    if extra_programs is None:
        extra_programs = service.extra_programs
    n_top = service.n_broadcast_hybrid
    if catalog_size < n_top or catalog_size < 3:
        raise ValueError("catalog_size must be >= 3 and >= the broadcast program count")
    n_hd = min(n_hd, catalog_size)
    is_hd = np.arange(catalog_size) < n_hd
    top_mass = service.broadcast_share_of_viewers if catalog_size > n_top else 1.0
    tail_mass = 1.0 - top_mass

    base_ranks = np.arange(n_top + 1, catalog_size + 1)
    base_w = _zipf(base_ranks, service.zipf_exponent)
    base_hd = is_hd[n_top:]
    if base_w.size:
        hd_tail = tail_mass * base_w[base_hd].sum() / base_w.sum()
    else:
        hd_tail = 0.0
    sd_tail = tail_mass - hd_tail

    tail_ranks = np.arange(n_top + 1, catalog_size + extra_programs + 1)
    tail_w = _zipf(tail_ranks, service.zipf_exponent)
    tail_hd = np.concatenate([base_hd, np.ones(extra_programs, dtype=bool)])
    pop = np.zeros(tail_w.size)
    if tail_hd.any():
        pop[tail_hd] = hd_tail * tail_w[tail_hd] / tail_w[tail_hd].sum()
    if (~tail_hd).any():
        pop[~tail_hd] = sd_tail * tail_w[~tail_hd] / tail_w[~tail_hd].sum()

    programs = [Program(i, bool(is_hd[i]), top_mass / n_top if n_top else 0.0, "broadcast")
                for i in range(n_top)]
    programs += [Program(n_top + k, bool(tail_hd[k]), float(pop[k]), "unicast")
                 for k in range(tail_w.size)]
    return ProgramCatalog(tuple(programs))


@dataclass(frozen=True)
class ViewerModel:
    expected_viewers: float
    session_length: float = 3600.0  # s
    subsession_length: float = 900.0  # s

    def __post_init__(self):
        if self.expected_viewers < 0:
            raise ValueError("expected_viewers must be >= 0")
        if not 0 < self.subsession_length <= self.session_length:
            raise ValueError("need 0 < t_c <= t_s")

    @property
    def arrival_rate(self) -> float:
        """Session arrivals per second, E{N} / t_s."""
        return self.expected_viewers / self.session_length

    @property
    def exit_prob(self) -> float:
        return self.subsession_length / self.session_length


def tv_receivers(scenario: Scenario, cell_area_km2: float) -> float:
    households = cell_area_km2 * scenario.population_density / scenario.persons_per_household
    return households * scenario.dtt_penetration * scenario.tvs_per_household


def expected_viewers(scenario: Scenario, cell_area_km2: float) -> float:
    """Mean number of active TV viewers in one cell.

    ``viewer_base='receiver'`` applies the viewing ratio per TV set;
    ``'household'`` applies it per DTT household.
    """
    receivers = tv_receivers(scenario, cell_area_km2)
    if scenario.viewer_base == "household":
        receivers /= scenario.tvs_per_household if scenario.tvs_per_household else 1.0
    return scenario.viewing_ratio * receivers


def unicast_intensity(viewers: ViewerModel, catalog: ProgramCatalog) -> float:
    """Offered unicast traffic in erlangs; independent of the session length."""
    return viewers.session_length * viewers.arrival_rate * catalog.unicast_mass


@dataclass(frozen=True)
class TrafficClass:
    rho: float  # erlangs
    b: float  # MHz per link
    is_hd: bool
    sinr_edge: float  # linear SINR defining the class bandwidth


@dataclass(frozen=True)
class TrafficClasses:
    classes: tuple[TrafficClass, ...]
    delta: float
    rho_uni: float
    outage_rho: float

    @property
    def total_rho(self) -> float:
        return float(sum(c.rho for c in self.classes))

    def family(self, is_hd: bool) -> list[TrafficClass]:
        return [c for c in self.classes if c.is_hd == is_hd]

    def csv(self) -> str:
        rows = ["k,family,sinr_edge_db,b_k_mhz,rho_k"]
        for k, c in enumerate(self.classes, start=1):
            edge = 10.0 * np.log10(c.sinr_edge) if c.sinr_edge > 0 else float("-inf")
            rows.append(f"{k},{'HD' if c.is_hd else 'SD'},{edge:.6f},{c.b:.6f},{c.rho:.9f}")
        return "\n".join(rows) + "\n"


class AllOutageError(ValueError):
    """No user can be served within the per-link bandwidth cap."""


def build_classes(sinr_distribution: SinrDistribution | np.ndarray, delta: float,
                  profile: EfficiencyProfile, service: ServiceConfig, rho_uni: float,
                  hd_share: float) -> TrafficClasses:
    """Streaming classes from SINR quantile buckets of width ``delta`` percent.

    Each bucket's bandwidth is set by its worst served user. Users whose
    link would need more than ``service.link_bw_cap`` are in outage and
    offer no traffic. Buckets with identical bandwidth are merged.
    """
    n_buckets = 100.0 / delta
    if abs(n_buckets - round(n_buckets)) > 1e-9 or delta <= 0:
        raise ValueError("delta must divide 100")
    n_buckets = int(round(n_buckets))
    samples = getattr(sinr_distribution, "samples", sinr_distribution)
    samples = np.sort(np.asarray(samples, dtype=float))
    n = samples.size
    if n == 0:
        raise ValueError("empty SINR distribution")
    ese = spectral_efficiency(samples, profile)
    edges = np.rint(np.arange(n_buckets + 1) * n / n_buckets).astype(int)

    classes = []
    served = 0.0
    for is_hd, share, rate in ((True, hd_share, service.r_hd),
                               (False, 1.0 - hd_share, service.r_sd)):
        if share <= 0.0:
            continue
        ok = ese * service.link_bw_cap >= rate
        merged: dict[float, list] = {}
        for k in range(n_buckets):
            lo, hi = edges[k], edges[k + 1]
            if hi <= lo:
                continue
            in_cov = np.flatnonzero(ok[lo:hi])
            if in_cov.size == 0:
                continue
            worst = lo + in_cov[0]  # samples are sorted ascending
            b = rate / ese[worst]
            rho = rho_uni * share * in_cov.size / n
            served += rho
            if b in merged:
                merged[b][0] += rho
            else:
                merged[b] = [rho, samples[worst]]
        for b in sorted(merged, reverse=True):
            rho, edge = merged[b]
            classes.append(TrafficClass(rho=rho, b=b, is_hd=is_hd, sinr_edge=float(edge)))

    if rho_uni > 0 and not classes:
        raise AllOutageError("every SINR bucket is in outage")
    return TrafficClasses(classes=tuple(classes), delta=delta, rho_uni=rho_uni,
                          outage_rho=rho_uni - served)
