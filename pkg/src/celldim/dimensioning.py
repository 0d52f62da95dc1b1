"""End-to-end spectrum requirement for broadcast-only and hybrid delivery,
plus the parameter sweeps."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace


from .erlang import ErlangSystem, kaufman_roberts
from .geometry import build_layout, hexagon_area
from .scenario import EfficiencyProfile, Scenario, ServiceConfig, efficiency_profile
from .sfn import (broadcast_bandwidth_split, broadcast_ese, simulate_sinr_distribution)
from .traffic import (AllOutageError, ViewerModel, build_classes, expected_viewers,
                      popularity_model, unicast_intensity)
from .unicast import LoadModel, UnicastSampler, solve_load

UHF_BAND_MHZ = 320.0
UNICAST_CEILING_MHZ = 2.0 * UHF_BAND_MHZ
MODES = ("broadcast", "hybrid")


def spectrum_saving(bw_required: float) -> float:
    """MHz left over in the 320 MHz UHF band; negative means it does not fit."""
    if bw_required < 0:
        raise ValueError("bw_required must be >= 0")
    return UHF_BAND_MHZ - bw_required


@dataclass(frozen=True)
class DimensioningResult:
    mode: str
    bw_national_sfn: float  # MHz
    bw_regional_sfn: float  # MHz, all X regions
    bw_unicast: float  # MHz, all K colours
    sinr_1pct_national_db: float = math.nan
    sinr_1pct_regional_db: float = math.nan
    load_x: float = math.nan
    aggregate_blocking: float = math.nan
    status: str = "ok"

    @property
    def bw_required(self) -> float:
        return self.bw_national_sfn + self.bw_regional_sfn + self.bw_unicast

    @property
    def bw_saving(self) -> float:
        return UHF_BAND_MHZ - self.bw_required

    @property
    def feasible(self) -> bool:
        return self.status == "ok" and self.bw_required <= UHF_BAND_MHZ


@dataclass(frozen=True)
class RunOptions:
    """Numerical knobs shared by both modes."""

    n_samples: int = 100_000  # SFN Monte Carlo users
    unicast_samples: int = 20_000
    load_nodes: int = 64
    load_draws: int = 1000
    ceiling: float = UNICAST_CEILING_MHZ  # MHz per reuse colour


def _sfn_percentiles(scenario: Scenario, service: ServiceConfig, opts: RunOptions,
                     seed: int, national: bool = True):
    p = service.coverage_percentile
    nat = None
    if national:
        layout = build_layout(scenario.isd, scenario.interferer_rings)
        nat = simulate_sinr_distribution(layout, scenario, opts.n_samples, seed).percentile(p)
    layout_r = build_layout(scenario.isd, scenario.interferer_rings, region_split=True)
    reg = simulate_sinr_distribution(layout_r, scenario, opts.n_samples, seed,
                                     regional=True).percentile(p)
    return nat, reg


def _db(x):
    return 10.0 * math.log10(x) if x and x > 0 else math.nan


def dimension_broadcast_only(scenario: Scenario, service: ServiceConfig,
                             profile: EfficiencyProfile | None = None, seed: int = 1,
                             opts: RunOptions = RunOptions(),
                             ese_override: tuple[float, float] | None = None
                             ) -> DimensioningResult:
    """National SFN plus ``regions_X`` regional SFNs at a regional border.

    ``ese_override`` bypasses the simulation with fixed (national, regional)
    spectral efficiencies.
    """
    if profile is None:
        profile = efficiency_profile(scenario, "broadcast")
    if ese_override is not None:
        ese_l, ese_r = ese_override
        nat = reg = math.nan
    else:
        nat, reg = _sfn_percentiles(scenario, service, opts, seed)
        ese_l, ese_r = broadcast_ese(nat, profile), broadcast_ese(reg, profile)
    bw_nat, bw_reg = broadcast_bandwidth_split(service, ese_l, ese_r, scenario.regions_X)
    return DimensioningResult(mode="broadcast", bw_national_sfn=bw_nat, bw_regional_sfn=bw_reg,
                              bw_unicast=0.0, sinr_1pct_national_db=_db(nat),
                              sinr_1pct_regional_db=_db(reg))


def unicast_traffic(scenario: Scenario, service: ServiceConfig) -> tuple[float, float]:
    """Offered unicast erlangs per cell and the HD share of that traffic."""
    catalog = popularity_model(service)
    viewers = ViewerModel(expected_viewers(scenario, hexagon_area(scenario.isd) / 1e6))
    return unicast_intensity(viewers, catalog), catalog.unicast_hd_share


@dataclass(frozen=True)
class UnicastPoint:
    bw: float  # MHz per reuse colour
    load_x: float
    blocking: float


class UnicastDimensioner:
    """Blocking of the unicast pool as a function of its bandwidth.

    Load, SINR distribution and classes are recomputed for every candidate
    bandwidth since the interference depends on it.
    """

    def __init__(self, scenario: Scenario, service: ServiceConfig, profile: EfficiencyProfile,
                 rho_uni: float, hd_share: float, seed: int, opts: RunOptions = RunOptions()):
        self.scenario, self.service, self.profile = scenario, service, profile
        self.rho_uni, self.hd_share = rho_uni, hd_share
        layout = build_layout(scenario.isd, scenario.interferer_rings)
        self.layout = layout
        self.load_model = LoadModel(scenario, layout, profile, seed + 1,
                                    n_nodes=opts.load_nodes, n_draws=opts.load_draws)
        self.sampler = UnicastSampler(layout, scenario, opts.unicast_samples, seed + 2)
        self.seed = seed

    def evaluate(self, bw: float) -> UnicastPoint:
        sv = self.service
        sol = solve_load(self.scenario, self.layout, self.rho_uni * self.hd_share,
                         self.rho_uni * (1.0 - self.hd_share), bw, self.seed,
                         r_hd=sv.r_hd, r_sd=sv.r_sd, model=self.load_model)
        classes = build_classes(self.sampler.distribution(sol.x), sv.class_width,
                                self.profile, sv, self.rho_uni, self.hd_share)
        system = ErlangSystem.from_classes(classes.classes, bw, sv.bw_unit)
        if system.capacity < max(system.b_units):
            return UnicastPoint(bw, sol.x, 1.0)
        return UnicastPoint(bw, sol.x, kaufman_roberts(system).aggregate)

    def search(self, ceiling: float = UNICAST_CEILING_MHZ) -> UnicastPoint | None:
        """Smallest bandwidth on the ``bw_unit`` grid meeting the blocking target.

        Exponential bracketing from the per-link cap, then bisection. Returns
        ``None`` if the target is missed at ``ceiling``.
        """
        unit = self.service.bw_unit
        target = self.service.blocking_target
        c_cap = int(math.floor(ceiling / unit + 1e-9))
        cache: dict[int, UnicastPoint] = {}

        def probe(c: int) -> UnicastPoint:
            if c not in cache:
                cache[c] = self.evaluate(c * unit)
            return cache[c]

        hi = max(1, int(math.ceil(self.service.link_bw_cap / unit - 1e-9)))
        lo = 0
        while probe(hi).blocking > target:
            if hi >= c_cap:
                return None
            lo, hi = hi, min(2 * hi, c_cap)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if probe(mid).blocking <= target:
                hi = mid
            else:
                lo = mid
        return probe(hi)


def dimension_hybrid(scenario: Scenario, service: ServiceConfig,
                     profile_broadcast: EfficiencyProfile | None = None,
                     profile_unicast: EfficiencyProfile | None = None, seed: int = 1,
                     opts: RunOptions = RunOptions(),
                     traffic: tuple[float, float] | None = None) -> DimensioningResult:
    """Most popular programs broadcast as regional HD; the rest unicast.

    ``traffic`` overrides the offered ``(rho_uni, hd_share)``.
    """
    if profile_broadcast is None:
        profile_broadcast = efficiency_profile(scenario, "broadcast")
    if profile_unicast is None:
        profile_unicast = efficiency_profile(scenario, "unicast")
    _, reg = _sfn_percentiles(scenario, service, opts, seed, national=False)
    ese_r = broadcast_ese(reg, profile_broadcast)
    bw_reg = scenario.regions_X * service.n_broadcast_hybrid * service.r_hd / ese_r

    rho_uni, hd_share = traffic if traffic is not None else unicast_traffic(scenario, service)
    base = dict(mode="hybrid", bw_national_sfn=0.0, bw_regional_sfn=bw_reg,
                sinr_1pct_regional_db=_db(reg))
    if rho_uni <= 0:
        return DimensioningResult(bw_unicast=0.0, load_x=0.0, aggregate_blocking=0.0, **base)
    try:
        dim = UnicastDimensioner(scenario, service, profile_unicast, rho_uni, hd_share,
                                 seed, opts)
        point = dim.search(opts.ceiling)
    except AllOutageError:
        point = None
    if point is None:
        return DimensioningResult(bw_unicast=math.inf, status="infeasible", **base)
    return DimensioningResult(bw_unicast=scenario.reuse_K * point.bw, load_x=point.load_x,
                              aggregate_blocking=point.blocking, **base)


def dimension(scenario: Scenario, service: ServiceConfig, mode: str, seed: int = 1,
              opts: RunOptions = RunOptions(),
              efficiency: dict | None = None) -> DimensioningResult:
    """Dispatch on ``mode``.

    ``efficiency`` maps ``"broadcast"``/``"unicast"`` to field overrides applied
    on top of the profiles derived from the scenario.
    """
    efficiency = efficiency or {}
    prof_b = replace(efficiency_profile(scenario, "broadcast"), **efficiency.get("broadcast", {}))
    if mode == "broadcast":
        return dimension_broadcast_only(scenario, service, prof_b, seed, opts)
    if mode == "hybrid":
        prof_u = replace(efficiency_profile(scenario, "unicast"), **efficiency.get("unicast", {}))
        return dimension_hybrid(scenario, service, prof_b, prof_u, seed, opts)
    raise ValueError(f"mode must be one of {MODES}")


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

SWEEP_AXES = ("isd", "penetration", "extra_programs", "antennas")

CSV_COLUMNS = ("axis_value", "mode", "antennas", "bw_national_mhz", "bw_regional_mhz",
               "bw_unicast_mhz", "bw_required_mhz", "bw_saving_mhz", "sinr1pct_nat_db",
               "sinr1pct_reg_db", "load_x", "blocking", "status")


def parse_antennas(value: str) -> tuple[int, int]:
    """``"4x4"`` -> ``(4, 4)`` as (BS antennas, receive antennas)."""
    try:
        m_t, m_r = (int(v) for v in str(value).lower().split("x"))
    except ValueError:
        raise ValueError(f"antenna config must look like 4x1, got {value!r}") from None
    return m_t, m_r


@dataclass(frozen=True)
class SweepPoint:
    axis: str
    value: object
    mode: str
    antennas: str
    scenario: Scenario
    service: ServiceConfig
    efficiency: dict | None = None


@dataclass(frozen=True)
class SweepRow:
    point: SweepPoint
    result: DimensioningResult | None
    error: str = ""
    runtime_s: float = 0.0


def apply_axis(scenario: Scenario, service: ServiceConfig, axis: str, value):
    """Bundle with one sweep coordinate set."""
    if axis == "isd":
        return replace(scenario, isd=float(value)), service
    if axis == "penetration":
        return replace(scenario, dtt_penetration=float(value)), service
    if axis == "extra_programs":
        return scenario, replace(service, extra_programs=int(value))
    if axis == "antennas":
        m_t, m_r = parse_antennas(value)
        return replace(scenario, bs_antenna_count=m_t, rx_antenna_count=m_r), service
    raise ValueError(f"axis must be one of {SWEEP_AXES}")


def make_points(axis: str, values, scenario: Scenario, service: ServiceConfig,
                modes=("broadcast",), antennas=None,
                efficiency: dict | None = None) -> list[SweepPoint]:
    """Cartesian grid of (antenna config, mode, axis value) points."""
    if not len(values):
        raise ValueError("sweep range is empty")
    if antennas is None:
        antennas = [f"{scenario.bs_antenna_count}x{scenario.rx_antenna_count}"]
    points = []
    for ant in antennas:
        base, _ = apply_axis(scenario, service, "antennas", ant)
        for mode in modes:
            for v in values:
                s, c = apply_axis(base, service, axis, v)
                points.append(SweepPoint(axis, v, mode, ant, s, c, efficiency))
    return points


def run_point(point: SweepPoint, seed: int, opts: RunOptions) -> SweepRow:
    """Evaluate one sweep point; errors are captured in the row."""
    t0 = time.perf_counter()
    try:
        result = dimension(point.scenario, point.service, point.mode, seed, opts,
                           point.efficiency)
        return SweepRow(point, result, runtime_s=time.perf_counter() - t0)
    except (ValueError, ArithmeticError) as exc:
        return SweepRow(point, None, error=f"{type(exc).__name__}: {exc}",
                        runtime_s=time.perf_counter() - t0)


def _run_point_star(args):
    return run_point(*args)


def sweep(points: list[SweepPoint], seed: int = 1, opts: RunOptions = RunOptions(),
          jobs: int = 1) -> list[SweepRow]:
    """Every point uses the same seed so that curves share random numbers.

    Rows come back in point order whatever the worker count.
    """
    work = [(p, seed, opts) for p in points]
    if jobs <= 1 or len(points) <= 1:
        return [run_point(*w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_point_star, work))


def _fmt(x: float, digits: int = 4) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{digits}f}"


def _axis_str(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def row_fields(row: SweepRow) -> list[str]:
    p, r = row.point, row.result
    if r is None:
        return [_axis_str(p.value), p.mode, p.antennas] + [""] * 9 + [f"error: {row.error}"]
    status = r.status
    if status == "ok" and r.bw_required > UHF_BAND_MHZ:
        status = "exceeds_320"
    return [_axis_str(p.value), p.mode, p.antennas, _fmt(r.bw_national_sfn),
            _fmt(r.bw_regional_sfn), _fmt(r.bw_unicast), _fmt(r.bw_required),
            _fmt(r.bw_saving), _fmt(r.sinr_1pct_national_db), _fmt(r.sinr_1pct_regional_db),
            _fmt(r.load_x), _fmt(r.aggregate_blocking, 6), status]


def rows_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow(row_fields(row))
    return buf.getvalue()


@dataclass(frozen=True)
class FigurePreset:
    morphology: str
    axis: str
    values: tuple
    modes: tuple[str, ...]
    antennas: tuple[str, ...]
    overrides: dict = field(default_factory=dict)


RURAL_ISD = tuple(float(v) for v in range(4000, 16001, 2000))
URBAN_ISD = (100.0, 300.0, 500.0, 700.0, 900.0, 1100.0, 1300.0, 1500.0)
ANTENNA_CONFIGS = ("4x1", "4x4", "8x8")

FIGURES = {
    "fig5": FigurePreset("rural", "isd", RURAL_ISD, ("broadcast",), ANTENNA_CONFIGS),
    "fig6": FigurePreset("rural", "isd", RURAL_ISD, ("hybrid",), ANTENNA_CONFIGS),
    "fig7": FigurePreset("urban", "isd", URBAN_ISD, ("broadcast", "hybrid"), ANTENNA_CONFIGS),
    "fig8": FigurePreset("urban", "penetration",
                         (0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.08, 0.10, 0.15),
                         ("broadcast", "hybrid"), ("4x1",)),
    "fig9": FigurePreset("urban", "extra_programs", (0, 10, 20, 30, 40, 50),
                         ("broadcast", "hybrid"), ("4x1",)),
}
