"""Cross-checks of the fast code paths against the brute-force oracles."""

from __future__ import annotations

import numpy as np

from . import oracles
from .erlang import ErlangSystem, kaufman_roberts, mc_blocking_oracle
from .geometry import build_layout, sample_hexagon
from .propagation import cost231_urban, hata_open
from .scenario import ServiceConfig, preset_scenario
from .sfn import WeightParams, broadcast_bandwidth, weight
from .unicast import LoadModel, solve_load
from .scenario import efficiency_profile


def rel_err(x: float, ref: float) -> float:
    """Relative error, absolute below 1e-200 where doubles lose precision."""
    return abs(x - ref) / ref if abs(ref) > 1e-200 else abs(x - ref)


def _random_system(rng, max_classes=3, max_c=50):
    k = int(rng.integers(1, max_classes + 1))
    b = [int(x) for x in rng.integers(1, 11, size=k)]
    rho = [float(x) for x in rng.uniform(0.1, 8.0, size=k)]
    c = int(rng.integers(max(b), max_c + 1))
    return b, rho, c


def check_kaufman_roberts_vs_enumeration(n=100, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        b, rho, c = _random_system(rng)
        kr = kaufman_roberts(ErlangSystem(1.0, tuple(b), tuple(rho), c))
        per, agg = oracles.state_enumeration_blocking(list(zip(rho, b)), c)
        for x, y in zip(kr.per_class + (kr.aggregate,), per + [agg]):
            worst = max(worst, rel_err(x, y))
    return worst <= 1e-9, f"max relative error {worst:.2e} over {n} systems"


def check_kaufman_roberts_vs_erlang_b():
    worst = 0.0
    for rho in (0.1, 1.0, 5.0, 20.0, 80.0):
        for c in (1, 2, 10, 50, 120):
            kr = kaufman_roberts(ErlangSystem(1.0, (1,), (rho,), c)).aggregate
            ref = oracles.erlang_b(rho, c)
            worst = max(worst, rel_err(kr, ref))
    return worst <= 1e-9, f"max relative error {worst:.2e}"


def check_kaufman_roberts_vs_simulation(n=10, seed=1, duration=20_000.0):
    rng = np.random.default_rng(seed)
    bad = []
    for i in range(n):
        b, rho, c = _random_system(rng, max_c=30)
        kr = kaufman_roberts(ErlangSystem(1.0, tuple(b), tuple(rho), c)).aggregate
        mc = mc_blocking_oracle(list(zip(rho, b)), c, duration, seed + i)
        if not (abs(mc - kr) <= 0.1 * kr or abs(mc - kr) <= 1e-3):
            bad.append((kr, mc))
    return not bad, f"{n - len(bad)}/{n} within 10% relative or 1e-3 absolute"


def check_weight_function():
    p = WeightParams(400.0 / 3.0, 100.0 / 3.0)
    grid = np.linspace(-200.0, 250.0, 1_000_001)
    w = weight(grid, p)
    jump = float(np.max(np.abs(np.diff(w))))
    step = grid[1] - grid[0]
    # slope is 1/t_u, so adjacent points may differ by step/t_u
    cont = jump <= step / p.t_u + 1e-9
    rng_ok = bool(np.all((w >= 0) & (w <= 1)))
    integral = oracles.trapezoid_integral(lambda t: weight(t, p), -p.t_u, p.t_cp + p.t_u, 40_000)
    rel = abs(integral - (p.t_u + p.t_cp)) / (p.t_u + p.t_cp)
    return cont and rng_ok and rel <= 1e-6, f"max step {jump:.2e}, integral rel err {rel:.1e}"


def check_broadcast_arithmetic():
    bw = broadcast_bandwidth(ServiceConfig(), 1.0, 1.0, 3)
    ref = oracles.broadcast_bandwidth_by_hand(33, 24, 3, 7.14, 1.83, 1.0, 1.0, 3)
    return abs(bw - 343.80) <= 1e-6 and abs(bw - ref) <= 1e-9, f"{bw:.6f} MHz"


def check_path_loss_constants():
    errs = []
    for d in (0.5, 2.0, 10.0):
        errs.append(abs(hata_open(d, 630.0, 90.0, 10.0) - oracles.hata_open_by_hand(d, 630.0, 90.0, 10.0)))
        errs.append(abs(cost231_urban(d, 630.0, 30.0, 1.5) - oracles.cost231_by_hand(d, 630.0, 30.0, 1.5)))
    worst = max(errs)
    return worst <= 1e-9, f"max deviation {worst:.1e} dB"


def check_hexagon_sampler(n=400_000, seed=3):
    xy = sample_hexagon(n, 1000.0, np.random.default_rng(seed))
    mc = float(np.hypot(xy[:, 0], xy[:, 1]).mean())
    ref = oracles.mean_distance_to_centre(1000.0)
    rel = abs(mc - ref) / ref
    return rel <= 5e-3, f"mean distance {mc:.2f} m vs {ref:.2f} m"


def check_load_fixed_point():
    scenario = preset_scenario("urban", isd=500.0)
    layout = build_layout(500.0, 2)
    model = LoadModel(scenario, layout, efficiency_profile(scenario, "unicast"), 5,
                      n_nodes=16, n_draws=200)
    zero = solve_load(scenario, layout, 0.0, 0.0, 20.0, 5, model=model).x
    full = solve_load(scenario, layout, 1e6, 1e6, 20.0, 5, model=model).x
    demand = 10.0 * 7.14 + 2.0 * 1.83
    sol = solve_load(scenario, layout, 10.0, 2.0, 100.0, 5, model=model)
    ref = oracles.bisect_root(lambda x: x - min(model.load_map(x, demand, 100.0), 1.0))
    ok = zero == 0.0 and full == 1.0 and abs(sol.x - ref) <= 2e-3
    return ok, f"x(0)={zero}, x(inf)={full}, |x-bisection|={abs(sol.x - ref):.1e}"


CHECKS = [
    ("Kaufman-Roberts vs state enumeration", check_kaufman_roberts_vs_enumeration, False),
    ("Kaufman-Roberts vs Erlang-B", check_kaufman_roberts_vs_erlang_b, False),
    ("Kaufman-Roberts vs loss-system simulation", check_kaufman_roberts_vs_simulation, True),
    ("SFN weight function", check_weight_function, False),
    ("broadcast bandwidth arithmetic", check_broadcast_arithmetic, False),
    ("path loss hand constants", check_path_loss_constants, False),
    ("hexagon sampler mean distance", check_hexagon_sampler, False),
    ("load fixed point vs bisection", check_load_fixed_point, False),
]


def run_checks(quick: bool = False):
    """Yield ``(name, passed, detail)`` for every check."""
    for name, fn, slow in CHECKS:
        if quick and slow:
            continue
        try:
            ok, detail = fn()
        except Exception as exc:  # report, keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        yield name, bool(ok), detail
