"""Multi-rate loss system: Kaufman-Roberts blocking, a Monte Carlo oracle and
the minimum-bandwidth search."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

_RESCALE_AT = 1e250


class CapacityTooSmallError(ValueError):
    pass


@dataclass(frozen=True)
class ErlangSystem:
    """Classes with integer bandwidths ``b_units`` (in units of ``unit`` MHz)
    sharing ``capacity`` units."""

    unit: float
    b_units: tuple[int, ...]
    rho: tuple[float, ...]
    capacity: int

    def __post_init__(self):
        if len(self.b_units) != len(self.rho):
            raise ValueError("b_units and rho must have equal length")
        if any(b < 1 for b in self.b_units):
            raise ValueError("class bandwidths must be >= 1 unit")
        if any(r < 0 for r in self.rho):
            raise ValueError("traffic intensities must be >= 0")

    @classmethod
    def from_classes(cls, classes: Iterable, bw: float, unit: float = 0.1) -> "ErlangSystem":
        """Discretise ``(rho, b_mhz)`` pairs or objects with ``.rho``/``.b``."""
        rho, b = _unpack(classes)
        b_units = tuple(discretize(x, unit) for x in b)
        return cls(unit=unit, b_units=b_units, rho=tuple(rho),
                   capacity=int(math.floor(bw / unit + 1e-9)))


@dataclass(frozen=True)
class BlockingResult:
    per_class: tuple[float, ...]
    aggregate: float  # traffic weighted
    unweighted_sum: float  # literal sum of per-class terms


def discretize(b: float, unit: float) -> int:
    return max(1, int(round(b / unit)))


def _unpack(classes) -> tuple[list[float], list[float]]:
    rho, b = [], []
    for c in classes:
        if hasattr(c, "rho"):
            rho.append(float(c.rho))
            b.append(float(c.b))
        else:
            r, w = c
            rho.append(float(r))
            b.append(float(w))
    return rho, b


def occupancy_weights(b_units: Sequence[int], rho: Sequence[float], c_max: int) -> np.ndarray:
    """Unnormalised occupancy weights G(0..c_max) by the Kaufman-Roberts recursion.

    Values are rescaled on the fly to stay finite; only ratios are meaningful.
    """
    b = np.asarray(b_units, dtype=int)
    a = np.asarray(rho, dtype=float) * b
    keep = a > 0
    b, a = b[keep], a[keep]
    off = int(b.max()) if b.size else 0
    g = np.zeros(off + c_max + 1)
    g[off] = 1.0
    if b.size == 0:
        return g[off:]
    idx = off - b
    for c in range(1, c_max + 1):
        v = np.dot(a, g[idx + c]) / c
        g[off + c] = v
        if v > _RESCALE_AT:
            g[:off + c + 1] /= v
    return g[off:]


def _blocking_from_weights(g: np.ndarray, b_units, rho, capacity: int) -> BlockingResult:
    g = g[:capacity + 1]
    total = g.sum()
    # Tail sums taken directly: differences of cumulative sums lose tiny blocking values.
    per = [float(g[capacity + 1 - b:].sum() / total) for b in b_units]
    rho = np.asarray(rho, dtype=float)
    per_arr = np.asarray(per)
    weight = rho.sum()
    agg = float(np.dot(rho, per_arr) / weight) if weight > 0 else 0.0
    unweighted = float(per_arr[rho > 0].sum())
    return BlockingResult(per_class=tuple(per), aggregate=agg, unweighted_sum=unweighted)


def kaufman_roberts(system: ErlangSystem) -> BlockingResult:
    """Per-class time congestion and aggregate blocking of ``system``.

    Classes with zero traffic report the blocking an arrival would see, but
    carry no weight in the aggregate.
    """
    if system.b_units and system.capacity < max(system.b_units):
        raise CapacityTooSmallError(
            f"capacity {system.capacity} < largest class {max(system.b_units)} units")
    g = occupancy_weights(system.b_units, system.rho, system.capacity)
    return _blocking_from_weights(g, system.b_units, system.rho, system.capacity)


def min_bandwidth(classes, blocking_target: float, unit: float = 0.1,
                  ceiling: float | None = None) -> float:
    """Smallest ``C * unit`` (MHz) whose aggregate blocking meets the target.

    Exponential bracketing then bisection on ``C``. Returns ``inf`` when the
    target is not met at ``ceiling``.
    """
    rho, b = _unpack(classes)
    if not rho:
        raise ValueError("classes must be nonempty")
    b_units = [discretize(x, unit) for x in b]
    c_min = max(b_units)
    c_cap = None if ceiling is None else int(math.floor(ceiling / unit + 1e-9))
    if c_cap is not None and c_cap < c_min:
        return math.inf

    g = occupancy_weights(b_units, rho, c_min)

    def ok(c: int) -> bool:
        nonlocal g
        if c >= g.size:
            g = occupancy_weights(b_units, rho, max(c, 2 * g.size))
        return _blocking_from_weights(g, b_units, rho, c).aggregate <= blocking_target

    if ok(c_min):
        return c_min * unit
    lo, hi = c_min, 2 * c_min
    while not ok(hi):
        if c_cap is not None and hi >= c_cap:
            return math.inf
        lo, hi = hi, 2 * hi
        if c_cap is not None:
            hi = min(hi, c_cap)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi * unit


def mc_blocking_oracle(classes, bw: float, duration: float, seed: int,
                       holding_time: float = 1.0, per_class: bool = False):
    """Time-averaged blocking of a multi-rate loss system by direct simulation.

    Poisson arrivals at rate ``rho_k / holding_time``, exponential holding,
    admission iff occupancy plus the new link fits in ``bw``; blocked
    arrivals are lost. Class ``k`` is blocked while occupancy exceeds
    ``bw - b_k``; the aggregate weights classes by traffic.
    """
    rho, b = _unpack(classes)
    rho = np.asarray(rho, dtype=float)
    b = np.asarray(b, dtype=float)
    k = len(rho)
    lam = rho / holding_time
    mu = 1.0 / holding_time
    rng = np.random.default_rng(seed)
    n = np.zeros(k, dtype=int)
    occ = 0.0
    t = 0.0
    blocked_time = np.zeros(k)
    eps = 1e-9 * max(bw, 1.0)
    lam_total = lam.sum()
    while t < duration:
        dep_rates = n * mu
        total = lam_total + dep_rates.sum()
        if total <= 0:
            break
        dt = min(rng.exponential(1.0 / total), duration - t)
        blocked_time += dt * (occ + b > bw + eps)
        t += dt
        if t >= duration:
            break
        u = rng.random() * total
        if u < lam_total:
            j = int(np.searchsorted(np.cumsum(lam), u, side="right"))
            j = min(j, k - 1)
            if occ + b[j] <= bw + eps:
                n[j] += 1
                occ += b[j]
        else:
            j = int(np.searchsorted(np.cumsum(dep_rates), u - lam_total, side="right"))
            j = min(j, k - 1)
            n[j] -= 1
            occ = float(np.dot(n, b))
    frac = blocked_time / max(t, 1e-300)
    agg = float(np.dot(rho, frac) / rho.sum()) if rho.sum() > 0 else 0.0
    if per_class:
        return agg, tuple(float(x) for x in frac)
    return agg
