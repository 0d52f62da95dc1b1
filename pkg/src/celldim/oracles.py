"""Brute-force references used to cross-check the fast implementations.

Kept deliberately naive: no shared code with the modules they check.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence


class StateSpaceTooLargeError(ValueError):
    pass


def erlang_b(rho: float, c_servers: int) -> float:
    """Erlang-B blocking by the stable recurrence, starting from E_0 = 1."""
    if c_servers < 0:
        raise ValueError("c_servers must be >= 0")
    e = 1.0
    for c in range(1, c_servers + 1):
        e = rho * e / (c + rho * e)
    return e


def state_enumeration_blocking(classes: Sequence[tuple[float, int]], c_units: int,
                               max_states: int = 1_000_000):
    """Exact blocking of a multi-rate loss system by walking every admissible state.

    ``classes`` holds ``(rho_k, b_k)`` with integer ``b_k``. The stationary law
    is the truncated product of Poisson terms. Returns
    ``(per_class, traffic_weighted_aggregate)``.
    """
    rho = [float(r) for r, _ in classes]
    b = [int(w) for _, w in classes]
    k = len(b)
    per_num = [0.0] * k
    total = 0.0
    count = 0
    n = [0] * k

    def walk(i: int, used: int, logw: float):
        nonlocal total, count
        if i == k:
            count += 1
            if count > max_states:
                raise StateSpaceTooLargeError(f"more than {max_states} states")
            w = math.exp(logw)
            total += w
            for j in range(k):
                if used + b[j] > c_units:
                    per_num[j] += w
            return
        m = 0
        while used + m * b[i] <= c_units:
            n[i] = m
            term = 0.0 if m == 0 else (m * math.log(rho[i]) - math.lgamma(m + 1)
                                       if rho[i] > 0 else -math.inf)
            if term == -math.inf:
                break
            walk(i + 1, used + m * b[i], logw + term)
            m += 1
        n[i] = 0

    walk(0, 0, 0.0)
    per = [x / total for x in per_num]
    weight = sum(rho)
    agg = sum(r * p for r, p in zip(rho, per)) / weight if weight > 0 else 0.0
    return per, agg


def bisect_root(g: Callable[[float], float], lo: float = 0.0, hi: float = 1.0,
                tol: float = 1e-6) -> float:
    """Root of a function that changes sign on ``[lo, hi]``; endpoints if it does not."""
    glo, ghi = g(lo), g(hi)
    if glo >= 0:
        return lo
    if ghi <= 0:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def hata_open_by_hand(d_km: float, f: float, hb: float, hm: float) -> float:
    """Okumura-Hata open-area loss within 20 km, small/medium-city mobile correction."""
    lf = math.log10(f)
    a_hm = (1.1 * lf - 0.7) * hm - (1.56 * lf - 0.8)
    urban = 69.55 + 26.16 * lf - 13.82 * math.log10(hb) - a_hm \
        + (44.9 - 6.55 * math.log10(hb)) * math.log10(d_km)
    return urban - 4.78 * lf ** 2 + 18.33 * lf - 40.94


def cost231_by_hand(d_km: float, f: float, hb: float, hm: float, c_m: float = 3.0) -> float:
    """COST-231 Hata within 20 km with the large-city mobile correction (f >= 300 MHz)."""
    a_hm = 3.2 * math.log10(11.75 * hm) ** 2 - 4.97
    return 46.3 + 33.9 * math.log10(f) - 13.82 * math.log10(hb) - a_hm \
        + (44.9 - 6.55 * math.log10(hb)) * math.log10(d_km) + c_m


def broadcast_bandwidth_by_hand(n_hd_national: int, n_sd_national: int, n_hd_regional: int,
                                r_hd: float, r_sd: float, ese_national: float,
                                ese_regional: float, regions: int) -> float:
    return ((n_hd_national * r_hd + n_sd_national * r_sd) / ese_national
            + regions * n_hd_regional * r_hd / ese_regional)


def trapezoid_integral(f: Callable[[float], float], a: float, b: float, n: int) -> float:
    """Composite trapezoid rule with ``n`` panels."""
    h = (b - a) / n
    s = 0.5 * (f(a) + f(b)) + sum(f(a + i * h) for i in range(1, n))
    return s * h


def mean_distance_to_centre(isd: float, n: int = 400) -> float:
    """Mean distance from the centre of a pointy-top hexagon (inradius isd/2).

    Midpoint rule over one of the six identical 30-60-90 halves of a
    sector triangle, in polar coordinates.
    """
    apothem = isd / 2.0
    num = den = 0.0
    for i in range(n):
        phi = (i + 0.5) * (math.pi / 6.0) / n
        r_max = apothem / math.cos(phi)
        num += r_max ** 3 / 3.0
        den += r_max ** 2 / 2.0
    return num / den
