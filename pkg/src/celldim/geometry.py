"""Regular hexagonal site layout and user sampling in the evaluated cell."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT3 = math.sqrt(3.0)

# Axial step directions of a hex lattice, counter-clockwise from +x.
_AXIAL_DIRS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


@dataclass(frozen=True)
class HexLayout:
    """Sites on a hex lattice; site 0 is the evaluated cell at the origin.

    ``axial`` holds integer lattice coordinates ``(i, j)`` with position
    ``isd * (i + j/2, j*sqrt(3)/2)``. ``region_mask`` is True for sites that
    belong to the evaluated cell's region.
    """

    isd: float
    rings: int
    axial: np.ndarray
    site_positions: np.ndarray
    ring_index: np.ndarray
    region_mask: np.ndarray

    @property
    def n_sites(self) -> int:
        return len(self.site_positions)


@dataclass(frozen=True)
class UserPosition:
    coordinates: np.ndarray
    distance_to_site: np.ndarray


def hex_ring(k: int) -> list[tuple[int, int]]:
    """Axial coordinates of ring ``k`` (6k sites), walked counter-clockwise."""
    if k == 0:
        return [(0, 0)]
    i, j = k * _AXIAL_DIRS[4][0], k * _AXIAL_DIRS[4][1]
    cells = []
    for side in range(6):
        di, dj = _AXIAL_DIRS[(side + 0) % 6]
        for _ in range(k):
            cells.append((i, j))
            i, j = i + di, j + dj
    return cells


def axial_to_xy(axial: np.ndarray, isd: float) -> np.ndarray:
    axial = np.asarray(axial, dtype=float)
    x = isd * (axial[..., 0] + 0.5 * axial[..., 1])
    y = isd * (SQRT3 / 2.0) * axial[..., 1]
    return np.stack([x, y], axis=-1)


def build_layout(isd: float, rings: int, region_split: bool = False) -> HexLayout:
    """Full hex lattice with ``1 + 3*rings*(rings+1)`` sites centred on cell 0.

    With ``region_split`` the sites strictly right of the y axis belong to
    another region: they carry different regional content on other
    frequencies and are silent on the evaluated region's sub-band.
    """
    if rings < 1:
        raise ValueError("rings must be >= 1")
    if isd <= 0:
        raise ValueError("isd must be > 0")
    axial, ring_index = [], []
    for k in range(rings + 1):
        cells = hex_ring(k)
        axial.extend(cells)
        ring_index.extend([k] * len(cells))
    axial = np.array(axial, dtype=int)
    pos = axial_to_xy(axial, isd)
    if region_split:
        # 2*x/isd = 2i + j is an exact integer test for x > 0.
        region = (2 * axial[:, 0] + axial[:, 1]) <= 0
    else:
        region = np.ones(len(axial), dtype=bool)
    return HexLayout(isd=float(isd), rings=rings, axial=axial, site_positions=pos,
                     ring_index=np.array(ring_index), region_mask=region)


def hexagon_vertices(isd: float) -> np.ndarray:
    """Vertices of cell 0's Voronoi hexagon (pointy-top, circumradius isd/sqrt3)."""
    a = isd / SQRT3
    angles = np.deg2rad(30.0 + 60.0 * np.arange(6))
    return np.stack([a * np.cos(angles), a * np.sin(angles)], axis=-1)


def hexagon_area(isd: float) -> float:
    return SQRT3 / 2.0 * isd ** 2


def cell_radius(isd: float) -> float:
    """Radius of the disc with the same area as one hexagonal cell."""
    if isd <= 0:
        raise ValueError("isd must be > 0")
    return isd * math.sqrt(SQRT3 / (2.0 * math.pi))


def in_hexagon(xy: np.ndarray, isd: float, tol: float = 1e-9) -> np.ndarray:
    """Point-in-cell-0 test: within isd/2 of the origin along all six neighbour axes."""
    xy = np.asarray(xy, dtype=float)
    angles = np.deg2rad(60.0 * np.arange(3))
    proj = xy @ np.stack([np.cos(angles), np.sin(angles)])
    return np.all(np.abs(proj) <= isd / 2.0 * (1.0 + tol), axis=-1)


def sample_hexagon(n: int, isd: float, rng: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. uniform points in cell 0, shape ``(n, 2)``.

    Picks one of the six equal triangles fanning out from the centre, then a
    uniform point in it by the folded-parallelogram trick.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    verts = hexagon_vertices(isd)
    tri = rng.integers(0, 6, size=n)
    u = rng.random(n)
    v = rng.random(n)
    fold = u + v > 1.0
    u = np.where(fold, 1.0 - u, u)
    v = np.where(fold, 1.0 - v, v)
    a = verts[tri]
    b = verts[(tri + 1) % 6]
    return u[:, None] * a + v[:, None] * b


def site_distances(xy: np.ndarray, layout: HexLayout) -> np.ndarray:
    """Distances, shape ``(n_users, n_sites)``."""
    diff = np.asarray(xy)[:, None, :] - layout.site_positions[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def sample_users(layout: HexLayout, n: int, rng_seed: int) -> list[UserPosition]:
    rng = np.random.default_rng(rng_seed)
    xy = sample_hexagon(n, layout.isd, rng)
    dist = site_distances(xy, layout)
    return [UserPosition(coordinates=xy[k], distance_to_site=dist[k]) for k in range(n)]


def layout_csv(layout: HexLayout) -> str:
    rows = ["site,ring,x_m,y_m,in_region"]
    for k, (x, y) in enumerate(layout.site_positions):
        rows.append(f"{k},{layout.ring_index[k]},{x:.3f},{y:.3f},{int(layout.region_mask[k])}")
    return "\n".join(rows) + "\n"
