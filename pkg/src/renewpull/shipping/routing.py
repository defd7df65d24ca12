"""Ocean-raster routing with canal edges.

The world's water surface is a lat/lon raster of water cells; adjacent
water cells (8-neighborhood, wrapping across the antimeridian) are joined
by great-circle edges, and canals are explicit extra edges carrying an id
and a toll. Edge lengths are stored as integer micro-nautical-miles so
path lengths add exactly and routing is strictly symmetric.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

EARTH_RADIUS_NM = 3440.065
_SCALE = 1_000_000  # micro-nm per nm


class SnapError(ValueError):
    """A coordinate has no water cell within the snap radius."""


def haversine_nm(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in nautical miles."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2.0) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_NM * math.asin(min(1.0, math.sqrt(a)))


@dataclass(frozen=True)
class Route:
    """One shortest sea route between two snapped positions."""

    distance_nm: float
    canals: tuple[str, ...]
    nodes: tuple[tuple[int, int], ...] = ()


@dataclass(frozen=True)
class CanalEdge:
    canal_id: str
    a: tuple[int, int]
    b: tuple[int, int]
    toll_eur: float


class OceanGraph:
    """Immutable routing graph over a water mask."""

    def __init__(
        self,
        water: np.ndarray,
        lat_top: float,
        lon_left: float,
        cell_deg: float,
        wrap_lon: bool = True,
    ):
        water = np.asarray(water, dtype=bool)
        if water.ndim != 2:
            raise ValueError("water mask must be a 2-D grid")
        self.water = water
        self.lat_top = float(lat_top)
        self.lon_left = float(lon_left)
        self.cell_deg = float(cell_deg)
        self.wrap_lon = wrap_lon
        self.n_lat, self.n_lon = water.shape
        self._canals: list[CanalEdge] = []
        self._adjacency: dict[tuple[int, int], list[tuple[tuple[int, int], int, str | None]]] = {}
        self._build_adjacency()

    # --- geometry -----------------------------------------------------------

    def cell_center(self, cell: tuple[int, int]) -> tuple[float, float]:
        i, j = cell
        lat = self.lat_top - (i + 0.5) * self.cell_deg
        lon = self.lon_left + (j + 0.5) * self.cell_deg
        return lat, lon

    def _edge_weight(self, a: tuple[int, int], b: tuple[int, int]) -> int:
        lat1, lon1 = self.cell_center(a)
        lat2, lon2 = self.cell_center(b)
        return max(1, round(haversine_nm(lat1, lon1, lat2, lon2) * _SCALE))

    def _build_adjacency(self) -> None:
        offsets = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
        for i in range(self.n_lat):
            for j in range(self.n_lon):
                if not self.water[i, j]:
                    continue
                here = (i, j)
                neighbors = []
                for di, dj in offsets:
                    ni, nj = i + di, j + dj
                    if not 0 <= ni < self.n_lat:
                        continue
                    if self.wrap_lon:
                        nj %= self.n_lon
                    elif not 0 <= nj < self.n_lon:
                        continue
                    if self.water[ni, nj]:
                        neighbors.append(((ni, nj), self._edge_weight(here, (ni, nj)), None))
                self._adjacency[here] = neighbors

    def add_canal(
        self,
        canal_id: str,
        a_latlon: tuple[float, float],
        b_latlon: tuple[float, float],
        toll_eur: float,
        snap_radius: int = 3,
    ) -> None:
        a = self.snap(*a_latlon, max_radius=snap_radius)
        b = self.snap(*b_latlon, max_radius=snap_radius)
        weight = self._edge_weight(a, b)
        self._adjacency[a].append((b, weight, canal_id))
        self._adjacency[b].append((a, weight, canal_id))
        self._canals.append(CanalEdge(canal_id, a, b, toll_eur))

    @property
    def canals(self) -> tuple[CanalEdge, ...]:
        return tuple(self._canals)

    # --- snapping ------------------------------------------------------------

    def cell_of(self, lat: float, lon: float) -> tuple[int, int]:
        i = int(math.floor((self.lat_top - lat) / self.cell_deg))
        j = int(math.floor((lon - self.lon_left) / self.cell_deg))
        if self.wrap_lon:
            j %= self.n_lon
        i = min(max(i, 0), self.n_lat - 1)
        j = min(max(j, 0), self.n_lon - 1)
        return i, j

    def snap(self, lat: float, lon: float, max_radius: int = 3) -> tuple[int, int]:
        """Nearest water cell within a Chebyshev radius, else an error."""
        i0, j0 = self.cell_of(lat, lon)
        best = None
        for radius in range(max_radius + 1):
            ring = []
            for di in range(-radius, radius + 1):
                for dj in range(-radius, radius + 1):
                    if max(abs(di), abs(dj)) != radius:
                        continue
                    ni, nj = i0 + di, j0 + dj
                    if not 0 <= ni < self.n_lat:
                        continue
                    if self.wrap_lon:
                        nj %= self.n_lon
                    elif not 0 <= nj < self.n_lon:
                        continue
                    if self.water[ni, nj]:
                        clat, clon = self.cell_center((ni, nj))
                        ring.append((haversine_nm(lat, lon, clat, clon), (ni, nj)))
            if ring:
                ring.sort()
                best = ring[0][1]
                break
        if best is None:
            raise SnapError(
                f"no water within {max_radius} cells of ({lat:.3f}, {lon:.3f})"
            )
        return best

    # --- routing ---------------------------------------------------------------

    def route(
        self,
        a_latlon: tuple[float, float],
        b_latlon: tuple[float, float],
        closed_canals: Iterable[str] = (),
        snap_radius: int = 3,
    ) -> Route | None:
        """Shortest path by Dijkstra; None when the pair is unreachable."""
        start = self.snap(*a_latlon, max_radius=snap_radius)
        goal = self.snap(*b_latlon, max_radius=snap_radius)
        closed = frozenset(closed_canals)
        if start == goal:
            return Route(distance_nm=0.0, canals=(), nodes=(start,))

        dist: dict[tuple[int, int], int] = {start: 0}
        prev: dict[tuple[int, int], tuple[tuple[int, int], str | None]] = {}
        heap: list[tuple[int, tuple[int, int]]] = [(0, start)]
        while heap:
            d, node = heapq.heappop(heap)
            if d > dist.get(node, d):
                continue
            if node == goal:
                break
            for neighbor, weight, canal in self._adjacency.get(node, ()):
                if canal is not None and canal in closed:
                    continue
                nd = d + weight
                if neighbor not in dist or nd < dist[neighbor]:
                    dist[neighbor] = nd
                    prev[neighbor] = (node, canal)
                    heapq.heappush(heap, (nd, neighbor))
        if goal not in dist:
            return None

        canals: list[str] = []
        nodes = [goal]
        node = goal
        while node != start:
            node, canal = prev[node]
            nodes.append(node)
            if canal is not None:
                canals.append(canal)
        nodes.reverse()
        canals.reverse()
        return Route(
            distance_nm=dist[goal] / _SCALE,
            canals=tuple(canals),
            nodes=tuple(nodes),
        )


def load_ocean_mask(path: str | Path) -> OceanGraph:
    """Read a gridded 0/1 water mask with a metadata comment line.

    First line: ``# lat_top=<deg> lon_left=<deg> cell_deg=<deg> [wrap=0|1]``,
    then one CSV row of 0/1 flags per latitude band from north to south.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise ValueError(f"{path}: first line must be the metadata comment")
        meta = {}
        for token in header.lstrip("#").split():
            key, _, value = token.partition("=")
            meta[key] = value
        rows = [line.strip() for line in fh if line.strip()]
    try:
        lat_top = float(meta["lat_top"])
        lon_left = float(meta["lon_left"])
        cell_deg = float(meta["cell_deg"])
    except KeyError as exc:
        raise ValueError(f"{path}: metadata key {exc} missing") from None
    wrap = meta.get("wrap", "1") not in ("0", "false", "False")
    grid = np.array([[int(v) for v in row.split(",")] for row in rows], dtype=bool)
    return OceanGraph(grid, lat_top=lat_top, lon_left=lon_left, cell_deg=cell_deg, wrap_lon=wrap)


def write_ocean_mask(path: str | Path, water: np.ndarray, lat_top: float, lon_left: float,
                     cell_deg: float, wrap: bool = True) -> None:
    water = np.asarray(water, dtype=int)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# lat_top={lat_top} lon_left={lon_left} cell_deg={cell_deg} wrap={int(wrap)}\n")
        for row in water:
            fh.write(",".join(str(int(v)) for v in row) + "\n")
