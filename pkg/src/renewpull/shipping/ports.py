"""Port tables and the one-port-per-cardinal-direction selection rule."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import pandas as pd

from renewpull.scenario import RegionId

CARDINALS = ("N", "E", "S", "W")


class NoPortsError(ValueError):
    """A region has no usable port and drops out of the export set."""


@dataclass(frozen=True)
class Port:
    region: RegionId
    name: str
    lat: float
    lon: float
    max_length: float | None = None
    max_breadth: float | None = None
    max_draught: float | None = None
    cardinal: str | None = None

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"port {self.name!r}: latitude {self.lat} out of range")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"port {self.name!r}: longitude {self.lon} out of range")
        if self.max_length is None and self.max_breadth is None and self.max_draught is None:
            raise ValueError(
                f"port {self.name!r}: at least one of length/breadth/draught required"
            )
        if self.cardinal is not None and self.cardinal not in CARDINALS:
            raise ValueError(f"port {self.name!r}: cardinal must be one of {CARDINALS}")


def derive_cardinal(port_lat: float, port_lon: float, center_lat: float, center_lon: float) -> str:
    """Cardinal direction of a port relative to its country's port centroid."""
    dlat = port_lat - center_lat
    dlon = (port_lon - center_lon + 180.0) % 360.0 - 180.0
    east = dlon * math.cos(math.radians(center_lat))
    if abs(dlat) >= abs(east):
        return "N" if dlat >= 0 else "S"
    return "E" if east >= 0 else "W"


def load_ports(path: str | Path) -> list[Port]:
    """Read a port table CSV; a cardinal column is optional.

    Required columns: region, name, lat, lon, max_length, max_breadth,
    max_draught (dimension cells may be blank). Ports without a cardinal
    are assigned one from their bearing relative to the mean position of
    the region's ports.
    """
    frame = pd.read_csv(path, comment="#")
    required = ["region", "name", "lat", "lon", "max_length", "max_breadth", "max_draught"]
    for column in required:
        if column not in frame.columns:
            raise ValueError(f"{path}: missing column {column!r}")
    has_cardinal = "cardinal" in frame.columns

    def opt(value):
        return None if pd.isna(value) else float(value)

    records: list[dict] = []
    for _, row in frame.iterrows():
        records.append(
            {
                "region": RegionId(row["region"]),
                "name": str(row["name"]),
                "lat": float(row["lat"]),
                "lon": float(row["lon"]),
                "max_length": opt(row["max_length"]),
                "max_breadth": opt(row["max_breadth"]),
                "max_draught": opt(row["max_draught"]),
                "cardinal": (
                    str(row["cardinal"])
                    if has_cardinal and not pd.isna(row["cardinal"])
                    else None
                ),
            }
        )

    centers: dict[RegionId, tuple[float, float]] = {}
    for rec in records:
        centers.setdefault(rec["region"], (0.0, 0.0))
    for region in centers:
        member = [r for r in records if r["region"] == region]
        centers[region] = (
            sum(r["lat"] for r in member) / len(member),
            sum(r["lon"] for r in member) / len(member),
        )

    ports = []
    for rec in records:
        if rec["cardinal"] is None:
            clat, clon = centers[rec["region"]]
            rec["cardinal"] = derive_cardinal(rec["lat"], rec["lon"], clat, clon)
        ports.append(Port(**rec))
    return ports


def _rank(port: Port) -> tuple:
    neg_inf = float("-inf")
    return (
        port.max_length if port.max_length is not None else neg_inf,
        port.max_breadth if port.max_breadth is not None else neg_inf,
        port.max_draught if port.max_draught is not None else neg_inf,
        port.name,  # deterministic tie-break
    )


def select_ports(
    ports: Sequence[Port],
    region: RegionId | str,
    overrides: Mapping[tuple[str, str], str] | None = None,
) -> dict[str, Port]:
    """Pick up to four ports for a region, one per cardinal direction.

    Per direction the port able to handle the longest ship wins; breadth
    and draught serve as fallback keys when length data is missing. Manual
    overrides, keyed by (region, cardinal), take precedence.
    """
    region = RegionId(region)
    mine = [p for p in ports if p.region == region]
    if not mine:
        raise NoPortsError(f"region {region} has no ports")
    overrides = overrides or {}
    chosen: dict[str, Port] = {}
    for cardinal in CARDINALS:
        override_name = overrides.get((str(region), cardinal))
        if override_name is not None:
            match = [p for p in mine if p.name == override_name]
            if not match:
                raise ValueError(
                    f"override for {region}/{cardinal} names unknown port {override_name!r}"
                )
            chosen[cardinal] = match[0]
            continue
        candidates = [p for p in mine if p.cardinal == cardinal]
        if candidates:
            chosen[cardinal] = max(candidates, key=_rank)
    return chosen
