"""Per-voyage economics: round trips, throughput, and specific cost."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from renewpull.commodities import Commodity
from renewpull.finance import annuity

HOURS_PER_DAY = 24.0


@dataclass(frozen=True)
class ShipSpec:
    """Techno-economic description of one cargo ship class."""

    cargo: Commodity
    capacity_t: float
    speed_kn: float
    capex: float
    lifetime: float
    maintenance: float = 0.0  # fraction of capex per year
    insurance: float = 0.0  # fraction of capex per year
    labor: float = 0.0  # EUR per year
    port_days: float = 0.0  # days per port call
    port_fee: float = 0.0  # EUR per call
    availability_h: float = 8760.0
    fuel_per_nm: float = 0.0  # EUR per nautical mile sailed

    def __post_init__(self):
        if self.capacity_t <= 0:
            raise ValueError(f"ship capacity must be > 0, got {self.capacity_t}")
        if self.speed_kn <= 0:
            raise ValueError(f"ship speed must be > 0, got {self.speed_kn}")
        for label, frac in (("maintenance", self.maintenance), ("insurance", self.insurance)):
            if not 0.0 <= frac < 1.0:
                raise ValueError(f"{label} must be in [0, 1), got {frac}")
        if not 0.0 < self.availability_h <= 8760.0:
            raise ValueError(f"availability must be in (0, 8760] h, got {self.availability_h}")
        if self.port_days < 0 or self.port_fee < 0 or self.labor < 0 or self.fuel_per_nm < 0:
            raise ValueError("port_days, port_fee, labor, and fuel_per_nm must be >= 0")


@dataclass(frozen=True)
class VoyageCostReport:
    """Specific transport cost of one exporter-importer pair and cargo."""

    distance_nm: float
    canals: tuple[str, ...]
    round_trips_per_year: float
    annual_throughput_t: float
    specific_cost: float  # EUR per ton shipped
    components: Mapping[str, float]  # EUR per year
    fractional_trips: bool = False

    @property
    def annual_cost(self) -> float:
        return float(sum(self.components.values()))


def voyage_cost(
    distance_nm: float,
    canals: Sequence[str],
    ship: ShipSpec,
    tolls: Mapping[str, float] | None = None,
    rate: float = 0.06,
) -> VoyageCostReport:
    """Cost one round-trip service on a fixed route.

    A round trip sails the distance twice and pays two port calls; the
    number of trips per year follows from the ship's available hours.
    Fewer than one trip per year is allowed as a fractional value but
    flagged.
    """
    if distance_nm < 0:
        raise ValueError(f"distance must be >= 0, got {distance_nm}")
    tolls = tolls or {}
    for canal in canals:
        if canal not in tolls:
            raise ValueError(f"no toll schedule for canal {canal!r}")

    sail_h = 2.0 * distance_nm / ship.speed_kn
    port_h = 2.0 * ship.port_days * HOURS_PER_DAY
    round_trip_h = sail_h + port_h
    if round_trip_h <= 0:
        raise ValueError("round-trip time is zero; set a positive distance or port time")
    trips = ship.availability_h / round_trip_h
    throughput = trips * ship.capacity_t

    toll_per_round_trip = 2.0 * sum(tolls[c] for c in canals)
    components = {
        "capital": annuity(rate, ship.lifetime) * ship.capex,
        "maintenance": ship.maintenance * ship.capex,
        "insurance": ship.insurance * ship.capex,
        "labor": ship.labor,
        "port_fees": trips * 2.0 * ship.port_fee,
        "canal_tolls": trips * toll_per_round_trip,
        "fuel": trips * 2.0 * distance_nm * ship.fuel_per_nm,
    }
    specific = sum(components.values()) / throughput
    return VoyageCostReport(
        distance_nm=distance_nm,
        canals=tuple(canals),
        round_trips_per_year=trips,
        annual_throughput_t=throughput,
        specific_cost=specific,
        components=components,
        fractional_trips=trips < 1.0,
    )


def import_cost(
    production_cost: float,
    voyage: VoyageCostReport,
    conversion_overhead: float = 0.0,
) -> float:
    """Delivered cost: exporter production plus transport plus carrier
    overhead (liquefaction for hydrogen, zero for finished goods)."""
    if production_cost < 0 or conversion_overhead < 0:
        raise ValueError("production cost and overhead must be >= 0")
    return production_cost + voyage.specific_cost + conversion_overhead
