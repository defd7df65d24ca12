"""Renewable-pull analytics: the pull value, its summary indicators,
tariff equivalences, transport shielding, and the electricity-price
screening estimate."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from renewpull.commodities import Commodity
from renewpull.scenario import RegionId

REP20_RANK = 20
REP20_SEMANTICS = "weak"  # rank-20 value met-or-exceeded by 20 exporters


def renewable_pull(domestic: float, import_c: float) -> float:
    """Relocation incentive: domestic production cost over import cost, minus one.

    Positive values mean imports undercut domestic production; 1.0 means
    the import costs half as much as producing at home.
    """
    if domestic <= 0 or import_c <= 0:
        raise ValueError(f"costs must be > 0, got domestic={domestic}, import={import_c}")
    return domestic / import_c - 1.0


def tariff_offset(tariff: float) -> float:
    """Pull value neutralized by an ad-valorem tariff.

    The tariff is a share of the tariff-inclusive import price, so a
    tariff t lifts import costs by 1/(1-t) and cancels a pull of t/(1-t).
    """
    if not 0.0 <= tariff < 1.0:
        raise ValueError(f"tariff must be in [0, 1), got {tariff}")
    return tariff / (1.0 - tariff)


def transport_shield(production_cost: float, max_transport: float) -> float:
    """Largest transport-free pull value that shipping costs can cancel.

    An energy-cost gap with pull domestic/import - 1 <= T/import is wiped
    out once transport T is added, so the shield equals T over the
    production cost base.
    """
    if production_cost <= 0:
        raise ValueError(f"production cost must be > 0, got {production_cost}")
    if max_transport < 0:
        raise ValueError(f"transport cost must be >= 0, got {max_transport}")
    return max_transport / production_cost


def price_screening(
    importer_price: float,
    exporter_price: float,
    specific_electricity: float,
    non_electric_cost: float,
    transport: float = 0.0,
) -> float:
    """Screening estimate of the pull from an electricity price gap alone.

    (C0 + E * p_importer) / (C0 + E * p_exporter + T) - 1, with E the
    specific electricity demand per ton and C0 the non-electric cost
    share. This is a simplified estimate, not the full system model.
    """
    for label, v in (
        ("importer price", importer_price),
        ("exporter price", exporter_price),
        ("specific electricity", specific_electricity),
        ("non-electric cost", non_electric_cost),
        ("transport", transport),
    ):
        if v < 0:
            raise ValueError(f"{label} must be >= 0, got {v}")
    denominator = non_electric_cost + specific_electricity * exporter_price + transport
    if denominator <= 0:
        raise ValueError("zero denominator: exporter cost basis vanishes")
    return (non_electric_cost + specific_electricity * importer_price) / denominator - 1.0


@dataclass(frozen=True)
class PullStats:
    rep_max: float
    rep_20: float
    n_positive: int
    rank: int = REP20_RANK
    short_sample: bool = False
    semantics: str = REP20_SEMANTICS

    def __post_init__(self):
        if self.rep_20 > self.rep_max:
            raise ValueError("rep_20 cannot exceed rep_max")


def pull_stats(entries: Mapping[str, float] | list[float], rank: int = REP20_RANK) -> PullStats:
    """REP_MAX and the rank-``rank`` pull value over all exporters.

    The rank value is the ``rank``-th largest entry (ties permitted), so at
    least ``rank`` exporters meet or exceed it. With fewer entries than the
    rank, the smallest entry is reported and flagged.
    """
    values = sorted(entries.values() if isinstance(entries, Mapping) else entries, reverse=True)
    if not values:
        raise ValueError("pull_stats needs at least one entry")
    short = len(values) < rank
    rep_20 = values[-1] if short else values[rank - 1]
    return PullStats(
        rep_max=values[0],
        rep_20=rep_20,
        n_positive=sum(1 for v in values if v > 0),
        rank=rank,
        short_sample=short,
    )


@dataclass(frozen=True)
class PullMatrix:
    """All pull values exerted on one importer for one product."""

    importer: RegionId
    product: Commodity
    capital_mode: str
    domestic_cost: float
    import_costs: Mapping[RegionId, float]
    entries: Mapping[RegionId, float]

    @classmethod
    def from_costs(
        cls,
        importer: RegionId | str,
        product: Commodity,
        capital_mode: str,
        domestic_cost: float,
        import_costs: Mapping[str, float],
    ) -> "PullMatrix":
        importer = RegionId(importer)
        costs: dict[RegionId, float] = {}
        entries: dict[RegionId, float] = {}
        for exporter, cost in import_costs.items():
            exporter = RegionId(exporter)
            if exporter == importer:
                continue
            costs[exporter] = cost
            entries[exporter] = renewable_pull(domestic_cost, cost)
        return cls(
            importer=importer,
            product=product,
            capital_mode=capital_mode,
            domestic_cost=domestic_cost,
            import_costs=costs,
            entries=entries,
        )

    def stats(self, rank: int = REP20_RANK) -> PullStats:
        return pull_stats(self.entries, rank=rank)
