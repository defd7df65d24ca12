"""Country model with import options for hydrogen and intermediates.

Extends the single-node system with purchase variables for import offers
(priced at their specific cost and bounded by an annual limit) feeding the
respective commodity balance, while domestic production of the same
commodity stays available. Offer lists can be restricted to EU-network
sources or widened to admit HBI.
"""

from __future__ import annotations

from dataclasses import dataclass

from renewpull.commodities import Commodity
from renewpull.scenario import ScenarioModel
from renewpull.tsa import TypicalPeriodSet
from renewpull.esom.lp import LinearProgram
from renewpull.esom.model1 import ModelConfigError, SystemBuilder

EU_NETWORK_SOURCE = "EU-network"
WORLD_SOURCE = "world"

RESTRICTIONS = ("none", "eu_only", "plus_hbi")

_DEFAULT_CARRIERS = frozenset({Commodity.HYDROGEN, Commodity.METHANOL})


@dataclass(frozen=True)
class ImportOffer:
    """One priced supply option for an importable carrier."""

    source: str  # region code, EU_NETWORK_SOURCE, or WORLD_SOURCE
    carrier: Commodity
    specific_cost: float  # EUR per carrier unit (t, or MWh for hydrogen)
    annual_limit: float

    def __post_init__(self):
        if self.specific_cost <= 0:
            raise ValueError(f"offer {self.source}: specific cost must be > 0")
        if self.annual_limit <= 0:
            raise ValueError(f"offer {self.source}: annual limit must be > 0")

    @property
    def tag(self) -> str:
        return f"{self.source}.{self.carrier.value}"


def filter_import_offers(
    offers: list[ImportOffer], min_suppliers: int = 10
) -> ImportOffer | None:
    """Collapse per-country offers into one diversified world offer.

    The synthetic offer is priced at the ``min_suppliers``-th cheapest
    specific cost, so at least that many countries could supply at or
    below it, with an annual limit equal to the combined limits of those
    suppliers. Returns None when too few offers exist.
    """
    if not offers:
        raise ValueError("no offers to filter")
    carriers = {o.carrier for o in offers}
    if len(carriers) != 1:
        raise ValueError(f"offers mix carriers: {sorted(c.value for c in carriers)}")
    if len(offers) < min_suppliers:
        return None
    ranked = sorted(offers, key=lambda o: (o.specific_cost, o.source))
    chosen = ranked[:min_suppliers]
    return ImportOffer(
        source=WORLD_SOURCE,
        carrier=chosen[0].carrier,
        specific_cost=chosen[-1].specific_cost,
        annual_limit=sum(o.annual_limit for o in chosen),
    )


def restrict_offers(offers: list[ImportOffer], restriction: str) -> list[ImportOffer]:
    if restriction not in RESTRICTIONS:
        raise ValueError(f"restriction must be one of {RESTRICTIONS}, got {restriction!r}")
    if restriction == "plus_hbi":
        carriers = _DEFAULT_CARRIERS | {Commodity.HBI}
        kept = [o for o in offers if o.carrier in carriers]
    elif restriction == "eu_only":
        kept = [
            o
            for o in offers
            if o.source == EU_NETWORK_SOURCE and o.carrier in _DEFAULT_CARRIERS
        ]
    else:
        kept = [o for o in offers if o.carrier in _DEFAULT_CARRIERS]
    return kept


def build_model3(
    scenario: ScenarioModel,
    periods: TypicalPeriodSet,
    offers: list[ImportOffer],
    restriction: str = "none",
    demand_factor: float = 1.0,
    name: str | None = None,
) -> LinearProgram:
    """Single-node model with the admitted import offers attached."""
    admitted = restrict_offers(offers, restriction)
    lp = LinearProgram(
        name or f"model3.{scenario.region}.{scenario.product.value}.{restriction}"
    )
    builder = SystemBuilder(lp, scenario, periods, demand_factor=demand_factor)
    builder.presolve_screen()
    builder.build_components()
    seen: dict[str, int] = {}
    for offer in admitted:
        tag = offer.tag
        if tag in seen:
            seen[tag] += 1
            tag = f"{tag}.{seen[offer.tag]}"
        else:
            seen[tag] = 0
        builder.add_import(tag, offer.carrier, offer.specific_cost, offer.annual_limit)
    builder.add_target_row(scenario.annual_target)
    builder.finalize_balances()
    lp.meta = {"kind": "model3", "restriction": restriction, **builder.meta()}
    return lp
