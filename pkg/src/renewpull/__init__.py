"""Country-scale renewable production-cost optimization, maritime import
costing, and relocation-incentive analytics."""

__version__ = "0.1.0"

from renewpull.commodities import Commodity
from renewpull.finance import annuity, effective_rate
from renewpull.pull import (
    PullMatrix,
    PullStats,
    price_screening,
    pull_stats,
    renewable_pull,
    tariff_offset,
    transport_shield,
)
from renewpull.scenario import (
    RegionId,
    ScenarioError,
    ScenarioModel,
    TechnologySpec,
    load_scenario,
    validate_scenario,
)

__all__ = [
    "__version__",
    "Commodity",
    "annuity",
    "effective_rate",
    "RegionId",
    "ScenarioError",
    "ScenarioModel",
    "TechnologySpec",
    "load_scenario",
    "validate_scenario",
    "PullMatrix",
    "PullStats",
    "renewable_pull",
    "pull_stats",
    "tariff_offset",
    "transport_shield",
    "price_screening",
]
