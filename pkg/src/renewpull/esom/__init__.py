"""Capacity-expansion model building, solving, and cost allocation."""

from renewpull.esom.lp import (
    InfeasibleError,
    LinearProgram,
    SolveError,
    SystemSolution,
    UnboundedError,
    solve,
)
from renewpull.esom.model1 import build_model1, scenario_series
from renewpull.esom.model2 import NetworkEdge, PipelineCosts, TruckCosts, build_model2, eu_import_offer
from renewpull.esom.model3 import ImportOffer, build_model3, filter_import_offers, restrict_offers
from renewpull.esom.allocate import CostBreakdown, allocate_costs, asset_costs, demand_sensitivity

__all__ = [
    "LinearProgram",
    "SystemSolution",
    "SolveError",
    "InfeasibleError",
    "UnboundedError",
    "solve",
    "build_model1",
    "scenario_series",
    "NetworkEdge",
    "PipelineCosts",
    "TruckCosts",
    "build_model2",
    "eu_import_offer",
    "ImportOffer",
    "filter_import_offers",
    "restrict_offers",
    "build_model3",
    "CostBreakdown",
    "allocate_costs",
    "asset_costs",
    "demand_sensitivity",
]
