"""Post-solve cost accounting: asset costs, the industry/domestic split,
and the demand sensitivity sweep.

Total system costs are split into costs that belong exclusively to the
industrial chain (converters, non-electricity storages, raw-material and
import purchases) and shared supply costs (generation and electricity
storage), which are allocated proportionally to annual electricity
consumption: industrial process plus conversion consumption on one side,
exogenous domestic demand on the other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from renewpull.scenario import ScenarioModel
from renewpull.tsa import TypicalPeriodSet
from renewpull.esom.lp import SystemSolution, solve
from renewpull.esom.model1 import build_model1


class AllocationError(ValueError):
    """The solution cannot be split into industry and domestic shares."""


@dataclass(frozen=True)
class AssetCost:
    name: str
    kind: str
    group: str
    shared: bool
    capacity: float | None
    capacity_unit: str
    annual_cost: float


@dataclass(frozen=True)
class CostBreakdown:
    """Industry/domestic allocation of one solved system."""

    total: float
    direct_industry: float
    shared_supply: float
    industry_share: float
    domestic_share: float
    specific_cost: float
    industry_electricity_mwh: float
    domestic_electricity_mwh: float
    annual_product_t: float

    @property
    def industry_total(self) -> float:
        return self.direct_industry + self.industry_share * self.shared_supply


def asset_costs(solution: SystemSolution) -> list[AssetCost]:
    """Per-asset annualized cost, summed from objective terms."""
    lp = solution.lp
    cost_by_var = {v.name: v.cost for v in lp.variables}
    out = []
    for asset in lp.meta["assets"]:
        annual = sum(cost_by_var[n] * solution.value(n) for n in asset["vars"])
        capacity = (
            solution.value(asset["capacity_var"]) if asset["capacity_var"] else None
        )
        out.append(
            AssetCost(
                name=asset["name"],
                kind=asset["kind"],
                group=asset["group"],
                shared=asset["shared"],
                capacity=capacity,
                capacity_unit=asset["capacity_unit"],
                annual_cost=annual,
            )
        )
    return out


def allocate_costs(solution: SystemSolution, scenario: ScenarioModel) -> CostBreakdown:
    """Split total system cost and derive the specific production cost."""
    meta = solution.lp.meta
    costs = asset_costs(solution)
    shared = sum(a.annual_cost for a in costs if a.shared)
    direct = sum(a.annual_cost for a in costs if not a.shared)
    total = solution.objective
    if abs((direct + shared) - total) > 1e-9 * max(abs(total), 1.0):
        raise AllocationError(
            f"asset costs {direct + shared:.6g} do not reconcile with the "
            f"objective {total:.6g}"
        )

    industry_el = solution.term_total(meta["industry_el"])
    domestic_el = meta["domestic_el_mwh"]
    denominator = industry_el + domestic_el
    if denominator <= 0:
        raise AllocationError("zero total electricity consumption, shares undefined")
    industry_share = industry_el / denominator
    domestic_share = domestic_el / denominator

    production = solution.term_total(meta["production"])
    if production <= 0:
        raise AllocationError("no product output in solution")

    specific = (direct + industry_share * shared) / production
    return CostBreakdown(
        total=total,
        direct_industry=direct,
        shared_supply=shared,
        industry_share=industry_share,
        domestic_share=domestic_share,
        specific_cost=specific,
        industry_electricity_mwh=industry_el,
        domestic_electricity_mwh=domestic_el,
        annual_product_t=production,
    )


def demand_sensitivity(
    scenario: ScenarioModel,
    periods: TypicalPeriodSet,
    deltas: Sequence[float],
    tolerance: float = 1e-6,
) -> list[dict]:
    """Specific production cost under annual-demand offsets (MWh).

    Each delta uniformly rescales the hourly demand profile so its annual
    sum moves by that amount, then the country model is re-solved. All
    deltas are validated before the first solve.
    """
    base = scenario.annual_demand_mwh
    factors = []
    for delta in deltas:
        new_annual = base + float(delta)
        if new_annual < 0:
            raise ValueError(
                f"delta {delta} would make annual demand negative ({new_annual:.6g} MWh)"
            )
        if delta != 0 and base <= 0:
            raise ValueError("cannot offset an all-zero demand profile")
        factors.append(1.0 if delta == 0 else new_annual / base)

    rows = []
    for delta, factor in zip(deltas, factors):
        lp = build_model1(scenario, periods, demand_factor=factor)
        sol = solve(lp, tolerance=tolerance)
        breakdown = allocate_costs(sol, scenario)
        rows.append(
            {
                "delta_mwh": float(delta),
                "annual_demand_mwh": base + float(delta),
                "specific_cost": breakdown.specific_cost,
                "objective": sol.objective,
            }
        )
    return rows
