"""Multi-country network model for pipeline and truck imports.

Every member country is embedded as a full single-node system (its own
potentials, storages, conversion chain, and domestic electricity demand),
all optimized jointly. Carrier flows move over network arcs: hydrogen on
capacity-sized pipelines with annuitized investment, intermediates on
trucks at a per-ton-kilometer rate. The sink country must receive the
target quantity from the network; it exports nothing itself, so the
delivered amount is a genuine import, while its domestic power system
still participates (and cancels out of the incremental import cost).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from renewpull.commodities import Commodity
from renewpull.finance import annuity
from renewpull.scenario import RegionId, ScenarioModel
from renewpull.tsa import TypicalPeriodSet
from renewpull.esom.lp import LinearProgram, solve
from renewpull.esom.model1 import ModelConfigError, SystemBuilder
from renewpull.esom.model3 import EU_NETWORK_SOURCE, ImportOffer

HOURS_PER_YEAR = 8760.0


@dataclass(frozen=True)
class NetworkEdge:
    a: RegionId
    b: RegionId
    km: float

    def __post_init__(self):
        if self.km <= 0:
            raise ValueError(f"edge {self.a}-{self.b}: length must be > 0 km")


@dataclass(frozen=True)
class PipelineCosts:
    """Linearized hydrogen pipeline economics (no economies of scale)."""

    capex_per_km_flow: float  # EUR per km per (MWh/h) of capacity
    lifetime: float
    vom_per_km: float = 0.0  # EUR per MWh per km moved
    rate: float = 0.06  # discount rate for the annuitized investment


@dataclass(frozen=True)
class TruckCosts:
    eur_per_t_km: float


def _check_connectivity(edges: Sequence[NetworkEdge], nodes: set[RegionId], sink: RegionId):
    adjacency: dict[RegionId, set[RegionId]] = {n: set() for n in nodes}
    for e in edges:
        if e.a in adjacency and e.b in adjacency:
            adjacency[e.a].add(e.b)
            adjacency[e.b].add(e.a)
    seen = {sink}
    stack = [sink]
    while stack:
        n = stack.pop()
        for m in sorted(adjacency.get(n, ())):
            if m not in seen:
                seen.add(m)
                stack.append(m)
    unreachable = sorted(nodes - seen)
    if len(seen) == 1 and len(nodes) > 1:
        raise ModelConfigError(
            f"sink {sink} is disconnected from every supplier; unreachable: {unreachable}"
        )
    return unreachable


def build_model2(
    scenarios: Mapping[RegionId, ScenarioModel],
    periods: Mapping[RegionId, TypicalPeriodSet],
    edges: Sequence[NetworkEdge],
    carrier: Commodity,
    quantity: float,
    sink: RegionId,
    pipeline: PipelineCosts | None = None,
    truck: TruckCosts | None = None,
    name: str | None = None,
) -> LinearProgram:
    """Joint LP of all member systems plus the transport network."""
    if sink not in scenarios:
        raise ModelConfigError(f"sink {sink} has no scenario among the network members")
    if carrier == Commodity.HYDROGEN:
        if pipeline is None:
            raise ModelConfigError("hydrogen networks need pipeline cost parameters")
    elif truck is None:
        raise ModelConfigError(f"{carrier.value} networks need truck cost parameters")
    if quantity < 0:
        raise ModelConfigError(f"target quantity must be >= 0, got {quantity}")

    nodes = set(scenarios)
    unreachable = _check_connectivity(edges, nodes, sink)

    lp = LinearProgram(name or f"model2.{carrier.value}.{sink}")
    builders: dict[RegionId, SystemBuilder] = {}
    export_vars: dict[RegionId, str] = {}
    for region in sorted(nodes):
        builder = SystemBuilder(lp, scenarios[region], periods[region], prefix=f"{region}|")
        builder.presolve_screen()
        builder.build_components()
        if region != sink:
            export_vars[region] = builder.add_export(carrier)
        builders[region] = builder

    flow_meta = []
    inflow: dict[RegionId, list[tuple[str, float]]] = {n: [] for n in nodes}
    outflow: dict[RegionId, list[tuple[str, float]]] = {n: [] for n in nodes}
    for e in sorted(edges, key=lambda e: (e.a, e.b)):
        if e.a not in nodes or e.b not in nodes:
            raise ModelConfigError(f"edge {e.a}-{e.b} references a region without a scenario")
        fwd = f"flow.{e.a}.{e.b}"
        rev = f"flow.{e.b}.{e.a}"
        if carrier == Commodity.HYDROGEN:
            vom = pipeline.vom_per_km * e.km
            lp.add_var(fwd, lb=0.0, cost=vom)
            lp.add_var(rev, lb=0.0, cost=vom)
            cap = f"pipecap.{e.a}.{e.b}"
            ann = annuity(pipeline.rate, pipeline.lifetime)
            lp.add_var(cap, lb=0.0, cost=ann * pipeline.capex_per_km_flow * e.km)
            lp.add_row(
                f"pipeuse.{e.a}.{e.b}",
                [(fwd, 1.0), (rev, 1.0), (cap, -HOURS_PER_YEAR)],
                "<=",
                0.0,
            )
        else:
            vom = truck.eur_per_t_km * e.km
            lp.add_var(fwd, lb=0.0, cost=vom)
            lp.add_var(rev, lb=0.0, cost=vom)
        outflow[e.a].append((fwd, 1.0))
        inflow[e.b].append((fwd, 1.0))
        outflow[e.b].append((rev, 1.0))
        inflow[e.a].append((rev, 1.0))
        flow_meta.append({"a": str(e.a), "b": str(e.b), "km": e.km, "fwd": fwd, "rev": rev})

    for region in sorted(nodes):
        terms: list[tuple[str, float]] = []
        if region in export_vars:
            terms.append((export_vars[region], 1.0))
        terms.extend(inflow[region])
        terms.extend((v, -c) for v, c in outflow[region])
        rhs = quantity if region == sink else 0.0
        if not terms:
            if rhs > 0:
                raise ModelConfigError(f"sink {region} has no inbound arcs")
            continue
        lp.add_row(f"netbal.{region}", terms, "=", rhs)

    for region, builder in builders.items():
        builder.finalize_balances()

    lp.meta = {
        "kind": "model2",
        "carrier": carrier.value,
        "sink": str(sink),
        "quantity": quantity,
        "unreachable": [str(u) for u in unreachable],
        "exports": {str(r): v for r, v in export_vars.items()},
        "flows": flow_meta,
        "nodes": {str(r): b.meta() for r, b in builders.items()},
    }
    return lp


def eu_import_offer(
    scenarios: Mapping[RegionId, ScenarioModel],
    periods: Mapping[RegionId, TypicalPeriodSet],
    edges: Sequence[NetworkEdge],
    carrier: Commodity,
    quantity: float,
    sink: RegionId,
    pipeline: PipelineCosts | None = None,
    truck: TruckCosts | None = None,
    tolerance: float = 1e-6,
) -> tuple[ImportOffer, dict]:
    """Average incremental cost of delivering the target to the sink.

    Solves the network once with the target and once with zero delivery;
    the specific cost of the synthetic EU-network offer is the objective
    difference per delivered unit, which cancels every cost the member
    systems incur for their own domestic demand.
    """
    if quantity <= 0:
        raise ModelConfigError("offer quantity must be > 0")
    with_target = solve(
        build_model2(scenarios, periods, edges, carrier, quantity, sink, pipeline, truck),
        tolerance=tolerance,
    )
    baseline = solve(
        build_model2(scenarios, periods, edges, carrier, 0.0, sink, pipeline, truck),
        tolerance=tolerance,
    )
    specific = (with_target.objective - baseline.objective) / quantity
    details = {
        "objective_with_target": with_target.objective,
        "objective_baseline": baseline.objective,
        "flows": {
            f["fwd"]: with_target.value(f["fwd"]) for f in with_target.lp.meta["flows"]
        }
        | {f["rev"]: with_target.value(f["rev"]) for f in with_target.lp.meta["flows"]},
        "exports": {
            r: with_target.value(v) for r, v in with_target.lp.meta["exports"].items()
        },
    }
    offer = ImportOffer(
        source=EU_NETWORK_SOURCE,
        carrier=carrier,
        specific_cost=specific,
        annual_limit=quantity,
    )
    return offer, details
