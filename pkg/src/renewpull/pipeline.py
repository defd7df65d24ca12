"""Stage implementations behind the CLI subcommands.

Stages hand results to each other exclusively through files under the
manifest's output directory, so any stage can be re-run in isolation and
every intermediate stays auditable. All result files are deterministic
for a fixed manifest and seed; timestamps only appear in the run log.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import yaml

from renewpull import tsa
from renewpull.commodities import Commodity, parse_commodity
from renewpull.esom import (
    ImportOffer,
    NetworkEdge,
    PipelineCosts,
    TruckCosts,
    allocate_costs,
    asset_costs,
    build_model1,
    build_model3,
    eu_import_offer,
    filter_import_offers,
    scenario_series,
    solve,
)
from renewpull.esom.allocate import demand_sensitivity
from renewpull.esom.lp import SolveError
from renewpull.esom.model3 import EU_NETWORK_SOURCE
from renewpull.manifest import RunManifest
from renewpull.marketdata import price_table
from renewpull.outputs import point_feature, read_csv, write_csv, write_geojson, write_svg_bars
from renewpull.pull import PullMatrix
from renewpull.scenario import RegionId, ScenarioError, ScenarioModel, load_scenario
from renewpull.shipping import (
    NoPortsError,
    ShipSpec,
    load_ports,
    select_ports,
    voyage_cost,
)
from renewpull.shipping.routing import load_ocean_mask

logger = logging.getLogger("renewpull")

CARRIER_COMMODITIES = (Commodity.HYDROGEN, Commodity.METHANOL, Commodity.HBI)


class StageDependencyError(RuntimeError):
    """An upstream stage's outputs are missing."""

    def __init__(self, missing: Path, stage: str):
        super().__init__(f"missing {missing}; run the '{stage}' stage first")
        self.missing = missing
        self.stage = stage


def discover_scenarios(scenario_dir: Path) -> dict[tuple[str, str], Path]:
    """Map (region, product) to scenario files named ``REG_product.yaml``."""
    found: dict[tuple[str, str], Path] = {}
    for path in sorted(scenario_dir.glob("*.yaml")):
        stem = path.stem
        if "_" not in stem:
            continue
        region, _, product = stem.partition("_")
        if len(region) != 3 or not region.isupper():
            continue
        found[(region, product)] = path
    return found


def _aggregate_for(scenario: ScenarioModel, manifest: RunManifest) -> tsa.TypicalPeriodSet:
    seed = tsa.derive_seed(manifest.seed, "tsa", scenario.region, scenario.product.value)
    return tsa.aggregate(
        scenario_series(scenario),
        n_periods=manifest.typical_days,
        steps_per_period=manifest.steps_per_day,
        seed=seed,
    )


def _optimize_job(args: tuple) -> dict:
    """One country-product optimization; must stay pickle-friendly."""
    (path_str, region, product, capital_mode, uniform_rate, typical_days,
     steps_per_day, seed, tolerance) = args
    try:
        scenario = load_scenario(path_str, capital_mode=capital_mode, uniform_rate=uniform_rate)
        sub_seed = tsa.derive_seed(seed, "tsa", scenario.region, scenario.product.value)
        periods = tsa.aggregate(
            scenario_series(scenario),
            n_periods=typical_days,
            steps_per_period=steps_per_day,
            seed=sub_seed,
        )
        lp = build_model1(scenario, periods)
        sol = solve(lp, tolerance=tolerance)
        breakdown = allocate_costs(sol, scenario)
        assets = [
            {
                "name": a.name,
                "kind": a.kind,
                "group": a.group,
                "shared": a.shared,
                "capacity": a.capacity,
                "capacity_unit": a.capacity_unit,
                "annual_cost": a.annual_cost,
            }
            for a in asset_costs(sol)
        ]
        return {
            "status": "ok",
            "region": region,
            "product": product,
            "unit": scenario.product.unit,
            "specific_cost": breakdown.specific_cost,
            "objective": sol.objective,
            "direct_industry": breakdown.direct_industry,
            "shared_supply": breakdown.shared_supply,
            "industry_share": breakdown.industry_share,
            "industry_el_mwh": breakdown.industry_electricity_mwh,
            "domestic_el_mwh": breakdown.domestic_electricity_mwh,
            "annual_product": breakdown.annual_product_t,
            "assets": assets,
        }
    except (ScenarioError, SolveError, ValueError) as exc:
        return {"status": "error", "region": region, "product": product, "message": str(exc)}


def run_optimize(manifest: RunManifest) -> int:
    """Stage 1: per-country system optimization. Returns the failure count."""
    scenarios = discover_scenarios(manifest.scenario_dir)
    wanted = [p.value for p in manifest.products]
    jobs = [
        (
            str(path),
            region,
            product,
            manifest.capital_mode,
            manifest.uniform_rate,
            manifest.typical_days,
            manifest.steps_per_day,
            manifest.seed,
            manifest.solver_tolerance,
        )
        for (region, product), path in sorted(scenarios.items())
        if product in wanted
    ]
    out_dir = manifest.out_dir / "model1"
    logger.info("optimize: %d country-product jobs at %d typical days",
                len(jobs), manifest.typical_days)
    results: list[dict] = []
    if manifest.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=manifest.jobs) as pool:
            results = list(pool.map(_optimize_job, jobs))
    else:
        results = [_optimize_job(j) for j in jobs]

    ok = [r for r in results if r["status"] == "ok"]
    failures = [r for r in results if r["status"] != "ok"]
    for r in failures:
        logger.error("optimize %s/%s failed: %s", r["region"], r["product"], r["message"])

    summary_rows = [
        (
            r["region"],
            r["product"],
            r["unit"],
            r["specific_cost"],
            r["objective"],
            r["direct_industry"],
            r["shared_supply"],
            r["industry_share"],
            r["industry_el_mwh"],
            r["domestic_el_mwh"],
            r["annual_product"],
        )
        for r in sorted(ok, key=lambda r: (r["region"], r["product"]))
    ]
    write_csv(
        out_dir / "production_costs.csv",
        [
            "region",
            "product",
            "unit",
            "specific_cost_eur_per_unit",
            "objective_eur_per_yr",
            "direct_industry_eur_per_yr",
            "shared_supply_eur_per_yr",
            "industry_share",
            "industry_el_mwh",
            "domestic_el_mwh",
            "annual_product",
        ],
        summary_rows,
        manifest.meta(units="EUR, MWh, product units as stated"),
    )
    for r in sorted(ok, key=lambda r: (r["region"], r["product"])):
        rows = [
            (
                a["name"],
                a["kind"],
                a["group"],
                int(a["shared"]),
                a["capacity"],
                a["capacity_unit"],
                a["annual_cost"],
            )
            for a in r["assets"]
        ]
        write_csv(
            out_dir / f"costs_{r['region']}_{r['product']}.csv",
            ["asset", "kind", "group", "shared", "capacity", "capacity_unit", "annual_cost_eur_per_yr"],
            rows,
            manifest.meta(region=r["region"], product=r["product"], units="EUR/yr"),
        )
    if failures:
        write_csv(
            out_dir / "failures.csv",
            ["region", "product", "message"],
            [(r["region"], r["product"], r["message"].replace(",", ";").replace("\n", " | ")) for r in failures],
            manifest.meta(),
        )
    return len(failures)


def _build_graph(manifest: RunManifest):
    config = manifest.shipping
    graph = load_ocean_mask(config.ocean_csv)
    tolls: dict[str, float] = {}
    for canal in config.canals:
        graph.add_canal(
            str(canal["id"]),
            (float(canal["a"][0]), float(canal["a"][1])),
            (float(canal["b"][0]), float(canal["b"][1])),
            float(canal.get("toll_eur", 0.0)),
            snap_radius=config.snap_radius,
        )
        tolls[str(canal["id"])] = float(canal.get("toll_eur", 0.0))
    return graph, tolls


def run_shipping(manifest: RunManifest) -> None:
    """Stage 2: port selection, route distances, and voyage costs."""
    if manifest.shipping is None:
        raise StageDependencyError(manifest.base_dir / "manifest", "configure shipping")
    config = manifest.shipping
    logger.info("shipping: routing over %s", config.ocean_csv.name)
    ports = load_ports(config.ports_csv)
    graph, tolls = _build_graph(manifest)

    regions = sorted({region for region, _ in discover_scenarios(manifest.scenario_dir)})
    selected: dict[str, dict] = {}
    for region in regions:
        try:
            selected[region] = select_ports(ports, region, overrides=config.port_overrides)
        except NoPortsError:
            logger.warning("region %s has no ports; excluded from the export set", region)

    importers = (
        [str(r) for r in manifest.importers]
        if manifest.importers
        else sorted(selected)
    )

    distance_rows = []
    pair_distance: dict[tuple[str, str], dict] = {}
    for exporter in sorted(selected):
        for importer in importers:
            if importer == exporter or importer not in selected:
                continue
            best = None
            for _, e_port in sorted(selected[exporter].items()):
                for _, i_port in sorted(selected[importer].items()):
                    route = graph.route(
                        (e_port.lat, e_port.lon),
                        (i_port.lat, i_port.lon),
                        snap_radius=config.snap_radius,
                    )
                    if route is None:
                        continue
                    key = (route.distance_nm, e_port.name, i_port.name)
                    if best is None or key < best[0]:
                        best = (key, route, e_port, i_port)
            if best is None:
                distance_rows.append((exporter, importer, "", "", "", "", "", "", "", ""))
                continue
            _, route, e_port, i_port = best
            pair_distance[(exporter, importer)] = {
                "route": route,
                "e_port": e_port,
                "i_port": i_port,
            }
            distance_rows.append(
                (
                    exporter,
                    importer,
                    route.distance_nm,
                    ";".join(route.canals),
                    e_port.name,
                    e_port.lat,
                    e_port.lon,
                    i_port.name,
                    i_port.lat,
                    i_port.lon,
                )
            )
    shipping_dir = manifest.out_dir / "shipping"
    write_csv(
        shipping_dir / "distances.csv",
        ["exporter", "importer", "distance_nm", "canals", "e_port", "e_lat", "e_lon",
         "i_port", "i_lat", "i_lon"],
        distance_rows,
        manifest.meta(units="nautical miles, degrees"),
    )

    voyage_rows = []
    for cargo_name in sorted(config.ships):
        cargo = parse_commodity(cargo_name, where="shipping.ships")
        ship = ShipSpec(cargo=cargo, **config.ships[cargo_name])
        for (exporter, importer), info in sorted(pair_distance.items()):
            report = voyage_cost(
                info["route"].distance_nm,
                info["route"].canals,
                ship,
                tolls=tolls,
                rate=config.transport_rate,
            )
            voyage_rows.append(
                (
                    exporter,
                    importer,
                    cargo.value,
                    report.specific_cost,
                    report.distance_nm,
                    report.round_trips_per_year,
                    report.annual_throughput_t,
                    int(report.fractional_trips),
                )
            )
    write_csv(
        shipping_dir / "voyages.csv",
        ["exporter", "importer", "cargo", "specific_cost_eur_per_t", "distance_nm",
         "round_trips_per_year", "annual_throughput_t", "fractional_trips"],
        voyage_rows,
        manifest.meta(units="EUR/t"),
    )


def _load_production_costs(manifest: RunManifest) -> dict[tuple[str, str], dict]:
    path = manifest.out_dir / "model1" / "production_costs.csv"
    if not path.is_file():
        raise StageDependencyError(path, "optimize")
    _, rows = read_csv(path)
    return {
        (r["region"], r["product"]): {
            "specific_cost": float(r["specific_cost_eur_per_unit"]),
            "unit": r["unit"],
        }
        for r in rows
    }


def _load_voyages(manifest: RunManifest) -> dict[tuple[str, str, str], float]:
    path = manifest.out_dir / "shipping" / "voyages.csv"
    if not path.is_file():
        raise StageDependencyError(path, "shipping")
    _, rows = read_csv(path)
    return {
        (r["exporter"], r["importer"], r["cargo"]): float(r["specific_cost_eur_per_t"])
        for r in rows
    }


def _load_export_ports(manifest: RunManifest) -> dict[tuple[str, str], tuple[float, float]]:
    path = manifest.out_dir / "shipping" / "distances.csv"
    if not path.is_file():
        raise StageDependencyError(path, "shipping")
    _, rows = read_csv(path)
    out = {}
    for r in rows:
        if r["e_lat"]:
            out[(r["exporter"], r["importer"])] = (float(r["e_lat"]), float(r["e_lon"]))
    return out


def run_pull(manifest: RunManifest) -> None:
    """Stage 3: the pull matrix and its indicators per importer."""
    costs = _load_production_costs(manifest)
    voyages = _load_voyages(manifest)
    export_ports = _load_export_ports(manifest)
    logger.info("pull: %d production cost rows, %d voyage rows", len(costs), len(voyages))
    overheads = manifest.shipping.overheads if manifest.shipping else {}

    products = [p for p in manifest.products if p.unit == "t"]
    importers = (
        [str(r) for r in manifest.importers]
        if manifest.importers
        else sorted({region for region, _ in costs})
    )

    matrix_rows = []
    stats_rows = []
    pull_dir = manifest.out_dir / "pull"
    for product in products:
        pname = product.value
        producer_costs = {
            region: info["specific_cost"]
            for (region, prod), info in costs.items()
            if prod == pname
        }
        overhead = float(overheads.get(pname, 0.0))
        for importer in importers:
            if importer not in producer_costs:
                continue
            domestic = producer_costs[importer]
            import_costs = {}
            for exporter, production in sorted(producer_costs.items()):
                if exporter == importer:
                    continue
                voyage = voyages.get((exporter, importer, pname))
                if voyage is None:
                    continue
                import_costs[exporter] = production + voyage + overhead
            if not import_costs:
                logger.warning("no import offers reach %s for %s", importer, pname)
                continue
            matrix = PullMatrix.from_costs(
                importer, product, manifest.capital_mode, domestic, import_costs
            )
            stats = matrix.stats()
            for exporter in sorted(matrix.entries):
                matrix_rows.append(
                    (
                        importer,
                        exporter,
                        pname,
                        manifest.capital_mode,
                        domestic,
                        matrix.import_costs[exporter],
                        matrix.entries[exporter],
                    )
                )
            stats_rows.append(
                (
                    importer,
                    pname,
                    manifest.capital_mode,
                    stats.rep_max,
                    stats.rep_20,
                    stats.n_positive,
                    int(stats.short_sample),
                    stats.semantics,
                )
            )
            features = []
            for exporter in sorted(matrix.entries):
                latlon = export_ports.get((exporter, importer))
                features.append(
                    point_feature(
                        latlon[1] if latlon else None,
                        latlon[0] if latlon else None,
                        {
                            "importer": importer,
                            "exporter": exporter,
                            "product": pname,
                            "capital_mode": manifest.capital_mode,
                            "rep": round(matrix.entries[exporter], 9),
                        },
                    )
                )
            write_geojson(
                pull_dir / f"pull_{importer}_{pname}.geojson",
                features,
                manifest.meta(importer=importer, product=pname, rep_semantics=stats.semantics),
            )

    write_csv(
        pull_dir / "pull_matrix.csv",
        ["importer", "exporter", "product", "capital_mode", "domestic_cost_eur_per_t",
         "import_cost_eur_per_t", "rep"],
        matrix_rows,
        manifest.meta(units="EUR/t, dimensionless rep"),
    )
    write_csv(
        pull_dir / "pull_stats.csv",
        ["importer", "product", "capital_mode", "rep_max", "rep_20", "n_positive",
         "short_sample", "rep20_semantics"],
        stats_rows,
        manifest.meta(units="dimensionless"),
    )


def run_prices(manifest: RunManifest) -> None:
    """Stage: build the raw-material price table from trade records."""
    if manifest.trade is None:
        raise StageDependencyError(manifest.base_dir / "manifest", "configure trade")
    config = manifest.trade
    logger.info("prices: reading %s", config.trade_csv.name)
    regions = sorted({region for region, _ in discover_scenarios(manifest.scenario_dir)})
    table = price_table(
        config.trade_csv,
        config.materials,
        years=config.years,
        usd_to_eur=config.usd_to_eur,
        mad_k=config.mad_k,
        regions=regions or None,
    )
    rows = [
        (str(p.region), p.material.value, p.price, p.provenance,
         p.pre_clip if p.pre_clip is not None else "")
        for p in sorted(table.prices, key=lambda p: (p.material.value, str(p.region)))
    ]
    write_csv(
        manifest.out_dir / "prices" / "material_prices.csv",
        ["region", "material", "price_eur_per_t", "provenance", "pre_clip_eur_per_t"],
        rows,
        manifest.meta(
            units="EUR/t",
            clipped_fraction=table.clipped_fraction,
            dropped_rows=table.dropped_rows,
            skipped_codes=sum(table.skipped_codes.values()),
        ),
    )


def _chain_commodities(scenario: ScenarioModel) -> set[Commodity]:
    chain: set[Commodity] = set()
    for t in scenario.converters():
        chain |= set(t.inputs) | set(t.outputs)
    chain -= set(scenario.raw_material_prices)
    chain.discard(scenario.product)
    chain.discard(Commodity.CO2_ATMOSPHERIC)
    return chain


def build_world_offers(
    manifest: RunManifest,
    carrier: Commodity,
    costs: Mapping[tuple[str, str], dict],
    voyages: Mapping[tuple[str, str, str], float],
    sink: str,
    lhv_mwh_per_t: float,
) -> list[ImportOffer]:
    """Per-exporter delivered offers of one carrier at the sink."""
    overheads = manifest.shipping.overheads if manifest.shipping else {}
    overhead = float(overheads.get(carrier.value, 0.0))
    offers = []
    for (region, product), info in sorted(costs.items()):
        if product != carrier.value or region == sink:
            continue
        voyage = voyages.get((region, sink, carrier.value))
        if voyage is None:
            continue
        production = info["specific_cost"]
        if carrier == Commodity.HYDROGEN:
            # production is EUR/MWh; ship legs are costed per ton
            delivered = production + (voyage + overhead) / lhv_mwh_per_t
        else:
            delivered = production + voyage + overhead
        scenario_path = manifest.scenario_dir / f"{region}_{carrier.value}.yaml"
        limit = _scenario_target(scenario_path)
        if limit is None or delivered <= 0:
            continue
        offers.append(
            ImportOffer(
                source=region,
                carrier=carrier,
                specific_cost=delivered,
                annual_limit=limit,
            )
        )
    return offers


def _scenario_field(path: Path, *keys: str) -> float | None:
    if not path.is_file():
        return None
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    for key in keys:
        try:
            value = doc.get(key)
        except AttributeError:
            return None
        if value is not None:
            try:
                return float(value)
            except (TypeError, ValueError):
                return None
    return None


def _scenario_target(path: Path) -> float | None:
    return _scenario_field(path, "annual_target_t", "annual_target")


def run_import_study(manifest: RunManifest, sink: str | None = None) -> None:
    """Stage 4: staged production costs of the sink under import options."""
    if manifest.eu_network is None:
        raise StageDependencyError(manifest.base_dir / "manifest", "configure eu_network")
    network = manifest.eu_network
    sink = str(sink or network.sink)
    if RegionId(sink) not in network.members:
        raise ValueError(f"sink {sink} is not an EU-network member")
    costs = _load_production_costs(manifest)
    voyages = _load_voyages(manifest)
    logger.info("import study: sink %s", sink)

    edges = tuple(
        NetworkEdge(RegionId(e["a"]), RegionId(e["b"]), float(e["km"])) for e in network.edges
    )
    pipeline = (
        PipelineCosts(
            capex_per_km_flow=network.pipeline.get("capex_per_km_flow", 0.0),
            lifetime=network.pipeline.get("lifetime", 40.0),
            vom_per_km=network.pipeline.get("vom_per_km", 0.0),
            rate=network.transport_rate,
        )
        if network.pipeline
        else None
    )
    truck = TruckCosts(eur_per_t_km=network.truck_eur_per_t_km)

    # Offers per carrier: one diversified world-shipping offer plus the EU
    # network offer where a target is configured.
    offers: list[ImportOffer] = []
    eu_mix_rows: list[tuple] = []
    sink_scenarios: dict[str, Path] = {}
    for (region, product), path in sorted(discover_scenarios(manifest.scenario_dir).items()):
        if region == sink:
            sink_scenarios[product] = path

    lhv = 33.33
    for path in sink_scenarios.values():
        value = _scenario_field(path, "hydrogen_lhv_mwh_per_t")
        if value:
            lhv = value
            break

    for carrier in CARRIER_COMMODITIES:
        carrier_offers = build_world_offers(manifest, carrier, costs, voyages, sink, lhv)
        if carrier_offers:
            world = filter_import_offers(carrier_offers, min_suppliers=manifest.min_suppliers)
            if world is not None:
                offers.append(world)
        target = network.targets.get(carrier.value)
        if target:
            scenarios = {}
            periods = {}
            missing = []
            for member in network.members:
                member_path = manifest.scenario_dir / f"{member}_{carrier.value}.yaml"
                if not member_path.is_file():
                    missing.append(str(member_path))
                    continue
                scenario = load_scenario(
                    member_path,
                    capital_mode=manifest.capital_mode,
                    uniform_rate=manifest.uniform_rate,
                )
                scenarios[RegionId(member)] = scenario
                periods[RegionId(member)] = _aggregate_for(scenario, manifest)
            if missing:
                raise StageDependencyError(Path(missing[0]), "provide carrier scenarios")
            offer, details = eu_import_offer(
                scenarios,
                periods,
                edges,
                carrier,
                float(target),
                RegionId(sink),
                pipeline=pipeline,
                truck=truck,
                tolerance=manifest.solver_tolerance,
            )
            offers.append(offer)
            for name, flow in sorted(details["flows"].items()):
                eu_mix_rows.append((carrier.value, name, flow))

    staged_rows = []
    mix_rows = []
    products = [p for p in manifest.products if p.unit == "t" and p not in CARRIER_COMMODITIES]
    for product in products:
        pname = product.value
        if pname not in sink_scenarios:
            continue
        scenario = load_scenario(
            sink_scenarios[pname],
            capital_mode=manifest.capital_mode,
            uniform_rate=manifest.uniform_rate,
        )
        periods = _aggregate_for(scenario, manifest)
        chain = _chain_commodities(scenario)
        usable = [o for o in offers if o.carrier in chain]

        baseline = solve(build_model1(scenario, periods), tolerance=manifest.solver_tolerance)
        baseline_cost = allocate_costs(baseline, scenario).specific_cost
        staged_rows.append((pname, "baseline", baseline_cost, baseline.objective))

        stages = [("world", "none"), ("eu_only", "eu_only")]
        if product == Commodity.STEEL:
            stages.append(("plus_hbi", "plus_hbi"))
        for stage_name, restriction in stages:
            lp = build_model3(scenario, periods, usable, restriction=restriction)
            sol = solve(lp, tolerance=manifest.solver_tolerance)
            cost = allocate_costs(sol, scenario).specific_cost
            staged_rows.append((pname, stage_name, cost, sol.objective))
            for imp in lp.meta["imports"]:
                quantity = sol.term_total(imp["annual_terms"])
                mix_rows.append(
                    (
                        pname,
                        stage_name,
                        imp["tag"],
                        imp["carrier"],
                        quantity,
                        imp["specific_cost"],
                    )
                )

    study_dir = manifest.out_dir / "import_study"
    write_csv(
        study_dir / "staged_costs.csv",
        ["product", "stage", "specific_cost_eur_per_t", "objective_eur_per_yr"],
        staged_rows,
        manifest.meta(sink=sink, units="EUR/t"),
    )
    write_csv(
        study_dir / "import_mix.csv",
        ["product", "stage", "offer", "carrier", "annual_quantity", "specific_cost"],
        mix_rows,
        manifest.meta(sink=sink, units="carrier units per year"),
    )
    if eu_mix_rows:
        write_csv(
            study_dir / "eu_network_flows.csv",
            ["carrier", "arc", "annual_flow"],
            eu_mix_rows,
            manifest.meta(sink=sink, units="carrier units per year"),
        )


def run_sensitivity(manifest: RunManifest, region: str, deltas: Sequence[float]) -> None:
    """Stage: demand sensitivity sweep for one region, per product."""
    scenarios = discover_scenarios(manifest.scenario_dir)
    region = str(RegionId(region))
    out_dir = manifest.out_dir / "sensitivity"
    logger.info("sensitivity: region %s, %d offsets", region, len(deltas))
    found = False
    for product in manifest.products:
        path = scenarios.get((region, product.value))
        if path is None:
            continue
        found = True
        scenario = load_scenario(
            path, capital_mode=manifest.capital_mode, uniform_rate=manifest.uniform_rate
        )
        periods = _aggregate_for(scenario, manifest)
        rows = demand_sensitivity(scenario, periods, deltas, tolerance=manifest.solver_tolerance)
        write_csv(
            out_dir / f"sensitivity_{region}_{product.value}.csv",
            ["delta_mwh", "annual_demand_mwh", "specific_cost_eur_per_unit", "objective_eur_per_yr"],
            [(r["delta_mwh"], r["annual_demand_mwh"], r["specific_cost"], r["objective"]) for r in rows],
            manifest.meta(region=region, product=product.value, units="EUR per product unit"),
        )
        write_svg_bars(
            out_dir / f"sensitivity_{region}_{product.value}.svg",
            [format(r["delta_mwh"], ".4g") for r in rows],
            [r["specific_cost"] for r in rows],
            title=f"{region} {product.value}: specific cost vs demand offset",
            unit="EUR per unit",
        )
    if not found:
        raise ValueError(f"no scenario for region {region} among products "
                         f"{[p.value for p in manifest.products]}")
