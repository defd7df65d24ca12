"""Run manifest: the single configuration document driving every stage."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import yaml

from renewpull.commodities import Commodity, parse_commodity
from renewpull.finance import CAPITAL_MODES
from renewpull.scenario import RegionId


class ManifestError(ValueError):
    """The manifest document is malformed or references missing files."""


@dataclass(frozen=True)
class ShippingConfig:
    ports_csv: Path
    ocean_csv: Path
    canals: tuple[dict, ...] = ()  # {id, a: [lat, lon], b: [lat, lon], toll_eur}
    ships: Mapping[str, dict] = field(default_factory=dict)  # commodity -> ShipSpec kwargs
    overheads: Mapping[str, float] = field(default_factory=dict)  # commodity -> EUR/t
    port_overrides: Mapping[tuple[str, str], str] = field(default_factory=dict)
    transport_rate: float = 0.06
    snap_radius: int = 3


@dataclass(frozen=True)
class EuNetworkConfig:
    members: tuple[RegionId, ...]
    sink: RegionId
    edges: tuple[dict, ...]  # {a, b, km}
    targets: Mapping[str, float]  # carrier -> annual quantity
    pipeline: Mapping[str, float] = field(default_factory=dict)
    truck_eur_per_t_km: float = 0.05
    transport_rate: float = 0.06


@dataclass(frozen=True)
class TradeConfig:
    trade_csv: Path
    materials: Mapping[str, str]  # material_code -> commodity
    years: tuple[int, int] = (2015, 2019)
    usd_to_eur: float = 1.0
    mad_k: float = 2.0


@dataclass(frozen=True)
class RunManifest:
    base_dir: Path
    scenario_dir: Path
    out_dir: Path
    products: tuple[Commodity, ...]
    capital_mode: str = "national"
    uniform_rate: float | None = None
    seed: int = 0
    jobs: int = 1
    typical_days: int = 40
    steps_per_day: int = 24
    solver_tolerance: float = 1e-6
    importers: tuple[RegionId, ...] | None = None
    min_suppliers: int = 10
    shipping: ShippingConfig | None = None
    eu_network: EuNetworkConfig | None = None
    trade: TradeConfig | None = None

    def meta(self, **extra) -> dict:
        """Common header entries stamped onto every output file."""
        out = {"seed": self.seed, "capital_mode": self.capital_mode}
        out.update(extra)
        return out


_KNOWN_KEYS = {
    "scenario_dir",
    "out_dir",
    "products",
    "capital_mode",
    "uniform_rate",
    "seed",
    "jobs",
    "typical_days",
    "steps_per_day",
    "solver_tolerance",
    "importers",
    "min_suppliers",
    "shipping",
    "eu_network",
    "trade",
}


def load_manifest(path: str | Path, overrides: Mapping | None = None) -> RunManifest:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh) or {}
    if not isinstance(doc, dict):
        raise ManifestError(f"{path}: manifest must be a mapping")
    unknown = set(doc) - _KNOWN_KEYS
    if unknown:
        raise ManifestError(f"{path}: unknown manifest keys {sorted(unknown)}")
    doc = dict(doc)
    for key, value in (overrides or {}).items():
        if value is not None:
            doc[key] = value
    base = path.parent

    def resolve(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else base / p

    problems: list[str] = []

    scenario_dir = resolve(doc.get("scenario_dir", "scenarios"))
    if not scenario_dir.is_dir():
        problems.append(f"scenario_dir: {scenario_dir} does not exist")
    out_dir = resolve(doc.get("out_dir", "out"))

    products = []
    for name in doc.get("products", []):
        try:
            products.append(parse_commodity(name, where="products"))
        except ValueError as exc:
            problems.append(str(exc))

    capital_mode = doc.get("capital_mode", "national")
    if capital_mode not in CAPITAL_MODES:
        problems.append(f"capital_mode: must be one of {CAPITAL_MODES}, got {capital_mode!r}")
    uniform_rate = doc.get("uniform_rate")
    if uniform_rate is not None:
        uniform_rate = float(uniform_rate)
    if capital_mode == "uniform" and uniform_rate is None:
        problems.append("capital_mode=uniform requires uniform_rate (no built-in default)")

    importers = doc.get("importers")
    if importers is not None:
        try:
            importers = tuple(RegionId(r) for r in importers)
        except ValueError as exc:
            problems.append(f"importers: {exc}")
            importers = None

    shipping = None
    if "shipping" in doc and doc["shipping"] is not None:
        sc = doc["shipping"]
        ports_csv = resolve(sc.get("ports_csv", "ports.csv"))
        ocean_csv = resolve(sc.get("ocean_csv", "ocean.csv"))
        for label, p in (("ports_csv", ports_csv), ("ocean_csv", ocean_csv)):
            if not p.is_file():
                problems.append(f"shipping.{label}: {p} does not exist")
        port_overrides = {}
        for item in sc.get("port_overrides", []) or []:
            port_overrides[(str(item["region"]), str(item["cardinal"]))] = str(item["name"])
        shipping = ShippingConfig(
            ports_csv=ports_csv,
            ocean_csv=ocean_csv,
            canals=tuple(sc.get("canals", []) or []),
            ships={str(k): dict(v) for k, v in (sc.get("ships", {}) or {}).items()},
            overheads={str(k): float(v) for k, v in (sc.get("overheads", {}) or {}).items()},
            port_overrides=port_overrides,
            transport_rate=float(sc.get("transport_rate", 0.06)),
            snap_radius=int(sc.get("snap_radius", 3)),
        )

    eu_network = None
    if "eu_network" in doc and doc["eu_network"] is not None:
        nc = doc["eu_network"]
        try:
            members = tuple(RegionId(r) for r in nc.get("members", []))
            sink = RegionId(nc.get("sink"))
            if sink not in members:
                problems.append(f"eu_network.sink: {sink} is not a member")
            eu_network = EuNetworkConfig(
                members=members,
                sink=sink,
                edges=tuple(nc.get("edges", []) or []),
                targets={str(k): float(v) for k, v in (nc.get("targets", {}) or {}).items()},
                pipeline={str(k): float(v) for k, v in (nc.get("pipeline", {}) or {}).items()},
                truck_eur_per_t_km=float(nc.get("truck_eur_per_t_km", 0.05)),
                transport_rate=float(nc.get("transport_rate", 0.06)),
            )
        except (TypeError, ValueError) as exc:
            problems.append(f"eu_network: {exc}")

    trade = None
    if "trade" in doc and doc["trade"] is not None:
        tc = doc["trade"]
        trade_csv = resolve(tc.get("trade_csv", "trade.csv"))
        if not trade_csv.is_file():
            problems.append(f"trade.trade_csv: {trade_csv} does not exist")
        years = tc.get("years", (2015, 2019))
        trade = TradeConfig(
            trade_csv=trade_csv,
            materials={str(k): str(v) for k, v in (tc.get("materials", {}) or {}).items()},
            years=(int(years[0]), int(years[1])),
            usd_to_eur=float(tc.get("usd_to_eur", 1.0)),
            mad_k=float(tc.get("mad_k", 2.0)),
        )

    if problems:
        raise ManifestError("; ".join(problems))

    return RunManifest(
        base_dir=base,
        scenario_dir=scenario_dir,
        out_dir=out_dir,
        products=tuple(products),
        capital_mode=capital_mode,
        uniform_rate=uniform_rate,
        seed=int(doc.get("seed", 0)),
        jobs=max(1, int(doc.get("jobs", 1))),
        typical_days=int(doc.get("typical_days", 40)),
        steps_per_day=int(doc.get("steps_per_day", 24)),
        solver_tolerance=float(doc.get("solver_tolerance", 1e-6)),
        importers=importers,
        min_suppliers=int(doc.get("min_suppliers", 10)),
        shipping=shipping,
        eu_network=eu_network,
        trade=trade,
    )
