"""Country scenario configuration, validation, and the validated model type.

A scenario document describes one country-product system: its renewable
potentials, technology costs, domestic demand, raw-material prices, and
financing. ``validate_scenario`` turns a parsed configuration mapping into
an immutable :class:`ScenarioModel`, reporting every violated invariant
with its field path. Validation also applies the demand scaling rule (the
hourly profile is rescaled so its annual sum equals ``scaling`` times the
declared annual demand) and clusters the raw potentials.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import yaml

from renewpull import tsa
from renewpull.commodities import Commodity, parse_commodity
from renewpull.finance import CAPITAL_MODES, effective_rate
from renewpull.timeseries import HOURS_PER_YEAR, read_hourly_csv, write_hourly_csv

TECH_KINDS = ("generator", "storage", "converter")

DEFAULT_DEMAND_SCALING = 0.5
DEFAULT_HYDROGEN_LHV = 33.33  # MWh per ton of hydrogen


class RegionId(str):
    """ISO 3166-1 alpha-3 country code."""

    __slots__ = ()

    def __new__(cls, code):
        if isinstance(code, RegionId):
            return code
        text = str(code)
        if len(text) != 3 or not text.isascii() or not text.isalpha() or not text.isupper():
            raise ValueError(f"region code must be 3 uppercase ASCII letters, got {code!r}")
        return super().__new__(cls, text)


class ScenarioError(ValueError):
    """One or more scenario invariants are violated."""

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("invalid scenario:\n" + "\n".join(f"  - {p}" for p in self.problems))


@dataclass(frozen=True)
class DiscountRate:
    """Country financing: market rate, hazard rate, and the blended result."""

    region: RegionId
    financial: float
    hazard: float
    effective: float
    mode: str = "national"


@dataclass(frozen=True)
class TechnologySpec:
    """One investable asset: a generator class, a storage, or a converter.

    Cost fields are EUR per unit of capacity (capex, fixed_om) and EUR per
    unit of flow (variable_om). Generator capacity is MW; storage capex
    prices energy capacity with ``power_capex`` for charge/discharge
    capacity; converter capacity and activity are in units of output (or
    throughput, for pure sinks) per hour, with ``inputs``/``outputs``
    giving commodity amounts per unit of activity.
    """

    name: str
    kind: str
    capex: float = 0.0
    fixed_om: float = 0.0
    variable_om: float = 0.0
    lifetime: float = 20.0
    # generator
    technology: str | None = None
    # converter
    inputs: Mapping[Commodity, float] = field(default_factory=dict)
    outputs: Mapping[Commodity, float] = field(default_factory=dict)
    capacity_min: float = 0.0
    capacity_max: float | None = None
    min_load: float = 0.0
    ramp_limit: float | None = None
    # storage
    commodity: Commodity | None = None
    power_capex: float = 0.0
    charge_eff: float = 1.0
    discharge_eff: float = 1.0
    self_discharge: float = 0.0
    requires_cavern: bool = False


@dataclass(frozen=True)
class ScenarioModel:
    """A validated country-product scenario, immutable and share-safe."""

    region: RegionId
    product: Commodity
    annual_target: float
    technologies: tuple[TechnologySpec, ...]
    clusters: tuple[tsa.CapacityFactorCluster, ...]
    demand_profile: np.ndarray  # hourly MWh after scaling
    declared_annual_demand: float
    demand_scaling: float
    raw_material_prices: Mapping[Commodity, float]
    discount: DiscountRate
    cavern_available: bool
    hydrogen_lhv_mwh_per_t: float = DEFAULT_HYDROGEN_LHV
    k_wind: int = tsa.DEFAULT_K_WIND
    k_pv: int = tsa.DEFAULT_K_PV
    raw_potentials: tuple[tsa.RawPotential, ...] = ()

    def __post_init__(self):
        profile = np.asarray(self.demand_profile, dtype=float)
        profile.setflags(write=False)
        object.__setattr__(self, "demand_profile", profile)

    @property
    def annual_demand_mwh(self) -> float:
        return float(self.demand_profile.sum())

    def tech(self, name: str) -> TechnologySpec:
        for t in self.technologies:
            if t.name == name:
                return t
        raise KeyError(f"no technology named {name!r} in scenario {self.region}")

    def generators(self) -> tuple[TechnologySpec, ...]:
        return tuple(t for t in self.technologies if t.kind == "generator")

    def storages(self) -> tuple[TechnologySpec, ...]:
        return tuple(t for t in self.technologies if t.kind == "storage")

    def converters(self) -> tuple[TechnologySpec, ...]:
        return tuple(t for t in self.technologies if t.kind == "converter")

    def generator_for(self, technology: str) -> TechnologySpec:
        for t in self.technologies:
            if t.kind == "generator" and t.technology == technology:
                return t
        raise KeyError(f"no generator spec for technology {technology!r}")


def _get(cfg: Mapping, key: str, default=None):
    value = cfg.get(key, default)
    return default if value is None else value


def _parse_tech(raw: Mapping, path: str, errors: list[str]) -> TechnologySpec | None:
    name = raw.get("name")
    if not name:
        errors.append(f"{path}.name: required")
        return None
    kind = raw.get("kind")
    if kind not in TECH_KINDS:
        errors.append(f"{path}.kind: must be one of {TECH_KINDS}, got {kind!r}")
        return None

    def number(key, default=0.0, minimum=None, maximum=None, strict_min=False):
        value = raw.get(key, default)
        if value is None:
            return None
        try:
            value = float(value)
        except (TypeError, ValueError):
            errors.append(f"{path}.{key}: not a number: {value!r}")
            return default
        if minimum is not None and (value <= minimum if strict_min else value < minimum):
            op = ">" if strict_min else ">="
            errors.append(f"{path}.{key}: must be {op} {minimum}, got {value}")
        if maximum is not None and value > maximum:
            errors.append(f"{path}.{key}: must be <= {maximum}, got {value}")
        return value

    capex = number("capex", 0.0, minimum=0.0)
    fixed_om = number("fixed_om", 0.0, minimum=0.0)
    variable_om = number("variable_om", 0.0, minimum=0.0)
    lifetime = number("lifetime", 20.0, minimum=1.0)

    inputs: dict[Commodity, float] = {}
    outputs: dict[Commodity, float] = {}
    commodity = None
    technology = raw.get("technology")
    if kind == "generator":
        if technology not in tsa.GENERATOR_TECHNOLOGIES:
            errors.append(
                f"{path}.technology: generator must name one of "
                f"{tsa.GENERATOR_TECHNOLOGIES}, got {technology!r}"
            )
    elif kind == "converter":
        for side, target in (("inputs", inputs), ("outputs", outputs)):
            for cname, ratio in dict(_get(raw, side, {})).items():
                try:
                    com = parse_commodity(cname, where=f"{path}.{side}")
                except ValueError as exc:
                    errors.append(str(exc))
                    continue
                try:
                    ratio = float(ratio)
                except (TypeError, ValueError):
                    errors.append(f"{path}.{side}.{cname}: not a number: {ratio!r}")
                    continue
                if ratio <= 0:
                    errors.append(f"{path}.{side}.{cname}: ratio must be > 0, got {ratio}")
                    continue
                target[com] = ratio
        if not inputs and not outputs:
            errors.append(f"{path}: converter needs at least one input or output")
    elif kind == "storage":
        cname = raw.get("commodity")
        if cname is None:
            errors.append(f"{path}.commodity: storage must declare its commodity")
        else:
            try:
                commodity = parse_commodity(cname, where=f"{path}.commodity")
            except ValueError as exc:
                errors.append(str(exc))

    charge_eff = number("charge_eff", 1.0, minimum=0.0, maximum=1.0, strict_min=True)
    discharge_eff = number("discharge_eff", 1.0, minimum=0.0, maximum=1.0, strict_min=True)
    self_discharge = number("self_discharge", 0.0, minimum=0.0)
    if self_discharge is not None and self_discharge >= 1.0:
        errors.append(f"{path}.self_discharge: must be < 1 per hour, got {self_discharge}")
    power_capex = number("power_capex", 0.0, minimum=0.0)
    capacity_min = number("capacity_min", 0.0, minimum=0.0)
    capacity_max = raw.get("capacity_max")
    if capacity_max is not None:
        capacity_max = number("capacity_max", None, minimum=0.0)
        if capacity_max is not None and capacity_min is not None and capacity_max < capacity_min:
            errors.append(f"{path}.capacity_max: below capacity_min")
    min_load = number("min_load", 0.0, minimum=0.0, maximum=1.0)
    ramp_limit = raw.get("ramp_limit")
    if ramp_limit is not None:
        ramp_limit = number("ramp_limit", None, minimum=0.0)

    return TechnologySpec(
        name=str(name),
        kind=kind,
        capex=capex,
        fixed_om=fixed_om,
        variable_om=variable_om,
        lifetime=lifetime if lifetime is not None else 20.0,
        technology=technology if kind == "generator" else None,
        inputs=inputs,
        outputs=outputs,
        capacity_min=capacity_min,
        capacity_max=capacity_max,
        min_load=min_load,
        ramp_limit=ramp_limit,
        commodity=commodity,
        power_capex=power_capex,
        charge_eff=charge_eff,
        discharge_eff=discharge_eff,
        self_discharge=self_discharge,
        requires_cavern=bool(raw.get("requires_cavern", False)),
    )


def validate_scenario(
    config: Mapping,
    capital_mode: str = "national",
    uniform_rate: float | None = None,
) -> ScenarioModel:
    """Check every scenario invariant and return the validated model.

    All violations are collected and raised together in a single
    :class:`ScenarioError`, each tagged with its field path. Validation is
    idempotent: re-validating the config produced by ``scenario_to_config``
    yields an identical model (the demand rescaling detects an already
    scaled profile and leaves it untouched).
    """
    errors: list[str] = []

    try:
        region = RegionId(config.get("region"))
    except ValueError as exc:
        errors.append(f"region: {exc}")
        region = None

    product = None
    try:
        product = parse_commodity(config.get("product"), where="product")
    except ValueError as exc:
        errors.append(str(exc))

    annual_target = config.get("annual_target_t", config.get("annual_target"))
    try:
        annual_target = float(annual_target)
        if annual_target <= 0:
            errors.append(f"annual_target_t: must be > 0, got {annual_target}")
    except (TypeError, ValueError):
        errors.append(f"annual_target_t: not a number: {annual_target!r}")
        annual_target = 1.0

    cavern_available = bool(config.get("cavern_available", False))

    technologies: list[TechnologySpec] = []
    seen_names = set()
    for i, raw in enumerate(_get(config, "technologies", [])):
        spec = _parse_tech(raw, f"technologies[{i}]", errors)
        if spec is None:
            continue
        if spec.name in seen_names:
            errors.append(f"technologies[{i}].name: duplicate name {spec.name!r}")
        seen_names.add(spec.name)
        if spec.requires_cavern and not cavern_available:
            errors.append(
                f"technologies[{i}] ({spec.name}): cavern storage configured but "
                "cavern_available is false"
            )
        technologies.append(spec)

    if product is not None:
        producers = [
            t for t in technologies if t.kind == "converter" and product in t.outputs
        ]
        if not producers:
            errors.append(f"product: no converter outputs {product}")
        for i, t in enumerate(technologies):
            if t.kind == "converter" and product in t.inputs and not producers:
                pass  # consumption without production already reported above

    # --- demand -----------------------------------------------------------
    demand_cfg = _get(config, "demand", {})
    profile = demand_cfg.get("profile")
    if profile is None:
        errors.append("demand.profile: required (inline array or profile_csv)")
        profile = np.zeros(HOURS_PER_YEAR)
    profile = np.asarray(profile, dtype=float)
    if profile.ndim != 1 or len(profile) != HOURS_PER_YEAR:
        errors.append(f"demand.profile: expected {HOURS_PER_YEAR} hourly values, got shape {profile.shape}")
        profile = np.zeros(HOURS_PER_YEAR)
    if not np.all(np.isfinite(profile)):
        errors.append("demand.profile: contains NaN or infinite entries")
        profile = np.nan_to_num(profile)
    if profile.min(initial=0.0) < 0:
        errors.append("demand.profile: negative entries")

    scaling = demand_cfg.get("scaling", DEFAULT_DEMAND_SCALING)
    try:
        scaling = float(scaling)
        if scaling < 0:
            errors.append(f"demand.scaling: must be >= 0, got {scaling}")
    except (TypeError, ValueError):
        errors.append(f"demand.scaling: not a number: {scaling!r}")
        scaling = DEFAULT_DEMAND_SCALING

    declared = demand_cfg.get("annual_mwh")
    if declared is None:
        declared = float(profile.sum())
    else:
        try:
            declared = float(declared)
            if declared < 0:
                errors.append(f"demand.annual_mwh: must be >= 0, got {declared}")
        except (TypeError, ValueError):
            errors.append(f"demand.annual_mwh: not a number: {declared!r}")
            declared = float(profile.sum())

    target_sum = scaling * declared
    current = float(profile.sum())
    if target_sum > 0 and current <= 0:
        errors.append("demand.profile: all-zero profile cannot be rescaled to a positive annual demand")
    elif current > 0 and abs(current - target_sum) > 1e-12 * max(target_sum, 1.0):
        profile = profile * (target_sum / current)

    # --- potentials -------------------------------------------------------
    clustering_cfg = _get(config, "clustering", {})
    k_wind = int(_get(clustering_cfg, "k_wind", tsa.DEFAULT_K_WIND))
    k_pv = int(_get(clustering_cfg, "k_pv", tsa.DEFAULT_K_PV))

    raw_potentials: list[tsa.RawPotential] = []
    for i, raw in enumerate(_get(config, "potentials", [])):
        path = f"potentials[{i}]"
        series = raw.get("profile")
        if series is None:
            errors.append(f"{path}.profile: required")
            continue
        series = np.asarray(series, dtype=float)
        if len(series) != HOURS_PER_YEAR:
            errors.append(f"{path}.profile: expected {HOURS_PER_YEAR} values, got {len(series)}")
            continue
        if not np.all(np.isfinite(series)):
            errors.append(f"{path}.profile: contains NaN or infinite entries")
            continue
        if series.min() < 0 or series.max() > 1.0:
            errors.append(f"{path}.profile: capacity factors must lie in [0, 1]")
            continue
        try:
            ceiling = float(raw.get("ceiling_mw", 0.0))
        except (TypeError, ValueError):
            errors.append(f"{path}.ceiling_mw: not a number")
            continue
        try:
            raw_potentials.append(
                tsa.RawPotential(technology=raw.get("technology"), profile=series, ceiling_mw=ceiling)
            )
        except tsa.AggregationError as exc:
            errors.append(f"{path}: {exc}")

    gen_techs = {t.technology for t in technologies if t.kind == "generator"}
    for i, p in enumerate(raw_potentials):
        if p.technology not in gen_techs:
            errors.append(
                f"potentials[{i}]: no generator technology spec for {p.technology!r}"
            )

    clusters: tuple[tsa.CapacityFactorCluster, ...] = ()
    if not errors:
        try:
            clusters = tuple(tsa.cluster_potentials(raw_potentials, k_wind=k_wind, k_pv=k_pv))
        except tsa.AggregationError as exc:
            errors.append(f"potentials: {exc}")

    # --- prices and financing ---------------------------------------------
    prices: dict[Commodity, float] = {}
    for cname, price in dict(_get(config, "raw_material_prices", {})).items():
        try:
            com = parse_commodity(cname, where="raw_material_prices")
        except ValueError as exc:
            errors.append(str(exc))
            continue
        try:
            price = float(price)
        except (TypeError, ValueError):
            errors.append(f"raw_material_prices.{cname}: not a number: {price!r}")
            continue
        if price < 0:
            errors.append(f"raw_material_prices.{cname}: must be >= 0, got {price}")
            continue
        if product is not None and com == product:
            errors.append(f"raw_material_prices.{cname}: the product cannot be bought at a fixed price")
            continue
        if com == Commodity.ELECTRICITY:
            errors.append("raw_material_prices.electricity: electricity is balanced hourly, not bought")
            continue
        prices[com] = price

    discount_cfg = _get(config, "discount", {})
    financial = discount_cfg.get("financial", 0.0)
    hazard = discount_cfg.get("hazard", 0.0)
    discount = None
    try:
        eff = effective_rate(float(financial), float(hazard), mode=capital_mode, uniform_rate=uniform_rate)
        if region is not None:
            discount = DiscountRate(
                region=region,
                financial=float(financial),
                hazard=float(hazard),
                effective=eff,
                mode=capital_mode,
            )
    except (TypeError, ValueError) as exc:
        errors.append(f"discount: {exc}")

    lhv = config.get("hydrogen_lhv_mwh_per_t", DEFAULT_HYDROGEN_LHV)
    try:
        lhv = float(lhv)
        if lhv <= 0:
            errors.append(f"hydrogen_lhv_mwh_per_t: must be > 0, got {lhv}")
    except (TypeError, ValueError):
        errors.append(f"hydrogen_lhv_mwh_per_t: not a number: {lhv!r}")
        lhv = DEFAULT_HYDROGEN_LHV

    if errors:
        raise ScenarioError(errors)

    return ScenarioModel(
        region=region,
        product=product,
        annual_target=annual_target,
        technologies=tuple(technologies),
        clusters=clusters,
        demand_profile=profile,
        declared_annual_demand=declared,
        demand_scaling=scaling,
        raw_material_prices=prices,
        discount=discount,
        cavern_available=cavern_available,
        hydrogen_lhv_mwh_per_t=lhv,
        k_wind=k_wind,
        k_pv=k_pv,
        raw_potentials=tuple(raw_potentials),
    )


def _tech_to_dict(t: TechnologySpec) -> dict:
    out: dict = {"name": t.name, "kind": t.kind, "capex": t.capex, "fixed_om": t.fixed_om,
                 "variable_om": t.variable_om, "lifetime": t.lifetime}
    if t.kind == "generator":
        out["technology"] = t.technology
    elif t.kind == "converter":
        out["inputs"] = {c.value: r for c, r in t.inputs.items()}
        out["outputs"] = {c.value: r for c, r in t.outputs.items()}
        if t.min_load:
            out["min_load"] = t.min_load
        if t.ramp_limit is not None:
            out["ramp_limit"] = t.ramp_limit
    elif t.kind == "storage":
        out["commodity"] = t.commodity.value
        out["power_capex"] = t.power_capex
        out["charge_eff"] = t.charge_eff
        out["discharge_eff"] = t.discharge_eff
        out["self_discharge"] = t.self_discharge
        if t.requires_cavern:
            out["requires_cavern"] = True
    if t.capacity_min:
        out["capacity_min"] = t.capacity_min
    if t.capacity_max is not None:
        out["capacity_max"] = t.capacity_max
    return out


def scenario_to_config(model: ScenarioModel) -> dict:
    """Round-trippable configuration mapping for a validated model.

    The demand block declares the already-scaled annual sum together with
    the original scaling factor, so feeding the result back through
    ``validate_scenario`` reproduces the model without rescaling again.
    """
    return {
        "region": str(model.region),
        "product": model.product.value,
        "annual_target_t": model.annual_target,
        "cavern_available": model.cavern_available,
        "hydrogen_lhv_mwh_per_t": model.hydrogen_lhv_mwh_per_t,
        "demand": {
            "profile": model.demand_profile.copy(),
            "annual_mwh": model.declared_annual_demand,
            "scaling": model.demand_scaling,
        },
        "clustering": {"k_wind": model.k_wind, "k_pv": model.k_pv},
        "technologies": [_tech_to_dict(t) for t in model.technologies],
        "potentials": [
            {"technology": p.technology, "profile": p.profile.copy(), "ceiling_mw": p.ceiling_mw}
            for p in model.raw_potentials
        ],
        "raw_material_prices": {c.value: v for c, v in model.raw_material_prices.items()},
        "discount": {"financial": model.discount.financial, "hazard": model.discount.hazard},
    }


def load_scenario(
    path: str | Path,
    capital_mode: str = "national",
    uniform_rate: float | None = None,
) -> ScenarioModel:
    """Read a scenario YAML document (resolving CSV references) and validate it."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        config = yaml.safe_load(fh)
    if not isinstance(config, dict):
        raise ScenarioError([f"{path}: scenario document must be a mapping"])
    base = path.parent

    demand_cfg = config.get("demand") or {}
    if "profile_csv" in demand_cfg and "profile" not in demand_cfg:
        demand_cfg = dict(demand_cfg)
        demand_cfg["profile"] = read_hourly_csv(base / demand_cfg.pop("profile_csv"))
        config = dict(config)
        config["demand"] = demand_cfg

    potentials = config.get("potentials") or []
    resolved = []
    for raw in potentials:
        if "profile_csv" in raw and "profile" not in raw:
            raw = dict(raw)
            raw["profile"] = read_hourly_csv(base / raw.pop("profile_csv"))
        resolved.append(raw)
    config = dict(config)
    config["potentials"] = resolved
    return validate_scenario(config, capital_mode=capital_mode, uniform_rate=uniform_rate)


def save_scenario(model: ScenarioModel, directory: str | Path, name: str | None = None) -> Path:
    """Write a model back to a YAML document plus time-series CSVs."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stem = name or f"{model.region}_{model.product.value}"
    config = scenario_to_config(model)

    demand_path = directory / f"{stem}_demand.csv"
    write_hourly_csv(demand_path, config["demand"].pop("profile"))
    config["demand"]["profile_csv"] = demand_path.name

    for i, raw in enumerate(config["potentials"]):
        p_path = directory / f"{stem}_potential_{i}.csv"
        write_hourly_csv(p_path, raw.pop("profile"))
        raw["profile_csv"] = p_path.name

    doc_path = directory / f"{stem}.yaml"
    with open(doc_path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(config, fh, sort_keys=True)
    return doc_path
