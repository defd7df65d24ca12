"""Single-node capacity-expansion model over typical periods.

Builds the joint optimization of a country's domestic electricity demand
and its industrial production chain: generator clusters with availability
profiles, storages with two-level state of charge (intra-period profile
plus an inter-period state chained along the original day sequence with
cyclic annual closure), converters with stoichiometric coupling, raw
material purchases, and the annual product constraint.

Commodity bookkeeping:

* electricity is balanced hourly against domestic demand plus all
  industrial consumption (supply may exceed demand, i.e. curtailment is
  implicit);
* captured CO2 is balanced hourly with equality so that every captured
  ton is either used or routed to a sink converter;
* atmospheric CO2 is balanced annually, requiring capture to cover any
  residual process emissions;
* priced raw materials are balanced annually with purchase variables;
* the product itself only appears in the annual production target;
* every other commodity referenced by converters or storages is balanced
  hourly (supply >= consumption).
"""

from __future__ import annotations

import numpy as np

from renewpull.commodities import Commodity
from renewpull.finance import annuity
from renewpull.scenario import ScenarioModel, TechnologySpec
from renewpull.tsa import TypicalPeriodSet
from renewpull.esom.lp import InfeasibleError, LinearProgram

DEMAND_KEY = "demand"


class ModelConfigError(ValueError):
    """The requested model cannot be assembled from the given inputs."""


def scenario_series(scenario: ScenarioModel) -> dict[str, np.ndarray]:
    """All hourly series of a scenario, keyed for aggregation."""
    series = {DEMAND_KEY: scenario.demand_profile}
    for cluster in scenario.clusters:
        series[cluster.key] = cluster.profile
    return series


class SystemBuilder:
    """Adds one country's system to an LP, optionally under a name prefix.

    The same machinery backs the stand-alone country model, the import
    variant with purchase offers, and each node of the multi-country
    network model.
    """

    def __init__(
        self,
        lp: LinearProgram,
        scenario: ScenarioModel,
        periods: TypicalPeriodSet,
        prefix: str = "",
        demand_factor: float = 1.0,
    ):
        self.lp = lp
        self.scenario = scenario
        self.periods = periods
        self.px = prefix
        self.demand_factor = float(demand_factor)
        self.rate = scenario.discount.effective
        self.n_periods = periods.n_periods
        self.steps = periods.steps_per_period
        self.weights = periods.weights
        self.assets: list[dict] = []
        self.industry_el: list[tuple[str, float]] = []
        self.production: list[tuple[str, float]] = []
        self.purchase_vars: dict[str, str] = {}
        self.import_meta: list[dict] = []
        self.storage_meta: dict[str, dict] = {}
        # commodity -> {(p, t) -> [(var, coef)]}
        self._hourly: dict[Commodity, dict[tuple[int, int], list[tuple[str, float]]]] = {}
        self._annual: dict[Commodity, list[tuple[str, float]]] = {}
        self._built = False

        for cluster in scenario.clusters:
            if cluster.key not in periods.profiles:
                raise ModelConfigError(
                    f"typical periods lack reduced profile {cluster.key!r}"
                )
        if DEMAND_KEY not in periods.profiles:
            raise ModelConfigError("typical periods lack the demand profile")

    # --- commodity classification -------------------------------------------

    def _classify(self) -> None:
        referenced: set[Commodity] = set()
        for t in self.scenario.converters():
            referenced |= set(t.inputs) | set(t.outputs)
        for t in self.scenario.storages():
            referenced.add(t.commodity)
        self.priced = set(self.scenario.raw_material_prices)
        product = self.scenario.product
        self.hourly_commodities: list[Commodity] = [Commodity.ELECTRICITY]
        self.annual_commodities: list[Commodity] = []
        self.track_atmospheric = Commodity.CO2_ATMOSPHERIC in referenced
        for c in sorted(referenced, key=lambda c: c.value):
            if c in (Commodity.ELECTRICITY, Commodity.CO2_ATMOSPHERIC, product):
                continue
            if c in self.priced:
                self.annual_commodities.append(c)
            else:
                self.hourly_commodities.append(c)
        for t in self.scenario.storages():
            if t.commodity in self.priced or t.commodity == product:
                raise ModelConfigError(
                    f"storage {t.name!r} binds to {t.commodity}, which is balanced annually"
                )

    def _hourly_add(self, commodity: Commodity, p: int, t: int, var: str, coef: float) -> None:
        self._hourly.setdefault(commodity, {}).setdefault((p, t), []).append((var, coef))

    def _flow_add(self, commodity: Commodity, p: int, t: int, var: str, coef: float) -> None:
        """Route a converter/storage flow term to the right balance."""
        product = self.scenario.product
        if commodity == product:
            self.production.append((var, self.weights[p] * coef))
        elif commodity == Commodity.CO2_ATMOSPHERIC:
            # capture (consumption, coef < 0) counts positive in the annual row
            self._annual.setdefault(commodity, []).append((var, -self.weights[p] * coef))
        elif commodity in self.priced:
            self._annual.setdefault(commodity, []).append((var, self.weights[p] * coef))
        else:
            self._hourly_add(commodity, p, t, var, coef)

    # --- components -----------------------------------------------------------

    def _steps(self):
        for p in range(self.n_periods):
            for t in range(self.steps):
                yield p, t

    def _add_generators(self) -> None:
        for cluster in self.scenario.clusters:
            spec = self.scenario.generator_for(cluster.technology)
            ann = annuity(self.rate, spec.lifetime)
            cap = self.lp.add_var(
                f"{self.px}cap.{cluster.key}",
                lb=0.0,
                ub=cluster.capacity_ceiling_mw,
                cost=ann * spec.capex + spec.fixed_om,
            )
            profile = self.periods.profile(cluster.key)
            names = [self.lp.variables[cap].name]
            for p, t in self._steps():
                cf = float(profile[p, t])
                disp = f"{self.px}disp.{cluster.key}.{p}.{t}"
                if cf <= 0.0:
                    self.lp.add_var(disp, lb=0.0, ub=0.0)
                else:
                    self.lp.add_var(disp, lb=0.0, cost=self.weights[p] * spec.variable_om)
                    self.lp.add_row(
                        f"{self.px}dcap.{cluster.key}.{p}.{t}",
                        [(disp, 1.0), (cap, -cf)],
                        "<=",
                        0.0,
                    )
                names.append(disp)
                self._hourly_add(Commodity.ELECTRICITY, p, t, disp, 1.0)
            self.assets.append(
                {
                    "name": f"{self.px}{cluster.key}",
                    "kind": "generator",
                    "group": f"generation.{cluster.technology}",
                    "shared": True,
                    "capacity_var": self.lp.variables[cap].name,
                    "capacity_unit": "MW",
                    "vars": names,
                }
            )

    def _add_storages(self) -> None:
        n_days = self.periods.n_days
        assignment = self.periods.assignment
        for spec in self.scenario.storages():
            s = spec.name
            ann = annuity(self.rate, spec.lifetime)
            gamma = 1.0 - spec.self_discharge
            cap_e = self.lp.add_var(
                f"{self.px}cap_e.{s}", lb=0.0, ub=spec.capacity_max,
                cost=ann * spec.capex + spec.fixed_om,
            )
            cap_p = self.lp.add_var(
                f"{self.px}cap_p.{s}", lb=0.0, cost=ann * spec.power_capex,
            )
            names = [self.lp.variables[cap_e].name, self.lp.variables[cap_p].name]

            soc: dict[tuple[int, int], int] = {}
            for p in range(self.n_periods):
                for t in range(self.steps + 1):
                    bound = (0.0, 0.0) if t == 0 else (None, None)
                    soc[p, t] = self.lp.add_var(
                        f"{self.px}soc.{s}.{p}.{t}", lb=bound[0], ub=bound[1]
                    )
                    names.append(f"{self.px}soc.{s}.{p}.{t}")
            for p, t in self._steps():
                chg = f"{self.px}chg.{s}.{p}.{t}"
                dis = f"{self.px}dis.{s}.{p}.{t}"
                self.lp.add_var(chg, lb=0.0)
                self.lp.add_var(dis, lb=0.0, cost=self.weights[p] * spec.variable_om)
                names += [chg, dis]
                self.lp.add_row(
                    f"{self.px}chgcap.{s}.{p}.{t}", [(chg, 1.0), (cap_p, -1.0)], "<=", 0.0
                )
                self.lp.add_row(
                    f"{self.px}discap.{s}.{p}.{t}", [(dis, 1.0), (cap_p, -1.0)], "<=", 0.0
                )
                self.lp.add_row(
                    f"{self.px}socdef.{s}.{p}.{t}",
                    [
                        (soc[p, t + 1], 1.0),
                        (soc[p, t], -gamma),
                        (chg, -spec.charge_eff),
                        (dis, 1.0 / spec.discharge_eff),
                    ],
                    "=",
                    0.0,
                )
                self._hourly_add(spec.commodity, p, t, dis, 1.0)
                self._hourly_add(spec.commodity, p, t, chg, -1.0)

            day_vars = []
            for d in range(n_days):
                v = self.lp.add_var(f"{self.px}socd.{s}.{d}", lb=0.0)
                day_vars.append(v)
                names.append(f"{self.px}socd.{s}.{d}")
            gamma_day = gamma**self.steps
            for d in range(n_days):
                self.lp.add_row(
                    f"{self.px}socl.{s}.{d}",
                    [
                        (day_vars[(d + 1) % n_days], 1.0),
                        (day_vars[d], -gamma_day),
                        (soc[int(assignment[d]), self.steps], -1.0),
                    ],
                    "=",
                    0.0,
                )

            if gamma == 1.0:
                # Exact compact bound form: per-period envelope variables plus
                # one pair of rows per day instead of rows for every hour.
                lo = {}
                hi = {}
                for p in range(self.n_periods):
                    lo[p] = self.lp.add_var(f"{self.px}socm.{s}.{p}", lb=None, ub=0.0)
                    hi[p] = self.lp.add_var(f"{self.px}socM.{s}.{p}", lb=0.0)
                    names += [f"{self.px}socm.{s}.{p}", f"{self.px}socM.{s}.{p}"]
                    for t in range(1, self.steps):
                        self.lp.add_row(
                            f"{self.px}sm.{s}.{p}.{t}", [(soc[p, t], 1.0), (lo[p], -1.0)], ">=", 0.0
                        )
                        self.lp.add_row(
                            f"{self.px}sM.{s}.{p}.{t}", [(soc[p, t], 1.0), (hi[p], -1.0)], "<=", 0.0
                        )
                for d in range(n_days):
                    p = int(assignment[d])
                    self.lp.add_row(
                        f"{self.px}sd_lo.{s}.{d}", [(day_vars[d], 1.0), (lo[p], 1.0)], ">=", 0.0
                    )
                    self.lp.add_row(
                        f"{self.px}sd_hi.{s}.{d}",
                        [(day_vars[d], 1.0), (hi[p], 1.0), (cap_e, -1.0)],
                        "<=",
                        0.0,
                    )
            else:
                for d in range(n_days):
                    p = int(assignment[d])
                    self.lp.add_row(
                        f"{self.px}sb_hi.{s}.{d}.0", [(day_vars[d], 1.0), (cap_e, -1.0)], "<=", 0.0
                    )
                    for t in range(1, self.steps):
                        g = gamma**t
                        self.lp.add_row(
                            f"{self.px}sb_lo.{s}.{d}.{t}",
                            [(day_vars[d], g), (soc[p, t], 1.0)],
                            ">=",
                            0.0,
                        )
                        self.lp.add_row(
                            f"{self.px}sb_hi.{s}.{d}.{t}",
                            [(day_vars[d], g), (soc[p, t], 1.0), (cap_e, -1.0)],
                            "<=",
                            0.0,
                        )

            group = (
                "storage.electricity"
                if spec.commodity == Commodity.ELECTRICITY
                else f"storage.{spec.commodity.value}"
            )
            self.assets.append(
                {
                    "name": f"{self.px}{s}",
                    "kind": "storage",
                    "group": group,
                    "shared": spec.commodity == Commodity.ELECTRICITY,
                    "capacity_var": self.lp.variables[cap_e].name,
                    "capacity_unit": spec.commodity.unit,
                    "vars": names,
                }
            )
            self.storage_meta[f"{self.px}{s}"] = {
                "spec_name": s,
                "commodity": spec.commodity.value,
                "gamma": gamma,
                "cap_e": self.lp.variables[cap_e].name,
                "cap_p": self.lp.variables[cap_p].name,
                "requires_cavern": spec.requires_cavern,
            }

    def _add_converters(self) -> None:
        for spec in self.scenario.converters():
            v = spec.name
            ann = annuity(self.rate, spec.lifetime)
            cap = self.lp.add_var(
                f"{self.px}cap.cv.{v}",
                lb=spec.capacity_min,
                ub=spec.capacity_max,
                cost=ann * spec.capex + spec.fixed_om,
            )
            names = [self.lp.variables[cap].name]
            prev_act: str | None = None
            for p, t in self._steps():
                act = f"{self.px}act.{v}.{p}.{t}"
                self.lp.add_var(act, lb=0.0, cost=self.weights[p] * spec.variable_om)
                names.append(act)
                self.lp.add_row(f"{self.px}acap.{v}.{p}.{t}", [(act, 1.0), (cap, -1.0)], "<=", 0.0)
                if spec.min_load > 0:
                    self.lp.add_row(
                        f"{self.px}aload.{v}.{p}.{t}",
                        [(act, 1.0), (cap, -spec.min_load)],
                        ">=",
                        0.0,
                    )
                if spec.ramp_limit is not None and t > 0:
                    self.lp.add_row(
                        f"{self.px}rampup.{v}.{p}.{t}",
                        [(act, 1.0), (prev_act, -1.0), (cap, -spec.ramp_limit)],
                        "<=",
                        0.0,
                    )
                    self.lp.add_row(
                        f"{self.px}rampdn.{v}.{p}.{t}",
                        [(prev_act, 1.0), (act, -1.0), (cap, -spec.ramp_limit)],
                        "<=",
                        0.0,
                    )
                prev_act = act
                for c, ratio in spec.outputs.items():
                    self._flow_add(c, p, t, act, ratio)
                for c, ratio in spec.inputs.items():
                    self._flow_add(c, p, t, act, -ratio)
                    if c == Commodity.ELECTRICITY:
                        self.industry_el.append((act, self.weights[p] * ratio))
            self.assets.append(
                {
                    "name": f"{self.px}{v}",
                    "kind": "converter",
                    "group": f"conversion.{v}",
                    "shared": False,
                    "capacity_var": self.lp.variables[cap].name,
                    "capacity_unit": "unit/h",
                    "vars": names,
                }
            )

    def _add_purchases(self) -> None:
        for c in self.annual_commodities:
            price = self.scenario.raw_material_prices[c]
            buy = f"{self.px}buy.{c.value}"
            self.lp.add_var(buy, lb=0.0, cost=price)
            self.purchase_vars[c.value] = buy
            self._annual.setdefault(c, []).append((buy, 1.0))
            self.assets.append(
                {
                    "name": buy,
                    "kind": "purchase",
                    "group": f"raw_material.{c.value}",
                    "shared": False,
                    "capacity_var": None,
                    "capacity_unit": c.unit,
                    "vars": [buy],
                }
            )

    def add_import(self, tag: str, carrier: Commodity, specific_cost: float,
                   annual_limit: float) -> None:
        """Hourly purchase variables feeding one commodity balance."""
        if self._built:
            raise ModelConfigError("imports must be added before finalize()")
        if carrier not in self.hourly_commodities:
            raise ModelConfigError(
                f"import offer {tag!r}: {carrier} is not part of this process chain"
            )
        names = []
        terms = []
        for p, t in self._steps():
            imp = f"{self.px}imp.{tag}.{p}.{t}"
            self.lp.add_var(imp, lb=0.0, cost=self.weights[p] * specific_cost)
            names.append(imp)
            terms.append((imp, self.weights[p]))
            self._hourly_add(carrier, p, t, imp, 1.0)
        self.lp.add_row(f"{self.px}impcap.{tag}", terms, "<=", annual_limit)
        self.assets.append(
            {
                "name": f"{self.px}import.{tag}",
                "kind": "import",
                "group": f"import.{carrier.value}",
                "shared": False,
                "capacity_var": None,
                "capacity_unit": carrier.unit,
                "vars": names,
            }
        )
        self.import_meta.append(
            {
                "tag": tag,
                "carrier": carrier.value,
                "specific_cost": specific_cost,
                "annual_limit": annual_limit,
                "annual_terms": terms,
            }
        )

    def add_export(self, carrier: Commodity) -> str:
        """Annual carrier export, drawn from the node's product output.

        Network nodes produce the carrier as their scenario product; the
        export amount is bounded by the annual net production instead of
        the usual fixed target.
        """
        if carrier != self.scenario.product:
            raise ModelConfigError(
                f"export carrier {carrier} does not match the node product "
                f"{self.scenario.product}"
            )
        if not self.production:
            raise ModelConfigError(
                f"{self.scenario.region}: no converter produces {carrier}, nothing to export"
            )
        total = f"{self.px}export"
        self.lp.add_var(total, lb=0.0)
        self.lp.add_row(
            f"{self.px}exbal", [*self.production, (total, -1.0)], ">=", 0.0
        )
        return total

    # --- assembly ---------------------------------------------------------------

    def presolve_screen(self) -> None:
        """Reject systems that cannot possibly serve their demand.

        Only a necessary condition is checked: the ceiling-weighted annual
        energy of all clusters must cover the domestic demand. Skipped when
        converters can generate electricity from another commodity.
        """
        if any(
            Commodity.ELECTRICITY in t.outputs for t in self.scenario.converters()
        ):
            return
        max_gen = 0.0
        for cluster in self.scenario.clusters:
            profile = self.periods.profile(cluster.key)
            annual_cf = float((self.weights @ profile).sum())
            max_gen += cluster.capacity_ceiling_mw * annual_cf
        demand = self.periods.profile(DEMAND_KEY) * self.demand_factor
        annual_demand = float((self.weights @ demand).sum())
        if annual_demand > max_gen * (1.0 + 1e-9) + 1e-9:
            raise InfeasibleError(
                f"{self.scenario.region}: domestic demand {annual_demand:.6g} MWh/yr exceeds "
                f"the total renewable potential {max_gen:.6g} MWh/yr even at full dispatch"
            )

    def add_target_row(self, annual_target: float) -> None:
        if not self.production:
            raise ModelConfigError(
                f"no converter produces {self.scenario.product}; cannot impose a target"
            )
        self.lp.add_row(f"{self.px}target", self.production, ">=", annual_target)

    def build_components(self) -> None:
        self._classify()
        self._add_generators()
        self._add_storages()
        self._add_converters()
        self._add_purchases()

    def finalize_balances(self) -> None:
        """Create balance rows from the accumulated flow terms."""
        self._built = True
        demand = self.periods.profile(DEMAND_KEY) * self.demand_factor
        for c in self.hourly_commodities:
            terms_by_step = self._hourly.get(c, {})
            sense = "=" if c == Commodity.CO2_CAPTURED else ">="
            for p, t in self._steps():
                rhs = float(demand[p, t]) if c == Commodity.ELECTRICITY else 0.0
                terms = terms_by_step.get((p, t), [])
                if not terms:
                    if rhs > 0:
                        raise InfeasibleError(
                            f"{self.scenario.region}: no supply terms for "
                            f"{c.value} at period {p} step {t} but demand is positive"
                        )
                    continue
                self.lp.add_row(f"{self.px}bal.{c.value}.{p}.{t}", terms, sense, rhs)
        for c in self.annual_commodities:
            terms = self._annual.get(c, [])
            if terms:
                self.lp.add_row(f"{self.px}abal.{c.value}", terms, ">=", 0.0)
        if self.track_atmospheric:
            terms = self._annual.get(Commodity.CO2_ATMOSPHERIC, [])
            if terms:
                self.lp.add_row(f"{self.px}atm", terms, ">=", 0.0)

    def domestic_el_mwh(self) -> float:
        demand = self.periods.profile(DEMAND_KEY) * self.demand_factor
        return float((self.weights @ demand).sum())

    def meta(self) -> dict:
        return {
            "prefix": self.px,
            "region": str(self.scenario.region),
            "product": self.scenario.product.value,
            "n_periods": self.n_periods,
            "steps": self.steps,
            "weights": self.weights.tolist(),
            "assignment": self.periods.assignment.tolist(),
            "demand_factor": self.demand_factor,
            "assets": self.assets,
            "industry_el": self.industry_el,
            "production": self.production,
            "purchase_vars": self.purchase_vars,
            "imports": self.import_meta,
            "storages": self.storage_meta,
            "domestic_el_mwh": self.domestic_el_mwh(),
            "target_t": self.scenario.annual_target,
        }


def build_model1(
    scenario: ScenarioModel,
    periods: TypicalPeriodSet,
    demand_factor: float = 1.0,
    name: str | None = None,
) -> LinearProgram:
    """LP for one country's joint domestic-demand and industry optimization."""
    lp = LinearProgram(name or f"model1.{scenario.region}.{scenario.product.value}")
    builder = SystemBuilder(lp, scenario, periods, demand_factor=demand_factor)
    builder.presolve_screen()
    builder.build_components()
    builder.add_target_row(scenario.annual_target)
    builder.finalize_balances()
    lp.meta = {"kind": "model1", **builder.meta()}
    return lp


def storage_state_series(solution, storage_name: str) -> np.ndarray:
    """Absolute state of charge for every original hour, from primal values.

    Reconstructs socd[d] * gamma^t + soc_intra[period(d), t] over the full
    day sequence; useful for bound and cyclicity checks.
    """
    lp = solution.lp
    meta = lp.meta
    stor = meta["storages"][storage_name]
    prefix = meta.get("prefix", "")
    s = stor["spec_name"]
    gamma = stor["gamma"]
    steps = meta["steps"]
    assignment = meta["assignment"]
    out = np.empty(len(assignment) * steps)
    for d, p in enumerate(assignment):
        socd = solution.value(f"{prefix}socd.{s}.{d}")
        for t in range(steps):
            intra = solution.value(f"{prefix}soc.{s}.{p}.{t}")
            out[d * steps + t] = socd * gamma**t + intra
    return out
