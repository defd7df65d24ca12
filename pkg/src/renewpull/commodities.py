"""Commodity identifiers and their fixed accounting units."""

from __future__ import annotations

import enum


class Commodity(str, enum.Enum):
    """Every flow a model may reference.

    Electricity and hydrogen are tracked in MWh, all other commodities in
    metric tons. The unit is fixed per commodity; mixed-unit bookkeeping is
    the caller's responsibility at conversion boundaries (e.g. hydrogen
    cargo handled by ships is weighed in tons and converted via the
    scenario's lower heating value).
    """

    ELECTRICITY = "electricity"
    HYDROGEN = "hydrogen"
    CO2_CAPTURED = "co2_captured"
    CO2_ATMOSPHERIC = "co2_atmospheric"
    METHANOL = "methanol"
    OLEFINS = "olefins"
    AMMONIA = "ammonia"
    NITROGEN = "nitrogen"
    IRON_ORE = "iron_ore"
    HBI = "hbi"
    STEEL = "steel"
    SCRAP = "scrap"
    LIMESTONE = "limestone"
    CEMENT = "cement"
    COAL = "coal"
    NATURAL_GAS = "natural_gas"
    OIL = "oil"

    def __str__(self) -> str:  # keep file formats free of "Commodity." prefixes
        return self.value

    @property
    def unit(self) -> str:
        if self in (Commodity.ELECTRICITY, Commodity.HYDROGEN):
            return "MWh"
        return "t"


def parse_commodity(name: object, where: str = "") -> Commodity:
    """Look up a commodity by name, raising a readable error on misses."""
    if isinstance(name, Commodity):
        return name
    try:
        return Commodity(str(name))
    except ValueError:
        loc = f"{where}: " if where else ""
        known = ", ".join(c.value for c in Commodity)
        raise ValueError(f"{loc}unknown commodity {name!r} (known: {known})") from None
