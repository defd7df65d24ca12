"""Nationally differentiated raw-material prices from bilateral trade records.

Unit values are mass-weighted per direction and year, combined across the
export and import flows of each country-material pair, then clipped per
material across countries with a median-absolute-deviation rule to catch
reporting outliers. Countries without usable trade in a material fall back
to the global clipped median and are flagged.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

from renewpull.commodities import Commodity, parse_commodity
from renewpull.scenario import RegionId

DEFAULT_YEARS = (2015, 2019)
DEFAULT_MAD_K = 2.0

TRADE_COLUMNS = (
    "reporter",
    "partner",
    "material_code",
    "direction",
    "year",
    "mass_kg",
    "value_usd_or_eur",
    "currency",
)


@dataclass(frozen=True)
class TradeRecord:
    reporter: RegionId
    material: Commodity
    direction: str  # "export" | "import"
    year: int
    mass_t: float
    value_eur: float

    def __post_init__(self):
        if self.direction not in ("export", "import"):
            raise ValueError(f"direction must be export/import, got {self.direction!r}")
        if self.mass_t <= 0:
            raise ValueError(f"trade mass must be > 0, got {self.mass_t}")
        if self.value_eur < 0:
            raise ValueError(f"trade value must be >= 0, got {self.value_eur}")


@dataclass(frozen=True)
class MaterialPrice:
    region: RegionId
    material: Commodity
    price: float  # EUR per ton
    provenance: str  # weighted | clipped_low | clipped_high | fallback
    pre_clip: float | None = None

    def __post_init__(self):
        if self.price <= 0:
            raise ValueError(f"price must be > 0, got {self.price}")


def weighted_price(records: Sequence[TradeRecord]) -> float | None:
    """Mass-weighted unit value across both trade directions.

    Unit values are averaged per direction over the years weighted by
    mass, then the directions are combined by their mass flows; this
    collapses to total value over total mass. Returns None on zero mass.
    """
    if not records:
        raise ValueError("weighted_price needs at least one record")
    total_mass = 0.0
    total_value = 0.0
    for direction in ("export", "import"):
        by_year: dict[int, tuple[float, float]] = {}
        for r in records:
            if r.direction != direction:
                continue
            mass, value = by_year.get(r.year, (0.0, 0.0))
            by_year[r.year] = (mass + r.mass_t, value + r.value_eur)
        dir_mass = sum(m for m, _ in by_year.values())
        if dir_mass <= 0:
            continue
        unit_values = {y: v / m for y, (m, v) in by_year.items() if m > 0}
        dir_price = (
            sum(by_year[y][0] * unit_values[y] for y in unit_values) / dir_mass
        )
        total_mass += dir_mass
        total_value += dir_price * dir_mass
    if total_mass <= 0:
        return None
    return total_value / total_mass


@dataclass(frozen=True)
class ClipResult:
    values: np.ndarray
    provenance: tuple[str, ...]
    median: float
    mad: float
    lower: float
    upper: float
    mad_zero: bool

    @property
    def clipped_count(self) -> int:
        return sum(1 for p in self.provenance if p != "weighted")


def mad_clip(values: Sequence[float], k: float = DEFAULT_MAD_K) -> ClipResult:
    """Clip outliers to median +/- k * MAD; a zero MAD disables clipping."""
    arr = np.asarray(values, dtype=float)
    if len(arr) < 3:
        raise ValueError(f"MAD clipping needs at least 3 values, got {len(arr)}")
    med = float(np.median(arr))
    mad = float(np.median(np.abs(arr - med)))
    if mad == 0.0:
        return ClipResult(
            values=arr.copy(),
            provenance=tuple("weighted" for _ in arr),
            median=med,
            mad=0.0,
            lower=med,
            upper=med,
            mad_zero=True,
        )
    lower = med - k * mad
    upper = med + k * mad
    clipped = np.clip(arr, lower, upper)
    provenance = tuple(
        "clipped_low" if v < lower else "clipped_high" if v > upper else "weighted"
        for v in arr
    )
    return ClipResult(
        values=clipped,
        provenance=provenance,
        median=med,
        mad=mad,
        lower=lower,
        upper=upper,
        mad_zero=False,
    )


@dataclass(frozen=True)
class PriceTable:
    prices: tuple[MaterialPrice, ...]
    clipped_fraction: float
    skipped_codes: Mapping[str, int]
    dropped_rows: int

    def lookup(self) -> dict[tuple[str, str], MaterialPrice]:
        return {(str(p.region), p.material.value): p for p in self.prices}


def load_trade_records(
    source: str | Path | pd.DataFrame,
    materials: Mapping[str, Commodity | str],
    years: tuple[int, int] = DEFAULT_YEARS,
    usd_to_eur: float = 1.0,
) -> tuple[list[TradeRecord], dict[str, int], int]:
    """Parse the trade CSV into records, counting skips and drops."""
    if isinstance(source, pd.DataFrame):
        frame = source
    else:
        frame = pd.read_csv(source, comment="#")
    for column in TRADE_COLUMNS:
        if column not in frame.columns:
            raise ValueError(f"trade file: missing column {column!r}")
    code_map = {str(k): parse_commodity(v) for k, v in materials.items()}

    records: list[TradeRecord] = []
    skipped: dict[str, int] = {}
    dropped = 0
    for _, row in frame.iterrows():
        code = str(row["material_code"])
        if code not in code_map:
            skipped[code] = skipped.get(code, 0) + 1
            continue
        year = int(row["year"])
        if not years[0] <= year <= years[1]:
            dropped += 1
            continue
        currency = str(row["currency"]).upper()
        if currency == "EUR":
            value = float(row["value_usd_or_eur"])
        elif currency == "USD":
            value = float(row["value_usd_or_eur"]) * usd_to_eur
        else:
            dropped += 1
            continue
        mass_t = float(row["mass_kg"]) / 1000.0
        direction = str(row["direction"]).lower()
        if mass_t <= 0 or value < 0 or direction not in ("export", "import"):
            dropped += 1
            continue
        records.append(
            TradeRecord(
                reporter=RegionId(row["reporter"]),
                material=code_map[code],
                direction=direction,
                year=year,
                mass_t=mass_t,
                value_eur=value,
            )
        )
    return records, skipped, dropped


def price_table(
    source: str | Path | pd.DataFrame,
    materials: Mapping[str, Commodity | str],
    years: tuple[int, int] = DEFAULT_YEARS,
    usd_to_eur: float = 1.0,
    mad_k: float = DEFAULT_MAD_K,
    regions: Sequence[str] | None = None,
) -> PriceTable:
    """Weighted prices per country-material, MAD-clipped per material.

    When ``regions`` is given, countries without usable trade in a
    material receive the global clipped median as a flagged fallback so
    every modeled country carries a price.
    """
    records, skipped, dropped = load_trade_records(source, materials, years, usd_to_eur)

    grouped: dict[tuple[RegionId, Commodity], list[TradeRecord]] = {}
    for r in records:
        grouped.setdefault((r.reporter, r.material), []).append(r)

    material_list = sorted({parse_commodity(v) for v in materials.values()}, key=lambda c: c.value)
    prices: list[MaterialPrice] = []
    clipped = 0
    counted = 0
    for material in material_list:
        entries: list[tuple[RegionId, float]] = []
        for (region, mat), recs in sorted(grouped.items(), key=lambda kv: (kv[0][0], kv[0][1].value)):
            if mat != material:
                continue
            value = weighted_price(recs)
            if value is not None and value > 0:
                entries.append((region, value))
        if not entries:
            continue
        raw = np.array([v for _, v in entries])
        if len(entries) >= 3:
            result = mad_clip(raw, k=mad_k)
            values = result.values
            provenance = result.provenance
        else:
            values = raw
            provenance = tuple("weighted" for _ in raw)
        for (region, original), value, prov in zip(entries, values, provenance):
            counted += 1
            if prov != "weighted":
                clipped += 1
            prices.append(
                MaterialPrice(
                    region=region,
                    material=material,
                    price=float(value),
                    provenance=prov,
                    pre_clip=float(original) if prov != "weighted" else None,
                )
            )
        if regions:
            covered = {str(region) for region, _ in entries}
            fallback = float(np.median(values))
            for region in sorted(set(regions) - covered):
                prices.append(
                    MaterialPrice(
                        region=RegionId(region),
                        material=material,
                        price=fallback,
                        provenance="fallback",
                    )
                )

    fraction = clipped / counted if counted else 0.0
    return PriceTable(
        prices=tuple(prices),
        clipped_fraction=fraction,
        skipped_codes=skipped,
        dropped_rows=dropped,
    )
