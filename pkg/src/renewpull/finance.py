"""Financial primitives: capital annualization and country capital-cost blending."""

from __future__ import annotations

CAPITAL_MODES = ("uniform", "national")

# Blend weights for the national capital-cost mode: 75% financial-market
# rate, 25% natural-hazard risk rate.
FINANCIAL_WEIGHT = 0.75
HAZARD_WEIGHT = 0.25


def annuity(rate: float, lifetime: float) -> float:
    """Annual payment per unit of overnight capital.

    r (1+r)^L / ((1+r)^L - 1) for rate r and lifetime L. The zero-rate
    case is defined as the continuous limit 1/L so that uniform-rate
    scenarios with r = 0 stay well defined.
    """
    if lifetime < 1:
        raise ValueError(f"lifetime must be >= 1 year, got {lifetime}")
    if rate < 0:
        raise ValueError(f"rate must be >= 0, got {rate}")
    if rate == 0.0:
        return 1.0 / lifetime
    growth = (1.0 + rate) ** lifetime
    return rate * growth / (growth - 1.0)


def effective_rate(
    financial: float,
    hazard: float,
    mode: str = "national",
    uniform_rate: float | None = None,
) -> float:
    """Discount rate applied to one country's capital costs.

    National mode blends the financial-market rate with the natural-hazard
    risk rate at 75:25; uniform mode ignores both country inputs and
    returns the shared rate.
    """
    if mode not in CAPITAL_MODES:
        raise ValueError(f"capital mode must be one of {CAPITAL_MODES}, got {mode!r}")
    for label, value in (("financial", financial), ("hazard", hazard)):
        if not 0.0 <= value < 1.0:
            raise ValueError(f"{label} rate must be in [0, 1), got {value}")
    if mode == "uniform":
        if uniform_rate is None:
            raise ValueError("uniform capital mode requires an explicit uniform rate")
        if not 0.0 <= uniform_rate < 1.0:
            raise ValueError(f"uniform rate must be in [0, 1), got {uniform_rate}")
        return uniform_rate
    return FINANCIAL_WEIGHT * financial + HAZARD_WEIGHT * hazard
