"""Fuel-switching economics: marginal generation cost, its variance, and the
theoretical switch-price band for a coal/gas plant portfolio.

Units follow the cost identities directly: fuel cost in EUR/GJ, thermal
efficiency in GJ_e/GJ, emission factors in kg CO2/GJ and the emission cost in
EUR/kg CO2, giving marginal cost in EUR/GJ_e. Helpers convert to the EUR/t
and EUR/MWh quotations used in market data.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

from .errors import DegenerateDenominator

__all__ = [
    "PlantParams",
    "SwitchContext",
    "Regime",
    "marginal_cost",
    "marginal_cost_variance",
    "switch_price_upper",
    "switch_price_lower",
    "classify_regime",
    "eur_per_kg_to_eur_per_tonne",
    "eur_per_tonne_to_eur_per_kg",
    "per_gj_to_per_mwh",
]

KG_PER_TONNE = 1000.0
GJ_PER_MWH = 3.6


class Regime(str, Enum):
    DECOUPLED_COAL = "decoupled_coal"
    COUPLED = "coupled"
    DECOUPLED_GAS = "decoupled_gas"


@dataclass(frozen=True)
class PlantParams:
    """Net thermal efficiency and greenhouse-gas emission factor of one plant."""

    fuel: str  # "coal" | "gas"
    efficiency: float  # GJ_e per GJ, in (0, 1)
    emission_factor: float  # kg CO2 per GJ, >= 0

    def __post_init__(self) -> None:
        if self.fuel not in ("coal", "gas"):
            raise ValueError("fuel must be 'coal' or 'gas'")
        if not 0.0 < self.efficiency < 1.0:
            raise ValueError(f"efficiency {self.efficiency} must lie in (0, 1)")
        if self.emission_factor < 0.0:
            raise ValueError("emission factor must be non-negative")


@dataclass(frozen=True)
class SwitchContext:
    """Extreme plants of a portfolio plus fuel costs for switch-price evaluation."""

    coal_efficient: PlantParams
    coal_inefficient: PlantParams
    gas_efficient: PlantParams
    gas_inefficient: PlantParams
    fuel_cost_coal: float  # EUR/GJ
    fuel_cost_gas: float  # EUR/GJ

    def __post_init__(self) -> None:
        for plant, fuel in (
            (self.coal_efficient, "coal"),
            (self.coal_inefficient, "coal"),
            (self.gas_efficient, "gas"),
            (self.gas_inefficient, "gas"),
        ):
            if plant.fuel != fuel:
                raise ValueError(f"plant {plant} must burn {fuel}")
        if self.coal_efficient.efficiency < self.coal_inefficient.efficiency:
            raise ValueError("efficient coal plant must not be less efficient than the inefficient one")
        if self.gas_efficient.efficiency < self.gas_inefficient.efficiency:
            raise ValueError("efficient gas plant must not be less efficient than the inefficient one")
        if self.fuel_cost_coal < 0.0 or self.fuel_cost_gas < 0.0:
            raise ValueError("fuel costs must be non-negative")


def marginal_cost(plant: PlantParams, fuel_cost: float, emission_cost: float) -> float:
    """EUR/GJ_e of one unit of power: fuel plus carbon, scaled by efficiency."""
    n = plant.efficiency
    return fuel_cost / n + (plant.emission_factor / n) * emission_cost


def marginal_cost_variance(
    plant: PlantParams,
    sigma_fuel: float,
    sigma_emission: float,
    rho: float,
) -> float:
    """Variance of the marginal cost under correlated fuel and carbon prices."""
    if sigma_fuel < 0.0 or sigma_emission < 0.0:
        raise ValueError("standard deviations must be non-negative")
    if not -1.0 <= rho <= 1.0:
        raise ValueError("correlation must lie in [-1, 1]")
    n = plant.efficiency
    ef = plant.emission_factor
    return (
        sigma_fuel**2 / n**2
        + ef**2 * sigma_emission**2 / n**2
        + 2.0 * (1.0 / n) * (ef / n) * rho * sigma_fuel * sigma_emission
    )


def switch_price_upper(ctx: SwitchContext) -> float:
    """Carbon price above which gas is preferred regardless of the plant mix.

    Indifference point between the most efficient coal plant and the most
    inefficient gas plant; in EUR/kg CO2 for EUR/GJ fuel costs.
    """
    return _switch_price(ctx.coal_efficient, ctx.gas_inefficient, ctx)


def switch_price_lower(ctx: SwitchContext) -> float:
    """Carbon price below which coal is preferred regardless of the plant mix."""
    return _switch_price(ctx.coal_inefficient, ctx.gas_efficient, ctx)


def _switch_price(coal: PlantParams, gas: PlantParams, ctx: SwitchContext) -> float:
    numerator = coal.efficiency * ctx.fuel_cost_gas - gas.efficiency * ctx.fuel_cost_coal
    denominator = gas.efficiency * coal.emission_factor - coal.efficiency * gas.emission_factor
    if denominator == 0.0 or not math.isfinite(numerator / denominator):
        raise DegenerateDenominator(
            "emission-factor-to-efficiency ratios are equal; switch price undefined"
        )
    return numerator / denominator


def classify_regime(eua_price: float, ctx: SwitchContext) -> Regime:
    """Merit-order regime of a carbon price relative to the switch-price band.

    The band is closed: prices exactly on a bound count as coupled. When the
    bounds are inverted (inconsistent portfolio) a warning is emitted and the
    lower bound takes precedence.
    """
    sp_l = switch_price_lower(ctx)
    sp_u = switch_price_upper(ctx)
    if sp_l > sp_u:
        warnings.warn(
            f"switch-price ordering inverted (lower {sp_l:.6g} > upper {sp_u:.6g})",
            UserWarning,
            stacklevel=2,
        )
    if eua_price < sp_l:
        return Regime.DECOUPLED_COAL
    if eua_price <= sp_u:
        return Regime.COUPLED
    return Regime.DECOUPLED_GAS


def eur_per_kg_to_eur_per_tonne(price: float) -> float:
    return price * KG_PER_TONNE


def eur_per_tonne_to_eur_per_kg(price: float) -> float:
    return price / KG_PER_TONNE


def per_gj_to_per_mwh(price: float) -> float:
    """Convert an energy price quoted per GJ to per MWh (1 MWh = 3.6 GJ)."""
    return price * GJ_PER_MWH
