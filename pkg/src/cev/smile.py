"""
Per-strike grid of prices, Greeks and density for one set of market inputs
"""
from typing import List, Optional, Sequence

from pydantic import BaseModel, ConfigDict

from .density import rn_density
from .greeks import full_report
from .model import CevParams
from .pricing import OptionKind
from .specfun import SeriesControl


class SmileRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    strike: float
    call: float
    put: float
    delta_call: float
    delta_put: float
    gamma: float
    theta_call: float
    theta_put: float
    vega: float
    rho_call: float
    rho_put: float
    density: float


def smile(p: CevParams, strikes: Sequence[float], ctl: Optional[SeriesControl] = None) -> List[SmileRow]:
    """One row per strike, in the order given; the strike of p is ignored."""
    rows = []
    for strike in strikes:
        contract = p.replace(strike=strike)
        call = full_report(contract, OptionKind.CALL, ctl)
        put = full_report(contract, OptionKind.PUT, ctl)
        rows.append(SmileRow(
            strike=contract.strike,
            call=call.price,
            put=put.price,
            delta_call=call.delta,
            delta_put=put.delta,
            gamma=call.gamma,
            theta_call=call.theta,
            theta_put=put.theta,
            vega=call.vega,
            rho_call=call.rho,
            rho_put=put.rho,
            density=rn_density(p, contract.strike),
        ))
    return rows
