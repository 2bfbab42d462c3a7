"""
Closed-form European call and put prices under CEV
"""
import math
from enum import Enum
from typing import Optional, Tuple

from .model import CevParams, TransformedVars, transform
from .specfun import SeriesControl, chi2_sf, chi2_sf_complement_df

# Q values this close to 0 or 1 trigger the no-arbitrage clamp
_EDGE = 1e-15


class OptionKind(str, Enum):
    CALL = "call"
    PUT = "put"


def discount(p: CevParams) -> float:
    return math.exp(-p.rate * p.tau)


def q_pair(tv: TransformedVars, ctl: Optional[SeriesControl] = None) -> Tuple[float, float]:
    """Q(2y; 2+2v, 2x) and Q(2x; 2v, 2y)."""
    ctl = ctl or SeriesControl.from_env()
    q_spot = chi2_sf(2.0 * tv.y, 2.0 + 2.0 * tv.v, 2.0 * tv.x, ctl)
    q_strike = chi2_sf(2.0 * tv.x, 2.0 * tv.v, 2.0 * tv.y, ctl)
    return q_spot, q_strike


def strike_complement(tv: TransformedVars, q_strike: float, ctl: Optional[SeriesControl] = None) -> float:
    """
    1 - Q(2x; 2v, 2y). Past one half it is summed directly as Q(2y; 2-2v, 2x) so that
    far out-of-the-money calls keep relative accuracy.
    """
    if q_strike <= 0.5:
        return 1.0 - q_strike
    return chi2_sf_complement_df(2.0 * tv.y, 2.0 - 2.0 * tv.v, 2.0 * tv.x, ctl or SeriesControl.from_env())


def _near_edge(q: float) -> bool:
    return q < _EDGE or q > 1.0 - _EDGE


def call_from_q(p: CevParams, q_spot: float, q_strike: float, q_complement: Optional[float] = None) -> float:
    """q_complement, when given, stands in for 1 - q_strike."""
    pv_strike = p.strike * discount(p)
    exercised = 1.0 - q_strike if q_complement is None else q_complement
    value = p.spot * q_spot - pv_strike * exercised
    if _near_edge(q_spot) or _near_edge(q_strike):
        value = min(p.spot, max(value, p.spot - pv_strike))
    return max(value, 0.0)


def put_from_q(p: CevParams, q_spot: float, q_strike: float) -> float:
    pv_strike = p.strike * discount(p)
    value = pv_strike * q_strike - p.spot * (1.0 - q_spot)
    if _near_edge(q_spot) or _near_edge(q_strike):
        value = min(pv_strike, max(value, pv_strike - p.spot))
    return max(value, 0.0)


def call_price(p: CevParams, ctl: Optional[SeriesControl] = None) -> float:
    if p.tau == 0.0:
        return max(p.spot - p.strike, 0.0)
    tv = transform(p)
    q_spot, q_strike = q_pair(tv, ctl)
    return call_from_q(p, q_spot, q_strike, strike_complement(tv, q_strike, ctl))


def put_price(p: CevParams, ctl: Optional[SeriesControl] = None) -> float:
    if p.tau == 0.0:
        return max(p.strike - p.spot, 0.0)
    q_spot, q_strike = q_pair(transform(p), ctl)
    return put_from_q(p, q_spot, q_strike)


def price(p: CevParams, kind: OptionKind, ctl: Optional[SeriesControl] = None) -> float:
    if kind == OptionKind.CALL:
        return call_price(p, ctl)
    return put_price(p, ctl)
