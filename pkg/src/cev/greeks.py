"""
Closed-form CEV Greeks, the Taylor P&L approximation and the pricing-PDE residual
"""
from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict

from .errors import DomainError
from .model import CevParams, TransformedVars, elasticity_gap, expm1_ratio, sigma0, transform
from .pricing import OptionKind, call_from_q, discount, put_from_q, q_pair, strike_complement
from .specfun import SeriesControl, chi2_pdf, chi2_sf

# below this |r (2-beta) tau| the rho factor uses its series
_RHO_SERIES_BELOW = 1e-3


class GreeksReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    price: float
    delta: float
    gamma: float
    theta: float
    vega: float
    rho: float


class ThetaConvention(str, Enum):
    CALENDAR = "t"
    TIME_TO_EXPIRY = "tau"


def _prepare(p: CevParams, ctl: Optional[SeriesControl]) -> Tuple[TransformedVars, SeriesControl]:
    if not p.tau > 0:
        raise DomainError("tau", f"Greeks need tau > 0, got {p.tau!r}")
    return transform(p), ctl or SeriesControl.from_env()


def _spot_density(tv: TransformedVars, df_offset: float) -> float:
    """p(2y; df_offset + 2v, 2x)"""
    return chi2_pdf(2.0 * tv.y, df_offset + 2.0 * tv.v, 2.0 * tv.x)


def _strike_density(tv: TransformedVars, df_offset: float) -> float:
    """p(2x; df_offset + 2v, 2y)"""
    return chi2_pdf(2.0 * tv.x, df_offset + 2.0 * tv.v, 2.0 * tv.y)


def _spread(p: CevParams, tv: TransformedVars) -> float:
    # S p(2y; 4+2v, 2x) - K e^{-r tau} p(2x; 2v, 2y), shared by delta, theta, vega, rho
    return p.spot * _spot_density(tv, 4.0) - p.strike * discount(p) * _strike_density(tv, 0.0)


def _q_strike(tv: TransformedVars, ctl: SeriesControl) -> float:
    return chi2_sf(2.0 * tv.x, 2.0 * tv.v, 2.0 * tv.y, ctl)


def _q_spot(tv: TransformedVars, ctl: SeriesControl) -> float:
    return chi2_sf(2.0 * tv.y, 2.0 + 2.0 * tv.v, 2.0 * tv.x, ctl)


def _q_strike_complement(tv: TransformedVars, ctl: SeriesControl) -> float:
    """Q(2y; 2-2v, 2x)"""
    return strike_complement(tv, _q_strike(tv, ctl), ctl)


def _time_factor(p: CevParams, tv: TransformedVars) -> float:
    """2 (2-beta) r x / (m-1)"""
    u = p.rate * elasticity_gap(p) * p.tau
    return 2.0 * tv.x / p.tau * expm1_ratio(u)


def _rate_factor(p: CevParams) -> float:
    """1/r - (2-beta) tau / (m-1), finite as r -> 0"""
    a_tau = elasticity_gap(p) * p.tau
    u = p.rate * a_tau
    if abs(u) < _RHO_SERIES_BELOW:
        return a_tau * (0.5 - u / 12.0 + u ** 3 / 720.0 - u ** 5 / 30240.0)
    return (1.0 - expm1_ratio(u)) / p.rate


def _delta_call(p: CevParams, tv: TransformedVars, q_spot: float, spread: float) -> float:
    return q_spot + 2.0 * elasticity_gap(p) * tv.x / p.spot * spread


def _delta(p: CevParams, kind: OptionKind, tv: TransformedVars, q_spot: float, spread: float) -> float:
    call_delta = _delta_call(p, tv, q_spot, spread)
    if kind == OptionKind.CALL:
        return call_delta
    return call_delta - 1.0


def _gamma(p: CevParams, tv: TransformedVars) -> float:
    a = elasticity_gap(p)
    s = p.spot
    pv_strike = p.strike * discount(p)
    x = tv.x
    return (
        2.0 * a * a * x / s * ((1.0 + a) / a - x) * _spot_density(tv, 4.0)
        + 2.0 * a * a * x * x / s * _spot_density(tv, 6.0)
        + 2.0 * a * a * x * x / (s * s) * pv_strike * _strike_density(tv, 0.0)
        - 2.0 * a * a * x * tv.y / (s * s) * pv_strike * _strike_density(tv, 2.0)
    )


def _theta_call(p: CevParams, tv: TransformedVars, q_complement: float, spread: float) -> float:
    return -p.rate * p.strike * discount(p) * q_complement + _time_factor(p, tv) * spread


def _theta_put(p: CevParams, tv: TransformedVars, q_strike: float, spread: float) -> float:
    return p.rate * p.strike * discount(p) * q_strike + _time_factor(p, tv) * spread


def _vega(p: CevParams, tv: TransformedVars, spread: float) -> float:
    return -4.0 * tv.x / sigma0(p) * spread


def _rho(p: CevParams, kind: OptionKind, tv: TransformedVars, strike_mass: float, spread: float) -> float:
    """strike_mass is Q(2y; 2-2v, 2x) for a call and Q(2x; 2v, 2y) for a put."""
    carry = 2.0 * tv.x * _rate_factor(p) * spread
    pv_strike_tau = p.strike * p.tau * discount(p)
    if kind == OptionKind.CALL:
        return pv_strike_tau * strike_mass + carry
    return -pv_strike_tau * strike_mass + carry


def delta(p: CevParams, kind: OptionKind, ctl: Optional[SeriesControl] = None) -> float:
    """dPrice/dS. The put delta is the call delta minus one."""
    tv, ctl = _prepare(p, ctl)
    return _delta(p, kind, tv, _q_spot(tv, ctl), _spread(p, tv))


def gamma(p: CevParams, ctl: Optional[SeriesControl] = None) -> float:
    """Second spot derivative, shared by calls and puts."""
    tv, _ = _prepare(p, ctl)
    return _gamma(p, tv)


def theta(p: CevParams, kind: OptionKind, ctl: Optional[SeriesControl] = None) -> float:
    """Calendar-time derivative dPrice/dt (= -dPrice/dtau)."""
    tv, ctl = _prepare(p, ctl)
    spread = _spread(p, tv)
    if kind == OptionKind.CALL:
        return _theta_call(p, tv, _q_strike_complement(tv, ctl), spread)
    return _theta_put(p, tv, _q_strike(tv, ctl), spread)


def vega(p: CevParams, ctl: Optional[SeriesControl] = None) -> float:
    """Derivative with respect to sigma0 at fixed beta, shared by calls and puts."""
    tv, _ = _prepare(p, ctl)
    return _vega(p, tv, _spread(p, tv))


def rho(p: CevParams, kind: OptionKind, ctl: Optional[SeriesControl] = None) -> float:
    tv, ctl = _prepare(p, ctl)
    strike_mass = _q_strike_complement(tv, ctl) if kind == OptionKind.CALL else _q_strike(tv, ctl)
    return _rho(p, kind, tv, strike_mass, _spread(p, tv))


def full_report(p: CevParams, kind: OptionKind, ctl: Optional[SeriesControl] = None) -> GreeksReport:
    """Price and all five Greeks from a single set of transformed variables."""
    tv, ctl = _prepare(p, ctl)
    q_spot, q_strike = q_pair(tv, ctl)
    spread = _spread(p, tv)
    if kind == OptionKind.CALL:
        strike_mass = strike_complement(tv, q_strike, ctl)
        value = call_from_q(p, q_spot, q_strike, strike_mass)
        time_decay = _theta_call(p, tv, strike_mass, spread)
    else:
        strike_mass = q_strike
        value = put_from_q(p, q_spot, q_strike)
        time_decay = _theta_put(p, tv, q_strike, spread)
    return GreeksReport(
        price=value,
        delta=_delta(p, kind, tv, q_spot, spread),
        gamma=_gamma(p, tv),
        theta=time_decay,
        vega=_vega(p, tv, spread),
        rho=_rho(p, kind, tv, strike_mass, spread),
    )


def with_theta_convention(report: GreeksReport, convention: ThetaConvention) -> GreeksReport:
    if convention == ThetaConvention.TIME_TO_EXPIRY:
        return report.model_copy(update={"theta": -report.theta})
    return report


def taylor_pnl(report: GreeksReport, dS: float) -> float:
    """Second-order P&L estimate for a spot move dS."""
    return report.delta * dS + 0.5 * report.gamma * dS * dS


def pde_residual(p: CevParams, kind: OptionKind, ctl: Optional[SeriesControl] = None) -> float:
    """r V - theta - delta^2 S^beta gamma / 2 - r S delta; zero for a consistent report."""
    report = full_report(p, kind, ctl)
    diffusion = 0.5 * p.delta_vol * p.delta_vol * p.spot ** p.beta * report.gamma
    return p.rate * report.price - report.theta - diffusion - p.rate * p.spot * report.delta
