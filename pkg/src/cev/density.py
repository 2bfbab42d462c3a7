"""
Risk-neutral density of the terminal price, recovered from the second strike
derivative of the CEV call price.

The density covers the continuous part of the terminal law only. Paths absorbed at
zero form a point mass G(v, x) that no strike derivative for K > 0 can see; it is
reported next to the density, never folded into it.
"""
import math
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import integrate, special

from . import serialization
from .errors import DomainError
from .model import CevParams, TransformedVars, elasticity_gap, transform
from .pricing import discount
from .specfun import SeriesControl, chi2_pdf, chi2_sf

# negative densities down to this size are rounding noise
_NEGATIVE_FLOOR = -1e-12


class DensityPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    s_T: float
    phi: float


class DensityGrid(BaseModel):
    model_config = ConfigDict(frozen=True)

    points: List[DensityPoint]
    mass: float
    absorbed_mass: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "points": [{"s_T": point.s_T, "phi": point.phi} for point in self.points],
            "mass": self.mass,
            "absorbed_mass": self.absorbed_mass,
        }

    def to_json(self) -> str:
        return serialization.to_json(self.to_dict())

    def to_csv(self) -> str:
        return serialization.to_csv(["s_T", "phi"], ([point.s_T, point.phi] for point in self.points))


def _require_tau(p: CevParams) -> None:
    if not p.tau > 0:
        raise DomainError("tau", f"strike derivatives need tau > 0, got {p.tau!r}")


def _dc_dk(p: CevParams, ctl: Optional[SeriesControl] = None) -> float:
    """
    First strike derivative in its unsimplified three-term form:
    -(2S/K) y (2-beta) p(2y; 2+2v, 2x) - e^{-r tau} (1 - Q(2x; 2v, 2y)) + 2 (2-beta) y e^{-r tau} p(2x; 2+2v, 2y)
    """
    _require_tau(p)
    tv = transform(p)
    a = elasticity_gap(p)
    disc = discount(p)
    q_strike = chi2_sf(2.0 * tv.x, 2.0 * tv.v, 2.0 * tv.y, ctl or SeriesControl.from_env())
    return (
        -2.0 * p.spot / p.strike * tv.y * a * chi2_pdf(2.0 * tv.y, 2.0 + 2.0 * tv.v, 2.0 * tv.x)
        - disc * (1.0 - q_strike)
        + 2.0 * a * tv.y * disc * chi2_pdf(2.0 * tv.x, 2.0 + 2.0 * tv.v, 2.0 * tv.y)
    )


def _second_derivative(p: CevParams, tv: TransformedVars) -> float:
    a = elasticity_gap(p)
    s, k = p.spot, p.strike
    x, y, v = tv.x, tv.y, tv.v
    disc = discount(p)
    return (
        2.0 * s * a * a / (k * k) * y * (y - 1.0 + v) * chi2_pdf(2.0 * y, 2.0 + 2.0 * v, 2.0 * x)
        - 2.0 * s * a * a * y * y / (k * k) * chi2_pdf(2.0 * y, 2.0 * v, 2.0 * x)
        + 2.0 * a * y * disc / k * (1.0 + a * (1.0 - y)) * chi2_pdf(2.0 * x, 2.0 + 2.0 * v, 2.0 * y)
        + 2.0 * a * a * y * y * disc / k * chi2_pdf(2.0 * x, 4.0 + 2.0 * v, 2.0 * y)
    )


def d2c_dk2(p: CevParams) -> float:
    """Second strike derivative of the call price (four-term closed form)."""
    _require_tau(p)
    return _second_derivative(p, transform(p))


def rn_density(p: CevParams, s_T: float) -> float:
    """Risk-neutral density of the terminal price at s_T."""
    if not s_T > 0:
        raise DomainError("s_T", f"must be > 0, got {s_T!r}")
    _require_tau(p)
    value = math.exp(p.rate * p.tau) * d2c_dk2(p.replace(strike=s_T))
    if _NEGATIVE_FLOOR <= value < 0.0:
        return 0.0
    return value


def absorption_probability(p: CevParams) -> float:
    """Probability that the price has been absorbed at zero by expiry, G(v, x)."""
    if p.tau == 0.0:
        return 0.0
    tv = transform(p)
    return float(special.gammaincc(tv.v, tv.x))


def density_grid(p: CevParams, lo: float, hi: float, n: int) -> DensityGrid:
    """
    Density on n log-spaced points over [lo, hi].

    The mass is the trapezoid rule in log(s_T) applied to phi(s_T) s_T, which
    converges geometrically for a density that decays at both ends of the grid.
    """
    if not lo > 0:
        raise DomainError("lo", f"must be > 0, got {lo!r}")
    if not hi > lo:
        raise DomainError("hi", f"must exceed lo={lo!r}, got {hi!r}")
    if n < 2:
        raise DomainError("n", f"need at least 2 points, got {n!r}")
    _require_tau(p)

    s_values = np.geomspace(lo, hi, n)
    phi = np.array([rn_density(p, float(s)) for s in s_values])
    mass = float(integrate.trapezoid(phi * s_values, np.log(s_values)))
    points = [DensityPoint(s_T=float(s), phi=float(f)) for s, f in zip(s_values, phi)]
    return DensityGrid(points=points, mass=mass, absorbed_mass=max(0.0, 1.0 - mass))


def density_call_price(
    p: CevParams, strike: float, lo: Optional[float] = None, hi: Optional[float] = None
) -> float:
    """
    Reprice a call at `strike` by integrating the discounted payoff against the
    density of p; the strike of p itself is ignored.
    """
    if not strike > 0:
        raise DomainError("strike", f"must be > 0, got {strike!r}")
    _require_tau(p)
    upper = hi if hi is not None else 20.0 * max(p.spot, strike)
    lower = max(strike, lo) if lo is not None else strike
    breaks = [point for point in (p.spot, p.spot * math.exp(p.rate * p.tau)) if lower < point < upper]

    def payoff_density(s_T: float) -> float:
        return (s_T - strike) * rn_density(p, s_T)

    value, _ = integrate.quad(
        payoff_density, lower, upper, points=breaks or None, limit=500, epsabs=1e-10, epsrel=1e-10
    )
    return discount(p) * value


def density_first_moment(p: CevParams, lo: Optional[float] = None, hi: Optional[float] = None) -> float:
    """Discounted mean of the continuous part, e^{-r tau} integral of s_T phi(s_T)."""
    _require_tau(p)
    lower = lo if lo is not None else 1e-3 * p.spot
    upper = hi if hi is not None else 20.0 * p.spot
    breaks = [point for point in (p.spot,) if lower < point < upper]
    value, _ = integrate.quad(
        lambda s_T: s_T * rn_density(p, s_T), lower, upper, points=breaks or None, limit=500,
        epsabs=1e-10, epsrel=1e-10,
    )
    return discount(p) * value
