"""
CEV model parameters and the transformed variables shared by every pricing formula
"""
import math
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .errors import DomainError

# below this |u| the ratio u / (e^u - 1) uses its Taylor series
_RATIO_SERIES_BELOW = 1e-8


class CevParams(BaseModel):
    """Market and contract inputs for one European option."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    spot: float = Field(gt=0)
    strike: float = Field(gt=0)
    rate: float
    delta_vol: float = Field(gt=0)
    beta: float
    tau: float = Field(ge=0)

    @field_validator("beta")
    @classmethod
    def _beta_inside_cev_range(cls, value: float) -> float:
        if not 0.0 < value < 2.0:
            raise ValueError(
                f"must lie strictly inside (0, 2), got {value!r}; "
                "beta=2 is the Black-Scholes model and beta=0 the absolute diffusion model"
            )
        return value

    def replace(self, **changes: Any) -> "CevParams":
        """Validated copy with some fields changed."""
        return type(self).model_validate({**self.model_dump(), **changes})


class TransformedVars(BaseModel):
    model_config = ConfigDict(frozen=True)

    v: float
    m: float
    k: float
    x: float
    y: float


def expm1_ratio(u: float) -> float:
    """u / (e^u - 1), equal to 1 at u = 0."""
    if abs(u) < _RATIO_SERIES_BELOW:
        return 1.0 - 0.5 * u + u * u / 12.0
    if u > 700.0:
        return u * math.exp(-u)
    return u / math.expm1(u)


def elasticity_gap(p: CevParams) -> float:
    """2 - beta, the exponent every transform is built on."""
    return 2.0 - p.beta


def transform(p: CevParams) -> TransformedVars:
    """
    Map parameters to (v, m, k, x, y).

    k = 2r / (delta^2 (2-beta) (m-1)) is rewritten as 2/(delta^2 (2-beta)^2 tau) times
    u/(e^u - 1) with u = r (2-beta) tau, which is finite at r = 0. m k uses the same
    ratio at -u so x stays finite when m itself overflows.
    """
    if not p.tau > 0:
        raise DomainError("tau", f"transform needs tau > 0, got {p.tau!r}")
    a = elasticity_gap(p)
    u = p.rate * a * p.tau
    base = 2.0 / (p.delta_vol * p.delta_vol * a * a * p.tau)
    k = base * expm1_ratio(u)
    mk = base * expm1_ratio(-u)
    m = math.exp(u) if u < 709.0 else math.inf
    return TransformedVars(
        v=1.0 / a,
        m=m,
        k=k,
        x=mk * p.spot ** a,
        y=k * p.strike ** a,
    )


def sigma0(p: CevParams) -> float:
    """Local volatility delta * S^{beta/2 - 1} at the valuation spot."""
    return p.delta_vol * p.spot ** (0.5 * p.beta - 1.0)


def delta_vol_for_sigma0(sigma: float, spot: float, beta: float) -> float:
    """Inverse of sigma0: the delta that gives local volatility sigma at spot."""
    return sigma * spot ** (1.0 - 0.5 * beta)
