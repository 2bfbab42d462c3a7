"""
Special-function kernel for the CEV formulas.

Gamma family, exponentially scaled modified Bessel functions of the first kind, and
the non-central chi-squared survival function Q(w; df, lambda) and density
p(w; df, lambda). Everything here is a pure function of its arguments.
"""
import math
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import special

from . import settings
from .errors import DomainError, NonConvergence

_TINY = float(np.finfo(float).tiny)
_LOG_2 = math.log(2.0)
_LOG_2PI = math.log(2.0 * math.pi)
# Above this Poisson mean the log weights use the saddle-point form
_SADDLE_MEAN = 1_000.0


class NcChi2Query(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    w: float = Field(ge=0)
    df: float
    noncentrality: float = Field(ge=0)


class SeriesControl(BaseModel):
    """Termination controls for the Poisson-weighted gamma series."""

    model_config = ConfigDict(frozen=True)

    rel_tol: float = Field(default=settings.DEFAULT_SERIES_TOL, gt=0)
    max_terms: int = Field(default=settings.DEFAULT_MAX_TERMS, ge=1)
    # terms with a smaller log-magnitude count as exactly zero
    log_space_threshold: float = -745.0

    @classmethod
    def from_env(cls) -> "SeriesControl":
        return cls(rel_tol=settings.series_tolerance(), max_terms=settings.series_max_terms())


def ln_gamma(a: float) -> float:
    if not a > 0:
        raise DomainError("a", f"ln_gamma needs a > 0, got {a!r}")
    return float(special.gammaln(a))


def reg_gamma_upper(a: float, y: float) -> float:
    """Regularized upper incomplete gamma G(a, y) = Gamma(a, y) / Gamma(a)."""
    if not a > 0:
        raise DomainError("a", f"reg_gamma_upper needs a > 0, got {a!r}")
    if not y >= 0:
        raise DomainError("y", f"reg_gamma_upper needs y >= 0, got {y!r}")
    return float(special.gammaincc(a, y))


def _log_bessel_i_scaled_uniform(order: float, z: float) -> float:
    """log(e^{-z} I_order(z)) from the uniform large-order expansion, order > 0."""
    t = z / order
    root = math.hypot(order, z)
    p = order / root
    pp = p * p
    u1 = p * (3.0 - 5.0 * pp) / 24.0
    u2 = pp * (81.0 - 462.0 * pp + 385.0 * pp * pp) / 1152.0
    u3 = p * pp * (30375.0 - 369603.0 * pp + 765765.0 * pp * pp - 425425.0 * pp * pp * pp) / 414720.0
    correction = math.log1p(u1 / order + u2 / order**2 + u3 / order**3)
    # order * eta - z with eta = sqrt(1 + t^2) + log(t / (1 + sqrt(1 + t^2)))
    excess = order * order / (root + z) - order * math.log1p((order + order * order / (root + z)) / z)
    return excess - 0.5 * math.log(2.0 * math.pi * order) - 0.25 * math.log1p(t * t) + correction


def _log_bessel_i_scaled(order: float, z: float) -> float:
    scaled = float(special.ive(order, z))
    if scaled > 0.0 and math.isfinite(scaled):
        return math.log(scaled)
    if order > 0.0 and z * z >= 1e-3 * (order + 1.0):
        return _log_bessel_i_scaled_uniform(order, z)
    # leading small-argument term
    return order * math.log(0.5 * z) - float(special.gammaln(order + 1.0)) - z


def bessel_i_scaled(order: float, z: float) -> float:
    """e^{-z} I_order(z), finite for every z >= 0."""
    if not z >= 0:
        raise DomainError("z", f"bessel_i_scaled needs z >= 0, got {z!r}")
    if not order > -1:
        raise DomainError("order", f"bessel_i_scaled needs order > -1, got {order!r}")
    if z == 0.0:
        return float(special.ive(order, z))
    return math.exp(_log_bessel_i_scaled(order, z))


def _stirlerr(n: np.ndarray) -> np.ndarray:
    """log(n!) - ((n + 1/2) log n - n + log(2 pi)/2) for n >= 1."""
    big = np.maximum(n, 16.0)
    nn = big * big
    series = (1.0 / 12 - (1.0 / 360 - (1.0 / 1260 - (1.0 / 1680 - 1.0 / (1188 * nn)) / nn) / nn) / nn) / big
    exact = special.gammaln(n + 1.0) - (n + 0.5) * np.log(n) + n - 0.5 * _LOG_2PI
    return np.where(n >= 16.0, series, exact)


def _log_poisson(j: np.ndarray, mean: float) -> np.ndarray:
    if mean < _SADDLE_MEAN:
        return special.xlogy(j, mean) - mean - special.gammaln(j + 1.0)
    jj = np.maximum(j, 1.0)
    d = (jj - mean) / mean
    deviance = mean * ((1.0 + d) * np.log1p(d) - d)
    out = -_stirlerr(jj) - deviance - 0.5 * (_LOG_2PI + np.log(jj))
    return np.where(j == 0.0, -mean, out)


def _block_size(mean: float) -> int:
    return int(min(8192, max(64, 8.0 * math.sqrt(mean + 1.0))))


def _series_terms(
    j: np.ndarray, mean: float, order: float, half_w: float, ctl: SeriesControl, lower: bool = False
) -> Tuple[np.ndarray, np.ndarray]:
    log_weights = _log_poisson(j, mean)
    gammas = special.gammainc(order + j, half_w) if lower else special.gammaincc(order + j, half_w)
    with np.errstate(divide="ignore"):
        magnitude = log_weights + np.log(gammas)
    terms = np.exp(log_weights) * gammas
    terms = np.where(magnitude < ctl.log_space_threshold, 0.0, terms)
    return terms, gammas


def _poisson_mixture(
    name: str, half_w: float, order: float, mean: float, ctl: SeriesControl, lower: bool
) -> float:
    """
    Sum Pois(j; mean) g(order + j, half_w) outward from the Poisson mode, where g is
    the regularized upper gamma G (lower=False) or lower gamma P (lower=True).

    G rises and P falls with the order, and both are <= 1. The side where g falls
    is bounded by g at the current index times the Poisson mass beyond it; the other
    side by the Poisson mass alone. Each direction stops once its bound drops below
    rel_tol times the running sum.
    """
    mode = int(math.floor(mean))
    block = _block_size(mean)
    total = 0.0
    used = 0

    start = mode
    while True:
        if used >= ctl.max_terms:
            raise NonConvergence(name, used, total)
        size = min(block, ctl.max_terms - used)
        j = np.arange(start, start + size, dtype=float)
        terms, gammas = _series_terms(j, mean, order, half_w, ctl, lower)
        partial = total + np.cumsum(terms)
        tail = special.pdtrc(j, mean)
        if lower:
            tail = gammas * tail
        done = np.flatnonzero(tail <= np.maximum(ctl.rel_tol * partial, _TINY))
        if done.size:
            total = float(partial[done[0]])
            used += int(done[0]) + 1
            break
        total = float(partial[-1])
        used += size
        start += size

    top = mode
    while top > 0:
        if used >= ctl.max_terms:
            raise NonConvergence(name, used, total)
        size = min(block, top, ctl.max_terms - used)
        j = np.arange(top - 1, top - 1 - size, -1, dtype=float)
        terms, gammas = _series_terms(j, mean, order, half_w, ctl, lower)
        partial = total + np.cumsum(terms)
        below = special.pdtr(np.maximum(j - 1.0, 0.0), mean)
        head = np.where(j >= 1.0, below if lower else gammas * below, 0.0)
        done = np.flatnonzero(head <= np.maximum(ctl.rel_tol * partial, _TINY))
        if done.size:
            total = float(partial[done[0]])
            used += int(done[0]) + 1
            break
        total = float(partial[-1])
        used += size
        top -= size

    return min(1.0, max(0.0, total))


def _check_series_args(w: float, df: float, noncentrality: float) -> None:
    if not df > 0:
        raise DomainError("df", f"series evaluation needs df > 0, got {df!r}")
    if not w >= 0:
        raise DomainError("w", f"must be >= 0, got {w!r}")
    if not noncentrality >= 0:
        raise DomainError("noncentrality", f"must be >= 0, got {noncentrality!r}")


def chi2_sf(w: float, df: float, noncentrality: float, ctl: Optional[SeriesControl] = None) -> float:
    """
    Survival function Q(w; df, lambda) of the non-central chi-squared law.

    Sums sum_j Pois(j; lambda/2) G(df/2 + j, w/2) outward from the Poisson mode. The
    forward direction stops once the Poisson survival beyond the last index (which
    bounds the rest of the series since G <= 1) drops below rel_tol times the running
    sum; the backward direction stops once G at the current index times the Poisson
    mass below it does.

    Args:
        w: argument, >= 0
        df: degrees of freedom, > 0
        noncentrality: lambda, >= 0
        ctl: series controls, defaults from the environment
    """
    _check_series_args(w, df, noncentrality)
    ctl = ctl or SeriesControl.from_env()
    if w == 0.0:
        return 1.0
    if noncentrality == 0.0:
        return float(special.gammaincc(0.5 * df, 0.5 * w))
    return _poisson_mixture("chi2_sf", 0.5 * w, 0.5 * df, 0.5 * noncentrality, ctl, lower=False)


def chi2_cdf(w: float, df: float, noncentrality: float, ctl: Optional[SeriesControl] = None) -> float:
    """
    Distribution function 1 - Q(w; df, lambda), summed directly as
    sum_j Pois(j; lambda/2) P(df/2 + j, w/2) so that far lower tails keep their
    relative accuracy.
    """
    _check_series_args(w, df, noncentrality)
    ctl = ctl or SeriesControl.from_env()
    if w == 0.0:
        return 0.0
    if noncentrality == 0.0:
        return float(special.gammainc(0.5 * df, 0.5 * w))
    return _poisson_mixture("chi2_cdf", 0.5 * w, 0.5 * df, 0.5 * noncentrality, ctl, lower=True)


def chi2_sf_complement_df(
    w: float, df: float, noncentrality: float, ctl: Optional[SeriesControl] = None
) -> float:
    """Q(w; df, lambda) for df < 2 as 1 - Q(lambda; 2 - df, w), summed as a lower tail."""
    return chi2_cdf(noncentrality, 2.0 - df, w, ctl)


def _log_chi2_pdf(w: float, df: float, noncentrality: float) -> float:
    half_df = 0.5 * df
    if noncentrality == 0.0:
        return (half_df - 1.0) * math.log(w) - 0.5 * w - half_df * _LOG_2 - float(special.gammaln(half_df))
    nu = half_df - 1.0
    log_bessel = _log_bessel_i_scaled(nu, math.sqrt(noncentrality * w))
    gap = math.sqrt(noncentrality) - math.sqrt(w)
    return -_LOG_2 - 0.5 * gap * gap + 0.5 * nu * (math.log(w) - math.log(noncentrality)) + log_bessel


def chi2_pdf(w: float, df: float, noncentrality: float) -> float:
    """Density p(w; df, lambda); lambda = 0 gives the central density."""
    if not w > 0:
        raise DomainError("w", f"density needs w > 0, got {w!r}")
    if not df > 0:
        raise DomainError("df", f"density needs df > 0, got {df!r}")
    if not noncentrality >= 0:
        raise DomainError("noncentrality", f"must be >= 0, got {noncentrality!r}")
    return math.exp(_log_chi2_pdf(w, df, noncentrality))


def nc_chi2_sf(q: NcChi2Query, ctl: Optional[SeriesControl] = None) -> float:
    return chi2_sf(q.w, q.df, q.noncentrality, ctl)


def nc_chi2_sf_complement_df(
    w: float, df: float, noncentrality: float, ctl: Optional[SeriesControl] = None
) -> float:
    if not w >= 0:
        raise DomainError("w", f"must be >= 0, got {w!r}")
    if not noncentrality >= 0:
        raise DomainError("noncentrality", f"must be >= 0, got {noncentrality!r}")
    return chi2_sf_complement_df(w, df, noncentrality, ctl)


def nc_chi2_pdf(q: NcChi2Query) -> float:
    return chi2_pdf(q.w, q.df, q.noncentrality)
