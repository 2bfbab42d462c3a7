"""
Independent references for the closed forms: Monte Carlo simulation of the CEV SDE,
finite differences, extended-precision series and the Black-Scholes formula.
"""
import math
from enum import Enum
from functools import reduce
from typing import Any, Callable, Dict, List, Optional

import mpmath
import numpy as np
from celery import group
from pydantic import BaseModel, ConfigDict, Field
from scipy.stats import norm

from . import settings
from .density import absorption_probability, density_call_price
from .errors import DomainError
from .greeks import GreeksReport, full_report, pde_residual
from .model import CevParams, delta_vol_for_sigma0, sigma0
from .pricing import OptionKind, price
from .specfun import NcChi2Query, SeriesControl

_DEFAULT_DPS = 40


class Scheme(str, Enum):
    EULER_ABSORBING = "euler_absorbing"


class SdeConfig(BaseModel):
    """Simulation settings. Pricing uses drift = rate (risk-neutral measure)."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    drift: float
    n_paths: int = Field(ge=1)
    n_steps: int = Field(ge=1)
    seed: int = Field(ge=0, lt=2 ** 64)
    scheme: Scheme = Scheme.EULER_ABSORBING
    antithetic: bool = True
    chunk_paths: int = Field(default_factory=settings.mc_chunk_paths, ge=2)

    @classmethod
    def risk_neutral(cls, p: CevParams, n_paths: int, n_steps: int, seed: int, **kwargs: Any) -> "SdeConfig":
        return cls(drift=p.rate, n_paths=n_paths, n_steps=n_steps, seed=seed, **kwargs)


class McEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    mean: float
    std_error: float = Field(ge=0)
    absorbed_fraction: float = Field(ge=0, le=1)


class CheckRow(BaseModel):
    """One line of the cross-check summary."""

    model_config = ConfigDict(frozen=True)

    section: str
    kind: str
    quantity: str
    closed_form: float
    reference: float
    error: float


# Simulation

def _chunk_plan(cfg: SdeConfig) -> List[int]:
    size = cfg.chunk_paths + (cfg.chunk_paths % 2)
    full, rest = divmod(cfg.n_paths, size)
    return [size] * full + ([rest] if rest else [])


def _generator(seed: int, chunk: int) -> np.random.Generator:
    # one independent substream per chunk
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def simulate_terminal(p: CevParams, cfg: SdeConfig, chunk: int, size: int) -> np.ndarray:
    """
    Terminal prices of `size` Euler paths of dS = drift S dt + delta S^{beta/2} dW.

    A path that reaches zero is set to zero and stays there: with S = 0 both the
    drift and the diffusion vanish. Antithetic pairs occupy the first 2 * (size // 2)
    slots as [z, -z]; an odd leftover path gets its own draws.
    """
    rng = _generator(cfg.seed, chunk)
    dt = p.tau / cfg.n_steps
    root_dt = math.sqrt(dt)
    half_beta = 0.5 * p.beta
    pairs = size // 2 if cfg.antithetic else 0
    single = size - 2 * pairs

    s = np.full(size, p.spot)
    for _ in range(cfg.n_steps):
        if pairs:
            half = rng.standard_normal(pairs)
            z = np.concatenate([half, -half, rng.standard_normal(single)])
        else:
            z = rng.standard_normal(size)
        s = s + cfg.drift * s * dt + p.delta_vol * np.power(s, half_beta) * root_dt * z
        np.maximum(s, 0.0, out=s)
    return s


def chunk_accumulator(p: CevParams, kind: OptionKind, cfg: SdeConfig, chunk: int, size: int) -> Dict[str, float]:
    """Mean/M2 accumulator of discounted payoffs for one chunk, JSON-safe."""
    terminal = simulate_terminal(p, cfg, chunk, size)
    if kind == OptionKind.CALL:
        payoff = np.maximum(terminal - p.strike, 0.0)
    else:
        payoff = np.maximum(p.strike - terminal, 0.0)
    payoff *= math.exp(-p.rate * p.tau)

    pairs = size // 2 if cfg.antithetic else 0
    if pairs:
        # antithetic partners are one sample
        samples = np.concatenate([0.5 * (payoff[:pairs] + payoff[pairs:2 * pairs]), payoff[2 * pairs:]])
    else:
        samples = payoff
    mean = float(samples.mean())
    return {
        "count": int(samples.size),
        "mean": mean,
        "m2": float(np.sum((samples - mean) ** 2)),
        "paths": int(size),
        "absorbed": int(np.count_nonzero(terminal == 0.0)),
    }


def merge_accumulators(left: Dict[str, float], right: Dict[str, float]) -> Dict[str, float]:
    count = left["count"] + right["count"]
    gap = right["mean"] - left["mean"]
    return {
        "count": count,
        "mean": left["mean"] + gap * right["count"] / count,
        "m2": left["m2"] + right["m2"] + gap * gap * left["count"] * right["count"] / count,
        "paths": left["paths"] + right["paths"],
        "absorbed": left["absorbed"] + right["absorbed"],
    }


def _run_chunks(p: CevParams, kind: OptionKind, cfg: SdeConfig, plan: List[int]) -> List[Dict[str, float]]:
    from .tasks import simulate_chunk_task

    payload = {"params": p.model_dump(), "kind": kind.value, "config": cfg.model_dump(mode="json")}
    if settings.broker_url():
        job = group(simulate_chunk_task.s(payload, index, size) for index, size in enumerate(plan))
        # GroupResult.get keeps submission order
        return job.apply_async().get()
    return [simulate_chunk_task.apply(args=(payload, index, size)).get() for index, size in enumerate(plan)]


def mc_price(p: CevParams, kind: OptionKind, cfg: SdeConfig) -> McEstimate:
    """Monte Carlo price with absorption at zero; bit-reproducible for a fixed seed and chunk size."""
    plan = _chunk_plan(cfg)
    settings.status(f"🚀 Monte Carlo {kind.value}: {cfg.n_paths} paths x {cfg.n_steps} steps in {len(plan)} chunks")
    merged = reduce(merge_accumulators, _run_chunks(p, kind, cfg, plan))
    count = merged["count"]
    std_error = math.sqrt(merged["m2"] / (count - 1) / count) if count > 1 else 0.0
    estimate = McEstimate(
        mean=merged["mean"],
        std_error=std_error,
        absorbed_fraction=merged["absorbed"] / merged["paths"],
    )
    settings.status(f"📊 Monte Carlo {kind.value}: {estimate.mean:.6f} +/- {estimate.std_error:.6f}")
    return estimate


def mc_terminal_prices(p: CevParams, cfg: SdeConfig) -> np.ndarray:
    """Terminal prices of every simulated path, chunks concatenated in order."""
    return np.concatenate([simulate_terminal(p, cfg, index, size) for index, size in enumerate(_chunk_plan(cfg))])


# Finite differences

def fd_derivative(f: Callable[[float], float], x0: float, h: float, order: int) -> float:
    """Central difference of order 1 or 2."""
    if not h > 0:
        raise DomainError("h", f"must be > 0, got {h!r}")
    if order == 1:
        return (f(x0 + h) - f(x0 - h)) / (2.0 * h)
    if order == 2:
        return (f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / (h * h)
    raise DomainError("order", f"must be 1 or 2, got {order!r}")


def fd_greeks(p: CevParams, kind: OptionKind, ctl: Optional[SeriesControl] = None) -> GreeksReport:
    """
    Finite-difference counterparts of the closed-form Greeks.

    Spot steps scale with w = S min(sigma0 sqrt(tau), 0.5), the width of the terminal
    distribution in price units.
    """
    vol = sigma0(p)
    width = p.spot * min(vol * math.sqrt(p.tau), 0.5)

    def value(**changes: float) -> float:
        return price(p.replace(**changes), kind, ctl)

    def at_sigma(sigma: float) -> float:
        return value(delta_vol=delta_vol_for_sigma0(sigma, p.spot, p.beta))

    return GreeksReport(
        price=price(p, kind, ctl),
        delta=fd_derivative(lambda s: value(spot=s), p.spot, 1e-3 * width, 1),
        gamma=fd_derivative(lambda s: value(spot=s), p.spot, 5e-3 * width, 2),
        theta=-fd_derivative(lambda t: value(tau=t), p.tau, 1e-4 * p.tau, 1),
        vega=fd_derivative(at_sigma, vol, 1e-4 * vol, 1),
        rho=fd_derivative(lambda r: value(rate=r), p.rate, 1e-5, 1),
    )


# Extended precision

def nc_chi2_sf_bruteforce(q: NcChi2Query, n_terms: int, dps: int = _DEFAULT_DPS) -> float:
    """
    Front-to-back sum of exactly n_terms Poisson-weighted upper gamma terms.

    G(a + j, y) is advanced by G(a + j + 1, y) = G(a + j, y) + y^{a+j} e^{-y} / Gamma(a + j + 1).
    """
    if not q.df > 0:
        raise DomainError("df", f"series evaluation needs df > 0, got {q.df!r}")
    if n_terms < 1:
        raise DomainError("n_terms", f"must be >= 1, got {n_terms!r}")
    if q.w == 0:
        return 1.0
    with mpmath.workdps(dps):
        y = mpmath.mpf(q.w) / 2
        mean = mpmath.mpf(q.noncentrality) / 2
        a = mpmath.mpf(q.df) / 2
        tail = mpmath.gammainc(a, y, mpmath.inf, regularized=True)
        step = mpmath.exp(a * mpmath.log(y) - y - mpmath.loggamma(a + 1))
        weight = mpmath.exp(-mean)
        total = weight * tail
        for j in range(1, n_terms):
            tail += step
            step *= y / (a + j)
            weight *= mean / j
            total += weight * tail
        return float(total)


def _bessel_series(order: Any, z: Any) -> Any:
    half = z / 2
    term = half ** order / mpmath.gamma(order + 1)
    total = term
    j = 0
    eps = mpmath.mpf(10) ** (-mpmath.mp.dps)
    while True:
        j += 1
        term *= half * half / (j * (j + order))
        total += term
        if j > z and abs(term) <= eps * abs(total):
            return total


def bessel_i_scaled_bruteforce(order: float, z: float, dps: int = _DEFAULT_DPS) -> float:
    """e^{-z} I_order(z) from the power series in extended precision."""
    with mpmath.workdps(dps):
        z_mp = mpmath.mpf(z)
        return float(mpmath.exp(-z_mp) * _bessel_series(mpmath.mpf(order), z_mp))


def nc_chi2_pdf_bruteforce(q: NcChi2Query, dps: int = _DEFAULT_DPS) -> float:
    with mpmath.workdps(dps):
        w = mpmath.mpf(q.w)
        half_df = mpmath.mpf(q.df) / 2
        if q.noncentrality == 0:
            return float(w ** (half_df - 1) * mpmath.exp(-w / 2) / (2 ** half_df * mpmath.gamma(half_df)))
        lam = mpmath.mpf(q.noncentrality)
        order = half_df - 1
        bessel = _bessel_series(order, mpmath.sqrt(lam * w))
        return float(mpmath.exp(-(lam + w) / 2) * (w / lam) ** (order / 2) * bessel / 2)


# Black-Scholes

def bs_reference(
    spot: float, strike: float, rate: float, vol: float, tau: float, kind: OptionKind = OptionKind.CALL
) -> float:
    """Lognormal closed form; zero volatility or maturity collapses to the discounted forward payoff."""
    disc = math.exp(-rate * tau)
    if vol * math.sqrt(tau) == 0.0:
        forward = spot * math.exp(rate * tau)
        if kind == OptionKind.CALL:
            return disc * max(forward - strike, 0.0)
        return disc * max(strike - forward, 0.0)
    spread = vol * math.sqrt(tau)
    d1 = (math.log(spot / strike) + (rate + 0.5 * vol * vol) * tau) / spread
    d2 = d1 - spread
    if kind == OptionKind.CALL:
        return float(spot * norm.cdf(d1) - strike * disc * norm.cdf(d2))
    return float(strike * disc * norm.cdf(-d2) - spot * norm.cdf(-d1))


# Cross-check summary

def cross_check(
    p: CevParams, n_paths: int = 100_000, n_steps: int = 500, seed: int = 42,
    ctl: Optional[SeriesControl] = None,
) -> List[CheckRow]:
    """
    Compare the closed forms with every oracle: Monte Carlo prices, finite-difference
    Greeks, PDE residuals and density repricing at the contract strike.
    """
    rows: List[CheckRow] = []
    absorbed = absorption_probability(p)
    cfg = SdeConfig.risk_neutral(p, n_paths=n_paths, n_steps=n_steps, seed=seed)
    for kind in OptionKind:
        report = full_report(p, kind, ctl)
        estimate = mc_price(p, kind, cfg)
        z_score = (report.price - estimate.mean) / estimate.std_error if estimate.std_error > 0 else 0.0
        rows.append(CheckRow(
            section="mc", kind=kind.value, quantity="price",
            closed_form=report.price, reference=estimate.mean, error=z_score,
        ))
        rows.append(CheckRow(
            section="mc", kind=kind.value, quantity="absorbed_fraction",
            closed_form=absorbed, reference=estimate.absorbed_fraction,
            error=abs(absorbed - estimate.absorbed_fraction),
        ))
        numeric = fd_greeks(p, kind, ctl)
        for greek in ("delta", "gamma", "theta", "vega", "rho"):
            closed, approx = getattr(report, greek), getattr(numeric, greek)
            rows.append(CheckRow(
                section="fd", kind=kind.value, quantity=greek,
                closed_form=closed, reference=approx, error=abs(closed - approx) / max(abs(approx), 1e-300),
            ))
        residual = pde_residual(p, kind, ctl)
        rows.append(CheckRow(
            section="pde", kind=kind.value, quantity="residual",
            closed_form=residual, reference=0.0, error=abs(residual) / p.spot,
        ))
    repriced = density_call_price(p, p.strike)
    closed_call = full_report(p, OptionKind.CALL, ctl).price
    rows.append(CheckRow(
        section="density", kind=OptionKind.CALL.value, quantity="price",
        closed_form=closed_call, reference=repriced, error=abs(closed_call - repriced) / p.spot,
    ))
    return rows
