"""
Shared fixtures for the CEV test suite
"""
import numpy as np
import pytest

from src.cev import settings
from src.cev.model import CevParams, delta_vol_for_sigma0

ENV_KEYS = (
    "CEV_SERIES_TOL",
    "CEV_MAX_TERMS",
    "CEV_MC_CHUNK_PATHS",
    "CEV_BROKER_URL",
    "REDIS_PUBLIC_URL",
    "REDIS_URL",
    "CEV_VERBOSE",
)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Every test starts from defaults: no overrides, no broker, quiet."""
    for key in ENV_KEYS:
        monkeypatch.delenv(key, raising=False)
    settings.set_verbose(None)
    yield
    settings.set_verbose(None)


@pytest.fixture
def standard():
    """S = K = 100, r = 5%, delta = 2, beta = 1, one year: sigma0 = 0.2."""
    return CevParams(spot=100.0, strike=100.0, rate=0.05, delta_vol=2.0, beta=1.0, tau=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_params(rng, count):
    """Parameter sets over S/K in [0.5, 2], beta in [0.2, 1.8], tau in [0.05, 3], r in [0, 0.1], sigma0 in [0.1, 0.6]."""
    strike = 100.0
    out = []
    for _ in range(count):
        spot = strike * float(rng.uniform(0.5, 2.0))
        beta = float(rng.uniform(0.2, 1.8))
        out.append(CevParams(
            spot=spot,
            strike=strike,
            rate=float(rng.uniform(0.0, 0.1)),
            delta_vol=delta_vol_for_sigma0(float(rng.uniform(0.1, 0.6)), spot, beta),
            beta=beta,
            tau=float(rng.uniform(0.05, 3.0)),
        ))
    return out


@pytest.fixture
def param_grid(rng):
    return lambda count: random_params(rng, count)
