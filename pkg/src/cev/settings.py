"""
Environment-driven configuration
"""
import os
import sys
from typing import Optional

from dotenv import load_dotenv, find_dotenv

from .errors import DomainError

# Load environment variables from the nearest .env if present
load_dotenv(find_dotenv(usecwd=True), override=False)

DEFAULT_SERIES_TOL = 1e-13
DEFAULT_MAX_TERMS = 1_000_000
DEFAULT_CHUNK_PATHS = 50_000

_TRUTHY = {"1", "true", "yes", "on"}
_verbose_override: Optional[bool] = None


def _read_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = float(raw)
    except ValueError:
        raise DomainError(name, f"not a number: {raw!r}")
    if not value > 0 or value == float("inf"):
        raise DomainError(name, f"must be a positive finite number, got {raw!r}")
    return value


def _read_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise DomainError(name, f"not an integer: {raw!r}")
    if value < 1:
        raise DomainError(name, f"must be >= 1, got {raw!r}")
    return value


def series_tolerance() -> float:
    """Relative tail tolerance for the chi-squared series (CEV_SERIES_TOL)."""
    return _read_float("CEV_SERIES_TOL", DEFAULT_SERIES_TOL)


def series_max_terms() -> int:
    return _read_int("CEV_MAX_TERMS", DEFAULT_MAX_TERMS)


def mc_chunk_paths() -> int:
    """Paths per Monte Carlo chunk, rounded up to an even count for antithetic pairs."""
    value = _read_int("CEV_MC_CHUNK_PATHS", DEFAULT_CHUNK_PATHS)
    return value + (value % 2)


def broker_url() -> Optional[str]:
    # Prioritize the explicit setting, then the public Redis URL
    for key in ("CEV_BROKER_URL", "REDIS_PUBLIC_URL", "REDIS_URL"):
        value = os.getenv(key)
        if value:
            return value
    return None


def set_verbose(flag: Optional[bool]) -> None:
    """Force status output on or off; None falls back to CEV_VERBOSE."""
    global _verbose_override
    _verbose_override = flag


def verbose() -> bool:
    if _verbose_override is not None:
        return _verbose_override
    return os.getenv("CEV_VERBOSE", "").strip().lower() in _TRUTHY


def status(message: str) -> None:
    """Print an emoji status line to stderr when verbose output is on."""
    if verbose():
        print(message, file=sys.stderr)
