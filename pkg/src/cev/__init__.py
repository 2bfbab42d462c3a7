"""
Closed-form CEV option prices, Greeks and risk-neutral density, with asymptotic limit
checks and independent numerical oracles.
"""
from .errors import CevError, DomainError, NonConvergence
from .model import CevParams, TransformedVars, sigma0, transform
from .pricing import OptionKind, call_price, put_price
from .greeks import GreeksReport, full_report

__all__ = [
    "CevError",
    "CevParams",
    "DomainError",
    "GreeksReport",
    "NonConvergence",
    "OptionKind",
    "TransformedVars",
    "call_price",
    "full_report",
    "put_price",
    "sigma0",
    "transform",
]
