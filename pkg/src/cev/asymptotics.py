"""
Limit tables for the five asymptotic regimes of the CEV prices and Greeks, and a
harness that checks the closed forms converge to them.

Regimes: a) tau -> 0, b) sigma -> inf (driven through delta), c) K -> inf,
d) r -> inf, e) T -> inf.
"""
import math
from enum import Enum
from typing import Dict, List, Optional, Sequence

from pydantic import BaseModel, ConfigDict

from .errors import DomainError, NonConvergence
from .greeks import full_report
from .model import CevParams
from .pricing import OptionKind
from .serialization import format_number
from .settings import status
from .specfun import SeriesControl

QUANTITIES = (
    "call",
    "put",
    "delta_call",
    "delta_put",
    "gamma",
    "theta_call",
    "theta_put",
    "vega",
    "rho_call",
    "rho_put",
)

DEFAULT_TOL = 1e-3
MIN_SCHEDULE = 4


class LimitCase(str, Enum):
    TAU_TO_ZERO = "a"
    SIGMA_TO_INF = "b"
    STRIKE_TO_INF = "c"
    RATE_TO_INF = "d"
    MATURITY_TO_INF = "e"


# parameter each case drives along its schedule
DRIVEN_FIELD = {
    LimitCase.TAU_TO_ZERO: "tau",
    LimitCase.SIGMA_TO_INF: "delta_vol",
    LimitCase.STRIKE_TO_INF: "strike",
    LimitCase.RATE_TO_INF: "rate",
    LimitCase.MATURITY_TO_INF: "tau",
}


class Verdict(str, Enum):
    CONVERGED = "converged"
    DIVERGED_AS_EXPECTED = "diverged_as_expected"
    FAILED = "FAILED"


class LimitTable(BaseModel):
    model_config = ConfigDict(frozen=True)

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


class ConvergenceReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    case_id: LimitCase
    quantity: str
    driven: str
    schedule: List[float]
    values: List[float]
    errors: List[float]
    limit: float
    verdict: Verdict

    def to_row(self) -> List[object]:
        return [
            self.case_id.value,
            self.quantity,
            self.driven,
            self.schedule[-1],
            self.limit,
            self.values[-1],
            self.errors[-1],
            self.verdict.value,
        ]


REPORT_COLUMNS = ["case", "quantity", "driven", "last_point", "limit", "last_value", "last_error", "verdict"]


def _zero_greeks(**overrides: float) -> LimitTable:
    fields = {name: 0.0 for name in QUANTITIES}
    fields.update(overrides)
    return LimitTable(**fields)


def limit_table(case: LimitCase, p: CevParams) -> LimitTable:
    """Limits of the ten quantities in the given regime, from the fixed parameters of p."""
    s, k, r = p.spot, p.strike, p.rate
    if case == LimitCase.TAU_TO_ZERO:
        if s == k:
            raise DomainError("spot", "the tau -> 0 limits need spot != strike; at the money is not covered")
        if s > k:
            return _zero_greeks(call=s - k, delta_call=1.0, theta_call=-r * k)
        return _zero_greeks(put=k - s, delta_put=-1.0, theta_put=r * k)
    if case == LimitCase.SIGMA_TO_INF:
        pv_strike = k * math.exp(-r * p.tau)
        return _zero_greeks(
            call=s, put=pv_strike, delta_call=1.0, theta_put=r * pv_strike, rho_put=-p.tau * pv_strike
        )
    if case == LimitCase.STRIKE_TO_INF:
        return _zero_greeks(put=math.inf, delta_put=-1.0, theta_put=math.inf, rho_put=-math.inf)
    # r -> inf and T -> inf share one table
    return _zero_greeks(call=s, delta_call=1.0)


def default_params(case: LimitCase) -> CevParams:
    spot = 110.0 if case == LimitCase.TAU_TO_ZERO else 100.0
    return CevParams(spot=spot, strike=100.0, rate=0.05, delta_vol=2.0, beta=1.0, tau=1.0)


def default_schedule(case: LimitCase, p: CevParams) -> List[float]:
    if case == LimitCase.TAU_TO_ZERO:
        return [10.0 ** -n for n in range(1, 6)]
    if case == LimitCase.SIGMA_TO_INF:
        return [10.0 ** n for n in range(1, 7)]
    if case == LimitCase.STRIKE_TO_INF:
        return [p.spot * 2.0 ** n for n in range(1, 6)]
    if case == LimitCase.RATE_TO_INF:
        return [2.0 ** n for n in range(0, 6)]
    return [10.0 * 2.0 ** n for n in range(0, 7)]


def _check_schedule(schedule: Sequence[float]) -> None:
    if len(schedule) < MIN_SCHEDULE:
        raise DomainError("schedule", f"need at least {MIN_SCHEDULE} points, got {len(schedule)}")
    steps = [b - a for a, b in zip(schedule, schedule[1:])]
    if not (all(step > 0 for step in steps) or all(step < 0 for step in steps)):
        raise DomainError("schedule", "must be strictly monotone")


def _observe(p: CevParams, ctl: Optional[SeriesControl]) -> Dict[str, float]:
    call = full_report(p, OptionKind.CALL, ctl)
    put = full_report(p, OptionKind.PUT, ctl)
    return {
        "call": call.price,
        "put": put.price,
        "delta_call": call.delta,
        "delta_put": put.delta,
        "gamma": call.gamma,
        "theta_call": call.theta,
        "theta_put": put.theta,
        "vega": call.vega,
        "rho_call": call.rho,
        "rho_put": put.rho,
    }


def judge(values: Sequence[float], limit: float, tol: float, noise: float = 0.0) -> Verdict:
    """
    Finite limits converge when the final error is within tol (1 + |limit|) and the
    errors over the last half of the schedule do not grow beyond a rounding floor.
    noise widens that floor by the absolute error the evaluations may carry.
    Infinite limits must keep the limit's sign, grow strictly in magnitude and grow
    at least tenfold over the schedule.
    """
    if any(math.isnan(value) for value in values):
        return Verdict.FAILED
    if math.isinf(limit):
        sign = 1.0 if limit > 0 else -1.0
        magnitudes = [abs(value) for value in values]
        right_sign = all(math.isfinite(value) and value * sign > 0 for value in values)
        growing = all(b > a for a, b in zip(magnitudes, magnitudes[1:]))
        if right_sign and growing and magnitudes[-1] >= 10.0 * magnitudes[0]:
            return Verdict.DIVERGED_AS_EXPECTED
        return Verdict.FAILED
    scale = 1.0 + abs(limit)
    errors = [abs(value - limit) for value in values]
    tail = errors[len(errors) // 2:]
    floor = 1e-12 * scale + noise
    settling = all(b <= a + floor for a, b in zip(tail, tail[1:]))
    if settling and errors[-1] <= tol * scale:
        return Verdict.CONVERGED
    return Verdict.FAILED


def _cancellation_scale(p: CevParams) -> float:
    """Size of the terms that cancel in prices, thetas and rhos."""
    return p.spot + p.strike * (1.0 + p.tau) * (1.0 + abs(p.rate))


def _errors(values: Sequence[float], limit: float) -> List[float]:
    if math.isinf(limit):
        return [1.0 / abs(value) if value != 0 else math.inf for value in values]
    return [abs(value - limit) for value in values]


def verify_case(
    case: LimitCase,
    p: Optional[CevParams] = None,
    schedule: Optional[Sequence[float]] = None,
    tol: float = DEFAULT_TOL,
    ctl: Optional[SeriesControl] = None,
) -> List[ConvergenceReport]:
    """
    Evaluate all ten quantities along the schedule and compare with limit_table.

    Verdicts are reported, never raised. For tau -> 0 a series that stops converging
    ends the schedule early at the last good point.
    """
    if not tol > 0:
        raise DomainError("tol", f"must be > 0, got {tol!r}")
    p = p or default_params(case)
    table = limit_table(case, p).model_dump()
    points = list(schedule) if schedule is not None else default_schedule(case, p)
    _check_schedule(points)
    driven = DRIVEN_FIELD[case]

    status(f"🚀 Checking case {case.value}: {driven} over {len(points)} points")
    used: List[float] = []
    observed: List[Dict[str, float]] = []
    for value in points:
        try:
            observed.append(_observe(p.replace(**{driven: value}), ctl))
        except NonConvergence as exc:
            if case != LimitCase.TAU_TO_ZERO or len(observed) < 2:
                raise
            status(f"❌ Series stopped converging at {driven}={value!r}: {exc}")
            break
        used.append(value)

    noise = (ctl or SeriesControl.from_env()).rel_tol * max(
        _cancellation_scale(p.replace(**{driven: value})) for value in used
    )
    reports = []
    for quantity in QUANTITIES:
        values = [row[quantity] for row in observed]
        limit = table[quantity]
        reports.append(
            ConvergenceReport(
                case_id=case,
                quantity=quantity,
                driven=driven,
                schedule=used,
                values=values,
                errors=_errors(values, limit),
                limit=limit,
                verdict=judge(values, limit, tol, noise),
            )
        )
    failed = sum(report.verdict == Verdict.FAILED for report in reports)
    status(f"✅ Case {case.value}: {len(reports) - failed} passed, {failed} failed")
    return reports


def render_table(reports: Sequence[ConvergenceReport]) -> str:
    """Fixed-width text table, one line per report."""
    rows = [REPORT_COLUMNS] + [
        [cell if isinstance(cell, str) else format_number(cell) for cell in report.to_row()]
        for report in reports
    ]
    widths = [max(len(row[i]) for row in rows) for i in range(len(REPORT_COLUMNS))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines) + "\n"
