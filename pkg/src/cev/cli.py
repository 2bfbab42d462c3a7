"""
Command line interface: prices, Greeks, density grids, limit checks and oracle
cross-checks as JSON or CSV.

Exit codes: 0 on success, 1 on invalid input (one `error: <field>: <reason>` line on
stderr), 2 when a series fails to converge.
"""
import json
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

import click
from pydantic import ValidationError

from . import settings
from .asymptotics import DEFAULT_TOL, LimitCase, REPORT_COLUMNS, default_params, render_table, verify_case
from .density import density_grid
from .errors import DomainError, NonConvergence
from .greeks import ThetaConvention, full_report, with_theta_convention
from .model import CevParams
from .oracle import cross_check
from .pricing import OptionKind, call_price, discount, put_price
from .serialization import rows_from_models, to_csv, to_json
from .smile import SmileRow, smile

PARAM_FIELDS = ("spot", "strike", "rate", "delta_vol", "beta", "tau")


def _param_options(command: Callable) -> Callable:
    options = [
        click.option("--spot", "-S", type=float, default=None, help="Spot price S"),
        click.option("--strike", "-K", type=float, default=None, help="Strike K"),
        click.option("--rate", "-r", type=float, default=None, help="Continuously compounded rate"),
        click.option("--delta-vol", "delta_vol", type=float, default=None, help="CEV volatility scale delta"),
        click.option("--beta", type=float, default=None, help="Elasticity, 0 < beta < 2"),
        click.option("--tau", "-T", type=float, default=None, help="Time to maturity in years"),
        click.option(
            "--params", "params_file", type=click.Path(), default=None,
            help="JSON file with {spot, strike, rate, delta_vol, beta, tau}; flags override it",
        ),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _format_option(default: str, choices: Sequence[str] = ("json", "csv")) -> Callable:
    return click.option("--format", "fmt", type=click.Choice(list(choices)), default=default, show_default=True)


def load_params(
    params_file: Optional[str], overrides: Dict[str, Optional[float]], defaults: Optional[CevParams] = None
) -> CevParams:
    """Merge defaults, then the JSON document, then flags, and validate."""
    data: Dict[str, Any] = defaults.model_dump() if defaults else {}
    if params_file:
        try:
            with open(params_file) as handle:
                document = json.load(handle)
        except OSError as exc:
            raise DomainError("params", f"cannot read {params_file}: {exc.strerror}")
        except json.JSONDecodeError as exc:
            raise DomainError("params", f"invalid JSON in {params_file}: {exc.msg}")
        if not isinstance(document, dict):
            raise DomainError("params", "must be a JSON object")
        data.update(document)
    data.update({name: value for name, value in overrides.items() if value is not None})
    for name in PARAM_FIELDS:
        if name not in data:
            raise DomainError(name, "missing; pass it as a flag or in --params")
    return CevParams.model_validate(data)


def _float_list(text: str, field: str) -> List[float]:
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise DomainError(field, f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise DomainError(field, "empty list")
    return values


def _emit_record(record: Dict[str, Any], fmt: str) -> None:
    if fmt == "csv":
        click.echo(to_csv(list(record), [list(record.values())]), nl=False)
    else:
        click.echo(to_json(record))


def _params_of(fields: Dict[str, Any]) -> Dict[str, Optional[float]]:
    return {name: fields.pop(name) for name in PARAM_FIELDS}


@click.group()
@click.option("--verbose", is_flag=True, default=False, help="Status lines on stderr")
def cli(verbose: bool) -> None:
    """CEV option pricing toolkit."""
    settings.set_verbose(True if verbose else None)


@cli.command("price")
@_param_options
@_format_option("json")
def price_command(params_file: Optional[str], fmt: str, **fields: Any) -> None:
    """Call and put prices with the put-call parity gap."""
    p = load_params(params_file, _params_of(fields))
    call, put = call_price(p), put_price(p)
    gap = call - put - (p.spot - p.strike * discount(p))
    _emit_record({"call": call, "put": put, "parity_gap": gap}, fmt)


@cli.command("greeks")
@_param_options
@click.option("--kind", type=click.Choice([kind.value for kind in OptionKind]), default="call", show_default=True)
@click.option(
    "--theta-convention", "theta_convention",
    type=click.Choice([convention.value for convention in ThetaConvention]), default="t", show_default=True,
    help="t reports dV/dt, tau reports dV/dtau",
)
@_format_option("json")
def greeks_command(params_file: Optional[str], kind: str, theta_convention: str, fmt: str, **fields: Any) -> None:
    """Price, delta, gamma, theta, vega and rho."""
    p = load_params(params_file, _params_of(fields))
    report = with_theta_convention(full_report(p, OptionKind(kind)), ThetaConvention(theta_convention))
    _emit_record(report.model_dump(), fmt)


@cli.command("density")
@_param_options
@click.option("--lo", type=float, default=None, help="Lower grid bound, default 1e-3 * spot")
@click.option("--hi", type=float, default=None, help="Upper grid bound, default 20 * spot")
@click.option("--n", "n_points", type=int, default=2000, show_default=True)
@_format_option("csv")
def density_command(
    params_file: Optional[str], lo: Optional[float], hi: Optional[float], n_points: int, fmt: str, **fields: Any
) -> None:
    """Risk-neutral density on a log-spaced grid."""
    p = load_params(params_file, _params_of(fields))
    grid = density_grid(
        p,
        lo if lo is not None else 1e-3 * p.spot,
        hi if hi is not None else 20.0 * p.spot,
        n_points,
    )
    if fmt == "csv":
        click.echo(grid.to_csv(), nl=False)
    else:
        click.echo(grid.to_json())


@cli.command("limits")
@_param_options
@click.option("--case", "case_id", type=click.Choice([case.value for case in LimitCase]), required=True)
@click.option("--tol", type=float, default=DEFAULT_TOL, show_default=True)
@click.option("--schedule", default=None, help="Comma-separated values of the driven parameter")
@_format_option("table", ("table", "json", "csv"))
def limits_command(
    params_file: Optional[str], case_id: str, tol: float, schedule: Optional[str], fmt: str, **fields: Any
) -> None:
    """Check the asymptotic limits of one regime."""
    case = LimitCase(case_id)
    p = load_params(params_file, _params_of(fields), defaults=default_params(case))
    points = _float_list(schedule, "schedule") if schedule else None
    reports = verify_case(case, p, points, tol)
    if fmt == "json":
        click.echo(to_json([report.model_dump() for report in reports]))
    elif fmt == "csv":
        click.echo(to_csv(REPORT_COLUMNS, [report.to_row() for report in reports]), nl=False)
    else:
        click.echo(render_table(reports), nl=False)


@cli.command("verify")
@_param_options
@click.option("--paths", "n_paths", type=click.IntRange(min=1), default=100_000, show_default=True)
@click.option("--steps", "n_steps", type=click.IntRange(min=1), default=500, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=42, show_default=True)
@_format_option("json")
def verify_command(params_file: Optional[str], n_paths: int, n_steps: int, seed: int, fmt: str, **fields: Any) -> None:
    """Cross-check closed forms against Monte Carlo, finite differences, the PDE and the density."""
    p = load_params(params_file, _params_of(fields))
    settings.status(f"🔧 Cross-checking with {n_paths} paths, {n_steps} steps, seed {seed}")
    rows = cross_check(p, n_paths=n_paths, n_steps=n_steps, seed=seed)
    if fmt == "csv":
        click.echo(to_csv(list(rows[0].model_dump()), rows_from_models(rows)), nl=False)
    else:
        click.echo(to_json({"checks": [row.model_dump() for row in rows]}))


@cli.command("smile")
@_param_options
@click.option("--strikes", required=True, help="Comma-separated strikes, e.g. 80,90,100")
@_format_option("csv")
def smile_command(params_file: Optional[str], strikes: str, fmt: str, **fields: Any) -> None:
    """Prices, Greeks and density across strikes."""
    values = _float_list(strikes, "strikes")
    overrides = _params_of(fields)
    if overrides["strike"] is None:
        # the contract strike is replaced row by row
        overrides["strike"] = values[0]
    p = load_params(params_file, overrides)
    rows = smile(p, values)
    if fmt == "json":
        click.echo(to_json([row.model_dump() for row in rows]))
    else:
        click.echo(to_csv(list(SmileRow.model_fields), rows_from_models(rows)), nl=False)


def _one_line(text: str) -> str:
    return " ".join(str(text).split())


def _click_failure(exc: click.ClickException) -> str:
    if isinstance(exc, click.NoSuchOption):
        return f"{exc.option_name}: no such option"
    param = getattr(exc, "param", None)
    field = param.name if param is not None and param.name else "argv"
    return f"{field}: {_one_line(exc.message)}"


def _validation_failure(exc: ValidationError) -> str:
    first = exc.errors()[0]
    field = ".".join(str(part) for part in first["loc"]) or "params"
    return f"{field}: {_one_line(first['msg'])}"


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI on argv and return the process exit code."""
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        result = cli.main(args=args, prog_name="cev", standalone_mode=False)
    except NonConvergence as exc:
        click.echo(f"error: series: {_one_line(exc)}", err=True)
        return 2
    except DomainError as exc:
        click.echo(f"error: {exc.field}: {_one_line(exc.reason)}", err=True)
        return 1
    except ValidationError as exc:
        click.echo(f"error: {_validation_failure(exc)}", err=True)
        return 1
    except click.ClickException as exc:
        click.echo(f"error: {_click_failure(exc)}", err=True)
        return 1
    except click.exceptions.Abort:
        click.echo("error: argv: aborted", err=True)
        return 1
    return result if isinstance(result, int) else 0
