"""Click CLI definitions."""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Any, Callable

import click

from hodgelab import __version__
from hodgelab.core.errors import (
    CertificateFailure,
    HodgeLabError,
    MissingFlag,
    ParseError,
    SignUndecided,
    UnknownCommand,
    WrongSignature,
)
from hodgelab.services.dispatch import dispatch
from hodgelab.services.reports import render_text
from hodgelab.utils.config import build_config
from hodgelab.utils.logger import setup_logging
from hodgelab.utils.rationals import format_poly, parse_field_coeffs, parse_rational, parse_rational_list

USAGE_ERRORS = (ParseError, UnknownCommand, MissingFlag)


def _run(command: str, flags: dict[str, Any], output_format: str | None, verbose: bool, debug: bool) -> None:
    """Dispatch one command, print its report and set the exit code."""
    setup_logging(verbose=verbose or debug, debug=debug)

    cli_args = {"output_format": output_format, "verbose": verbose or None}
    # Remove None values so they don't override config
    cli_args = {k: v for k, v in cli_args.items() if v is not None}
    try:
        config = build_config(cli_args=cli_args)
    except ValueError as e:
        raise click.UsageError(str(e))
    config["progress"] = config["output_format"] == "text" and sys.stderr.isatty()

    try:
        report = dispatch(command, flags, config)
    except USAGE_ERRORS as e:
        raise click.UsageError(str(e))
    except (HodgeLabError, CertificateFailure, SignUndecided) as e:
        raise click.ClickException(f"{type(e).__name__}: {e}")

    if config["output_format"] == "structured":
        click.echo(report.to_json())
    else:
        render_text(report)
    if not report.passed:
        sys.exit(1)


def _output_options(func: Callable) -> Callable:
    func = click.option("--debug", is_flag=True, default=False, help="Debug mode: log search steps")(func)
    func = click.option("-v", "--verbose", is_flag=True, default=False, help="Verbose output")(func)
    func = click.option(
        "--format", "output_format", type=click.Choice(["text", "structured"]), default=None,
        help="Report format (default: text)",
    )(func)
    return func


def _fixture_option(func: Callable) -> Callable:
    return click.option("--fixture", default=None, help="Fixture name or path to a fixture JSON file")(func)


def _point_options(func: Callable) -> Callable:
    func = click.option("--tau", default=None, help="Equator sample: rational rotation parameter (d > 0)")(func)
    func = click.option("--point", default=None, help="Period point a,b,c as polynomials in g")(func)
    func = click.option("--B", "bfield", default=None, help="B-field as comma-separated rationals (d = 0)")(func)
    func = click.option("--family", default=None, help="Brilliant family label from the fixture")(func)
    return func


@click.group()
@click.version_option(version=__version__, prog_name="hodgelab")
def cli() -> None:
    """hodgelab - Exact computations with K3-type Hodge structures."""


@cli.command()
@_fixture_option
@_output_options
def validate(fixture: str | None, output_format: str | None, verbose: bool, debug: bool) -> None:
    """Load a fixture and check its period, signature and families."""
    _run("validate", {"fixture": fixture}, output_format, verbose, debug)


@cli.command()
@_fixture_option
@_point_options
@_output_options
def classify(
    fixture: str | None,
    family: str | None,
    bfield: str | None,
    point: str | None,
    tau: str | None,
    output_format: str | None,
    verbose: bool,
    debug: bool,
) -> None:
    """Domain class of a brilliant family, and the status of a point in it."""
    flags = {"fixture": fixture, "family": family, "B": bfield, "point": point, "tau": tau}
    _run("classify", flags, output_format, verbose, debug)


@cli.command()
@_fixture_option
@_point_options
@_output_options
def nl(
    fixture: str | None,
    family: str | None,
    bfield: str | None,
    point: str | None,
    tau: str | None,
    output_format: str | None,
    verbose: bool,
    debug: bool,
) -> None:
    """Noether-Lefschetz test for a point of a brilliant family."""
    flags = {"fixture": fixture, "family": family, "B": bfield, "point": point, "tau": tau}
    _run("nl", flags, output_format, verbose, debug)


@cli.command()
@_fixture_option
@_point_options
@_output_options
def brauer(
    fixture: str | None,
    family: str | None,
    bfield: str | None,
    point: str | None,
    tau: str | None,
    output_format: str | None,
    verbose: bool,
    debug: bool,
) -> None:
    """Brauer class of a point on the Brauer line of a d = 0 family."""
    flags = {"fixture": fixture, "family": family, "B": bfield, "point": point, "tau": tau}
    _run("brauer", flags, output_format, verbose, debug)


@cli.command()
@_fixture_option
@_point_options
@_output_options
def endo(
    fixture: str | None,
    family: str | None,
    bfield: str | None,
    point: str | None,
    tau: str | None,
    output_format: str | None,
    verbose: bool,
    debug: bool,
) -> None:
    """Endomorphism field of the base, and its propagation to a fiber."""
    flags = {"fixture": fixture, "family": family, "B": bfield, "point": point, "tau": tau}
    _run("endo", flags, output_format, verbose, debug)


@cli.command()
@_fixture_option
@click.option("--two-class", "two_class", default=None, help="Two-class family label (default: the first one)")
@click.option("--connector", default=None, help="Connector class, e.g. e1+l1 or a comma list")
@click.option("--to", "target", default=None, help="brauer (default) or points")
@click.option("--ell", default=None, help="l = c1*l1 + c2*l2: l1 (default), l2, f or c1,c2")
@_output_options
def compose(
    fixture: str | None,
    two_class: str | None,
    connector: str | None,
    target: str | None,
    ell: str | None,
    output_format: str | None,
    verbose: bool,
    debug: bool,
) -> None:
    """Intersect a connector curve with D_l and transport the points to L_f."""
    flags = {"fixture": fixture, "two_class": two_class, "connector": connector, "to": target, "ell": ell}
    _run("compose", flags, output_format, verbose, debug)


@cli.command()
@_fixture_option
@click.option("--two-class", "two_class", default=None, help="Two-class family label (default: the first one)")
@click.option("--connector", default=None, help="Connector class, e.g. e1+l1 or a comma list")
@click.option("--s-grid", "s_grid", default=None, help="Comma-separated s values (default: 0,1/2,3/4,1)")
@click.option("--tau", default=None, help="Equator rotation parameter (default: 0)")
@_output_options
def specialize(
    fixture: str | None,
    two_class: str | None,
    connector: str | None,
    s_grid: str | None,
    tau: str | None,
    output_format: str | None,
    verbose: bool,
    debug: bool,
) -> None:
    """Follow intersections along l1 + s*l2 down to the Brauer class at s = 1."""
    flags = {"fixture": fixture, "two_class": two_class, "connector": connector, "s_grid": s_grid, "tau": tau}
    _run("specialize", flags, output_format, verbose, debug)


@cli.command("fixtures")
@_fixture_option
@_output_options
def fixtures_command(fixture: str | None, output_format: str | None, verbose: bool, debug: bool) -> None:
    """List bundled fixtures, or show one in serialized form."""
    _run("fixtures", {"fixture": fixture}, output_format, verbose, debug)


def _blocks(values: tuple[str, ...], option: str) -> list[tuple[str, Any]]:
    out = []
    for value in values:
        label, sep, d = value.partition("=")
        if not sep or not label:
            raise click.UsageError(f"{option} expects label=d, got {value!r}")
        try:
            out.append((label, parse_rational(d)))
        except ValueError as e:
            raise click.UsageError(f"{option}: {e}")
    return out


@cli.command()
@click.option("--minpoly", required=True, help="Minimal polynomial coefficients, low to high")
@click.option("--conj", "conj_image", required=True, help="Image of the generator under conjugation")
@click.option("--real", required=True, help="Embedding box real interval lo,hi")
@click.option("--imag", required=True, help="Embedding box imaginary interval lo,hi")
@click.option("--xi", required=True, help="Scaling element, a conj-fixed polynomial in g")
@click.option("--name", default="generated", help="Fixture name")
@click.option("--brilliant", multiple=True, help="Brilliant block label=d (repeatable)")
@click.option("--two-class", "two_class", multiple=True, help="Two-class block label=d (repeatable)")
@click.option("--output", "-o", type=click.Path(path_type=Path), default=None, help="Output file path")
@click.option("-v", "--verbose", is_flag=True, default=False, help="Verbose output")
def generate(
    minpoly: str,
    conj_image: str,
    real: str,
    imag: str,
    xi: str,
    name: str,
    brilliant: tuple[str, ...],
    two_class: tuple[str, ...],
    output: Path | None,
    verbose: bool,
) -> None:
    """Generate a CM fixture from a trace form Tr(xi * x * conj(y))."""
    from hodgelab.services.fixtures import dump_fixture, field_from_lists, generate_cm_fixture

    setup_logging(verbose=verbose)
    try:
        k = field_from_lists(
            parse_rational_list(minpoly),
            parse_rational_list(conj_image),
            parse_rational_list(real),
            parse_rational_list(imag),
        )
        xi_coeffs = parse_field_coeffs(xi)
    except (ParseError, ValueError) as e:
        raise click.UsageError(str(e))

    try:
        doc = generate_cm_fixture(
            k, xi_coeffs, name=name,
            brilliant=_blocks(brilliant, "--brilliant"),
            two_class=_blocks(two_class, "--two-class"),
        )
    except WrongSignature as e:
        for suggestion in e.suggestions:
            click.echo(f"  try xi = {format_poly(suggestion, 'g')}", err=True)
        raise click.ClickException(f"WrongSignature: {e}")
    except HodgeLabError as e:
        raise click.ClickException(f"{type(e).__name__}: {e}")

    text = dump_fixture(doc)
    if output:
        output.write_text(text, encoding="utf-8")
        click.echo(f"Written: {output}")
    else:
        click.echo(text, nl=False)


@cli.command()
def config() -> None:
    """Show current configuration."""
    cfg = build_config()
    for key, val in sorted(cfg.items()):
        click.echo(f"  {key}: {val}")
