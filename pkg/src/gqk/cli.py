"""``gqk`` command line: check documents, convert structures, build doubles.

Exit status: 0 when every check passes, 1 when any fails, 2 on usage or
parse errors.
"""

from __future__ import annotations

import sys

import click

from .algebroid import sign_table
from .dsl import parse
from .errors import GQKError, ParseError
from .runner import Options, convert, double_text, reports_text, run

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    try:
        return parse(source)
    except ParseError as exc:
        click.echo(f"{path}: {exc}", err=True)
        sys.exit(EXIT_USAGE)


@click.group()
def main():
    """Exact checks for graded Q-manifold presentations."""


@main.command()
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--only", "only", default=None, help="Run only checks on this subject.")
@click.option("--explain", is_flag=True, help="Include constructed fields, bracket tables and the sign table.")
@click.option("--strict-weights", is_flag=True, help="Check weight preservation in transition checks.")
@click.option("--seed", type=int, default=None, help="Also run a seeded random suite of double vector bundles.")
@click.option("--plus-sign", is_flag=True, help="Test the plus-sign pairing instead of the minus-sign one.")
@click.option("--timing", is_flag=True, help="Report elapsed time per check.")
def check(path, only, explain, strict_weights, seed, plus_sign, timing):
    """Run the check directives of a document; one JSON object per check."""
    doc = _load(path)
    if only is not None and only not in doc.objects:
        click.echo(f"error: no declaration named {only!r}", err=True)
        sys.exit(EXIT_USAGE)
    opts = Options(explain=explain, strict_weights=strict_weights, seed=seed, plus_sign=plus_sign, timing=timing)
    reports = run(doc, only, opts)
    click.echo(reports_text(reports, timing), nl=False)
    sys.exit(EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL)


@main.command("convert")
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--subject", required=True, help="Declaration to convert.")
@click.option(
    "--to",
    "target",
    required=True,
    type=click.Choice(["pi-anti", "poisson-dual", "schouten-antidual", "classical"]),
)
def convert_cmd(path, subject, target):
    """Emit an algebroid in another presentation, in the same text format."""
    doc = _load(path)
    if subject not in doc.objects:
        click.echo(f"error: no declaration named {subject!r}", err=True)
        sys.exit(EXIT_USAGE)
    try:
        click.echo(convert(doc, subject, target), nl=False)
    except GQKError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)


@main.command("double")
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--subject", required=True, help="Bialgebroid declaration.")
def double_cmd(path, subject):
    """Emit the cotangent double of a bialgebroid with its verdicts."""
    doc = _load(path)
    if subject not in doc.objects:
        click.echo(f"error: no declaration named {subject!r}", err=True)
        sys.exit(EXIT_USAGE)
    try:
        click.echo(double_text(doc, subject), nl=False)
    except GQKError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)


@main.command("signs")
def signs_cmd():
    """Print the sign conventions in use."""
    click.echo(sign_table())


if __name__ == "__main__":  # pragma: no cover
    main()
