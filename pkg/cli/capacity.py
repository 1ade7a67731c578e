"""
`pivq capacity` and `pivq capacity-curve`.
"""
from typing import Optional

import click

from analysis.capacity import (
    bottleneck_report,
    capacity_curve,
    matching_capacity_bits,
    nearest_capacity_bits,
    standard_vq_capacity_bits,
)
from cli.utils import handle_data_error, write_text


@click.command()
@click.option("--kdata", type=click.IntRange(min=1), required=True, help="Codebook usage over the dataset (K for --method standard)")
@click.option("--kimg", type=click.IntRange(min=1), default=None, help="Per-image usage (nearest and compare)")
@click.option("--len", "length", type=click.IntRange(min=0), required=True, help="Representation length L")
@click.option(
    "--method",
    type=click.Choice(["nearest", "matching", "standard", "compare"]),
    default="matching",
    show_default=True,
)
@handle_data_error
def capacity(kdata: int, kimg: Optional[int], length: int, method: str):
    """Print the information capacity in bits."""
    if method in ("nearest", "compare") and kimg is None:
        raise click.UsageError(f"--kimg is required for --method {method}")
    if method == "nearest":
        click.echo(f"{nearest_capacity_bits(kdata, kimg, length):.3f}")
    elif method == "matching":
        click.echo(f"{matching_capacity_bits(kdata, length):.3f}")
    elif method == "standard":
        click.echo(f"{standard_vq_capacity_bits(kdata, length):.3f}")
    else:
        report = bottleneck_report(kdata, kimg, length)
        click.echo(f"nearest: {report.nearest_bits:.3f}")
        click.echo(f"matching: {report.matching_bits:.3f}")
        click.echo(f"standard: {report.standard_bits:.3f}")
        click.echo(f"ratio: {report.ratio:.3f}")


@click.command("capacity-curve")
@click.option("--k", "k", type=click.IntRange(min=1), default=4096, show_default=True, help="Codebook size")
@click.option("--kimg", type=click.IntRange(min=1), default=49, show_default=True, help="Fixed per-image usage for the nearest curve")
@click.option("--lmax", type=click.IntRange(min=1), default=1024, show_default=True)
@click.option("--lmin", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="CSV output (stdout if omitted)")
@handle_data_error
def capacity_curve_command(k: int, kimg: int, lmax: int, lmin: int, out_path: Optional[str]):
    """Capacity of standard, nearest and matching bottlenecks for L in [lmin, lmax]."""
    if lmin > lmax:
        raise click.UsageError("--lmin must not exceed --lmax")
    curve = capacity_curve(k, kimg, range(lmin, lmax + 1))
    write_text(curve.to_csv(index=False, float_format="%.6f"), out_path)
